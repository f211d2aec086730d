//! Parameter sweeps over one axis, emitted as CSV, and the single-channel
//! advice report.
//!
//! Gains are given in dB and conferencing rates in bits/s/Hz throughout.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::af::{af_low_snr, conferencing_noise, maximize_af};
use crate::channel::{ConferencingCapacities, LinkGains};
use crate::error::{domain, Error, Result};
use crate::strategy1::{
    df_rate_closed_form, df_rate_lp, select_conferencing_link, upper_bound_i, ConferencingLink,
};
use crate::strategy2::{df_rate_ii, min_conferencing_for_capacity, upper_bound_ii};

/// A scalar channel parameter that can be fixed or swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    G1,
    G2,
    Gt1,
    Gt2,
    C12,
    C21,
}

impl Param {
    pub const ALL: [Param; 6] = [
        Param::G1,
        Param::G2,
        Param::Gt1,
        Param::Gt2,
        Param::C12,
        Param::C21,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Param::G1 => "g1",
            Param::G2 => "g2",
            Param::Gt1 => "gt1",
            Param::Gt2 => "gt2",
            Param::C12 => "c12",
            Param::C21 => "c21",
        }
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Param::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| domain(format!("unknown parameter `{s}`")))
    }
}

/// What the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// `g2` and `gt1` together, in dB.
    Gamma2Gtilde1Db,
    /// `c12` and `c21` together.
    ConfRate,
    Single(Param),
}

impl Axis {
    pub fn as_str(&self) -> &'static str {
        match self {
            Axis::Gamma2Gtilde1Db => "gamma2_gtilde1_db",
            Axis::ConfRate => "conf_rate",
            Axis::Single(p) => p.as_str(),
        }
    }

    fn covers(&self, p: Param) -> bool {
        match self {
            Axis::Gamma2Gtilde1Db => matches!(p, Param::G2 | Param::Gt1),
            Axis::ConfRate => matches!(p, Param::C12 | Param::C21),
            Axis::Single(q) => *q == p,
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma2_gtilde1_db" => Ok(Axis::Gamma2Gtilde1Db),
            "conf_rate" => Ok(Axis::ConfRate),
            other => other.parse().map(Axis::Single).map_err(|_| {
                domain(format!(
                    "unknown axis `{other}` (expected gamma2_gtilde1_db, conf_rate, g1, g2, gt1, gt2, c12 or c21)"
                ))
            }),
        }
    }
}

/// A column of the sweep table. Columns are always emitted in the order
/// of [`Quantity::ALL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quantity {
    UpperI,
    UpperII,
    DfILp,
    DfIClosed,
    DfII,
    Af,
    AfLowSnr,
    MinConfSum,
    SelectedLink,
}

impl Quantity {
    pub const ALL: [Quantity; 9] = [
        Quantity::UpperI,
        Quantity::UpperII,
        Quantity::DfILp,
        Quantity::DfIClosed,
        Quantity::DfII,
        Quantity::Af,
        Quantity::AfLowSnr,
        Quantity::MinConfSum,
        Quantity::SelectedLink,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Quantity::UpperI => "upper_I",
            Quantity::UpperII => "upper_II",
            Quantity::DfILp => "df_I_lp",
            Quantity::DfIClosed => "df_I_closed",
            Quantity::DfII => "df_II",
            Quantity::Af => "af",
            Quantity::AfLowSnr => "af_low_snr",
            Quantity::MinConfSum => "min_conf_sum",
            Quantity::SelectedLink => "selected_link",
        }
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.as_str() == s)
            .ok_or_else(|| domain(format!("unknown quantity `{s}`")))
    }
}

/// Inclusive `start:stop:step` range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl AxisRange {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(domain("range bounds must be finite"));
        }
        if step <= 0.0 {
            return Err(domain(format!("range step must be positive, got {step}")));
        }
        if start > stop {
            return Err(domain(format!("range start {start} exceeds stop {stop}")));
        }
        Ok(Self { start, stop, step })
    }

    /// Axis values in ascending order. `start + i*step` is used directly so
    /// that rounding does not accumulate; a value within `1e-9` steps of
    /// `stop` is kept.
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl FromStr for AxisRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(domain(format!(
                "range `{s}` is not of the form start:stop:step"
            )));
        };
        let num = |x: &str| {
            x.parse::<f64>()
                .map_err(|_| domain(format!("bad number `{x}` in range `{s}`")))
        };
        AxisRange::new(num(a)?, num(b)?, num(c)?)
    }
}

/// A complete sweep description.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub range: AxisRange,
    /// Values of the parameters the axis does not cover, indexed like
    /// [`Param::ALL`]. Gains in dB.
    pub fixed: [Option<f64>; 6],
    pub quantities: Vec<Quantity>,
}

impl SweepSpec {
    pub fn new(
        axis: Axis,
        range: AxisRange,
        fixed: &[(Param, f64)],
        quantities: &[Quantity],
    ) -> Result<Self> {
        let mut b = SweepBuilder {
            axis: Some(axis),
            range: Some(range),
            quantities: Some(quantities.to_vec()),
            ..Default::default()
        };
        for &(p, v) in fixed {
            b.fixed[p as usize] = Some(v);
        }
        b.build()
    }

    /// `g2 = gt1` swept from -10 to 30 dB with
    /// `g1 = gt2 = 10` dB and `C = 5`.
    pub fn gain_sweep() -> Self {
        Self::new(
            Axis::Gamma2Gtilde1Db,
            AxisRange::new(-10.0, 30.0, 1.0).expect("valid range"),
            &[
                (Param::G1, 10.0),
                (Param::Gt2, 10.0),
                (Param::C12, 5.0),
                (Param::C21, 5.0),
            ],
            &[
                Quantity::UpperI,
                Quantity::UpperII,
                Quantity::DfILp,
                Quantity::DfII,
            ],
        )
        .expect("valid spec")
    }

    /// Symmetric conferencing rate from 0 to 50 with `g1 = gt2 = 10` dB and
    /// `g2 = gt1 = 30` dB.
    pub fn conferencing_sweep() -> Self {
        Self::new(
            Axis::ConfRate,
            AxisRange::new(0.0, 50.0, 1.0).expect("valid range"),
            &[
                (Param::G1, 10.0),
                (Param::G2, 30.0),
                (Param::Gt1, 30.0),
                (Param::Gt2, 10.0),
            ],
            &[
                Quantity::UpperI,
                Quantity::UpperII,
                Quantity::DfILp,
                Quantity::DfII,
            ],
        )
        .expect("valid spec")
    }

    /// Channel at one axis value.
    pub fn instance(&self, x: f64) -> Result<(LinkGains, ConferencingCapacities)> {
        let v = |p: Param| {
            if self.axis.covers(p) {
                x
            } else {
                self.fixed[p as usize].expect("validated")
            }
        };
        let gains = LinkGains::from_db(v(Param::G1), v(Param::G2), v(Param::Gt1), v(Param::Gt2))?;
        let conf = ConferencingCapacities::new(v(Param::C12), v(Param::C21))?;
        Ok((gains, conf))
    }
}

/// Accumulates sweep settings from a config file and then from flags;
/// later settings override earlier ones.
#[derive(Debug, Clone, Default)]
pub struct SweepBuilder {
    pub axis: Option<Axis>,
    pub range: Option<AxisRange>,
    pub fixed: [Option<f64>; 6],
    pub quantities: Option<Vec<Quantity>>,
}

impl SweepBuilder {
    /// Applies one `key = value` setting. Keys are `axis`, `range`,
    /// `quantities` (comma separated) or a parameter name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "axis" => self.axis = Some(value.parse()?),
            "range" => self.range = Some(value.parse()?),
            "quantities" => {
                self.quantities = Some(
                    value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(str::parse)
                        .collect::<Result<_>>()?,
                )
            }
            other => {
                let p: Param = other
                    .parse()
                    .map_err(|_| domain(format!("unknown setting `{other}`")))?;
                let v = value
                    .parse::<f64>()
                    .map_err(|_| domain(format!("bad number `{value}` for `{other}`")))?;
                self.fixed[p as usize] = Some(v);
            }
        }
        Ok(())
    }

    /// Applies a `key=value` pair as given to `--fix`.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| domain(format!("`{pair}` is not of the form key=value")))?;
        self.set(k, v)
    }

    /// Reads a config: one `key = value` per line, `#` starts a comment.
    pub fn apply_config(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| domain(format!("line {}: expected `key = value`", i + 1)))?;
            self.set(k, v)
                .map_err(|e| domain(format!("line {}: {}", i + 1, message(&e))))?;
        }
        Ok(())
    }

    pub fn build(self) -> Result<SweepSpec> {
        let axis = self.axis.ok_or_else(|| domain("no axis given"))?;
        let range = self.range.ok_or_else(|| domain("no range given"))?;
        let mut quantities = self
            .quantities
            .ok_or_else(|| domain("no quantities given"))?;
        if quantities.is_empty() {
            return Err(domain("quantities must not be empty"));
        }
        quantities.sort();
        quantities.dedup();
        let missing: Vec<&str> = Param::ALL
            .into_iter()
            .filter(|&p| !axis.covers(p) && self.fixed[p as usize].is_none())
            .map(|p| p.as_str())
            .collect();
        if !missing.is_empty() {
            return Err(domain(format!(
                "missing fixed parameters: {}",
                missing.join(", ")
            )));
        }
        for p in Param::ALL {
            if let Some(v) = self.fixed[p as usize] {
                if !v.is_finite() {
                    return Err(domain(format!("`{}` must be finite", p.as_str())));
                }
            }
        }
        Ok(SweepSpec {
            axis,
            range,
            fixed: self.fixed,
            quantities,
        })
    }
}

fn message(e: &Error) -> &str {
    match e {
        Error::Domain(m) | Error::Inconsistent(m) => m,
    }
}

/// A computed cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Number(f64),
    Text(String),
}

impl Cell {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            Cell::Number(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    /// One cell per quantity of the spec, in the spec's order.
    pub cells: Vec<Cell>,
    /// Engine failures on this row, `;`-separated; empty when clean.
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axis: Axis,
    pub quantities: Vec<Quantity>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn column(&self, q: Quantity) -> Option<Vec<f64>> {
        let k = self.quantities.iter().position(|&x| x == q)?;
        Some(
            self.rows
                .iter()
                .map(|r| r.cells[k].as_number().unwrap_or(f64::NAN))
                .collect(),
        )
    }

    pub fn axis_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.axis_value).collect()
    }

    /// Writes the table as CSV: header first, LF endings, 9 significant
    /// digits, `NaN` for missing numbers.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let mut header = vec![self.axis.as_str()];
        header.extend(self.quantities.iter().map(|q| q.as_str()));
        header.push("note");
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![format_sig9(row.axis_value)];
            rec.extend(row.cells.iter().map(|c| match c {
                Cell::Number(v) => format_sig9(*v),
                Cell::Text(s) => s.clone(),
            }));
            rec.push(row.note.clone());
            w.write_record(&rec)?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }
}

/// Formats like C's `%.9g`, except that NaN prints as `NaN`.
pub fn format_sig9(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn compute(q: Quantity, gains: &LinkGains, conf: &ConferencingCapacities) -> Result<Cell> {
    let num = Cell::Number;
    Ok(match q {
        Quantity::UpperI => num(upper_bound_i(gains, conf)?.value),
        Quantity::UpperII => num(upper_bound_ii(gains, conf)?.value),
        Quantity::DfILp => num(df_rate_lp(gains, conf)?.rate),
        Quantity::DfIClosed => num(df_rate_closed_form(gains, conf)?.rate),
        Quantity::DfII => num(df_rate_ii(gains, conf)?.rate),
        Quantity::Af => num(maximize_af(gains, conf)?.rate),
        Quantity::AfLowSnr => {
            let noise = conferencing_noise(gains, conf)?;
            num(af_low_snr(gains, &noise)?.solution.rate)
        }
        Quantity::MinConfSum => num(min_conferencing_for_capacity(gains)?.min_conf_sum),
        Quantity::SelectedLink => Cell::Text(select_conferencing_link(gains).as_str().into()),
    })
}

fn run_row(spec: &SweepSpec, x: f64) -> SweepRow {
    let mut notes = Vec::new();
    let cells = match spec.instance(x) {
        Ok((gains, conf)) => spec
            .quantities
            .iter()
            .map(|&q| {
                compute(q, &gains, &conf).unwrap_or_else(|e| {
                    notes.push(format!("{}: {e}", q.as_str()));
                    Cell::Number(f64::NAN)
                })
            })
            .collect(),
        Err(e) => {
            notes.push(e.to_string());
            vec![Cell::Number(f64::NAN); spec.quantities.len()]
        }
    };
    SweepRow {
        axis_value: x,
        cells,
        note: notes.join("; "),
    }
}

/// Evaluates every requested quantity at every axis value. Rows are
/// computed in parallel and returned in ascending axis order; an engine
/// failure yields NaN in that cell and an entry in the row's note.
pub fn run_sweep(spec: &SweepSpec) -> SweepTable {
    let rows = spec
        .range
        .values()
        .into_par_iter()
        .map(|x| run_row(spec, x))
        .collect();
    SweepTable {
        axis: spec.axis,
        quantities: spec.quantities.clone(),
        rows,
    }
}

/// Everything the advisor reports for one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Advice {
    pub gains_db: [f64; 4],
    pub conf: ConferencingCapacities,
    pub link: ConferencingLink,
    pub df_i: f64,
    pub df_ii: f64,
    pub upper_i: f64,
    pub upper_ii: f64,
    pub af: f64,
    pub min_conf_sum: f64,
}

/// Recommends a conferencing link and reports the rates for one channel.
/// Gains are in dB.
pub fn advise(gains_db: [f64; 4], conf: &ConferencingCapacities) -> Result<Advice> {
    let [g1, g2, gt1, gt2] = gains_db;
    let gains = LinkGains::from_db(g1, g2, gt1, gt2)?;
    conf.validate()?;
    Ok(Advice {
        gains_db,
        conf: *conf,
        link: select_conferencing_link(&gains),
        df_i: df_rate_lp(&gains, conf)?.rate,
        df_ii: df_rate_ii(&gains, conf)?.rate,
        upper_i: upper_bound_i(&gains, conf)?.value,
        upper_ii: upper_bound_ii(&gains, conf)?.value,
        af: maximize_af(&gains, conf)?.rate,
        min_conf_sum: min_conferencing_for_capacity(&gains)?.min_conf_sum,
    })
}

impl fmt::Display for Advice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [g1, g2, gt1, gt2] = self.gains_db;
        writeln!(
            f,
            "channel: g1 = {g1} dB, g2 = {g2} dB, gt1 = {gt1} dB, gt2 = {gt2} dB, c12 = {}, c21 = {}",
            self.conf.c12, self.conf.c21
        )?;
        match self.link {
            ConferencingLink::None => {
                writeln!(f, "conferencing link: none (no relay conferencing)")?
            }
            link => writeln!(f, "conferencing link: {link}")?,
        }
        let s = format_sig9;
        writeln!(f, "DF rate, strategy I:           {}", s(self.df_i))?;
        writeln!(f, "DF rate, strategy II:          {}", s(self.df_ii))?;
        writeln!(f, "upper bound, strategy I:       {}", s(self.upper_i))?;
        writeln!(f, "upper bound, strategy II:      {}", s(self.upper_ii))?;
        writeln!(f, "AF rate:                       {}", s(self.af))?;
        write!(f, "min conferencing sum (II):     {}", s(self.min_conf_sum))
    }
}
