//! Dense LP solver for very small problems (a handful of variables and a
//! dozen constraints) by exhaustive vertex enumeration.
//!
//! Every basic solution is visited: each choice of `n - k` inequality rows
//! (nonnegativity bounds count as rows) together with the `k` equalities is
//! solved as an `n x n` system. Feasible solutions are scored and the best one
//! wins; ties go to the lexicographically smallest point. Unboundedness is
//! detected by enumerating the extreme rays of the recession cone the same
//! way. The polyhedron must be pointed (the stacked constraint matrix must
//! have full column rank); all the rate LPs in this crate are.

use crate::error::{domain, Result};

/// Absolute slack allowed on every constraint.
pub const FEAS_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-12;
const TIE_TOL: f64 = 1e-10;

/// `maximize objective . x` subject to `a . x <= b` rows, equality rows and
/// per-variable nonnegativity flags.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<(Vec<f64>, f64)>,
    pub equalities: Vec<(Vec<f64>, f64)>,
    pub nonneg: Vec<bool>,
}

impl LinearProgram {
    /// A program over `objective.len()` free variables with no constraints yet.
    pub fn maximize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            constraints: Vec::new(),
            equalities: Vec::new(),
            nonneg: vec![false; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.objective.len()
    }

    pub fn all_nonneg(mut self) -> Self {
        self.nonneg.iter_mut().for_each(|f| *f = true);
        self
    }

    pub fn le(mut self, coeffs: Vec<f64>, bound: f64) -> Self {
        self.constraints.push((coeffs, bound));
        self
    }

    pub fn eq(mut self, coeffs: Vec<f64>, value: f64) -> Self {
        self.equalities.push((coeffs, value));
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim();
        if n == 0 {
            return Err(domain("LP has no variables"));
        }
        if self.nonneg.len() != n {
            return Err(domain("nonnegativity flags do not match the dimension"));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.objective) {
            return Err(domain("non-finite objective coefficient"));
        }
        for (a, b) in self.constraints.iter().chain(&self.equalities) {
            if a.len() != n {
                return Err(domain(format!(
                    "constraint has {} coefficients, expected {n}",
                    a.len()
                )));
            }
            if !finite(a) || !b.is_finite() {
                return Err(domain("non-finite constraint coefficient"));
            }
        }
        Ok(())
    }

    /// Inequality rows with the nonnegativity bounds appended as `-x_i <= 0`.
    fn rows(&self) -> Vec<(Vec<f64>, f64)> {
        let n = self.dim();
        let mut rows = self.constraints.clone();
        for i in (0..n).filter(|&i| self.nonneg[i]) {
            let mut a = vec![0.0; n];
            a[i] = -1.0;
            rows.push((a, 0.0));
        }
        rows
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value; NaN unless `status == Optimal`.
    pub value: f64,
    /// Optimal point; empty unless `status == Optimal`.
    pub point: Vec<f64>,
}

impl LpSolution {
    fn without_point(status: LpStatus) -> Self {
        Self {
            status,
            value: f64::NAN,
            point: Vec::new(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.dim();
    let k = lp.equalities.len();
    if k > n {
        return Err(domain("more equalities than variables"));
    }
    let eq_rows: Vec<&[f64]> = lp.equalities.iter().map(|(a, _)| a.as_slice()).collect();
    if rank(&eq_rows, n) < k {
        return Err(domain("equality constraints are linearly dependent"));
    }
    let rows = lp.rows();
    let all_rows: Vec<&[f64]> = eq_rows
        .iter()
        .copied()
        .chain(rows.iter().map(|(a, _)| a.as_slice()))
        .collect();
    if rank(&all_rows, n) < n {
        return Err(domain(
            "constraint matrix lacks full column rank; the feasible set has no vertex",
        ));
    }

    let mut sys = System::new(n);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for_each_subset(rows.len(), n - k, |chosen| {
        sys.load(lp.equalities.iter().chain(chosen.iter().map(|&r| &rows[r])));
        if !sys.solve() {
            return;
        }
        let x = &mut sys.x;
        if !is_feasible(lp, &rows, x) {
            return;
        }
        snap(lp, x);
        let v = dot(&lp.objective, x);
        let replace = match &best {
            None => true,
            Some((bv, bx)) => {
                let tol = TIE_TOL * bv.abs().max(1.0);
                v > bv + tol || (v >= bv - tol && lex_less(x, bx))
            }
        };
        if replace {
            best = Some((v, x.clone()));
        }
    });

    let Some((value, point)) = best else {
        return Ok(LpSolution::without_point(LpStatus::Infeasible));
    };
    if !provably_bounded(lp, &rows) && has_improving_ray(lp, &rows) {
        return Ok(LpSolution::without_point(LpStatus::Unbounded));
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        value,
        point,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

fn is_feasible(lp: &LinearProgram, rows: &[(Vec<f64>, f64)], x: &[f64]) -> bool {
    rows.iter().all(|(a, b)| dot(a, x) <= b + FEAS_TOL)
        && lp
            .equalities
            .iter()
            .all(|(a, b)| (dot(a, x) - b).abs() <= FEAS_TOL)
}

/// Clears rounding residue on variables bounded below by zero.
fn snap(lp: &LinearProgram, x: &mut [f64]) {
    for (xi, &nn) in x.iter_mut().zip(&lp.nonneg) {
        if nn && *xi < 0.0 {
            *xi = 0.0;
        }
        if xi.abs() < 1e-14 {
            *xi = 0.0;
        }
    }
}

/// Cheap sufficient test that the feasible set is bounded, which makes the
/// ray search unnecessary. A nonnegative variable `x_j` is bounded above if
/// some row `a . x <= b` has `a_j > 0` while every other variable with a
/// positive coefficient is nonnegative and every one with a negative
/// coefficient is already known to be bounded. Iterated to a fixpoint.
fn provably_bounded(lp: &LinearProgram, rows: &[(Vec<f64>, f64)]) -> bool {
    let n = lp.dim();
    if !lp.nonneg.iter().all(|&f| f) {
        return false;
    }
    let negated: Vec<Vec<f64>> = lp
        .equalities
        .iter()
        .map(|(a, _)| a.iter().map(|v| -v).collect())
        .collect();
    let all_rows: Vec<&[f64]> = rows
        .iter()
        .map(|(a, _)| a.as_slice())
        .chain(lp.equalities.iter().map(|(a, _)| a.as_slice()))
        .chain(negated.iter().map(|a| a.as_slice()))
        .collect();
    let mut bounded = vec![false; n];
    loop {
        let mut changed = false;
        for a in &all_rows {
            if !a.iter().zip(&bounded).all(|(&c, &b)| c >= 0.0 || b) {
                continue;
            }
            for j in 0..n {
                if a[j] > 0.0 && !bounded[j] {
                    bounded[j] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return bounded.iter().all(|&b| b);
        }
    }
}

/// A ray `d` of the recession cone with `c . d > 0` makes the LP unbounded.
/// For a pointed cone it suffices to test the extreme rays, each of which is
/// the null space of `n - 1` independent active homogeneous rows.
fn has_improving_ray(lp: &LinearProgram, rows: &[(Vec<f64>, f64)]) -> bool {
    let n = lp.dim();
    let k = lp.equalities.len();
    if n - k == 0 {
        return false;
    }
    let mut found = false;
    for_each_subset(rows.len(), n - k - 1, |chosen| {
        if found {
            return;
        }
        let m: Vec<&[f64]> = lp
            .equalities
            .iter()
            .map(|(a, _)| a.as_slice())
            .chain(chosen.iter().map(|&r| rows[r].0.as_slice()))
            .collect();
        let Some(d) = null_vector(&m, n) else { return };
        for sign in [1.0, -1.0] {
            let s: Vec<f64> = d.iter().map(|v| v * sign).collect();
            let in_cone = rows.iter().all(|(a, _)| dot(a, &s) <= FEAS_TOL);
            if in_cone && dot(&lp.objective, &s) > FEAS_TOL {
                found = true;
            }
        }
    });
    found
}

/// Calls `f` with every `r`-element subset of `0..m` in lexicographic order.
fn for_each_subset(m: usize, r: usize, mut f: impl FnMut(&[usize])) {
    if r > m {
        return;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        f(&idx);
        // advance to the next combination
        let mut i = r;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + m - r {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Reusable `n x n` dense system solved by Gaussian elimination with
/// partial pivoting.
struct System {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    x: Vec<f64>,
}

impl System {
    fn new(n: usize) -> Self {
        Self {
            n,
            a: vec![0.0; n * n],
            b: vec![0.0; n],
            x: vec![0.0; n],
        }
    }

    fn load<'a>(&mut self, rows: impl Iterator<Item = &'a (Vec<f64>, f64)>) {
        for (i, (a, b)) in rows.enumerate() {
            self.a[i * self.n..(i + 1) * self.n].copy_from_slice(a);
            self.b[i] = *b;
        }
    }

    /// Solves into `self.x`; false if the system is singular.
    fn solve(&mut self) -> bool {
        let n = self.n;
        let (a, b, x) = (&mut self.a, &mut self.b, &mut self.x);
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return false;
        }
        for col in 0..n {
            let mut piv = col;
            for i in col + 1..n {
                if a[i * n + col].abs() > a[piv * n + col].abs() {
                    piv = i;
                }
            }
            if a[piv * n + col].abs() <= PIVOT_TOL * scale {
                return false;
            }
            if piv != col {
                for c in 0..n {
                    a.swap(piv * n + c, col * n + c);
                }
                b.swap(piv, col);
            }
            let p = a[col * n + col];
            for r in col + 1..n {
                let factor = a[r * n + col] / p;
                if factor == 0.0 {
                    continue;
                }
                for c in col..n {
                    a[r * n + c] -= factor * a[col * n + c];
                }
                b[r] -= factor * b[col];
            }
        }
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|c| a[r * n + c] * x[c]).sum();
            x[r] = (b[r] - s) / a[r * n + r];
        }
        true
    }
}

/// Row echelon form of the given rows; returns the pivot columns.
#[allow(clippy::needless_range_loop)]
fn echelon(rows: &[&[f64]], n: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut m: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        if r == m.len() {
            break;
        }
        let piv = (r..m.len())
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[piv][col].abs() <= PIVOT_TOL * scale {
            continue;
        }
        m.swap(r, piv);
        let p = m[r][col];
        for c in col..n {
            m[r][c] /= p;
        }
        for i in 0..m.len() {
            if i != r && m[i][col] != 0.0 {
                let f = m[i][col];
                for c in col..n {
                    m[i][c] -= f * m[r][c];
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    (m, pivots)
}

fn rank(rows: &[&[f64]], n: usize) -> usize {
    echelon(rows, n).1.len()
}

/// The unit direction spanning a one-dimensional null space, if the rows
/// have rank exactly `n - 1`.
fn null_vector(rows: &[&[f64]], n: usize) -> Option<Vec<f64>> {
    let (m, pivots) = echelon(rows, n);
    if pivots.len() != n - 1 {
        return None;
    }
    let free = (0..n).find(|c| !pivots.contains(c))?;
    let mut d = vec![0.0; n];
    d[free] = 1.0;
    for (r, &pc) in pivots.iter().enumerate() {
        d[pc] = -m[r][free];
    }
    let norm = d.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    Some(d.into_iter().map(|v| v / norm).collect())
}
