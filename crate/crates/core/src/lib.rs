//! Rate engines for the two-relay diamond channel with alternative relaying
//! and rate-limited conferencing links between the relays.
//!
//! * [`strategy1`]: cut-set upper bound, decode-and-forward LP, closed-form
//!   case engine and conferencing-link advisor when conferencing is confined
//!   to the next slot.
//! * [`strategy2`]: the same for conferencing spread over two slots, plus the
//!   minimum conferencing sum needed to reach the bound.
//! * [`af`]: amplify-and-forward rate maximization.
//! * [`sweep`]: parameter sweeps producing CSV tables.

pub mod af;
pub mod channel;
pub mod error;
pub mod lp;
pub mod maximin;
pub mod strategy1;
pub mod strategy2;
pub mod sweep;

pub use channel::{
    awgn_capacity, db_to_linear, linear_to_db, ConferencingCapacities, LinkGains, LinkRates,
    RateAllocation, TimeShare,
};
pub use error::{Error, Result};
pub use strategy1::{ConferencingLink, DfSolution, UpperBound};
