//! Closed-form optimal strategies for borrowing-constrained investors, with
//! Monte Carlo and first-passage cross-checks.
//!
//! The library covers three problems for a wealth process paying a constant
//! net cash outflow: maximising the probability of reaching a goal before
//! ruin ([`goal`]), maximising survival time or minimising time to a goal
//! ([`expected_time`]), and optimising a discounted reward or penalty paid at
//! a barrier ([`reward`]). The no-borrowing constraint `1'w ≤ 1` is handled
//! through a family of unconstrained fictitious markets ([`auxiliary`]).

pub mod auxiliary;
pub mod error;
pub mod expected_time;
pub mod goal;
mod linalg;
pub mod market;
pub mod reward;
pub mod roots;
pub mod simulator;
pub mod verification;

pub use auxiliary::{Branch, FictitiousParam, GbmCoefficients};
pub use error::{Error, ErrorClass, Result};
pub use market::{build_derived, DerivedMarket, MarketSpec};
