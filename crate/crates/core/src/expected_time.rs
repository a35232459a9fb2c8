//! Expected hitting times of a single barrier: maximise the expected time to
//! ruin at `L` in an unfavourable market, or minimise the expected time to a
//! goal `U` in a favourable one.
//!
//! Both are solved by the log-optimal strategy of the optimal fictitious
//! market, and the value is the log distance to the barrier divided by the
//! log-drift `β*` of that strategy.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::auxiliary::{
    cone_point, favourability, generator_apply, wealth_coefficients, FictitiousParam,
    GbmCoefficients, ValueFunction,
};
use crate::error::{Error, Result};
use crate::market::DerivedMarket;

/// `|β*|` at or below which the expected times are treated as infinite.
pub const ZERO_FAVOURABILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeCase {
    /// `D < 1`: the log-optimal portfolio does not borrow.
    Interior,
    /// `D ≥ 1`: the log-optimal portfolio is scaled back to `1'w = 1`.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeRegime {
    /// `β* < 0`: wealth drifts to ruin and the survival time is maximised.
    Survival,
    /// `β* > 0`: wealth drifts upward and the time to the goal is minimised.
    Reach,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSolution {
    pub case: TimeCase,
    pub regime: TimeRegime,
    pub beta_star: f64,
    pub nu_star: FictitiousParam,
    pub w_star: Vec<f64>,
    pub wealth: GbmCoefficients,
}

/// Constrained log-optimal strategy and its favourability.
pub fn solve_time(dm: &DerivedMarket) -> Result<TimeSolution> {
    let d = dm.exposure();
    let (case, nu) = if d < 1.0 {
        (TimeCase::Interior, FictitiousParam::ZERO)
    } else {
        (TimeCase::Boundary, cone_point((1.0 - d) / dm.precision(), d)?)
    };
    let w = dm.log_optimal() + dm.covariance_inv_ones() * nu.nu1();
    let beta = favourability(dm, nu);
    if beta.abs() <= ZERO_FAVOURABILITY_TOL {
        return Err(Error::ZeroFavourability(beta));
    }
    let wealth = wealth_coefficients(dm, nu, &w)?;
    let regime = if beta < 0.0 { TimeRegime::Survival } else { TimeRegime::Reach };
    Ok(TimeSolution {
        case,
        regime,
        beta_star: beta,
        nu_star: nu,
        w_star: w.iter().copied().collect(),
        wealth,
    })
}

/// Expected time `ln(x/L)/|β*|` until wealth falls to `L`.
pub fn survival_value(sol: &TimeSolution, x: f64, lower: f64) -> Result<f64> {
    if sol.regime != TimeRegime::Survival {
        return Err(Error::RegimeMismatch(format!(
            "survival time needs beta* < 0, got {}",
            sol.beta_star
        )));
    }
    if !(lower > 0.0 && lower.is_finite() && x >= lower && x.is_finite()) {
        return Err(Error::DomainViolation(format!("need x >= L > 0, got x = {x}, L = {lower}")));
    }
    Ok((x / lower).ln() / sol.beta_star.abs())
}

/// Expected time `ln(U/x)/β*` until wealth reaches `U`.
pub fn reach_value(sol: &TimeSolution, x: f64, upper: f64) -> Result<f64> {
    if sol.regime != TimeRegime::Reach {
        return Err(Error::RegimeMismatch(format!(
            "reach time needs beta* > 0, got {}",
            sol.beta_star
        )));
    }
    if !(x > 0.0 && upper.is_finite() && x <= upper) {
        return Err(Error::DomainViolation(format!("need 0 < x <= U, got x = {x}, U = {upper}")));
    }
    Ok((upper / x).ln() / sol.beta_star)
}

/// `V(x) = −ln(x/b)/β*`, which covers both regimes.
#[derive(Debug, Clone, Copy)]
pub struct TimeValue {
    barrier: f64,
    beta: f64,
    interior: (f64, f64),
}

impl TimeValue {
    pub fn new(sol: &TimeSolution, barrier: f64) -> Self {
        let interior = match sol.regime {
            TimeRegime::Survival => (barrier, f64::INFINITY),
            TimeRegime::Reach => (0.0, barrier),
        };
        Self { barrier, beta: sol.beta_star, interior }
    }
}

impl ValueFunction for TimeValue {
    fn value(&self, x: f64) -> f64 {
        -(x / self.barrier).ln() / self.beta
    }
    fn first(&self, x: f64) -> f64 {
        -1.0 / (self.beta * x)
    }
    fn second(&self, x: f64) -> f64 {
        1.0 / (self.beta * x * x)
    }
    fn interior(&self) -> (f64, f64) {
        self.interior
    }
}

/// HJB expression `1 + L^w V` in the optimal fictitious market, oriented so
/// that the optimum is a maximum (negated for the reach problem).
pub fn time_hjb_supremand(
    sol: &TimeSolution,
    dm: &DerivedMarket,
    barrier: f64,
    w: &DVector<f64>,
    x: f64,
) -> Result<f64> {
    let value = TimeValue::new(sol, barrier);
    let raw = 1.0 + generator_apply(dm, sol.nu_star, w, &value, x)?;
    Ok(match sol.regime {
        TimeRegime::Survival => raw,
        TimeRegime::Reach => -raw,
    })
}

pub fn time_hjb_residual(sol: &TimeSolution, dm: &DerivedMarket, barrier: f64, x: f64) -> Result<f64> {
    let w = DVector::from_column_slice(&sol.w_star);
    time_hjb_supremand(sol, dm, barrier, &w, x)
}

/// `½‖ζ_ν‖² − ν₁`, the part of `β_ν` that depends on `ν₁`; convex, minimised
/// at `ν₁*`.
pub fn time_shift_term(dm: &DerivedMarket, nu1: f64) -> f64 {
    let zeta_nu = dm.zeta() + dm.sigma_inv_ones() * nu1;
    0.5 * zeta_nu.norm_squared() - nu1
}
