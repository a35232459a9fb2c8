//! Maximising the probability of reaching an upper wealth level `U` before
//! falling to a lower level `L`.
//!
//! In a fictitious market the value function is
//! `F(x) = (L^{1+α} − x^{1+α}) / (L^{1+α} − U^{1+α})` with
//! `α = ‖ζ_ν‖² / (2(r + c_net + δ(ν)))`, and the optimal proportions are
//! `w = −σ'⁻¹ζ_ν / α`. When the resulting portfolio would borrow, the budget
//! binds and `ν₁*` is chosen so that `1'w* = 1`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::auxiliary::{
    cone_point, generator_apply, wealth_coefficients, Branch,
    FictitiousParam, GbmCoefficients, ValueFunction,
};
use crate::error::{Error, Result};
use crate::market::DerivedMarket;
use crate::roots::quadratic_roots;

/// Distance from `α = −1` below which the value function is rejected.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalSolution {
    pub case: Branch,
    pub alpha: f64,
    pub nu_star: FictitiousParam,
    pub w_star: Vec<f64>,
    pub wealth: GbmCoefficients,
    pub lower: f64,
    pub upper: f64,
}

pub(crate) fn check_barriers(lower: f64, upper: f64) -> Result<()> {
    if !(lower.is_finite() && upper.is_finite() && lower > 0.0 && upper > lower) {
        return Err(Error::InvalidBarriers(format!("need 0 < L < U, got L = {lower}, U = {upper}")));
    }
    Ok(())
}

/// Solve the goal problem for barriers `0 < lower < upper`.
pub fn solve_goal(dm: &DerivedMarket, lower: f64, upper: f64) -> Result<GoalSolution> {
    check_barriers(lower, upper)?;
    let rc = dm.riskless_growth();
    if rc >= 0.0 {
        return Err(Error::RegimeViolation(format!(
            "r + c_net = {rc} must be negative for a finite goal exponent"
        )));
    }
    let k = dm.half_sharpe_sq();
    if k == 0.0 {
        return Err(Error::RegimeViolation(
            "zero market price of risk gives alpha = 0".into(),
        ));
    }
    let d = dm.exposure();
    let kk = dm.precision();
    let alpha_u = k / rc;

    let (case, alpha, nu) = if -d / alpha_u < 1.0 {
        (Branch::Unconstrained, alpha_u, FictitiousParam::ZERO)
    } else {
        // Budget binds: α solves α² + 2(K(r+c) + D)α − K·E = 0, E being the
        // part of ‖ζ‖² orthogonal to σ⁻¹1.
        let a = kk * rc + d;
        let roots = quadratic_roots(1.0, 2.0 * a, -kk * dm.sharpe_perp_sq())?;
        let alpha = roots.lower;
        if !(alpha < 0.0) {
            return Err(Error::RegimeViolation(format!(
                "constrained exponent alpha = {alpha} is not negative (K(r+c)+D = {a})"
            )));
        }
        let nu = cone_point(-(alpha + d) / kk, alpha)?;
        (Branch::Constrained, alpha, nu)
    };
    if (alpha + 1.0).abs() <= DEGENERACY_TOL {
        return Err(Error::LogOptimalDegeneracy(alpha));
    }

    let w = strategy(dm, alpha, nu);
    let wealth = wealth_coefficients(dm, nu, &w)?;
    Ok(GoalSolution {
        case,
        alpha,
        nu_star: nu,
        w_star: w.iter().copied().collect(),
        wealth,
        lower,
        upper,
    })
}

fn strategy(dm: &DerivedMarket, alpha: f64, nu: FictitiousParam) -> DVector<f64> {
    (dm.log_optimal() + dm.covariance_inv_ones() * nu.nu1()) * (-1.0 / alpha)
}

/// The value function `F` of a goal solution with analytic derivatives.
#[derive(Debug, Clone, Copy)]
pub struct GoalValue {
    exponent: f64,
    lower: f64,
    upper: f64,
    // expm1((1+α) ln(U/L)) = (U/L)^{1+α} − 1
    span: f64,
}

impl GoalValue {
    pub fn new(sol: &GoalSolution) -> Self {
        let exponent = 1.0 + sol.alpha;
        Self {
            exponent,
            lower: sol.lower,
            upper: sol.upper,
            span: (exponent * (sol.upper / sol.lower).ln()).exp_m1(),
        }
    }
}

impl ValueFunction for GoalValue {
    fn value(&self, x: f64) -> f64 {
        (self.exponent * (x / self.lower).ln()).exp_m1() / self.span
    }

    fn first(&self, x: f64) -> f64 {
        let p = self.exponent;
        p * (x / self.lower).powf(p) / (x * self.span)
    }

    fn second(&self, x: f64) -> f64 {
        let p = self.exponent;
        p * (p - 1.0) * (x / self.lower).powf(p) / (x * x * self.span)
    }

    fn interior(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }
}

/// Optimal probability `F(x)` of reaching `U` before `L`.
pub fn goal_value(sol: &GoalSolution, x: f64) -> Result<f64> {
    if !(x >= sol.lower && x <= sol.upper) {
        return Err(Error::DomainViolation(format!(
            "x = {x} outside [{}, {}]",
            sol.lower, sol.upper
        )));
    }
    if x == sol.lower {
        return Ok(0.0);
    }
    if x == sol.upper {
        return Ok(1.0);
    }
    Ok(GoalValue::new(sol).value(x).clamp(0.0, 1.0))
}

/// The expression maximised over `w` in the goal HJB equation, evaluated at
/// an arbitrary strategy in the optimal fictitious market.
pub fn goal_hjb_supremand(
    sol: &GoalSolution,
    dm: &DerivedMarket,
    w: &DVector<f64>,
    x: f64,
) -> Result<f64> {
    generator_apply(dm, sol.nu_star, w, &GoalValue::new(sol), x)
}

/// Residual of the goal HJB equation at `(F, w*, ν*)`.
pub fn goal_hjb_residual(sol: &GoalSolution, dm: &DerivedMarket, x: f64) -> Result<f64> {
    let w = DVector::from_column_slice(&sol.w_star);
    goal_hjb_supremand(sol, dm, &w, x)
}

/// The `ν₁`-dependent term `(1/(2α))‖ζ_ν‖² + ν₁` of the goal exponent, at fixed
/// `α`. Stationary at `ν₁*`; concave in `ν₁` because `α < 0`.
pub fn goal_shift_term(dm: &DerivedMarket, alpha: f64, nu1: f64) -> f64 {
    let zeta_nu = dm.zeta() + dm.sigma_inv_ones() * nu1;
    zeta_nu.norm_squared() / (2.0 * alpha) + nu1
}

/// Convex dual form of [`goal_shift_term`], minimised over the cone at `ν₁*`.
pub fn goal_dual_objective(dm: &DerivedMarket, alpha: f64, nu1: f64) -> f64 {
    -goal_shift_term(dm, alpha, nu1)
}
