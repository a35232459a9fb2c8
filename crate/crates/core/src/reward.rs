//! Discounted payments at a barrier: maximise `E[e^{−ρτ_U}]` in a favourable
//! market, or minimise `E[e^{−ρτ_L}]` in an unfavourable one.
//!
//! In a fictitious market the value function is a power `(x/b)^{−d}` of the
//! distance to the barrier `b`. The exponent solves
//! `(r+c+δ)d² + (r+c+δ+½‖ζ_ν‖²+ρ)d + ρ = 0`, and the optimal proportions are
//! `w = σ'⁻¹ζ_ν/(1+d)`. The reward uses the root in `(−1, 0)`, the penalty the
//! positive one. When the budget binds, `ν₁ = (d+1−D)/K` and the equation for
//! `d` becomes a cubic, which factors into `(d+1)` times a quadratic when `ζ`
//! is parallel to `σ⁻¹1` (always the case for a single asset).

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::auxiliary::{
    cone_point, favourability, generator_apply, wealth_coefficients, Branch, FictitiousParam,
    GbmCoefficients, ValueFunction,
};
use crate::error::{Error, Result};
use crate::market::DerivedMarket;
use crate::roots::{bracketed_root, quadratic_roots};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Maximise the discounted reward paid on reaching the upper barrier.
    MaxReward,
    /// Minimise the discounted penalty paid on reaching the lower barrier.
    MinPenalty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardSolution {
    pub direction: Direction,
    pub case: Branch,
    /// Exponent of the value function.
    pub d: f64,
    pub nu_star: FictitiousParam,
    pub w_star: Vec<f64>,
    pub wealth: GbmCoefficients,
    pub barrier: f64,
    pub rho: f64,
    /// Discriminant of the characteristic equation that produced `d`.
    pub discriminant: f64,
}

fn check_inputs(rho: f64, barrier: f64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("discount rate must be positive, got {rho}")));
    }
    if !(barrier > 0.0 && barrier.is_finite()) {
        return Err(Error::InvalidBarriers(format!("barrier must be positive, got {barrier}")));
    }
    Ok(())
}

/// Roots of the unconstrained characteristic quadratic
/// `(r+c)d² + (r+c+k+ρ)d + ρ = 0`.
fn unconstrained_roots(dm: &DerivedMarket, rho: f64) -> Result<crate::roots::QuadraticRoots> {
    let rc = dm.riskless_growth();
    quadratic_roots(rc, rc + dm.half_sharpe_sq() + rho, rho)
}

/// `K(r+c) + D`, the combination that drives every budget-constrained branch.
fn budget_slack(dm: &DerivedMarket) -> f64 {
    dm.precision() * dm.riskless_growth() + dm.exposure()
}

/// Constrained characteristic cubic scaled by `2K`:
/// `−d³ + (2A−2)d² + (2A−1+2Kρ+KE)d + 2Kρ`.
fn cubic_coefficients(dm: &DerivedMarket, rho: f64) -> [f64; 4] {
    let a = budget_slack(dm);
    let kk = dm.precision();
    let e = dm.sharpe_perp_sq();
    [-1.0, 2.0 * a - 2.0, 2.0 * a - 1.0 + 2.0 * kk * rho + kk * e, 2.0 * kk * rho]
}

fn cubic_eval(c: &[f64; 4], d: f64) -> f64 {
    ((c[0] * d + c[1]) * d + c[2]) * d + c[3]
}

fn cubic_discriminant(c: &[f64; 4]) -> f64 {
    let [a, b, cc, d] = *c;
    18.0 * a * b * cc * d - 4.0 * b.powi(3) * d + b * b * cc * cc - 4.0 * a * cc.powi(3) - 27.0 * a * a * d * d
}

/// Root of the constrained equation and the matching discriminant.
fn constrained_root(dm: &DerivedMarket, rho: f64, direction: Direction) -> Result<(f64, f64)> {
    let kk = dm.precision();
    if dm.sharpe_perp_sq() == 0.0 {
        let q = quadratic_roots(1.0, 1.0 - 2.0 * budget_slack(dm), -2.0 * kk * rho)?;
        let d = match direction {
            Direction::MaxReward => q.lower,
            Direction::MinPenalty => q.upper,
        };
        return Ok((d, q.discriminant));
    }
    // The cubic is negative at −1, positive at 0 and tends to −∞, so it has
    // exactly one root in (−1, 0) and one in (0, ∞).
    let c = cubic_coefficients(dm, rho);
    let f = |d: f64| cubic_eval(&c, d);
    let root = match direction {
        Direction::MaxReward => bracketed_root(f, -1.0, 0.0),
        Direction::MinPenalty => {
            let mut hi = 1.0;
            while f(hi) >= 0.0 && hi < 1e12 {
                hi *= 2.0;
            }
            bracketed_root(f, 0.0, hi)
        }
    };
    let d = root.ok_or_else(|| Error::RootOutOfRange("constrained cubic has no bracketed root".into()))?;
    Ok((d, cubic_discriminant(&c)))
}

fn strategy(dm: &DerivedMarket, d: f64, nu: FictitiousParam) -> DVector<f64> {
    (dm.log_optimal() + dm.covariance_inv_ones() * nu.nu1()) / (1.0 + d)
}

/// Maximise `E[e^{−ρτ_U}]` for `0 < x < U`.
pub fn solve_reward_max(dm: &DerivedMarket, rho: f64, upper: f64) -> Result<RewardSolution> {
    check_inputs(rho, upper)?;
    let roots = unconstrained_roots(dm, rho)?;
    // Largest negative root; for r+c < 0 the roots straddle zero.
    let d_u = if roots.upper < 0.0 { roots.upper } else { roots.lower };
    if !(d_u > -1.0 && d_u < 0.0) {
        return Err(Error::RootOutOfRange(format!("unconstrained reward exponent {d_u} not in (-1, 0)")));
    }
    let exposure = dm.exposure();
    let kk = dm.precision();

    let (case, d, nu, discriminant) = if exposure / (1.0 + d_u) < 1.0 {
        (Branch::Unconstrained, d_u, FictitiousParam::ZERO, roots.discriminant)
    } else {
        let rc = dm.riskless_growth();
        let budget_drift = rc + exposure / kk - 0.5 / kk;
        if !(budget_drift > 0.0) {
            return Err(Error::FavourabilityViolation(format!(
                "r + c_net + D/K - 1/(2K) = {budget_drift} is not positive"
            )));
        }
        let (d, disc) = constrained_root(dm, rho, Direction::MaxReward)?;
        if !(d > -1.0 && d < 0.0) {
            return Err(Error::RootOutOfRange(format!("constrained reward exponent {d} not in (-1, 0)")));
        }
        let nu = cone_point((d + 1.0 - exposure) / kk, d)?;
        (Branch::Constrained, d, nu, disc)
    };

    let w = strategy(dm, d, nu);
    let wealth = wealth_coefficients(dm, nu, &w)?;
    if !(wealth.log_drift > 0.0) {
        return Err(Error::FavourabilityViolation(format!(
            "optimal wealth has log-drift {} <= 0",
            wealth.log_drift
        )));
    }
    Ok(RewardSolution {
        direction: Direction::MaxReward,
        case,
        d,
        nu_star: nu,
        w_star: w.iter().copied().collect(),
        wealth,
        barrier: upper,
        rho,
        discriminant,
    })
}

/// Minimise `E[e^{−ρτ_L}]` for `x > L`.
pub fn solve_penalty_min(dm: &DerivedMarket, rho: f64, lower: f64) -> Result<RewardSolution> {
    check_inputs(rho, lower)?;
    let beta0 = favourability(dm, FictitiousParam::ZERO);
    if !(beta0 < 0.0) {
        return Err(Error::FavourabilityViolation(format!(
            "market is not unfavourable: beta = {beta0} at nu = 0"
        )));
    }
    let roots = unconstrained_roots(dm, rho)?;
    let d_u = roots.upper;
    if !(d_u > 0.0) {
        return Err(Error::RootOutOfRange(format!("unconstrained penalty exponent {d_u} not positive")));
    }
    let exposure = dm.exposure();
    let kk = dm.precision();

    let (case, d, nu, discriminant) = if exposure / (1.0 + d_u) < 1.0 {
        (Branch::Unconstrained, d_u, FictitiousParam::ZERO, roots.discriminant)
    } else {
        let (d, disc) = constrained_root(dm, rho, Direction::MinPenalty)?;
        if !(d > 0.0) {
            return Err(Error::RootOutOfRange(format!("constrained penalty exponent {d} not positive")));
        }
        let nu = cone_point((d + 1.0 - exposure) / kk, d)?;
        let beta = favourability(dm, nu);
        if !(beta < 0.0) {
            return Err(Error::FavourabilityViolation(format!(
                "market is not unfavourable: beta = {beta} at nu* = {}",
                nu.nu1()
            )));
        }
        (Branch::Constrained, d, nu, disc)
    };

    let w = strategy(dm, d, nu);
    let wealth = wealth_coefficients(dm, nu, &w)?;
    Ok(RewardSolution {
        direction: Direction::MinPenalty,
        case,
        d,
        nu_star: nu,
        w_star: w.iter().copied().collect(),
        wealth,
        barrier: lower,
        rho,
        discriminant,
    })
}

/// `(x/b)^{−d}` with its derivatives.
#[derive(Debug, Clone, Copy)]
pub struct DiscountedValue {
    barrier: f64,
    d: f64,
    interior: (f64, f64),
}

impl DiscountedValue {
    pub fn new(sol: &RewardSolution) -> Self {
        let interior = match sol.direction {
            Direction::MaxReward => (0.0, sol.barrier),
            Direction::MinPenalty => (sol.barrier, f64::INFINITY),
        };
        Self { barrier: sol.barrier, d: sol.d, interior }
    }
}

impl ValueFunction for DiscountedValue {
    fn value(&self, x: f64) -> f64 {
        (x / self.barrier).powf(-self.d)
    }
    fn first(&self, x: f64) -> f64 {
        -self.d * self.value(x) / x
    }
    fn second(&self, x: f64) -> f64 {
        self.d * (self.d + 1.0) * self.value(x) / (x * x)
    }
    fn interior(&self) -> (f64, f64) {
        self.interior
    }
}

/// Optimal expected discounted reward or penalty at `x`.
pub fn discounted_value(sol: &RewardSolution, x: f64) -> Result<f64> {
    let ok = match sol.direction {
        Direction::MaxReward => x > 0.0 && x <= sol.barrier,
        Direction::MinPenalty => x >= sol.barrier && x.is_finite(),
    };
    if !ok {
        return Err(Error::DomainViolation(format!(
            "x = {x} on the wrong side of the barrier {}",
            sol.barrier
        )));
    }
    Ok(DiscountedValue::new(sol).value(x))
}

/// `−ρG + L^w G` in the optimal fictitious market, negated for the penalty so
/// that the optimum is always a maximum.
pub fn reward_hjb_supremand(
    sol: &RewardSolution,
    dm: &DerivedMarket,
    w: &DVector<f64>,
    x: f64,
) -> Result<f64> {
    let g = DiscountedValue::new(sol);
    let raw = generator_apply(dm, sol.nu_star, w, &g, x)? - sol.rho * g.value(x);
    Ok(match sol.direction {
        Direction::MaxReward => raw,
        Direction::MinPenalty => -raw,
    })
}

pub fn reward_hjb_residual(sol: &RewardSolution, dm: &DerivedMarket, x: f64) -> Result<f64> {
    let w = DVector::from_column_slice(&sol.w_star);
    reward_hjb_supremand(sol, dm, &w, x)
}

/// Relative residual of the characteristic equation solved by `sol.d`.
pub fn characteristic_residual(sol: &RewardSolution, dm: &DerivedMarket) -> f64 {
    let d = sol.d;
    let terms: Vec<f64> = match sol.case {
        Branch::Unconstrained => {
            let rc = dm.riskless_growth();
            vec![rc * d * d, (rc + dm.half_sharpe_sq() + sol.rho) * d, sol.rho]
        }
        Branch::Constrained => {
            let c = cubic_coefficients(dm, sol.rho);
            vec![c[0] * d * d * d, c[1] * d * d, c[2] * d, c[3]]
        }
    };
    let scale: f64 = terms.iter().map(|t| t.abs()).sum();
    terms.iter().sum::<f64>().abs() / scale.max(f64::MIN_POSITIVE)
}

/// `(d/(2(d+1)))‖ζ_ν‖² − dν₁`, the `ν₁`-dependent part of the characteristic
/// equation at fixed `d`. Stationary at `ν₁*`; convex for `d > 0` and concave
/// for `d ∈ (−1, 0)`.
pub fn reward_shift_term(dm: &DerivedMarket, d: f64, nu1: f64) -> f64 {
    let zeta_nu = dm.zeta() + dm.sigma_inv_ones() * nu1;
    d / (2.0 * (d + 1.0)) * zeta_nu.norm_squared() - d * nu1
}

/// Convex form of [`reward_shift_term`] for either direction, minimised over
/// the cone at `ν₁*`.
pub fn reward_dual_objective(dm: &DerivedMarket, d: f64, nu1: f64) -> f64 {
    if d < 0.0 {
        -reward_shift_term(dm, d, nu1)
    } else {
        reward_shift_term(dm, d, nu1)
    }
}
