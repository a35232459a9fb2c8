//! Cross-checks of every closed form against independent oracles, HJB
//! residuals and Monte Carlo, collected into a serialisable report.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::auxiliary::{
    complementarity_gap, shifted_price_of_risk, wealth_coefficients, Branch, FictitiousParam,
    ValueFunction,
};
use crate::error::{Error, Result};
use crate::expected_time::{self, TimeCase, TimeRegime, TimeSolution, TimeValue};
use crate::goal::{self, GoalSolution, GoalValue};
use crate::market::DerivedMarket;
use crate::reward::{self, Direction, DiscountedValue, RewardSolution};
use crate::simulator::{self, MCEstimate, Side, SimConfig};

/// Relative tolerance for closed-form versus oracle identities.
pub const IDENTITY_TOL: f64 = 1e-10;
/// HJB residual bound, relative to `max(1, |V(x)|)`.
pub const HJB_TOL: f64 = 1e-9;
/// Monte Carlo agreement in standard errors.
pub const MC_SIGMAS: f64 = 3.0;
pub const GRID_POINTS: usize = 101;
pub const PERTURBATIONS: usize = 100;
/// `ν₁` grid `[−5, 0]` with step `1e-3`.
pub const NU_GRID_STEPS: usize = 5000;
pub const NU_GRID_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    Goal,
    Survive,
    Reach,
    RewardMax,
    PenaltyMin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "snake_case")]
pub enum ProblemSolution {
    Goal(GoalSolution),
    Time(TimeSolution),
    Reward(RewardSolution),
}

/// One named check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<MCEstimate>,
    /// Worst observed discrepancy, for checks that scan a grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckRecord {
    fn new(name: &str, passed: bool, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed,
            tolerance,
            closed_form: None,
            oracle: None,
            mc: None,
            worst: None,
            detail: None,
        }
    }

    fn worst(mut self, v: f64) -> Self {
        self.worst = Some(finite_or_max(v));
        self
    }

    fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }

    fn pair(name: &str, closed: f64, oracle: f64, tol: f64) -> Self {
        let rel = rel_diff(closed, oracle);
        let mut rec = Self::new(name, rel <= tol, tol).worst(rel);
        rec.closed_form = Some(closed);
        rec.oracle = Some(oracle);
        rec
    }

    fn monte_carlo(name: &str, closed: f64, est: MCEstimate) -> Self {
        let passed = est.n_used > 0 && (est.mean - closed).abs() <= MC_SIGMAS * est.std_error.max(f64::MIN_POSITIVE);
        let mut rec = Self::new(name, passed, MC_SIGMAS);
        rec.closed_form = Some(closed);
        rec.mc = Some(est);
        if est.std_error > 0.0 {
            rec.worst = Some(finite_or_max((est.mean - closed).abs() / est.std_error));
        }
        rec
    }
}

fn finite_or_max(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::MAX
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportInputs {
    pub x: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    pub sim: SimConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub problem: Problem,
    pub inputs: ReportInputs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<ProblemSolution>,
    pub checks: Vec<CheckRecord>,
    pub passed: bool,
}

impl VerificationReport {
    fn new(problem: Problem, inputs: ReportInputs) -> Self {
        Self { problem, inputs, solution: None, checks: Vec::new(), passed: false }
    }

    fn push(&mut self, rec: CheckRecord) {
        self.checks.push(rec);
    }

    fn precondition_failed(mut self, err: &Error) -> Self {
        self.push(
            CheckRecord::new("precondition", false, 0.0).detail(format!("{}: {err}", err.kind())),
        );
        self.finish()
    }

    fn finish(mut self) -> Self {
        self.passed = !self.checks.is_empty() && self.checks.iter().all(|c| c.passed);
        self
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

/// Errors that mean the closed form does not apply; anything else is a
/// malformed request and is returned to the caller.
fn surface(report: VerificationReport, err: Error) -> Result<VerificationReport> {
    match err.class() {
        crate::error::ErrorClass::Regime => Ok(report.precondition_failed(&err)),
        crate::error::ErrorClass::Config => Err(err),
    }
}

/// Deterministic generator for strategy perturbations, separate from the
/// path streams.
fn perturbation_rng(cfg: &SimConfig) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(u64::MAX);
    rng
}

/// Random direction with norm in `[0.01, 0.5]`.
fn perturbation(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    let v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let norm = v.norm().max(f64::MIN_POSITIVE);
    let scale = 0.01 + 0.49 * rng.random::<f64>();
    v * (scale / norm)
}

/// Residual sweep and strict-concavity probe shared by all problems.
fn hjb_checks<V, S>(
    report: &mut VerificationReport,
    cfg: &SimConfig,
    grid: &[f64],
    value: &V,
    w_star: &[f64],
    supremand: S,
) -> Result<()>
where
    V: ValueFunction,
    S: Fn(&DVector<f64>, f64) -> Result<f64>,
{
    let w = DVector::from_column_slice(w_star);
    let mut worst = 0.0f64;
    for &x in grid {
        let res = supremand(&w, x)?;
        worst = worst.max(res.abs() / value.value(x).abs().max(1.0));
    }
    report.push(CheckRecord::new("hjb_residual", worst <= HJB_TOL, HJB_TOL).worst(worst));

    let mut rng = perturbation_rng(cfg);
    let mut violations = 0usize;
    let mut closest = f64::INFINITY;
    for &x in grid {
        let at_opt = supremand(&w, x)?;
        for _ in 0..PERTURBATIONS {
            let trial = &w + perturbation(&mut rng, w.len());
            let gap = at_opt - supremand(&trial, x)?;
            closest = closest.min(gap);
            if !(gap > 0.0) {
                violations += 1;
            }
        }
    }
    report.push(
        CheckRecord::new("hjb_strict_maximum", violations == 0, 0.0)
            .worst(closest)
            .detail(format!("{violations} of {} perturbations not strictly worse", grid.len() * PERTURBATIONS)),
    );
    Ok(())
}

/// `GRID_POINTS` points strictly inside `(lo, hi)`.
fn interior_grid(lo: f64, hi: f64) -> Vec<f64> {
    let step = (hi - lo) / (GRID_POINTS + 1) as f64;
    (1..=GRID_POINTS).map(|i| lo + step * i as f64).collect()
}

/// Geometric grid on the open side of a single barrier.
fn one_sided_grid(barrier: f64, x: f64, side: Side) -> Vec<f64> {
    let span = (2.0 * (x / barrier).ln().abs()).max(1.0);
    let step = span / GRID_POINTS as f64;
    let sign = match side {
        Side::Lower => 1.0,
        Side::Upper => -1.0,
    };
    (1..=GRID_POINTS).map(|i| barrier * (sign * step * i as f64).exp()).collect()
}

/// Values of `f` on the `ν₁` grid `[−5, 0]`; returns the gap between the grid
/// minimum and `f(ν₁*)`.
pub fn nu_grid_gap<F: Fn(f64) -> f64>(f: F, nu_star: f64) -> f64 {
    let at_star = f(nu_star);
    let grid_min = (0..=NU_GRID_STEPS)
        .map(|i| f(-5.0 + 1e-3 * i as f64))
        .fold(f64::INFINITY, f64::min);
    at_star - grid_min
}

fn nu_grid_check(name: &str, gap: f64) -> CheckRecord {
    CheckRecord::new(name, gap <= NU_GRID_TOL, NU_GRID_TOL).worst(gap)
}

fn slack_checks(report: &mut VerificationReport, case: Branch, nu: FictitiousParam, w: &[f64]) {
    let budget: f64 = w.iter().sum();
    let (passed, detail) = match case {
        Branch::Constrained => ((budget - 1.0).abs() <= 1e-9, "1'w* = 1 on the constrained branch"),
        Branch::Unconstrained => (budget < 1.0 && nu.is_zero(), "1'w* < 1 and nu* = 0"),
    };
    report.push(CheckRecord::new("budget", passed, 1e-9).worst(budget).detail(detail));
    report.push(CheckRecord::new("cone", nu.nu1() <= 0.0, 0.0).worst(nu.nu1()));
    let gap = complementarity_gap(nu, w);
    report.push(CheckRecord::new("complementarity", gap.abs() <= 1e-12, 1e-12).worst(gap.abs()));
}

/// Full cross-check of the goal solution at `x`.
pub fn verify_goal(
    dm: &DerivedMarket,
    lower: f64,
    upper: f64,
    x: f64,
    cfg: &SimConfig,
) -> Result<VerificationReport> {
    cfg.validate()?;
    let inputs = ReportInputs { x, lower: Some(lower), upper: Some(upper), rho: None, sim: *cfg };
    let mut report = VerificationReport::new(Problem::Goal, inputs);
    if !(x > lower && x < upper) {
        goal::check_barriers(lower, upper)?;
        return Err(Error::DomainViolation(format!("x = {x} must lie strictly inside ({lower}, {upper})")));
    }
    let sol = match goal::solve_goal(dm, lower, upper) {
        Ok(s) => s,
        Err(e) => return surface(report, e),
    };
    let value = GoalValue::new(&sol);
    let fx = goal::goal_value(&sol, x)?;

    let bounds = goal::goal_value(&sol, lower)? == 0.0 && goal::goal_value(&sol, upper)? == 1.0;
    report.push(CheckRecord::new("boundary_values", bounds, 0.0));

    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| lower + (upper - lower) * i as f64 / (GRID_POINTS - 1) as f64)
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&g| goal::goal_value(&sol, g)).collect::<Result<_>>()?;
    let increasing = vals.windows(2).all(|p| p[1] > p[0]);
    report.push(CheckRecord::new("increasing", increasing, 0.0));
    let worst_curv = vals
        .windows(3)
        .map(|t| t[2] - 2.0 * t[1] + t[0])
        .fold(f64::NEG_INFINITY, f64::max);
    report.push(CheckRecord::new("concave", worst_curv <= 1e-15, 1e-15).worst(worst_curv));

    let reclassified = if -dm.exposure() / sol.alpha < 1.0 { Branch::Unconstrained } else { Branch::Constrained };
    report.push(CheckRecord::new("case_consistency", reclassified == sol.case, 0.0));
    slack_checks(&mut report, sol.case, sol.nu_star, &sol.w_star);

    let wealth = wealth_coefficients(dm, sol.nu_star, &DVector::from_column_slice(&sol.w_star))?;
    let oracle = simulator::analytic_two_barrier_probability(wealth.log_drift, wealth.log_vol, x, lower, upper)?;
    report.push(CheckRecord::pair("oracle_two_barrier", fx, oracle, IDENTITY_TOL));

    let interior = interior_grid(lower, upper);
    hjb_checks(&mut report, cfg, &interior, &value, &sol.w_star, |w, xx| {
        goal::goal_hjb_supremand(&sol, dm, w, xx)
    })?;

    let gap = nu_grid_gap(|n| goal::goal_dual_objective(dm, sol.alpha, n), sol.nu_star.nu1());
    report.push(nu_grid_check("nu_dual_minimality", gap));

    let est = simulator::estimate_hit_probability(&sol.wealth, x, lower, upper, cfg)?;
    report.push(CheckRecord::monte_carlo("monte_carlo", fx, est));

    report.solution = Some(ProblemSolution::Goal(sol));
    Ok(report.finish())
}

/// Project onto `1'w ≤ 1` along the all-ones direction.
fn project_budget(mut w: DVector<f64>) -> DVector<f64> {
    let excess = w.sum() - 1.0;
    if excess > 0.0 {
        let n = w.len() as f64;
        w.add_scalar_mut(-excess / n);
    }
    w
}

/// The fixed probe directions: `±e_j` and `±1/√N`, without duplicates.
fn probe_directions(n: usize) -> Vec<DVector<f64>> {
    let mut dirs: Vec<DVector<f64>> = Vec::new();
    let mut push = |v: DVector<f64>| {
        if !dirs.iter().any(|d| (d - &v).norm() < 1e-12) {
            dirs.push(v);
        }
    };
    for j in 0..n.min(3) {
        for sign in [1.0, -1.0] {
            let mut e = DVector::zeros(n);
            e[j] = sign;
            push(e);
        }
    }
    for sign in [1.0, -1.0] {
        push(DVector::from_element(n, sign / (n as f64).sqrt()));
    }
    dirs
}

/// Cross-check of the survival (`side = Lower`) or reach (`side = Upper`)
/// solution at `x` for the given barrier.
pub fn verify_time(
    dm: &DerivedMarket,
    barrier: f64,
    side: Side,
    x: f64,
    cfg: &SimConfig,
) -> Result<VerificationReport> {
    cfg.validate()?;
    let (problem, lower, upper) = match side {
        Side::Lower => (Problem::Survive, Some(barrier), None),
        Side::Upper => (Problem::Reach, None, Some(barrier)),
    };
    let inside = match side {
        Side::Lower => x > barrier,
        Side::Upper => x < barrier,
    };
    if !(barrier > 0.0 && barrier.is_finite() && x > 0.0 && inside) {
        return Err(Error::DomainViolation(format!("x = {x} on the wrong side of barrier {barrier}")));
    }
    let mut report = VerificationReport::new(problem, ReportInputs { x, lower, upper, rho: None, sim: *cfg });
    let sol = match expected_time::solve_time(dm) {
        Ok(s) => s,
        Err(e) => return surface(report, e),
    };
    let expected_regime = match side {
        Side::Lower => TimeRegime::Survival,
        Side::Upper => TimeRegime::Reach,
    };
    if sol.regime != expected_regime {
        let err = Error::RegimeMismatch(format!(
            "beta* = {} gives the {:?} regime",
            sol.beta_star, sol.regime
        ));
        report.solution = Some(ProblemSolution::Time(sol));
        return surface(report, err);
    }
    let closed = match side {
        Side::Lower => expected_time::survival_value(&sol, x, barrier)?,
        Side::Upper => expected_time::reach_value(&sol, x, barrier)?,
    };

    report.push(CheckRecord::pair("beta_is_log_drift", sol.beta_star, sol.wealth.log_drift, 1e-12));
    let reclassified = if dm.exposure() < 1.0 { TimeCase::Interior } else { TimeCase::Boundary };
    report.push(CheckRecord::new("case_consistency", reclassified == sol.case, 0.0));
    let branch = match sol.case {
        TimeCase::Interior => Branch::Unconstrained,
        TimeCase::Boundary => Branch::Constrained,
    };
    slack_checks(&mut report, branch, sol.nu_star, &sol.w_star);

    let wald = simulator::analytic_expected_exit_time(sol.wealth.log_drift, x, barrier, side)?;
    report.push(CheckRecord::pair("oracle_wald", closed, wald, 1e-12));

    let value = TimeValue::new(&sol, barrier);
    let grid = one_sided_grid(barrier, x, side);
    hjb_checks(&mut report, cfg, &grid, &value, &sol.w_star, |w, xx| {
        expected_time::time_hjb_supremand(&sol, dm, barrier, w, xx)
    })?;

    let gap = nu_grid_gap(|n| expected_time::time_shift_term(dm, n), sol.nu_star.nu1());
    report.push(nu_grid_check("nu_minimality", gap));

    let est = simulator::estimate_expected_exit_time(&sol.wealth, x, barrier, side, cfg)?;
    report.push(CheckRecord::monte_carlo("monte_carlo", closed, est));

    // Perturbed constant strategies must not beat the optimum, either by the
    // Wald formula or by simulation.
    let probe_cfg = SimConfig { n_paths: (cfg.n_paths / 20).max(100), ..*cfg };
    let w_star = DVector::from_column_slice(&sol.w_star);
    let mut probe_failures = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for dir in probe_directions(dm.n()) {
        for delta in [0.1, 0.25] {
            let w = project_budget(&w_star + &dir * delta);
            let g = wealth_coefficients(dm, FictitiousParam::ZERO, &w)?;
            let wald = match simulator::analytic_expected_exit_time(g.log_drift, x, barrier, side) {
                Ok(t) => t,
                // Never reaches the barrier on average: cannot beat a survival
                // optimum from below nor a reach optimum.
                Err(Error::WrongDriftDirection(_)) if side == Side::Upper => continue,
                Err(Error::WrongDriftDirection(_)) => {
                    probe_failures.push(format!("delta {delta} along {:?} never ruins", dir.as_slice()));
                    continue;
                }
                Err(e) => return Err(e),
            };
            let est = simulator::estimate_expected_exit_time(&g, x, barrier, side, &probe_cfg)?;
            // Oriented so that a positive margin means the probe beat w*.
            let (oracle_margin, mc_margin) = match side {
                Side::Lower => (wald - closed, est.mean - closed - MC_SIGMAS * est.std_error),
                Side::Upper => (closed - wald, closed - est.mean - MC_SIGMAS * est.std_error),
            };
            let mc_margin = if est.n_used == 0 { f64::NEG_INFINITY } else { mc_margin };
            worst = worst.max(mc_margin);
            if oracle_margin > 1e-12 * closed || mc_margin > 0.0 {
                probe_failures.push(format!("delta {delta} along {:?}", dir.as_slice()));
            }
        }
    }
    report.push(
        CheckRecord::new("optimality_probes", probe_failures.is_empty(), MC_SIGMAS)
            .worst(worst)
            .detail(if probe_failures.is_empty() {
                "no perturbed strategy beat the optimum".to_string()
            } else {
                probe_failures.join("; ")
            }),
    );

    report.solution = Some(ProblemSolution::Time(sol));
    Ok(report.finish())
}

/// Cross-check of the discounted reward (`MaxReward`, barrier `U`) or penalty
/// (`MinPenalty`, barrier `L`) solution at `x`.
pub fn verify_reward(
    dm: &DerivedMarket,
    rho: f64,
    barrier: f64,
    x: f64,
    direction: Direction,
    cfg: &SimConfig,
) -> Result<VerificationReport> {
    cfg.validate()?;
    let (problem, side, lower, upper) = match direction {
        Direction::MaxReward => (Problem::RewardMax, Side::Upper, None, Some(barrier)),
        Direction::MinPenalty => (Problem::PenaltyMin, Side::Lower, Some(barrier), None),
    };
    let inside = match side {
        Side::Lower => x > barrier,
        Side::Upper => x < barrier,
    };
    if !(barrier > 0.0 && barrier.is_finite() && x > 0.0 && inside) {
        return Err(Error::DomainViolation(format!("x = {x} on the wrong side of barrier {barrier}")));
    }
    let mut report = VerificationReport::new(problem, ReportInputs { x, lower, upper, rho: Some(rho), sim: *cfg });
    let solved = match direction {
        Direction::MaxReward => reward::solve_reward_max(dm, rho, barrier),
        Direction::MinPenalty => reward::solve_penalty_min(dm, rho, barrier),
    };
    let sol = match solved {
        Ok(s) => s,
        Err(e) => return surface(report, e),
    };
    let closed = reward::discounted_value(&sol, x)?;
    let at_barrier = reward::discounted_value(&sol, barrier)?;
    report.push(CheckRecord::new("boundary_value", at_barrier == 1.0, 0.0));

    let residual = reward::characteristic_residual(&sol, dm);
    report.push(CheckRecord::new("characteristic_residual", residual <= IDENTITY_TOL, IDENTITY_TOL).worst(residual));
    let sign_ok = match direction {
        Direction::MaxReward => sol.d > -1.0 && sol.d < 0.0,
        Direction::MinPenalty => sol.d > 0.0,
    };
    report.push(CheckRecord::new("root_range", sign_ok, 0.0).worst(sol.d));
    let rc = dm.riskless_growth();
    let product = rho / rc;
    report.push(
        CheckRecord::new("root_product_negative", product < 0.0, 0.0)
            .worst(product)
            .detail("product of the unconstrained roots"),
    );

    slack_checks(&mut report, sol.case, sol.nu_star, &sol.w_star);
    if sol.case == Branch::Constrained {
        let lhs = shifted_price_of_risk(dm, sol.nu_star).norm_squared();
        let rhs = dm.sharpe_perp_sq() + (sol.d + 1.0).powi(2) / dm.precision();
        report.push(CheckRecord::pair("constrained_price_of_risk", lhs, rhs, IDENTITY_TOL));
    } else {
        let ratio = DVector::from_column_slice(&sol.w_star).norm() / dm.log_optimal().norm();
        let more_risk = ratio > 1.0;
        let ok = match direction {
            Direction::MaxReward => more_risk,
            Direction::MinPenalty => !more_risk && ratio < 1.0,
        };
        report.push(
            CheckRecord::new("risk_relative_to_log_optimal", ok, 0.0)
                .worst(ratio)
                .detail("|w*| / |w_o|"),
        );
    }

    let oracle = simulator::analytic_laplace_hitting(sol.wealth.log_drift, sol.wealth.log_vol, x, barrier, side, rho)?;
    report.push(CheckRecord::pair("oracle_laplace", closed, oracle, IDENTITY_TOL));

    let value = DiscountedValue::new(&sol);
    let grid = one_sided_grid(barrier, x, side);
    hjb_checks(&mut report, cfg, &grid, &value, &sol.w_star, |w, xx| {
        reward::reward_hjb_supremand(&sol, dm, w, xx)
    })?;

    let gap = nu_grid_gap(|n| reward::reward_dual_objective(dm, sol.d, n), sol.nu_star.nu1());
    report.push(nu_grid_check("nu_dual_minimality", gap));

    let est = simulator::estimate_discounted_reward(&sol.wealth, x, barrier, side, rho, cfg)?;
    report.push(CheckRecord::monte_carlo("monte_carlo", closed, est));

    report.solution = Some(ProblemSolution::Reward(sol));
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{build_derived, MarketSpec};

    fn small() -> SimConfig {
        SimConfig { n_paths: 2000, dt: 1e-2, horizon: 500.0, seed: 5, bridge_correction: true }
    }

    #[test]
    fn flat_market_is_a_failed_precondition() {
        let dm = build_derived(MarketSpec::single(0.02, -0.05, 0.02, 0.25)).unwrap();
        let rep = verify_goal(&dm, 1.0, 2.0, 1.5, &small()).unwrap();
        assert!(!rep.passed);
        assert_eq!(rep.checks.len(), 1);
        assert_eq!(rep.checks[0].name, "precondition");
        assert!(rep.checks[0].detail.as_deref().unwrap().starts_with("RegimeViolation"));
    }

    #[test]
    fn config_errors_propagate() {
        let dm = build_derived(MarketSpec::single(0.02, -0.05, 0.12, 0.25)).unwrap();
        assert!(verify_goal(&dm, 1.0, 2.0, 2.5, &small()).is_err());
        assert!(verify_goal(&dm, 2.0, 1.0, 1.5, &small()).is_err());
    }

    #[test]
    fn probe_directions_are_distinct() {
        assert_eq!(probe_directions(1).len(), 2);
        assert_eq!(probe_directions(2).len(), 6);
        assert_eq!(probe_directions(4).len(), 8);
    }

    #[test]
    fn projection_respects_budget() {
        let w = project_budget(DVector::from_vec(vec![0.9, 0.6]));
        assert!((w.sum() - 1.0).abs() < 1e-15);
        let w = project_budget(DVector::from_vec(vec![0.2, 0.3]));
        assert_eq!(w.as_slice(), &[0.2, 0.3]);
    }

    #[test]
    fn nu_grid_on_a_convex_parabola() {
        assert!(nu_grid_gap(|n| (n + 0.3).powi(2), -0.3) <= 0.0);
        assert!(nu_grid_gap(|n| -(n + 0.3).powi(2), -0.3) > 1.0);
    }
}
