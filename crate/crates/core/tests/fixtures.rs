//! Frozen reference values for the two single-asset fixture markets. The
//! numbers come from an independent high-precision evaluation of the root
//! formulas and first-passage identities.

use approx::assert_relative_eq;
use auxmarket::auxiliary::{favourability, ruin_curve};
use auxmarket::expected_time::{self, TimeCase, TimeRegime};
use auxmarket::reward::{self, Direction};
use auxmarket::simulator::{Side, SimConfig};
use auxmarket::verification::{self, Problem};
use auxmarket::{build_derived, goal, Branch, DerivedMarket, Error, FictitiousParam, MarketSpec};

fn load(name: &str) -> DerivedMarket {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(path).unwrap();
    build_derived(MarketSpec::from_json(&text).unwrap()).unwrap()
}

fn market_a() -> DerivedMarket {
    load("marketA.json")
}

fn market_b() -> DerivedMarket {
    load("marketB.json")
}

#[test]
fn derived_quantities() {
    let a = market_a();
    assert_relative_eq!(a.zeta()[0], 0.4, max_relative = 1e-14);
    assert_relative_eq!(a.log_optimal()[0], 1.6, max_relative = 1e-14);
    assert_relative_eq!(a.exposure(), 1.6, max_relative = 1e-14);
    assert_relative_eq!(a.precision(), 16.0, max_relative = 1e-14);
    assert_relative_eq!(a.half_sharpe_sq(), 0.08, max_relative = 1e-14);
    assert_eq!(a.sharpe_perp_sq(), 0.0);
    let b = market_b();
    assert_relative_eq!(b.log_optimal()[0], 0.64, max_relative = 1e-14);
}

#[test]
fn goal_market_a_unconstrained() {
    let sol = goal::solve_goal(&market_a(), 1.0, 2.0).unwrap();
    assert_eq!(sol.case, Branch::Unconstrained);
    assert_relative_eq!(sol.alpha, -8.0 / 3.0, max_relative = 1e-14);
    assert!(sol.nu_star.is_zero());
    assert_relative_eq!(sol.w_star[0], 0.6, max_relative = 1e-14);
    assert_relative_eq!(sol.wealth.log_drift, 0.01875, max_relative = 1e-13);
    assert_relative_eq!(sol.wealth.log_vol, 0.15, max_relative = 1e-14);
    for (x, f) in [(1.1, 0.2144112491849637), (1.5, 0.7171152705682358), (1.9, 0.9589620648054646)] {
        assert_relative_eq!(goal::goal_value(&sol, x).unwrap(), f, max_relative = 1e-12);
    }
}

#[test]
fn goal_market_b_constrained() {
    let sol = goal::solve_goal(&market_b(), 1.0, 2.0).unwrap();
    assert_eq!(sol.case, Branch::Constrained);
    assert_relative_eq!(sol.alpha, -0.32, max_relative = 1e-13);
    assert_relative_eq!(sol.nu_star.nu1(), -0.02, max_relative = 1e-12);
    assert_relative_eq!(sol.w_star[0], 1.0, max_relative = 1e-13);
    assert_relative_eq!(sol.wealth.log_drift, -0.02125, max_relative = 1e-12);
    assert_relative_eq!(sol.wealth.log_vol, 0.25, max_relative = 1e-13);
    for (x, f) in [(1.1, 0.11119888177718774), (1.5, 0.5272430627462863), (1.9, 0.9087945812805827)] {
        assert_relative_eq!(goal::goal_value(&sol, x).unwrap(), f, max_relative = 1e-12);
    }
}

#[test]
fn goal_rejects_bad_barriers_and_positive_growth() {
    let a = market_a();
    assert!(matches!(goal::solve_goal(&a, 2.0, 1.0), Err(Error::InvalidBarriers(_))));
    let sol = goal::solve_goal(&a, 1.0, 2.0).unwrap();
    assert!(matches!(goal::goal_value(&sol, 2.5), Err(Error::DomainViolation(_))));
    let growth = build_derived(MarketSpec::single(0.06, -0.05, 0.12, 0.25)).unwrap();
    assert!(matches!(goal::solve_goal(&growth, 1.0, 2.0), Err(Error::RegimeViolation(_))));
}

#[test]
fn survival_market_b() {
    let b = market_b();
    let sol = expected_time::solve_time(&b).unwrap();
    assert_eq!(sol.case, TimeCase::Interior);
    assert_eq!(sol.regime, TimeRegime::Survival);
    assert_relative_eq!(sol.beta_star, -0.0172, max_relative = 1e-12);
    assert_relative_eq!(sol.w_star[0], 0.64, max_relative = 1e-13);
    assert_relative_eq!(expected_time::survival_value(&sol, 1.5, 1.0).unwrap(), 23.57355279698629, max_relative = 1e-12);
    assert!(matches!(expected_time::reach_value(&sol, 1.5, 2.0), Err(Error::RegimeMismatch(_))));
}

#[test]
fn reach_market_a() {
    let a = market_a();
    let sol = expected_time::solve_time(&a).unwrap();
    assert_eq!(sol.case, TimeCase::Boundary);
    assert_eq!(sol.regime, TimeRegime::Reach);
    assert_relative_eq!(sol.beta_star, 0.03875, max_relative = 1e-12);
    assert_relative_eq!(sol.nu_star.nu1(), -0.0375, max_relative = 1e-12);
    assert_relative_eq!(sol.w_star[0], 1.0, max_relative = 1e-13);
    assert_relative_eq!(sol.beta_star, favourability(&a, sol.nu_star), max_relative = 1e-14);
    assert_relative_eq!(expected_time::reach_value(&sol, 1.5, 2.0).unwrap(), 7.424053482626604, max_relative = 1e-12);
}

#[test]
fn reward_market_a_constrained() {
    let sol = reward::solve_reward_max(&market_a(), 0.05, 2.0).unwrap();
    assert_eq!(sol.direction, Direction::MaxReward);
    assert_eq!(sol.case, Branch::Constrained);
    assert_relative_eq!(sol.d, -0.7886873322352268, max_relative = 1e-12);
    assert_relative_eq!(sol.nu_star.nu1(), -0.08679295826470167, max_relative = 1e-11);
    assert_relative_eq!(sol.w_star[0], 1.0, max_relative = 1e-12);
    assert_relative_eq!(reward::discounted_value(&sol, 1.5).unwrap(), 0.7970074870037727, max_relative = 1e-12);
}

#[test]
fn penalty_market_b_unconstrained() {
    let sol = reward::solve_penalty_min(&market_b(), 0.05, 1.0).unwrap();
    assert_eq!(sol.case, Branch::Unconstrained);
    assert_relative_eq!(sol.d, 1.9486335389967908, max_relative = 1e-12);
    assert_relative_eq!(sol.w_star[0], 0.21704969150481349, max_relative = 1e-12);
    assert_relative_eq!(sol.wealth.log_drift, -0.022790217608005425, max_relative = 1e-12);
    assert_relative_eq!(sol.wealth.log_vol, 0.05426242287620337, max_relative = 1e-12);
    assert_relative_eq!(reward::discounted_value(&sol, 1.5).unwrap(), 0.453798093174465, max_relative = 1e-12);
}

#[test]
fn reward_gates_on_the_wrong_market() {
    assert!(matches!(reward::solve_reward_max(&market_b(), 0.05, 2.0), Err(Error::FavourabilityViolation(_))));
    assert!(matches!(reward::solve_penalty_min(&market_a(), 0.05, 1.0), Err(Error::FavourabilityViolation(_))));
}

#[test]
fn ruin_curve_market_b() {
    let b = market_b();
    let beta = favourability(&b, FictitiousParam::ZERO);
    let p = ruin_curve(beta, b.zeta().norm(), 1.5, 1.0, 100.0).unwrap();
    assert_relative_eq!(p, 0.7943432382392714, max_relative = 1e-12);
}

fn cfg(paths: usize, seed: u64) -> SimConfig {
    SimConfig { n_paths: paths, dt: 1e-3, horizon: 500.0, seed, bridge_correction: true }
}

#[test]
fn verification_reports_pass_on_fixtures() {
    let (a, b) = (market_a(), market_b());
    let reports = [
        verification::verify_goal(&a, 1.0, 2.0, 1.5, &cfg(20_000, 3)).unwrap(),
        verification::verify_goal(&b, 1.0, 2.0, 1.5, &cfg(20_000, 4)).unwrap(),
        verification::verify_time(&b, 1.0, Side::Lower, 1.5, &SimConfig { horizon: 2000.0, ..cfg(10_000, 5) }).unwrap(),
        verification::verify_time(&a, 2.0, Side::Upper, 1.5, &cfg(20_000, 6)).unwrap(),
        verification::verify_reward(&a, 0.05, 2.0, 1.5, Direction::MaxReward, &cfg(20_000, 7)).unwrap(),
        verification::verify_reward(&b, 0.05, 1.0, 1.5, Direction::MinPenalty, &cfg(10_000, 8)).unwrap(),
    ];
    for r in &reports {
        assert!(r.passed, "{:?} failed: {:?}", r.problem, r.failed_checks());
        assert!(r.checks.len() >= 8);
    }
}

#[test]
fn verification_surfaces_regime_failures() {
    let b = market_b();
    let report = verification::verify_reward(&b, 0.05, 2.0, 1.5, Direction::MaxReward, &cfg(100, 1)).unwrap();
    assert_eq!(report.problem, Problem::RewardMax);
    assert!(!report.passed);
    let detail = report.checks[0].detail.as_deref().unwrap();
    assert!(detail.starts_with("FavourabilityViolation"), "{detail}");

    let a = market_a();
    let report = verification::verify_time(&a, 1.0, Side::Lower, 1.5, &cfg(100, 1)).unwrap();
    assert!(!report.passed);
    assert_eq!(report.failed_checks(), ["precondition"]);
}

#[test]
fn verification_rejects_bad_simulation_settings() {
    let a = market_a();
    let bad = SimConfig { dt: 0.0, ..cfg(100, 1) };
    assert!(matches!(verification::verify_goal(&a, 1.0, 2.0, 1.5, &bad), Err(Error::InvalidParameter(_))));
}
