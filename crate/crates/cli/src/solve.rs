//! Per-problem solve summaries and the validated run configuration.

use auxmarket::expected_time::{self, TimeRegime};
use auxmarket::reward::{self, Direction};
use auxmarket::simulator::{Side, SimConfig};
use auxmarket::verification::{self, Problem, VerificationReport};
use auxmarket::{goal, DerivedMarket, GbmCoefficients};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Problem inputs after barrier validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub problem: Problem,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub x: f64,
    pub rho: Option<f64>,
}

impl RunConfig {
    pub fn new(problem: Problem, lower: Option<f64>, upper: Option<f64>, x: f64, rho: Option<f64>) -> Result<Self, CliError> {
        let (need_l, need_u, need_rho) = requirements(problem);
        if need_l && lower.is_none() {
            return Err(CliError::missing("missing barrier L"));
        }
        if need_u && upper.is_none() {
            return Err(CliError::missing("missing barrier U"));
        }
        if need_rho && rho.is_none() {
            return Err(CliError::missing("missing discount rate rho"));
        }
        // Inputs the problem does not use are dropped so reports stay canonical.
        Ok(Self {
            problem,
            lower: lower.filter(|_| need_l),
            upper: upper.filter(|_| need_u),
            x,
            rho: rho.filter(|_| need_rho),
        })
    }

    fn lower(&self) -> f64 {
        self.lower.expect("validated")
    }

    fn upper(&self) -> f64 {
        self.upper.expect("validated")
    }

    fn rho(&self) -> f64 {
        self.rho.expect("validated")
    }
}

/// Which of `(L, U, rho)` each problem needs.
pub fn requirements(problem: Problem) -> (bool, bool, bool) {
    match problem {
        Problem::Goal => (true, true, false),
        Problem::Survive => (true, false, false),
        Problem::Reach => (false, true, false),
        Problem::RewardMax => (false, true, true),
        Problem::PenaltyMin => (true, false, true),
    }
}

/// Solution summary printed by `solve` and used for each sweep row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub problem: Problem,
    pub case: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<TimeRegime>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    pub nu1_star: f64,
    pub w_star: Vec<f64>,
    pub x: f64,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(rename = "U", default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Probability or discounted value; absent for the time problems.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_years: Option<f64>,
    pub wealth: GbmCoefficients,
}

impl SolveOutput {
    /// The exponent reported for the problem: `α`, `β*` or `d`.
    pub fn exponent(&self) -> Option<f64> {
        self.alpha.or(self.beta_star).or(self.d)
    }

    pub fn headline(&self) -> Option<f64> {
        self.value.or(self.value_years)
    }
}

fn snake<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        _ => String::new(),
    }
}

fn blank(cfg: &RunConfig, case: String, nu1: f64, w: Vec<f64>, wealth: GbmCoefficients) -> SolveOutput {
    SolveOutput {
        problem: cfg.problem,
        case,
        alpha: None,
        beta_star: None,
        regime: None,
        d: None,
        nu1_star: nu1,
        w_star: w,
        x: cfg.x,
        lower: cfg.lower,
        upper: cfg.upper,
        rho: cfg.rho,
        value: None,
        value_years: None,
        wealth,
    }
}

pub fn solve(dm: &DerivedMarket, cfg: &RunConfig) -> Result<SolveOutput, CliError> {
    let out = match cfg.problem {
        Problem::Goal => {
            let sol = goal::solve_goal(dm, cfg.lower(), cfg.upper())?;
            let value = goal::goal_value(&sol, cfg.x)?;
            let mut out = blank(cfg, snake(&sol.case), sol.nu_star.nu1(), sol.w_star, sol.wealth);
            out.alpha = Some(sol.alpha);
            out.value = Some(value);
            out
        }
        Problem::Survive | Problem::Reach => {
            let sol = expected_time::solve_time(dm)?;
            let years = match cfg.problem {
                Problem::Survive => expected_time::survival_value(&sol, cfg.x, cfg.lower())?,
                _ => expected_time::reach_value(&sol, cfg.x, cfg.upper())?,
            };
            let mut out = blank(cfg, snake(&sol.case), sol.nu_star.nu1(), sol.w_star.clone(), sol.wealth.clone());
            out.beta_star = Some(sol.beta_star);
            out.regime = Some(sol.regime);
            out.value_years = Some(years);
            out
        }
        Problem::RewardMax | Problem::PenaltyMin => {
            let sol = match cfg.problem {
                Problem::RewardMax => reward::solve_reward_max(dm, cfg.rho(), cfg.upper())?,
                _ => reward::solve_penalty_min(dm, cfg.rho(), cfg.lower())?,
            };
            let value = reward::discounted_value(&sol, cfg.x)?;
            let mut out = blank(cfg, snake(&sol.case), sol.nu_star.nu1(), sol.w_star, sol.wealth);
            out.d = Some(sol.d);
            out.value = Some(value);
            out
        }
    };
    Ok(out)
}

pub fn verify(dm: &DerivedMarket, cfg: &RunConfig, sim: &SimConfig) -> Result<VerificationReport, CliError> {
    let report = match cfg.problem {
        Problem::Goal => verification::verify_goal(dm, cfg.lower(), cfg.upper(), cfg.x, sim)?,
        Problem::Survive => verification::verify_time(dm, cfg.lower(), Side::Lower, cfg.x, sim)?,
        Problem::Reach => verification::verify_time(dm, cfg.upper(), Side::Upper, cfg.x, sim)?,
        Problem::RewardMax => {
            verification::verify_reward(dm, cfg.rho(), cfg.upper(), cfg.x, Direction::MaxReward, sim)?
        }
        Problem::PenaltyMin => {
            verification::verify_reward(dm, cfg.rho(), cfg.lower(), cfg.x, Direction::MinPenalty, sim)?
        }
    };
    Ok(report)
}
