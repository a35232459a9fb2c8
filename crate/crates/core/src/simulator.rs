//! Monte Carlo engine for constant-proportion wealth processes, plus the
//! closed-form first-passage laws used as independent oracles.
//!
//! Wealth is geometric Brownian motion, so `ln X` is stepped exactly on a
//! uniform grid and the only discretisation error comes from monitoring the
//! barriers at grid points. An optional Brownian-bridge test removes most of
//! that bias.
//!
//! Every path draws from its own ChaCha stream keyed by `(seed, path index)`,
//! and per-chunk statistics are merged in index order, so results do not
//! depend on how many threads run the paths.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auxiliary::{complementarity_gap, wealth_coefficients, FictitiousParam, GbmCoefficients};
use crate::error::{Error, Result};
use crate::market::DerivedMarket;

const CHUNK: usize = 256;
/// Bridge-crossing probabilities below `e^{-BRIDGE_CUTOFF}` are skipped.
const BRIDGE_CUTOFF: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    pub bridge_correction: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            dt: 1e-3,
            horizon: 500.0,
            seed: 1,
            bridge_correction: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::InvalidParameter("n_paths must be at least 1".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "horizon {} must be finite and at least dt = {}",
                self.horizon, self.dt
            )));
        }
        Ok(())
    }

    /// Number of grid steps covering the horizon.
    pub fn steps(&self) -> u64 {
        let raw = self.horizon / self.dt;
        let nearest = raw.round();
        if (raw - nearest).abs() <= 1e-9 * raw {
            nearest as u64
        } else {
            raw.ceil() as u64
        }
    }

    /// Independent generator for one path.
    pub fn path_rng(&self, path_index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(path_index);
        rng
    }
}

/// Which barrier a path is aimed at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lower,
    Upper,
}

/// Outcome of one simulated path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitRecord {
    Lower(f64),
    Upper(f64),
    /// Neither barrier reached by the horizon.
    Censored,
}

impl ExitRecord {
    pub fn side(self) -> Option<Side> {
        match self {
            ExitRecord::Lower(_) => Some(Side::Lower),
            ExitRecord::Upper(_) => Some(Side::Upper),
            ExitRecord::Censored => None,
        }
    }

    pub fn time(self) -> Option<f64> {
        match self {
            ExitRecord::Lower(t) | ExitRecord::Upper(t) => Some(t),
            ExitRecord::Censored => None,
        }
    }
}

/// Monte Carlo point estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√n_used`.
    pub std_error: f64,
    pub n_paths: usize,
    /// Paths that entered the mean.
    pub n_used: usize,
    pub n_censored: usize,
}

fn check_start(x0: f64, lower: f64, upper: f64) -> Result<()> {
    if !(lower >= 0.0 && upper > lower && !upper.is_nan()) {
        return Err(Error::InvalidBarriers(format!("need 0 <= L < U, got L = {lower}, U = {upper}")));
    }
    if lower == 0.0 && upper == f64::INFINITY {
        return Err(Error::InvalidBarriers("at least one barrier must be finite".into()));
    }
    if !(x0 > 0.0 && x0.is_finite() && x0 >= lower && x0 <= upper) {
        return Err(Error::InvalidBarriers(format!("start x0 = {x0} outside [{lower}, {upper}]")));
    }
    Ok(())
}

/// `ln` of a barrier, with `0 ↦ −∞` and `∞ ↦ +∞`.
fn log_level(b: f64) -> f64 {
    if b == 0.0 {
        f64::NEG_INFINITY
    } else {
        b.ln()
    }
}

/// Precomputed per-run quantities for the stepping loop.
struct Stepper {
    y0: f64,
    a: f64,
    b: f64,
    m: f64,
    s: f64,
    dt: f64,
    sqrt_dt: f64,
    steps: u64,
    bridge: bool,
    // 2/(s² dt)
    bridge_scale: f64,
}

impl Stepper {
    fn new(gbm: &GbmCoefficients, x0: f64, lower: f64, upper: f64, cfg: &SimConfig) -> Self {
        let s = gbm.log_vol;
        Self {
            y0: x0.ln(),
            a: log_level(lower),
            b: log_level(upper),
            m: gbm.log_drift,
            s,
            dt: cfg.dt,
            sqrt_dt: cfg.dt.sqrt(),
            steps: cfg.steps(),
            bridge: cfg.bridge_correction && s > 0.0,
            bridge_scale: 2.0 / (s * s * cfg.dt),
        }
    }

    fn bridge_hit(&self, rng: &mut ChaCha8Rng, y_prev: f64, y_next: f64, level: f64) -> bool {
        if !level.is_finite() {
            return false;
        }
        let exponent = self.bridge_scale * (y_prev - level) * (y_next - level);
        if exponent > BRIDGE_CUTOFF {
            return false;
        }
        rng.random::<f64>() < (-exponent).exp()
    }

    fn run(&self, rng: &mut ChaCha8Rng) -> ExitRecord {
        if self.y0 <= self.a {
            return ExitRecord::Lower(0.0);
        }
        if self.y0 >= self.b {
            return ExitRecord::Upper(0.0);
        }
        let mut noise = 0.0;
        let mut y_prev = self.y0;
        for i in 1..=self.steps {
            let t = i as f64 * self.dt;
            if self.s > 0.0 {
                let z: f64 = rng.sample(StandardNormal);
                noise += z;
            }
            let y = self.y0 + self.m * t + self.s * self.sqrt_dt * noise;
            if y <= self.a {
                return ExitRecord::Lower(t);
            }
            if y >= self.b {
                return ExitRecord::Upper(t);
            }
            if self.bridge {
                if self.bridge_hit(rng, y_prev, y, self.a) {
                    return ExitRecord::Lower(t);
                }
                if self.bridge_hit(rng, y_prev, y, self.b) {
                    return ExitRecord::Upper(t);
                }
            }
            y_prev = y;
        }
        ExitRecord::Censored
    }
}

/// Simulate one path of `ln X` from `x0` until it leaves `(L, U)`.
///
/// `lower = 0` removes the lower barrier and `upper = ∞` the upper one.
pub fn simulate_exit(
    gbm: &GbmCoefficients,
    x0: f64,
    lower: f64,
    upper: f64,
    cfg: &SimConfig,
    path_index: u64,
) -> Result<ExitRecord> {
    cfg.validate()?;
    check_start(x0, lower, upper)?;
    let stepper = Stepper::new(gbm, x0, lower, upper, cfg);
    Ok(stepper.run(&mut cfg.path_rng(path_index)))
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
    censored: usize,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1;
        let delta = v - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (v - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        let n = self.n + other.n;
        let censored = self.censored + other.censored;
        if n == 0 {
            return Moments { censored, ..Moments::default() };
        }
        let delta = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        Moments {
            n,
            mean: self.mean + delta * nb / n as f64,
            m2: self.m2 + other.m2 + delta * delta * na * nb / n as f64,
            censored,
        }
    }
}

/// Run every path and fold `score` over the outcomes. `score` returns the
/// sample value and whether the path counts as censored; `None` drops it.
fn run_paths<F>(
    gbm: &GbmCoefficients,
    x0: f64,
    lower: f64,
    upper: f64,
    cfg: &SimConfig,
    score: F,
) -> Result<MCEstimate>
where
    F: Fn(ExitRecord) -> (Option<f64>, bool) + Sync,
{
    cfg.validate()?;
    check_start(x0, lower, upper)?;
    let stepper = Stepper::new(gbm, x0, lower, upper, cfg);
    let n = cfg.n_paths;
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Moments::default();
            for p in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let rec = stepper.run(&mut cfg.path_rng(p as u64));
                let (value, censored) = score(rec);
                if censored {
                    acc.censored += 1;
                }
                if let Some(v) = value {
                    acc.push(v);
                }
            }
            acc
        })
        .collect();
    let total = partial.into_iter().fold(Moments::default(), Moments::merge);
    let std_error = if total.n > 1 {
        (total.m2 / (total.n - 1) as f64).sqrt() / (total.n as f64).sqrt()
    } else {
        0.0
    };
    Ok(MCEstimate {
        mean: if total.n > 0 { total.mean } else { f64::NAN },
        std_error,
        n_paths: n,
        n_used: total.n,
        n_censored: total.censored,
    })
}

/// Fraction of absorbed paths that reach `U` before `L`. Censored paths are
/// counted and left out of the ratio.
pub fn estimate_hit_probability(
    gbm: &GbmCoefficients,
    x0: f64,
    lower: f64,
    upper: f64,
    cfg: &SimConfig,
) -> Result<MCEstimate> {
    if !(lower > 0.0 && upper.is_finite()) {
        return Err(Error::InvalidBarriers("hit probability needs two finite barriers".into()));
    }
    run_paths(gbm, x0, lower, upper, cfg, |rec| match rec {
        ExitRecord::Upper(_) => (Some(1.0), false),
        ExitRecord::Lower(_) => (Some(0.0), false),
        ExitRecord::Censored => (None, true),
    })
}

fn one_sided(barrier: f64, side: Side) -> (f64, f64) {
    match side {
        Side::Lower => (barrier, f64::INFINITY),
        Side::Upper => (0.0, barrier),
    }
}

/// Mean first-passage time to a single barrier over absorbed paths; a lower
/// bound on the true mean when paths are censored.
pub fn estimate_expected_exit_time(
    gbm: &GbmCoefficients,
    x0: f64,
    barrier: f64,
    side: Side,
    cfg: &SimConfig,
) -> Result<MCEstimate> {
    let (lower, upper) = one_sided(barrier, side);
    run_paths(gbm, x0, lower, upper, cfg, |rec| match rec.time() {
        Some(t) => (Some(t), false),
        None => (None, true),
    })
}

/// Mean of `e^{−ρτ}` over all paths; censored paths contribute
/// `e^{−ρ·horizon}`.
pub fn estimate_discounted_reward(
    gbm: &GbmCoefficients,
    x0: f64,
    barrier: f64,
    side: Side,
    rho: f64,
    cfg: &SimConfig,
) -> Result<MCEstimate> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("discount rate must be positive, got {rho}")));
    }
    let (lower, upper) = one_sided(barrier, side);
    let tail = (-rho * cfg.horizon).exp();
    run_paths(gbm, x0, lower, upper, cfg, |rec| match rec.time() {
        Some(t) => (Some((-rho * t).exp()), false),
        None => (Some(tail), true),
    })
}

/// Probability that `ln X`, a Brownian motion with drift `m` and volatility
/// `s`, reaches `ln U` before `ln L`.
pub fn analytic_two_barrier_probability(m: f64, s: f64, x0: f64, lower: f64, upper: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::DegenerateVolatility(format!("log-volatility must be positive, got {s}")));
    }
    if !(lower > 0.0 && upper > lower && upper.is_finite() && x0 >= lower && x0 <= upper) {
        return Err(Error::InvalidBarriers(format!(
            "need 0 < L <= x0 <= U < inf, got L = {lower}, x0 = {x0}, U = {upper}"
        )));
    }
    let dist = (x0 / lower).ln();
    let width = (upper / lower).ln();
    let theta = -2.0 * m / (s * s);
    if theta == 0.0 {
        return Ok(dist / width);
    }
    // Scale-function ratio written so that no exponential can overflow.
    let p = if theta > 0.0 {
        (-theta * (width - dist)).exp() * (-theta * dist).exp_m1() / (-theta * width).exp_m1()
    } else {
        (theta * dist).exp_m1() / (theta * width).exp_m1()
    };
    Ok(p.clamp(0.0, 1.0))
}

/// Expected first-passage time `|ln(x0/b)|/|m|` of a drifted Brownian motion
/// moving toward the barrier.
pub fn analytic_expected_exit_time(m: f64, x0: f64, barrier: f64, side: Side) -> Result<f64> {
    if !(x0 > 0.0 && barrier > 0.0 && x0.is_finite() && barrier.is_finite()) {
        return Err(Error::InvalidBarriers(format!("need positive x0 and barrier, got {x0}, {barrier}")));
    }
    let toward = match side {
        Side::Lower => x0 >= barrier && m < 0.0,
        Side::Upper => x0 <= barrier && m > 0.0,
    };
    if x0 == barrier {
        return Ok(0.0);
    }
    if !toward {
        return Err(Error::WrongDriftDirection(format!(
            "drift {m} does not carry x0 = {x0} to the {side:?} barrier {barrier}"
        )));
    }
    Ok((x0 / barrier).ln().abs() / m.abs())
}

/// `E[e^{−ρτ}]` for the first passage of `ln X` to a single barrier.
pub fn analytic_laplace_hitting(m: f64, s: f64, x0: f64, barrier: f64, side: Side, rho: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::DegenerateVolatility(format!("log-volatility must be positive, got {s}")));
    }
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!("discount rate must be positive, got {rho}")));
    }
    let on_side = match side {
        Side::Lower => x0 >= barrier,
        Side::Upper => x0 <= barrier,
    };
    if !(x0 > 0.0 && barrier > 0.0 && on_side) {
        return Err(Error::InvalidBarriers(format!("x0 = {x0} on the wrong side of {barrier}")));
    }
    // Drift measured toward the barrier.
    let toward = match side {
        Side::Lower => -m,
        Side::Upper => m,
    };
    let root = (toward * toward + 2.0 * s * s * rho).sqrt();
    let eta = if toward >= 0.0 {
        2.0 * rho / (toward + root)
    } else {
        (root - toward) / (s * s)
    };
    Ok((-eta * (x0 / barrier).ln().abs()).exp())
}

/// Outcome of simulating a strategy in the real and a fictitious market on
/// common noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    /// `X_ν ≥ X·(1 − 1e-9)` at every grid point of every path.
    pub dominated: bool,
    /// `|X_ν/X − 1| ≤ 1e-9` everywhere.
    pub identical: bool,
    /// `δ(ν) + w'ν`, the growth-rate gap the dominance comes from.
    pub slack: f64,
    /// Smallest and largest `ln(X_ν/X)` seen.
    pub min_log_ratio: f64,
    pub max_log_ratio: f64,
}

/// Check `X_ν(t) ≥ X(t)` pathwise for a constant admissible strategy.
pub fn pathwise_dominance_check(
    dm: &DerivedMarket,
    nu: FictitiousParam,
    w: &[f64],
    cfg: &SimConfig,
) -> Result<DominanceReport> {
    cfg.validate()?;
    let budget: f64 = w.iter().sum();
    if budget > 1.0 + 1e-12 {
        return Err(Error::ConstraintViolation(budget));
    }
    let wv = nalgebra::DVector::from_column_slice(w);
    let real = wealth_coefficients(dm, FictitiousParam::ZERO, &wv)?;
    let fict = wealth_coefficients(dm, nu, &wv)?;
    let steps = cfg.steps();
    let sqrt_dt = cfg.dt.sqrt();
    let tol_low = (1.0 - 1e-9f64).ln();
    let tol_eq = 1e-9;

    let per_chunk: Vec<(f64, f64)> = (0..cfg.n_paths.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for p in c * CHUNK..((c + 1) * CHUNK).min(cfg.n_paths) {
                let mut rng = cfg.path_rng(p as u64);
                let mut noise = 0.0;
                for i in 1..=steps {
                    let t = i as f64 * cfg.dt;
                    let z: f64 = rng.sample(StandardNormal);
                    noise += z;
                    let shock = sqrt_dt * noise;
                    let y_real = real.log_drift * t + real.log_vol * shock;
                    let y_fict = fict.log_drift * t + fict.log_vol * shock;
                    let gap = y_fict - y_real;
                    lo = lo.min(gap);
                    hi = hi.max(gap);
                }
            }
            (lo, hi)
        })
        .collect();
    let (lo, hi) = per_chunk
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (c, d)| (a.min(c), b.max(d)));
    Ok(DominanceReport {
        dominated: lo >= tol_low,
        identical: lo.exp_m1().abs() <= tol_eq && hi.exp_m1().abs() <= tol_eq,
        slack: complementarity_gap(nu, w),
        min_log_ratio: lo,
        max_log_ratio: hi,
    })
}
