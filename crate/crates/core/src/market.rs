//! Market inputs and the derived quantities every solver consumes.
//!
//! A market is `N` risky assets with constant drifts `mu` and volatility
//! matrix `sigma`, a bank account paying `r`, and a proportional net cash
//! flow `c_net < 0` charged against wealth. All rates are annualised
//! decimals; time is measured in years.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Largest accepted condition number of the volatility matrix.
pub const CONDITION_GUARD: f64 = 1e12;

/// Raw market configuration, as read from a market JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSpec {
    pub r: f64,
    pub c_net: f64,
    pub mu: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
}

impl MarketSpec {
    /// Single-asset market.
    pub fn single(r: f64, c_net: f64, mu: f64, sigma: f64) -> Self {
        Self {
            r,
            c_net,
            mu: vec![mu],
            sigma: vec![vec![sigma]],
        }
    }

    pub fn asset_count(&self) -> usize {
        self.mu.len()
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Validated market with all derived quantities precomputed.
///
/// Symbols used in the documentation: `Σ = σσ'`, `ζ = σ⁻¹(μ − r1)`,
/// `w_o = Σ⁻¹(μ − r1)`, `D = ζ'σ⁻¹1 = 1'w_o`, `K = 1'Σ⁻¹1` and `k = ‖ζ‖²/2`.
#[derive(Debug, Clone)]
pub struct DerivedMarket {
    spec: MarketSpec,
    sigma: DMatrix<f64>,
    covariance: DMatrix<f64>,
    covariance_inv: DMatrix<f64>,
    excess: DVector<f64>,
    zeta: DVector<f64>,
    log_optimal: DVector<f64>,
    log_optimal_alt: DVector<f64>,
    sigma_inv_ones: DVector<f64>,
    covariance_inv_ones: DVector<f64>,
    exposure: f64,
    precision: f64,
    half_sharpe_sq: f64,
    sharpe_perp_sq: f64,
    condition: f64,
}

impl DerivedMarket {
    pub fn new(spec: MarketSpec) -> Result<Self> {
        let n = spec.mu.len();
        if n == 0 {
            return Err(Error::DimensionMismatch("market needs at least one asset".into()));
        }
        if spec.sigma.len() != n || spec.sigma.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "sigma must be {n}x{n} to match mu of length {n}"
            )));
        }
        let finite = spec.r.is_finite()
            && spec.c_net.is_finite()
            && spec.mu.iter().all(|v| v.is_finite())
            && spec.sigma.iter().flatten().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("market inputs must be finite".into()));
        }
        if spec.c_net >= 0.0 {
            return Err(Error::InvalidCashFlow(spec.c_net));
        }

        let sigma = DMatrix::from_fn(n, n, |i, j| spec.sigma[i][j]);
        let condition = linalg::condition_number(&sigma);
        if !(condition.is_finite() && condition <= CONDITION_GUARD) {
            return Err(Error::SingularVolatility(condition));
        }

        let covariance = &sigma * sigma.transpose();
        let chol = linalg::spd_factor(&covariance).ok_or(Error::SingularVolatility(condition))?;
        let covariance_inv = chol.inverse();

        let ones = DVector::from_element(n, 1.0);
        let excess = DVector::from_iterator(n, spec.mu.iter().map(|m| m - spec.r));
        let lu = sigma.clone().lu();
        let zeta = lu.solve(&excess).ok_or(Error::SingularVolatility(condition))?;
        let sigma_inv_ones = lu.solve(&ones).ok_or(Error::SingularVolatility(condition))?;
        let log_optimal = chol.solve(&excess);
        let covariance_inv_ones = chol.solve(&ones);
        let log_optimal_alt = sigma
            .transpose()
            .lu()
            .solve(&zeta)
            .ok_or(Error::SingularVolatility(condition))?;

        let exposure = zeta.dot(&sigma_inv_ones);
        let precision = ones.dot(&covariance_inv_ones);
        let sharpe_sq = zeta.norm_squared();
        // Component of ζ orthogonal to σ⁻¹1; exactly zero for one asset.
        let perp = &zeta - &sigma_inv_ones * (exposure / precision);
        let mut sharpe_perp_sq = perp.norm_squared();
        if sharpe_perp_sq <= 64.0 * f64::EPSILON * sharpe_sq {
            sharpe_perp_sq = 0.0;
        }

        Ok(Self {
            spec,
            sigma,
            covariance,
            covariance_inv,
            excess,
            zeta,
            log_optimal,
            log_optimal_alt,
            sigma_inv_ones,
            covariance_inv_ones,
            exposure,
            precision,
            half_sharpe_sq: 0.5 * sharpe_sq,
            sharpe_perp_sq,
            condition,
        })
    }

    pub fn spec(&self) -> &MarketSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.mu.len()
    }

    pub fn r(&self) -> f64 {
        self.spec.r
    }

    pub fn c_net(&self) -> f64 {
        self.spec.c_net
    }

    /// `r + c_net`, the wealth growth rate of a riskless position.
    pub fn riskless_growth(&self) -> f64 {
        self.spec.r + self.spec.c_net
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// `Σ = σσ'`.
    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// `Σ⁻¹`, obtained from the Cholesky factor of `Σ`.
    pub fn covariance_inv(&self) -> &DMatrix<f64> {
        &self.covariance_inv
    }

    /// `μ − r1`.
    pub fn excess_return(&self) -> &DVector<f64> {
        &self.excess
    }

    /// Market price of risk `ζ`.
    pub fn zeta(&self) -> &DVector<f64> {
        &self.zeta
    }

    /// Log-optimal weights `w_o = Σ⁻¹(μ − r1)`.
    pub fn log_optimal(&self) -> &DVector<f64> {
        &self.log_optimal
    }

    /// The same weights computed as `σ'⁻¹ζ`, kept for consistency checks.
    pub fn log_optimal_alt(&self) -> &DVector<f64> {
        &self.log_optimal_alt
    }

    /// `σ⁻¹1`.
    pub fn sigma_inv_ones(&self) -> &DVector<f64> {
        &self.sigma_inv_ones
    }

    /// `Σ⁻¹1`, the weight shift produced by a unit fictitious parameter.
    pub fn covariance_inv_ones(&self) -> &DVector<f64> {
        &self.covariance_inv_ones
    }

    /// `D = ζ'σ⁻¹1`, the total log-optimal exposure to risky assets.
    pub fn exposure(&self) -> f64 {
        self.exposure
    }

    /// `K = 1'Σ⁻¹1`.
    pub fn precision(&self) -> f64 {
        self.precision
    }

    /// `k = ‖ζ‖²/2`.
    pub fn half_sharpe_sq(&self) -> f64 {
        self.half_sharpe_sq
    }

    pub fn sharpe_sq(&self) -> f64 {
        2.0 * self.half_sharpe_sq
    }

    /// `‖ζ‖² − D²/K`: squared norm of the part of `ζ` orthogonal to `σ⁻¹1`.
    ///
    /// Zero whenever `N = 1` or the log-optimal portfolio is proportional to
    /// `Σ⁻¹1`. When it is positive the budget-constrained branches of the
    /// solvers pick up an extra term.
    pub fn sharpe_perp_sq(&self) -> f64 {
        self.sharpe_perp_sq
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }
}

/// Validate market inputs and compute their derived quantities.
pub fn build_derived(spec: MarketSpec) -> Result<DerivedMarket> {
    DerivedMarket::new(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn market_a() -> MarketSpec {
        MarketSpec::single(0.02, -0.05, 0.12, 0.25)
    }

    #[test]
    fn market_a_scalars() {
        let dm = build_derived(market_a()).unwrap();
        assert_relative_eq!(dm.covariance()[(0, 0)], 0.0625, max_relative = 1e-14);
        assert_relative_eq!(dm.zeta()[0], 0.4, max_relative = 1e-14);
        assert_relative_eq!(dm.log_optimal()[0], 1.6, max_relative = 1e-14);
        assert_relative_eq!(dm.exposure(), 1.6, max_relative = 1e-14);
        assert_relative_eq!(dm.precision(), 16.0, max_relative = 1e-14);
        assert_relative_eq!(dm.half_sharpe_sq(), 0.08, max_relative = 1e-14);
        assert_eq!(dm.sharpe_perp_sq(), 0.0);
    }

    #[test]
    fn market_b_scalars() {
        let dm = build_derived(MarketSpec::single(0.02, -0.05, 0.06, 0.25)).unwrap();
        assert_relative_eq!(dm.zeta()[0], 0.16, max_relative = 1e-14);
        assert_relative_eq!(dm.log_optimal()[0], 0.64, max_relative = 1e-14);
        assert_relative_eq!(dm.exposure(), 0.64, max_relative = 1e-14);
        assert_relative_eq!(dm.precision(), 16.0, max_relative = 1e-14);
        assert_relative_eq!(dm.half_sharpe_sq(), 0.0128, max_relative = 1e-13);
    }

    #[test]
    fn zero_excess_return() {
        let spec = MarketSpec {
            r: 0.02,
            c_net: -0.03,
            mu: vec![0.02, 0.02],
            sigma: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        };
        let dm = build_derived(spec).unwrap();
        assert!(dm.zeta().iter().all(|z| *z == 0.0));
        assert!(dm.log_optimal().iter().all(|w| *w == 0.0));
        assert_eq!(dm.exposure(), 0.0);
        assert_eq!(dm.precision(), 2.0);
        assert_eq!(dm.half_sharpe_sq(), 0.0);
    }

    #[test]
    fn rejects_nonnegative_cash_flow() {
        let mut spec = market_a();
        spec.c_net = 0.0;
        assert_eq!(build_derived(spec).unwrap_err(), Error::InvalidCashFlow(0.0));
        let mut spec = market_a();
        spec.c_net = 0.01;
        assert!(matches!(build_derived(spec), Err(Error::InvalidCashFlow(_))));
    }

    #[test]
    fn rejects_singular_sigma() {
        let spec = MarketSpec {
            r: 0.02,
            c_net: -0.05,
            mu: vec![0.1, 0.1],
            sigma: vec![vec![0.2, 0.1], vec![0.4, 0.2]],
        };
        assert!(matches!(build_derived(spec), Err(Error::SingularVolatility(_))));
    }

    #[test]
    fn rejects_ill_conditioned_sigma() {
        let spec = MarketSpec {
            r: 0.02,
            c_net: -0.05,
            mu: vec![0.1, 0.1],
            sigma: vec![vec![1.0, 0.0], vec![0.0, 1e-13]],
        };
        assert!(matches!(build_derived(spec), Err(Error::SingularVolatility(_))));
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let spec = MarketSpec {
            r: 0.02,
            c_net: -0.05,
            mu: vec![0.1, 0.1],
            sigma: vec![vec![0.2, 0.0]],
        };
        assert!(matches!(build_derived(spec), Err(Error::DimensionMismatch(_))));
        let empty = MarketSpec { r: 0.02, c_net: -0.05, mu: vec![], sigma: vec![] };
        assert!(matches!(build_derived(empty), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn json_is_strict() {
        let ok = r#"{"r":0.02,"c_net":-0.05,"mu":[0.12],"sigma":[[0.25]]}"#;
        assert_eq!(MarketSpec::from_json(ok).unwrap(), market_a());
        let extra = r#"{"r":0.02,"c_net":-0.05,"mu":[0.12],"sigma":[[0.25]],"rho":1}"#;
        assert!(MarketSpec::from_json(extra).is_err());
        let missing = r#"{"r":0.02,"mu":[0.12],"sigma":[[0.25]]}"#;
        assert!(MarketSpec::from_json(missing).is_err());
    }
}
