//! The fictitious market used to handle the no-borrowing constraint.
//!
//! The constraint set is `{w : 1'w ≤ 1}`. Its support function is finite only
//! on the cone of vectors `ν = ν₁·1` with `ν₁ ≤ 0`, where it equals `−ν₁`. A
//! fictitious market indexed by `ν₁` has riskless rate `r + δ(ν)` and drifts
//! `μ + ν + δ(ν)1`, and is unconstrained. Every solver works in this market and
//! then picks the `ν₁` for which the unconstrained optimum is feasible and the
//! complementarity condition `δ(ν) + w'ν = 0` holds.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::DerivedMarket;

/// Common component `ν₁` of a cone member `ν = ν₁·1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FictitiousParam(f64);

impl FictitiousParam {
    pub const ZERO: Self = Self(0.0);

    pub fn new(nu1: f64) -> Result<Self> {
        if nu1.is_nan() || nu1 > 0.0 {
            return Err(Error::ConeViolation(nu1));
        }
        // Normalise -0.0 so serialised output is stable.
        Ok(Self(if nu1 == 0.0 { 0.0 } else { nu1 }))
    }

    pub fn nu1(self) -> f64 {
        self.0
    }

    /// Support function `δ(ν) = −ν₁`.
    pub fn support(self) -> f64 {
        -self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }

    /// The full vector `ν₁·1` of length `n`.
    pub fn to_vector(self, n: usize) -> DVector<f64> {
        DVector::from_element(n, self.0)
    }
}

impl TryFrom<f64> for FictitiousParam {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FictitiousParam> for f64 {
    fn from(p: FictitiousParam) -> f64 {
        p.0
    }
}

/// Whether a solver's optimum sits inside the budget constraint or on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Unconstrained optimum already satisfies `1'w < 1`; `ν* = 0`.
    Unconstrained,
    /// Optimum on the hyperplane `1'w = 1` with `ν₁* < 0`.
    Constrained,
}

/// Complementary slackness gap `δ(ν) + w'ν`; zero at every optimum.
pub fn complementarity_gap(nu: FictitiousParam, w: &[f64]) -> f64 {
    nu.support() + nu.nu1() * w.iter().sum::<f64>()
}

/// Turn a raw optimal `ν₁` into a cone member, absorbing round-off of a few
/// ulps on the wrong side of zero.
pub(crate) fn cone_point(nu1: f64, scale: f64) -> Result<FictitiousParam> {
    if nu1 > 0.0 && nu1 <= 1e-13 * scale.abs().max(1.0) {
        return Ok(FictitiousParam::ZERO);
    }
    FictitiousParam::new(nu1)
}

/// Support function evaluated on a raw `ν₁`.
pub fn support_delta(nu1: f64) -> Result<f64> {
    FictitiousParam::new(nu1).map(FictitiousParam::support)
}

/// Coefficients of `ln X` for a constant-proportion wealth process:
/// `d ln X = log_drift dt + vol_vector' dB`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbmCoefficients {
    pub log_drift: f64,
    pub log_vol: f64,
    pub vol_vector: Vec<f64>,
}

impl GbmCoefficients {
    pub fn new(log_drift: f64, vol_vector: Vec<f64>) -> Self {
        let log_vol = vol_vector.iter().map(|v| v * v).sum::<f64>().sqrt();
        Self { log_drift, log_vol, vol_vector }
    }

    /// One-dimensional process with scalar volatility.
    pub fn scalar(log_drift: f64, log_vol: f64) -> Self {
        Self::new(log_drift, vec![log_vol.abs()])
    }
}

/// `ζ_ν = ζ + ν₁σ⁻¹1`.
pub fn shifted_price_of_risk(dm: &DerivedMarket, nu: FictitiousParam) -> DVector<f64> {
    dm.zeta() + dm.sigma_inv_ones() * nu.nu1()
}

fn check_len(dm: &DerivedMarket, w: &DVector<f64>) -> Result<()> {
    if w.len() != dm.n() {
        return Err(Error::DimensionMismatch(format!(
            "strategy has {} components, market has {} assets",
            w.len(),
            dm.n()
        )));
    }
    Ok(())
}

/// Linear drift coefficient of `dX/X` in the fictitious market:
/// `r + δ(ν) + c_net + w'(μ + ν − r1)`.
fn linear_drift(dm: &DerivedMarket, nu: FictitiousParam, w: &DVector<f64>) -> f64 {
    let tilt: f64 = w.sum() * nu.nu1();
    dm.riskless_growth() + nu.support() + w.dot(dm.excess_return()) + tilt
}

fn quadratic_form(dm: &DerivedMarket, w: &DVector<f64>) -> f64 {
    w.dot(&(dm.covariance() * w))
}

/// Log-drift and volatility of the wealth obtained by holding the constant
/// proportions `w` in the fictitious market `nu`.
pub fn wealth_coefficients(
    dm: &DerivedMarket,
    nu: FictitiousParam,
    w: &DVector<f64>,
) -> Result<GbmCoefficients> {
    check_len(dm, w)?;
    let drift = linear_drift(dm, nu, w) - 0.5 * quadratic_form(dm, w);
    let vol = dm.sigma().transpose() * w;
    Ok(GbmCoefficients::new(drift, vol.iter().copied().collect()))
}

/// Market favourability `β_ν = r + c_net + δ(ν) + ½‖ζ_ν‖²`, the log-drift of
/// the log-optimal wealth in the fictitious market.
pub fn favourability(dm: &DerivedMarket, nu: FictitiousParam) -> f64 {
    let zeta_nu = shifted_price_of_risk(dm, nu);
    dm.riskless_growth() + nu.support() + 0.5 * zeta_nu.norm_squared()
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Probability that log-optimal wealth started at `x` sits at or below `lower`
/// at time `t`.
pub fn ruin_curve(beta: f64, zeta_norm: f64, x: f64, lower: f64, t: f64) -> Result<f64> {
    if !(lower > 0.0 && x >= lower) {
        return Err(Error::DomainViolation(format!("need x >= L > 0, got x = {x}, L = {lower}")));
    }
    if !(t > 0.0) {
        return Err(Error::DomainViolation(format!("need t > 0, got {t}")));
    }
    if !(zeta_norm > 0.0) {
        return Err(Error::DegenerateVolatility("price of risk has zero norm".into()));
    }
    Ok(normal_cdf(((lower / x).ln() - beta * t) / (zeta_norm * t.sqrt())))
}

/// A twice-differentiable scalar function with analytic derivatives.
pub trait ValueFunction {
    fn value(&self, x: f64) -> f64;
    fn first(&self, x: f64) -> f64;
    fn second(&self, x: f64) -> f64;
    /// Open interval on which the derivatives are defined.
    fn interior(&self) -> (f64, f64);
}

/// [`ValueFunction`] assembled from closures.
pub struct ClosureValue<F, G, H> {
    pub value: F,
    pub first: G,
    pub second: H,
    pub interior: (f64, f64),
}

impl<F, G, H> ValueFunction for ClosureValue<F, G, H>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
    H: Fn(f64) -> f64,
{
    fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }
    fn first(&self, x: f64) -> f64 {
        (self.first)(x)
    }
    fn second(&self, x: f64) -> f64 {
        (self.second)(x)
    }
    fn interior(&self) -> (f64, f64) {
        self.interior
    }
}

/// Generator of the fictitious-market wealth process applied to `f` at `x`
/// for the constant control `w`.
pub fn generator_apply<V: ValueFunction + ?Sized>(
    dm: &DerivedMarket,
    nu: FictitiousParam,
    w: &DVector<f64>,
    f: &V,
    x: f64,
) -> Result<f64> {
    check_len(dm, w)?;
    let (lo, hi) = f.interior();
    if !(x > lo && x < hi) {
        return Err(Error::DomainViolation(format!("x = {x} outside ({lo}, {hi})")));
    }
    let first = linear_drift(dm, nu, w) * x * f.first(x);
    let second = 0.5 * quadratic_form(dm, w) * x * x * f.second(x);
    Ok(first + second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{build_derived, MarketSpec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn market_a() -> DerivedMarket {
        build_derived(MarketSpec::single(0.02, -0.05, 0.12, 0.25)).unwrap()
    }

    fn market_b() -> DerivedMarket {
        build_derived(MarketSpec::single(0.02, -0.05, 0.06, 0.25)).unwrap()
    }

    fn nu(v: f64) -> FictitiousParam {
        FictitiousParam::new(v).unwrap()
    }

    #[test]
    fn support_function() {
        assert_eq!(support_delta(0.0).unwrap(), 0.0);
        assert_eq!(support_delta(-0.0375).unwrap(), 0.0375);
        assert_eq!(support_delta(0.01), Err(Error::ConeViolation(0.01)));
        assert!(serde_json::from_str::<FictitiousParam>("0.5").is_err());
    }

    #[test]
    fn shifted_price() {
        let dm = market_a();
        assert_eq!(shifted_price_of_risk(&dm, FictitiousParam::ZERO), *dm.zeta());
        assert_relative_eq!(shifted_price_of_risk(&dm, nu(-0.0375))[0], 0.25, max_relative = 1e-14);
        assert_relative_eq!(
            shifted_price_of_risk(&dm, nu(-0.0867931))[0],
            0.0528276,
            max_relative = 1e-12
        );
    }

    #[test]
    fn wealth_coefficient_fixtures() {
        let dm = market_a();
        let g = wealth_coefficients(&dm, nu(-0.0375), &DVector::from_element(1, 1.0)).unwrap();
        assert_relative_eq!(g.log_drift, 0.03875, max_relative = 1e-13);
        assert_relative_eq!(g.log_vol, 0.25, max_relative = 1e-14);

        let dm = market_b();
        let g = wealth_coefficients(&dm, FictitiousParam::ZERO, dm.log_optimal()).unwrap();
        assert_relative_eq!(g.log_drift, -0.0172, max_relative = 1e-12);
        assert_relative_eq!(g.log_vol, 0.16, max_relative = 1e-14);

        let g = wealth_coefficients(&dm, FictitiousParam::ZERO, &DVector::zeros(1)).unwrap();
        assert_eq!(g.log_drift, dm.riskless_growth());
        assert_eq!(g.log_vol, 0.0);

        assert!(matches!(
            wealth_coefficients(&dm, FictitiousParam::ZERO, &DVector::zeros(2)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn favourability_fixtures() {
        assert_relative_eq!(favourability(&market_b(), FictitiousParam::ZERO), -0.0172, max_relative = 1e-12);
        assert_relative_eq!(favourability(&market_a(), nu(-0.0375)), 0.03875, max_relative = 1e-13);
        let flat = build_derived(MarketSpec::single(0.02, -0.03, 0.02, 0.3)).unwrap();
        assert_relative_eq!(favourability(&flat, FictitiousParam::ZERO), -0.01, max_relative = 1e-14);
    }

    #[test]
    fn normal_cdf_reference_points() {
        // Values from a 50-digit evaluation of Φ.
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((normal_cdf(-1.96) - 0.024_997_895_148_220_43).abs() < 1e-15);
        assert!((normal_cdf(-8.0) - 6.220_960_574_271_785e-16).abs() < 1e-25);
        assert!((normal_cdf(0.821_584_307_432_397_2) - 0.794_343_238_239_271_4).abs() < 1e-12);
    }

    #[test]
    fn ruin_curve_fixtures() {
        assert_eq!(ruin_curve(0.0, 0.3, 1.0, 1.0, 4.0).unwrap(), 0.5);
        let p = ruin_curve(0.05, 0.2, 1.0, 1.0, 9.0).unwrap();
        assert_relative_eq!(p, normal_cdf(-0.05 * 3.0 / 0.2), max_relative = 1e-14);
        let p = ruin_curve(-0.0172, 0.16, 1.5, 1.0, 100.0).unwrap();
        assert!((p - 0.794_343_238_239_271_4).abs() < 1e-10);
        assert!(matches!(ruin_curve(-0.01, 0.0, 1.5, 1.0, 1.0), Err(Error::DegenerateVolatility(_))));
        assert!(matches!(ruin_curve(-0.01, 0.1, 0.5, 1.0, 1.0), Err(Error::DomainViolation(_))));
    }

    #[test]
    fn ruin_curve_tends_to_one_when_unfavourable() {
        let mut prev = 0.0;
        for t in [10.0, 100.0, 1_000.0, 10_000.0] {
            let p = ruin_curve(-0.0172, 0.16, 1.5, 1.0, t).unwrap();
            assert!(p >= prev);
            prev = p;
        }
        assert!(prev > 0.999_999);
    }

    #[test]
    fn generator_trivial_cases() {
        let dm = market_a();
        let constant = ClosureValue {
            value: |_| 3.0,
            first: |_| 0.0,
            second: |_| 0.0,
            interior: (0.0, f64::INFINITY),
        };
        let w = DVector::from_element(1, 0.7);
        assert_eq!(generator_apply(&dm, nu(-0.2), &w, &constant, 1.3).unwrap(), 0.0);

        let identity = ClosureValue {
            value: |x| x,
            first: |_| 1.0,
            second: |_| 0.0,
            interior: (0.0, f64::INFINITY),
        };
        let g = generator_apply(&dm, FictitiousParam::ZERO, &DVector::zeros(1), &identity, 2.0).unwrap();
        assert_relative_eq!(g, dm.riskless_growth() * 2.0, max_relative = 1e-15);
        assert!(matches!(
            generator_apply(&dm, FictitiousParam::ZERO, &w, &identity, -1.0),
            Err(Error::DomainViolation(_))
        ));
    }

    fn arb_market() -> impl Strategy<Value = DerivedMarket> {
        (1usize..=4)
            .prop_flat_map(|n| {
                (
                    prop::collection::vec(0.0f64..0.2, n),
                    prop::collection::vec(-0.1f64..0.1, n * n),
                    prop::collection::vec(0.1f64..0.5, n),
                    0.0f64..0.05,
                    -0.1f64..-0.001,
                )
            })
            .prop_map(|(mu, off, diag, r, c)| {
                let n = mu.len();
                let sigma = (0..n)
                    .map(|i| (0..n).map(|j| if i == j { diag[i] } else if j < i { off[i * n + j] } else { 0.0 }).collect())
                    .collect();
                build_derived(MarketSpec { r, c_net: c, mu, sigma }).unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn cone_duality(dm in arb_market(), raw in prop::collection::vec(-2.0f64..2.0, 4), nu1 in -3.0f64..0.0) {
            let n = dm.n();
            let mut w = DVector::from_iterator(n, raw.into_iter().take(n));
            if w.sum() > 1.0 {
                let shift = (w.sum() - 1.0) / n as f64;
                w.add_scalar_mut(-shift);
            }
            let p = nu(nu1);
            prop_assert!(p.support() + w.sum() * p.nu1() >= -1e-12);
        }

        #[test]
        fn favourability_is_log_optimal_drift(dm in arb_market(), nu1 in -1.0f64..0.0) {
            let p = nu(nu1);
            let zeta_nu = shifted_price_of_risk(&dm, p);
            let w = dm.sigma().transpose().lu().solve(&zeta_nu).unwrap();
            let g = wealth_coefficients(&dm, p, &w).unwrap();
            let beta = favourability(&dm, p);
            prop_assert!((g.log_drift - beta).abs() <= 1e-12 * beta.abs().max(1.0));
            prop_assert!((g.log_vol - zeta_nu.norm()).abs() <= 1e-12 * zeta_nu.norm().max(1.0));
        }

        #[test]
        fn market_identities(dm in arb_market()) {
            let n = dm.n();
            let prod = dm.covariance() * dm.covariance_inv();
            let err = (prod - nalgebra::DMatrix::<f64>::identity(n, n)).abs().max();
            prop_assert!(err <= 1e-10);
            let d = dm.exposure();
            prop_assert!((d - dm.log_optimal().sum()).abs() <= 1e-12 * d.abs().max(1.0));
            let k = dm.precision();
            prop_assert!((k - dm.sigma_inv_ones().norm_squared()).abs() <= 1e-12 * k);
            let alt_err = (dm.log_optimal() - dm.log_optimal_alt()).abs().max();
            prop_assert!(alt_err <= 1e-12 * dm.log_optimal().abs().max().max(1.0));
        }

        #[test]
        fn ruin_curve_monotone_when_unfavourable(beta in -0.2f64..-1e-4, s in 0.05f64..0.5, gap in 0.01f64..2.0) {
            let mut prev = 0.0;
            for i in 1..40 {
                let t = 0.5 * i as f64;
                let p = ruin_curve(beta, s, gap.exp(), 1.0, t).unwrap();
                prop_assert!(p >= prev - 1e-15);
                prev = p;
            }
        }
    }
}
