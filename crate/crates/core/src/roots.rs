//! Scalar root finding: a cancellation-free quadratic solver and a bracketing
//! fallback for the higher-order characteristic equations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real roots of `a2·d² + a1·d + a0 = 0`, sorted so that `lower <= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticRoots {
    pub lower: f64,
    pub upper: f64,
    /// `a1² − 4·a2·a0`; zero when the equation is linear.
    pub discriminant: f64,
    /// Set when `a2 = 0`; both slots then hold the single linear root.
    pub linear: bool,
}

/// Solve `a2·d² + a1·d + a0 = 0`.
///
/// The root of larger magnitude is computed first and the other one is taken
/// from the product of the roots, so neither suffers from subtracting nearly
/// equal quantities.
pub fn quadratic_roots(a2: f64, a1: f64, a0: f64) -> Result<QuadraticRoots> {
    if !(a2.is_finite() && a1.is_finite() && a0.is_finite()) {
        return Err(Error::DegenerateEquation("non-finite coefficient".into()));
    }
    if a2 == 0.0 {
        if a1 == 0.0 {
            return Err(Error::DegenerateEquation("both a2 and a1 vanish".into()));
        }
        let root = -a0 / a1;
        return Ok(QuadraticRoots { lower: root, upper: root, discriminant: 0.0, linear: true });
    }
    let discriminant = a1.mul_add(a1, -4.0 * a2 * a0);
    if discriminant < 0.0 {
        return Err(Error::NoRealRoots(discriminant));
    }
    let q = -0.5 * (a1 + a1.signum() * discriminant.sqrt());
    let (r1, r2) = if q == 0.0 {
        // a1 = 0 and a0 = 0: double root at zero.
        (0.0, 0.0)
    } else {
        (q / a2, a0 / q)
    };
    Ok(QuadraticRoots {
        lower: r1.min(r2),
        upper: r1.max(r2),
        discriminant,
        linear: false,
    })
}

/// Root of `f` inside `[lo, hi]`, given that `f(lo)` and `f(hi)` have opposite
/// signs. Bisection to machine resolution.
pub(crate) fn bracketed_root<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_quadratics() {
        // Frozen from an independent evaluation of the textbook formula in
        // extended precision.
        let q = quadratic_roots(-0.03, 0.1, 0.05).unwrap();
        assert!((q.lower - -0.441_518_440_112_252_9).abs() < 1e-14);
        assert!((q.upper - 3.774_851_773_445_586).abs() < 1e-13);

        let q = quadratic_roots(1.0, -1.24, -1.6).unwrap();
        assert!((q.lower - -0.788_687_332_235_226_8).abs() < 1e-14);
        assert!((q.upper - 2.028_687_332_235_226_6).abs() < 1e-14);

        let q = quadratic_roots(1.0, 0.0, -1.0).unwrap();
        assert_eq!((q.lower, q.upper), (-1.0, 1.0));
    }

    #[test]
    fn degenerate_and_complex_cases() {
        let q = quadratic_roots(0.0, 2.0, -1.0).unwrap();
        assert!(q.linear);
        assert_eq!((q.lower, q.upper), (0.5, 0.5));
        assert!(matches!(quadratic_roots(0.0, 0.0, 1.0), Err(Error::DegenerateEquation(_))));
        assert!(matches!(quadratic_roots(1.0, 0.0, 1.0), Err(Error::NoRealRoots(_))));
        let q = quadratic_roots(1.0, 0.0, 0.0).unwrap();
        assert_eq!((q.lower, q.upper), (0.0, 0.0));
    }

    #[test]
    fn small_root_keeps_precision() {
        // d² − 1e8·d + 1 = 0 has a root at 1e-8 that the naive formula loses.
        let q = quadratic_roots(1.0, -1e8, 1.0).unwrap();
        assert!((q.lower - 1e-8).abs() < 1e-22);
    }

    #[test]
    fn bisection_finds_cubic_root() {
        let root = bracketed_root(|x| x * x * x - 2.0, 0.0, 2.0).unwrap();
        assert!((root - 2f64.cbrt()).abs() < 1e-15);
        assert!(bracketed_root(|x| x * x + 1.0, -1.0, 1.0).is_none());
    }

    proptest! {
        #[test]
        fn roots_satisfy_their_equation(a2 in -2.0f64..2.0, r1 in -10.0f64..10.0, r2 in -10.0f64..10.0) {
            prop_assume!(a2.abs() > 1e-3 && (r1 - r2).abs() > 1e-3);
            let a1 = -a2 * (r1 + r2);
            let a0 = a2 * r1 * r2;
            let q = quadratic_roots(a2, a1, a0).unwrap();
            prop_assert!(q.lower <= q.upper);
            for d in [q.lower, q.upper] {
                let scale = a2.abs() * d * d + a1.abs() * d.abs() + a0.abs();
                let res = (a2 * d * d + a1 * d + a0).abs();
                prop_assert!(res <= 1e-12 * scale.max(1e-300));
            }
        }
    }
}
