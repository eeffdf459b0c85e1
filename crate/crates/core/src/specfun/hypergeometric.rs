//! Gauss hypergeometric function on the negative real axis.
//!
//! Coverage formulas only ever need `2F1(1, b; b + 1; -y)` with
//! `b = 1 - 2/alpha`, evaluated at `y` ranging over many orders of
//! magnitude. That family gets a dedicated evaluator; [`hyp2f1`] covers the
//! general real case for `z <= 0.5` and exists mostly for identity checks.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const MAX_TERMS: usize = 5_000_000;

/// Sums a hypergeometric-type series whose term ratio is `ratio(n)`, i.e.
/// `t_{n+1} = t_n * ratio(n)` with `t_0 = 1`.
///
/// Stops once the geometric bound on the remaining tail drops below machine
/// precision relative to the partial sum.
fn sum_series(mut ratio: impl FnMut(usize) -> f64) -> Result<f64> {
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for n in 0..MAX_TERMS {
        let r = ratio(n);
        term *= r;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        let rho = r.abs();
        // the ratio tends to |z| from either side; bound the tail once it is
        // safely below one
        if n > 2 && rho < 1.0 {
            let tail = term.abs() * rho / (1.0 - rho);
            if tail <= 1e-17 * sum.abs() {
                return Ok(sum);
            }
        }
    }
    Err(Error::SeriesNonConvergence { terms: MAX_TERMS })
}

fn is_nonpositive_integer(c: f64) -> bool {
    c <= 0.0 && c.fract() == 0.0
}

/// Real `2F1(a, b; c; z)` for `z <= 0.5`.
///
/// Uses the Gauss series when `|z| <= 0.5` and the Pfaff transformation
/// `2F1(a,b;c;z) = (1-z)^{-a} 2F1(a, c-b; c; z/(z-1))` below `-0.5`, which
/// maps the argument into `[1/3, 1)`. Convergence slows as `z -> -inf`;
/// beyond a few million terms a [`Error::SeriesNonConvergence`] is returned.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && z.is_finite()) {
        return Err(Error::Domain("2F1 parameters must be finite".into()));
    }
    if is_nonpositive_integer(c) {
        return Err(Error::Domain(format!("2F1 undefined for c = {c}")));
    }
    if z > 0.5 {
        return Err(Error::Domain(format!("2F1 evaluator supports z <= 0.5, got {z}")));
    }
    if z >= -0.5 {
        return gauss_series(a, b, c, z);
    }
    let w = z / (z - 1.0);
    Ok((1.0 - z).powf(-a) * gauss_series(a, c - b, c, w)?)
}

fn gauss_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if z == 0.0 {
        return Ok(1.0);
    }
    sum_series(|n| {
        let n = n as f64;
        (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
    })
}

/// `2F1(1, 1 - 2/alpha; 2 - 2/alpha; -y)`, the kernel of the interference
/// Laplace transform.
///
/// Three regimes, each converging at least geometrically with ratio 2/3:
/// * `y < 0.5`: Gauss series, which for this family is `b * sum (-y)^n / (b + n)`;
/// * `0.5 <= y <= 2`: Pfaff transform to `(1+y)^{-1} 2F1(1, 1; c; y/(1+y))`;
/// * `y > 2`: the `1/z` connection formula. With `a - b = 2/alpha` non-integral
///   it reduces to
///   `pi b / sin(pi b) * y^{-b} + (1 - alpha/2) / y * 2F1(1, 2/alpha; 1 + 2/alpha; -1/y)`.
pub fn hyp2f1_coverage(alpha: f64, y: f64) -> Result<f64> {
    if !(alpha > 2.0) || !alpha.is_finite() {
        return Err(Error::UnsupportedExponent(alpha));
    }
    if !(y >= 0.0) {
        return Err(Error::Domain(format!("hyp2f1_coverage requires y >= 0, got {y}")));
    }
    let b = 1.0 - 2.0 / alpha;
    if y == 0.0 {
        return Ok(1.0);
    }
    if y.is_infinite() {
        return Ok(0.0);
    }
    if y < 0.5 {
        return unit_shift_series(b, -y);
    }
    if y <= 2.0 {
        let c = b + 1.0;
        let w = y / (1.0 + y);
        let tail = sum_series(|n| {
            let n = n as f64;
            (1.0 + n) * w / (c + n)
        })?;
        return Ok(tail / (1.0 + y));
    }
    let reflected = unit_shift_series(1.0 - b, -1.0 / y)?;
    let leading = PI * b / (PI * b).sin() * y.powf(-b);
    Ok(leading + (1.0 - 0.5 * alpha) / y * reflected)
}

/// `2F1(1, b; b+1; z) = b * sum_n z^n / (b + n)` for `|z| < 1`.
fn unit_shift_series(b: f64, z: f64) -> Result<f64> {
    sum_series(|n| {
        let n = n as f64;
        z * (b + n) / (b + n + 1.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: Pfaff-transformed Gauss series summed term by term
    /// to a fixed, generous length, with no tail logic.
    fn pfaff_oracle(alpha: f64, y: f64) -> f64 {
        let c = 2.0 - 2.0 / alpha;
        let w = y / (1.0 + y);
        // 2F1(1, c - b = 1; c; w)
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 0..200_000 {
            let n = n as f64;
            term *= (1.0 + n) * (1.0 + n) / ((c + n) * (n + 1.0)) * w;
            sum += term;
        }
        sum / (1.0 + y)
    }

    #[test]
    fn value_at_zero_is_one() {
        for alpha in [2.1, 3.0, 4.0, 7.5] {
            assert_eq!(hyp2f1_coverage(alpha, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn arctan_identity() {
        // 2F1(1, 1/2; 3/2; -1) = pi / 4
        let v = hyp2f1_coverage(4.0, 1.0).unwrap();
        assert!((v - PI / 4.0).abs() < 1e-12, "{v}");
        for z in [0.3_f64, 0.9, 1.4, 3.0, 25.0] {
            let v = hyp2f1_coverage(4.0, z * z).unwrap();
            assert!((v - z.atan() / z).abs() < 1e-12, "z = {z}");
        }
    }

    #[test]
    fn alpha_three_against_series_oracle() {
        let v = hyp2f1_coverage(3.0, 2.5).unwrap();
        let oracle = pfaff_oracle(3.0, 2.5);
        assert!((v - oracle).abs() < 1e-9, "{v} vs {oracle}");
        // frozen from the oracle
        assert!((v - 0.716_721_797_642_091).abs() < 1e-12);
    }

    #[test]
    fn log_identity_through_general_evaluator() {
        for y in [0.1_f64, 0.4, 1.0, 10.0, 100.0] {
            let v = hyp2f1(1.0, 1.0, 2.0, -y).unwrap();
            let expected = (1.0 + y).ln() / y;
            assert!(((v - expected) / expected).abs() < 1e-9, "y = {y}: {v}");
        }
    }

    #[test]
    fn general_matches_family_evaluator() {
        for alpha in [2.5, 3.0, 3.5, 4.0] {
            let b = 1.0 - 2.0 / alpha;
            for y in [0.01, 0.3, 0.7, 1.5, 5.0, 60.0] {
                let general = hyp2f1(1.0, b, b + 1.0, -y).unwrap();
                let family = hyp2f1_coverage(alpha, y).unwrap();
                assert!((general - family).abs() < 1e-11, "alpha {alpha} y {y}");
            }
        }
    }

    #[test]
    fn regime_boundaries_are_continuous() {
        for alpha in [2.2, 3.0, 5.0] {
            for y in [0.5, 2.0] {
                let lo = hyp2f1_coverage(alpha, y * (1.0 - 1e-12)).unwrap();
                let hi = hyp2f1_coverage(alpha, y * (1.0 + 1e-12)).unwrap();
                assert!((lo - hi).abs() < 1e-11, "alpha {alpha} y {y}");
            }
        }
    }

    #[test]
    fn huge_arguments_stay_accurate() {
        // leading term dominates: pi b / sin(pi b) y^{-b}
        let alpha = 3.0;
        let b = 1.0 / 3.0;
        let y = 1e18;
        let v = hyp2f1_coverage(alpha, y).unwrap();
        let lead = PI * b / (PI * b).sin() * y.powf(-b);
        assert!(((v - lead) / lead).abs() < 1e-10);
        assert_eq!(hyp2f1_coverage(alpha, f64::INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        assert_eq!(hyp2f1_coverage(2.0, 1.0), Err(Error::UnsupportedExponent(2.0)));
        assert!(matches!(hyp2f1_coverage(1.5, 1.0), Err(Error::UnsupportedExponent(_))));
        assert!(matches!(hyp2f1_coverage(3.0, -1.0), Err(Error::Domain(_))));
        assert!(matches!(hyp2f1_coverage(3.0, f64::NAN), Err(Error::Domain(_))));
        assert!(hyp2f1(1.0, 1.0, -2.0, -0.1).is_err());
        assert!(hyp2f1(1.0, 1.0, 2.0, 0.9).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn euler_rhs(alpha: f64, y: f64) -> f64 {
            // (1 - z)^{-a} 2F1(a, c - b; c; z/(z - 1)) with z = -y, a = 1
            let b = 1.0 - 2.0 / alpha;
            let c = b + 1.0;
            let w = y / (1.0 + y);
            let mut term = 1.0;
            let mut sum = 1.0;
            for n in 0..400_000 {
                let n = n as f64;
                term *= (1.0 + n) * (c - b + n) / ((c + n) * (n + 1.0)) * w;
                sum += term;
                if term < 1e-18 * sum {
                    break;
                }
            }
            sum / (1.0 + y)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn euler_transformation_consistency(
                alpha in prop::sample::select(vec![2.5, 3.0, 3.5, 4.0]),
                y in 0.0f64..100.0,
            ) {
                let lhs = hyp2f1_coverage(alpha, y).unwrap();
                let rhs = euler_rhs(alpha, y);
                prop_assert!((lhs - rhs).abs() <= 1e-9, "lhs {} rhs {}", lhs, rhs);
            }

            #[test]
            fn bounded_and_decreasing(alpha in 2.05f64..8.0, y in 1e-6f64..1e6, k in 1.01f64..4.0) {
                let v = hyp2f1_coverage(alpha, y).unwrap();
                let w = hyp2f1_coverage(alpha, y * k).unwrap();
                prop_assert!(v > 0.0 && v <= 1.0);
                prop_assert!(w < v);
            }
        }
    }
}
