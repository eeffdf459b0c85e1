use crate::error::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("Q({x}) requires a finite argument")));
    }
    Ok(q_unchecked(x))
}

#[inline]
pub(crate) fn q_unchecked(x: f64) -> f64 {
    0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Inverse of [`q_function`]: the `x` with `Q(x) = p`.
///
/// Starts from Acklam's rational approximation of the normal quantile
/// (relative error about 1e-9) and polishes with Halley steps on `Q` itself.
pub fn q_inverse(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("Q^-1({p}) requires p in (0, 1)")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let mut x = -acklam_quantile(p);
    for _ in 0..3 {
        let g = q_unchecked(x) - p;
        if g == 0.0 {
            break;
        }
        // g' = -pdf(x), g'' = x pdf(x)
        let d1 = -normal_pdf(x);
        let d2 = x * normal_pdf(x);
        let step = 2.0 * g * d1 / (2.0 * d1 * d1 - g * d2);
        x -= step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    Ok(x)
}

/// Lower-tail normal quantile, Acklam's algorithm.
fn acklam_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] =
        [7.784_695_709_041_462e-3, 3.224_671_290_700_398e-1, 2.445_134_137_142_996, 3.754_408_661_907_416];
    const P_LOW: f64 = 0.024_25;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: bisection on `Q` over a bracketing interval.
    fn bisect_q_inverse(p: f64) -> f64 {
        let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if q_unchecked(mid) > p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn q_at_zero_is_half() {
        assert_eq!(q_function(0.0).unwrap(), 0.5);
    }

    #[test]
    fn q_tail_is_tiny() {
        assert!(q_function(8.0).unwrap() < 1e-15);
    }

    #[test]
    fn q_at_the_ten_percent_point() {
        // bisection places Q^-1(0.1) at 1.2815515655446004
        assert!((bisect_q_inverse(0.1) - 1.281_551_565_544_600_4).abs() < 1e-12);
        assert!((q_function(1.281_551_565_5).unwrap() - 0.1).abs() < 1e-9);
    }

    #[test]
    fn q_rejects_non_finite() {
        assert!(matches!(q_function(f64::NAN), Err(Error::Domain(_))));
        assert!(q_function(f64::INFINITY).is_err());
    }

    #[test]
    fn q_inverse_examples() {
        assert_eq!(q_inverse(0.5).unwrap(), 0.0);
        let x = q_inverse(q_function(1.7).unwrap()).unwrap();
        assert!((x - 1.7).abs() < 1e-10);
        // bisection oracle value 1.6448536269514729
        assert!((bisect_q_inverse(0.05) - 1.644_853_627_0).abs() < 1e-8);
        assert!((q_inverse(0.05).unwrap() - 1.644_853_627_0).abs() < 1e-8);
    }

    #[test]
    fn q_inverse_domain() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(q_inverse(p).is_err(), "p = {p}");
        }
    }

    #[test]
    fn q_inverse_matches_bisection_across_tails() {
        for p in [1e-12, 1e-8, 1e-4, 0.01, 0.2, 0.45, 0.7, 0.99, 1.0 - 1e-6] {
            let x = q_inverse(p).unwrap();
            assert!((x - bisect_q_inverse(p)).abs() < 1e-9, "p = {p}");
            let back = q_unchecked(x);
            assert!(((back - p) / p).abs() < 1e-12, "p = {p}, back = {back}");
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn symmetry(x in -8.0f64..8.0) {
                let s = q_function(x).unwrap() + q_function(-x).unwrap();
                prop_assert!((s - 1.0).abs() <= 1e-14);
            }

            #[test]
            fn round_trip(x in -6.0f64..6.0) {
                // Below about x = -4.9 the probability is within 1e-6 of one and
                // its rounding alone moves the preimage by more than 1e-10, so
                // the bound includes that conditioning term.
                let p = q_function(x).unwrap();
                let back = q_inverse(p).unwrap();
                let conditioning = f64::EPSILON * p / normal_pdf(x);
                prop_assert!((back - x).abs() <= 1e-10 + conditioning, "x {} back {}", x, back);
            }

            #[test]
            fn round_trip_upper_half(x in -4.5f64..6.0) {
                let back = q_inverse(q_function(x).unwrap()).unwrap();
                prop_assert!((back - x).abs() <= 1e-10);
            }

            #[test]
            fn decreasing(x in -8.0f64..8.0, dx in 1e-3f64..1.0) {
                prop_assert!(q_function(x + dx).unwrap() < q_function(x).unwrap());
            }
        }
    }
}
