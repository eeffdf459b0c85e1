//! Globally adaptive 7/15-point Gauss–Kronrod quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Tolerances and effort limit for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-8, max_subdivisions: 2000 }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self { abs_tol, rel_tol, max_subdivisions };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) || self.max_subdivisions < 1 {
            return Err(Error::InvalidParameter(format!(
                "quadrature tolerances must be positive and max_subdivisions >= 1: {self:?}"
            )));
        }
        Ok(())
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_bound: f64,
    pub subdivisions: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.abs() * WGK[7];
    let mut values = [0.0; 15];
    values[7] = fc;
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        values[j] = f1;
        values[14 - j] = f2;
        kronrod += w * (f1 + f2);
        abs_sum += w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("integrand is not finite inside [{a}, {b}]")));
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((values[j] - mean).abs() + (values[14 - j] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    // QUADPACK error rescaling
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Segment { a, b, value, error })
}

fn adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral> {
    let first = gk15(&f, a, b)?;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 1;
    while total_err > spec.target(total) {
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::QuadratureFailure { estimate: total, error_bound: total_err });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval no longer representable; cannot refine further
            return Err(Error::QuadratureFailure { estimate: total, error_bound: total_err });
        }
        let left = gk15(&f, worst.a, mid)?;
        let right = gk15(&f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
        // re-sum periodically to stop drift from incremental updates
        if subdivisions % 64 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error_bound: f64 = heap.iter().map(|s| s.error).sum();
    if error_bound > spec.target(value) {
        return Err(Error::QuadratureFailure { estimate: value, error_bound });
    }
    Ok(Integral { value, error_bound, subdivisions })
}

/// Integrates `f` over `[a, b]`; either limit may be infinite.
///
/// Infinite ranges are mapped onto finite ones: `x = a + t/(1-t)` for
/// `[a, inf)`, `x = b - t/(1-t)` for `(-inf, b]` and `x = t/(1-t^2)` for the
/// whole line.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral> {
    spec.validate()?;
    if a.is_nan() || b.is_nan() || !(a < b) {
        return Err(Error::Domain(format!("integration limits must satisfy a < b, got [{a}, {b}]")));
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adaptive(f, a, b, spec),
        (true, false) => adaptive(
            |t| {
                let u = 1.0 - t;
                f(a + t / u) / (u * u)
            },
            0.0,
            1.0,
            spec,
        ),
        (false, true) => adaptive(
            |t| {
                let u = 1.0 - t;
                f(b - t / u) / (u * u)
            },
            0.0,
            1.0,
            spec,
        ),
        (false, false) => adaptive(
            |t| {
                let u = 1.0 - t * t;
                f(t / u) * (1.0 + t * t) / (u * u)
            },
            -1.0,
            1.0,
            spec,
        ),
    }
}
