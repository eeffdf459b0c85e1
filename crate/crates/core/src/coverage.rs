//! Closed-form coverage probabilities under PPP jamming.
//!
//! For a follower at distance `r` from the leader, Rayleigh fading on the
//! desired link turns the conditional coverage probability into the Laplace
//! transform of the aggregate jamming power. With jammers on the annulus
//! `[z1, z2]` at intensity `rho_J` that transform is
//!
//! ```text
//! L(r) = exp( pi rho_J K / (alpha/2 - 1)
//!             * [ z2^(2-alpha) F(K / z2^alpha) - z1^(2-alpha) F(K / z1^alpha) ] )
//! ```
//!
//! with `K = gamma beta r^alpha`, `F(y) = 2F1(1, 1 - 2/alpha; 2 - 2/alpha; -y)`
//! and `gamma` the jammer-to-transmitter power ratio. Averaging over the
//! Rayleigh-distributed follower distance gives the link coverage. All
//! interference distances in these formulas are measured from the origin.

use std::cell::Cell;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::netmodel::{ChannelParams, DeploymentConfig, JammerAnnulus};
use crate::specfun::{hyp2f1_coverage, integrate, QuadratureSpec};

/// Below `INNER_RADIUS_CUTOFF * z2` the inner jamming radius is treated as
/// zero and the interference integral is evaluated by quadrature.
pub const INNER_RADIUS_CUTOFF: f64 = 1e-6;

/// Slack allowed above 1 (or below 0) before a probability is rejected.
const PROBABILITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Link {
    Downlink,
    Uplink,
    Joint,
}

/// Quantities that fix the interference kernel of one direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub alpha: f64,
    /// Jammer power over the transmit power of the desired signal.
    pub gamma: f64,
    /// Linear SIR threshold.
    pub beta: f64,
}

impl LinkBudget {
    pub fn downlink(ch: &ChannelParams) -> Self {
        Self { alpha: ch.alpha, gamma: ch.gamma_dl(), beta: ch.beta_dl() }
    }

    pub fn uplink(ch: &ChannelParams) -> Self {
        Self { alpha: ch.alpha, gamma: ch.gamma_ul(), beta: ch.beta_ul() }
    }

    fn gamma_beta(&self) -> f64 {
        self.gamma * self.beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverageMethod {
    /// Interference integral through the hypergeometric closed form.
    ClosedForm,
    /// Interference integral by direct quadrature (inner radius near zero).
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceValue {
    pub value: f64,
    /// `ln L`; non-positive up to rounding.
    pub exponent: f64,
    pub method: CoverageMethod,
    /// Bound on the absolute error of `exponent`.
    pub error_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageQuery {
    pub ch: ChannelParams,
    pub dep: DeploymentConfig,
    pub jam: JammerAnnulus,
    pub link: Link,
    /// Intensity in the follower-distance density; `None` uses the follower
    /// intensity of `dep`.
    pub rho_fr: Option<f64>,
    pub quad: QuadratureSpec,
}

impl CoverageQuery {
    pub fn new(ch: ChannelParams, dep: DeploymentConfig, jam: JammerAnnulus, link: Link) -> Self {
        Self { ch, dep, jam, link, rho_fr: None, quad: QuadratureSpec::default() }
    }

    pub fn with_link(&self, link: Link) -> Self {
        Self { link, ..self.clone() }
    }

    pub fn with_rho_fr(mut self, rho_fr: f64) -> Self {
        self.rho_fr = Some(rho_fr);
        self
    }

    pub fn distance_intensity(&self) -> f64 {
        self.rho_fr.unwrap_or(self.dep.rho_follower)
    }

    pub fn validate(&self) -> Result<()> {
        self.ch.validate()?;
        self.dep.validate()?;
        self.jam.validate()?;
        self.quad.validate()?;
        let rho = self.distance_intensity();
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("follower-distance intensity must be positive, got {rho}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageResult {
    pub probability: f64,
    pub method: CoverageMethod,
    pub quadrature_error_bound: f64,
}

/// Laplace transform of the aggregate jamming power evaluated at
/// `s = r^alpha beta / P`, i.e. the coverage probability of a follower at
/// distance `r`.
pub fn laplace_interference(
    r: f64,
    budget: &LinkBudget,
    jam: &JammerAnnulus,
    quad: &QuadratureSpec,
) -> Result<LaplaceValue> {
    let alpha = budget.alpha;
    if !(alpha > 2.0) || !alpha.is_finite() {
        return Err(Error::UnsupportedExponent(alpha));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("conditioning distance must be positive, got {r}")));
    }
    let method =
        if jam.z1 < INNER_RADIUS_CUTOFF * jam.z2 { CoverageMethod::Quadrature } else { CoverageMethod::ClosedForm };
    laplace_interference_using(r, budget, jam, quad, method)
}

/// As [`laplace_interference`] with the evaluation path forced. The closed
/// form needs `z1 > 0`.
pub fn laplace_interference_using(
    r: f64,
    budget: &LinkBudget,
    jam: &JammerAnnulus,
    quad: &QuadratureSpec,
    method: CoverageMethod,
) -> Result<LaplaceValue> {
    let alpha = budget.alpha;
    if !(alpha > 2.0) || !alpha.is_finite() {
        return Err(Error::UnsupportedExponent(alpha));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("conditioning distance must be positive, got {r}")));
    }
    jam.validate()?;
    if jam.is_empty() || budget.gamma_beta() == 0.0 {
        return Ok(LaplaceValue { value: 1.0, exponent: 0.0, method, error_bound: 0.0 });
    }
    let (exponent, error_bound) = match method {
        CoverageMethod::Quadrature => exponent_by_quadrature(r, budget, jam, quad)?,
        CoverageMethod::ClosedForm => {
            if jam.z1 <= 0.0 {
                return Err(Error::Domain("closed form needs a positive inner radius".into()));
            }
            (exponent_closed_form(r, budget, jam)?, 0.0)
        }
    };
    if exponent > 0.0 {
        log::warn!(
            "interference exponent {exponent:e} > 0 at r = {r}, alpha = {alpha}, annulus [{}, {}]",
            jam.z1,
            jam.z2
        );
    }
    Ok(LaplaceValue { value: exponent.min(0.0).exp(), exponent, method, error_bound })
}

fn exponent_closed_form(r: f64, budget: &LinkBudget, jam: &JammerAnnulus) -> Result<f64> {
    let alpha = budget.alpha;
    let gb = budget.gamma_beta();
    let term = |z: f64| -> Result<f64> {
        let y = gb * (r / z).powf(alpha);
        Ok(z.powf(2.0 - alpha) * hyp2f1_coverage(alpha, y)?)
    };
    let bracket = term(jam.z2)? - term(jam.z1)?;
    let k = gb * r.powf(alpha);
    Ok(PI * jam.rho_jammer * k / (0.5 * alpha - 1.0) * bracket)
}

/// `-pi rho_J r^2 (gamma beta)^{2/alpha} * integral_{z_l}^{z_u} du / (1 + u^{alpha/2})`.
fn exponent_by_quadrature(
    r: f64,
    budget: &LinkBudget,
    jam: &JammerAnnulus,
    quad: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let alpha = budget.alpha;
    let scale = r * budget.gamma_beta().powf(1.0 / alpha);
    let lower = (jam.z1 / scale).powi(2);
    let upper = (jam.z2 / scale).powi(2);
    let prefactor = PI * jam.rho_jammer * scale * scale;
    let half_alpha = 0.5 * alpha;
    let inner = integrate(|u| 1.0 / (1.0 + u.powf(half_alpha)), lower, upper, quad)?;
    Ok((-prefactor * inner.value, prefactor * inner.error_bound))
}

fn clamp_probability(p: f64) -> Result<f64> {
    if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p) {
        return Err(Error::ProbabilityOutOfRange { value: p });
    }
    if !(0.0..=1.0).contains(&p) {
        log::warn!("coverage probability {p} clamped into [0, 1]");
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Averages `L(r)` over the follower-distance density
/// `2 pi rho r exp(-rho pi r^2)`, integrating in `v = rho pi r^2`.
fn average_over_distance(budget: &LinkBudget, q: &CoverageQuery) -> Result<CoverageResult> {
    q.validate()?;
    if q.jam.is_empty() {
        return Ok(CoverageResult {
            probability: 1.0,
            method: CoverageMethod::ClosedForm,
            quadrature_error_bound: 0.0,
        });
    }
    let rho = q.distance_intensity();
    let failure: Cell<Option<Error>> = Cell::new(None);
    let worst_inner = Cell::new(0.0_f64);
    let method = Cell::new(CoverageMethod::ClosedForm);
    let integrand = |v: f64| -> f64 {
        if v <= 0.0 {
            return 1.0;
        }
        let r = (v / (rho * PI)).sqrt();
        match laplace_interference(r, budget, &q.jam, &q.quad) {
            Ok(l) => {
                method.set(l.method);
                worst_inner.set(worst_inner.get().max(l.error_bound));
                (-v).exp() * l.value
            }
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        }
    };
    let outer = integrate(integrand, 0.0, f64::INFINITY, &q.quad);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let outer = outer?;
    Ok(CoverageResult {
        probability: clamp_probability(outer.value)?,
        method: method.get(),
        quadrature_error_bound: outer.error_bound + worst_inner.get(),
    })
}

/// Downlink coverage: leader power, downlink threshold.
pub fn coverage_dl(q: &CoverageQuery) -> Result<CoverageResult> {
    average_over_distance(&LinkBudget::downlink(&q.ch), q)
}

/// Uplink coverage: follower power, uplink threshold.
pub fn coverage_ul(q: &CoverageQuery) -> Result<CoverageResult> {
    average_over_distance(&LinkBudget::uplink(&q.ch), q)
}

/// Joint coverage as the product of the uplink and downlink coverages.
pub fn coverage_joint(q: &CoverageQuery) -> Result<CoverageResult> {
    let dl = coverage_dl(q)?;
    let ul = coverage_ul(q)?;
    let method = if dl.method == CoverageMethod::Quadrature || ul.method == CoverageMethod::Quadrature {
        CoverageMethod::Quadrature
    } else {
        CoverageMethod::ClosedForm
    };
    Ok(CoverageResult {
        probability: ul.probability * dl.probability,
        method,
        quadrature_error_bound: dl.quadrature_error_bound + ul.quadrature_error_bound,
    })
}

/// Coverage for `q.link`.
pub fn coverage(q: &CoverageQuery) -> Result<CoverageResult> {
    match q.link {
        Link::Downlink => coverage_dl(q),
        Link::Uplink => coverage_ul(q),
        Link::Joint => coverage_joint(q),
    }
}
