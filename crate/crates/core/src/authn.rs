//! Pathloss-fingerprint authentication at the leader.
//!
//! The leader stores the pathloss `Psi_i` (dB) of each legitimate follower.
//! A vote arrives with a noisy measurement `z = Psi + n`, `n ~ N(0, sigma^2)`.
//! The nearest fingerprint identifies the sender and the residual `TS*` is
//! compared against a threshold `epsilon`: `TS* > epsilon` flags
//! impersonation.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::mc::{sum_over_trials, McConfig, McEstimate};
use crate::netmodel::{pathloss_db, sample_disk, Point};
use crate::rng::stream;
use crate::specfun::{integrate, q_inverse, q_unchecked, QuadratureSpec};

/// Seed of the pinned default realization (5 followers and 5 Eves uniform on
/// the 500 m disk). Chosen so that the Eves sit clear of every fingerprint.
pub const DEFAULT_AUTH_SEED: u64 = 10;

/// Closest distance (m) used for the lower end of the pathloss support.
pub const PATHLOSS_FLOOR_M: f64 = 1.0;

const PRIOR_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    /// H0: the vote comes from a registered follower.
    NoImpersonation,
    /// H1: the vote is forged.
    Impersonation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuthDecision {
    pub hypothesis: Hypothesis,
    /// Nearest fingerprint (0-based). Meaningful under H0.
    pub identified_index: usize,
    pub test_statistic: f64,
}

fn validate_priors(priors: &[f64], what: &str) -> Result<()> {
    if priors.is_empty() {
        return Err(Error::InvalidParameter(format!("{what}: at least one entry required")));
    }
    if priors.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::InvalidParameter(format!("{what}: priors must be non-negative")));
    }
    let sum: f64 = priors.iter().sum();
    if (sum - 1.0).abs() > PRIOR_SUM_TOL {
        return Err(Error::InvalidParameter(format!("{what}: priors sum to {sum}, not 1")));
    }
    Ok(())
}

fn uniform_priors(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

fn sample_index<R: Rng + ?Sized>(priors: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in priors.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    priors.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuthRegistry {
    /// Fingerprints `Psi_i` in dB, one per follower.
    pub ground_truth: Vec<f64>,
    pub priors: Vec<f64>,
    /// Measurement noise standard deviation (dB).
    pub sigma: f64,
    /// Decision threshold (dB).
    pub epsilon: f64,
    pub psi_min: f64,
    pub psi_max: f64,
}

impl AuthRegistry {
    /// Registry with equal priors.
    pub fn new(ground_truth: Vec<f64>, sigma: f64, epsilon: f64, psi_min: f64, psi_max: f64) -> Result<Self> {
        let priors = uniform_priors(ground_truth.len().max(1));
        let reg = Self { ground_truth, priors, sigma, epsilon, psi_min, psi_max };
        reg.validate()?;
        Ok(reg)
    }

    /// Fingerprints from follower positions; the support spans the pathloss
    /// between 1 m and `radius`.
    pub fn from_points(points: &[Point], alpha: f64, radius: f64, sigma: f64, epsilon: f64) -> Result<Self> {
        let psi = points.iter().map(|p| pathloss_db(p.norm(), alpha)).collect::<Result<Vec<_>>>()?;
        Self::new(psi, sigma, epsilon, pathloss_db(PATHLOSS_FLOOR_M, alpha)?, pathloss_db(radius, alpha)?)
    }

    pub fn with_priors(mut self, priors: Vec<f64>) -> Result<Self> {
        self.priors = priors;
        self.validate()?;
        Ok(self)
    }

    pub fn with_sigma(mut self, sigma: f64) -> Result<Self> {
        self.sigma = sigma;
        self.validate()?;
        Ok(self)
    }

    /// Sets `sigma = 1 / sqrt(LQ)` with `LQ` given in dB.
    pub fn with_link_quality_db(self, lq_db: f64) -> Result<Self> {
        self.with_sigma(10f64.powf(-lq_db / 20.0))
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    /// Sets the threshold that yields `target_pfa` under `2 Q(epsilon / sigma)`.
    pub fn with_target_pfa(self, target_pfa: f64) -> Result<Self> {
        let eps = threshold_for_pfa(target_pfa, self.sigma)?;
        self.with_epsilon(eps)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ground_truth.is_empty() {
            return Err(Error::DegenerateNetwork);
        }
        if self.ground_truth.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("fingerprints must be finite".into()));
        }
        if self.priors.len() != self.ground_truth.len() {
            return Err(Error::InvalidParameter(format!(
                "{} priors for {} fingerprints",
                self.priors.len(),
                self.ground_truth.len()
            )));
        }
        validate_priors(&self.priors, "follower priors")?;
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.epsilon >= 0.0) || self.epsilon.is_infinite() {
            return Err(Error::InvalidParameter(format!("epsilon must be non-negative, got {}", self.epsilon)));
        }
        if !(self.psi_min < self.psi_max) || !self.psi_min.is_finite() || !self.psi_max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "pathloss support [{}, {}] is empty",
                self.psi_min, self.psi_max
            )));
        }
        if self.has_duplicates() {
            log::warn!("duplicate fingerprints: ML regions are degenerate, lowest index wins");
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.ground_truth.len()
    }

    pub fn link_quality(&self) -> f64 {
        1.0 / (self.sigma * self.sigma)
    }

    pub fn support_width(&self) -> f64 {
        self.psi_max - self.psi_min
    }

    pub fn has_duplicates(&self) -> bool {
        let mut v = self.ground_truth.clone();
        v.sort_by(f64::total_cmp);
        v.windows(2).any(|w| w[0] == w[1])
    }

    /// Acceptance region `{z : min_i |z - Psi_i| <= epsilon}` as sorted,
    /// disjoint intervals.
    pub fn acceptance_intervals(&self) -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = self.ground_truth.iter().map(|&p| (p - self.epsilon, p + self.epsilon)).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(v.len());
        for (lo, hi) in v {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        merged
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvePathloss {
    /// Known pathloss per Eve (dB).
    Explicit(Vec<f64>),
    /// Each Eve's pathloss uniform on the registry support.
    UniformPrior,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EveEnsemble {
    pub pathloss: EvePathloss,
    pub priors: Vec<f64>,
}

impl EveEnsemble {
    pub fn explicit(pathloss: Vec<f64>) -> Result<Self> {
        let e = Self { priors: uniform_priors(pathloss.len().max(1)), pathloss: EvePathloss::Explicit(pathloss) };
        e.validate()?;
        Ok(e)
    }

    pub fn uniform_prior(n: usize) -> Result<Self> {
        let e = Self { pathloss: EvePathloss::UniformPrior, priors: uniform_priors(n.max(1)) };
        if n == 0 {
            return Err(Error::InvalidParameter("at least one Eve required".into()));
        }
        e.validate()?;
        Ok(e)
    }

    pub fn from_points(points: &[Point], alpha: f64) -> Result<Self> {
        Self::explicit(points.iter().map(|p| pathloss_db(p.norm(), alpha)).collect::<Result<Vec<_>>>()?)
    }

    pub fn with_priors(mut self, priors: Vec<f64>) -> Result<Self> {
        self.priors = priors;
        self.validate()?;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.priors.len()
    }

    pub fn validate(&self) -> Result<()> {
        if let EvePathloss::Explicit(v) = &self.pathloss {
            if v.is_empty() {
                return Err(Error::InvalidParameter("at least one Eve required".into()));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter("Eve pathloss must be finite".into()));
            }
            if v.len() != self.priors.len() {
                return Err(Error::InvalidParameter(format!("{} priors for {} Eves", self.priors.len(), v.len())));
            }
        }
        validate_priors(&self.priors, "Eve priors")
    }
}

/// Nearest fingerprint: `(min_i |z - Psi_i|, argmin)`, lowest index on ties.
pub fn ml_identify(z: f64, reg: &AuthRegistry) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    for (i, psi) in reg.ground_truth.iter().enumerate() {
        let d = (z - psi).abs();
        if d < best.0 {
            best = (d, i);
        }
    }
    best
}

/// H1 iff `TS* > epsilon`.
pub fn decide(z: f64, reg: &AuthRegistry) -> AuthDecision {
    let (ts, index) = ml_identify(z, reg);
    let hypothesis = if ts > reg.epsilon { Hypothesis::Impersonation } else { Hypothesis::NoImpersonation };
    AuthDecision { hypothesis, identified_index: index, test_statistic: ts }
}

/// `epsilon = sigma Q^-1(pfa / 2)`.
pub fn threshold_for_pfa(target_pfa: f64, sigma: f64) -> Result<f64> {
    if !(target_pfa > 0.0 && target_pfa <= 1.0) {
        return Err(Error::Domain(format!("target false-alarm probability must lie in (0, 1], got {target_pfa}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    Ok(sigma * q_inverse(target_pfa / 2.0)?)
}

/// `2 Q(epsilon / sigma)`. Ignores acceptance by a neighbouring fingerprint;
/// see [`pfa_exact`].
pub fn pfa_closed_form(reg: &AuthRegistry) -> f64 {
    2.0 * q_unchecked(reg.epsilon / reg.sigma)
}

/// Probability that `mean + n` lands in the acceptance region.
pub fn acceptance_probability(mean: f64, reg: &AuthRegistry) -> f64 {
    reg.acceptance_intervals().iter().map(|&(lo, hi)| window(mean, lo, hi, reg.sigma)).sum::<f64>().min(1.0)
}

/// `P[lo <= mean + n <= hi]`.
fn window(mean: f64, lo: f64, hi: f64, sigma: f64) -> f64 {
    (q_unchecked((lo - mean) / sigma) - q_unchecked((hi - mean) / sigma)).max(0.0)
}

/// False-alarm probability over the union of acceptance intervals.
pub fn pfa_exact(reg: &AuthRegistry) -> f64 {
    reg.ground_truth.iter().zip(&reg.priors).map(|(&psi, &p)| p * (1.0 - acceptance_probability(psi, reg))).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PmdNormalization {
    /// Sum over fingerprints of the per-interval acceptance, weighted
    /// `pi(j) / M`.
    #[default]
    AsPrinted,
    /// The same sum without the `1/M` factor; exact while the acceptance
    /// intervals are disjoint.
    DisjointSum,
    /// Exact probability of landing in the union of acceptance intervals.
    Union,
}

fn eve_acceptance(psi_e: f64, reg: &AuthRegistry, norm: PmdNormalization) -> f64 {
    let sum = || -> f64 {
        reg.ground_truth.iter().map(|&psi| window(psi_e, psi - reg.epsilon, psi + reg.epsilon, reg.sigma)).sum()
    };
    match norm {
        PmdNormalization::AsPrinted => sum() / reg.m() as f64,
        PmdNormalization::DisjointSum => sum(),
        PmdNormalization::Union => acceptance_probability(psi_e, reg),
    }
}

fn clamp_pmd(p: f64) -> f64 {
    if p > 1.0 {
        log::warn!("missed-detection sum {p} exceeds 1 (overlapping acceptance intervals); clamped");
    }
    p.clamp(0.0, 1.0)
}

/// Missed-detection probability for Eves with known pathloss.
pub fn pmd_closed_form(reg: &AuthRegistry, eves: &EveEnsemble, norm: PmdNormalization) -> Result<f64> {
    reg.validate()?;
    eves.validate()?;
    let EvePathloss::Explicit(psi_e) = &eves.pathloss else {
        return Err(Error::InvalidParameter("closed-form missed detection needs explicit Eve pathloss".into()));
    };
    let p = psi_e.iter().zip(&eves.priors).map(|(&e, &w)| w * eve_acceptance(e, reg, norm)).sum();
    Ok(clamp_pmd(p))
}

/// Expected missed-detection probability with each Eve's pathloss uniform on
/// `[psi_min, psi_max]`.
pub fn pmd_expected(
    reg: &AuthRegistry,
    eves: &EveEnsemble,
    norm: PmdNormalization,
    quad: &QuadratureSpec,
) -> Result<f64> {
    reg.validate()?;
    eves.validate()?;
    if eves.pathloss != EvePathloss::UniformPrior {
        return Err(Error::InvalidParameter("expected missed detection needs the uniform Eve prior".into()));
    }
    if reg.epsilon == 0.0 {
        return Ok(0.0);
    }
    // Break the range where the integrand changes fastest so that narrow
    // peaks are never straddled by a single panel.
    let (a, b) = (reg.psi_min, reg.psi_max);
    let mut cuts = vec![a, b];
    for &psi in &reg.ground_truth {
        for k in [-1.0, 0.0, 1.0] {
            cuts.push((psi + k * reg.epsilon).clamp(a, b));
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            total += integrate(|x| eve_acceptance(x, reg, norm), w[0], w[1], quad)?.value;
        }
    }
    // every Eve shares the same prior on its pathloss, so sum_j pi(j) = 1
    Ok(clamp_pmd(total / reg.support_width()))
}

/// Missed detection for either kind of ensemble.
pub fn pmd(reg: &AuthRegistry, eves: &EveEnsemble, norm: PmdNormalization) -> Result<f64> {
    match eves.pathloss {
        EvePathloss::Explicit(_) => pmd_closed_form(reg, eves, norm),
        EvePathloss::UniformPrior => pmd_expected(reg, eves, norm, &QuadratureSpec::default()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OuterBoundary {
    /// Outermost ML regions extend to infinity.
    #[default]
    Infinite,
    /// Outermost regions truncated at `psi_min` and `psi_max`.
    Support,
}

/// Misclassification probability from midpoint decision regions. Duplicate
/// fingerprints: the lowest index owns the region, the others are always
/// misclassified.
pub fn pmc_closed_form(reg: &AuthRegistry, outer: OuterBoundary) -> f64 {
    let mut order: Vec<usize> = (0..reg.m()).collect();
    order.sort_by(|&a, &b| reg.ground_truth[a].total_cmp(&reg.ground_truth[b]).then(a.cmp(&b)));
    let mut distinct: Vec<(f64, usize)> = Vec::new();
    let mut total = 0.0;
    for &i in &order {
        let psi = reg.ground_truth[i];
        match distinct.last() {
            Some(&(v, _)) if v == psi => total += reg.priors[i],
            _ => distinct.push((psi, i)),
        }
    }
    let (lo_end, hi_end) = match outer {
        OuterBoundary::Infinite => (f64::NEG_INFINITY, f64::INFINITY),
        OuterBoundary::Support => (reg.psi_min, reg.psi_max),
    };
    for (k, &(psi, i)) in distinct.iter().enumerate() {
        let lo = if k == 0 { lo_end } else { 0.5 * (distinct[k - 1].0 + psi) };
        let hi = if k + 1 == distinct.len() { hi_end } else { 0.5 * (psi + distinct[k + 1].0) };
        total += reg.priors[i] * (1.0 - window(psi, lo, hi, reg.sigma));
    }
    total.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuthMcEstimate {
    /// Legitimate vote rejected.
    pub pfa: McEstimate,
    /// Eve vote accepted.
    pub pmd: McEstimate,
    /// Legitimate vote attributed to the wrong follower by the ML stage.
    pub pmc: McEstimate,
    /// Legitimate vote accepted and attributed to the wrong follower.
    pub pmc_accepted: McEstimate,
}

fn eve_pathloss<R: Rng + ?Sized>(reg: &AuthRegistry, eves: &EveEnsemble, rng: &mut R) -> f64 {
    let j = sample_index(&eves.priors, rng);
    match &eves.pathloss {
        EvePathloss::Explicit(v) => v[j],
        EvePathloss::UniformPrior => reg.psi_min + rng.random::<f64>() * reg.support_width(),
    }
}

/// Simulates one legitimate and one Eve transmission per draw.
pub fn monte_carlo_auth(reg: &AuthRegistry, eves: &EveEnsemble, mc: &McConfig) -> Result<AuthMcEstimate> {
    reg.validate()?;
    eves.validate()?;
    mc.validate()?;
    let [fa, md, mcl, mca] = sum_over_trials(mc.trials, mc.workers_hint, |t| {
        let mut rng = stream(mc.seed, t);
        let i = sample_index(&reg.priors, &mut rng);
        let n: f64 = rng.sample(StandardNormal);
        let d = decide(reg.ground_truth[i] + reg.sigma * n, reg);
        let rejected = d.hypothesis == Hypothesis::Impersonation;
        let wrong = d.identified_index != i;
        let psi_e = eve_pathloss(reg, eves, &mut rng);
        let n: f64 = rng.sample(StandardNormal);
        let eve_accepted = decide(psi_e + reg.sigma * n, reg).hypothesis == Hypothesis::NoImpersonation;
        Ok([rejected as u64, eve_accepted as u64, wrong as u64, (!rejected && wrong) as u64])
    })?;
    let est = |k| McEstimate::from_counts(k, mc.trials);
    Ok(AuthMcEstimate { pfa: est(fa), pmd: est(md), pmc: est(mcl), pmc_accepted: est(mca) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub pfa_target: f64,
    pub epsilon: f64,
    /// `1 - P_md` from the closed form.
    pub pd_closed_form: f64,
    /// `1 - P_md` from simulation.
    pub pd_mc: Option<McEstimate>,
}

/// Detection probability against target false-alarm rate, with `epsilon`
/// set from each target.
pub fn roc_curve(
    reg: &AuthRegistry,
    eves: &EveEnsemble,
    pfa_grid: &[f64],
    norm: PmdNormalization,
    mc: Option<&McConfig>,
) -> Result<Vec<RocPoint>> {
    pfa_grid
        .iter()
        .map(|&target| {
            let r = reg.clone().with_target_pfa(target)?;
            let pd_closed_form = 1.0 - pmd(&r, eves, norm)?;
            let pd_mc = match mc {
                Some(cfg) => {
                    let md = monte_carlo_auth(&r, eves, cfg)?.pmd;
                    Some(McEstimate::from_counts(md.trials - md.successes, md.trials))
                }
                None => None,
            };
            Ok(RocPoint { pfa_target: target, epsilon: r.epsilon, pd_closed_form, pd_mc })
        })
        .collect()
}

/// Follower and Eve positions of one fixed-size realization.
#[derive(Debug, Clone, PartialEq)]
pub struct AuthRealization {
    pub followers: Vec<Point>,
    pub eves: Vec<Point>,
    pub radius: f64,
}

impl AuthRealization {
    /// `m` followers then `n` Eves, uniform on the disk.
    pub fn sample(m: usize, n: usize, radius: f64, seed: u64) -> Self {
        let mut rng = stream(seed, 0);
        let followers = sample_disk(m, radius, &mut rng);
        let eves = sample_disk(n, radius, &mut rng);
        Self { followers, eves, radius }
    }

    /// Five followers and five Eves on the 500 m disk from
    /// [`DEFAULT_AUTH_SEED`].
    pub fn default_realization() -> Self {
        Self::sample(5, 5, crate::netmodel::REFERENCE_RADIUS, DEFAULT_AUTH_SEED)
    }

    pub fn registry(&self, alpha: f64, sigma: f64, epsilon: f64) -> Result<AuthRegistry> {
        AuthRegistry::from_points(&self.followers, alpha, self.radius, sigma, epsilon)
    }

    pub fn eve_ensemble(&self, alpha: f64) -> Result<EveEnsemble> {
        EveEnsemble::from_points(&self.eves, alpha)
    }
}
