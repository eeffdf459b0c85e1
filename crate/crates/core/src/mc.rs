//! Monte Carlo coverage estimation.
//!
//! Each trial draws from its own RNG stream keyed by `(seed, trial index)` and
//! contributes integer counts, so estimates are bit-identical for any thread
//! count or scheduling.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::coverage::{CoverageQuery, Link};
use crate::error::{Error, Result};
use crate::netmodel::{
    jamming_power, sample_field, sample_jammers, sir_downlink_with, sir_ratio, sir_uplink_with, ChannelParams,
    LinkFading, Point, PppField,
};
use crate::rng::stream;

/// Cap on consecutive empty fields within one receiver-referenced trial.
const MAX_RESAMPLES: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    /// 1 runs on the calling thread; anything else uses the rayon pool.
    pub workers_hint: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { trials: 100_000, seed: 0, workers_hint: 0 }
    }
}

impl McConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self { trials, seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub successes: u64,
    /// Empty-field redraws (receiver-referenced mode only).
    pub resampled: u64,
}

impl McEstimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        let mean = successes as f64 / trials as f64;
        Self { mean, std_error: binomial_std_error(mean, trials), trials, successes, resampled: 0 }
    }

    /// `(mean - reference) / std_error`, using the binomial error at
    /// `reference` so that degenerate estimates (mean 0 or 1) stay testable.
    pub fn z_score(&self, reference: f64) -> f64 {
        let se = binomial_std_error(reference, self.trials);
        let diff = self.mean - reference;
        if diff == 0.0 {
            0.0
        } else if se == 0.0 {
            f64::INFINITY
        } else {
            diff / se
        }
    }
}

pub fn binomial_std_error(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryMode {
    /// Tagged distance drawn from the follower-distance density; all
    /// interference measured at the origin. The model behind the closed forms.
    PaperOriginReferenced,
    /// Full field sampled; a uniformly chosen follower is the tagged node.
    /// Downlink interference is measured at the follower, uplink at the leader.
    ReceiverReferenced,
}

/// Sums per-trial count vectors over `0..trials`.
pub(crate) fn sum_over_trials<const K: usize, F>(trials: u64, workers_hint: usize, f: F) -> Result<[u64; K]>
where
    F: Fn(u64) -> Result<[u64; K]> + Sync,
{
    let add = |mut a: [u64; K], b: [u64; K]| {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
        a
    };
    if workers_hint == 1 {
        let mut acc = [0u64; K];
        for i in 0..trials {
            acc = add(acc, f(i)?);
        }
        Ok(acc)
    } else {
        (0..trials).into_par_iter().map(&f).try_reduce(|| [0u64; K], |a, b| Ok(add(a, b)))
    }
}

fn paper_distance<R: Rng + ?Sized>(rho: f64, rng: &mut R) -> f64 {
    let e: f64 = Exp1.sample(rng);
    (e / (PI * rho)).sqrt()
}

/// One origin-referenced link trial: fresh distance, jammers and fading.
fn paper_link_success<R: Rng + ?Sized>(q: &CoverageQuery, uplink: bool, rng: &mut R) -> bool {
    let ch = &q.ch;
    let r = paper_distance(q.distance_intensity(), rng);
    let jammers = sample_jammers(&q.jam, rng);
    let fading = LinkFading::sample(jammers.len(), rng);
    let (p, beta) = if uplink { (ch.p_follower_mw(), ch.beta_ul()) } else { (ch.p_leader_mw(), ch.beta_dl()) };
    let signal = p * fading.signal * r.powf(-ch.alpha);
    let interference = jamming_power(&Point::ORIGIN, &jammers, &fading.jammers, ch.p_jammer_mw(), ch.alpha);
    sir_ratio(signal, interference) > beta
}

/// Samples a field with at least one follower; returns it with the number of
/// discarded empty fields.
fn nonempty_field<R: Rng + ?Sized>(q: &CoverageQuery, rng: &mut R) -> Result<(PppField, u64)> {
    for redraws in 0..MAX_RESAMPLES {
        let field = sample_field(&q.dep, &q.jam, rng)?;
        if !field.followers.is_empty() {
            return Ok((field, redraws));
        }
    }
    Err(Error::DegenerateNetwork)
}

fn dl_success(field: &PppField, index: usize, ch: &ChannelParams, fading: &LinkFading) -> Result<bool> {
    Ok(sir_downlink_with(field, index, ch, fading)? > ch.beta_dl())
}

fn ul_success(field: &PppField, index: usize, ch: &ChannelParams, fading: &LinkFading) -> Result<bool> {
    Ok(sir_uplink_with(field, index, ch, fading)? > ch.beta_ul())
}

/// Counts `[dl, ul, both]` for one receiver-referenced trial plus redraws.
fn receiver_trial<R: Rng + ?Sized>(q: &CoverageQuery, rng: &mut R) -> Result<[u64; 4]> {
    let (field, redraws) = nonempty_field(q, rng)?;
    let index = rng.random_range(0..field.followers.len());
    let n = field.jammers.len();
    let dl_fading = LinkFading::sample(n, rng);
    let ul_fading = LinkFading::sample(n, rng);
    let dl = dl_success(&field, index, &q.ch, &dl_fading)?;
    let ul = ul_success(&field, index, &q.ch, &ul_fading)?;
    Ok([dl as u64, ul as u64, (dl && ul) as u64, redraws])
}

/// Monte Carlo estimate of the coverage probability for `q.link`.
///
/// In [`GeometryMode::PaperOriginReferenced`] a joint trial draws the downlink
/// and uplink from independent geometries and fading, which is the model of
/// the product form. In [`GeometryMode::ReceiverReferenced`] both links share
/// the field and tagged follower with independent fading.
pub fn estimate_coverage(q: &CoverageQuery, mc: &McConfig, mode: GeometryMode) -> Result<McEstimate> {
    q.validate()?;
    mc.validate()?;
    let counts = match mode {
        GeometryMode::PaperOriginReferenced => sum_over_trials(mc.trials, mc.workers_hint, |i| {
            let mut rng = stream(mc.seed, i);
            let ok = match q.link {
                Link::Downlink => paper_link_success(q, false, &mut rng),
                Link::Uplink => paper_link_success(q, true, &mut rng),
                Link::Joint => {
                    let dl = paper_link_success(q, false, &mut rng);
                    let ul = paper_link_success(q, true, &mut rng);
                    dl && ul
                }
            };
            Ok([ok as u64, 0])
        })?,
        GeometryMode::ReceiverReferenced => {
            let c = sum_over_trials(mc.trials, mc.workers_hint, |i| receiver_trial(q, &mut stream(mc.seed, i)))?;
            let hits = match q.link {
                Link::Downlink => c[0],
                Link::Uplink => c[1],
                Link::Joint => c[2],
            };
            [hits, c[3]]
        }
    };
    let mut est = McEstimate::from_counts(counts[0], mc.trials);
    est.resampled = counts[1];
    if est.resampled > 0 {
        log::info!("{} empty fields redrawn over {} trials", est.resampled, mc.trials);
    }
    Ok(est)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointDependence {
    /// Both links succeed on a shared field and tagged follower.
    pub joint: McEstimate,
    /// Product of the marginal estimates from the same trials. Its
    /// `std_error` is the delta-method error of the product.
    pub product: McEstimate,
    pub downlink: McEstimate,
    pub uplink: McEstimate,
}

impl JointDependence {
    /// `joint - product`.
    pub fn gap(&self) -> f64 {
        self.joint.mean - self.product.mean
    }
}

/// Joint coverage with shared geometry against the independence product,
/// receiver-referenced.
pub fn estimate_joint_dependence(q: &CoverageQuery, mc: &McConfig) -> Result<JointDependence> {
    q.validate()?;
    mc.validate()?;
    let c = sum_over_trials(mc.trials, mc.workers_hint, |i| receiver_trial(q, &mut stream(mc.seed, i)))?;
    let n = mc.trials;
    let mut dl = McEstimate::from_counts(c[0], n);
    let mut ul = McEstimate::from_counts(c[1], n);
    let mut joint = McEstimate::from_counts(c[2], n);
    for e in [&mut dl, &mut ul, &mut joint] {
        e.resampled = c[3];
    }
    let mean = dl.mean * ul.mean;
    let std_error = (ul.mean.powi(2) * dl.std_error.powi(2) + dl.mean.powi(2) * ul.std_error.powi(2)).sqrt();
    let product = McEstimate { mean, std_error, trials: n, successes: 0, resampled: c[3] };
    Ok(JointDependence { joint, product, downlink: dl, uplink: ul })
}

/// Fading-only coverage of follower `index` on a fixed field,
/// receiver-referenced.
pub fn estimate_link_coverage(
    field: &PppField,
    index: usize,
    ch: &ChannelParams,
    link: Link,
    mc: &McConfig,
) -> Result<McEstimate> {
    ch.validate()?;
    mc.validate()?;
    field.follower(index)?;
    let n = field.jammers.len();
    let [hits] = sum_over_trials(mc.trials, mc.workers_hint, |i| {
        let mut rng = stream(mc.seed, i);
        let dl_fading = LinkFading::sample(n, &mut rng);
        let ul_fading = LinkFading::sample(n, &mut rng);
        let ok = match link {
            Link::Downlink => dl_success(field, index, ch, &dl_fading)?,
            Link::Uplink => ul_success(field, index, ch, &ul_fading)?,
            Link::Joint => dl_success(field, index, ch, &dl_fading)? && ul_success(field, index, ch, &ul_fading)?,
        };
        Ok([ok as u64])
    })?;
    Ok(McEstimate::from_counts(hits, mc.trials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::{coverage, coverage_dl};
    use crate::netmodel::{DeploymentConfig, JammerAnnulus, REFERENCE_FOLLOWER_INTENSITY as RHO_F};

    fn query(beta_db: f64, z1: f64, z2: f64, rho_j: f64, link: Link) -> CoverageQuery {
        CoverageQuery::new(
            ChannelParams::reference().with_betas_db(beta_db, beta_db),
            DeploymentConfig::reference(3),
            JammerAnnulus::new(z1, z2, rho_j).unwrap(),
            link,
        )
    }

    #[test]
    fn no_jammers_always_covered() {
        for mode in [GeometryMode::PaperOriginReferenced, GeometryMode::ReceiverReferenced] {
            for link in [Link::Downlink, Link::Uplink, Link::Joint] {
                let e = estimate_coverage(&query(10.0, 50.0, 300.0, 0.0, link), &McConfig::new(2000, 1), mode).unwrap();
                assert_eq!(e.mean, 1.0);
                assert_eq!(e.std_error, 0.0);
            }
        }
    }

    #[test]
    fn huge_threshold_kills_coverage() {
        let e = estimate_coverage(
            &query(60.0, 50.0, 300.0, RHO_F, Link::Downlink),
            &McConfig::new(5000, 2),
            GeometryMode::PaperOriginReferenced,
        )
        .unwrap();
        assert!(e.mean < 0.01);
    }

    #[test]
    fn deterministic_across_worker_counts() {
        let q = query(-10.0, 50.0, 300.0, 2.0 * RHO_F, Link::Joint);
        for mode in [GeometryMode::PaperOriginReferenced, GeometryMode::ReceiverReferenced] {
            let seq = estimate_coverage(&q, &McConfig { trials: 4000, seed: 9, workers_hint: 1 }, mode).unwrap();
            let par = estimate_coverage(&q, &McConfig { trials: 4000, seed: 9, workers_hint: 8 }, mode).unwrap();
            assert_eq!(seq, par);
        }
    }

    #[test]
    fn std_error_matches_binomial_formula() {
        let e = estimate_coverage(
            &query(-5.0, 50.0, 300.0, RHO_F, Link::Uplink),
            &McConfig::new(3000, 4),
            GeometryMode::PaperOriginReferenced,
        )
        .unwrap();
        assert_eq!(e.std_error, (e.mean * (1.0 - e.mean) / 3000.0).sqrt());
    }

    #[test]
    fn std_error_halves_when_trials_quadruple() {
        let q = query(0.0, 50.0, 300.0, 4.0 * RHO_F, Link::Downlink);
        let a = estimate_coverage(&q, &McConfig::new(10_000, 5), GeometryMode::PaperOriginReferenced).unwrap();
        let b = estimate_coverage(&q, &McConfig::new(40_000, 5), GeometryMode::PaperOriginReferenced).unwrap();
        let ratio = a.std_error / b.std_error;
        assert!((ratio - 2.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn paper_mode_matches_closed_form() {
        for link in [Link::Downlink, Link::Uplink, Link::Joint] {
            let q = query(-10.0, 50.0, 300.0, 2.0 * RHO_F, link);
            let exact = coverage(&q).unwrap().probability;
            let e = estimate_coverage(&q, &McConfig::new(40_000, 6), GeometryMode::PaperOriginReferenced).unwrap();
            assert!(e.z_score(exact).abs() < 4.0, "{link:?}: {} vs {exact}", e.mean);
        }
        let q = query(-20.0, 0.0, 300.0, RHO_F, Link::Downlink);
        let exact = coverage_dl(&q).unwrap().probability;
        let e = estimate_coverage(&q, &McConfig::new(40_000, 7), GeometryMode::PaperOriginReferenced).unwrap();
        assert!(e.z_score(exact).abs() < 4.0);
    }

    #[test]
    fn joint_dependence_bounds() {
        let q = query(-10.0, 0.0, 20.0, 50.0 * RHO_F, Link::Joint);
        let d = estimate_joint_dependence(&q, &McConfig::new(3000, 8)).unwrap();
        for e in [d.joint, d.product, d.downlink, d.uplink] {
            assert!((0.0..=1.0).contains(&e.mean));
        }
        assert!(d.gap().is_finite());
        let none =
            estimate_joint_dependence(&query(-10.0, 0.0, 20.0, 0.0, Link::Joint), &McConfig::new(500, 8)).unwrap();
        assert_eq!((none.joint.mean, none.product.mean), (1.0, 1.0));
    }

    #[test]
    fn sparse_deployments_are_redrawn() {
        let mut q = query(-10.0, 50.0, 300.0, RHO_F, Link::Downlink);
        q.dep.rho_follower = 0.5 / (PI * q.dep.radius * q.dep.radius);
        let e = estimate_coverage(&q, &McConfig::new(2000, 10), GeometryMode::ReceiverReferenced).unwrap();
        assert!(e.resampled > 0);
    }

    #[test]
    fn fixed_geometry_link_estimate() {
        let field = PppField { followers: vec![Point::new(100.0, 0.0)], jammers: vec![Point::new(0.0, 60.0)] };
        let ch = ChannelParams::reference().with_betas_db(0.0, 0.0);
        // DL: P d^-a h > Pj |f - j|^-a g  <=>  h/g > gamma (d/|f-j|)^a ; P[h/g > t] = 1/(1+t)
        let t = ch.gamma_dl() * (100.0 / field.followers[0].distance(&field.jammers[0])).powi(3);
        let e = estimate_link_coverage(&field, 0, &ch, Link::Downlink, &McConfig::new(50_000, 11)).unwrap();
        assert!(e.z_score(1.0 / (1.0 + t)).abs() < 4.0);
        let t = ch.gamma_ul() * (100.0f64 / 60.0).powi(3);
        let e = estimate_link_coverage(&field, 0, &ch, Link::Uplink, &McConfig::new(50_000, 12)).unwrap();
        assert!(e.z_score(1.0 / (1.0 + t)).abs() < 4.0);
        assert!(estimate_link_coverage(&field, 3, &ch, Link::Uplink, &McConfig::new(10, 1)).is_err());
    }
}
