//! One RAFT voting round over jammed links with optional vote authentication.
//!
//! Round structure: the leader broadcasts on the downlink, every follower that
//! decodes it votes on the uplink, Eves inject forged votes once the channel
//! is idle, and the leader counts accepted votes. Consensus needs a strict
//! majority of the registered followers.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::authn::{decide, pfa_closed_form, AuthRegistry, EveEnsemble, EvePathloss, Hypothesis};
use crate::error::{Error, Result};
use crate::mc::{sum_over_trials, McEstimate};
use crate::netmodel::{
    sample_jammers, sir_downlink_with, sir_uplink_with, ChannelParams, JammerAnnulus, LinkFading, PppField,
};
use crate::rng::{child_seed, stream};

const LINK_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;
const EVE_STREAM: u64 = 3;
const JAMMER_STREAM: u64 = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum JammerPlacement {
    /// Use the jammers stored in the field for every round.
    Fixed,
    /// Draw a fresh jammer process on this annulus each round.
    Resample(JammerAnnulus),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundConfig {
    pub field: PppField,
    pub ch: ChannelParams,
    /// Fingerprints in the same order as `field.followers`.
    pub reg: AuthRegistry,
    /// One forged vote per Eve per round; `None` for no impersonators.
    pub eves: Option<EveEnsemble>,
    pub auth_enabled: bool,
    pub seed: u64,
    pub jammers: JammerPlacement,
}

impl RoundConfig {
    /// Builds the registry from the field's follower positions.
    pub fn from_field(
        field: PppField,
        ch: ChannelParams,
        radius: f64,
        sigma: f64,
        epsilon: f64,
        seed: u64,
    ) -> Result<Self> {
        if field.followers.is_empty() {
            return Err(Error::DegenerateNetwork);
        }
        let reg = AuthRegistry::from_points(&field.followers, ch.alpha, radius, sigma, epsilon)?;
        Ok(Self { field, ch, reg, eves: None, auth_enabled: false, seed, jammers: JammerPlacement::Fixed })
    }

    pub fn n_eves(&self) -> usize {
        self.eves.as_ref().map_or(0, EveEnsemble::n)
    }

    pub fn m(&self) -> usize {
        self.field.followers.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.field.followers.is_empty() {
            return Err(Error::DegenerateNetwork);
        }
        self.ch.validate()?;
        self.reg.validate()?;
        if self.reg.m() != self.m() {
            return Err(Error::InvalidParameter(format!(
                "registry holds {} fingerprints for {} followers",
                self.reg.m(),
                self.m()
            )));
        }
        if let Some(e) = &self.eves {
            e.validate()?;
        }
        if let JammerPlacement::Resample(jam) = &self.jammers {
            jam.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsensusRoundOutcome {
    pub dl_successes: Vec<bool>,
    /// A follower without downlink success does not transmit and is `false`.
    pub ul_successes: Vec<bool>,
    /// Legitimate votes that reached the leader plus forged votes.
    pub votes_received: usize,
    pub votes_accepted: usize,
    /// Eve votes that passed the test (before duplicate filtering).
    pub spoofed_votes_passed: usize,
    /// Eve votes counted toward the majority.
    pub spoofed_votes_accepted: usize,
    pub legitimate_votes_rejected: usize,
    /// Accepted votes dropped because their identity was already counted.
    pub duplicate_votes_dropped: usize,
    pub consensus: bool,
}

impl ConsensusRoundOutcome {
    pub fn legitimate_votes_received(&self) -> usize {
        self.ul_successes.iter().filter(|&&v| v).count()
    }
}

/// Round 0 of `cfg`.
pub fn run_round(cfg: &RoundConfig) -> Result<ConsensusRoundOutcome> {
    cfg.validate()?;
    round(cfg, 0)
}

/// Round `index` of `cfg`; each round draws from its own streams.
pub fn run_round_indexed(cfg: &RoundConfig, index: u64) -> Result<ConsensusRoundOutcome> {
    cfg.validate()?;
    round(cfg, index)
}

fn round(cfg: &RoundConfig, index: u64) -> Result<ConsensusRoundOutcome> {
    let m = cfg.m();
    let resampled;
    let field = match &cfg.jammers {
        JammerPlacement::Fixed => &cfg.field,
        JammerPlacement::Resample(jam) => {
            let mut rng = stream(child_seed(cfg.seed, JAMMER_STREAM), index);
            resampled = PppField { followers: cfg.field.followers.clone(), jammers: sample_jammers(jam, &mut rng) };
            &resampled
        }
    };

    // links: both fadings are drawn for every follower so the stream layout
    // does not depend on outcomes
    let mut link_rng = stream(child_seed(cfg.seed, LINK_STREAM), index);
    let n_jam = field.jammers.len();
    let mut dl_successes = Vec::with_capacity(m);
    let mut ul_successes = Vec::with_capacity(m);
    for i in 0..m {
        let dl_fading = LinkFading::sample(n_jam, &mut link_rng);
        let ul_fading = LinkFading::sample(n_jam, &mut link_rng);
        let dl = sir_downlink_with(field, i, &cfg.ch, &dl_fading)? > cfg.ch.beta_dl();
        let ul = dl && sir_uplink_with(field, i, &cfg.ch, &ul_fading)? > cfg.ch.beta_ul();
        dl_successes.push(dl);
        ul_successes.push(ul);
    }

    let n_eves = cfg.n_eves();
    let legit_received = ul_successes.iter().filter(|&&v| v).count();
    let votes_received = legit_received + n_eves;
    let mut out = ConsensusRoundOutcome {
        dl_successes,
        ul_successes,
        votes_received,
        votes_accepted: 0,
        spoofed_votes_passed: 0,
        spoofed_votes_accepted: 0,
        legitimate_votes_rejected: 0,
        duplicate_votes_dropped: 0,
        consensus: false,
    };

    if !cfg.auth_enabled {
        out.votes_accepted = votes_received;
        out.spoofed_votes_passed = n_eves;
        out.spoofed_votes_accepted = n_eves;
    } else {
        let reg = &cfg.reg;
        let mut counted = vec![false; m];
        let mut noise_rng = stream(child_seed(cfg.seed, NOISE_STREAM), index);
        for i in 0..m {
            let n: f64 = noise_rng.sample(StandardNormal);
            if !out.ul_successes[i] {
                continue;
            }
            let d = decide(reg.ground_truth[i] + reg.sigma * n, reg);
            if d.hypothesis == Hypothesis::Impersonation {
                out.legitimate_votes_rejected += 1;
            } else if counted[d.identified_index] {
                out.duplicate_votes_dropped += 1;
            } else {
                counted[d.identified_index] = true;
                out.votes_accepted += 1;
            }
        }
        if let Some(eves) = &cfg.eves {
            let mut eve_rng = stream(child_seed(cfg.seed, EVE_STREAM), index);
            for j in 0..n_eves {
                let psi = match &eves.pathloss {
                    EvePathloss::Explicit(v) => v[j],
                    EvePathloss::UniformPrior => reg.psi_min + eve_rng.random::<f64>() * reg.support_width(),
                };
                let n: f64 = eve_rng.sample(StandardNormal);
                let d = decide(psi + reg.sigma * n, reg);
                if d.hypothesis == Hypothesis::Impersonation {
                    continue;
                }
                out.spoofed_votes_passed += 1;
                if counted[d.identified_index] {
                    out.duplicate_votes_dropped += 1;
                } else {
                    counted[d.identified_index] = true;
                    out.votes_accepted += 1;
                    out.spoofed_votes_accepted += 1;
                }
            }
        }
    }
    out.consensus = 2 * out.votes_accepted > m;
    Ok(out)
}

/// Fraction of `rounds` rounds reaching consensus.
pub fn consensus_probability(cfg: &RoundConfig, rounds: u64, workers_hint: usize) -> Result<McEstimate> {
    Ok(round_tallies(cfg, rounds, workers_hint)?.consensus)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Tallies {
    consensus: McEstimate,
    spoof_passed: McEstimate,
    spoof_accepted: McEstimate,
    legit_rejected: McEstimate,
}

fn round_tallies(cfg: &RoundConfig, rounds: u64, workers_hint: usize) -> Result<Tallies> {
    cfg.validate()?;
    if rounds == 0 {
        return Err(Error::InvalidParameter("rounds must be at least 1".into()));
    }
    let [cons, passed, accepted, eve_votes, rejected, legit_votes] = sum_over_trials(rounds, workers_hint, |r| {
        let o = round(cfg, r)?;
        Ok([
            o.consensus as u64,
            o.spoofed_votes_passed as u64,
            o.spoofed_votes_accepted as u64,
            cfg.n_eves() as u64,
            o.legitimate_votes_rejected as u64,
            o.legitimate_votes_received() as u64,
        ])
    })?;
    let rate = |k: u64, n: u64| {
        if n == 0 {
            McEstimate { mean: 0.0, std_error: 0.0, trials: 0, successes: 0, resampled: 0 }
        } else {
            McEstimate::from_counts(k, n)
        }
    };
    Ok(Tallies {
        consensus: McEstimate::from_counts(cons, rounds),
        spoof_passed: rate(passed, eve_votes),
        spoof_accepted: rate(accepted, eve_votes),
        legit_rejected: rate(rejected, legit_votes),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackImpactReport {
    pub consensus_auth_on: McEstimate,
    pub consensus_auth_off: McEstimate,
    /// Per Eve vote: passed the hypothesis test.
    pub spoof_pass_rate: McEstimate,
    /// Per Eve vote: counted toward the majority.
    pub spoof_acceptance_rate: McEstimate,
    /// Per received legitimate vote: rejected as forged.
    pub legitimate_rejection_rate: McEstimate,
    /// `M * 2Q(epsilon / sigma)`: expected false alarms per round, which bounds
    /// the consensus loss caused by authentication when no Eves are present.
    pub false_alarm_bound: f64,
}

impl AttackImpactReport {
    /// `auth off - auth on`.
    pub fn consensus_gap(&self) -> f64 {
        self.consensus_auth_off.mean - self.consensus_auth_on.mean
    }

    pub fn gap_std_error(&self) -> f64 {
        self.consensus_auth_off.std_error.hypot(self.consensus_auth_on.std_error)
    }
}

/// Consensus with authentication on and off over the same rounds.
pub fn attack_impact_report(cfg: &RoundConfig, rounds: u64, workers_hint: usize) -> Result<AttackImpactReport> {
    let on = round_tallies(&RoundConfig { auth_enabled: true, ..cfg.clone() }, rounds, workers_hint)?;
    let off = round_tallies(&RoundConfig { auth_enabled: false, ..cfg.clone() }, rounds, workers_hint)?;
    Ok(AttackImpactReport {
        consensus_auth_on: on.consensus,
        consensus_auth_off: off.consensus,
        spoof_pass_rate: on.spoof_passed,
        spoof_acceptance_rate: on.spoof_accepted,
        legitimate_rejection_rate: on.legit_rejected,
        false_alarm_bound: cfg.m() as f64 * pfa_closed_form(&cfg.reg),
    })
}

/// `P[X > M/2]` for `X` a sum of independent Bernoulli(`p_i`).
pub fn majority_probability(p: &[f64]) -> f64 {
    let mut dist = vec![1.0];
    for &pi in p {
        let mut next = vec![0.0; dist.len() + 1];
        for (k, &w) in dist.iter().enumerate() {
            next[k] += w * (1.0 - pi);
            next[k + 1] += w * pi;
        }
        dist = next;
    }
    let m = p.len();
    dist.iter().enumerate().filter(|(k, _)| 2 * k > m).map(|(_, w)| w).sum()
}
