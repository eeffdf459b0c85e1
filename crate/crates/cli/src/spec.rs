//! Experiment spec files.
//!
//! Flat `key = value` lines grouped under `[section]` headers. `#` starts a
//! comment. Keys before the first header belong to the top-level section.
//!
//! ```text
//! kind = coverage_sweep
//! seed = 42
//! trials = 100000
//!
//! [channel]
//! alpha = 3
//! beta_db = -10
//!
//! [jammers]
//! z1 = 50
//! z2 = 300
//! rho_jammer_mult = 1
//!
//! [sweep]
//! param = beta_db
//! start = -30
//! stop = 0
//! steps = 16
//!
//! [series]
//! param = rho_jammer_mult
//! values = 1, 2, 4
//! ```
//!
//! Every key is optional; omitted keys keep the defaults of the chosen kind.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use raftjamsec_core::authn::{OuterBoundary, PmdNormalization, DEFAULT_AUTH_SEED};
use raftjamsec_core::netmodel::{db_to_linear, REFERENCE_FOLLOWER_INTENSITY, REFERENCE_RADIUS};
use raftjamsec_core::{ChannelParams, DeploymentConfig, JammerAnnulus};

use crate::error::{CliError, Result};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TRIALS: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    CoverageSweep,
    JammingAreaSweep,
    JammingDistanceSweep,
    AuthErrorSweep,
    Roc,
    Consensus,
    Validate,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::CoverageSweep,
        ExperimentKind::JammingAreaSweep,
        ExperimentKind::JammingDistanceSweep,
        ExperimentKind::AuthErrorSweep,
        ExperimentKind::Roc,
        ExperimentKind::Consensus,
        ExperimentKind::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::CoverageSweep => "coverage_sweep",
            ExperimentKind::JammingAreaSweep => "jamming_area_sweep",
            ExperimentKind::JammingDistanceSweep => "jamming_distance_sweep",
            ExperimentKind::AuthErrorSweep => "auth_error_sweep",
            ExperimentKind::Roc => "roc",
            ExperimentKind::Consensus => "consensus",
            ExperimentKind::Validate => "validate",
        }
    }

    /// Name of the CLI subcommand running this kind.
    pub fn subcommand(self) -> &'static str {
        match self {
            ExperimentKind::CoverageSweep => "coverage",
            ExperimentKind::JammingAreaSweep => "jamarea",
            ExperimentKind::JammingDistanceSweep => "jamdist",
            ExperimentKind::AuthErrorSweep => "autherr",
            ExperimentKind::Roc => "roc",
            ExperimentKind::Consensus => "consensus",
            ExperimentKind::Validate => "validate",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s || k.subcommand() == s)
            .ok_or_else(|| format!("unknown experiment kind '{s}'"))
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameters that can drive a sweep axis or a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    BetaDb,
    BetaDlDb,
    BetaUlDb,
    Alpha,
    PLeaderDbm,
    PFollowerDbm,
    PJammerDbm,
    Z1,
    Z2,
    Width,
    RhoJammer,
    RhoJammerMult,
    RhoFollower,
    LqDb,
    Sigma,
    Epsilon,
    TargetPfa,
}

impl Param {
    const ALL: [Param; 17] = [
        Param::BetaDb,
        Param::BetaDlDb,
        Param::BetaUlDb,
        Param::Alpha,
        Param::PLeaderDbm,
        Param::PFollowerDbm,
        Param::PJammerDbm,
        Param::Z1,
        Param::Z2,
        Param::Width,
        Param::RhoJammer,
        Param::RhoJammerMult,
        Param::RhoFollower,
        Param::LqDb,
        Param::Sigma,
        Param::Epsilon,
        Param::TargetPfa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::BetaDb => "beta_db",
            Param::BetaDlDb => "beta_dl_db",
            Param::BetaUlDb => "beta_ul_db",
            Param::Alpha => "alpha",
            Param::PLeaderDbm => "p_leader_dbm",
            Param::PFollowerDbm => "p_follower_dbm",
            Param::PJammerDbm => "p_jammer_dbm",
            Param::Z1 => "z1",
            Param::Z2 => "z2",
            Param::Width => "width",
            Param::RhoJammer => "rho_jammer",
            Param::RhoJammerMult => "rho_jammer_mult",
            Param::RhoFollower => "rho_follower",
            Param::LqDb => "lq_db",
            Param::Sigma => "sigma",
            Param::Epsilon => "epsilon",
            Param::TargetPfa => "target_pfa",
        }
    }
}

impl FromStr for Param {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Param::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| format!("unknown sweep parameter '{s}'"))
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub param: Param,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Sweep {
    pub fn new(param: Param, start: f64, stop: f64, steps: usize) -> Self {
        Self { param, start, stop, steps }
    }

    /// `steps` evenly spaced values, endpoints included.
    pub fn values(&self) -> Vec<f64> {
        let n = self.steps;
        (0..n)
            .map(
                |i| {
                    if i + 1 == n {
                        self.stop
                    } else {
                        self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64
                    }
                },
            )
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub param: Param,
    pub values: Vec<f64>,
}

/// Intensity used for the tagged follower's distance law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoFr {
    Follower,
    Jammer,
    Value(f64),
}

/// Where impersonators come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EveSource {
    /// Positions drawn with the follower realization.
    Realization,
    /// Pathloss uniform over the fingerprint support.
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuthSettings {
    pub m: usize,
    pub n: usize,
    pub realization_seed: u64,
    pub lq_db: f64,
    /// Fixed threshold; when `None` it follows from `target_pfa`.
    pub epsilon: Option<f64>,
    pub target_pfa: f64,
    pub boundary: OuterBoundary,
    pub pmd: PmdNormalization,
    pub eves: EveSource,
}

impl Default for AuthSettings {
    fn default() -> Self {
        Self {
            m: 5,
            n: 5,
            realization_seed: DEFAULT_AUTH_SEED,
            lq_db: 10.0,
            epsilon: None,
            target_pfa: 0.1,
            boundary: OuterBoundary::Infinite,
            pmd: PmdNormalization::AsPrinted,
            eves: EveSource::Realization,
        }
    }
}

impl AuthSettings {
    pub fn sigma(&self) -> f64 {
        1.0 / db_to_linear(self.lq_db).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsensusSettings {
    pub n_eves: usize,
    /// Seed of the follower field; jammers are redrawn every round.
    pub field_seed: u64,
}

impl Default for ConsensusSettings {
    fn default() -> Self {
        Self { n_eves: 5, field_seed: 1 }
    }
}

/// Settings for the closed-form-vs-simulation gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateSettings {
    pub auth_configs: usize,
    pub auth_draws: u64,
    pub z_limit: f64,
}

impl Default for ValidateSettings {
    fn default() -> Self {
        Self { auth_configs: 20, auth_draws: 1_000_000, z_limit: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub ch: ChannelParams,
    pub rho_follower: f64,
    pub radius: f64,
    pub z1: f64,
    pub z2: f64,
    /// When set, `z2 = z1 + width`.
    pub width: Option<f64>,
    pub rho_jammer: f64,
    pub rho_fr: RhoFr,
    pub auth: AuthSettings,
    pub consensus: ConsensusSettings,
    pub validate: ValidateSettings,
    pub sweep: Sweep,
    pub series: Option<Series>,
    /// MC trials per point; consensus rounds for the consensus kind.
    pub trials: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl ExperimentSpec {
    /// Built-in defaults for `kind`: reference channel and deployment plus
    /// the axis and series of the matching figure.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let mut s = Self {
            kind,
            ch: ChannelParams::reference(),
            rho_follower: REFERENCE_FOLLOWER_INTENSITY,
            radius: REFERENCE_RADIUS,
            z1: 50.0,
            z2: 300.0,
            width: None,
            rho_jammer: REFERENCE_FOLLOWER_INTENSITY,
            rho_fr: RhoFr::Follower,
            auth: AuthSettings::default(),
            consensus: ConsensusSettings::default(),
            validate: ValidateSettings::default(),
            sweep: Sweep::new(Param::BetaDb, -30.0, 0.0, 16),
            series: None,
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            out: None,
        };
        let rho = REFERENCE_FOLLOWER_INTENSITY;
        match kind {
            ExperimentKind::CoverageSweep => {
                s.series = Some(Series { param: Param::RhoJammerMult, values: vec![1.0, 2.0, 4.0] });
            }
            ExperimentKind::JammingAreaSweep => {
                s.z1 = 0.0;
                s.rho_fr = RhoFr::Jammer;
                s.ch = s.ch.with_betas_db(-10.0, -10.0);
                s.sweep = Sweep::new(Param::Z2, 0.0, 300.0, 16);
            }
            ExperimentKind::JammingDistanceSweep => {
                s.width = Some(50.0);
                s.rho_jammer = 10.0 * rho;
                s.sweep = Sweep::new(Param::Z1, 0.0, 300.0, 31);
                s.series = Some(Series { param: Param::BetaDb, values: vec![-30.0, -20.0, -10.0, 0.0] });
            }
            ExperimentKind::AuthErrorSweep => {
                s.sweep = Sweep::new(Param::LqDb, 0.0, 20.0, 5);
                s.series = Some(Series { param: Param::Epsilon, values: vec![0.1, 0.5, 1.0] });
            }
            ExperimentKind::Roc => {
                s.sweep = Sweep::new(Param::TargetPfa, 0.01, 1.0, 34);
                s.series = Some(Series { param: Param::LqDb, values: vec![0.0, 5.0, 10.0, 15.0] });
            }
            ExperimentKind::Consensus => {
                s.width = Some(50.0);
                s.rho_jammer = 10.0 * rho;
                s.ch = s.ch.with_betas_db(-20.0, -20.0);
                s.sweep = Sweep::new(Param::Z1, 0.0, 300.0, 16);
                s.trials = 10_000;
            }
            ExperimentKind::Validate => {}
        }
        s
    }

    /// Parses spec text on top of the defaults of the kind it names.
    /// `fallback_kind` is used when the text has no `kind` key.
    pub fn parse(text: &str, fallback_kind: Option<ExperimentKind>) -> Result<Self> {
        let lines = tokenize(text)?;
        let kind_line = lines.iter().find(|l| l.section.is_empty() && l.key == "kind");
        let kind = match (kind_line, fallback_kind) {
            (Some(l), _) => l.value.parse().map_err(|e| CliError::spec(l.line, e))?,
            (None, Some(k)) => k,
            (None, None) => return Err(CliError::spec(0, "missing 'kind'")),
        };
        let mut spec = Self::defaults(kind);
        let mut sweep_steps_line = 0;
        let mut series_param: Option<(Param, usize)> = None;
        let mut series_values: Option<Vec<f64>> = None;
        let mut series_none = false;
        for l in &lines {
            let at = |msg: String| CliError::spec(l.line, msg);
            let num = || parse_f64(&l.value).map_err(at);
            let int = || {
                l.value.parse::<u64>().map_err(|_| at(format!("expected a non-negative integer, got '{}'", l.value)))
            };
            match (l.section.as_str(), l.key.as_str()) {
                ("", "kind") => {}
                ("", "seed") => spec.seed = int()?,
                ("", "trials") => spec.trials = int()?,
                ("", "out") => spec.out = Some(PathBuf::from(&l.value)),
                ("channel", "alpha") => spec.ch.alpha = num()?,
                ("channel", "p_leader_dbm") => spec.ch.p_leader_dbm = num()?,
                ("channel", "p_follower_dbm") => spec.ch.p_follower_dbm = num()?,
                ("channel", "p_jammer_dbm") => spec.ch.p_jammer_dbm = num()?,
                ("channel", "beta_db") => {
                    let b = num()?;
                    spec.ch.beta_dl_db = b;
                    spec.ch.beta_ul_db = b;
                }
                ("channel", "beta_dl_db") => spec.ch.beta_dl_db = num()?,
                ("channel", "beta_ul_db") => spec.ch.beta_ul_db = num()?,
                ("deployment", "rho_follower") => spec.rho_follower = num()?,
                ("deployment", "radius") => spec.radius = num()?,
                ("deployment", "rho_fr") => {
                    spec.rho_fr = match l.value.as_str() {
                        "follower" => RhoFr::Follower,
                        "jammer" => RhoFr::Jammer,
                        _ => RhoFr::Value(num()?),
                    }
                }
                ("jammers", "z1") => spec.z1 = num()?,
                ("jammers", "z2") => {
                    spec.z2 = num()?;
                    spec.width = None;
                }
                ("jammers", "width") => spec.width = Some(num()?),
                ("jammers", "rho_jammer") => spec.rho_jammer = num()?,
                ("jammers", "rho_jammer_mult") => spec.rho_jammer = num()? * spec.rho_follower,
                ("auth", "m") => spec.auth.m = int()? as usize,
                ("auth", "n") => spec.auth.n = int()? as usize,
                ("auth", "realization_seed") => spec.auth.realization_seed = int()?,
                ("auth", "lq_db") => spec.auth.lq_db = num()?,
                ("auth", "sigma") => spec.auth.lq_db = sigma_to_lq_db(num()?).map_err(at)?,
                ("auth", "epsilon") => spec.auth.epsilon = Some(num()?),
                ("auth", "target_pfa") => {
                    spec.auth.target_pfa = num()?;
                    spec.auth.epsilon = None;
                }
                ("auth", "boundary") => {
                    spec.auth.boundary = match l.value.as_str() {
                        "infinite" => OuterBoundary::Infinite,
                        "support" => OuterBoundary::Support,
                        v => return Err(at(format!("boundary must be 'infinite' or 'support', got '{v}'"))),
                    }
                }
                ("auth", "pmd") => {
                    spec.auth.pmd = match l.value.as_str() {
                        "printed" => PmdNormalization::AsPrinted,
                        "disjoint" => PmdNormalization::DisjointSum,
                        "union" => PmdNormalization::Union,
                        v => return Err(at(format!("pmd must be 'printed', 'disjoint' or 'union', got '{v}'"))),
                    }
                }
                ("auth", "eves") => {
                    spec.auth.eves = match l.value.as_str() {
                        "realization" => EveSource::Realization,
                        "uniform" => EveSource::Uniform,
                        v => return Err(at(format!("eves must be 'realization' or 'uniform', got '{v}'"))),
                    }
                }
                ("consensus", "n_eves") => spec.consensus.n_eves = int()? as usize,
                ("consensus", "field_seed") => spec.consensus.field_seed = int()?,
                ("validate", "auth_configs") => spec.validate.auth_configs = int()? as usize,
                ("validate", "auth_draws") => spec.validate.auth_draws = int()?,
                ("validate", "z_limit") => spec.validate.z_limit = num()?,
                ("sweep", "param") => spec.sweep.param = l.value.parse().map_err(at)?,
                ("sweep", "start") => spec.sweep.start = num()?,
                ("sweep", "stop") => spec.sweep.stop = num()?,
                ("sweep", "steps") => {
                    spec.sweep.steps = int()? as usize;
                    sweep_steps_line = l.line;
                }
                ("series", "param") => {
                    if l.value == "none" {
                        series_none = true;
                    } else {
                        series_param = Some((l.value.parse().map_err(at)?, l.line));
                    }
                }
                ("series", "values") => {
                    let v: std::result::Result<Vec<f64>, String> =
                        l.value.split(',').map(|t| parse_f64(t.trim())).collect();
                    let v = v.map_err(at)?;
                    if v.is_empty() {
                        return Err(at("series needs at least one value".into()));
                    }
                    series_values = Some(v);
                }
                (section, key) => {
                    let place = if section.is_empty() { "top level".to_string() } else { format!("[{section}]") };
                    return Err(at(format!("unknown key '{key}' in {place}")));
                }
            }
        }
        if spec.sweep.steps < 2 {
            return Err(CliError::spec(
                sweep_steps_line,
                format!("sweep needs at least 2 steps, got {}", spec.sweep.steps),
            ));
        }
        if series_none {
            spec.series = None;
        } else {
            match (series_param, series_values) {
                (Some((param, _)), Some(values)) => spec.series = Some(Series { param, values }),
                (Some((_, line)), None) => return Err(CliError::spec(line, "series param given without values")),
                (None, Some(values)) => match spec.series.as_mut() {
                    Some(s) => s.values = values,
                    None => return Err(CliError::spec(0, "series values given without a series param")),
                },
                (None, None) => {}
            }
        }
        if spec.trials == 0 {
            return Err(CliError::spec(0, "trials must be at least 1"));
        }
        Ok(spec)
    }

    /// Applies one sweep or series value.
    pub fn set(&mut self, p: Param, v: f64) -> std::result::Result<(), String> {
        match p {
            Param::BetaDb => {
                self.ch.beta_dl_db = v;
                self.ch.beta_ul_db = v;
            }
            Param::BetaDlDb => self.ch.beta_dl_db = v,
            Param::BetaUlDb => self.ch.beta_ul_db = v,
            Param::Alpha => self.ch.alpha = v,
            Param::PLeaderDbm => self.ch.p_leader_dbm = v,
            Param::PFollowerDbm => self.ch.p_follower_dbm = v,
            Param::PJammerDbm => self.ch.p_jammer_dbm = v,
            Param::Z1 => self.z1 = v,
            Param::Z2 => {
                self.z2 = v;
                self.width = None;
            }
            Param::Width => self.width = Some(v),
            Param::RhoJammer => self.rho_jammer = v,
            Param::RhoJammerMult => self.rho_jammer = v * self.rho_follower,
            Param::RhoFollower => self.rho_follower = v,
            Param::LqDb => self.auth.lq_db = v,
            Param::Sigma => self.auth.lq_db = sigma_to_lq_db(v)?,
            Param::Epsilon => self.auth.epsilon = Some(v),
            Param::TargetPfa => {
                self.auth.target_pfa = v;
                self.auth.epsilon = None;
            }
        }
        Ok(())
    }

    pub fn deployment(&self) -> DeploymentConfig {
        DeploymentConfig { rho_follower: self.rho_follower, radius: self.radius, seed: self.seed }
    }

    pub fn annulus(&self) -> JammerAnnulus {
        let z2 = self.width.map_or(self.z2, |w| self.z1 + w);
        JammerAnnulus { z1: self.z1, z2, rho_jammer: self.rho_jammer }
    }

    pub fn rho_fr(&self) -> f64 {
        match self.rho_fr {
            RhoFr::Follower => self.rho_follower,
            RhoFr::Jammer => self.rho_jammer,
            RhoFr::Value(v) => v,
        }
    }
}

fn sigma_to_lq_db(sigma: f64) -> std::result::Result<f64, String> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(format!("sigma must be positive, got {sigma}"));
    }
    Ok(-20.0 * sigma.log10())
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("expected a finite number, got '{s}'")),
    }
}

struct Line {
    line: usize,
    section: String,
    key: String,
    value: String,
}

const SECTIONS: [&str; 8] = ["channel", "deployment", "jammers", "auth", "consensus", "validate", "sweep", "series"];

fn tokenize(text: &str) -> Result<Vec<Line>> {
    let mut section = String::new();
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| CliError::spec(line, format!("malformed section header '{content}'")))?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(CliError::spec(line, format!("unknown section [{name}]")));
            }
            section = name.to_string();
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| CliError::spec(line, format!("expected 'key = value', got '{content}'")))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(CliError::spec(line, "empty key"));
        }
        if !seen.insert((section.clone(), key.clone())) {
            return Err(CliError::spec(line, format!("duplicate key '{key}'")));
        }
        out.push(Line { line, section: section.clone(), key, value });
    }
    Ok(out)
}
