//! Closed forms against simulation over a fixed coverage grid and a set of
//! randomized authentication configurations.
//!
//! One row per comparison: `check,point,gate,closed_form,mc,std_error,z`.
//! Rows with `gate = 0` are reported but do not count toward the verdict.

use raftjamsec_core::authn::{
    monte_carlo_auth, pfa_closed_form, pfa_exact, pmc_closed_form, pmd_closed_form, threshold_for_pfa, OuterBoundary,
    PmdNormalization,
};
use raftjamsec_core::coverage::{coverage, CoverageQuery};
use raftjamsec_core::mc::estimate_coverage;
use raftjamsec_core::netmodel::sample_disk;
use raftjamsec_core::rng::{child_seed, stream};
use raftjamsec_core::{AuthRegistry, EveEnsemble, GeometryMode, Link, McConfig, McEstimate};
use rand::Rng;

use crate::csv::Table;
use crate::error::{CliError, Result};
use crate::spec::ExperimentSpec;

pub const COVERAGE_BETAS_DB: [f64; 7] = [-30.0, -25.0, -20.0, -15.0, -10.0, -5.0, 0.0];
pub const COVERAGE_RHO_MULTS: [f64; 3] = [1.0, 2.0, 4.0];
pub const TARGET_PFAS: [f64; 3] = [0.01, 0.1, 0.3];
const MAX_NODES: usize = 8;
const AUTH_CONFIG_LABEL: u64 = 0xa0;
const AUTH_MC_LABEL: u64 = 0xa1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    CoverageDownlink = 1,
    CoverageUplink = 2,
    CoverageJoint = 3,
    FalseAlarm = 4,
    MissedDetection = 5,
    Misclassification = 6,
    /// `2Q(epsilon / sigma)`, which ignores neighbouring acceptance windows.
    FalseAlarmPrinted = 7,
    /// Missed detection with the `1/M` factor.
    MissedDetectionPrinted = 8,
}

impl Check {
    pub fn gated(self) -> bool {
        !matches!(self, Check::FalseAlarmPrinted | Check::MissedDetectionPrinted)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub check: Check,
    pub point: usize,
    pub closed_form: f64,
    pub mc: McEstimate,
}

impl Comparison {
    pub fn z(&self) -> f64 {
        self.mc.z_score(self.closed_form)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationSummary {
    pub comparisons: Vec<Comparison>,
    pub z_limit: f64,
}

impl ValidationSummary {
    fn max_abs_z(&self, gated: bool) -> f64 {
        self.comparisons.iter().filter(|c| c.check.gated() == gated).map(|c| c.z().abs()).fold(0.0, f64::max)
    }

    pub fn gated_max_abs_z(&self) -> f64 {
        self.max_abs_z(true)
    }

    pub fn informational_max_abs_z(&self) -> f64 {
        self.max_abs_z(false)
    }

    pub fn worst(&self) -> Option<&Comparison> {
        self.comparisons.iter().filter(|c| c.check.gated()).max_by(|a, b| a.z().abs().total_cmp(&b.z().abs()))
    }

    pub fn passed(&self) -> bool {
        self.gated_max_abs_z() <= self.z_limit
    }

    pub fn to_table(&self) -> Table {
        let header = ["check", "point", "gate", "closed_form", "mc", "std_error", "z"];
        let mut t = Table::new(header.iter().map(|s| s.to_string()).collect());
        for c in &self.comparisons {
            t.push(vec![
                c.check as u8 as f64,
                c.point as f64,
                c.check.gated() as u8 as f64,
                c.closed_form,
                c.mc.mean,
                c.mc.std_error,
                c.z(),
            ]);
        }
        t
    }
}

pub fn run_validation(spec: &ExperimentSpec) -> Result<(Table, ValidationSummary)> {
    let mut comparisons = coverage_grid(spec)?;
    comparisons.extend(auth_grid(spec)?);
    let summary = ValidationSummary { comparisons, z_limit: spec.validate.z_limit };
    Ok((summary.to_table(), summary))
}

/// Paper-referenced coverage over beta x jammer density x link.
pub fn coverage_grid(spec: &ExperimentSpec) -> Result<Vec<Comparison>> {
    let mut out = Vec::new();
    let mut point = 0;
    for &beta in &COVERAGE_BETAS_DB {
        for &mult in &COVERAGE_RHO_MULTS {
            for (link, check) in [
                (Link::Downlink, Check::CoverageDownlink),
                (Link::Uplink, Check::CoverageUplink),
                (Link::Joint, Check::CoverageJoint),
            ] {
                let mut jam = spec.annulus();
                jam.rho_jammer = mult * spec.rho_follower;
                let ch = spec.ch.with_betas_db(beta, beta);
                let q = CoverageQuery::new(ch, spec.deployment(), jam, link).with_rho_fr(spec.rho_fr());
                let at = |source| CliError::Numeric {
                    point: format!("beta_db={beta}, rho_jammer_mult={mult}, link={link:?}"),
                    source,
                };
                let cf = coverage(&q).map_err(at)?.probability;
                let mc = McConfig::new(spec.trials, child_seed(spec.seed, point as u64));
                let est = estimate_coverage(&q, &mc, GeometryMode::PaperOriginReferenced).map_err(at)?;
                out.push(Comparison { check, point, closed_form: cf, mc: est });
                point += 1;
            }
        }
    }
    Ok(out)
}

/// One randomized authentication scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct AuthScenario {
    pub reg: AuthRegistry,
    pub eves: EveEnsemble,
    pub target_pfa: f64,
}

/// `count` scenarios with 1..=8 followers and Eves placed uniformly on the
/// deployment disk, sigma uniform on [0.1, 2] and the threshold set from a
/// target false-alarm rate.
pub fn auth_scenarios(spec: &ExperimentSpec, count: usize) -> raftjamsec_core::Result<Vec<AuthScenario>> {
    let mut rng = stream(child_seed(spec.seed, AUTH_CONFIG_LABEL), 0);
    (0..count)
        .map(|_| {
            let m = rng.random_range(1..=MAX_NODES);
            let n = rng.random_range(1..=MAX_NODES);
            let sigma = rng.random_range(0.1..=2.0);
            let target_pfa = TARGET_PFAS[rng.random_range(0..TARGET_PFAS.len())];
            let followers = sample_disk(m, spec.radius, &mut rng);
            let eve_points = sample_disk(n, spec.radius, &mut rng);
            let eps = threshold_for_pfa(target_pfa, sigma)?;
            let reg = AuthRegistry::from_points(&followers, spec.ch.alpha, spec.radius, sigma, eps)?;
            let eves = EveEnsemble::from_points(&eve_points, spec.ch.alpha)?;
            Ok(AuthScenario { reg, eves, target_pfa })
        })
        .collect()
}

pub fn auth_grid(spec: &ExperimentSpec) -> Result<Vec<Comparison>> {
    let scenarios = auth_scenarios(spec, spec.validate.auth_configs)
        .map_err(|source| CliError::Numeric { point: "auth scenario generation".into(), source })?;
    let mut out = Vec::new();
    for (k, s) in scenarios.iter().enumerate() {
        let at = |source| CliError::Numeric { point: format!("auth scenario {k}"), source };
        let mc = McConfig::new(spec.validate.auth_draws, child_seed(spec.seed, AUTH_MC_LABEL + k as u64));
        let est = monte_carlo_auth(&s.reg, &s.eves, &mc).map_err(at)?;
        let pmd_union = pmd_closed_form(&s.reg, &s.eves, PmdNormalization::Union).map_err(at)?;
        let pmd_printed = pmd_closed_form(&s.reg, &s.eves, PmdNormalization::AsPrinted).map_err(at)?;
        out.extend([
            Comparison { check: Check::FalseAlarm, point: k, closed_form: pfa_exact(&s.reg), mc: est.pfa },
            Comparison { check: Check::MissedDetection, point: k, closed_form: pmd_union, mc: est.pmd },
            Comparison {
                check: Check::Misclassification,
                point: k,
                closed_form: pmc_closed_form(&s.reg, OuterBoundary::Infinite),
                mc: est.pmc,
            },
            Comparison { check: Check::FalseAlarmPrinted, point: k, closed_form: pfa_closed_form(&s.reg), mc: est.pfa },
            Comparison { check: Check::MissedDetectionPrinted, point: k, closed_form: pmd_printed, mc: est.pmd },
        ]);
    }
    Ok(out)
}
