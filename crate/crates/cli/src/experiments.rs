//! Per-kind evaluators. Each sweep point is evaluated on a copy of the spec
//! with the series value and then the axis value applied.
//!
//! Columns are `axis`, then one column per (metric, series) pair in
//! metric-major order, named `metric@param=value` when a series is set.

use raftjamsec_core::authn::{
    monte_carlo_auth, pfa_closed_form, pfa_exact, pmc_closed_form, pmd, AuthRealization, PmdNormalization,
};
use raftjamsec_core::coverage::{coverage_dl, coverage_joint, coverage_ul};
use raftjamsec_core::mc::{estimate_coverage, estimate_joint_dependence};
use raftjamsec_core::netmodel::sample_field_seeded;
use raftjamsec_core::raftsim::{attack_impact_report, JammerPlacement};
use raftjamsec_core::{AuthRegistry, CoverageQuery, EveEnsemble, GeometryMode, Link, McConfig, RoundConfig};

use crate::csv::Table;
use crate::error::{CliError, Result};
use crate::spec::{EveSource, ExperimentKind, ExperimentSpec};
use crate::validate::run_validation;

type Eval = fn(&ExperimentSpec) -> raftjamsec_core::Result<Vec<f64>>;

pub fn run_experiment(spec: &ExperimentSpec) -> Result<Table> {
    let (metrics, eval): (&[&str], Eval) = match spec.kind {
        ExperimentKind::CoverageSweep | ExperimentKind::JammingAreaSweep => {
            (&["joint_cf", "joint_mc", "joint_se"], eval_coverage)
        }
        ExperimentKind::JammingDistanceSweep => {
            (&["ul_cf", "dl_cf", "joint_cf", "ul_mc", "dl_mc", "joint_mc", "ul_se", "dl_se", "joint_se"], eval_distance)
        }
        ExperimentKind::AuthErrorSweep => (
            &[
                "pfa_cf",
                "pfa_exact",
                "pmd_cf",
                "pmd_union",
                "pmc_cf",
                "pfa_mc",
                "pmd_mc",
                "pmc_mc",
                "pfa_se",
                "pmd_se",
                "pmc_se",
            ],
            eval_auth_errors,
        ),
        ExperimentKind::Roc => (&["epsilon", "pd_cf", "pd_union", "pd_mc", "pd_se"], eval_roc),
        ExperimentKind::Consensus => (
            &[
                "consensus_off",
                "consensus_on",
                "consensus_off_se",
                "consensus_on_se",
                "spoof_pass",
                "spoof_accept",
                "legit_reject",
                "false_alarm_bound",
            ],
            eval_consensus,
        ),
        ExperimentKind::Validate => return run_validation(spec).map(|(t, _)| t),
    };
    let mut table = sweep(spec, metrics, eval)?;
    if spec.kind == ExperimentKind::Roc {
        table.rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
    }
    Ok(table)
}

fn sweep(spec: &ExperimentSpec, metrics: &[&str], eval: Eval) -> Result<Table> {
    let series: Vec<(Option<String>, ExperimentSpec)> = match &spec.series {
        None => vec![(None, spec.clone())],
        Some(s) => s
            .values
            .iter()
            .map(|&v| {
                let mut p = spec.clone();
                p.set(s.param, v).map_err(|m| CliError::spec(0, m))?;
                Ok((Some(format!("{}={v}", s.param)), p))
            })
            .collect::<Result<_>>()?,
    };
    let mut header = vec![spec.sweep.param.name().to_string()];
    for m in metrics {
        for (label, _) in &series {
            header.push(match label {
                Some(l) => format!("{m}@{l}"),
                None => m.to_string(),
            });
        }
    }
    let mut table = Table::new(header);
    let ns = series.len();
    for x in spec.sweep.values() {
        let mut row = vec![0.0; 1 + metrics.len() * ns];
        row[0] = x;
        for (k, (label, base)) in series.iter().enumerate() {
            let mut p = base.clone();
            let point = match label {
                Some(l) => format!("{}={x}, {l}", spec.sweep.param),
                None => format!("{}={x}", spec.sweep.param),
            };
            p.set(spec.sweep.param, x).map_err(|m| CliError::spec(0, m))?;
            log::debug!("evaluating {point}");
            let values = eval(&p).map_err(|source| CliError::Numeric { point: point.clone(), source })?;
            for (j, v) in values.into_iter().enumerate() {
                if !v.is_finite() {
                    return Err(CliError::Numeric {
                        point,
                        source: raftjamsec_core::Error::Domain(format!("{} is not finite", metrics[j])),
                    });
                }
                row[1 + j * ns + k] = v;
            }
        }
        table.push(row);
    }
    Ok(table)
}

fn mc_config(p: &ExperimentSpec) -> McConfig {
    McConfig::new(p.trials, p.seed)
}

fn query(p: &ExperimentSpec, link: Link) -> CoverageQuery {
    CoverageQuery::new(p.ch, p.deployment(), p.annulus(), link).with_rho_fr(p.rho_fr())
}

fn eval_coverage(p: &ExperimentSpec) -> raftjamsec_core::Result<Vec<f64>> {
    let q = query(p, Link::Joint);
    let cf = coverage_joint(&q)?.probability;
    let mc = estimate_coverage(&q, &mc_config(p), GeometryMode::PaperOriginReferenced)?;
    Ok(vec![cf, mc.mean, mc.std_error])
}

fn eval_distance(p: &ExperimentSpec) -> raftjamsec_core::Result<Vec<f64>> {
    let q = query(p, Link::Joint);
    let ul = coverage_ul(&q)?.probability;
    let dl = coverage_dl(&q)?.probability;
    let joint = coverage_joint(&q)?.probability;
    let d = estimate_joint_dependence(&q, &mc_config(p))?;
    Ok(vec![
        ul,
        dl,
        joint,
        d.uplink.mean,
        d.downlink.mean,
        d.joint.mean,
        d.uplink.std_error,
        d.downlink.std_error,
        d.joint.std_error,
    ])
}

/// Registry and impersonators of the pinned realization at the point's
/// link quality and threshold.
pub fn auth_setup(p: &ExperimentSpec) -> raftjamsec_core::Result<(AuthRegistry, EveEnsemble)> {
    let a = &p.auth;
    let real = AuthRealization::sample(a.m, a.n, p.radius, a.realization_seed);
    let reg = real.registry(p.ch.alpha, a.sigma(), 0.0)?;
    let reg = match a.epsilon {
        Some(eps) => reg.with_epsilon(eps)?,
        None => reg.with_target_pfa(a.target_pfa)?,
    };
    let eves = match a.eves {
        EveSource::Realization => real.eve_ensemble(p.ch.alpha)?,
        EveSource::Uniform => EveEnsemble::uniform_prior(a.n)?,
    };
    Ok((reg, eves))
}

fn eval_auth_errors(p: &ExperimentSpec) -> raftjamsec_core::Result<Vec<f64>> {
    let (reg, eves) = auth_setup(p)?;
    let mc = monte_carlo_auth(&reg, &eves, &mc_config(p))?;
    Ok(vec![
        pfa_closed_form(&reg),
        pfa_exact(&reg),
        pmd(&reg, &eves, p.auth.pmd)?,
        pmd(&reg, &eves, PmdNormalization::Union)?,
        pmc_closed_form(&reg, p.auth.boundary),
        mc.pfa.mean,
        mc.pmd.mean,
        mc.pmc.mean,
        mc.pfa.std_error,
        mc.pmd.std_error,
        mc.pmc.std_error,
    ])
}

fn eval_roc(p: &ExperimentSpec) -> raftjamsec_core::Result<Vec<f64>> {
    let (reg, eves) = auth_setup(p)?;
    let mc = monte_carlo_auth(&reg, &eves, &mc_config(p))?;
    Ok(vec![
        reg.epsilon,
        1.0 - pmd(&reg, &eves, p.auth.pmd)?,
        1.0 - pmd(&reg, &eves, PmdNormalization::Union)?,
        1.0 - mc.pmd.mean,
        mc.pmd.std_error,
    ])
}

fn eval_consensus(p: &ExperimentSpec) -> raftjamsec_core::Result<Vec<f64>> {
    let mut dep = p.deployment();
    dep.seed = p.consensus.field_seed;
    let jam = p.annulus();
    let field = sample_field_seeded(&dep, &jam)?;
    let sigma = p.auth.sigma();
    let eps = match p.auth.epsilon {
        Some(e) => e,
        None => raftjamsec_core::authn::threshold_for_pfa(p.auth.target_pfa, sigma)?,
    };
    let mut cfg = RoundConfig::from_field(field, p.ch, p.radius, sigma, eps, p.seed)?;
    cfg.jammers = JammerPlacement::Resample(jam);
    if p.consensus.n_eves > 0 {
        cfg.eves = Some(EveEnsemble::uniform_prior(p.consensus.n_eves)?);
    }
    let r = attack_impact_report(&cfg, p.trials, 0)?;
    Ok(vec![
        r.consensus_auth_off.mean,
        r.consensus_auth_on.mean,
        r.consensus_auth_off.std_error,
        r.consensus_auth_on.std_error,
        r.spoof_pass_rate.mean,
        r.spoof_acceptance_rate.mean,
        r.legitimate_rejection_rate.mean,
        r.false_alarm_bound,
    ])
}
