//! Acceptance criteria AC1-AC9. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fail. Positional arguments select criteria by name
//! (`cargo test --test acceptance -- ac3 ac9`).

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use raftjamsec_cli::csv::Table;
use raftjamsec_cli::experiments::auth_setup;
use raftjamsec_cli::run_experiment;
use raftjamsec_cli::spec::{ExperimentKind, ExperimentSpec, Param, Series};
use raftjamsec_cli::validate::Check;
use raftjamsec_core::authn::{monte_carlo_auth, pmd, PmdNormalization};
use raftjamsec_core::coverage::{
    coverage_dl, coverage_joint, coverage_ul, laplace_interference, laplace_interference_using, CoverageMethod,
    LinkBudget,
};
use raftjamsec_core::mc::estimate_link_coverage;
use raftjamsec_core::netmodel::{sample_field_seeded, REFERENCE_FOLLOWER_INTENSITY as RHO_F};
use raftjamsec_core::raftsim::{consensus_probability, majority_probability};
use raftjamsec_core::rng::stream;
use raftjamsec_core::specfun::{hyp2f1, q_function, q_inverse};
use raftjamsec_core::{
    ChannelParams, CoverageQuery, DeploymentConfig, JammerAnnulus, Link, McConfig, QuadratureSpec, RoundConfig,
};
use rand::Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

type Criterion = (&'static str, Duration, fn() -> Verdict);

fn main() {
    let filters: Vec<String> =
        std::env::args().skip(1).filter(|a| !a.starts_with('-')).map(|a| a.to_lowercase()).collect();
    let criteria: [Criterion; 9] = [
        ("AC1", Duration::from_secs(1), ac1_special_functions),
        ("AC2", Duration::from_secs(30), ac2_closed_form_vs_quadrature),
        ("AC3", Duration::from_secs(300), ac3_coverage_vs_mc),
        ("AC4", Duration::from_secs(120), ac4_figure_shapes),
        ("AC5", Duration::from_secs(120), ac5_auth_vs_mc),
        ("AC6", Duration::from_secs(30), ac6_detection_claim),
        ("AC7", Duration::from_secs(30), ac7_error_curves),
        ("AC8", Duration::from_secs(180), ac8_consensus_composition),
        ("AC9", Duration::from_secs(300), ac9_determinism),
    ];
    let mut failed = 0;
    for (name, budget, run) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| f == &name.to_lowercase()) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        let took = start.elapsed();
        let in_time = took <= budget;
        let pass = v.pass && in_time;
        if !pass {
            failed += 1;
        }
        let time_note = if in_time { String::new() } else { format!(" [over budget {:?}]", budget) };
        println!("{name} {} ({:.2}s){time_note}: {}", if pass { "PASS" } else { "FAIL" }, took.as_secs_f64(), v.detail);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

fn ac1_special_functions() -> Verdict {
    let mut worst_id = rel(hyp2f1(1.0, 0.5, 1.5, -1.0).unwrap(), PI / 4.0);
    for y in [0.1, 1.0, 10.0, 100.0] {
        worst_id = worst_id.max(rel(hyp2f1(1.0, 1.0, 2.0, -y).unwrap(), (1.0 + y).ln() / y));
    }
    let mut worst_rt = 0.0f64;
    let mut worst_x = 0.0;
    let mut last_bad = None;
    for k in 0..=12_000 {
        let x = -6.0 + k as f64 * 1e-3;
        let back = q_inverse(q_function(x).unwrap()).unwrap();
        let err = (back - x).abs();
        if err > 1e-10 {
            last_bad = Some(x);
        }
        if err > worst_rt {
            worst_rt = err;
            worst_x = x;
        }
    }
    let pass = worst_id <= 1e-9 && worst_rt <= 1e-10;
    let tail = last_bad.map_or(String::new(), |x| format!(", largest failing x = {x:.3}"));
    verdict(
        pass,
        format!("identities max rel err {worst_id:.2e}; Q round trip max err {worst_rt:.2e} at x = {worst_x:.3}{tail}"),
    )
}

/// Adaptive Simpson on `[a, b]`, independent of the library quadrature.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `exp(-2 pi rho_J int_{z1}^{z2} t / (1 + t^alpha / (gamma beta r^alpha)) dt)`.
fn laplace_oracle(r: f64, b: &LinkBudget, z1: f64, z2: f64, rho_j: f64) -> f64 {
    let k = b.gamma * b.beta * r.powf(b.alpha);
    let g = move |t: f64| t / (1.0 + t.powf(b.alpha) / k);
    // Split at the knee t = k^(1/alpha), where the integrand turns over.
    let knee = k.powf(1.0 / b.alpha).clamp(z1, z2);
    let mut integral = 0.0;
    for (lo, hi) in [(z1, knee), (knee, z2)] {
        if hi > lo {
            integral += simpson(&g, lo, hi, 1e-13 * (hi * hi - lo * lo).max(1e-300));
        }
    }
    (-2.0 * PI * rho_j * integral).exp()
}

fn ac2_closed_form_vs_quadrature() -> Verdict {
    let quad = QuadratureSpec::default();
    let mut rng = stream(2, 0);
    let rs: Vec<f64> = (0..5).map(|_| rng.random_range(10.0..=400.0)).collect();
    let betas: Vec<f64> = (0..4).map(|_| rng.random_range(-30.0..=0.0)).collect();
    let pairs = [(0.0, 100.0), (50.0, 300.0), (100.0, 150.0), (200.0, 400.0)];
    let rhos = [RHO_F / 4.0, RHO_F, 4.0 * RHO_F];
    let (mut worst_cf, mut worst_z0, mut cells_cf, mut positive_exponents) = (0.0f64, 0.0f64, 0, 0);
    let mut coverage_in_range = true;
    for alpha in [2.5, 3.0, 3.5, 4.0] {
        for &beta in &betas {
            let mut ch = ChannelParams::reference().with_betas_db(beta, beta);
            ch.alpha = alpha;
            for &(z1, z2) in &pairs {
                for &rho in &rhos {
                    let jam = JammerAnnulus::new(z1, z2, rho).unwrap();
                    for b in [LinkBudget::downlink(&ch), LinkBudget::uplink(&ch)] {
                        for &r in &rs {
                            let l = laplace_interference(r, &b, &jam, &quad).unwrap();
                            let oracle = laplace_oracle(r, &b, z1, z2, rho);
                            if l.exponent > 0.0 {
                                positive_exponents += 1;
                            }
                            if z1 > 0.0 {
                                worst_cf = worst_cf.max(rel(l.value, oracle));
                                cells_cf += 1;
                            } else {
                                worst_z0 = worst_z0.max(rel(l.value, oracle));
                            }
                        }
                    }
                    let q = CoverageQuery::new(ch, DeploymentConfig::reference(0), jam, Link::Joint);
                    for p in [coverage_dl(&q), coverage_ul(&q), coverage_joint(&q)] {
                        let p = p.unwrap().probability;
                        coverage_in_range &= (0.0..=1.0).contains(&p);
                    }
                }
            }
        }
    }
    // Overlap: both paths at the same small inner radius.
    let mut worst_overlap = 0.0f64;
    let b = LinkBudget::downlink(&ChannelParams::reference().with_betas_db(-10.0, -10.0));
    for z1 in [1e-3, 1e-2, 1e-1, 1.0] {
        let jam = JammerAnnulus::new(z1, 300.0, RHO_F).unwrap();
        for &r in &rs {
            let qv = laplace_interference_using(r, &b, &jam, &quad, CoverageMethod::Quadrature).unwrap();
            let cv = laplace_interference_using(r, &b, &jam, &quad, CoverageMethod::ClosedForm).unwrap();
            worst_overlap = worst_overlap.max(rel(qv.value, cv.value));
        }
    }
    let pass = worst_cf <= 1e-6 && worst_overlap <= 1e-5 && coverage_in_range && positive_exponents == 0;
    verdict(
        pass,
        format!(
            "{cells_cf} z1>0 cells max rel err {worst_cf:.2e} (z1=0 cells via quadrature {worst_z0:.2e}); overlap max rel err {worst_overlap:.2e}; coverage in [0,1]: {coverage_in_range}; positive exponents: {positive_exponents}"
        ),
    )
}

/// Validation CSV from the binary, shared by AC3, AC5 and AC9.
fn validate_csv(tag: &str) -> (Vec<u8>, i32) {
    let dir = std::env::temp_dir().join(format!("raftjamsec-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join(format!("validate-{tag}.csv"));
    let status = Command::new(env!("CARGO_BIN_EXE_raftjamsec"))
        .args(["validate", "--seed", "42", "--out"])
        .arg(&out)
        .status()
        .expect("run raftjamsec");
    let bytes = std::fs::read(&out).expect("validate CSV written");
    (bytes, status.code().unwrap_or(-1))
}

fn first_validation() -> &'static (Vec<u8>, i32) {
    static RUN: std::sync::OnceLock<(Vec<u8>, i32)> = std::sync::OnceLock::new();
    RUN.get_or_init(|| validate_csv("a"))
}

fn cached_validation() -> &'static Table {
    static TABLE: std::sync::OnceLock<Table> = std::sync::OnceLock::new();
    TABLE.get_or_init(|| Table::parse(std::str::from_utf8(&first_validation().0).unwrap()).unwrap())
}

fn z_summary(t: &Table, checks: &[Check]) -> (f64, usize, String) {
    let codes: Vec<f64> = checks.iter().map(|&c| c as u8 as f64).collect();
    let (mut worst, mut n, mut at) = (0.0f64, 0, String::new());
    for row in &t.rows {
        if codes.contains(&row[0]) {
            n += 1;
            if row[6].abs() > worst {
                worst = row[6].abs();
                at = format!("check {} point {}", row[0], row[1]);
            }
        }
    }
    (worst, n, at)
}

fn ac3_coverage_vs_mc() -> Verdict {
    let t = cached_validation();
    let (worst, n, at) = z_summary(t, &[Check::CoverageDownlink, Check::CoverageUplink, Check::CoverageJoint]);
    verdict(n == 63 && worst <= 3.0, format!("{n} points (DL/UL/joint), max |z| = {worst:.3} at {at}"))
}

fn ac5_auth_vs_mc() -> Verdict {
    let t = cached_validation();
    let (worst, n, at) = z_summary(t, &[Check::FalseAlarm, Check::MissedDetection, Check::Misclassification]);
    let (printed, _, _) = z_summary(t, &[Check::FalseAlarmPrinted, Check::MissedDetectionPrinted]);
    verdict(
        n == 60 && worst <= 3.0,
        format!(
            "{n} comparisons (exact P_fa, union P_md, P_mc), max |z| = {worst:.3} at {at}; printed 2Q and 1/M forms reach |z| = {printed:.1}"
        ),
    )
}

/// Every adjacent step moves in the allowed direction by more than `tol`
/// at most. `tol[i]` is the slack for step `i -> i+1`.
fn monotone(v: &[f64], increasing: bool, tol: &[f64]) -> bool {
    v.windows(2).zip(tol).all(|(w, &t)| if increasing { w[1] >= w[0] - t } else { w[1] <= w[0] + t })
}

fn step_slack(se: &[f64]) -> Vec<f64> {
    se.windows(2).map(|w| w[0].max(w[1])).collect()
}

fn col(t: &Table, name: &str) -> Vec<f64> {
    t.column(name).unwrap_or_else(|| panic!("missing column {name}"))
}

fn ac4_figure_shapes() -> Verdict {
    let mut notes = Vec::new();
    let mut pass = true;

    // (a) joint coverage against beta, several jammer densities
    let t = run_experiment(&ExperimentSpec::defaults(ExperimentKind::CoverageSweep)).unwrap();
    let labels = ["rho_jammer_mult=1", "rho_jammer_mult=2", "rho_jammer_mult=4"];
    let mut a = true;
    for l in labels {
        let cf = col(&t, &format!("joint_cf@{l}"));
        let mc = col(&t, &format!("joint_mc@{l}"));
        let se = col(&t, &format!("joint_se@{l}"));
        a &= monotone(&cf, false, &vec![0.0; cf.len()]) && monotone(&mc, false, &step_slack(&se));
    }
    for row in 0..t.rows.len() {
        let cf: Vec<f64> = labels.iter().map(|l| col(&t, &format!("joint_cf@{l}"))[row]).collect();
        let mc: Vec<f64> = labels.iter().map(|l| col(&t, &format!("joint_mc@{l}"))[row]).collect();
        let se: Vec<f64> = labels.iter().map(|l| col(&t, &format!("joint_se@{l}"))[row]).collect();
        a &= monotone(&cf, false, &[0.0; 2]) && monotone(&mc, false, &step_slack(&se));
    }
    notes.push(format!("(a) beta and density: {}", ok(a)));
    pass &= a;

    // (b) joint coverage against the outer jamming radius
    let t = run_experiment(&ExperimentSpec::defaults(ExperimentKind::JammingAreaSweep)).unwrap();
    let b = monotone(&col(&t, "joint_cf"), false, &[0.0; 64])
        && monotone(&col(&t, "joint_mc"), false, &step_slack(&col(&t, "joint_se")));
    notes.push(format!("(b) z2: {}", ok(b)));
    pass &= b;

    // (c) jamming distance: UL on the closed form, DL and joint on
    // receiver-referenced simulation
    let mut spec = ExperimentSpec::defaults(ExperimentKind::JammingDistanceSweep);
    spec.series = Some(Series { param: Param::BetaDb, values: vec![-30.0, -20.0] });
    let t = run_experiment(&spec).unwrap();
    let mut c = true;
    for beta in ["beta_db=-30", "beta_db=-20"] {
        let ul = monotone(&col(&t, &format!("ul_cf@{beta}")), true, &[0.0; 64]);
        let dl = monotone(&col(&t, &format!("dl_mc@{beta}")), false, &step_slack(&col(&t, &format!("dl_se@{beta}"))));
        let joint = col(&t, &format!("joint_mc@{beta}"));
        let se = col(&t, &format!("joint_se@{beta}"));
        let (k, peak) =
            joint.iter().enumerate().fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let last = joint.len() - 1;
        let hump = k > 0 && k < last && peak - joint[0] > se[k].max(se[0]) && peak - joint[last] > se[k].max(se[last]);
        let z1 = col(&t, "z1")[k];
        notes.push(format!("(c) {beta}: UL {} DL {} joint peak at z1 = {z1} {}", ok(ul), ok(dl), ok(hump)));
        c &= ul && dl && hump;
    }
    pass &= c;
    verdict(pass, notes.join("; "))
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "VIOLATED"
    }
}

fn ac6_detection_claim() -> Verdict {
    let mut spec = ExperimentSpec::defaults(ExperimentKind::Roc);
    spec.auth.lq_db = 10.0;
    spec.auth.target_pfa = 0.1;
    let (reg, eves) = auth_setup(&spec).unwrap();
    let union = 1.0 - pmd(&reg, &eves, PmdNormalization::Union).unwrap();
    let printed = 1.0 - pmd(&reg, &eves, PmdNormalization::AsPrinted).unwrap();
    let mc = monte_carlo_auth(&reg, &eves, &McConfig::new(1_000_000, spec.seed)).unwrap().pmd;
    let pd_mc = 1.0 - mc.mean;
    verdict(
        union > 0.95 && printed > 0.95 && pd_mc > 0.95,
        format!(
            "seed {}: P_d closed form {union:.4} (exact union), {printed:.4} (printed 1/M); MC {pd_mc:.4} +/- {:.4}",
            spec.auth.realization_seed, mc.std_error
        ),
    )
}

fn ac7_error_curves() -> Verdict {
    let mut spec = ExperimentSpec::defaults(ExperimentKind::AuthErrorSweep);
    spec.trials = 1000;
    let t = run_experiment(&spec).unwrap();
    let strictly_down = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0));
    let mut pass = true;
    let mut bad = Vec::new();
    for eps in ["epsilon=0.1", "epsilon=0.5", "epsilon=1"] {
        for m in ["pfa_cf", "pfa_exact", "pmd_cf", "pmd_union"] {
            if !strictly_down(&col(&t, &format!("{m}@{eps}"))) {
                pass = false;
                bad.push(format!("{m}@{eps}"));
            }
        }
    }
    let pmc: Vec<Vec<f64>> =
        ["epsilon=0.1", "epsilon=0.5", "epsilon=1"].iter().map(|e| col(&t, &format!("pmc_cf@{e}"))).collect();
    let identical = pmc.iter().all(|v| v.iter().zip(&pmc[0]).all(|(a, b)| a.to_bits() == b.to_bits()));
    pass &= identical;
    let detail = if bad.is_empty() {
        format!("P_fa and P_md decreasing over LQ 0..20 dB at each eps; P_mc bit-identical across eps: {identical}")
    } else {
        format!("not decreasing: {}; P_mc bit-identical: {identical}", bad.join(", "))
    };
    verdict(pass, detail)
}

/// SIR threshold for the composition check, chosen so that the majority
/// probability is well inside (0, 1).
const AC8_BETA_DB: f64 = -10.0;
const AC8_FIELD_SEED: u64 = 42;

fn ac8_consensus_composition() -> Verdict {
    let ch = ChannelParams::reference().with_betas_db(AC8_BETA_DB, AC8_BETA_DB);
    let dep = DeploymentConfig::reference(AC8_FIELD_SEED);
    let jam = JammerAnnulus::new(50.0, 300.0, RHO_F).unwrap();
    let field = sample_field_seeded(&dep, &jam).unwrap();
    let m = field.followers.len();
    let p: Vec<f64> = (0..m)
        .map(|i| {
            estimate_link_coverage(&field, i, &ch, Link::Joint, &McConfig::new(100_000, 1000 + i as u64)).unwrap().mean
        })
        .collect();
    let predicted = majority_probability(&p);
    let cfg = RoundConfig::from_field(field, ch, dep.radius, 1.0, 1.0, 7).unwrap();
    let observed = consensus_probability(&cfg, 10_000, 0).unwrap();
    let diff = (observed.mean - predicted).abs();
    verdict(
        diff <= 0.03,
        format!(
            "M = {m}, {} jammers, beta = {AC8_BETA_DB} dB: predicted {predicted:.4}, observed {:.4} +/- {:.4}, |diff| = {diff:.4}",
            cfg.field.jammers.len(),
            observed.mean,
            observed.std_error
        ),
    )
}

fn ac9_determinism() -> Verdict {
    let (a, code_a) = first_validation();
    let (b, code_b) = validate_csv("b");
    let same = *a == b;
    verdict(
        same,
        format!(
            "two runs of `validate --seed 42`: {} bytes each, identical: {same}, exit codes {code_a}/{code_b}",
            a.len()
        ),
    )
}
