use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use raftjamsec_cli::{
    emit_plotdata, run_experiment, run_validation, CliError, ExperimentKind, ExperimentSpec, Result, Table, THREADS_ENV,
};

/// Jamming-resilient RAFT experiments: coverage, authentication and consensus.
#[derive(Parser)]
#[command(name = "raftjamsec", version, after_help = "Set RAFTJAMSEC_THREADS to pin the number of worker threads.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Joint coverage against SIR threshold for several jammer densities.
    Coverage(RunArgs),
    /// Joint coverage against the outer radius of the jamming region.
    Jamarea(RunArgs),
    /// Uplink, downlink and joint coverage against jamming distance.
    Jamdist(RunArgs),
    /// Authentication error probabilities against link quality.
    Autherr(RunArgs),
    /// Detection against false-alarm rate.
    Roc(RunArgs),
    /// Consensus with authentication on and off under impersonation.
    Consensus(RunArgs),
    /// Closed forms against simulation; exits 1 if any deviation exceeds the limit.
    Validate(RunArgs),
    /// Gnuplot data blocks and script from a result CSV.
    Plotdata(PlotArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment spec file; built-in defaults when omitted.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials per point (rounds for consensus).
    #[arg(long)]
    trials: Option<u64>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    csv: PathBuf,
    /// Directory for `<stem>.dat` and `<stem>.gp`; next to the CSV when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| format!("{THREADS_ENV} must be a positive integer, got '{v}'"))?;
    if n == 0 {
        return Err(format!("{THREADS_ENV} must be a positive integer, got '{v}'"));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn run(command: Command) -> Result<()> {
    let (kind, args) = match command {
        Command::Coverage(a) => (ExperimentKind::CoverageSweep, a),
        Command::Jamarea(a) => (ExperimentKind::JammingAreaSweep, a),
        Command::Jamdist(a) => (ExperimentKind::JammingDistanceSweep, a),
        Command::Autherr(a) => (ExperimentKind::AuthErrorSweep, a),
        Command::Roc(a) => (ExperimentKind::Roc, a),
        Command::Consensus(a) => (ExperimentKind::Consensus, a),
        Command::Validate(a) => (ExperimentKind::Validate, a),
        Command::Plotdata(a) => return plotdata(&a),
    };
    let spec = load_spec(kind, &args)?;
    if spec.kind == ExperimentKind::Validate {
        let (table, summary) = run_validation(&spec)?;
        write_csv(&table, spec.out.as_deref())?;
        if let Some(w) = summary.worst() {
            eprintln!("worst gated comparison: check {} point {} z = {:.3}", w.check as u8, w.point, w.z());
        }
        eprintln!(
            "max |z| = {:.3} over {} gated comparisons (limit {}); printed forms max |z| = {:.3}",
            summary.gated_max_abs_z(),
            summary.comparisons.iter().filter(|c| c.check.gated()).count(),
            summary.z_limit,
            summary.informational_max_abs_z(),
        );
        if !summary.passed() {
            return Err(CliError::ValidationFailed { max_z: summary.gated_max_abs_z(), limit: summary.z_limit });
        }
        eprintln!("PASS");
        return Ok(());
    }
    let table = run_experiment(&spec)?;
    write_csv(&table, spec.out.as_deref())
}

fn load_spec(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentSpec> {
    let mut spec = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let spec = ExperimentSpec::parse(&text, Some(kind)).map_err(|e| match e {
                CliError::Spec { line, message, .. } => {
                    CliError::Spec { path: path.display().to_string(), line, message }
                }
                other => other,
            })?;
            if spec.kind != kind {
                return Err(CliError::Spec {
                    path: path.display().to_string(),
                    line: 0,
                    message: format!("spec kind '{}' does not match subcommand '{}'", spec.kind, kind.subcommand()),
                });
            }
            spec
        }
        None => ExperimentSpec::defaults(kind),
    };
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if let Some(t) = args.trials {
        if t == 0 {
            return Err(CliError::Spec { path: "--trials".into(), line: 0, message: "must be at least 1".into() });
        }
        spec.trials = t;
    }
    if let Some(o) = &args.out {
        spec.out = Some(o.clone());
    }
    Ok(spec)
}

fn write_csv(table: &Table, out: Option<&Path>) -> Result<()> {
    let text = table.to_csv();
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn plotdata(args: &PlotArgs) -> Result<()> {
    let text = fs::read_to_string(&args.csv).map_err(|e| CliError::io(&args.csv, e))?;
    let table = Table::parse(&text)?;
    let stem = args.csv.file_stem().map_or("plot".into(), |s| s.to_string_lossy().into_owned());
    let dir = match &args.out {
        Some(d) => d.clone(),
        None => args.csv.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let data_name = format!("{stem}.dat");
    let plot = emit_plotdata(&table, &data_name)?;
    let data_path = dir.join(&data_name);
    let script_path = dir.join(format!("{stem}.gp"));
    fs::write(&data_path, plot.data).map_err(|e| CliError::io(&data_path, e))?;
    fs::write(&script_path, plot.script).map_err(|e| CliError::io(&script_path, e))?;
    eprintln!("{} blocks -> {}", plot.labels.len(), data_path.display());
    Ok(())
}
