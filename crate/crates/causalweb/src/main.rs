//! Command-line surface: simulate the bundled systems, analyze a CSV into a
//! decomposition result, run the missing-process diagnostic, export causal
//! webs, and reproduce the reference tables.
//!
//! Exit codes: 0 success, 1 validation error, 2 numerical failure.
//! `CAUSALWEB_THREADS` overrides the worker count from the environment.

use causalweb::bench;
use causalweb::certainty::ReferenceKind;
use causalweb::decomposition::{full_decomposition, DecompositionOptions};
use causalweb::diagnostics::{confounder_scan, missing_process_test, DEFAULT_REL_CHANGE_THRESHOLD};
use causalweb::error::{Error, Result};
use causalweb::estimators::EstimatorParams;
use causalweb::io::{read_csv, read_result, write_csv, write_result};
use causalweb::model::{AnalysisSpec, DriverSpec};
use causalweb::preprocess::DEFAULT_TAIL_CUT;
use causalweb::simulators::{
    simulate_coupled_lorenz, simulate_lorenz63, simulate_model, LorenzParams, NoiseNotation,
    LORENZ_X0,
};
use causalweb::web::{export_web, WebFormat};
use clap::{Args, Parser, Subcommand};
use std::io::Write as _;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "causalweb",
    about = "Per-driver and per-interaction causal strength decomposition for time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one of the bundled reference systems as CSV.
    Simulate(SimulateArgs),
    /// Decompose a target series against lagged drivers from a CSV file.
    Analyze(AnalyzeArgs),
    /// Analyze plus the target-perturbation missing-process test.
    Diagnose(DiagnoseArgs),
    /// Render a stored result as a causal web (DOT or JSON).
    ExportWeb(ExportWebArgs),
    /// Regenerate a reference table and print observed vs expected values.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// 1|2|3|4|5|6|confounder|lorenz63|coupled-lorenz
    #[arg(long)]
    model: String,
    #[arg(long)]
    steps: usize,
    #[arg(long)]
    seed: u64,
    /// Coupling strength for coupled-lorenz.
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// Integration step for the Lorenz systems.
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Read N(0,s) noise magnitudes as a variance or a std.
    #[arg(long, default_value = "variance")]
    noise_notation: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct AnalyzeArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    target: String,
    /// Target lead relative to driver time (>= 1).
    #[arg(long, default_value_t = 1)]
    lead: usize,
    /// Driver blocks: "name:lag[,lag];name:lag[,lag];..."
    #[arg(long)]
    drivers: String,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value = "cauchy")]
    reference: String,
    #[arg(long, default_value_t = DEFAULT_TAIL_CUT)]
    tail_cut: f64,
    /// Worker threads (CAUSALWEB_THREADS overrides).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    analyze: AnalyzeArgs,
    /// Observational noise std of the target; the perturbation uses 3x this.
    #[arg(long)]
    obs_noise: f64,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    /// Relative-change threshold below which a missing process is flagged.
    #[arg(long, default_value_t = DEFAULT_REL_CHANGE_THRESHOLD)]
    threshold: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExportWebArgs {
    #[arg(long)]
    result: PathBuf,
    /// dot|json
    #[arg(long)]
    format: String,
    /// Keep hyperedges with |normalized strength| at or above this.
    #[arg(long, default_value_t = 0.01)]
    threshold: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// 3|5|6|7|coupled
    #[arg(long)]
    table: String,
    /// recorded|variance|std; `recorded` is the convention under which the
    /// published values reproduce (see the README).
    #[arg(long, default_value = "recorded")]
    noise_notation: String,
    #[arg(long)]
    threads: Option<usize>,
}

fn effective_threads(flag: Option<usize>) -> Result<Option<usize>> {
    match std::env::var("CAUSALWEB_THREADS") {
        Ok(v) => {
            let n: usize = v
                .parse()
                .map_err(|_| Error::InvalidParam(format!("CAUSALWEB_THREADS='{v}' is not a number")))?;
            Ok(Some(n))
        }
        Err(_) => Ok(flag),
    }
}

fn parse_drivers(spec: &str) -> Result<Vec<DriverSpec>> {
    let mut drivers = Vec::new();
    for part in spec.split(';').filter(|p| !p.trim().is_empty()) {
        let (name, lags) = part.split_once(':').ok_or_else(|| {
            Error::InvalidParam(format!(
                "driver '{part}' is not of the form name:lag[,lag]"
            ))
        })?;
        let lags: Vec<usize> = lags
            .split(',')
            .map(|l| {
                l.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidParam(format!("bad lag '{l}' in driver '{part}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        drivers.push(DriverSpec::new(name.trim(), lags)?);
    }
    if drivers.is_empty() {
        return Err(Error::InvalidParam("no drivers given".into()));
    }
    Ok(drivers)
}

fn build_spec(args: &AnalyzeArgs) -> Result<AnalysisSpec> {
    let mut params = EstimatorParams::default();
    params.k = args.k;
    let mut spec = AnalysisSpec::new(
        &args.target,
        args.lead,
        parse_drivers(&args.drivers)?,
        params,
        args.reference.parse::<ReferenceKind>()?,
    )?;
    spec.tail_cut = args.tail_cut;
    spec.validate()?;
    Ok(spec)
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let notation: NoiseNotation = args.noise_notation.parse()?;
    let ds = match args.model.as_str() {
        "lorenz63" => simulate_lorenz63(
            args.steps,
            args.dt,
            LorenzParams::default(),
            LORENZ_X0,
            0.01,
            args.seed,
        )?,
        "coupled-lorenz" => {
            simulate_coupled_lorenz(args.eps, args.steps, args.dt, 10_000, args.seed)?
        }
        model => simulate_model(model, args.steps, args.seed, notation)?,
    };
    write_csv(&ds, &args.out)?;
    eprintln!(
        "wrote {} series x {} steps to {}",
        ds.series().len(),
        ds.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let dataset = read_csv(&args.data)?;
    let spec = build_spec(&args)?;
    let opts = DecompositionOptions {
        threads: effective_threads(args.threads)?,
        ..Default::default()
    };
    let result = full_decomposition(&dataset, &spec, &opts)?;
    write_result(&result, &args.out)?;
    eprintln!(
        "decomposed {} drivers: I_full = {:.4} nats, cs_noise = {:.4} ({} reference)",
        result.drivers.len(),
        result.i_full,
        result.cs_noise,
        result.reference.kind()
    );
    Ok(())
}

fn cmd_diagnose(args: DiagnoseArgs) -> Result<()> {
    let dataset = read_csv(&args.analyze.data)?;
    let spec = build_spec(&args.analyze)?;
    let opts = DecompositionOptions {
        threads: effective_threads(args.analyze.threads)?,
        seed: Some(args.seed),
        ..Default::default()
    };
    let report = missing_process_test(
        &dataset,
        &spec,
        args.obs_noise,
        args.reps,
        args.seed,
        args.threshold,
        &opts,
    )?;
    let mut result = full_decomposition(&dataset, &spec, &opts)?;
    let confounders = confounder_scan(&result, causalweb::diagnostics::DEFAULT_CONFOUNDER_TOL)?;
    let mut diag = result.diagnostics.take().unwrap_or_default();
    diag.missing_process = Some(report.clone());
    diag.confounders = Some(confounders);
    result.diagnostics = Some(diag);
    write_result(&result, &args.analyze.out)?;
    eprintln!(
        "cs_noise base {:.4}, perturbed {:.4} +/- {:.4}, rel change {:.1}% -> {:?}",
        report.cs_noise_base,
        report.cs_noise_perturbed_mean,
        report.cs_noise_perturbed_std,
        100.0 * report.rel_change,
        report.verdict
    );
    Ok(())
}

fn cmd_export_web(args: ExportWebArgs) -> Result<()> {
    let result = read_result(&args.result)?;
    let format: WebFormat = args.format.parse()?;
    let rendered = export_web(&result, format, args.threshold)?;
    let mut f = std::fs::File::create(&args.out)?;
    f.write_all(rendered.as_bytes())?;
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let convention: bench::NoiseConvention = args.noise_notation.parse()?;
    let opts = DecompositionOptions {
        threads: effective_threads(args.threads)?,
        ..Default::default()
    };
    let reports = match args.table.as_str() {
        "3" => bench::run_table3(convention, &opts)?,
        "5" => bench::run_table5(convention, &opts)?,
        "6" => bench::run_table6(&opts)?,
        "7" => vec![bench::run_table7(&opts)?],
        "coupled" => vec![bench::run_coupled_bench(
            &[0.0, 2.0, 4.0, 6.0, 8.0, 9.0],
            &opts,
        )?],
        other => {
            return Err(Error::InvalidParam(format!(
                "unknown table '{other}' (expected 3|5|6|7|coupled)"
            )))
        }
    };
    let mut all_pass = true;
    for report in &reports {
        print!("{}", report.render());
        println!();
        all_pass &= report.all_pass();
    }
    if !all_pass {
        return Err(Error::Numerical("one or more bench rows failed".into()));
    }
    Ok(())
}

fn run() -> Result<()> {
    // clap renders its own message; treat usage problems as validation
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Diagnose(args) => cmd_diagnose(args),
        Command::ExportWeb(args) => cmd_export_web(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
