use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use nuar_core::linalg::{complex_vec_json, theory_bundle};
use nuar_core::montecarlo::{
    tail_grid, slow_rate_grid, fast_rate_grid, replication_rng, reports_csv, run_experiment, sweep, ExperimentConfig,
    Statistic,
};
use nuar_core::parse::{parse_bulk_list, parse_eigen_spec_json, parse_experiment_config_json, parse_path_csv};
use nuar_core::process::{simulate, InitialStatePolicy, NoiseModel};
use nuar_core::spectrum::{companion_model, sample_bulk_eigenvalues, ComplexDoc, EigenSpec, RateSchedule, UnitRootMode};
use nuar_core::{estimation, Complex64};

#[derive(Parser)]
#[command(name = "nuar", version, about = "Nearly-unstable AR(p) triangular arrays: simulate, fit, test")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one row and print it as `k,x` CSV.
    Simulate(SimulateArgs),
    /// Fit an AR(p) by least squares to a `k,x` CSV.
    Estimate(EstimateArgs),
    /// Print the second-order objects of a model as JSON.
    Theory(TheoryArgs),
    /// Run a Monte Carlo experiment; summary JSON on stdout.
    Experiment(ExperimentArgs),
    /// Run a grid of experiments; summaries as a JSON list.
    Sweep(SweepArgs),
}

fn parse_mode(s: &str) -> Result<UnitRootMode, String> {
    s.parse().map_err(|e: nuar_core::Error| e.to_string())
}

/// Comma-separated bulk list, kept as one flag value.
#[derive(Debug, Clone)]
struct BulkArg(Vec<Complex64>);

fn parse_bulk(s: &str) -> Result<BulkArg, String> {
    parse_bulk_list(s).map(BulkArg).map_err(|e| e.to_string())
}

fn parse_noise(s: &str) -> Result<NoiseModel, String> {
    s.parse().map_err(|e: nuar_core::Error| e.to_string())
}

fn parse_init(s: &str) -> Result<InitialStatePolicy, String> {
    s.parse().map_err(|e: nuar_core::Error| e.to_string())
}

fn parse_statistic(s: &str) -> Result<Statistic, String> {
    s.parse().map_err(|e: nuar_core::Error| e.to_string())
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// AR order.
    #[arg(long, default_value_t = 3)]
    p: usize,
    /// Rate exponent: v_n = n^alpha.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Rate constant: rho_n = 1 - c / v_n.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Limit unit root: +1, -1 or both.
    #[arg(long, default_value = "+1", allow_hyphen_values = true, value_parser = parse_mode)]
    lambda1: UnitRootMode,
    /// Rate constant of the negative root (two unit roots).
    #[arg(long)]
    d: Option<f64>,
    /// Rate exponent of the negative root (two unit roots).
    #[arg(long)]
    beta: Option<f64>,
    /// Fixed bulk eigenvalues, e.g. `0.5,-0.3` or `0.6@pi/4,0.6@-pi/4`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_bulk)]
    bulk: Option<BulkArg>,
    /// Margin used when the bulk is drawn at random.
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
}

impl ModelArgs {
    fn second(&self) -> Result<Option<RateSchedule>, nuar_core::Error> {
        match self.lambda1 {
            UnitRootMode::Both => Ok(Some(RateSchedule::new(self.d.unwrap_or(self.c), self.beta.unwrap_or(self.alpha))?)),
            _ => Ok(None),
        }
    }

    /// Bound on sampled bulk moduli at row `n`.
    fn spec_radius(&self, n: u64) -> Result<f64, nuar_core::Error> {
        let first = RateSchedule::new(self.c, self.alpha)?;
        first.check(n)?;
        let mut r = first.rho(n);
        if let Some(s) = self.second()? {
            s.check(n)?;
            r = r.min(s.rho(n));
        }
        Ok(r)
    }

    fn spec(&self, bulk: Vec<Complex64>) -> Result<EigenSpec, nuar_core::Error> {
        EigenSpec::new(self.p, self.lambda1, RateSchedule::new(self.c, self.alpha)?, self.second()?, bulk, self.eps)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 5000)]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// gaussian[:sigma2], laplace:scale, student:df, rademacher[:scale], zero.
    #[arg(long, default_value = "gaussian", value_parser = parse_noise)]
    noise: NoiseModel,
    /// zero, stationary or fixed:x0,x-1,...
    #[arg(long, default_value = "zero", allow_hyphen_values = true, value_parser = parse_init)]
    init: InitialStatePolicy,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// Input CSV with header `k,x`; the first p rows form the initial state.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    p: usize,
}

#[derive(Args)]
struct TheoryArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Read the eigenvalue description from a JSON file instead of flags.
    #[arg(long, conflicts_with_all = ["bulk", "lambda1", "d", "beta"])]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 5000)]
    n: u64,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// JSON configuration; replaces the model and run flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 5000)]
    n: u64,
    #[arg(long, default_value_t = 3000)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "gaussian", value_parser = parse_noise)]
    noise: NoiseModel,
    #[arg(long, default_value = "zero", allow_hyphen_values = true, value_parser = parse_init)]
    init: InitialStatePolicy,
    /// Z2, RealVector, ComplexScalar, CovarianceGap or CoefficientError.
    #[arg(long, default_value = "Z2", value_parser = parse_statistic)]
    statistic: Statistic,
    #[arg(long)]
    workers: Option<usize>,
    /// Per-replication CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Grid {
    Tail,
    SlowRates,
    FastRates,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, required_unless_present = "config", conflicts_with = "config")]
    grid: Option<Grid>,
    /// JSON list of experiment configurations.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 3000)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
    /// Combined per-replication CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
}

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

fn emit(out: Option<&PathBuf>, text: &str) -> AnyResult<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn print_json(value: &serde_json::Value) -> AnyResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(None, &text)
}

fn cmd_simulate(args: &SimulateArgs) -> AnyResult<()> {
    let m = &args.model;
    let mut rng = replication_rng(args.seed, 0, 0);
    let bulk = match &m.bulk {
        Some(b) => b.0.clone(),
        None => {
            let radius = m.spec_radius(args.n)?;
            let count = m.p.checked_sub(m.lambda1.unit_roots()).ok_or("order p too small for the unit roots")?;
            sample_bulk_eigenvalues(&mut rng, count + 1, radius, m.eps)?
                .into_iter()
                .map(|x| Complex64::new(x, 0.0))
                .collect()
        }
    };
    let model = companion_model(&m.spec(bulk)?, args.n)?;
    let path = simulate(&model, &args.noise, &args.init, &mut rng)?;
    emit(args.out.as_ref(), &path.to_csv())
}

fn cmd_estimate(args: &EstimateArgs) -> AnyResult<()> {
    let text = fs::read_to_string(&args.input)?;
    let path = parse_path_csv(&text, args.p)?;
    let result = estimation::ols(&path)?;
    print_json(&result.to_json())
}

fn cmd_theory(args: &TheoryArgs) -> AnyResult<()> {
    let spec = match &args.spec {
        Some(file) => parse_eigen_spec_json(&fs::read_to_string(file)?)?,
        None => args.model.spec(args.model.bulk.clone().map(|b| b.0).unwrap_or_default())?,
    };
    let model = companion_model(&spec, args.n)?;
    let bundle = theory_bundle(&model, args.sigma2)?;
    let mut value = serde_json::to_value(&bundle)?;
    if let Some(obj) = value.as_object_mut() {
        obj.insert("spec".into(), serde_json::to_value(&spec)?);
        obj.insert("n".into(), json!(args.n));
        obj.insert("theta".into(), json!(model.theta));
        obj.insert("rho".into(), json!(model.rho()));
        obj.insert("eigenvalues".into(), complex_vec_json(&model.eigenvalues));
        obj.insert("limit_eigenvalues".into(), complex_vec_json(&model.limit_eigenvalues));
    }
    print_json(&value)
}

fn cmd_experiment(args: &ExperimentArgs) -> AnyResult<()> {
    let mut cfg = match &args.config {
        Some(file) => parse_experiment_config_json(&fs::read_to_string(file)?)?,
        None => {
            let m = &args.model;
            ExperimentConfig {
                p: m.p,
                alpha: m.alpha,
                c: m.c,
                n: args.n,
                reps: args.reps,
                unit_root_mode: m.lambda1,
                d: m.d,
                beta: m.beta,
                eps: m.eps,
                noise: args.noise,
                seed: args.seed,
                statistic: args.statistic,
                init: args.init.clone(),
                bulk: m.bulk.as_ref().map(|b| b.0.iter().map(|&z| ComplexDoc::from(z)).collect()),
                workers: None,
            }
        }
    };
    if args.workers.is_some() {
        cfg.workers = args.workers;
    }
    let report = run_experiment(&cfg)?;
    if let Some(out) = &args.out {
        emit(Some(out), &reports_csv([&report]))?;
    }
    print_json(&report.summary_json())
}

fn cmd_sweep(args: &SweepArgs) -> AnyResult<()> {
    let mut configs: Vec<ExperimentConfig> = match (&args.config, args.grid) {
        (Some(file), _) => {
            let list: Vec<ExperimentConfig> = serde_json::from_str(&fs::read_to_string(file)?)?;
            list
        }
        (None, Some(Grid::Tail)) => tail_grid(args.seed, args.reps),
        (None, Some(Grid::SlowRates)) => slow_rate_grid(args.seed, args.reps),
        (None, Some(Grid::FastRates)) => fast_rate_grid(args.seed, args.reps),
        (None, None) => return Err("either --grid or --config is required".into()),
    };
    if args.workers.is_some() {
        for cfg in &mut configs {
            cfg.workers = args.workers;
        }
    }
    let results = sweep(&configs)?;
    let mut summaries = Vec::new();
    let mut ok = Vec::new();
    let mut failed = 0;
    for (cfg, r) in configs.iter().zip(results) {
        match r {
            Ok(rep) => {
                summaries.push(rep.summary_json());
                ok.push(rep);
            }
            Err(e) => {
                failed += 1;
                eprintln!("nuar: sweep entry failed: {e}");
                summaries.push(json!({"config": cfg, "error": e.to_string()}));
            }
        }
    }
    if let Some(out) = &args.out {
        emit(Some(out), &reports_csv(ok.iter()))?;
    }
    print_json(&serde_json::Value::Array(summaries))?;
    if failed > 0 {
        return Err(format!("{failed} of {} sweep entries failed", configs.len()).into());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Theory(a) => cmd_theory(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nuar: {e}");
            ExitCode::from(1)
        }
    }
}
