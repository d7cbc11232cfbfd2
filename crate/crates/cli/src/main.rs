//! `inar`: command line driver for INAR(p) classification, moments,
//! simulation, diffusion limits and estimation.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use inar::cir::{self, CirParams};
use inar::data::{self, parse_t_grid, parse_usize_list};
use inar::estimate::{self, FitConfig, FitResult, Lags, Method};
use inar::experiment::{self, BostonReport};
use inar::moments::moment_table;
use inar::simulate::simulate_paths;
use inar::spectral::{spectral_data, SpectralData};
use inar::{classify, Coefficients, InarError, ModelSpec, Regime, SpecDocument};
use serde::Serialize;
use serde_json::{json, Value};

use output::{emit, Format, Table};

#[derive(Debug, Parser)]
#[command(name = "inar", version, about = "Integer-valued autoregressive models")]
struct Cli {
    /// Base seed for all random streams.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for replicate-parallel commands.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Regime, Perron root, Perron vectors and projection.
    Classify(ClassifyArgs),
    /// Exact E[X_k], Var(X_k) and E[M_k^2] for k = 1..K.
    Moments(MomentsArgs),
    /// Exact-distribution sample paths.
    Simulate(SimulateArgs),
    /// Samples of the diffusion limit on a time grid.
    Cir(CirArgs),
    /// CLS or WCLS fit of a subset model to a count file.
    Fit(FitArgs),
    /// KS distance between the scaled process and its limit marginal.
    McConverge(ConvergeArgs),
    /// CLS and WCLS fits of the Boston armed-robberies series.
    Boston(BostonArgs),
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    /// Model document (JSON); the innovation block is optional here.
    #[arg(long, conflicts_with = "alphas", required_unless_present = "alphas")]
    spec: Option<PathBuf>,
    /// Comma-separated coefficients, e.g. 0.5,0.5.
    #[arg(long)]
    alphas: Option<String>,
}

#[derive(Debug, Args)]
struct MomentsArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    horizon: usize,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Scale n; also the path length when --horizon is absent.
    #[arg(long)]
    n: usize,
    /// Path length N.
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Append the martingale differences M_k as column m.
    #[arg(long)]
    mdiffs: bool,
}

#[derive(Debug, Args)]
struct CirArgs {
    /// Drift a; requires --b2.
    #[arg(long, requires = "b2", conflicts_with = "spec")]
    a: Option<f64>,
    /// Squared diffusion coefficient b2.
    #[arg(long, requires = "a")]
    b2: Option<f64>,
    /// Unit-root model whose limit is sampled.
    #[arg(long, required_unless_present = "a")]
    spec: Option<PathBuf>,
    #[arg(long, default_value = "0.5,1,2")]
    t_grid: String,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = cir::DEFAULT_DT)]
    dt: f64,
    /// Draw from the exact marginal law (default).
    #[arg(long, conflicts_with = "euler")]
    exact: bool,
    /// Full-truncation Euler paths.
    #[arg(long)]
    euler: bool,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "1")]
    lags: String,
    #[arg(long, default_value = "cls")]
    method: String,
}

#[derive(Debug, Args)]
struct ConvergeArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value = "200,1000,5000")]
    n_list: String,
    #[arg(long, default_value = "0.5,1,2")]
    t_grid: String,
    #[arg(long, default_value_t = 2000)]
    reps: usize,
}

#[derive(Debug, Args)]
struct BostonArgs {
    /// Count file to use instead of the bundled series.
    #[arg(long)]
    data: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_numerical() { 3 } else { 2 })
        }
    }
}

fn run(cli: &Cli) -> inar::Result<()> {
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return Err(InarError::InvalidArgument("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| InarError::InvalidArgument(e.to_string()))?;
    }
    let text = match &cli.command {
        Command::Classify(args) => classify_cmd(args, cli.format.unwrap_or(Format::Json))?,
        Command::Moments(args) => moments_cmd(args, cli.format.unwrap_or(Format::Csv))?,
        Command::Simulate(args) => simulate_cmd(args, cli.seed, cli.format.unwrap_or(Format::Csv))?,
        Command::Cir(args) => cir_cmd(args, cli.seed, cli.format.unwrap_or(Format::Csv))?,
        Command::Fit(args) => fit_cmd(args, cli.format.unwrap_or(Format::Json))?,
        Command::McConverge(args) => converge_cmd(args, cli.seed, cli.format.unwrap_or(Format::Csv))?,
        Command::Boston(args) => boston_cmd(args, cli.format.unwrap_or(Format::Csv))?,
    };
    emit(&text, cli.out.as_deref())?;
    Ok(())
}

fn load_model(path: &PathBuf) -> inar::Result<ModelSpec> {
    SpecDocument::load(path)?.into_model()
}

#[derive(Serialize)]
struct ClassifyOutput {
    regime: Regime,
    alpha_sum: f64,
    rho: f64,
    d: usize,
    primitive: bool,
    sigma_alpha_sq: f64,
    phi_prime_at_one: f64,
    /// Present only for primitive models.
    u: Option<Vec<f64>>,
    v: Option<Vec<f64>>,
    pi: Option<Vec<Vec<f64>>>,
    lambda2_mod: Option<f64>,
}

fn classify_cmd(args: &ClassifyArgs, format: Format) -> inar::Result<String> {
    let coefficients = match (&args.spec, &args.alphas) {
        (Some(path), _) => SpecDocument::load(path)?.coefficients()?,
        (None, Some(list)) => {
            let raw = list
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| InarError::InvalidArgument(format!("invalid coefficient `{t}`"))))
                .collect::<inar::Result<Vec<f64>>>()?;
            Coefficients::new(&raw)?
        }
        (None, None) => unreachable!("clap requires one of --spec, --alphas"),
    };
    let class = classify(&coefficients)?;
    let spectral: Option<SpectralData> = if class.primitive { Some(spectral_data(&coefficients)?) } else { None };
    let out = ClassifyOutput {
        regime: class.regime,
        alpha_sum: class.alpha_sum,
        rho: class.rho,
        d: class.d,
        primitive: class.primitive,
        sigma_alpha_sq: class.sigma_alpha_sq,
        phi_prime_at_one: class.phi_prime_at_one,
        lambda2_mod: spectral.as_ref().map(|s| s.lambda2_mod),
        u: spectral.as_ref().map(|s| s.u.clone()),
        v: spectral.as_ref().map(|s| s.v.clone()),
        pi: spectral.map(|s| s.pi),
    };
    Ok(match format {
        Format::Json => output::json(&out),
        Format::Csv => {
            let join = |xs: &[f64]| xs.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
            let mut t = Table::new(["regime", "alpha_sum", "rho", "d", "primitive", "lambda2_mod", "u", "v"]);
            let lambda2 = out.lambda2_mod.map_or(Value::Null, |l| json!(l));
            let u = out.u.as_deref().map_or(Value::Null, |u| json!(join(u)));
            let v = out.v.as_deref().map_or(Value::Null, |v| json!(join(v)));
            t.push(vec![
                json!(out.regime.to_string()),
                json!(out.alpha_sum),
                json!(out.rho),
                json!(out.d),
                json!(out.primitive),
                lambda2,
                u,
                v,
            ]);
            t.render(Format::Csv)
        }
    })
}

fn moments_cmd(args: &MomentsArgs, format: Format) -> inar::Result<String> {
    let spec = load_model(&args.spec)?;
    let table = moment_table(&spec, args.horizon)?;
    let mut t = Table::new(["k", "mean", "variance", "m2"]);
    for (k, mean, var, m2) in table.rows() {
        t.push(vec![json!(k), json!(mean), json!(var), json!(m2)]);
    }
    Ok(t.render(format))
}

fn simulate_cmd(args: &SimulateArgs, seed: u64, format: Format) -> inar::Result<String> {
    let spec = load_model(&args.spec)?;
    if args.n == 0 || args.reps == 0 {
        return Err(InarError::InvalidArgument("--n and --reps must be positive".into()));
    }
    let horizon = args.horizon.unwrap_or(args.n);
    let paths = simulate_paths(&spec, horizon, args.reps, seed, args.mdiffs)?;
    let mut columns = vec!["rep", "k", "x"];
    if args.mdiffs {
        columns.push("m");
    }
    let mut t = Table::new(columns);
    for (rep, path) in paths.iter().enumerate() {
        for (i, &x) in path.counts.iter().enumerate() {
            let mut row = vec![json!(rep), json!(i + 1), json!(x)];
            if let Some(m) = &path.mdiffs {
                row.push(json!(m[i]));
            }
            t.push(row);
        }
    }
    Ok(t.render(format))
}

fn cir_cmd(args: &CirArgs, seed: u64, format: Format) -> inar::Result<String> {
    let params = match (args.a, args.b2, &args.spec) {
        (Some(a), Some(b2), _) => CirParams::new(a, b2)?,
        (_, _, Some(path)) => cir::params_from_model(&load_model(path)?)?,
        _ => unreachable!("clap requires --a/--b2 or --spec"),
    };
    let grid = parse_t_grid(&args.t_grid)?;
    let ensemble = if args.euler {
        cir::euler_ensemble(params, &grid, args.reps, args.dt, seed)?
    } else {
        cir::exact_ensemble(params, &grid, args.reps, seed)?
    };
    let mut t = Table::new(["rep", "t", "x"]);
    for (rep, row) in ensemble.values.iter().enumerate() {
        for (&time, &x) in grid.iter().zip(row) {
            t.push(vec![json!(rep), json!(time), json!(x)]);
        }
    }
    Ok(t.render(format))
}

#[derive(Serialize)]
struct FitSummary<'a> {
    method: Method,
    lags: &'a Lags,
    alpha_hat: &'a std::collections::BTreeMap<usize, f64>,
    mu_hat: f64,
    sigma: f64,
    se: f64,
    first_k: usize,
    last_k: usize,
    warnings: &'a [String],
}

fn fit_row(fit: &FitResult, lags: &Lags) -> (Vec<String>, Vec<Value>) {
    let mut cols = vec!["method".to_string()];
    let mut row = vec![json!(fit.method.to_string())];
    for &l in lags.as_slice() {
        cols.push(format!("alpha_{l}"));
        row.push(json!(fit.alpha(l)));
    }
    for (c, v) in [("mu", fit.mu_hat), ("sigma", fit.sigma), ("se", fit.se)] {
        cols.push(c.to_string());
        row.push(json!(v));
    }
    cols.push("first_k".into());
    row.push(json!(fit.sample_range.0));
    cols.push("last_k".into());
    row.push(json!(fit.sample_range.1));
    (cols, row)
}

fn fit_cmd(args: &FitArgs, format: Format) -> inar::Result<String> {
    let series = data::load_counts(&args.data)?;
    let lags: Lags = args.lags.parse()?;
    let method: Method = args.method.parse()?;
    let fit = estimate::fit(&series.values, &FitConfig::new(lags.clone(), method))?;
    for w in &fit.warnings {
        eprintln!("warning: {w}");
    }
    Ok(match format {
        Format::Json => output::json(&FitSummary {
            method,
            lags: &lags,
            alpha_hat: &fit.alpha_hat,
            mu_hat: fit.mu_hat,
            sigma: fit.sigma,
            se: fit.se,
            first_k: fit.sample_range.0,
            last_k: fit.sample_range.1,
            warnings: &fit.warnings,
        }),
        Format::Csv => {
            let (cols, row) = fit_row(&fit, &lags);
            let mut t = Table::new(cols);
            t.push(row);
            t.render(Format::Csv)
        }
    })
}

fn converge_cmd(args: &ConvergeArgs, seed: u64, format: Format) -> inar::Result<String> {
    let spec = load_model(&args.spec)?;
    let n_list = parse_usize_list(&args.n_list)?;
    let grid = parse_t_grid(&args.t_grid)?;
    let report = experiment::mc_convergence(&spec, &n_list, &grid, args.reps, seed)?;
    let mut t = Table::new([
        "n", "t", "reps", "mean", "variance", "limit_mean", "limit_variance", "ks", "critical", "pass",
    ]);
    for r in &report.rows {
        t.push(vec![
            json!(r.n),
            json!(r.t),
            json!(r.reps),
            json!(r.mean),
            json!(r.variance),
            json!(r.limit_mean),
            json!(r.limit_variance),
            json!(r.ks),
            json!(r.critical),
            json!(r.passes()),
        ]);
    }
    Ok(t.render(format))
}

fn boston_cmd(args: &BostonArgs, format: Format) -> inar::Result<String> {
    let series = match &args.data {
        Some(path) => data::load_counts(path)?,
        None => data::boston(),
    };
    let report: BostonReport = experiment::boston_report(&series)?;
    let mut t = Table::new(["row", "alpha_1", "alpha_12", "mu", "sigma", "se"]);
    let fitted = |label: &str, f: &FitResult| {
        vec![json!(label), json!(f.alpha(1)), json!(f.alpha(12)), json!(f.mu_hat), json!(f.sigma), json!(f.se)]
    };
    let reference = |label: &str, r: &experiment::ReferenceRow| {
        vec![json!(label), json!(r.alpha_1), json!(r.alpha_12), json!(r.mu), json!(r.sigma), json!(r.se)]
    };
    t.push(fitted("cls", &report.cls));
    t.push(reference("cls-reference", &report.reference_cls));
    t.push(fitted("wcls", &report.wcls));
    t.push(reference("wcls-reference", &report.reference_wcls));
    Ok(t.render(format))
}
