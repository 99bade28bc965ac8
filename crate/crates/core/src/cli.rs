//! Command-line front end.
//!
//! Exit codes: 0 success, 1 analysis or assumption failure, 2 usage or
//! parse error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    check_mla_convergence, discriminant, improving_gamma_exists, lambda_hat_max, optimal_beta,
    optimal_gamma, rho_ess_accelerated, rho_ess_mla, Improvement,
};
use crate::dynamics::ModelParams;
use crate::error::{Error, Result};
use crate::net::{analyze_structure, make_ring, read_matrix, WeightedAdjacency};
use crate::sim::{fit_rate, initial_condition, run_batch, SimConfig, TraceSummary};
use crate::spectral::{eigendecompose_symmetric, rho_ess, Spectrum};

#[derive(Debug, Parser)]
#[command(name = "consensus-lab", version, about = "Consensus dynamics: analysis and simulation")]
pub struct Cli {
    /// Print `key=value` lines instead of aligned text.
    #[arg(long, global = true)]
    pub porcelain: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a weight matrix and report its structure.
    Validate(Source),
    /// Print the eigenvalues of a symmetric weight matrix as CSV.
    Spectrum(Source),
    /// Spectral analysis, optimal parameters and rates.
    Analyze {
        #[command(flatten)]
        source: Source,
        /// Also check the MLA model at this parameter.
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Seeded batch simulation, writes the envelope CSV.
    Simulate(SimulateArgs),
    /// Emit the CSV data behind a figure.
    Figure(FigureArgs),
}

/// Where the weight matrix comes from.
#[derive(Debug, Clone, Args)]
#[group(skip)]
pub struct Source {
    /// Matrix file: the size n on the first line, then n rows.
    #[arg(long, conflicts_with = "ring", required_unless_present = "ring")]
    pub input: Option<PathBuf>,
    /// Ring of n agents.
    #[arg(long, required_unless_present = "input")]
    pub ring: Option<usize>,
    /// Self-loop weight of the ring.
    #[arg(long, requires = "ring", default_value_t = 0.0)]
    pub self_loop: f64,
}

impl Source {
    pub fn load(&self) -> Result<WeightedAdjacency> {
        match (&self.input, self.ring) {
            (Some(path), _) => read_matrix(path),
            (None, Some(n)) => make_ring(n, self.self_loop),
            (None, None) => Err(Error::BadParameter("no input given".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Degroot,
    Accelerated,
    Mla,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, value_enum)]
    pub model: Model,
    /// beta for accelerated, gamma for mla.
    #[arg(long)]
    pub param: Option<f64>,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub steps: u64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub runs: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub init_low: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub init_high: f64,
    /// Write the envelope CSV here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig2,
    Fig6,
    Contour,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub name: Figure,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub steps: u64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub runs: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::NotSquare { .. } | Error::Io(_) | Error::BadParameter(_) => 2,
        _ => 1,
    }
}

/// Ordered key/value report.
#[derive(Debug, Default)]
struct Report(Vec<(String, String)>);

impl Report {
    fn put(&mut self, key: &str, value: impl ToString) {
        self.0.push((key.to_string(), value.to_string()));
    }

    fn write(&self, out: &mut impl Write, porcelain: bool) -> io::Result<()> {
        let width = self.0.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.0 {
            if porcelain {
                writeln!(out, "{k}={v}")?;
            } else {
                writeln!(out, "{k:<width$}  {v}")?;
            }
        }
        Ok(())
    }
}

fn or_na<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

/// Runs a parsed command, writing results to `out`. Returns the exit code.
pub fn run(cli: &Cli, out: &mut impl Write) -> i32 {
    let result = match &cli.command {
        Command::Validate(src) => cmd_validate(src),
        Command::Spectrum(src) => cmd_spectrum(src, out).map(|_| (Report::default(), 0)),
        Command::Analyze { source, gamma } => cmd_analyze(source, *gamma),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Figure(args) => cmd_figure(args),
    };
    match result {
        Ok((report, code)) => {
            if let Err(e) = report.write(out, cli.porcelain) {
                eprintln!("error: {e}");
                return 1;
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn cmd_validate(src: &Source) -> Result<(Report, i32)> {
    let a = src.load()?;
    let s = analyze_structure(&a);
    let mut r = Report::default();
    r.put("n", a.n());
    r.put("nonnegative", true);
    r.put("row_stochastic", true);
    r.put("symmetric", s.symmetric);
    r.put("irreducible", s.irreducible);
    r.put("primitive", s.primitive);
    r.put("witness_k", or_na(s.witness_k));
    Ok((r, 0))
}

fn cmd_spectrum(src: &Source, out: &mut impl Write) -> Result<()> {
    let spec = eigendecompose_symmetric(&src.load()?)?;
    writeln!(out, "index,eigenvalue")?;
    for (i, l) in spec.eigenvalues.iter().enumerate() {
        writeln!(out, "{},{l}", i + 1)?;
    }
    Ok(())
}

fn cmd_analyze(src: &Source, gamma: Option<f64>) -> Result<(Report, i32)> {
    let a = src.load()?;
    let s = analyze_structure(&a);
    if !s.symmetric {
        return Err(Error::AssumptionViolated("weight matrix is not symmetric".into()));
    }
    if !s.irreducible {
        return Err(Error::AssumptionViolated("weight matrix is not irreducible".into()));
    }
    let spec = eigendecompose_symmetric(&a)?;
    let rho = rho_ess(&spec)?;
    let og = optimal_gamma(&spec).ok();
    let ob = optimal_beta(&spec).ok();

    let mut r = Report::default();
    r.put("n", a.n());
    r.put("primitive", s.primitive);
    r.put("spectrum", spec.eigenvalues.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
    r.put("rho_ess", rho);
    r.put("gamma_star", or_na(og.map(|g| g.gamma)));
    r.put("mla_rate", or_na(og.map(|g| g.rate)));
    r.put("hypotheses_met", or_na(og.map(|g| g.hypotheses_met)));
    r.put("beta_star", or_na(ob.map(|b| b.beta)));
    r.put("accelerated_rate", or_na(ob.map(|b| b.rate)));
    r.put("degroot_rate", rho);
    let chain = match (og, ob) {
        (Some(g), Some(b)) => Some(g.rate < b.rate && b.rate < rho),
        _ => None,
    };
    r.put("rate_ordering_holds", or_na(chain));
    let improvement = match improving_gamma_exists(&spec) {
        Ok(Improvement::Found { delta, .. }) => delta.to_string(),
        Ok(Improvement::NoImprovement) => "none".into(),
        Err(_) => "NA".into(),
    };
    r.put("improving_delta", improvement);

    if let Some(gamma) = gamma {
        let v = check_mla_convergence(&spec, gamma)?;
        r.put("gamma", gamma);
        r.put("converges", v.converges);
        r.put("gamma_in_range", v.gamma_in_range);
        r.put("criterion_ii_value", v.criterion_ii_value);
        r.put("limiting_eigenvalue_modulus", v.limiting_eigenvalue_modulus);
        r.put("rate_at_gamma", or_na(rho_ess_mla(&spec, gamma).ok()));
    }
    Ok((r, 0))
}

fn model_params(model: Model, param: Option<f64>) -> Result<ModelParams> {
    let need = |name: &str| {
        param.ok_or_else(|| Error::BadParameter(format!("--param is required for {name}")))
    };
    match model {
        Model::Degroot => Ok(ModelParams::DeGroot),
        Model::Accelerated => Ok(ModelParams::Accelerated { beta: need("accelerated")? }),
        Model::Mla => Ok(ModelParams::Mla { gamma: need("mla")? }),
    }
}

/// Whether the model's iteration matrix has essential spectral radius below 1.
fn is_convergent(spec: &Spectrum, model: ModelParams) -> bool {
    match model {
        ModelParams::DeGroot => rho_ess(spec).is_ok_and(|r| r < 1.0),
        ModelParams::Accelerated { beta } => rho_ess_accelerated(spec, beta) < 1.0,
        ModelParams::Mla { gamma } => check_mla_convergence(spec, gamma).is_ok_and(|v| v.converges),
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(Report, i32)> {
    let a = args.source.load()?;
    let model = model_params(args.model, args.param)?;
    let mut cfg = SimConfig::new(model, args.steps as usize, args.runs as usize, args.seed);
    cfg.init_low = args.init_low;
    cfg.init_high = args.init_high;
    let trace = run_batch(&a, &cfg)?;
    if let Some(path) = &args.out {
        trace.write_csv(path)?;
    }

    let mut r = Report::default();
    r.put("model", model.name());
    r.put("steps", cfg.steps);
    r.put("runs", cfg.runs);
    r.put("initial_width", trace.width(0));
    r.put("final_width", trace.width(cfg.steps));
    let fit = eigendecompose_symmetric(&a)
        .ok()
        .filter(|spec| is_convergent(spec, model))
        .and_then(|_| fit_rate(&a, model, &initial_condition(a.n(), &cfg, 0), cfg.steps).ok());
    r.put("fitted_rate", or_na(fit.map(|f| f.fitted_rate)));
    r.put("fit_r_squared", or_na(fit.map(|f| f.r_squared)));
    if let Some(path) = &args.out {
        r.put("csv", path.display());
    }
    Ok((r, 0))
}

fn envelope_set(
    a: &WeightedAdjacency,
    args: &FigureArgs,
    prefix: &str,
    models: &[ModelParams],
    r: &mut Report,
) -> Result<()> {
    for &model in models {
        let cfg = SimConfig::new(model, args.steps as usize, args.runs as usize, args.seed);
        let trace = run_batch(a, &cfg)?;
        let path = args.out_dir.join(format!("{prefix}_{}.csv", model.name()));
        trace.write_csv(&path)?;
        summarize(r, model.name(), &trace);
        r.put(&format!("{}_csv", model.name()), path.display());
    }
    Ok(())
}

fn summarize(r: &mut Report, name: &str, trace: &TraceSummary) {
    r.put(&format!("{name}_initial_width"), trace.width(0));
    r.put(&format!("{name}_final_width"), trace.width(trace.steps()));
    r.put(&format!("{name}_below_1e-6_at"), or_na(trace.first_below(1e-6)));
}

fn cmd_figure(args: &FigureArgs) -> Result<(Report, i32)> {
    fs::create_dir_all(&args.out_dir)?;
    let mut r = Report::default();
    match args.name {
        Figure::Fig2 => {
            let a = make_ring(4, 0.0)?;
            let models = [
                ModelParams::DeGroot,
                ModelParams::Accelerated { beta: 1.2 },
                ModelParams::Mla { gamma: 0.5 },
            ];
            envelope_set(&a, args, "fig2", &models, &mut r)?;
        }
        Figure::Fig6 => {
            let a = make_ring(4, 0.1)?;
            let spec = eigendecompose_symmetric(&a)?;
            let beta = optimal_beta(&spec)?.beta;
            let gamma = optimal_gamma(&spec)?.gamma;
            r.put("beta_star", beta);
            r.put("gamma_star", gamma);
            let models = [
                ModelParams::DeGroot,
                ModelParams::Accelerated { beta },
                ModelParams::Mla { gamma },
            ];
            envelope_set(&a, args, "fig6", &models, &mut r)?;
        }
        Figure::Contour => {
            let grid = args.out_dir.join("contour_grid.csv");
            let locus = args.out_dir.join("contour_locus.csv");
            write_contour(&grid, &locus)?;
            r.put("grid_csv", grid.display());
            r.put("locus_csv", locus.display());
        }
    }
    Ok((r, 0))
}

/// Points per axis of the contour grid.
pub const CONTOUR_POINTS: usize = 201;

fn write_contour(grid: &Path, locus: &Path) -> Result<()> {
    let step = |i: usize, lo: f64, hi: f64| lo + (hi - lo) * i as f64 / (CONTOUR_POINTS - 1) as f64;

    let mut g = String::from("lambda,gamma,lambda_hat_max,discriminant\n");
    for i in 0..CONTOUR_POINTS {
        let lambda = step(i, -1.0, 1.0);
        for j in 0..CONTOUR_POINTS {
            let gamma = step(j, 0.0, 2.0);
            g.push_str(&format!(
                "{lambda},{gamma},{},{}\n",
                lambda_hat_max(lambda, gamma),
                discriminant(lambda, gamma)
            ));
        }
    }
    fs::write(grid, g)?;

    // gamma^2 lambda^2 = 4 (gamma - 1) lambda: the axis lambda = 0 and the
    // curve lambda = 4 (gamma - 1) / gamma^2, kept where it lies in [-1, 1].
    let mut l = String::from("branch,gamma,lambda\n");
    for j in 0..CONTOUR_POINTS {
        l.push_str(&format!("axis,{},0\n", step(j, 0.0, 2.0)));
    }
    for j in 1..CONTOUR_POINTS {
        let gamma = step(j, 0.0, 2.0);
        let lambda = 4.0 * (gamma - 1.0) / (gamma * gamma);
        if (-1.0..=1.0).contains(&lambda) {
            l.push_str(&format!("curve,{gamma},{lambda}\n"));
        }
    }
    fs::write(locus, l)?;
    Ok(())
}
