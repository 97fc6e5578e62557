//! `pfagp`: run the minimax solvers on the built-in problems and write traces.
//!
//! Exit codes: 0 converged, 1 I/O or data error, 2 usage or parameter error,
//! 3 stalled or out of iterations, 4 numeric failure.

mod config;
mod plot;
mod registry;

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use config::{RawConfig, RunConfig, KEYS, PROBLEMS, SOLVERS};
use pfagp::Status;
use registry::Summary;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Solver(#[from] pfagp::Error),
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::Usage(e.0)
    }
}

fn error_code(e: &pfagp::Error) -> u8 {
    use pfagp::Error::*;
    match e {
        Data(_) => 1,
        Parameter(_) | Shape { .. } | InvalidShape(_) | Infeasible { .. } | Structure(_) | UnboundedY(_) => 2,
        Stalled { .. } => 3,
        Numeric { .. } => 4,
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) | CliError::Data(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Solver(e) => error_code(e),
        }
    }
}

fn status_code(s: &Summary) -> u8 {
    match s.status {
        Status::Converged => 0,
        Status::MaxIters | Status::Stalled => 3,
        Status::Error => s.error.as_ref().map_or(4, error_code),
    }
}

fn names_help() -> String {
    let keys: Vec<String> = KEYS.iter().map(|(k, d, h)| format!("  {k:<14} {h} [default: {d}]")).collect();
    format!(
        "Solvers:  {}\nProblems: {}\n\nConfig file keys (same names as the run flags):\n{}\n  timing         fill elapsed_ms in the trace (true|false)",
        SOLVERS.join(", "),
        PROBLEMS.join(", "),
        keys.join("\n")
    )
}

#[derive(Parser, Debug)]
#[command(name = "pfagp", version, about = "Parameter-free alternating gradient projection for minimax problems")]
#[command(arg_required_else_help = true, after_help = names_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one solver on one problem and write its trace.
    #[command(after_help = names_help())]
    Run(Box<RunArgs>),
    /// Run several config files in parallel.
    Batch {
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
    /// Compare analytic gradients with central differences.
    CheckGradients {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = 20)]
        points: usize,
        /// Seed of the sample points.
        #[arg(long = "point-seed", default_value_t = 0)]
        point_seed: u64,
        #[arg(long, default_value_t = 1e-6)]
        h: f64,
        /// Largest accepted relative error.
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
    /// Print two columns of a CSV trace for gnuplot.
    PlotData {
        trace: PathBuf,
        #[arg(long, default_value = "gap_norm")]
        y: String,
        #[arg(long, default_value = "k")]
        x: String,
        /// Plot the running minimum of the y column.
        #[arg(long)]
        min_so_far: bool,
        /// Write to a file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Problem selection and instance parameters.
#[derive(Args, Debug, Default)]
struct ProblemArgs {
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    y_box: Option<String>,
    #[arg(long)]
    synthetic_eps: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    l2: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    dim_x: Option<String>,
    #[arg(long)]
    dim_y: Option<String>,
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// key=value file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    max_iters: Option<String>,
    #[arg(long)]
    trace_every: Option<String>,
    #[arg(long, conflicts_with_all = ["l11", "l12", "l22"])]
    l0: Option<String>,
    #[arg(long)]
    l11: Option<String>,
    #[arg(long)]
    l12: Option<String>,
    #[arg(long)]
    l22: Option<String>,
    #[arg(long)]
    mu0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    y0: Option<String>,
    #[arg(long)]
    termination: Option<String>,
    #[arg(long)]
    step_rule: Option<String>,
    #[arg(long)]
    nc_beta: Option<String>,
    #[arg(long)]
    max_trials: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    s_lower: Option<String>,
    #[arg(long)]
    l1: Option<String>,
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    output: Option<String>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    precision: Option<String>,
    /// Fill elapsed_ms in the trace (makes traces non-reproducible).
    #[arg(long)]
    timing: bool,
}

impl ProblemArgs {
    fn pairs(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("problem", &self.problem),
            ("y-box", &self.y_box),
            ("synthetic-eps", &self.synthetic_eps),
            ("lambda", &self.lambda),
            ("l2", &self.l2),
            ("seed", &self.seed),
            ("dim-x", &self.dim_x),
            ("dim-y", &self.dim_y),
        ]
    }

    fn to_raw(&self) -> RawConfig {
        collect(self.pairs())
    }
}

fn collect(pairs: Vec<(&'static str, &Option<String>)>) -> RawConfig {
    let mut raw = RawConfig::default();
    for (k, v) in pairs {
        if let Some(v) = v {
            raw.insert(k, v.clone());
        }
    }
    raw
}

impl RunArgs {
    fn to_raw(&self) -> RawConfig {
        let mut pairs = self.problem.pairs();
        pairs.extend([
            ("solver", &self.solver),
            ("eps", &self.eps),
            ("max-iters", &self.max_iters),
            ("trace-every", &self.trace_every),
            ("l0", &self.l0),
            ("l11", &self.l11),
            ("l12", &self.l12),
            ("l22", &self.l22),
            ("mu0", &self.mu0),
            ("x0", &self.x0),
            ("y0", &self.y0),
            ("termination", &self.termination),
            ("step-rule", &self.step_rule),
            ("nc-beta", &self.nc_beta),
            ("max-trials", &self.max_trials),
            ("mu", &self.mu),
            ("s-lower", &self.s_lower),
            ("l1", &self.l1),
            ("schedule", &self.schedule),
            ("output", &self.output),
            ("format", &self.format),
            ("precision", &self.precision),
        ]);
        let mut raw = collect(pairs);
        if self.timing {
            raw.insert("timing", "true");
        }
        raw
    }

    fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => RawConfig::load(path)?,
            None => RawConfig::default(),
        };
        let raw = file.overlay(self.to_raw());
        if !raw.0.contains_key("problem") || !raw.0.contains_key("solver") {
            return Err(CliError::Usage(format!(
                "run needs a problem and a solver\nsolvers:  {}\nproblems: {}",
                SOLVERS.join(", "),
                PROBLEMS.join(", ")
            )));
        }
        Ok(RunConfig::from_raw(&raw)?)
    }
}

fn report(label: Option<&Path>, result: &Result<Summary, CliError>) -> u8 {
    let prefix = label.map(|p| format!("{}: ", p.display())).unwrap_or_default();
    match result {
        Ok(s) => {
            println!("{prefix}{s}");
            if let Some(e) = &s.error {
                eprintln!("{prefix}error: {e}");
            }
            status_code(s)
        }
        Err(e) => {
            eprintln!("{prefix}error: {e}");
            e.code()
        }
    }
}

fn cmd_batch(jobs: usize, paths: &[PathBuf]) -> Result<u8, CliError> {
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let configs = paths
        .iter()
        .map(|p| RawConfig::load(p).and_then(|raw| RunConfig::from_raw(&raw)).map_err(|e| CliError::Usage(e.0)))
        .collect::<Result<Vec<_>, _>>()?;
    let cwd = std::env::current_dir().map_err(|e| CliError::Io(e.to_string()))?;
    let mut seen: HashMap<PathBuf, &Path> = HashMap::new();
    for (cfg, path) in configs.iter().zip(paths) {
        if let Some(first) = seen.insert(cwd.join(&cfg.output), path) {
            return Err(CliError::Usage(format!(
                "{} and {} write the same trace {}",
                first.display(),
                path.display(),
                cfg.output.display()
            )));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let results: Vec<_> = pool.install(|| configs.par_iter().map(registry::run).collect());
    Ok(paths.iter().zip(&results).map(|(p, r)| report(Some(p), r)).max().unwrap_or(0))
}

fn cmd_check_gradients(args: &ProblemArgs, points: usize, seed: u64, h: f64, tol: f64) -> Result<u8, CliError> {
    let raw = args.to_raw();
    if !raw.0.contains_key("problem") {
        return Err(CliError::Usage(format!("--problem is required (one of: {})", PROBLEMS.join(", "))));
    }
    let choice = config::problem_from(&raw, None)?;
    let problem = registry::build_problem::<f64>(&choice)?;
    let samples = registry::sample_points(&problem, points, seed)?;
    let rep = pfagp::check_gradients(&problem, &samples, h)?;
    let ok = rep.max_rel_error() <= tol;
    println!(
        "problem={} points={} max_rel_error_x={:.3e} max_rel_error_y={:.3e} tol={tol:e} {}",
        choice.name(),
        rep.points_checked,
        rep.max_rel_error_x,
        rep.max_rel_error_y,
        if ok { "ok" } else { "FAILED" }
    );
    Ok(if ok { 0 } else { 1 })
}

fn cmd_plot(trace: &Path, req: &plot::PlotRequest<'_>, output: Option<&Path>) -> Result<u8, CliError> {
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match output {
        Some(path) => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
            plot::plot_data(trace, req, &mut f)?;
            f.flush().map_err(io)?;
        }
        None => {
            let stdout = std::io::stdout();
            plot::plot_data(trace, req, &mut stdout.lock())?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Run(args) => {
            let result = args.resolve().and_then(|cfg| registry::run(&cfg));
            report(None, &result)
        }
        Command::Batch { jobs, configs } => cmd_batch(*jobs, configs).unwrap_or_else(|e| report(None, &Err(e))),
        Command::CheckGradients { problem, points, point_seed, h, tol } => {
            cmd_check_gradients(problem, *points, *point_seed, *h, *tol).unwrap_or_else(|e| report(None, &Err(e)))
        }
        Command::PlotData { trace, y, x, min_so_far, output } => {
            let req = plot::PlotRequest { x, y, min_so_far: *min_so_far };
            cmd_plot(trace, &req, output.as_deref()).unwrap_or_else(|e| report(None, &Err(e)))
        }
    };
    ExitCode::from(code)
}
