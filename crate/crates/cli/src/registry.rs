//! Builds problems and solvers from a [`RunConfig`] and runs them.

use std::path::PathBuf;
use std::time::Instant;

use pfagp::problems::{
    make_dirac_gan_with_box, make_quadratic_oracle, make_robust_domains, make_synthetic, make_synthetic_boxed,
    QuadraticOracleSpec, RobustDomainsSpec, SyntheticParams,
};
use pfagp::{
    AgpSchedule, FeasibleSet, InitialEstimates, MinimaxProblem, RestartParams, Scalar, Solver, SolverConfig, Status,
};

use crate::config::{Precision, ProblemChoice, RunConfig, ScheduleChoice, SolverChoice, YBox};
use crate::CliError;

pub fn build_problem<T: Scalar>(choice: &ProblemChoice) -> pfagp::Result<MinimaxProblem<T>> {
    let lit = T::lit;
    match *choice {
        ProblemChoice::Synthetic { eps, lambda, y_box } => {
            let params = SyntheticParams { eps: lit(eps), lambda: lit(lambda) };
            match y_box {
                YBox::HalfWidth(h) => make_synthetic_boxed(params, lit(h)),
                YBox::Unbounded => make_synthetic(params),
            }
        }
        ProblemChoice::DiracGan { y_box } => make_dirac_gan_with_box(match y_box {
            YBox::HalfWidth(h) => Some(lit(h)),
            YBox::Unbounded => None,
        }),
        ProblemChoice::RobustQuadratic => make_robust_domains(&RobustDomainsSpec::three_quadratics()),
        ProblemChoice::RobustLogistic { l2 } => make_robust_domains(&RobustDomainsSpec::bundled_logistic(lit(l2))?),
        ProblemChoice::Quadratic => make_quadratic_oracle(&QuadraticOracleSpec::reference()),
        ProblemChoice::QuadraticRandom { seed, dim_x, dim_y } => {
            make_quadratic_oracle(&QuadraticOracleSpec::random(dim_x, dim_y, seed))
        }
    }
}

/// Start point used when `x0`/`y0` are not given.
pub fn default_start(choice: &ProblemChoice, dim_x: usize, dim_y: usize) -> (Vec<f64>, Vec<f64>) {
    match choice {
        ProblemChoice::Synthetic { .. } => (vec![0.0, 0.0, 2.0], vec![0.0, 0.0]),
        ProblemChoice::DiracGan { .. } => (vec![1.0], vec![1.0]),
        ProblemChoice::RobustQuadratic | ProblemChoice::RobustLogistic { .. } => {
            (vec![0.0; dim_x], vec![1.0 / dim_y as f64; dim_y])
        }
        ProblemChoice::Quadratic => (vec![0.6, 0.3], vec![0.0, 0.0]),
        ProblemChoice::QuadraticRandom { .. } => (vec![0.5; dim_x], vec![0.0; dim_y]),
    }
}

fn schedule<T: Scalar>(cfg: &RunConfig) -> Result<AgpSchedule<T>, CliError> {
    let choice = cfg.schedule.or(match cfg.problem {
        ProblemChoice::DiracGan { .. } => Some(ScheduleChoice::DiracGan),
        ProblemChoice::Synthetic { .. } => Some(ScheduleChoice::Synthetic),
        ProblemChoice::RobustQuadratic | ProblemChoice::RobustLogistic { .. } => Some(ScheduleChoice::Robust),
        _ => None,
    });
    match choice {
        Some(ScheduleChoice::DiracGan) => Ok(AgpSchedule::dirac_gan()),
        Some(ScheduleChoice::Synthetic) => Ok(AgpSchedule::synthetic()),
        Some(ScheduleChoice::Robust) => Ok(AgpSchedule::robust()),
        None => Err(CliError::Usage(format!(
            "agp has no default step schedule for '{}'; set schedule=dirac-gan|synthetic|robust",
            cfg.problem.name()
        ))),
    }
}

fn solver_config<T: Scalar>(cfg: &RunConfig, x0: Vec<f64>, y0: Vec<f64>) -> Result<SolverConfig<T>, CliError> {
    let lift = |v: Vec<f64>| v.into_iter().map(T::lit).collect::<Vec<T>>();
    let mut sc = SolverConfig::new(lift(x0), lift(y0))
        .with_epsilon(T::lit(cfg.eps))
        .with_max_outer_iters(cfg.max_iters)
        .with_trace_every(cfg.trace_every)
        .with_initial(InitialEstimates {
            l11: T::lit(cfg.l11),
            l12: T::lit(cfg.l12),
            l22: T::lit(cfg.l22),
            mu: T::lit(cfg.mu0),
        })
        .with_termination(cfg.termination)
        .with_step_rule(cfg.step_rule)
        .with_nc_beta(cfg.nc_beta)
        .with_timing(cfg.timing);
    sc.max_trials = cfg.max_trials;
    if cfg.solver == SolverChoice::Restart {
        let (Some(mu), Some(s_lower)) = (cfg.mu, cfg.s_lower) else {
            return Err(CliError::Usage("rpf-agp-nsc needs both mu and s-lower".into()));
        };
        sc = sc.with_restart(RestartParams {
            mu: T::lit(mu),
            s_lower: T::lit(s_lower),
            l1: cfg.l1.map(T::lit),
        });
    }
    Ok(sc)
}

/// What a finished run reports on stdout.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub problem: &'static str,
    pub solver: &'static str,
    pub status: Status,
    pub iterations: usize,
    pub grad_calls: u64,
    pub f_calls: u64,
    pub gap: f64,
    pub time_ms: f64,
    pub trace: PathBuf,
    /// Error raised inside the solver loop, if any.
    pub error: Option<pfagp::Error>,
}

impl std::fmt::Display for Summary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "problem={} solver={} status={} iterations={} grad_calls={} f_calls={} gap={:.6e} time_ms={:.3} trace={}",
            self.problem,
            self.solver,
            self.status,
            self.iterations,
            self.grad_calls,
            self.f_calls,
            self.gap,
            self.time_ms,
            self.trace.display()
        )
    }
}

fn run_typed<T: Scalar>(cfg: &RunConfig) -> Result<Summary, CliError> {
    let start = Instant::now();
    let problem = build_problem::<T>(&cfg.problem)?;
    let (dx, dy) = default_start(&cfg.problem, problem.dim_x(), problem.dim_y());
    let x0 = cfg.x0.clone().unwrap_or(dx);
    let y0 = cfg.y0.clone().unwrap_or(dy);
    let sc = solver_config::<T>(cfg, x0, y0)?;
    let solver = match cfg.solver {
        SolverChoice::Nsc => Solver::PfAgpNsc,
        SolverChoice::Nc => Solver::PfAgpNc,
        SolverChoice::Nl => Solver::PfAgpNl,
        SolverChoice::Restart => Solver::RPfAgpNsc,
        SolverChoice::Agp => Solver::AgpBaseline(schedule::<T>(cfg)?),
    };
    let out = solver.run(&problem, &sc)?;
    pfagp::write_trace(&out.trace, cfg.format, &cfg.output)
        .map_err(|e| CliError::Io(format!("{}: {e}", cfg.output.display())))?;
    Ok(Summary {
        problem: cfg.problem.name(),
        solver: cfg.solver.name(),
        status: out.status,
        iterations: out.iterations,
        grad_calls: out.grad_calls,
        f_calls: out.f_calls,
        gap: out.gap.norm.to_f64_lossy(),
        time_ms: start.elapsed().as_secs_f64() * 1e3,
        trace: cfg.output.clone(),
        error: out.error,
    })
}

pub fn run(cfg: &RunConfig) -> Result<Summary, CliError> {
    match cfg.precision {
        Precision::F64 => run_typed::<f64>(cfg),
        Precision::F32 => run_typed::<f32>(cfg),
    }
}

/// Seeded sample points in `[−1, 1]^n`, projected onto the feasible sets.
pub fn sample_points(problem: &MinimaxProblem<f64>, n: usize, seed: u64) -> pfagp::Result<Vec<(Vec<f64>, Vec<f64>)>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |set: &FeasibleSet<f64>, d: usize| -> pfagp::Result<Vec<f64>> {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        set.project(&v)
    };
    (0..n)
        .map(|_| Ok((draw(problem.set_x(), problem.dim_x())?, draw(problem.set_y(), problem.dim_y())?)))
        .collect()
}
