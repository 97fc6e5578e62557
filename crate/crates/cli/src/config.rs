//! Run configuration: a flat `key=value` file overlaid by command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pfagp::{NcBetaRule, StepRule, Termination, TraceFormat};

pub const PROBLEMS: [&str; 6] = [
    "synthetic",
    "dirac-gan",
    "robust-quadratic",
    "robust-logistic",
    "quadratic",
    "quadratic-random",
];

pub const SOLVERS: [&str; 5] = ["pf-agp-nsc", "pf-agp-nc", "pf-agp-nl", "rpf-agp-nsc", "agp"];

/// Every accepted key, with its default and a one-line description.
pub const KEYS: [(&str, &str, &str); 30] = [
    ("problem", "-", "benchmark problem"),
    ("solver", "-", "solver"),
    ("eps", "1e-5", "target gap"),
    ("max-iters", "1000000", "outer iteration cap"),
    ("trace-every", "1", "record every n-th iteration"),
    ("l0", "0.01", "initial l11, l12 and l22"),
    ("l11", "0.01", "initial l11"),
    ("l12", "0.01", "initial l12"),
    ("l22", "0.01", "initial l22"),
    ("mu0", "0.01", "initial mu estimate"),
    ("x0", "per problem", "initial x, comma separated"),
    ("y0", "per problem", "initial y, comma separated"),
    ("termination", "per problem", "gap | grad | reg-gap"),
    ("step-rule", "every-trial", "every-trial | after-failure"),
    ("nc-beta", "theorem", "theorem | algorithm"),
    ("max-trials", "200", "backtracking trials per iteration"),
    ("mu", "-", "true modulus (rpf-agp-nsc)"),
    ("s-lower", "-", "lower bound on min max f (rpf-agp-nsc)"),
    ("l1", "l11", "initial global estimate (rpf-agp-nsc)"),
    ("schedule", "per problem", "agp steps: dirac-gan | synthetic | robust"),
    ("y-box", "10", "half-width of Y for synthetic and dirac-gan, or none"),
    ("synthetic-eps", "0.01", "epsilon of the synthetic w"),
    ("lambda", "5", "lambda of the synthetic w"),
    ("l2", "0.001", "ridge weight of robust-logistic"),
    ("seed", "0", "instance seed for quadratic-random"),
    ("dim-x", "3", "x dimension of quadratic-random"),
    ("dim-y", "2", "y dimension of quadratic-random"),
    ("output", "trace.<format>", "trace file path"),
    ("format", "csv", "csv | json"),
    ("precision", "f64", "f64 | f32"),
];

/// `timing` is a switch on the command line and `timing=true` in files.
pub const SWITCHES: [&str; 1] = ["timing"];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

type Res<T> = Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Res<T> {
    Err(ConfigError(msg.into()))
}

fn known(key: &str) -> bool {
    KEYS.iter().any(|(k, _, _)| *k == key) || SWITCHES.contains(&key)
}

/// Raw `key → value` pairs, before typing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig(pub BTreeMap<String, String>);

impl RawConfig {
    /// Parses `key=value` lines; `#` starts a comment.
    pub fn parse(text: &str, origin: &str) -> Res<Self> {
        let mut map = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return err(format!("{origin}:{}: expected key=value, got '{line}'", n + 1));
            };
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if !known(&k) {
                return err(format!("{origin}:{}: unknown key '{k}'", n + 1));
            }
            if map.insert(k.clone(), v).is_some() {
                return err(format!("{origin}:{}: duplicate key '{k}'", n + 1));
            }
        }
        let raw = RawConfig(map);
        raw.check_conflicts(origin)?;
        Ok(raw)
    }

    pub fn load(path: &Path) -> Res<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    fn check_conflicts(&self, origin: &str) -> Res<()> {
        if self.0.contains_key("l0") {
            if let Some(k) = ["l11", "l12", "l22"].iter().find(|k| self.0.contains_key(**k)) {
                return err(format!("{origin}: 'l0' conflicts with '{k}'"));
            }
        }
        Ok(())
    }

    /// Overlays `other`. Setting `l0` on top clears the individual `l`s
    /// underneath, and the reverse, so each layer stays self-consistent.
    pub fn overlay(mut self, other: RawConfig) -> Self {
        if other.0.contains_key("l0") {
            for k in ["l11", "l12", "l22"] {
                self.0.remove(k);
            }
        }
        if ["l11", "l12", "l22"].iter().any(|k| other.0.contains_key(*k)) {
            if let Some(l0) = self.0.remove("l0") {
                for k in ["l11", "l12", "l22"] {
                    self.0.entry(k.to_string()).or_insert_with(|| l0.clone());
                }
            }
        }
        self.0.extend(other.0);
        self
    }

    pub fn insert(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(key.to_string(), value.into());
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Res<Option<T>>
    where
        T::Err: fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| ConfigError(format!("{key}: '{v}': {e}"))))
            .transpose()
    }

    fn real(&self, key: &str, default: f64) -> Res<f64> {
        Ok(self.parsed::<f64>(key)?.unwrap_or(default))
    }

    fn positive(&self, key: &str, default: f64) -> Res<f64> {
        let v = self.real(key, default)?;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            err(format!("{key} must be positive, got {v}"))
        }
    }

    fn count(&self, key: &str, default: usize) -> Res<usize> {
        let v = self.parsed::<usize>(key)?.unwrap_or(default);
        if v == 0 {
            return err(format!("{key} must be at least 1"));
        }
        Ok(v)
    }

    fn list(&self, key: &str) -> Res<Option<Vec<f64>>> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|t| t.trim().parse::<f64>().map_err(|e| ConfigError(format!("{key}: '{t}': {e}"))))
                    .collect()
            })
            .transpose()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum YBox {
    /// Box of this half-width.
    HalfWidth(f64),
    /// Leave `Y` unbounded.
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemChoice {
    Synthetic { eps: f64, lambda: f64, y_box: YBox },
    DiracGan { y_box: YBox },
    RobustQuadratic,
    RobustLogistic { l2: f64 },
    Quadratic,
    QuadraticRandom { seed: u64, dim_x: usize, dim_y: usize },
}

impl ProblemChoice {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemChoice::Synthetic { .. } => "synthetic",
            ProblemChoice::DiracGan { .. } => "dirac-gan",
            ProblemChoice::RobustQuadratic => "robust-quadratic",
            ProblemChoice::RobustLogistic { .. } => "robust-logistic",
            ProblemChoice::Quadratic => "quadratic",
            ProblemChoice::QuadraticRandom { .. } => "quadratic-random",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    Nsc,
    Nc,
    Nl,
    Restart,
    Agp,
}

impl SolverChoice {
    pub fn name(self) -> &'static str {
        match self {
            SolverChoice::Nsc => "pf-agp-nsc",
            SolverChoice::Nc => "pf-agp-nc",
            SolverChoice::Nl => "pf-agp-nl",
            SolverChoice::Restart => "rpf-agp-nsc",
            SolverChoice::Agp => "agp",
        }
    }

    /// Every solver except the fixed-step baseline needs a compact `Y`.
    pub fn needs_bounded_y(self) -> bool {
        self != SolverChoice::Agp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    F64,
    F32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleChoice {
    DiracGan,
    Synthetic,
    Robust,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemChoice,
    pub solver: SolverChoice,
    pub eps: f64,
    pub max_iters: usize,
    pub trace_every: usize,
    pub l11: f64,
    pub l12: f64,
    pub l22: f64,
    pub mu0: f64,
    pub x0: Option<Vec<f64>>,
    pub y0: Option<Vec<f64>>,
    pub termination: Termination,
    pub step_rule: StepRule,
    pub nc_beta: NcBetaRule,
    pub max_trials: usize,
    pub mu: Option<f64>,
    pub s_lower: Option<f64>,
    pub l1: Option<f64>,
    pub schedule: Option<ScheduleChoice>,
    pub output: PathBuf,
    pub format: TraceFormat,
    pub precision: Precision,
    pub timing: bool,
}

/// Parses the problem name and its parameters. `solver` decides the default
/// `y-box`; `None` means no box unless one is asked for.
pub fn problem_from(raw: &RawConfig, solver: Option<SolverChoice>) -> Res<ProblemChoice> {
    let Some(name) = raw.get("problem") else {
        return err("no problem given");
    };
    let y_box = || -> Res<YBox> {
        match raw.get("y-box") {
            Some("none") => Ok(YBox::Unbounded),
            Some(_) => Ok(YBox::HalfWidth(raw.positive("y-box", 10.0)?)),
            None if solver.is_some_and(SolverChoice::needs_bounded_y) => Ok(YBox::HalfWidth(10.0)),
            None => Ok(YBox::Unbounded),
        }
    };
    Ok(match name {
        "synthetic" => ProblemChoice::Synthetic {
            eps: raw.positive("synthetic-eps", 0.01)?,
            lambda: raw.real("lambda", 5.0)?,
            y_box: y_box()?,
        },
        "dirac-gan" => ProblemChoice::DiracGan { y_box: y_box()? },
        "robust-quadratic" => ProblemChoice::RobustQuadratic,
        "robust-logistic" => ProblemChoice::RobustLogistic {
            l2: raw.real("l2", 1e-3)?,
        },
        "quadratic" => ProblemChoice::Quadratic,
        "quadratic-random" => ProblemChoice::QuadraticRandom {
            seed: raw.parsed("seed")?.unwrap_or(0),
            dim_x: raw.count("dim-x", 3)?,
            dim_y: raw.count("dim-y", 2)?,
        },
        other => return err(format!("unknown problem '{other}' (one of: {})", PROBLEMS.join(", "))),
    })
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Res<Self> {
        raw.check_conflicts("configuration")?;
        let solver = match raw.get("solver") {
            None => return err("no solver given"),
            Some("pf-agp-nsc") => SolverChoice::Nsc,
            Some("pf-agp-nc") => SolverChoice::Nc,
            Some("pf-agp-nl") => SolverChoice::Nl,
            Some("rpf-agp-nsc") => SolverChoice::Restart,
            Some("agp") => SolverChoice::Agp,
            Some(other) => return err(format!("unknown solver '{other}' (one of: {})", SOLVERS.join(", "))),
        };
        let problem = problem_from(raw, Some(solver))?;

        let l0 = raw.positive("l0", 0.01)?;
        let termination = match raw.get("termination") {
            Some(t) => t.parse().map_err(|e: pfagp::Error| ConfigError(e.to_string()))?,
            // interior-point problems stop on the plain gradient norm
            None => match problem {
                ProblemChoice::Synthetic { .. } | ProblemChoice::DiracGan { .. } => Termination::GradientNorm,
                _ => Termination::StationarityGap,
            },
        };
        let step_rule = match raw.get("step-rule").unwrap_or("every-trial") {
            "every-trial" => StepRule::EveryTrial,
            "after-failure" => StepRule::AfterFailure,
            other => return err(format!("step-rule: unknown value '{other}'")),
        };
        let nc_beta = match raw.get("nc-beta").unwrap_or("theorem") {
            "theorem" => NcBetaRule::Theorem,
            "algorithm" => NcBetaRule::Algorithm,
            other => return err(format!("nc-beta: unknown value '{other}'")),
        };
        let schedule = match raw.get("schedule") {
            None => None,
            Some("dirac-gan") => Some(ScheduleChoice::DiracGan),
            Some("synthetic") => Some(ScheduleChoice::Synthetic),
            Some("robust") => Some(ScheduleChoice::Robust),
            Some(other) => return err(format!("schedule: unknown value '{other}'")),
        };
        let format: TraceFormat = raw
            .get("format")
            .unwrap_or("csv")
            .parse()
            .map_err(|e: pfagp::Error| ConfigError(e.to_string()))?;
        let precision = match raw.get("precision").unwrap_or("f64") {
            "f64" => Precision::F64,
            "f32" => Precision::F32,
            other => return err(format!("precision: unknown value '{other}'")),
        };
        let timing = match raw.get("timing") {
            None | Some("false") => false,
            Some("true") => true,
            Some(other) => return err(format!("timing: expected true or false, got '{other}'")),
        };
        let output = raw.get("output").map(PathBuf::from).unwrap_or_else(|| {
            PathBuf::from(match format {
                TraceFormat::Csv => "trace.csv",
                TraceFormat::Json => "trace.json",
            })
        });
        Ok(RunConfig {
            problem,
            solver,
            eps: raw.positive("eps", 1e-5)?,
            max_iters: raw.count("max-iters", 1_000_000)?,
            trace_every: raw.count("trace-every", 1)?,
            l11: raw.positive("l11", l0)?,
            l12: raw.positive("l12", l0)?,
            l22: raw.positive("l22", l0)?,
            mu0: raw.positive("mu0", 0.01)?,
            x0: raw.list("x0")?,
            y0: raw.list("y0")?,
            termination,
            step_rule,
            nc_beta,
            max_trials: raw.count("max-trials", 200)?,
            mu: raw.parsed("mu")?,
            s_lower: raw.parsed("s-lower")?,
            l1: raw.parsed("l1")?,
            schedule,
            output,
            format,
            precision,
            timing,
        })
    }
}
