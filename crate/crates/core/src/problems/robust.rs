use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::problem::{Objective, MinimaxProblem};
use crate::projections::FeasibleSet;
use crate::scalar::Scalar;
use crate::vector;

const DOMAIN_A: &str = include_str!("../../data/domain_a.csv");
const DOMAIN_B: &str = include_str!("../../data/domain_b.csv");

/// A smooth per-domain loss `f_m(x)`.
pub trait DomainLoss<T: Scalar>: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[T]) -> T;
    fn grad(&self, x: &[T]) -> Vec<T>;
}

/// `½‖x − t‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticDomain<T> {
    pub target: Vec<T>,
}

impl<T: Scalar> DomainLoss<T> for QuadraticDomain<T> {
    fn dim(&self) -> usize {
        self.target.len()
    }
    fn value(&self, x: &[T]) -> T {
        T::lit(0.5) * vector::norm_sq(&vector::sub(x, &self.target))
    }
    fn grad(&self, x: &[T]) -> Vec<T> {
        vector::sub(x, &self.target)
    }
}

/// Labelled samples: one feature row per sample, labels in `0..classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub features: Vec<Vec<T>>,
    pub labels: Vec<usize>,
    pub classes: usize,
}

impl<T: Scalar> Dataset<T> {
    /// Parses comma-separated rows, features first and the integer label last.
    pub fn parse(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Data(format!("row {}: {e}", i + 1)))?;
            if rec.len() < 2 {
                return Err(Error::Data(format!("row {}: need at least one feature and a label", i + 1)));
            }
            let n = rec.len() - 1;
            let row = rec
                .iter()
                .take(n)
                .map(|s| {
                    s.parse::<f64>()
                        .map(T::lit)
                        .map_err(|e| Error::Data(format!("row {}: bad feature '{s}': {e}", i + 1)))
                })
                .collect::<Result<Vec<T>>>()?;
            let label = rec[n]
                .parse::<usize>()
                .map_err(|e| Error::Data(format!("row {}: bad label '{}': {e}", i + 1, &rec[n])))?;
            if let Some(first) = features.first().map(Vec::len) {
                if first != n {
                    return Err(Error::Data(format!("row {}: {n} features, expected {first}", i + 1)));
                }
            }
            features.push(row);
            labels.push(label);
        }
        if features.is_empty() {
            return Err(Error::Data("dataset is empty".into()));
        }
        let classes = labels.iter().max().map_or(0, |&m| m + 1).max(2);
        Ok(Dataset { features, labels, classes })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn num_features(&self) -> usize {
        self.features[0].len()
    }
}

/// Mean multinomial cross-entropy of a linear classifier plus `(l2/2)‖x‖²`.
///
/// `x` holds one row of `features + 1` weights (bias last) per class.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticDomain<T> {
    pub data: Dataset<T>,
    pub classes: usize,
    pub l2: T,
}

impl<T: Scalar> LogisticDomain<T> {
    pub fn new(data: Dataset<T>, classes: usize, l2: T) -> Result<Self> {
        if data.classes > classes {
            return Err(Error::Data(format!("labels need {} classes, only {classes} given", data.classes)));
        }
        Ok(LogisticDomain { data, classes, l2 })
    }

    fn stride(&self) -> usize {
        self.data.num_features() + 1
    }

    /// Class probabilities of one sample.
    fn probs(&self, x: &[T], row: &[T]) -> Vec<T> {
        let s = self.stride();
        let logits: Vec<T> = (0..self.classes)
            .map(|c| {
                let w = &x[c * s..(c + 1) * s];
                vector::dot(&w[..s - 1], row) + w[s - 1]
            })
            .collect();
        let m = logits.iter().copied().fold(T::neg_infinity(), T::max);
        let e: Vec<T> = logits.iter().map(|&l| (l - m).exp()).collect();
        let z = e.iter().copied().fold(T::zero(), |a, b| a + b);
        e.into_iter().map(|v| v / z).collect()
    }

    /// Fraction of samples whose most probable class is the label.
    pub fn accuracy(&self, x: &[T]) -> f64 {
        let hits = self
            .data
            .features
            .iter()
            .zip(&self.data.labels)
            .filter(|(row, &label)| {
                let p = self.probs(x, row);
                (0..self.classes).all(|c| p[c] <= p[label])
            })
            .count();
        hits as f64 / self.data.labels.len() as f64
    }
}

impl<T: Scalar> DomainLoss<T> for LogisticDomain<T> {
    fn dim(&self) -> usize {
        self.classes * self.stride()
    }

    fn value(&self, x: &[T]) -> T {
        let n = T::count(self.data.labels.len());
        let s = self.stride();
        let mut loss = T::zero();
        for (row, &label) in self.data.features.iter().zip(&self.data.labels) {
            let logits: Vec<T> = (0..self.classes)
                .map(|c| vector::dot(&x[c * s..c * s + s - 1], row) + x[c * s + s - 1])
                .collect();
            let m = logits.iter().copied().fold(T::neg_infinity(), T::max);
            let lse = m + logits.iter().map(|&l| (l - m).exp()).fold(T::zero(), |a, b| a + b).ln();
            loss = loss + lse - logits[label];
        }
        loss / n + self.l2 / T::lit(2.0) * vector::norm_sq(x)
    }

    fn grad(&self, x: &[T]) -> Vec<T> {
        let n = T::count(self.data.labels.len());
        let s = self.stride();
        let mut g = vector::scale(self.l2, x);
        for (row, &label) in self.data.features.iter().zip(&self.data.labels) {
            let p = self.probs(x, row);
            for c in 0..self.classes {
                let r = (p[c] - if c == label { T::one() } else { T::zero() }) / n;
                for j in 0..s - 1 {
                    g[c * s + j] = g[c * s + j] + r * row[j];
                }
                g[c * s + s - 1] = g[c * s + s - 1] + r;
            }
        }
        g
    }
}

/// The domains of a robust learning problem `min_x max_{y∈Δ} Σ_m y_m f_m(x)`.
#[derive(Clone)]
pub struct RobustDomainsSpec<T: Scalar> {
    pub domains: Vec<Arc<dyn DomainLoss<T>>>,
}

impl<T: Scalar> RobustDomainsSpec<T> {
    pub fn new(domains: Vec<Arc<dyn DomainLoss<T>>>) -> Self {
        RobustDomainsSpec { domains }
    }

    /// `f_m(x) = ½‖x − t_m‖²` with targets `(1, 0)`, `(−1, 0)`, `(0, 2)`.
    pub fn three_quadratics() -> Self {
        let targets = [[1.0, 0.0], [-1.0, 0.0], [0.0, 2.0]];
        Self::new(
            targets
                .iter()
                .map(|t| {
                    Arc::new(QuadraticDomain {
                        target: t.iter().map(|&v| T::lit(v)).collect(),
                    }) as Arc<dyn DomainLoss<T>>
                })
                .collect(),
        )
    }

    /// Two bundled 3-class datasets with a shared linear classifier.
    pub fn bundled_logistic(l2: T) -> Result<Self> {
        let a = Dataset::parse(DOMAIN_A)?;
        let b = Dataset::parse(DOMAIN_B)?;
        let classes = a.classes.max(b.classes);
        Ok(Self::new(vec![
            Arc::new(LogisticDomain::new(a, classes, l2)?),
            Arc::new(LogisticDomain::new(b, classes, l2)?),
        ]))
    }

    /// `(f_1(x), …, f_M(x))`.
    pub fn losses(&self, x: &[T]) -> Vec<T> {
        self.domains.iter().map(|d| d.value(x)).collect()
    }

    pub fn worst_loss(&self, x: &[T]) -> T {
        self.losses(x).into_iter().fold(T::neg_infinity(), T::max)
    }
}

struct RobustObjective<T: Scalar> {
    domains: Vec<Arc<dyn DomainLoss<T>>>,
}

impl<T: Scalar> Objective<T> for RobustObjective<T> {
    fn value(&self, x: &[T], y: &[T]) -> T {
        self.domains
            .iter()
            .zip(y)
            .fold(T::zero(), |acc, (d, &w)| acc + w * d.value(x))
    }
    fn grad_x(&self, x: &[T], y: &[T]) -> Vec<T> {
        let mut g = vec![T::zero(); x.len()];
        for (d, &w) in self.domains.iter().zip(y) {
            g = vector::axpy(&g, w, &d.grad(x));
        }
        g
    }
    fn grad_y(&self, x: &[T], _y: &[T]) -> Vec<T> {
        self.domains.iter().map(|d| d.value(x)).collect()
    }
}

/// `f(x, y) = Σ_m y_m f_m(x)` over `ℝⁿ × Δ_M`, flagged linear in `y`.
pub fn make_robust_domains<T: Scalar>(spec: &RobustDomainsSpec<T>) -> Result<MinimaxProblem<T>> {
    let m = spec.domains.len();
    if m < 2 {
        return Err(Error::Parameter(format!("need at least 2 domains, got {m}")));
    }
    let n = spec.domains[0].dim();
    if let Some(bad) = spec.domains.iter().find(|d| d.dim() != n) {
        return Err(Error::Shape {
            context: "domain parameter dimension",
            expected: n,
            got: bad.dim(),
        });
    }
    let obj = RobustObjective {
        domains: spec.domains.clone(),
    };
    Ok(MinimaxProblem::from_arc("robust-domains", n, m, Arc::new(obj))?
        .with_set_y(FeasibleSet::simplex(m)?)?
        .with_linear_in_y(true))
}
