//! Multinomial maximum-entropy classifier over binary string features.
//!
//! The model scores label `l` for an input with active features `F` as
//! `b[l] + sum_{f in F} w[f, l]` and normalizes with a softmax. Training
//! maximizes the conditional log-likelihood minus `|w|^2 / (2 sigma^2)`;
//! the per-label bias `b` is left unpenalized so the model can represent the
//! label prior. The optimizer is batch gradient ascent with Barzilai-Borwein
//! trial steps and Armijo backtracking, so every accepted step increases the
//! objective.
//!
//! Models serialize to a small text format:
//!
//! ```text
//! maxent-v1<TAB>schema<TAB>sigma2<TAB>label1<TAB>label2...
//! feature<TAB>label<TAB>weight
//! ```
//!
//! Weights are written with 17 significant digits, which round-trips every
//! `f64` exactly. The bias is stored under the feature name `__bias__`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

pub const FORMAT_VERSION: &str = "maxent-v1";
pub const BIAS_FEATURE: &str = "__bias__";

const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-20;
/// Consecutive small-change iterations needed before stopping on
/// `convergence_tol`.
const PATIENCE: usize = 3;

#[derive(Debug, Error)]
pub enum MaxEntError {
    #[error("no training data")]
    EmptyData,
    #[error("feature name `{0}` is reserved")]
    ReservedFeature(String),
    #[error("feature or label `{0}` contains a tab or newline")]
    UnprintableName(String),
    #[error("model format `{found}` is not `{expected}`")]
    FormatVersion { found: String, expected: String },
    #[error("model was trained on feature schema `{found}`, expected `{expected}`")]
    SchemaMismatch { found: String, expected: String },
    #[error("model line {line}: {message}")]
    Corrupt { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingConfig {
    pub max_iterations: usize,
    /// Relative change in the objective below which training stops.
    pub convergence_tol: f64,
    pub l2_sigma2: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self { max_iterations: 200, convergence_tol: 1e-6, l2_sigma2: 1.0 }
    }
}

/// One training example: active features and the gold label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub features: Vec<String>,
    pub label: String,
}

impl Instance {
    pub fn new<S: Into<String>>(features: impl IntoIterator<Item = S>, label: impl Into<String>) -> Self {
        Self { features: features.into_iter().map(Into::into).collect(), label: label.into() }
    }
}

/// Training data indexed for optimization.
///
/// Parameters are laid out as `[b_0 .. b_L, w[0,0] .. w[0,L], w[1,0] ..]`
/// with `L` labels and features in sorted order.
#[derive(Debug, Clone)]
pub struct Problem {
    labels: Vec<String>,
    features: Vec<String>,
    rows: Vec<(Vec<usize>, usize)>,
    sigma2: f64,
}

impl Problem {
    pub fn new(data: &[Instance], sigma2: f64) -> Result<Self, MaxEntError> {
        if data.is_empty() {
            return Err(MaxEntError::EmptyData);
        }
        let mut labels: Vec<String> = Vec::new();
        let mut features = BTreeSet::new();
        for inst in data {
            if !labels.contains(&inst.label) {
                labels.push(inst.label.clone());
            }
            for f in &inst.features {
                if f == BIAS_FEATURE {
                    return Err(MaxEntError::ReservedFeature(f.clone()));
                }
                features.insert(f.as_str());
            }
        }
        let features: Vec<String> = features.into_iter().map(String::from).collect();
        let feature_index: HashMap<&str, usize> = features.iter().enumerate().map(|(i, f)| (f.as_str(), i)).collect();
        let label_index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let rows = data
            .iter()
            .map(|inst| {
                let mut active: Vec<usize> = inst.features.iter().map(|f| feature_index[f.as_str()]).collect();
                active.sort_unstable();
                active.dedup();
                (active, label_index[inst.label.as_str()])
            })
            .collect();
        Ok(Self { labels, features, rows, sigma2 })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn num_instances(&self) -> usize {
        self.rows.len()
    }

    pub fn dimension(&self) -> usize {
        self.labels.len() * (1 + self.features.len())
    }

    fn scores(&self, theta: &[f64], active: &[usize], out: &mut [f64]) {
        let nl = self.labels.len();
        out.copy_from_slice(&theta[..nl]);
        for &f in active {
            let row = &theta[nl * (1 + f)..nl * (2 + f)];
            for (o, w) in out.iter_mut().zip(row) {
                *o += w;
            }
        }
    }

    /// Penalized log-likelihood at `theta`.
    pub fn objective(&self, theta: &[f64]) -> f64 {
        self.evaluate(theta, None)
    }

    /// Penalized log-likelihood and its gradient at `theta`.
    pub fn objective_and_gradient(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.dimension()];
        let value = self.evaluate(theta, Some(&mut grad));
        (value, grad)
    }

    fn evaluate(&self, theta: &[f64], mut grad: Option<&mut Vec<f64>>) -> f64 {
        let nl = self.labels.len();
        let mut scores = vec![0.0; nl];
        let mut ll = 0.0;
        for (active, gold) in &self.rows {
            self.scores(theta, active, &mut scores);
            let lse = log_sum_exp(&scores);
            ll += scores[*gold] - lse;
            if let Some(g) = grad.as_deref_mut() {
                for l in 0..nl {
                    let resid = f64::from(u8::from(l == *gold)) - (scores[l] - lse).exp();
                    g[l] += resid;
                    for &f in active {
                        g[nl * (1 + f) + l] += resid;
                    }
                }
            }
        }
        let mut penalty = 0.0;
        for (i, w) in theta.iter().enumerate().skip(nl) {
            penalty += w * w;
            if let Some(g) = grad.as_deref_mut() {
                g[i] -= w / self.sigma2;
            }
        }
        ll - penalty / (2.0 * self.sigma2)
    }

    fn into_model(self, theta: &[f64], schema_version: &str) -> MaxEntModel {
        let nl = self.labels.len();
        let weights = self
            .features
            .into_iter()
            .enumerate()
            .map(|(f, name)| (name, theta[nl * (1 + f)..nl * (2 + f)].to_vec()))
            .collect();
        MaxEntModel {
            labels: self.labels,
            bias: theta[..nl].to_vec(),
            weights,
            schema_version: schema_version.to_string(),
            sigma2: self.sigma2,
        }
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// What happened during training.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingReport {
    pub iterations: usize,
    /// Objective before the first step and after every accepted step.
    pub objective_history: Vec<f64>,
    pub gradient_norm: f64,
    pub converged: bool,
    /// Only one label was present; the model always predicts it.
    pub degenerate: bool,
}

/// Gradient norm below which training is considered converged.
pub fn gradient_tolerance(num_instances: usize) -> f64 {
    1e-4 * (1.0 + num_instances as f64)
}

pub fn train(data: &[Instance], config: &TrainingConfig, schema_version: &str) -> Result<MaxEntModel, MaxEntError> {
    train_with_report(data, config, schema_version).map(|(m, _)| m)
}

pub fn train_with_report(
    data: &[Instance],
    config: &TrainingConfig,
    schema_version: &str,
) -> Result<(MaxEntModel, TrainingReport), MaxEntError> {
    let problem = Problem::new(data, config.l2_sigma2)?;
    let mut theta = vec![0.0; problem.dimension()];

    if problem.labels.len() == 1 {
        let report = TrainingReport {
            iterations: 0,
            objective_history: vec![problem.objective(&theta)],
            gradient_norm: 0.0,
            converged: true,
            degenerate: true,
        };
        return Ok((problem.into_model(&theta, schema_version), report));
    }

    let gtol = gradient_tolerance(problem.num_instances());
    let (mut value, mut grad) = problem.objective_and_gradient(&theta);
    let mut history = vec![value];
    let mut step = 1.0 / problem.num_instances() as f64;
    let mut quiet = 0;
    let mut converged = false;
    let mut iterations = 0;
    let mut trial = vec![0.0; theta.len()];

    while iterations < config.max_iterations {
        let gnorm2 = dot(&grad, &grad);
        if gnorm2.sqrt() <= gtol {
            converged = true;
            break;
        }
        let mut t = step;
        let accepted = loop {
            for ((x, th), g) in trial.iter_mut().zip(&theta).zip(&grad) {
                *x = th + t * g;
            }
            let candidate = problem.objective(&trial);
            if candidate.is_finite() && candidate >= value + ARMIJO_C * t * gnorm2 {
                break Some(candidate);
            }
            t *= 0.5;
            if t < MIN_STEP {
                break None;
            }
        };
        let Some(_) = accepted else { break };
        iterations += 1;

        let (new_value, new_grad) = problem.objective_and_gradient(&trial);
        // Barzilai-Borwein step for the next trial: s.s / -(s.y) on the
        // concave objective, with s the move and y the gradient change.
        let s: Vec<f64> = trial.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = new_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = -dot(&s, &y);
        step = if sy > 0.0 { (dot(&s, &s) / sy).clamp(1e-10, 1e10) } else { t * 2.0 };

        let change = (new_value - value).abs() / value.abs().max(1.0);
        theta.copy_from_slice(&trial);
        value = new_value;
        grad = new_grad;
        history.push(value);

        if change < config.convergence_tol {
            quiet += 1;
            if quiet >= PATIENCE {
                converged = true;
                break;
            }
        } else {
            quiet = 0;
        }
    }
    if !converged && dot(&grad, &grad).sqrt() <= gtol {
        converged = true;
    }

    let report = TrainingReport {
        iterations,
        objective_history: history,
        gradient_norm: dot(&grad, &grad).sqrt(),
        converged,
        degenerate: false,
    };
    Ok((problem.into_model(&theta, schema_version), report))
}

/// A trained classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxEntModel {
    labels: Vec<String>,
    bias: Vec<f64>,
    weights: BTreeMap<String, Vec<f64>>,
    schema_version: String,
    sigma2: f64,
}

impl MaxEntModel {
    /// A model with all weights zero, predicting uniformly.
    pub fn zero(labels: Vec<String>, schema_version: &str, sigma2: f64) -> Self {
        let n = labels.len();
        Self { labels, bias: vec![0.0; n], weights: BTreeMap::new(), schema_version: schema_version.into(), sigma2 }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn schema_version(&self) -> &str {
        &self.schema_version
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    /// Per-label weights of one feature, if the model has seen it.
    pub fn feature_weights(&self, feature: &str) -> Option<&[f64]> {
        self.weights.get(feature).map(Vec::as_slice)
    }

    pub fn feature_weights_mut(&mut self, feature: &str) -> &mut Vec<f64> {
        let n = self.labels.len();
        self.weights.entry(feature.to_string()).or_insert_with(|| vec![0.0; n])
    }

    pub fn check_schema(&self, expected: &str) -> Result<(), MaxEntError> {
        if self.schema_version == expected {
            Ok(())
        } else {
            Err(MaxEntError::SchemaMismatch { found: self.schema_version.clone(), expected: expected.into() })
        }
    }

    /// `p(label | features)` for every label, in model label order.
    pub fn predict_distribution<S: AsRef<str>>(&self, features: &[S]) -> Vec<(&str, f64)> {
        let mut scores = self.bias.clone();
        let mut seen = BTreeSet::new();
        for f in features {
            let f = f.as_ref();
            if !seen.insert(f) {
                continue;
            }
            if let Some(row) = self.weights.get(f) {
                for (s, w) in scores.iter_mut().zip(row) {
                    *s += w;
                }
            }
        }
        let lse = log_sum_exp(&scores);
        self.labels.iter().map(String::as_str).zip(scores.iter().map(|s| (s - lse).exp())).collect()
    }

    /// Most probable label; ties go to the label listed first.
    pub fn predict<S: AsRef<str>>(&self, features: &[S]) -> &str {
        let dist = self.predict_distribution(features);
        let mut best = 0;
        for (i, (_, p)) in dist.iter().enumerate() {
            if *p > dist[best].1 {
                best = i;
            }
        }
        dist[best].0
    }

    pub fn save(&self) -> Result<String, MaxEntError> {
        let check = |s: &str| {
            if s.contains(['\t', '\n', '\r']) || s.is_empty() {
                Err(MaxEntError::UnprintableName(s.to_string()))
            } else {
                Ok(())
            }
        };
        check(&self.schema_version)?;
        let mut out = format!("{FORMAT_VERSION}\t{}\t{:.16e}", self.schema_version, self.sigma2);
        for l in &self.labels {
            check(l)?;
            out.push('\t');
            out.push_str(l);
        }
        out.push('\n');
        let mut write_row = |name: &str, row: &[f64]| {
            for (label, w) in self.labels.iter().zip(row) {
                if *w != 0.0 {
                    out.push_str(&format!("{name}\t{label}\t{w:.16e}\n"));
                }
            }
        };
        write_row(BIAS_FEATURE, &self.bias);
        for (name, row) in &self.weights {
            check(name)?;
            write_row(name, row);
        }
        Ok(out)
    }

    pub fn load(input: &str) -> Result<Self, MaxEntError> {
        let corrupt = |line: usize, message: &str| MaxEntError::Corrupt { line, message: message.to_string() };
        let mut lines = input.lines();
        let header = lines.next().ok_or_else(|| corrupt(1, "missing header"))?;
        let mut fields = header.split('\t');
        let version = fields.next().unwrap_or_default();
        if version != FORMAT_VERSION {
            return Err(MaxEntError::FormatVersion { found: version.to_string(), expected: FORMAT_VERSION.into() });
        }
        let schema_version = fields.next().ok_or_else(|| corrupt(1, "missing schema version"))?.to_string();
        let sigma2: f64 = fields
            .next()
            .and_then(|s| s.parse().ok())
            .filter(|s: &f64| s.is_finite() && *s > 0.0)
            .ok_or_else(|| corrupt(1, "missing or invalid sigma2"))?;
        let labels: Vec<String> = fields.map(String::from).collect();
        let unique: BTreeSet<&String> = labels.iter().collect();
        if labels.is_empty() || unique.len() != labels.len() {
            return Err(corrupt(1, "label list must be non-empty and unique"));
        }
        let mut model = MaxEntModel::zero(labels, &schema_version, sigma2);
        let mut seen = BTreeSet::new();
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split('\t').collect();
            let [feature, label, weight] = parts[..] else {
                return Err(corrupt(lineno, "expected feature<TAB>label<TAB>weight"));
            };
            let l = model.labels.iter().position(|x| x == label).ok_or_else(|| corrupt(lineno, "unknown label"))?;
            let w: f64 = weight.parse().map_err(|_| corrupt(lineno, "unparseable weight"))?;
            if !w.is_finite() {
                return Err(corrupt(lineno, "non-finite weight"));
            }
            if !seen.insert((feature.to_string(), l)) {
                return Err(corrupt(lineno, "duplicate weight"));
            }
            if feature == BIAS_FEATURE {
                model.bias[l] = w;
            } else {
                model.feature_weights_mut(feature)[l] = w;
            }
        }
        Ok(model)
    }
}
