use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::errmodel::FeatureVector;
use crate::error::{Error, Result};

/// Training settings for the damage model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    /// L2 penalty weight; applied as `l2_lambda/(2N) * ||w||^2`, bias
    /// excluded. Zero disables regularization.
    pub l2_lambda: f64,
    /// Convergence threshold on the gradient's L2 norm.
    pub tolerance: f64,
    /// Hard cap on gradient-descent iterations. Zero returns the untrained
    /// (all-zero) model, useful as a neutral baseline.
    pub max_iterations: usize,
    /// Features occurring fewer times than this across the corpus are
    /// dropped from the vocabulary.
    pub min_feature_count: u32,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            l2_lambda: 1.0,
            tolerance: 1e-8,
            max_iterations: 10_000,
            min_feature_count: 1,
        }
    }
}

/// Facts about how training went, kept with the model for auditability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingInfo {
    pub iterations: usize,
    pub final_loss: f64,
    pub gradient_norm: f64,
    pub examples: usize,
    pub positive_examples: usize,
}

/// A trained logistic-regression damage model.
///
/// `vocabulary[i]` (sorted, deduplicated) owns `weights[i]`. Training is
/// deterministic: same data, same hyperparameters, same model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    pub vocabulary: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub hyperparams: Hyperparams,
    pub info: TrainingInfo,
}

impl ErrorModel {
    /// Probability that a sample with these edit operations is damaging.
    pub fn predict(&self, features: &BTreeMap<String, u32>) -> f64 {
        let mut z = self.bias;
        for (name, count) in features {
            if let Ok(idx) = self.vocabulary.binary_search(name) {
                z += self.weights[idx] * f64::from(*count);
            }
        }
        sigmoid(z)
    }

    pub fn weight_of(&self, feature: &str) -> Option<f64> {
        self.vocabulary.binary_search_by(|v| v.as_str().cmp(feature)).ok().map(|i| self.weights[i])
    }

    /// Features by descending weight (most damaging first), ties broken by
    /// name. `top == 0` returns the whole vocabulary.
    pub fn rank(&self, top: usize) -> Vec<(String, f64)> {
        let mut ranked: Vec<(String, f64)> = self
            .vocabulary
            .iter()
            .cloned()
            .zip(self.weights.iter().copied())
            .collect();
        ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("weights are finite").then_with(|| a.0.cmp(&b.0)));
        if top > 0 {
            ranked.truncate(top);
        }
        ranked
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self).expect("models always serialize");
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ErrorModel> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&raw).map_err(|e| Error::Config(format!(
            "model file {} did not parse: {e}",
            path.display()
        )))
    }
}

/// Sparse design matrix: per row, `(vocabulary index, count)` pairs.
struct Design {
    rows: Vec<Vec<(usize, f64)>>,
    labels: Vec<f64>,
}

fn build_design(data: &[FeatureVector], vocabulary: &[String]) -> Design {
    let index: BTreeMap<&str, usize> =
        vocabulary.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let rows = data
        .iter()
        .map(|fv| {
            fv.features
                .iter()
                .filter_map(|(name, count)| {
                    index.get(name.as_str()).map(|&i| (i, f64::from(*count)))
                })
                .collect()
        })
        .collect();
    let labels = data.iter().map(|fv| f64::from(u8::from(fv.label))).collect();
    Design { rows, labels }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow for large `|z|`.
fn log1p_exp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Regularized mean negative log-likelihood:
/// `1/N * sum(ln(1+e^z) - y*z) + lambda/(2N) * ||w||^2`, bias unpenalized.
pub fn logistic_objective(
    data: &[FeatureVector],
    vocabulary: &[String],
    weights: &[f64],
    bias: f64,
    l2_lambda: f64,
) -> f64 {
    let design = build_design(data, vocabulary);
    objective(&design, weights, bias, l2_lambda)
}

fn objective(design: &Design, weights: &[f64], bias: f64, l2_lambda: f64) -> f64 {
    let n = design.rows.len() as f64;
    let mut loss = 0.0;
    for (row, y) in design.rows.iter().zip(&design.labels) {
        let z: f64 = bias + row.iter().map(|(i, x)| weights[*i] * x).sum::<f64>();
        loss += log1p_exp(z) - y * z;
    }
    let penalty: f64 = weights.iter().map(|w| w * w).sum::<f64>() * l2_lambda / 2.0;
    (loss + penalty) / n
}

/// Gradient of [`logistic_objective`]; returns `(d/dw, d/dbias)`.
pub fn logistic_gradient(
    data: &[FeatureVector],
    vocabulary: &[String],
    weights: &[f64],
    bias: f64,
    l2_lambda: f64,
) -> (Vec<f64>, f64) {
    let design = build_design(data, vocabulary);
    gradient(&design, weights, bias, l2_lambda)
}

fn gradient(design: &Design, weights: &[f64], bias: f64, l2_lambda: f64) -> (Vec<f64>, f64) {
    let n = design.rows.len() as f64;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (row, y) in design.rows.iter().zip(&design.labels) {
        let z: f64 = bias + row.iter().map(|(i, x)| weights[*i] * x).sum::<f64>();
        let residual = sigmoid(z) - y;
        grad_b += residual;
        for (i, x) in row {
            grad_w[*i] += residual * x;
        }
    }
    for (g, w) in grad_w.iter_mut().zip(weights) {
        *g = (*g + l2_lambda * w) / n;
    }
    (grad_w, grad_b / n)
}

/// Trains by full-batch gradient descent with backtracking line search.
///
/// The objective is convex, so with the line search the solver cannot
/// diverge; it stops when the gradient norm drops under
/// [`Hyperparams::tolerance`]. Needs both classes present, and fails
/// loudly ([`Error::NonConvergence`]) if the iteration cap is hit first.
pub fn train_logreg(data: &[FeatureVector], hyperparams: &Hyperparams) -> Result<ErrorModel> {
    if hyperparams.l2_lambda < 0.0 {
        return Err(Error::Config("l2_lambda must be nonnegative".into()));
    }
    let positives = data.iter().filter(|fv| fv.label).count();
    if data.is_empty() || positives == 0 || positives == data.len() {
        let label = u8::from(positives > 0);
        return Err(Error::SingleClass { label });
    }

    // vocabulary: sorted feature names above the count floor
    let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
    for fv in data {
        for (name, count) in &fv.features {
            *counts.entry(name.as_str()).or_insert(0) += count;
        }
    }
    let vocabulary: Vec<String> = counts
        .into_iter()
        .filter(|(_, c)| *c >= hyperparams.min_feature_count.max(1))
        .map(|(name, _)| name.to_string())
        .collect();

    let design = build_design(data, &vocabulary);
    let lambda = hyperparams.l2_lambda;
    let mut weights = vec![0.0; vocabulary.len()];
    let mut bias = 0.0;

    let mut iterations = 0;
    let mut step = 1.0f64;
    let (mut grad_w, mut grad_b) = gradient(&design, &weights, bias, lambda);
    let mut grad_norm = l2_norm(&grad_w, grad_b);

    while iterations < hyperparams.max_iterations && grad_norm > hyperparams.tolerance {
        let loss = objective(&design, &weights, bias, lambda);
        let grad_sq = grad_norm * grad_norm;

        // backtracking (Armijo) line search along -gradient
        let mut alpha = step;
        loop {
            let cand_w: Vec<f64> =
                weights.iter().zip(&grad_w).map(|(w, g)| w - alpha * g).collect();
            let cand_b = bias - alpha * grad_b;
            let cand_loss = objective(&design, &cand_w, cand_b, lambda);
            if cand_loss <= loss - 1e-4 * alpha * grad_sq {
                weights = cand_w;
                bias = cand_b;
                // let the step grow back so progress stays fast after a
                // cautious stretch
                step = (alpha * 2.0).min(1e6);
                break;
            }
            alpha *= 0.5;
            if alpha < 1e-20 {
                return Err(Error::NonConvergence { iterations, gradient_norm: grad_norm });
            }
        }

        iterations += 1;
        (grad_w, grad_b) = gradient(&design, &weights, bias, lambda);
        grad_norm = l2_norm(&grad_w, grad_b);
    }

    if grad_norm > hyperparams.tolerance && hyperparams.max_iterations > 0 {
        return Err(Error::NonConvergence {
            iterations,
            gradient_norm: grad_norm,
        });
    }

    let final_loss = objective(&design, &weights, bias, lambda);
    Ok(ErrorModel {
        vocabulary,
        weights,
        bias,
        hyperparams: hyperparams.clone(),
        info: TrainingInfo {
            iterations,
            final_loss,
            gradient_norm: grad_norm,
            examples: data.len(),
            positive_examples: positives,
        },
    })
}

fn l2_norm(grad_w: &[f64], grad_b: f64) -> f64 {
    (grad_w.iter().map(|g| g * g).sum::<f64>() + grad_b * grad_b).sqrt()
}
