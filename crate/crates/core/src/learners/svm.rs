use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::featuremaps::FeatureMapSpec;
use crate::kernels::GramMatrix;

pub const SVM_TOLERANCE: f64 = 1e-3;
pub const SVM_MAX_EPOCHS: usize = 10_000;

/// Soft-margin binary SVM in dual form over a precomputed Gram.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    /// α_μ ∈ [0, C].
    pub dual_coefficients: Vec<f64>,
    pub labels: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub support_indices: Vec<usize>,
    pub spec: Option<FeatureMapSpec>,
    /// Dual objective Σα − ½ αᵀQα recorded after every epoch.
    pub objective_trace: Vec<f64>,
    /// Final maximal KKT violation m(α) − M(α).
    pub kkt_violation: f64,
    pub iterations: usize,
}

/// SMO with maximal-violating-pair working-set selection.
pub fn svm_fit(g: &GramMatrix, y: &[f64], c: f64) -> Result<SvmModel> {
    let p = g.size();
    check_len(p, y.len())?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::param("C", format!("{c} must be positive")));
    }
    if let Some(bad) = y.iter().find(|&&v| v != 1.0 && v != -1.0) {
        return Err(Error::param("labels", format!("{bad} is not ±1")));
    }
    if y.iter().all(|&v| v == y[0]) {
        return Ok(SvmModel {
            dual_coefficients: vec![0.0; p],
            labels: y.to_vec(),
            bias: y[0],
            c,
            support_indices: Vec::new(),
            spec: g.spec().copied(),
            objective_trace: vec![0.0],
            kkt_violation: 0.0,
            iterations: 0,
        });
    }

    let q = |i: usize, j: usize| y[i] * y[j] * g.get(i, j);
    let mut alpha = vec![0.0; p];
    let mut grad = vec![-1.0; p];
    let is_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let is_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);
    let objective = |alpha: &[f64], grad: &[f64]| -0.5 * alpha.iter().zip(grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>();

    let max_iter = SVM_MAX_EPOCHS.saturating_mul(p.max(1));
    let mut trace = vec![0.0];
    let mut iterations = 0;
    let violation = loop {
        let (mut i, mut gmax) = (usize::MAX, f64::NEG_INFINITY);
        let (mut j, mut gmin) = (usize::MAX, f64::INFINITY);
        for t in 0..p {
            let v = -y[t] * grad[t];
            if is_up(alpha[t], y[t]) && v > gmax {
                gmax = v;
                i = t;
            }
            if is_low(alpha[t], y[t]) && v < gmin {
                gmin = v;
                j = t;
            }
        }
        let violation = gmax - gmin;
        if i == usize::MAX || j == usize::MAX || violation < SVM_TOLERANCE {
            break violation.max(0.0);
        }
        if iterations >= max_iter {
            return Err(Error::NonConvergence {
                iterations,
                residual: violation,
            });
        }

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let qii = q(i, i);
        let qjj = q(j, j);
        let qij = q(i, j);
        if y[i] != y[j] {
            let quad = (qii + qjj + 2.0 * qij).max(1e-12);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (qii + qjj - 2.0 * qij).max(1e-12);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..p {
            grad[t] += q(t, i) * di + q(t, j) * dj;
        }
        iterations += 1;
        if iterations % p == 0 {
            trace.push(objective(&alpha, &grad));
        }
    };
    trace.push(objective(&alpha, &grad));

    let rho = {
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut free, mut sum_free) = (0usize, 0.0);
        for t in 0..p {
            let yg = y[t] * grad[t];
            if alpha[t] >= c {
                if y[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if alpha[t] <= 0.0 {
                if y[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free += 1;
                sum_free += yg;
            }
        }
        if free > 0 {
            sum_free / free as f64
        } else {
            0.5 * (ub + lb)
        }
    };

    Ok(SvmModel {
        support_indices: (0..p).filter(|&t| alpha[t] > 0.0).collect(),
        dual_coefficients: alpha,
        labels: y.to_vec(),
        bias: -rho,
        c,
        spec: g.spec().copied(),
        objective_trace: trace,
        kkt_violation: violation,
        iterations,
    })
}

impl SvmModel {
    /// Σ α_μ y_μ k_μ + b.
    pub fn decision(&self, kvec: &[f64]) -> Result<f64> {
        check_len(self.labels.len(), kvec.len())?;
        Ok(self
            .support_indices
            .iter()
            .map(|&t| self.dual_coefficients[t] * self.labels[t] * kvec[t])
            .sum::<f64>()
            + self.bias)
    }

    /// Predicted label, ties going to +1.
    pub fn predict(&self, kvec: &[f64]) -> Result<f64> {
        Ok(if self.decision(kvec)? >= 0.0 { 1.0 } else { -1.0 })
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

pub fn svm_predict(model: &SvmModel, kvec: &[f64]) -> Result<f64> {
    model.predict(kvec)
}
