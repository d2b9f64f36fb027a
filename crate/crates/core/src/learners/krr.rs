use std::path::Path;

use serde::{Deserialize, Serialize};

use super::MIN_RIDGE;
use crate::error::{check_len, Error, Result};
use crate::featuremaps::FeatureMapSpec;
use crate::kernels::GramMatrix;
use crate::linalg;

/// Dual solution α = (K + λI)⁻¹ y.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrrModel {
    pub dual_coefficients: Vec<f64>,
    pub ridge: f64,
    pub spec: Option<FeatureMapSpec>,
    /// Number of training samples the duals refer to.
    pub train_size: usize,
}

/// Fits KRR on a precomputed Gram. λ = 0 runs with λ = 1e-10.
pub fn krr_fit(g: &GramMatrix, y: &[f64], ridge: f64) -> Result<KrrModel> {
    check_len(g.size(), y.len())?;
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::param("ridge", format!("{ridge} must be finite and ≥ 0")));
    }
    let ridge = if ridge == 0.0 { MIN_RIDGE } else { ridge };
    let dual_coefficients = linalg::spd_solve(g.as_slice(), g.size(), ridge, y)?;
    Ok(KrrModel {
        dual_coefficients,
        ridge,
        spec: g.spec().copied(),
        train_size: g.size(),
    })
}

impl KrrModel {
    /// f(x) = Σ_μ α_μ k(x, x^μ).
    pub fn predict(&self, kvec: &[f64]) -> Result<f64> {
        check_len(self.dual_coefficients.len(), kvec.len())?;
        Ok(self.dual_coefficients.iter().zip(kvec).map(|(a, k)| a * k).sum())
    }

    /// ‖(K + λI)α − y‖.
    pub fn residual_norm(&self, g: &GramMatrix, y: &[f64]) -> f64 {
        (0..g.size())
            .map(|i| {
                let ka: f64 = g.row(i).iter().zip(&self.dual_coefficients).map(|(k, a)| k * a).sum();
                (ka + self.ridge * self.dual_coefficients[i] - y[i]).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

pub fn krr_predict(model: &KrrModel, kvec: &[f64]) -> Result<f64> {
    model.predict(kvec)
}
