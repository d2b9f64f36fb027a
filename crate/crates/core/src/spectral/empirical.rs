use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::gentheory::TheoryLevel;
use crate::kernels::GramMatrix;
use crate::linalg;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumSource {
    Empirical,
    Analytic,
}

/// Eigenvalues (descending, clamped at 0) paired with target weights ā_k.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub target_weights: Vec<f64>,
    pub source: SpectrumSource,
}

/// Eigenpairs of G/P with Φ normalized so that (1/P)ΦᵀΦ = I.
#[derive(Clone, Debug)]
pub struct EmpiricalModes {
    size: usize,
    eigenvalues: Vec<f64>,
    /// Row-major P×P; column k holds Φ_{·,k}.
    phi: Vec<f64>,
}

impl EmpiricalModes {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn phi(&self, mu: usize, k: usize) -> f64 {
        self.phi[mu * self.size + k]
    }

    /// ā = (1/P) Φᵀ y.
    pub fn weights(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(self.size, y.len())?;
        let p = self.size;
        let mut a = vec![0.0; p];
        for (mu, &ymu) in y.iter().enumerate() {
            let row = &self.phi[mu * p..(mu + 1) * p];
            for (ak, &f) in a.iter_mut().zip(row) {
                *ak += f * ymu;
            }
        }
        a.iter_mut().for_each(|v| *v /= p as f64);
        Ok(a)
    }
}

pub fn empirical_modes(g: &GramMatrix) -> Result<EmpiricalModes> {
    let p = g.size();
    let scaled: Vec<f64> = g.as_slice().iter().map(|v| v / p as f64).collect();
    let eig = linalg::symmetric_eigen(&scaled, p)?;
    let root_p = (p as f64).sqrt();
    let mut phi = vec![0.0; p * p];
    for k in 0..p {
        let col = eig.vectors.col(k);
        let pivot = (0..p)
            .max_by(|&a, &b| col[a].abs().total_cmp(&col[b].abs()).then(b.cmp(&a)))
            .unwrap_or(0);
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for mu in 0..p {
            phi[mu * p + k] = sign * root_p * col[mu];
        }
    }
    let eigenvalues = eig.values.into_iter().map(|v| v.max(0.0)).collect();
    Ok(EmpiricalModes {
        size: p,
        eigenvalues,
        phi,
    })
}

pub fn empirical_spectrum(g: &GramMatrix, y: &[f64]) -> Result<SpectrumReport> {
    check_len(g.size(), y.len())?;
    let modes = empirical_modes(g)?;
    let target_weights = modes.weights(y)?;
    Ok(SpectrumReport {
        eigenvalues: modes.eigenvalues,
        target_weights,
        source: SpectrumSource::Empirical,
    })
}

/// (Σλ)² / Σλ².
pub fn participation_ratio(eigenvalues: &[f64]) -> f64 {
    let s: f64 = eigenvalues.iter().sum();
    let s2: f64 = eigenvalues.iter().map(|v| v * v).sum();
    if s2 == 0.0 {
        0.0
    } else {
        s * s / s2
    }
}

impl SpectrumReport {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn total_power(&self) -> f64 {
        self.target_weights.iter().map(|a| a * a).sum()
    }

    /// C(l) = 1 − Σ_{k>l} ā_k² / Σ_k ā_k².
    pub fn cumulative_power(&self, l: usize) -> Result<f64> {
        if l > self.len() {
            return Err(Error::param("l", format!("{l} exceeds {} modes", self.len())));
        }
        let total = self.total_power();
        if total == 0.0 {
            return Err(Error::ZeroTargetPower);
        }
        let tail: f64 = self.target_weights[l..].iter().map(|a| a * a).sum();
        Ok((1.0 - tail / total).clamp(0.0, 1.0))
    }

    /// C(l) for l = 1..=len.
    pub fn cumulative_curve(&self) -> Result<Vec<f64>> {
        let total = self.total_power();
        if total == 0.0 {
            return Err(Error::ZeroTargetPower);
        }
        let mut acc = 0.0;
        Ok(self
            .target_weights
            .iter()
            .map(|a| {
                acc += a * a;
                (acc / total).clamp(0.0, 1.0)
            })
            .collect())
    }

    pub fn participation_ratio(&self) -> f64 {
        participation_ratio(&self.eigenvalues)
    }

    /// One theory level per mode with power ā_k².
    pub fn theory_levels(&self) -> Vec<TheoryLevel> {
        self.eigenvalues
            .iter()
            .zip(&self.target_weights)
            .map(|(&eigenvalue, a)| TheoryLevel {
                eigenvalue,
                power: a * a,
                multiplicity: 1.0,
            })
            .collect()
    }

    /// Columns: rank, eigenvalue, weight, cumulative_power.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let curve = self
            .cumulative_curve()
            .unwrap_or_else(|_| vec![f64::NAN; self.len()]);
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["rank", "eigenvalue", "weight", "cumulative_power"])?;
        for (k, ((e, a), cp)) in self.eigenvalues.iter().zip(&self.target_weights).zip(curve).enumerate() {
            out.write_record([
                (k + 1).to_string(),
                format!("{e:.16e}"),
                format!("{a:.16e}"),
                format!("{cp:.16e}"),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}
