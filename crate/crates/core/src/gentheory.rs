//! Self-consistent generalization-error predictor for kernel ridge regression.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A (possibly degenerate) eigenvalue carrying `power` = Σ ā² over its modes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryLevel {
    pub eigenvalue: f64,
    pub power: f64,
    pub multiplicity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryInput {
    pub levels: Vec<TheoryLevel>,
    pub ridge: f64,
    pub noise_variance: f64,
}

impl TheoryInput {
    /// One level per mode from parallel eigenvalue and weight lists.
    pub fn from_modes(eigenvalues: &[f64], weights: &[f64], ridge: f64, noise_variance: f64) -> Result<Self> {
        if eigenvalues.len() != weights.len() {
            return Err(Error::Dimension {
                expected: eigenvalues.len(),
                actual: weights.len(),
            });
        }
        let levels = eigenvalues
            .iter()
            .zip(weights)
            .map(|(&e, &a)| TheoryLevel {
                eigenvalue: e.max(0.0),
                power: a * a,
                multiplicity: 1.0,
            })
            .collect();
        Self::new(levels, ridge, noise_variance)
    }

    pub fn new(levels: Vec<TheoryLevel>, ridge: f64, noise_variance: f64) -> Result<Self> {
        let input = Self {
            levels,
            ridge,
            noise_variance,
        };
        input.validate()?;
        Ok(input)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(Error::param("ridge", format!("{} must be finite and ≥ 0", self.ridge)));
        }
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return Err(Error::param("noise_variance", "must be finite and ≥ 0"));
        }
        for l in &self.levels {
            if !(l.eigenvalue >= 0.0 && l.power >= 0.0 && l.multiplicity > 0.0) || !l.eigenvalue.is_finite() {
                return Err(Error::param("levels", format!("invalid level {l:?}")));
            }
        }
        Ok(())
    }

    pub fn total_power(&self) -> f64 {
        self.levels.iter().map(|l| l.power).sum()
    }
}

/// κ − λ − κ·Σ m η/(Pη + κ).
pub fn kappa_residual(p: f64, ridge: f64, levels: &[(f64, f64)], kappa: f64) -> f64 {
    kappa - ridge - kappa * levels.iter().map(|&(e, m)| m * e / (p * e + kappa)).sum::<f64>()
}

/// Self-consistent κ for unit-multiplicity eigenvalues.
pub fn solve_kappa(p: f64, ridge: f64, eigenvalues: &[f64]) -> Result<f64> {
    let levels: Vec<(f64, f64)> = eigenvalues.iter().map(|&e| (e, 1.0)).collect();
    solve_kappa_levels(p, ridge, &levels)
}

const MAX_ITER: usize = 100_000;

/// Self-consistent κ over (eigenvalue, multiplicity) pairs.
pub fn solve_kappa_levels(p: f64, ridge: f64, levels: &[(f64, f64)]) -> Result<f64> {
    if !(p >= 0.0) || !(ridge >= 0.0) {
        return Err(Error::param("p", "P and λ must be ≥ 0"));
    }
    let levels: Vec<(f64, f64)> = levels.iter().copied().filter(|&(e, _)| e > 0.0).collect();
    let mass: f64 = levels.iter().map(|&(e, m)| e * m).sum();
    let upper = ridge + mass;
    if upper == 0.0 {
        return Ok(0.0);
    }
    if ridge == 0.0 {
        let modes: f64 = levels.iter().map(|&(_, m)| m).sum();
        if p >= modes {
            return Ok(0.0);
        }
    }
    let g = |k: f64| ridge + k * levels.iter().map(|&(e, m)| m * e / (p * e + k)).sum::<f64>();
    let tol = |k: f64| 1e-10 * k.max(ridge).max(1.0);

    let mut kappa = upper;
    let mut converged = false;
    let mut last_sign = 0.0f64;
    let mut flips = 0;
    for _ in 0..MAX_ITER {
        let next = 0.5 * kappa + 0.5 * g(kappa);
        let step = next - kappa;
        if step.signum() != last_sign && last_sign != 0.0 {
            flips += 1;
            if flips > 8 {
                break;
            }
        }
        last_sign = step.signum();
        kappa = next;
        if step.abs() / kappa.max(1e-300) < 1e-12 {
            converged = true;
            break;
        }
    }
    if !converged || kappa_residual(p, ridge, &levels, kappa).abs() > tol(kappa) {
        kappa = bisect(p, ridge, &levels, upper);
    }
    let residual = kappa_residual(p, ridge, &levels, kappa);
    if residual.abs() > tol(kappa) || !kappa.is_finite() {
        return Err(Error::NonConvergence {
            iterations: MAX_ITER,
            residual,
        });
    }
    Ok(kappa)
}

// Geometric bisection on h(κ) = 1 − λ/κ − Σ m η/(Pη + κ), increasing in κ.
fn bisect(p: f64, ridge: f64, levels: &[(f64, f64)], upper: f64) -> f64 {
    let h = |k: f64| 1.0 - ridge / k - levels.iter().map(|&(e, m)| m * e / (p * e + k)).sum::<f64>();
    let mut hi = upper;
    let mut lo = if ridge > 0.0 { ridge } else { upper * 1e-300 };
    for _ in 0..4000 {
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) {
            break;
        }
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (a, b) = (lo, hi);
    // finish with arithmetic steps for full precision
    let (mut lo, mut hi) = (a, b);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryPoint {
    pub p: f64,
    pub error: f64,
    pub kappa: f64,
    pub gamma: f64,
}

/// E_g(P) with solved κ and γ. Eigenvalue-zero levels act both as label
/// noise and as irreducible error.
pub fn generalization_error(input: &TheoryInput, p: f64) -> Result<TheoryPoint> {
    input.validate()?;
    let (nonzero, zero): (Vec<&TheoryLevel>, Vec<&TheoryLevel>) =
        input.levels.iter().partition(|l| l.eigenvalue > 0.0);
    let zero_power: f64 = zero.iter().map(|l| l.power).sum();
    let noise = input.noise_variance + zero_power;
    let pairs: Vec<(f64, f64)> = nonzero.iter().map(|l| (l.eigenvalue, l.multiplicity)).collect();
    let kappa = solve_kappa_levels(p, input.ridge, &pairs)?;

    let mut gamma = 0.0;
    let mut fit = 0.0;
    for l in &nonzero {
        let d = p * l.eigenvalue + kappa;
        gamma += l.multiplicity * p * l.eigenvalue * l.eigenvalue / (d * d);
        fit += l.power / (d * d);
    }
    let error = if kappa > 0.0 {
        if gamma >= 1.0 {
            return Err(Error::Divergence { gamma });
        }
        kappa * kappa / (1.0 - gamma) * fit + noise * gamma / (1.0 - gamma) + zero_power
    } else if noise == 0.0 {
        // interpolation limit with every learnable mode fitted exactly
        0.0
    } else if gamma >= 1.0 - 1e-15 {
        return Err(Error::Divergence { gamma });
    } else {
        noise * gamma / (1.0 - gamma) + zero_power
    };
    Ok(TheoryPoint {
        p,
        error: error.max(0.0),
        kappa,
        gamma,
    })
}

/// κ for a single stage with η̄_l, data ratio α_l and effective ridge λ̃.
pub fn explicit_kappa_single_stage(alpha: f64, eta_bar: f64, ridge_eff: f64) -> Result<f64> {
    if !(eta_bar > 0.0) || !(ridge_eff >= 0.0) || !(alpha >= 0.0) {
        return Err(Error::param("eta_bar", "need η̄ > 0, λ̃ ≥ 0, α ≥ 0"));
    }
    let a = ridge_eff + eta_bar - eta_bar * alpha;
    let prod = 4.0 * ridge_eff * eta_bar * alpha;
    let root = (a * a + prod).sqrt();
    Ok(if a >= 0.0 {
        0.5 * (a + root)
    } else {
        0.5 * prod / (root - a)
    })
}

/// Decoupled error while stage `l` is being learned. `eta_bar[k]` and
/// `power[k]` are the grouped η̄_k and ā_k².
pub fn staged_error(
    l: usize,
    alpha: f64,
    eta_bar: &[f64],
    power: &[f64],
    ridge: f64,
    noise_variance: f64,
) -> Result<f64> {
    if eta_bar.len() != power.len() {
        return Err(Error::Dimension {
            expected: eta_bar.len(),
            actual: power.len(),
        });
    }
    if l >= eta_bar.len() {
        return Err(Error::param("l", format!("{l} exceeds {} stages", eta_bar.len())));
    }
    let tail_eta: f64 = eta_bar[l + 1..].iter().sum();
    let tail_power: f64 = power[l + 1..].iter().sum();
    if alpha.is_infinite() {
        return Ok(tail_power);
    }
    let kappa = explicit_kappa_single_stage(alpha, eta_bar[l], ridge + tail_eta)?;
    let d = alpha * eta_bar[l] + kappa;
    let noise_eff = noise_variance + tail_power;
    if kappa == 0.0 {
        let gamma = alpha * eta_bar[l].powi(2) / (d * d);
        return Ok(if noise_eff == 0.0 || gamma == 0.0 {
            tail_power
        } else if gamma >= 1.0 {
            return Err(Error::Divergence { gamma });
        } else {
            noise_eff * gamma / (1.0 - gamma) + tail_power
        });
    }
    let gamma = alpha * eta_bar[l].powi(2) / (d * d);
    if gamma >= 1.0 {
        return Err(Error::Divergence { gamma });
    }
    Ok(kappa * kappa / (1.0 - gamma) * power[l] / (d * d) + noise_eff * gamma / (1.0 - gamma) + tail_power)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TheoryCurve {
    pub sample_counts: Vec<f64>,
    pub errors: Vec<f64>,
    pub kappas: Vec<f64>,
    pub gammas: Vec<f64>,
}

impl TheoryCurve {
    /// Columns: P, E_g, kappa, gamma.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["P", "E_g", "kappa", "gamma"])?;
        for i in 0..self.sample_counts.len() {
            out.write_record([
                self.sample_counts[i].to_string(),
                format!("{:.16e}", self.errors[i]),
                format!("{:.16e}", self.kappas[i]),
                format!("{:.16e}", self.gammas[i]),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn learning_curve(input: &TheoryInput, p_grid: &[f64]) -> Result<TheoryCurve> {
    let points: Vec<TheoryPoint> = p_grid
        .par_iter()
        .map(|&p| generalization_error(input, p))
        .collect::<Result<_>>()?;
    Ok(TheoryCurve {
        sample_counts: p_grid.to_vec(),
        errors: points.iter().map(|t| t.error).collect(),
        kappas: points.iter().map(|t| t.kappa).collect(),
        gammas: points.iter().map(|t| t.gamma).collect(),
    })
}
