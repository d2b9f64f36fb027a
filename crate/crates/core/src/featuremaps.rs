//! Data-dependent embeddings |ψ(x)⟩ and their fidelity kernels.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::rng::derive_seed;
use crate::simcore::{random_haar_qubit, Statevector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureMapFamily {
    /// ⊗_j Rx(c·x_j)|0⟩
    ProductRx,
    /// U_Z(cx) H U_Z(cx) H |0⟩
    Iqp,
    /// Heisenberg-chain evolution of a Haar-random product state (n+1 qubits)
    Evo,
}

impl fmt::Display for FeatureMapFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureMapFamily::ProductRx => "product-rx",
            FeatureMapFamily::Iqp => "iqp",
            FeatureMapFamily::Evo => "evo",
        })
    }
}

impl std::str::FromStr for FeatureMapFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "product-rx" => Ok(FeatureMapFamily::ProductRx),
            "iqp" => Ok(FeatureMapFamily::Iqp),
            "evo" => Ok(FeatureMapFamily::Evo),
            other => Err(Error::param("map", format!("unknown feature map `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMapSpec {
    pub family: FeatureMapFamily,
    pub bandwidth: f64,
    pub num_features: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evo_seed: Option<u64>,
}

impl FeatureMapSpec {
    pub fn new(
        family: FeatureMapFamily,
        num_features: usize,
        bandwidth: f64,
        evo_seed: Option<u64>,
    ) -> Result<Self> {
        let spec = Self {
            family,
            bandwidth,
            num_features,
            evo_seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn product_rx(num_features: usize, bandwidth: f64) -> Result<Self> {
        Self::new(FeatureMapFamily::ProductRx, num_features, bandwidth, None)
    }

    pub fn iqp(num_features: usize, bandwidth: f64) -> Result<Self> {
        Self::new(FeatureMapFamily::Iqp, num_features, bandwidth, None)
    }

    pub fn evo(num_features: usize, bandwidth: f64, seed: u64) -> Result<Self> {
        Self::new(FeatureMapFamily::Evo, num_features, bandwidth, Some(seed))
    }

    /// Same family and dimension with a different bandwidth.
    pub fn with_bandwidth(&self, bandwidth: f64) -> Result<Self> {
        Self::new(self.family, self.num_features, bandwidth, self.evo_seed)
    }

    pub fn validate(&self) -> Result<()> {
        // c = 0 is admitted as the degenerate constant embedding.
        if !(0.0..=1.0).contains(&self.bandwidth) {
            return Err(Error::param(
                "bandwidth",
                format!("{} is outside [0, 1]", self.bandwidth),
            ));
        }
        if self.num_features == 0 {
            return Err(Error::param("num_features", "must be at least 1"));
        }
        if self.family == FeatureMapFamily::Evo && self.evo_seed.is_none() {
            return Err(Error::param("evo_seed", "the EVO map needs a seed for its initial state"));
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        match self.family {
            FeatureMapFamily::ProductRx | FeatureMapFamily::Iqp => self.num_features,
            FeatureMapFamily::Evo => self.num_features + 1,
        }
    }
}

/// Prepares |ψ(x)⟩ for the given feature map.
pub fn embed(spec: &FeatureMapSpec, x: &[f64]) -> Result<Statevector> {
    check_len(spec.num_features, x.len())?;
    let c = spec.bandwidth;
    match spec.family {
        FeatureMapFamily::ProductRx => {
            let mut s = Statevector::zero(spec.num_qubits())?;
            for (j, &xj) in x.iter().enumerate() {
                s.apply_rx(j, c * xj)?;
            }
            Ok(s)
        }
        FeatureMapFamily::Iqp => {
            let phases = iqp_phases(x, c);
            let mut s = Statevector::zero(spec.num_qubits())?;
            s.apply_hadamard_layer();
            s.apply_diagonal_phase(&phases)?;
            s.apply_hadamard_layer();
            s.apply_diagonal_phase(&phases)?;
            Ok(s)
        }
        FeatureMapFamily::Evo => {
            let seed = spec.evo_seed.expect("validated spec");
            let mut s = evo_initial_state(spec.num_qubits(), seed)?;
            // U = G_1 G_2 … G_n acts right-to-left, so the last pair gate goes first.
            for (j, &xj) in x.iter().enumerate().rev() {
                s.apply_heisenberg_pair(j, c * xj)?;
            }
            Ok(s)
        }
    }
}

/// Phase of U_Z on basis state b: c·Σ_j x_j z_j + c²·Σ_{j<j'} x_j x_j' z_j z_j'
/// with z_j = ±1 the Z eigenvalue of bit j.
///
/// Uses Σ_{j<j'} x_j x_j' z_j z_j' = (s² − ‖x‖²)/2 where s = Σ_j x_j z_j.
pub fn iqp_phases(x: &[f64], c: f64) -> Vec<f64> {
    let n = x.len();
    let norm_sq: f64 = x.iter().map(|v| v * v).sum();
    (0..1usize << n)
        .map(|b| {
            let s: f64 = x
                .iter()
                .enumerate()
                .map(|(j, &xj)| if b >> j & 1 == 0 { xj } else { -xj })
                .sum();
            c * s + c * c * 0.5 * (s * s - norm_sq)
        })
        .collect()
}

/// ⊗_j |ψ_j⟩ with each factor Haar-random on one qubit, keyed by `(seed, j)`.
pub fn evo_initial_state(num_qubits: usize, seed: u64) -> Result<Statevector> {
    let factors: Vec<_> = (0..num_qubits as u64)
        .map(|j| random_haar_qubit(derive_seed(seed, j)))
        .collect();
    Statevector::product(&factors)
}

/// k(x, x') = |⟨ψ(x)|ψ(x')⟩|², exactly 1 when x = x'.
pub fn kernel_value(spec: &FeatureMapSpec, x: &[f64], x_prime: &[f64]) -> Result<f64> {
    check_len(spec.num_features, x.len())?;
    check_len(spec.num_features, x_prime.len())?;
    if x == x_prime {
        return Ok(1.0);
    }
    let a = embed(spec, x)?;
    let b = embed(spec, x_prime)?;
    Ok(a.fidelity(&b)?.min(1.0))
}

/// ∏_j cos²(c(x_j − x'_j)/2).
pub fn closed_form_product_rx(x: &[f64], x_prime: &[f64], c: f64) -> Result<f64> {
    check_len(x.len(), x_prime.len())?;
    Ok(x.iter()
        .zip(x_prime)
        .map(|(a, b)| (c * (a - b) / 2.0).cos().powi(2))
        .product())
}
