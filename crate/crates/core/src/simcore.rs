//! Dense statevector engine.
//!
//! Qubit `j` is bit `j` of the amplitude index (qubit 0 is least significant).

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_len, Error, Result};
use crate::rng::rng_from_seed;

pub const DEFAULT_MAX_QUBITS: usize = 26;

/// A normalized pure state on `num_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

fn check_qubits(q: usize, cap: usize) -> Result<()> {
    if q == 0 || q > cap {
        return Err(Error::Capacity { requested: q, cap });
    }
    Ok(())
}

impl Statevector {
    /// |0…0⟩ under the default qubit cap.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::zero_with_cap(num_qubits, DEFAULT_MAX_QUBITS)
    }

    pub fn zero_with_cap(num_qubits: usize, cap: usize) -> Result<Self> {
        check_qubits(num_qubits, cap)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes; the length must be a power of two and the vector is
    /// renormalized.
    pub fn from_amplitudes(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::param("amplitudes", format!("length {len} is not a power of two >= 2")));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::param("amplitudes", "zero or non-finite norm"));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self {
            num_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    /// Tensor product ⊗_j |f_j⟩ with factor `j` placed on qubit `j`.
    pub fn product(factors: &[[Complex64; 2]]) -> Result<Self> {
        check_qubits(factors.len(), DEFAULT_MAX_QUBITS)?;
        let mut amplitudes = vec![Complex64::new(1.0, 0.0)];
        // Build from the most significant qubit down so qubit 0 ends up as bit 0.
        for f in factors.iter().rev() {
            let mut next = Vec::with_capacity(amplitudes.len() * 2);
            for a in &amplitudes {
                next.push(a * f[0]);
                next.push(a * f[1]);
            }
            amplitudes = next;
        }
        Self::from_amplitudes(amplitudes)
    }

    /// Haar-random pure state: normalized vector of i.i.d. standard complex
    /// Gaussians, reproducible from `seed`.
    pub fn random_haar(num_qubits: usize, seed: u64) -> Result<Self> {
        check_qubits(num_qubits, DEFAULT_MAX_QUBITS)?;
        let mut rng = rng_from_seed(seed);
        let amplitudes = (0..1usize << num_qubits)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        Self::from_amplitudes(amplitudes)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, j: usize) -> Result<()> {
        if j >= self.num_qubits {
            return Err(Error::QubitIndex {
                index: j,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    /// Rx(θ) = [[cos θ/2, i sin θ/2], [i sin θ/2, cos θ/2]] on qubit `j`.
    pub fn apply_rx(&mut self, j: usize, theta: f64) -> Result<()> {
        self.check_qubit(j)?;
        let c = Complex64::new((theta / 2.0).cos(), 0.0);
        let s = Complex64::new(0.0, (theta / 2.0).sin());
        let bit = 1usize << j;
        for i in 0..self.amplitudes.len() {
            if i & bit == 0 {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i | bit];
                self.amplitudes[i] = c * a0 + s * a1;
                self.amplitudes[i | bit] = s * a0 + c * a1;
            }
        }
        Ok(())
    }

    /// Hadamard on every qubit.
    pub fn apply_hadamard_layer(&mut self) {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for j in 0..self.num_qubits {
            let bit = 1usize << j;
            for i in 0..self.amplitudes.len() {
                if i & bit == 0 {
                    let a0 = self.amplitudes[i];
                    let a1 = self.amplitudes[i | bit];
                    self.amplitudes[i] = (a0 + a1) * r;
                    self.amplitudes[i | bit] = (a0 - a1) * r;
                }
            }
        }
    }

    /// amplitude[b] ← e^{i·phases[b]}·amplitude[b].
    pub fn apply_diagonal_phase(&mut self, phases: &[f64]) -> Result<()> {
        check_len(self.amplitudes.len(), phases.len())?;
        for (a, &p) in self.amplitudes.iter_mut().zip(phases) {
            *a *= Complex64::from_polar(1.0, p);
        }
        Ok(())
    }

    /// exp(−i·angle·(XX + YY + ZZ)) on qubits `(j, j+1)`.
    ///
    /// The Heisenberg term has eigenvalue +1 on |00⟩, |11⟩ and the triplet
    /// (|01⟩+|10⟩)/√2, and −3 on the singlet (|01⟩−|10⟩)/√2.
    pub fn apply_heisenberg_pair(&mut self, j: usize, angle: f64) -> Result<()> {
        self.check_qubit(j)?;
        self.check_qubit(j + 1)?;
        let triplet = Complex64::from_polar(1.0, -angle);
        let singlet = Complex64::from_polar(1.0, 3.0 * angle);
        let diag = (triplet + singlet) * 0.5;
        let off = (triplet - singlet) * 0.5;
        let lo = 1usize << j;
        let hi = 1usize << (j + 1);
        for i in 0..self.amplitudes.len() {
            match (i & lo != 0, i & hi != 0) {
                (false, false) | (true, true) => self.amplitudes[i] *= triplet,
                (true, false) => {
                    let k = i ^ lo ^ hi;
                    let u = self.amplitudes[i];
                    let v = self.amplitudes[k];
                    self.amplitudes[i] = diag * u + off * v;
                    self.amplitudes[k] = off * u + diag * v;
                }
                (false, true) => {}
            }
        }
        Ok(())
    }

    /// ⟨self|other⟩ = Σ conj(a_i)·b_i.
    pub fn inner_product(&self, other: &Statevector) -> Result<Complex64> {
        check_len(self.amplitudes.len(), other.amplitudes.len())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &Statevector) -> Result<f64> {
        Ok(self.inner_product(other)?.norm_sqr())
    }
}

/// Single-qubit Haar-random state as a pair of amplitudes.
pub fn random_haar_qubit(seed: u64) -> [Complex64; 2] {
    let s = Statevector::random_haar(1, seed).expect("one qubit is always within the cap");
    [s.amplitudes[0], s.amplitudes[1]]
}
