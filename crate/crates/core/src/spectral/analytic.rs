use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{sinc, uniform_mean};
use crate::error::{Error, Result};
use crate::gentheory::TheoryLevel;
use crate::linalg;
use crate::rng::derive_seed;
use crate::simcore::Statevector;

/// Closed-form eigenvalues (λ1, λ2, λ3, λ4) of the single-qubit product-Rx kernel.
pub fn single_qubit_spectrum(c: f64) -> Result<[f64; 4]> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::param("c", format!("{c} not in (0, 1]")));
    }
    let s1 = sinc(PI * c);
    let s2 = sinc(2.0 * PI * c);
    let root = ((1.0 - s2).powi(2) + 16.0 * s1 * s1).sqrt();
    let mid = 3.0 / 8.0 + s2 / 8.0;
    Ok([mid + root / 8.0, (1.0 - s2) / 4.0, mid - root / 8.0, 0.0])
}

fn eigen_ratio(c: f64, sign: f64) -> f64 {
    let s1 = sinc(PI * c);
    let s2 = sinc(2.0 * PI * c);
    let root = ((1.0 - s2).powi(2) + 16.0 * s1 * s1).sqrt();
    (4.0 * s1 + sign * root) / (1.0 - s2)
}

/// Unnormalized eigenfunction φ_index(x); index 4 is the zero function.
pub fn single_qubit_eigenfunction(c: f64, index: usize, x: f64) -> Result<Complex64> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::param("c", format!("{c} not in (0, 1]")));
    }
    let (s, co) = ((c * x / 2.0).sin(), (c * x / 2.0).cos());
    let v = match index {
        1 => Complex64::new(s * s + co * co * eigen_ratio(c, 1.0), 0.0),
        2 => Complex64::new(0.0, (c * x).sin()),
        3 => Complex64::new(s * s + co * co * eigen_ratio(c, -1.0), 0.0),
        4 => Complex64::new(0.0, 0.0),
        _ => return Err(Error::param("index", format!("{index} not in 1..=4"))),
    };
    Ok(v)
}

/// Leading-order eigenvalues at c = a/√n. λ1 is reported as 1 − λ2 − λ3.
pub fn asymptotic_single_qubit(a: f64, n: usize) -> Result<[f64; 3]> {
    if !(a >= 0.0) || n == 0 {
        return Err(Error::param("a", "need a ≥ 0 and n ≥ 1"));
    }
    let n = n as f64;
    let l2 = a.powi(2) * PI.powi(2) / (6.0 * n);
    let l3 = a.powi(4) * PI.powi(4) / (180.0 * n * n);
    Ok([1.0 - l2 - l3, l2, l3])
}

/// One eigenvalue of the n-fold tensor-product spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerateLevel {
    /// k2 + 2·k3; the minimum over merged products.
    pub scaling_index: usize,
    pub eigenvalue: f64,
    pub degeneracy: f64,
}

/// A single (k1, k2, k3) product λ1^k1 λ2^k2 λ3^k3 and its multinomial count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductMode {
    pub k: [usize; 3],
    pub eigenvalue: f64,
    pub degeneracy: f64,
}

impl ProductMode {
    pub fn scaling_index(&self) -> usize {
        self.k[1] + 2 * self.k[2]
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for i in 1..=n {
        out[i] = out[i - 1] + (i as f64).ln();
    }
    out
}

fn safe_ln(v: f64) -> f64 {
    if v > 0.0 {
        v.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Every composition k1 + k2 + k3 = n of the three nonzero single-qubit eigenvalues.
pub fn product_modes(n: usize, lambdas: [f64; 3]) -> Vec<ProductMode> {
    let lf = ln_factorials(n);
    let ll = lambdas.map(safe_ln);
    let mut out = Vec::with_capacity((n + 1) * (n + 2) / 2);
    for k3 in 0..=n {
        for k2 in 0..=n - k3 {
            let k1 = n - k2 - k3;
            let ln_deg = lf[n] - lf[k1] - lf[k2] - lf[k3];
            let mut ln_eig = 0.0;
            for (k, l) in [k1, k2, k3].into_iter().zip(ll) {
                if k > 0 {
                    ln_eig += k as f64 * l;
                }
            }
            out.push(ProductMode {
                k: [k1, k2, k3],
                eigenvalue: ln_eig.exp(),
                degeneracy: ln_deg.exp().round().max(1.0),
            });
        }
    }
    out
}

/// Distinct tensor-product eigenvalues, merged at relative tolerance 1e-12,
/// sorted descending and truncated to `top_m` levels.
pub fn tensor_spectrum(n: usize, c: f64, top_m: usize) -> Result<Vec<DegenerateLevel>> {
    if n == 0 {
        return Err(Error::param("n", "need at least one qubit"));
    }
    let [l1, l2, l3, _] = single_qubit_spectrum(c)?;
    let mut modes = product_modes(n, [l1, l2, l3]);
    modes.retain(|m| m.eigenvalue > 0.0);
    modes.sort_by(|a, b| b.eigenvalue.total_cmp(&a.eigenvalue));

    let mut levels: Vec<DegenerateLevel> = Vec::new();
    for m in modes {
        match levels.last_mut() {
            Some(last) if (last.eigenvalue - m.eigenvalue).abs() <= 1e-12 * last.eigenvalue => {
                last.degeneracy += m.degeneracy;
                last.scaling_index = last.scaling_index.min(m.scaling_index());
            }
            _ => {
                if levels.len() == top_m {
                    break;
                }
                levels.push(DegenerateLevel {
                    scaling_index: m.scaling_index(),
                    eigenvalue: m.eigenvalue,
                    degeneracy: m.degeneracy,
                });
            }
        }
    }
    Ok(levels)
}

/// Σ eigenvalue·degeneracy over the listed levels.
pub fn spectral_mass(levels: &[DegenerateLevel]) -> f64 {
    levels.iter().map(|l| l.eigenvalue * l.degeneracy).sum()
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of eigenvalues η_{k,z} sharing the scaling index k = k2 + 2·k3.
pub fn degeneracy_table(n: usize, k_max: usize) -> Vec<(usize, u128)> {
    let c = |a: usize, b: usize| binomial(a, b);
    (0..=k_max)
        .map(|k| {
            let value = match k {
                0 => 1,
                1 => c(n, 1),
                2 => c(n, 2) + c(n, 1),
                3 => c(n, 3) + c(n.saturating_sub(1), 1) * c(n, 1),
                4 => c(n, 4) + c(n.saturating_sub(1), 2) * c(n, 1) + c(n, 2),
                _ => enumerate_degeneracy(n, k),
            };
            (k, value)
        })
        .collect()
}

/// Σ over k2 + 2·k3 = k of n!/(k1! k2! k3!).
pub fn enumerate_degeneracy(n: usize, k: usize) -> u128 {
    (0..=k / 2)
        .filter_map(|k3| {
            let k2 = k - 2 * k3;
            (k2 + k3 <= n).then(|| binomial(n, k3) * binomial(n - k3, k2))
        })
        .sum()
}

/// Eigenvalues grouped by scaling index with the degeneracy-weighted mean value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingGroup {
    pub scaling_index: usize,
    pub mean_eigenvalue: f64,
    pub multiplicity: f64,
    /// Σ ā² over the group.
    pub power: f64,
}

impl ScalingGroup {
    /// η̄_k = N(n,k)·η_k.
    pub fn total_eigenvalue(&self) -> f64 {
        self.mean_eigenvalue * self.multiplicity
    }
}

/// Collapses theory levels keyed by product mode into scaling groups.
pub fn group_by_scaling(modes: &[ProductMode], powers: &[f64]) -> Vec<ScalingGroup> {
    let k_max = modes.iter().map(ProductMode::scaling_index).max().unwrap_or(0);
    let mut groups: Vec<ScalingGroup> = (0..=k_max)
        .map(|k| ScalingGroup {
            scaling_index: k,
            mean_eigenvalue: 0.0,
            multiplicity: 0.0,
            power: 0.0,
        })
        .collect();
    for (m, &p) in modes.iter().zip(powers) {
        let g = &mut groups[m.scaling_index()];
        g.mean_eigenvalue += m.eigenvalue * m.degeneracy;
        g.multiplicity += m.degeneracy;
        g.power += p;
    }
    for g in &mut groups {
        if g.multiplicity > 0.0 {
            g.mean_eigenvalue /= g.multiplicity;
        }
    }
    groups
}

/// Squared overlaps of a one-dimensional factor g with the normalized
/// eigenfunctions, plus its squared norm, under Unif[−π, π].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FactorProjection {
    pub weights: [f64; 3],
    pub norm_sqr: f64,
}

pub fn project_factor<G: Fn(f64) -> f64>(c: f64, g: G) -> Result<FactorProjection> {
    let mut weights = [0.0; 3];
    for (idx, w) in weights.iter_mut().enumerate() {
        let phi = |x: f64| single_qubit_eigenfunction(c, idx + 1, x).expect("valid c");
        let norm = uniform_mean(|x| phi(x).norm_sqr());
        let re = uniform_mean(|x| (phi(x).conj() * g(x)).re);
        let im = uniform_mean(|x| (phi(x).conj() * g(x)).im);
        *w = (re * re + im * im) / norm;
    }
    Ok(FactorProjection {
        weights,
        norm_sqr: uniform_mean(|x| g(x) * g(x)),
    })
}

/// Exact theory levels for the n-qubit product-Rx kernel and a product target
/// f(x) = Π_j g(x_j). The final level carries the eigenvalue-zero power.
pub fn product_target_levels(n: usize, c: f64, proj: &FactorProjection) -> Result<Vec<TheoryLevel>> {
    let [l1, l2, l3, _] = single_qubit_spectrum(c)?;
    let modes = product_modes(n, [l1, l2, l3]);
    let lw = proj.weights.map(safe_ln);
    let mut levels: Vec<TheoryLevel> = modes
        .iter()
        .map(|m| {
            let mut ln_p = 0.0;
            for (k, l) in m.k.into_iter().zip(lw) {
                if k > 0 {
                    ln_p += k as f64 * l;
                }
            }
            TheoryLevel {
                eigenvalue: m.eigenvalue,
                power: m.degeneracy * ln_p.exp(),
                multiplicity: m.degeneracy,
            }
        })
        .collect();
    let captured: f64 = proj.weights.iter().sum();
    let residual = (proj.norm_sqr.powi(n as i32) - captured.powi(n as i32)).max(0.0);
    levels.push(TheoryLevel {
        eigenvalue: 0.0,
        power: residual,
        multiplicity: 1.0,
    });
    levels.sort_by(|a, b| b.eigenvalue.total_cmp(&a.eigenvalue));
    Ok(levels)
}

/// (nonzero eigenvalue, its multiplicity, zero multiplicity) of the Haar
/// covariance on q qubits.
pub fn haar_covariance_spectrum(q: usize) -> Result<(f64, usize, usize)> {
    if q == 0 || q > 16 {
        return Err(Error::param("q", format!("{q} not in 1..=16")));
    }
    let d = 1usize << q;
    let df = d as f64;
    Ok((2.0 / (df * (df + 1.0)), d * (d + 1) / 2, d * (d - 1) / 2))
}

/// Eigenvalues (descending, length d²) of the Monte Carlo estimate of the
/// operator with elements ⟨ij|Σ|kl⟩ = E[ρ_ik ρ_jl], ρ = |s⟩⟨s| Haar-random.
pub fn haar_covariance_monte_carlo(q: usize, samples: usize, seed: u64) -> Result<Vec<f64>> {
    if q == 0 || q > 4 {
        return Err(Error::param("q", format!("{q} not in 1..=4")));
    }
    if samples == 0 {
        return Err(Error::param("samples", "need at least one sample"));
    }
    let d = 1usize << q;
    let m = d * d;
    let mut sigma = vec![Complex64::new(0.0, 0.0); m * m];
    let mut v = vec![Complex64::new(0.0, 0.0); m];
    for t in 0..samples {
        let s = Statevector::random_haar(q, derive_seed(seed, t as u64))?;
        let a = s.amplitudes();
        for i in 0..d {
            for j in 0..d {
                v[i * d + j] = a[i] * a[j];
            }
        }
        for r in 0..m {
            for c in 0..m {
                sigma[r * m + c] += v[r] * v[c].conj();
            }
        }
    }
    let scale = 1.0 / samples as f64;
    // Hermitian H = A + iB embeds as the real symmetric [[A, −B], [B, A]],
    // which carries every eigenvalue of H twice.
    let big = 2 * m;
    let mut real = vec![0.0; big * big];
    for r in 0..m {
        for c in 0..m {
            let z = sigma[r * m + c] * scale;
            real[r * big + c] = z.re;
            real[(r + m) * big + c + m] = z.re;
            real[r * big + c + m] = -z.im;
            real[(r + m) * big + c] = z.im;
        }
    }
    let all = linalg::symmetric_eigenvalues(&real, big)?;
    Ok(all.into_iter().step_by(2).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_at_unit_bandwidth() {
        let l = single_qubit_spectrum(1.0).unwrap();
        for (a, b) in l.iter().zip([0.5, 0.25, 0.25, 0.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        let l = single_qubit_spectrum(1e-6).unwrap();
        assert!((l[0] - 1.0).abs() < 1e-9 && l[1] < 1e-9 && l[2].abs() < 1e-9);
        assert!(single_qubit_spectrum(0.0).is_err());
        assert!(single_qubit_spectrum(1.5).is_err());
    }

    #[test]
    fn ordering_and_sum() {
        for i in 1..=100 {
            let l = single_qubit_spectrum(i as f64 / 100.0).unwrap();
            assert!(l[0] > l[1] && l[1] >= l[2] - 1e-15 && l[2] > l[3]);
            assert!((l[0] + l[1] + l[2] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_bandwidth_eigenfunctions() {
        for x in [-2.0, 0.3, 1.7] {
            let p1 = single_qubit_eigenfunction(1.0, 1, x).unwrap();
            assert!((p1.re - 1.0).abs() < 1e-12);
            let p2 = single_qubit_eigenfunction(1.0, 2, x).unwrap();
            assert!((p2.im - f64::sin(x)).abs() < 1e-12 && p2.re == 0.0);
            let p3 = single_qubit_eigenfunction(1.0, 3, x).unwrap();
            assert!((p3.re + f64::cos(x)).abs() < 1e-12);
            assert_eq!(single_qubit_eigenfunction(1.0, 4, x).unwrap().norm(), 0.0);
        }
    }

    #[test]
    fn asymptotics() {
        let exact = single_qubit_spectrum(0.1).unwrap();
        let approx = asymptotic_single_qubit(1.0, 100).unwrap();
        assert!(((exact[1] - approx[1]) / exact[1]).abs() < 0.05);
        let l1: Vec<f64> = [10, 100, 1000]
            .iter()
            .map(|&n| asymptotic_single_qubit(1.0, n).unwrap()[0])
            .collect();
        assert!(l1[0] < l1[1] && l1[1] < l1[2] && (1.0 - l1[2]) < 0.002);
        assert_eq!(asymptotic_single_qubit(0.0, 7).unwrap(), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn unit_bandwidth_tensor_levels() {
        for n in 1..=8 {
            let levels = tensor_spectrum(n, 1.0, usize::MAX).unwrap();
            assert_eq!(levels.len(), n + 1);
            for (k, lvl) in levels.iter().enumerate() {
                assert!((lvl.eigenvalue - 0.5f64.powi((n + k) as i32)).abs() < 1e-15);
                assert_eq!(lvl.degeneracy, (binomial(n, k) << k) as f64);
            }
            assert!((spectral_mass(&levels) - 1.0).abs() < 1e-10);
        }
        assert_eq!(tensor_spectrum(6, 1.0, 3).unwrap().len(), 3);
    }

    #[test]
    fn full_mass_is_one() {
        for n in 1..=10 {
            let levels = tensor_spectrum(n, 0.37, usize::MAX).unwrap();
            assert!((spectral_mass(&levels) - 1.0).abs() < 1e-10);
            assert!(levels.windows(2).all(|w| w[0].eigenvalue > w[1].eigenvalue));
        }
    }

    #[test]
    fn degeneracy_table_values() {
        let t = degeneracy_table(5, 3);
        assert_eq!(t, vec![(0, 1), (1, 5), (2, 15), (3, 30)]);
        for n in [1, 4, 9, 30] {
            assert_eq!(degeneracy_table(n, 0), vec![(0, 1)]);
        }
        for (k, v) in degeneracy_table(6, 12) {
            assert_eq!(v, enumerate_degeneracy(6, k), "k = {k}");
        }
    }

    #[test]
    fn grouped_levels_preserve_mass() {
        let [l1, l2, l3, _] = single_qubit_spectrum(0.2).unwrap();
        let modes = product_modes(7, [l1, l2, l3]);
        let groups = group_by_scaling(&modes, &vec![0.0; modes.len()]);
        let mass: f64 = groups.iter().map(ScalingGroup::total_eigenvalue).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        for (g, (k, n)) in groups.iter().zip(degeneracy_table(7, 14)) {
            assert_eq!(g.scaling_index, k);
            assert_eq!(g.multiplicity, n as f64);
        }
    }

    #[test]
    fn haar_exact_values() {
        assert_eq!(haar_covariance_spectrum(1).unwrap(), (1.0 / 3.0, 3, 1));
        let (v, nz, z) = haar_covariance_spectrum(2).unwrap();
        assert!((v - 0.1).abs() < 1e-16);
        assert_eq!((nz, z), (10, 6));
    }

    #[test]
    fn haar_monte_carlo_single_qubit() {
        let eig = haar_covariance_monte_carlo(1, 4000, 5).unwrap();
        assert_eq!(eig.len(), 4);
        for v in &eig[..3] {
            assert!((v - 1.0 / 3.0).abs() < 0.02, "{eig:?}");
        }
        assert!(eig[3].abs() < 1e-10);
    }
}
