//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

/// Composite Simpson rule with `panels` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Mean of `f` under Unif[−π, π].
pub fn uniform_average(f: impl Fn(f64) -> f64) -> f64 {
    simpson(f, -PI, PI, 20_000) / (2.0 * PI)
}

/// Real single-qubit covariance in the basis (I, X, Y, Z)/√2, built by
/// quadrature of the Bloch vector of Rx(c·x)|0⟩.
pub fn single_qubit_covariance(c: f64) -> [[f64; 4]; 4] {
    let v = |x: f64| -> [f64; 4] {
        let (a0, a1) = (
            Complex64::new((c * x / 2.0).cos(), 0.0),
            Complex64::new(0.0, (c * x / 2.0).sin()),
        );
        let off = a0.conj() * a1;
        let r = [2.0 * off.re, 2.0 * off.im, a0.norm_sqr() - a1.norm_sqr()];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        [s, s * r[0], s * r[1], s * r[2]]
    };
    let mut out = [[0.0; 4]; 4];
    for (a, row) in out.iter_mut().enumerate() {
        for (b, e) in row.iter_mut().enumerate() {
            *e = uniform_average(|x| {
                let w = v(x);
                w[a] * w[b]
            });
        }
    }
    out
}

/// Dense Kronecker product of square row-major matrices.
pub fn kron(a: &[f64], da: usize, b: &[f64], db: usize) -> Vec<f64> {
    let d = da * db;
    let mut out = vec![0.0; d * d];
    for i in 0..da {
        for j in 0..da {
            for k in 0..db {
                for l in 0..db {
                    out[(i * db + k) * d + j * db + l] = a[i * da + j] * b[k * db + l];
                }
            }
        }
    }
    out
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations, descending.
pub fn jacobi_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].powi(2))
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    eig
}

pub type CMat4 = [[Complex64; 4]; 4];

fn mat_mul(a: &CMat4, b: &CMat4) -> CMat4 {
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

/// XX + YY + ZZ in the basis |b1 b0⟩ with b0 the lower qubit.
pub fn heisenberg_hamiltonian() -> CMat4 {
    let x = [[0.0, 1.0], [1.0, 0.0]].map(|r| r.map(|v| Complex64::new(v, 0.0)));
    let y = [
        [Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)],
        [Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)],
    ];
    let z = [[1.0, 0.0], [0.0, -1.0]].map(|r| r.map(|v| Complex64::new(v, 0.0)));
    let mut h = [[Complex64::new(0.0, 0.0); 4]; 4];
    for p in [x, y, z] {
        for r in 0..4 {
            for c in 0..4 {
                h[r][c] += p[r >> 1][c >> 1] * p[r & 1][c & 1];
            }
        }
    }
    h
}

/// exp(A) by scaling and squaring with a 30-term Taylor series.
pub fn expm(a: &CMat4) -> CMat4 {
    let norm: f64 = a.iter().flatten().map(|z| z.norm()).sum();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let a_s = a.map(|r| r.map(|z| z * scale));
    let mut result = [[Complex64::new(0.0, 0.0); 4]; 4];
    let mut term = result;
    for i in 0..4 {
        result[i][i] = Complex64::new(1.0, 0.0);
        term[i][i] = Complex64::new(1.0, 0.0);
    }
    for k in 1..30 {
        term = mat_mul(&term, &a_s).map(|r| r.map(|z| z / k as f64));
        for i in 0..4 {
            for j in 0..4 {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = mat_mul(&result, &result);
    }
    result
}

/// Applies a 4×4 gate to qubits (j, j+1) of a dense state, qubit 0 the LSB.
pub fn apply_dense_pair(state: &[Complex64], gate: &CMat4, j: usize) -> Vec<Complex64> {
    let mut out = state.to_vec();
    let lo = 1usize << j;
    let hi = 1usize << (j + 1);
    for base in 0..state.len() {
        if base & (lo | hi) != 0 {
            continue;
        }
        let idx = [base, base | lo, base | hi, base | lo | hi];
        for r in 0..4 {
            out[idx[r]] = (0..4).map(|c| gate[r][c] * state[idx[c]]).sum();
        }
    }
    out
}

/// Direct ∏ cos²(c(x−x')/2).
pub fn product_rx_reference(x: &[f64], y: &[f64], c: f64) -> f64 {
    x.iter().zip(y).map(|(a, b)| (c * (a - b) / 2.0).cos().powi(2)).product()
}
