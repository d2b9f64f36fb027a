//! Gram matrices, kernel vectors and purity functionals.

use std::io::{BufRead, Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::featuremaps::{embed, FeatureMapFamily, FeatureMapSpec};
use crate::linalg;
use crate::simcore::Statevector;
use crate::spectral::sinc;

pub const GRAM_MAGIC: &[u8; 4] = b"QKGM";

/// Dense symmetric P×P kernel matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramMatrix {
    size: usize,
    entries: Vec<f64>,
    spec: Option<FeatureMapSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelBackend {
    /// Closed form for product-Rx, statevector simulation otherwise.
    Auto,
    /// Always simulate statevectors.
    Statevector,
}

#[derive(Clone, Debug)]
pub struct GramOptions {
    /// Number of cached statevectors per block.
    pub block_size: usize,
    /// Upper bound on simultaneously held amplitudes (2·block·2^q).
    pub memory_budget: usize,
    pub backend: KernelBackend,
}

impl Default for GramOptions {
    fn default() -> Self {
        Self {
            block_size: 64,
            memory_budget: 1 << 27,
            backend: KernelBackend::Auto,
        }
    }
}

impl GramMatrix {
    pub fn from_entries(size: usize, entries: Vec<f64>, spec: Option<FeatureMapSpec>) -> Result<Self> {
        check_len(size * size, entries.len())?;
        Ok(Self { size, entries, spec })
    }

    pub fn identity(size: usize) -> Self {
        let mut entries = vec![0.0; size * size];
        (0..size).for_each(|i| entries[i * size + i] = 1.0);
        Self { size, entries, spec: None }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn spec(&self) -> Option<&FeatureMapSpec> {
        self.spec.as_ref()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.size..(i + 1) * self.size]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    /// Principal submatrix on `indices` (in the given order).
    pub fn submatrix(&self, indices: &[usize]) -> GramMatrix {
        let p = indices.len();
        let mut entries = Vec::with_capacity(p * p);
        for &i in indices {
            entries.extend(indices.iter().map(|&j| self.get(i, j)));
        }
        GramMatrix {
            size: p,
            entries,
            spec: self.spec,
        }
    }

    /// Rows `rows`, columns `cols`, as a row-major block.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> KernelBlock {
        let mut entries = Vec::with_capacity(rows.len() * cols.len());
        for &i in rows {
            entries.extend(cols.iter().map(|&j| self.get(i, j)));
        }
        KernelBlock {
            rows: rows.len(),
            cols: cols.len(),
            entries,
        }
    }

    pub fn mean_entry(&self) -> f64 {
        self.entries.iter().sum::<f64>() / (self.size * self.size) as f64
    }

    pub fn min_offdiagonal(&self) -> Option<f64> {
        (0..self.size)
            .flat_map(|i| (0..self.size).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .reduce(f64::min)
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::symmetric_eigenvalues(&self.entries, self.size)
    }

    /// Largest-eigenvalue inequalities every unit-diagonal Gram must satisfy.
    pub fn bounds(&self) -> Result<GramBounds> {
        let eig = self.eigenvalues()?;
        Ok(GramBounds {
            size: self.size,
            lambda_max: eig[0],
            lambda_min: *eig.last().expect("nonempty"),
            mean_entry: self.mean_entry(),
            min_offdiagonal: self.min_offdiagonal().unwrap_or(1.0),
        })
    }

    /// One row per line, 17 significant digits, comma separated.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for i in 0..self.size {
            let line: Vec<String> = self.row(i).iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Inverse of [`write_csv`](Self::write_csv); `#` lines are skipped.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut entries = Vec::new();
        let mut rows = 0;
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            for field in t.split(',') {
                entries.push(field.trim().parse::<f64>().map_err(|e| Error::Parse {
                    path: "<gram csv>".into(),
                    line: lineno + 1,
                    reason: e.to_string(),
                })?);
            }
            rows += 1;
        }
        Self::from_entries(rows, entries, None)
    }

    /// `QKGM`, u32 size, size² f64 entries, all little-endian.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let size = u32::try_from(self.size).map_err(|_| Error::Format("size exceeds u32".into()))?;
        w.write_all(GRAM_MAGIC)?;
        w.write_all(&size.to_le_bytes())?;
        for v in &self.entries {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != GRAM_MAGIC {
            return Err(Error::Format(format!("bad magic {magic:?}")));
        }
        let mut buf4 = [0u8; 4];
        r.read_exact(&mut buf4)?;
        let size = u32::from_le_bytes(buf4) as usize;
        let mut entries = Vec::with_capacity(size * size);
        let mut buf8 = [0u8; 8];
        for _ in 0..size * size {
            r.read_exact(&mut buf8)
                .map_err(|_| Error::Format("truncated entry data".into()))?;
            entries.push(f64::from_le_bytes(buf8));
        }
        if r.read(&mut buf8)? != 0 {
            return Err(Error::Format("trailing bytes after entries".into()));
        }
        Self::from_entries(size, entries, None)
    }
}

/// Row-major rectangular kernel block, e.g. test × train.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelBlock {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<f64>,
}

impl KernelBlock {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramBounds {
    pub size: usize,
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub mean_entry: f64,
    pub min_offdiagonal: f64,
}

impl GramBounds {
    fn slack(&self) -> f64 {
        64.0 * f64::EPSILON * self.size as f64 * self.lambda_max.abs().max(1.0)
    }

    /// Smallest eigenvalue ≥ −1e-8·P.
    pub fn psd_holds(&self) -> bool {
        self.lambda_min >= -1e-8 * self.size as f64
    }

    /// λ_max ≥ ⟨1,K1⟩/⟨1,1⟩ ≥ 1 + (P−1)·min off-diagonal.
    pub fn rayleigh_bound_holds(&self) -> bool {
        let p = self.size as f64;
        let rayleigh = self.mean_entry * p;
        self.lambda_max + self.slack() >= rayleigh
            && rayleigh + self.slack() >= 1.0 + (p - 1.0) * self.min_offdiagonal
    }

    /// λ_max/P ≤ √(mean entry) + 5/√P.
    pub fn purity_bound_holds(&self) -> bool {
        let p = self.size as f64;
        self.lambda_max / p <= self.mean_entry.max(0.0).sqrt() + 5.0 / p.sqrt()
    }

    pub fn all_hold(&self) -> bool {
        self.psd_holds() && self.rayleigh_bound_holds() && self.purity_bound_holds()
    }
}

fn check_samples(spec: &FeatureMapSpec, xs: &[Vec<f64>]) -> Result<()> {
    xs.iter().try_for_each(|x| check_len(spec.num_features, x.len()))
}

/// Per-sample (cos c·x_j, sin c·x_j) so that cos²(c(x−x')/2) = (1 + CC' + SS')/2.
fn trig_features(xs: &[Vec<f64>], c: f64) -> Vec<Vec<(f64, f64)>> {
    xs.iter()
        .map(|x| x.iter().map(|&v| ((c * v).cos(), (c * v).sin())).collect())
        .collect()
}

fn product_rx_entry(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&(ca, sa), &(cb, sb))| 0.5 * (1.0 + ca * cb + sa * sb))
        .product::<f64>()
        .clamp(0.0, 1.0)
}

fn uses_closed_form(spec: &FeatureMapSpec, opts: &GramOptions) -> bool {
    spec.family == FeatureMapFamily::ProductRx && opts.backend == KernelBackend::Auto
}

fn embed_all(spec: &FeatureMapSpec, xs: &[Vec<f64>]) -> Result<Vec<Statevector>> {
    xs.par_iter().map(|x| embed(spec, x)).collect()
}

fn fidelity_entry(a: &Statevector, b: &Statevector) -> f64 {
    a.fidelity(b).expect("same spec, same dimension").min(1.0)
}

/// K_{μν} = k(x^μ, x^ν) with default options.
pub fn gram(spec: &FeatureMapSpec, xs: &[Vec<f64>]) -> Result<GramMatrix> {
    gram_with(spec, xs, &GramOptions::default())
}

pub fn gram_with(spec: &FeatureMapSpec, xs: &[Vec<f64>], opts: &GramOptions) -> Result<GramMatrix> {
    spec.validate()?;
    if xs.is_empty() {
        return Err(Error::InsufficientData("gram needs at least one sample".into()));
    }
    check_samples(spec, xs)?;
    let p = xs.len();
    let mut entries = vec![0.0; p * p];

    if uses_closed_form(spec, opts) {
        let feats = trig_features(xs, spec.bandwidth);
        let rows: Vec<Vec<f64>> = (0..p)
            .into_par_iter()
            .map(|i| {
                (i..p)
                    .map(|j| {
                        if i == j || xs[i] == xs[j] {
                            1.0
                        } else {
                            product_rx_entry(&feats[i], &feats[j])
                        }
                    })
                    .collect()
            })
            .collect();
        fill_upper(&mut entries, p, &rows, 0);
    } else {
        let block = opts.block_size.max(1).min(p);
        let dim = 1usize << spec.num_qubits();
        let required = 2 * block * dim;
        if required > opts.memory_budget {
            return Err(Error::MemoryBudget {
                required,
                budget: opts.memory_budget,
            });
        }
        let starts: Vec<usize> = (0..p).step_by(block).collect();
        for (bi, &si) in starts.iter().enumerate() {
            let ei = (si + block).min(p);
            let states_i = embed_all(spec, &xs[si..ei])?;
            for &sj in &starts[bi..] {
                let ej = (sj + block).min(p);
                let owned;
                let states_j = if sj == si {
                    &states_i
                } else {
                    owned = embed_all(spec, &xs[sj..ej])?;
                    &owned
                };
                let vals: Vec<(usize, usize, f64)> = (si..ei)
                    .into_par_iter()
                    .flat_map_iter(|i| {
                        (sj.max(i)..ej).map(move |j| (i, j))
                    })
                    .map(|(i, j)| {
                        let v = if i == j || xs[i] == xs[j] {
                            1.0
                        } else {
                            fidelity_entry(&states_i[i - si], &states_j[j - sj])
                        };
                        (i, j, v)
                    })
                    .collect();
                for (i, j, v) in vals {
                    entries[i * p + j] = v;
                    entries[j * p + i] = v;
                }
            }
        }
    }
    Ok(GramMatrix {
        size: p,
        entries,
        spec: Some(*spec),
    })
}

fn fill_upper(entries: &mut [f64], p: usize, rows: &[Vec<f64>], offset: usize) {
    for (r, row) in rows.iter().enumerate() {
        let i = r + offset;
        for (k, &v) in row.iter().enumerate() {
            let j = i + k;
            entries[i * p + j] = v;
            entries[j * p + i] = v;
        }
    }
}

/// Kernel values between every row sample and every column sample.
pub fn cross_kernel(spec: &FeatureMapSpec, rows: &[Vec<f64>], cols: &[Vec<f64>]) -> Result<KernelBlock> {
    cross_kernel_with(spec, rows, cols, &GramOptions::default())
}

pub fn cross_kernel_with(
    spec: &FeatureMapSpec,
    rows: &[Vec<f64>],
    cols: &[Vec<f64>],
    opts: &GramOptions,
) -> Result<KernelBlock> {
    spec.validate()?;
    check_samples(spec, rows)?;
    check_samples(spec, cols)?;
    let entries: Vec<f64> = if uses_closed_form(spec, opts) {
        let fr = trig_features(rows, spec.bandwidth);
        let fc = trig_features(cols, spec.bandwidth);
        (0..rows.len())
            .into_par_iter()
            .flat_map_iter(|i| {
                let fr = &fr;
                let fc = &fc;
                (0..cols.len()).map(move |j| {
                    if rows[i] == cols[j] {
                        1.0
                    } else {
                        product_rx_entry(&fr[i], &fc[j])
                    }
                })
            })
            .collect()
    } else {
        let dim = 1usize << spec.num_qubits();
        let block = opts.block_size.max(1);
        let required = (cols.len() + block) * dim;
        if required > opts.memory_budget {
            return Err(Error::MemoryBudget {
                required,
                budget: opts.memory_budget,
            });
        }
        let col_states = embed_all(spec, cols)?;
        let mut out = Vec::with_capacity(rows.len() * cols.len());
        for chunk in rows.chunks(block) {
            let row_states = embed_all(spec, chunk)?;
            let vals: Vec<f64> = (0..chunk.len())
                .into_par_iter()
                .flat_map_iter(|r| {
                    let row_states = &row_states;
                    let col_states = &col_states;
                    (0..cols.len()).map(move |j| {
                        if chunk[r] == cols[j] {
                            1.0
                        } else {
                            fidelity_entry(&row_states[r], &col_states[j])
                        }
                    })
                })
                .collect();
            out.extend(vals);
        }
        out
    };
    Ok(KernelBlock {
        rows: rows.len(),
        cols: cols.len(),
        entries,
    })
}

/// k(x)_μ = k(x, x^μ).
pub fn kernel_vector(spec: &FeatureMapSpec, train: &[Vec<f64>], x: &[f64]) -> Result<Vec<f64>> {
    check_len(spec.num_features, x.len())?;
    Ok(cross_kernel(spec, &[x.to_vec()], train)?.entries)
}

/// Monte Carlo estimate of M_μ: the mean of all P² Gram entries.
pub fn purity_empirical(g: &GramMatrix) -> Result<f64> {
    if g.size() < 2 {
        return Err(Error::InsufficientData("purity needs at least two samples".into()));
    }
    Ok(g.mean_entry())
}

/// M_μ = 2^{−n}(1 + sinc(πc))^n for the product-Rx kernel on Unif([−π, π]^n).
pub fn purity_toy_analytic(n: usize, c: f64) -> f64 {
    (0.5 * (1.0 + sinc(std::f64::consts::PI * c))).powi(n as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::sample_uniform;
    use std::f64::consts::PI;

    fn spec(c: f64, n: usize) -> FeatureMapSpec {
        FeatureMapSpec::product_rx(n, c).unwrap()
    }

    #[test]
    fn single_sample_gram() {
        let g = gram(&spec(0.5, 2), &[vec![0.1, 0.2]]).unwrap();
        assert_eq!(g.as_slice(), &[1.0]);
        assert!(gram(&spec(0.5, 2), &[]).is_err());
    }

    #[test]
    fn delta_kernel_on_hypercube_vertices() {
        let xs: Vec<Vec<f64>> = (0..8)
            .map(|b| (0..3).map(|j| if b >> j & 1 == 1 { PI } else { 0.0 }).collect())
            .collect();
        for backend in [KernelBackend::Auto, KernelBackend::Statevector] {
            let opts = GramOptions { backend, ..Default::default() };
            let g = gram_with(&spec(1.0, 3), &xs, &opts).unwrap();
            for i in 0..8 {
                for j in 0..8 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((g.get(i, j) - want).abs() < 1e-15);
                }
            }
            let kv = kernel_vector(&spec(1.0, 3), &xs, &xs[5]).unwrap();
            for (j, v) in kv.iter().enumerate() {
                assert!((v - if j == 5 { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn kernel_vector_matches_gram_row() {
        let xs = sample_uniform(3, 20, 4);
        let s = spec(0.6, 3);
        let g = gram(&s, &xs).unwrap();
        let kv = kernel_vector(&s, &xs, &xs[7]).unwrap();
        for j in 0..20 {
            assert!((kv[j] - g.get(7, j)).abs() < 1e-12);
        }
        let mut with_self = xs.clone();
        let probe = vec![0.3, -0.2, 1.0];
        with_self.push(probe.clone());
        let kv = kernel_vector(&s, &with_self, &probe).unwrap();
        assert_eq!(*kv.last().unwrap(), 1.0);
        assert!(kernel_vector(&s, &xs, &[0.0]).is_err());
    }

    #[test]
    fn block_sizes_do_not_change_statevector_gram() {
        let xs = sample_uniform(4, 23, 8);
        let s = FeatureMapSpec::iqp(4, 0.4).unwrap();
        let a = gram_with(&s, &xs, &GramOptions { block_size: 5, ..Default::default() }).unwrap();
        let b = gram_with(&s, &xs, &GramOptions { block_size: 64, ..Default::default() }).unwrap();
        assert_eq!(a, b);
        assert!(a.bounds().unwrap().all_hold());
    }

    #[test]
    fn memory_budget_is_enforced() {
        let xs = sample_uniform(6, 10, 1);
        let s = FeatureMapSpec::iqp(6, 0.4).unwrap();
        let opts = GramOptions { block_size: 8, memory_budget: 100, ..Default::default() };
        assert!(matches!(gram_with(&s, &xs, &opts), Err(Error::MemoryBudget { .. })));
    }

    #[test]
    fn purity_examples() {
        let ones = GramMatrix::from_entries(3, vec![1.0; 9], None).unwrap();
        assert_eq!(purity_empirical(&ones).unwrap(), 1.0);
        let eye = GramMatrix::identity(5);
        assert!((purity_empirical(&eye).unwrap() - 0.2).abs() < 1e-15);
        assert!(purity_empirical(&GramMatrix::identity(1)).is_err());

        assert!((purity_toy_analytic(4, 1.0) - 1.0 / 16.0).abs() < 1e-15);
        assert!((purity_toy_analytic(3, 1e-9) - 1.0).abs() < 1e-12);
        assert!((purity_toy_analytic(1, 0.5) - 0.5 * (1.0 + 2.0 / PI)).abs() < 1e-15);
    }

    #[test]
    fn purity_of_sampled_toy_kernel() {
        let xs = sample_uniform(4, 2000, 17);
        let g = gram(&spec(1.0, 4), &xs).unwrap();
        let m = purity_empirical(&g).unwrap();
        assert!((m - 0.0625).abs() < 0.01, "purity {m}");
    }

    #[test]
    fn csv_and_binary_roundtrip() {
        let xs = sample_uniform(2, 6, 3);
        let g = gram(&spec(0.4, 2), &xs).unwrap();
        let mut csv = Vec::new();
        g.write_csv(&mut csv).unwrap();
        let back = GramMatrix::read_csv(&csv[..]).unwrap();
        assert_eq!(back.as_slice(), g.as_slice());

        let mut bin = Vec::new();
        g.write_binary(&mut bin).unwrap();
        assert_eq!(&bin[..4], b"QKGM");
        assert_eq!(u32::from_le_bytes(bin[4..8].try_into().unwrap()), 6);
        assert_eq!(bin.len(), 8 + 36 * 8);
        assert_eq!(GramMatrix::read_binary(&bin[..]).unwrap().as_slice(), g.as_slice());
        assert!(GramMatrix::read_binary(&bin[..bin.len() - 1]).is_err());
        assert!(GramMatrix::read_binary(&b"XXXX\0\0\0\0"[..]).is_err());
    }

    #[test]
    fn submatrix_and_block() {
        let xs = sample_uniform(2, 5, 3);
        let g = gram(&spec(0.4, 2), &xs).unwrap();
        let sub = g.submatrix(&[4, 1]);
        assert_eq!(sub.get(0, 1), g.get(4, 1));
        let blk = g.block(&[0, 2], &[1, 3, 4]);
        assert_eq!(blk.row(1)[2], g.get(2, 4));
    }
}
