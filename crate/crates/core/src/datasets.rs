//! Synthetic generators, CSV ingestion, PCA and binary splits.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg;
use crate::rng::rng_from_seed;

/// How a dataset was produced.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub seed: Option<u64>,
    pub pca_components: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn new(inputs: Vec<Vec<f64>>, labels: Vec<f64>, provenance: Provenance) -> Result<Self> {
        check_len(inputs.len(), labels.len())?;
        if let Some(first) = inputs.first() {
            for row in &inputs {
                check_len(first.len(), row.len())?;
            }
        }
        Ok(Self {
            inputs,
            labels,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    pub fn is_binary(&self) -> bool {
        self.labels.iter().all(|&y| y == 1.0 || y == -1.0)
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            inputs: indices.iter().map(|&i| self.inputs[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn write_provenance(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.provenance)?;
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// P i.i.d. points from Unif([−π, π]^n).
pub fn sample_uniform(n: usize, p: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_from_seed(seed);
    (0..p)
        .map(|_| (0..n).map(|_| rng.random_range(-PI..=PI)).collect())
        .collect()
}

/// e^{−‖x‖²/n²}.
pub fn target_gaussian(inputs: &[Vec<f64>], n: usize) -> Vec<f64> {
    let n2 = (n * n) as f64;
    inputs
        .iter()
        .map(|x| (-x.iter().map(|v| v * v).sum::<f64>() / n2).exp())
        .collect()
}

/// cos of the last coordinate.
pub fn target_cos_last(inputs: &[Vec<f64>]) -> Vec<f64> {
    inputs
        .iter()
        .map(|x| x.last().map_or(1.0, |v| v.cos()))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Gaussian,
    CosLast,
    Zero,
}

impl Target {
    pub fn evaluate(&self, inputs: &[Vec<f64>]) -> Vec<f64> {
        match self {
            Target::Gaussian => target_gaussian(inputs, inputs.first().map_or(1, Vec::len)),
            Target::CosLast => target_cos_last(inputs),
            Target::Zero => vec![0.0; inputs.len()],
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Gaussian => "gaussian",
            Target::CosLast => "cos-last",
            Target::Zero => "zero",
        })
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Target::Gaussian),
            "cos-last" => Ok(Target::CosLast),
            "zero" => Ok(Target::Zero),
            other => Err(Error::param("target", format!("unknown target `{other}`"))),
        }
    }
}

/// Reads a headered CSV whose last column is the label.
pub fn load_csv_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)?;
    let width = reader.headers()?.len();
    if width < 2 {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            reason: "need at least one feature column and a label column".into(),
        });
    }
    let mut inputs = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let err = |reason: String| Error::Parse {
            path: path.into(),
            line,
            reason,
        };
        if record.len() != width {
            return Err(err(format!("expected {width} fields, found {}", record.len())));
        }
        let mut row = Vec::with_capacity(width);
        for field in record.iter() {
            row.push(
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| err(format!("`{field}`: {e}")))?,
            );
        }
        labels.push(row.pop().expect("width ≥ 2"));
        inputs.push(row);
    }
    if labels.is_empty() {
        return Err(Error::InsufficientData(format!("{} has no data rows", path.display())));
    }
    Dataset::new(
        inputs,
        labels,
        Provenance {
            source: path.display().to_string(),
            ..Default::default()
        },
    )
}

/// Principal-component projection fitted on a sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// m × n, rows are unit components.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
}

impl Pca {
    pub fn fit(x: &[Vec<f64>], m: usize) -> Result<Self> {
        let p = x.len();
        let n = x.first().map_or(0, Vec::len);
        if m == 0 || m > p.min(n) {
            return Err(Error::param("m", format!("{m} components from a {p}×{n} matrix")));
        }
        let mut mean = vec![0.0; n];
        for row in x {
            check_len(n, row.len())?;
            mean.iter_mut().zip(row).for_each(|(a, v)| *a += v);
        }
        mean.iter_mut().for_each(|a| *a /= p as f64);

        let mut cov = vec![0.0; n * n];
        let mut centered = vec![0.0; n];
        for row in x {
            for j in 0..n {
                centered[j] = row[j] - mean[j];
            }
            for i in 0..n {
                let ci = centered[i];
                if ci == 0.0 {
                    continue;
                }
                let dst = &mut cov[i * n..(i + 1) * n];
                dst.iter_mut().zip(&centered).for_each(|(d, &cj)| *d += ci * cj);
            }
        }
        let denom = (p.max(2) - 1) as f64;
        cov.iter_mut().for_each(|v| *v /= denom);

        let eig = linalg::symmetric_eigen(&cov, n)?;
        let mut components = Vec::with_capacity(m);
        for k in 0..m {
            let col = eig.vectors.col(k);
            let mut v: Vec<f64> = (0..n).map(|i| col[i]).collect();
            let pivot = (0..n)
                .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(b.cmp(&a)))
                .unwrap_or(0);
            if v[pivot] < 0.0 {
                v.iter_mut().for_each(|a| *a = -*a);
            }
            components.push(v);
        }
        let explained_variance = eig.values[..m].iter().map(|v| v.max(0.0)).collect();
        Ok(Self {
            mean,
            components,
            explained_variance,
        })
    }

    pub fn transform_one(&self, x: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| c.iter().zip(x).zip(&self.mean).map(|((w, v), m)| w * (v - m)).sum())
            .collect()
    }

    pub fn transform(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter().map(|r| self.transform_one(r)).collect()
    }

    /// Maps projected coordinates back to the input space.
    pub fn reconstruct(&self, z: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (c, &zk) in self.components.iter().zip(z) {
            out.iter_mut().zip(c).for_each(|(o, w)| *o += zk * w);
        }
        out
    }
}

/// Fits PCA on `x` and returns its projection together with the fit.
pub fn pca_project(x: &[Vec<f64>], m: usize) -> Result<(Vec<Vec<f64>>, Pca)> {
    let pca = Pca::fit(x, m)?;
    Ok((pca.transform(x), pca))
}

/// Per-column zero-mean, unit-variance rescaling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InsufficientData("cannot standardize zero rows".into()));
        }
        let n = x[0].len();
        let p = x.len() as f64;
        let mean: Vec<f64> = (0..n).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / p).collect();
        let scale = (0..n)
            .map(|j| {
                let var = x.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / p;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, scale })
    }

    pub fn transform(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter()
            .map(|r| {
                r.iter()
                    .zip(&self.mean)
                    .zip(&self.scale)
                    .map(|((v, m), s)| (v - m) / s)
                    .collect()
            })
            .collect()
    }
}

/// Keeps classes `class_a` (→ +1) and `class_b` (→ −1) and returns disjoint
/// shuffled train and test sets.
pub fn binary_filter_and_split(
    ds: &Dataset,
    class_a: f64,
    class_b: f64,
    train_p: usize,
    test_p: usize,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    let mut idx_a: Vec<usize> = (0..ds.len()).filter(|&i| ds.labels[i] == class_a).collect();
    let mut idx_b: Vec<usize> = (0..ds.len()).filter(|&i| ds.labels[i] == class_b).collect();
    if idx_a.is_empty() || idx_b.is_empty() || idx_a.len() + idx_b.len() < train_p + test_p {
        return Err(Error::InsufficientData(format!(
            "classes {class_a}/{class_b} have {}/{} samples, need {} in total",
            idx_a.len(),
            idx_b.len(),
            train_p + test_p
        )));
    }
    let mut rng = rng_from_seed(seed);
    idx_a.shuffle(&mut rng);
    idx_b.shuffle(&mut rng);
    // Alternate classes so both splits stay roughly balanced.
    let mut merged = Vec::with_capacity(idx_a.len() + idx_b.len());
    let (mut ia, mut ib) = (idx_a.into_iter(), idx_b.into_iter());
    loop {
        match (ia.next(), ib.next()) {
            (None, None) => break,
            (a, b) => merged.extend(a.into_iter().chain(b)),
        }
    }
    let (train_idx, rest) = merged.split_at(train_p);
    let mut train_idx = train_idx.to_vec();
    let mut test_idx = rest[..test_p].to_vec();
    train_idx.shuffle(&mut rng);
    test_idx.shuffle(&mut rng);

    let relabel = |indices: &[usize], split: &str| {
        let mut out = ds.subset(indices);
        out.labels = out
            .labels
            .iter()
            .map(|&y| if y == class_a { 1.0 } else { -1.0 })
            .collect();
        out.provenance.seed = Some(seed);
        out.provenance
            .steps
            .push(format!("binary {class_a} (+1) vs {class_b} (-1), {split} split"));
        out
    };
    Ok((relabel(&train_idx, "train"), relabel(&test_idx, "test")))
}
