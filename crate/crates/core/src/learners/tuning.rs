use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{krr_fit, svm_fit};
use crate::error::{check_len, Error, Result};
use crate::featuremaps::FeatureMapSpec;
use crate::kernels::{gram, GramMatrix};
use crate::rng::rng_from_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// SVM classification accuracy (higher is better).
    Accuracy,
    /// KRR mean squared error (lower is better).
    Mse,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Accuracy => "accuracy",
            Metric::Mse => "mse",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "accuracy" => Ok(Metric::Accuracy),
            "mse" => Ok(Metric::Mse),
            other => Err(Error::param("metric", format!("unknown metric `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneConfig {
    pub folds: usize,
    pub metric: Metric,
    pub seed: u64,
    /// KRR ridge for the mse metric.
    pub ridge: f64,
    /// SVM box constraint for the accuracy metric.
    pub svm_c: f64,
}

impl TuneConfig {
    pub fn new(metric: Metric, folds: usize, seed: u64) -> Self {
        Self {
            folds,
            metric,
            seed,
            ridge: 0.0,
            svm_c: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best_c: f64,
    /// (c, mean CV score) in grid order.
    pub scores: Vec<(f64, f64)>,
    pub metric: Metric,
    /// True when another grid value scored identically to `best_c`.
    pub tie_broken: bool,
}

/// Fold index per sample; stratified by label for classification.
pub fn fold_assignment(y: &[f64], folds: usize, stratified: bool, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::param("folds", "need at least two folds"));
    }
    if y.len() < folds {
        return Err(Error::InsufficientData(format!("{} samples for {folds} folds", y.len())));
    }
    let mut rng = rng_from_seed(seed);
    let mut assignment = vec![0; y.len()];
    let mut groups: Vec<Vec<usize>> = if stratified {
        let mut classes: Vec<f64> = y.to_vec();
        classes.sort_by(f64::total_cmp);
        classes.dedup();
        classes
            .iter()
            .map(|&cl| (0..y.len()).filter(|&i| y[i] == cl).collect())
            .collect()
    } else {
        vec![(0..y.len()).collect()]
    };
    let mut next = 0;
    for group in &mut groups {
        group.shuffle(&mut rng);
        for &i in group.iter() {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    Ok(assignment)
}

fn fold_score(g: &GramMatrix, y: &[f64], folds: &[usize], k: usize, cfg: &TuneConfig) -> Result<f64> {
    let train: Vec<usize> = (0..y.len()).filter(|&i| folds[i] != k).collect();
    let test: Vec<usize> = (0..y.len()).filter(|&i| folds[i] == k).collect();
    if train.is_empty() || test.is_empty() {
        return Err(Error::InsufficientData(format!("fold {k} is empty")));
    }
    let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
    let g_train = g.submatrix(&train);
    let cross = g.block(&test, &train);
    match cfg.metric {
        Metric::Mse => {
            let m = krr_fit(&g_train, &y_train, cfg.ridge)?;
            let mut sse = 0.0;
            for (r, &i) in test.iter().enumerate() {
                sse += (m.predict(cross.row(r))? - y[i]).powi(2);
            }
            Ok(sse / test.len() as f64)
        }
        Metric::Accuracy => {
            let m = svm_fit(&g_train, &y_train, cfg.svm_c)?;
            let mut hits = 0usize;
            for (r, &i) in test.iter().enumerate() {
                if m.predict(cross.row(r))? == y[i] {
                    hits += 1;
                }
            }
            Ok(hits as f64 / test.len() as f64)
        }
    }
}

/// Mean k-fold CV score of `spec` at its own bandwidth.
pub fn cv_score(spec: &FeatureMapSpec, x: &[Vec<f64>], y: &[f64], cfg: &TuneConfig) -> Result<f64> {
    check_len(x.len(), y.len())?;
    let folds = fold_assignment(y, cfg.folds, cfg.metric == Metric::Accuracy, cfg.seed)?;
    let g = gram(spec, x)?;
    let mut total = 0.0;
    for k in 0..cfg.folds {
        total += fold_score(&g, y, &folds, k, cfg)?;
    }
    Ok(total / cfg.folds as f64)
}

/// Cross-validated choice of c over `c_grid`; ties go to the smaller c.
pub fn tune_bandwidth(
    spec: &FeatureMapSpec,
    x: &[Vec<f64>],
    y: &[f64],
    c_grid: &[f64],
    cfg: &TuneConfig,
) -> Result<TuneResult> {
    if c_grid.is_empty() {
        return Err(Error::param("c_grid", "grid is empty"));
    }
    let specs: Vec<FeatureMapSpec> = c_grid.iter().map(|&c| spec.with_bandwidth(c)).collect::<Result<_>>()?;
    let scores: Vec<f64> = specs
        .par_iter()
        .map(|s| cv_score(s, x, y, cfg))
        .collect::<Result<_>>()?;

    let better = |a: f64, b: f64| match cfg.metric {
        Metric::Accuracy => a > b,
        Metric::Mse => a < b,
    };
    let mut best = 0;
    for i in 1..c_grid.len() {
        let (si, sb) = (scores[i], scores[best]);
        if better(si, sb) || (si == sb && c_grid[i] < c_grid[best]) {
            best = i;
        }
    }
    let tie_broken = (0..c_grid.len()).any(|i| i != best && scores[i] == scores[best]);
    Ok(TuneResult {
        best_c: c_grid[best],
        scores: c_grid.iter().copied().zip(scores).collect(),
        metric: cfg.metric,
        tie_broken,
    })
}
