use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::krr_fit;
use crate::datasets::{sample_uniform, Target};
use crate::error::{Error, Result};
use crate::featuremaps::FeatureMapSpec;
use crate::kernels::{cross_kernel, gram};
use crate::rng::derive_seed2;

pub const DEFAULT_TEST_SIZE: usize = 2000;

/// Trial-averaged test MSE per training-set size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCurve {
    pub sample_counts: Vec<usize>,
    pub mean_errors: Vec<f64>,
    /// Standard error of the mean across trials.
    pub std_errors: Vec<f64>,
    pub trials: usize,
}

/// Test MSE of one KRR fit with `p` uniform training points.
pub fn krr_trial_error(
    spec: &FeatureMapSpec,
    target: Target,
    p: usize,
    ridge: f64,
    test_size: usize,
    seed: u64,
) -> Result<f64> {
    let n = spec.num_features;
    let train = sample_uniform(n, p, derive_seed2(seed, 0, p as u64));
    let test = sample_uniform(n, test_size, derive_seed2(seed, 1, p as u64));
    let y = target.evaluate(&train);
    let y_test = target.evaluate(&test);
    let model = krr_fit(&gram(spec, &train)?, &y, ridge)?;
    let k = cross_kernel(spec, &test, &train)?;
    let mut sse = 0.0;
    for (i, yt) in y_test.iter().enumerate() {
        sse += (model.predict(k.row(i))? - yt).powi(2);
    }
    Ok(sse / test_size as f64)
}

pub fn empirical_learning_curve(
    spec: &FeatureMapSpec,
    target: Target,
    p_grid: &[usize],
    ridge: f64,
    trials: usize,
    seed: u64,
) -> Result<EmpiricalCurve> {
    empirical_learning_curve_with(spec, target, p_grid, ridge, trials, seed, DEFAULT_TEST_SIZE)
}

pub fn empirical_learning_curve_with(
    spec: &FeatureMapSpec,
    target: Target,
    p_grid: &[usize],
    ridge: f64,
    trials: usize,
    seed: u64,
    test_size: usize,
) -> Result<EmpiricalCurve> {
    spec.validate()?;
    if trials == 0 || test_size == 0 {
        return Err(Error::param("trials", "need at least one trial and one test point"));
    }
    if p_grid.iter().any(|&p| p == 0) {
        return Err(Error::param("p_grid", "sample counts must be positive"));
    }
    let jobs: Vec<(usize, usize)> = (0..p_grid.len())
        .flat_map(|g| (0..trials).map(move |t| (g, t)))
        .collect();
    let errors: Vec<f64> = jobs
        .par_iter()
        .map(|&(g, t)| krr_trial_error(spec, target, p_grid[g], ridge, test_size, derive_seed2(seed, t as u64, 0)))
        .collect::<Result<_>>()?;

    let mut mean_errors = Vec::with_capacity(p_grid.len());
    let mut std_errors = Vec::with_capacity(p_grid.len());
    for chunk in errors.chunks(trials) {
        let m = chunk.iter().sum::<f64>() / trials as f64;
        let var = if trials > 1 {
            chunk.iter().map(|e| (e - m).powi(2)).sum::<f64>() / (trials - 1) as f64
        } else {
            0.0
        };
        mean_errors.push(m);
        std_errors.push((var / trials as f64).sqrt());
    }
    Ok(EmpiricalCurve {
        sample_counts: p_grid.to_vec(),
        mean_errors,
        std_errors,
        trials,
    })
}
