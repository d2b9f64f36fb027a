use std::io::Write;

use qkernel_core::datasets::{
    binary_filter_and_split, load_csv_dataset, sample_uniform, Dataset, Pca, Standardizer, Target,
};
use qkernel_core::gentheory::{learning_curve as theory_curve, TheoryInput};
use qkernel_core::kernels::{cross_kernel, gram as build_gram, purity_empirical, purity_toy_analytic};
use qkernel_core::learners::{
    empirical_learning_curve_with, krr_fit, svm_fit, tune_bandwidth, Metric, TuneConfig, MIN_RIDGE,
};
use qkernel_core::rng::derive_seed;
use qkernel_core::spectral::{
    empirical_spectrum, fit_scaling_exponent, haar_covariance_monte_carlo, haar_covariance_spectrum,
    product_target_levels, project_factor, tensor_spectrum,
};
use qkernel_core::{FeatureMapFamily, FeatureMapSpec};
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Format};
use crate::output::{emit, num, open_output, write_header, write_sidecar, Table};
use crate::CliError;

/// Largest Gram built to estimate a spectrum for the theory curve.
const MAX_SPECTRUM_SAMPLES: usize = 3000;

fn spec_for(cfg: &ExperimentConfig, n: usize, c: f64) -> Result<FeatureMapSpec, CliError> {
    let evo_seed = (cfg.map == FeatureMapFamily::Evo).then(|| derive_seed(cfg.seed, 0xE70));
    Ok(FeatureMapSpec::new(cfg.map, n, c, evo_seed)?)
}

/// Binary train/test split of a CSV dataset, PCA-reduced to n features and
/// standardized with statistics of the training split.
fn load_split(cfg: &ExperimentConfig, train_p: usize) -> Result<(Dataset, Dataset), CliError> {
    let path = cfg.data.as_ref().expect("caller checked --data");
    let raw = load_csv_dataset(path)?;
    let (mut train, mut test) =
        binary_filter_and_split(&raw, cfg.class_a, cfg.class_b, train_p, cfg.test_p, cfg.seed)?;
    let pca = Pca::fit(&train.inputs, cfg.n)?;
    let scaler = Standardizer::fit(&pca.transform(&train.inputs))?;
    train.inputs = scaler.transform(&pca.transform(&train.inputs));
    test.inputs = scaler.transform(&pca.transform(&test.inputs));
    for d in [&mut train, &mut test] {
        d.provenance.pca_components = Some(cfg.n);
        d.provenance.steps.push("pca fit on train, standardized".into());
    }
    Ok((train, test))
}

fn synthetic(cfg: &ExperimentConfig, n: usize, p: usize, stream: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let x = sample_uniform(n, p, derive_seed(cfg.seed, stream));
    let y = match cfg.target {
        Target::Gaussian => qkernel_core::datasets::target_gaussian(&x, n),
        other => other.evaluate(&x),
    };
    (x, y)
}

pub fn spectrum(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let mut table = Table::new(&[
        "c",
        "source",
        "rank",
        "eigenvalue",
        "degeneracy",
        "weight",
        "cumulative_power",
    ]);
    let p = *cfg.p_grid.last().expect("validated");
    let mut summary = Vec::new();
    for &c in &cfg.c_grid {
        if cfg.map == FeatureMapFamily::ProductRx && c > 0.0 {
            for (k, lvl) in tensor_spectrum(cfg.n, c, cfg.top_m)?.iter().enumerate() {
                table.push(vec![
                    num(c),
                    json!("analytic"),
                    json!(k + 1),
                    num(lvl.eigenvalue),
                    num(lvl.degeneracy),
                    Value::Null,
                    Value::Null,
                ]);
            }
        }
        let (x, y) = synthetic(cfg, cfg.n, p, 0);
        let g = build_gram(&spec_for(cfg, cfg.n, c)?, &x)?;
        let report = empirical_spectrum(&g, &y)?;
        let curve = report.cumulative_curve().ok();
        for k in 0..report.len() {
            table.push(vec![
                num(c),
                json!("empirical"),
                json!(k + 1),
                num(report.eigenvalues[k]),
                json!(1),
                num(report.target_weights[k]),
                curve.as_ref().map_or(Value::Null, |cv| num(cv[k])),
            ]);
        }
        summary.push(json!({
            "c": c,
            "participation_ratio": report.participation_ratio(),
            "purity": purity_empirical(&g).ok(),
        }));
    }
    table.summary = json!({ "per_c": summary });
    emit(cfg, &table)
}

fn theory_input(cfg: &ExperimentConfig, spec: &FeatureMapSpec) -> Result<(TheoryInput, &'static str), CliError> {
    let ridge = if cfg.ridge == 0.0 { MIN_RIDGE } else { cfg.ridge };
    let c = spec.bandwidth;
    if spec.family == FeatureMapFamily::ProductRx && cfg.target == Target::Gaussian && c > 0.0 {
        let n2 = (cfg.n * cfg.n) as f64;
        let proj = project_factor(c, |x| (-x * x / n2).exp())?;
        let levels = product_target_levels(cfg.n, c, &proj)?;
        return Ok((TheoryInput::new(levels, ridge, 0.0)?, "analytic"));
    }
    let p = cfg.samples.min(MAX_SPECTRUM_SAMPLES);
    let (x, y) = synthetic(cfg, cfg.n, p, 1);
    let report = empirical_spectrum(&build_gram(spec, &x)?, &y)?;
    Ok((TheoryInput::new(report.theory_levels(), ridge, 0.0)?, "empirical"))
}

pub fn learning_curve(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let mut table = Table::new(&["c", "P", "theory", "empirical", "empirical_sem", "relative_gap", "theory_source"]);
    let grid: Vec<f64> = cfg.p_grid.iter().map(|&p| p as f64).collect();
    for (ci, &c) in cfg.c_grid.iter().enumerate() {
        let spec = spec_for(cfg, cfg.n, c)?;
        let (input, source) = theory_input(cfg, &spec)?;
        let theory = theory_curve(&input, &grid)?;
        let emp = empirical_learning_curve_with(
            &spec,
            cfg.target,
            &cfg.p_grid,
            cfg.ridge,
            cfg.trials,
            derive_seed(cfg.seed, 100 + ci as u64),
            cfg.test_size,
        )?;
        for (i, &p) in cfg.p_grid.iter().enumerate() {
            let (t, e) = (theory.errors[i], emp.mean_errors[i]);
            let gap = if e > 0.0 { (t - e).abs() / e } else { f64::NAN };
            table.push(vec![
                num(c),
                json!(p),
                num(t),
                num(e),
                num(emp.std_errors[i]),
                num(gap),
                json!(source),
            ]);
        }
    }
    emit(cfg, &table)
}

fn tune_config(cfg: &ExperimentConfig, seed: u64) -> TuneConfig {
    TuneConfig {
        folds: cfg.folds,
        metric: cfg.metric,
        seed,
        ridge: cfg.ridge,
        svm_c: cfg.svm_c,
    }
}

fn holdout_score(
    spec: &FeatureMapSpec,
    train: &Dataset,
    test: &Dataset,
    cfg: &ExperimentConfig,
) -> Result<f64, CliError> {
    let g = build_gram(spec, &train.inputs)?;
    let k = cross_kernel(spec, &test.inputs, &train.inputs)?;
    let mut total = 0.0;
    match cfg.metric {
        Metric::Accuracy => {
            let m = svm_fit(&g, &train.labels, cfg.svm_c)?;
            for (i, &y) in test.labels.iter().enumerate() {
                total += f64::from(u8::from(m.predict(k.row(i))? == y));
            }
        }
        Metric::Mse => {
            let m = krr_fit(&g, &train.labels, cfg.ridge)?;
            for (i, &y) in test.labels.iter().enumerate() {
                total += (m.predict(k.row(i))? - y).powi(2);
            }
        }
    }
    Ok(total / test.len() as f64)
}

pub fn tune(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let p = cfg.p_grid[0];
    if !cfg.ns.is_empty() {
        if cfg.data.is_some() {
            return Err(CliError::Config("--ns runs on synthetic data only; drop --data".into()));
        }
        let mut table = Table::new(&["n", "best_c", "best_score"]);
        let mut ns = Vec::new();
        let mut cs = Vec::new();
        for (i, &n) in cfg.ns.iter().enumerate() {
            let (x, y) = synthetic(cfg, n, p, 10 + i as u64);
            let res = tune_bandwidth(&spec_for(cfg, n, 1.0)?, &x, &y, &cfg.c_grid, &tune_config(cfg, cfg.seed))?;
            let best = res.scores.iter().find(|(c, _)| *c == res.best_c).map_or(f64::NAN, |s| s.1);
            table.push(vec![json!(n), num(res.best_c), num(best)]);
            ns.push(n as f64);
            cs.push(res.best_c);
        }
        let (alpha, a) = fit_scaling_exponent(&ns, &cs)?;
        table.summary = json!({ "alpha": alpha, "a": a });
        return emit(cfg, &table);
    }

    let spec = spec_for(cfg, cfg.n, 1.0)?;
    let mut table = Table::new(&["c", "cv_score", "test_score"]);
    let result = if cfg.data.is_some() {
        let (train, test) = load_split(cfg, p)?;
        let res = tune_bandwidth(&spec, &train.inputs, &train.labels, &cfg.c_grid, &tune_config(cfg, cfg.seed))?;
        for &(c, score) in &res.scores {
            let held = holdout_score(&spec.with_bandwidth(c)?, &train, &test, cfg)?;
            table.push(vec![num(c), num(score), num(held)]);
        }
        res
    } else {
        let (x, y) = synthetic(cfg, cfg.n, p, 0);
        let res = tune_bandwidth(&spec, &x, &y, &cfg.c_grid, &tune_config(cfg, cfg.seed))?;
        for &(c, score) in &res.scores {
            table.push(vec![num(c), num(score), Value::Null]);
        }
        res
    };
    table.summary = json!({
        "best_c": result.best_c,
        "metric": result.metric,
        "tie_broken_toward_smaller_c": result.tie_broken,
    });
    emit(cfg, &table)
}

pub fn gram(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let p = cfg.p_grid[0];
    let c = cfg.c_grid[0];
    let x = if cfg.data.is_some() {
        load_split(cfg, p)?.0.inputs
    } else {
        synthetic(cfg, cfg.n, p, 0).0
    };
    let g = build_gram(&spec_for(cfg, cfg.n, c)?, &x)?;
    let bounds = g.bounds()?;
    match cfg.format {
        Format::Binary => {
            let out = cfg.out.as_ref().expect("validated");
            let mut w = open_output(cfg)?;
            g.write_binary(&mut w)?;
            w.flush()?;
            write_sidecar(out, cfg, &bounds)?;
        }
        Format::Csv => {
            let mut w = open_output(cfg)?;
            write_header(&mut *w, cfg)?;
            writeln!(w, "# bounds: {}", serde_json::to_string(&bounds)?)?;
            g.write_csv(&mut w)?;
            w.flush()?;
        }
        Format::Json => {
            let mut w = open_output(cfg)?;
            let rows: Vec<&[f64]> = (0..g.size()).map(|i| g.row(i)).collect();
            let doc = json!({
                "provenance": crate::output::provenance(cfg),
                "size": g.size(),
                "entries": rows,
                "bounds": bounds,
            });
            serde_json::to_writer_pretty(&mut w, &doc)?;
            writeln!(w)?;
            w.flush()?;
        }
    }
    Ok(())
}

pub fn purity(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let p = cfg.p_grid[0];
    let mut table = Table::new(&["c", "n", "analytic", "empirical"]);
    for &c in &cfg.c_grid {
        let (x, _) = synthetic(cfg, cfg.n, p, 0);
        let g = build_gram(&spec_for(cfg, cfg.n, c)?, &x)?;
        let analytic = if cfg.map == FeatureMapFamily::ProductRx {
            num(purity_toy_analytic(cfg.n, c))
        } else {
            Value::Null
        };
        table.push(vec![num(c), json!(cfg.n), analytic, num(purity_empirical(&g)?)]);
    }
    emit(cfg, &table)
}

pub fn haar_check(cfg: &ExperimentConfig) -> Result<(), CliError> {
    if !(1..=3).contains(&cfg.q) {
        return Err(CliError::Config(format!("--q {} outside 1..=3", cfg.q)));
    }
    let (value, nonzero, zero) = haar_covariance_spectrum(cfg.q)?;
    let mc = haar_covariance_monte_carlo(cfg.q, cfg.samples, cfg.seed)?;
    let analytic: Vec<f64> = std::iter::repeat_n(value, nonzero)
        .chain(std::iter::repeat_n(0.0, zero))
        .collect();
    let mut table = Table::new(&["rank", "analytic", "monte_carlo", "abs_diff"]);
    let mut worst = 0.0f64;
    for (k, (a, m)) in analytic.iter().zip(&mc).enumerate() {
        worst = worst.max((a - m).abs());
        table.push(vec![json!(k + 1), num(*a), num(*m), num((a - m).abs())]);
    }
    table.summary = json!({
        "nonzero_value": value,
        "nonzero_multiplicity": nonzero,
        "zero_multiplicity": zero,
        "max_abs_diff": worst,
    });
    emit(cfg, &table)
}
