use crate::error::{Error, Result};
use crate::kernels::purity_toy_analytic;

/// Bandwidth c ∈ (0, 1] at which the toy-kernel purity equals `m0`.
pub fn bandwidth_for_constant_purity(n: usize, m0: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("n", "need n ≥ 1"));
    }
    let floor = purity_toy_analytic(n, 1.0);
    if !(m0 > floor && m0 < 1.0) {
        return Err(Error::param("m0", format!("{m0} outside ({floor:e}, 1)")));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if purity_toy_analytic(n, mid) > m0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Least-squares fit of log c = log a − α·log n; returns (α, a).
pub fn fit_scaling_exponent(ns: &[f64], cs: &[f64]) -> Result<(f64, f64)> {
    if ns.len() != cs.len() {
        return Err(Error::Dimension {
            expected: ns.len(),
            actual: cs.len(),
        });
    }
    if ns.len() < 3 {
        return Err(Error::InsufficientData("need at least three points".into()));
    }
    if ns.iter().chain(cs).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::param("points", "all values must be positive and finite"));
    }
    let lx: Vec<f64> = ns.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = cs.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 1e-24 {
        return Err(Error::param("ns", "all n are equal"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((-slope, (my - slope * mx).exp()))
}
