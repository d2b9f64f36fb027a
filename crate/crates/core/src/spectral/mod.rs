//! Spectra of the kernel integral operator.

mod analytic;
mod empirical;
mod scaling;

pub use analytic::*;
pub use empirical::*;
pub use scaling::*;

/// sin(y)/y with sinc(0) = 1.
pub fn sinc(y: f64) -> f64 {
    if y.abs() < 1e-8 {
        1.0 - y * y / 6.0
    } else {
        y.sin() / y
    }
}

/// Composite Simpson rule on `[a, b]` with `intervals` (rounded up to even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    let m = intervals.max(2).next_multiple_of(2);
    let h = (b - a) / m as f64;
    let inner: f64 = (1..m)
        .map(|i| {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            w * f(a + i as f64 * h)
        })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

/// Expectation of `f` under the uniform density on [−π, π].
pub fn uniform_mean<F: Fn(f64) -> f64>(f: F) -> f64 {
    use std::f64::consts::PI;
    simpson(f, -PI, PI, 4096) / (2.0 * PI)
}
