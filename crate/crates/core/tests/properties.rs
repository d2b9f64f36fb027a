use std::f64::consts::PI;

use proptest::prelude::*;
use qkernel_core::datasets::{sample_uniform, Pca};
use qkernel_core::featuremaps::{embed, kernel_value};
use qkernel_core::gentheory::{generalization_error, kappa_residual, solve_kappa, TheoryInput};
use qkernel_core::kernels::{gram, GramMatrix};
use qkernel_core::learners::{krr_fit, svm_fit};
use qkernel_core::rng::derive_seed;
use qkernel_core::simcore::Statevector;
use qkernel_core::spectral::{empirical_spectrum, single_qubit_spectrum, tensor_spectrum};
use qkernel_core::{FeatureMapFamily, FeatureMapSpec};

fn spec_of(family: u8, n: usize, c: f64) -> FeatureMapSpec {
    match family % 3 {
        0 => FeatureMapSpec::product_rx(n, c).unwrap(),
        1 => FeatureMapSpec::iqp(n, c).unwrap(),
        _ => FeatureMapSpec::evo(n, c, 17).unwrap(),
    }
}

fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-PI..PI, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gates_preserve_norm(
        q in 2usize..7,
        ops in prop::collection::vec((0u8..3, 0usize..8, -7.0f64..7.0), 1..30),
        seed in any::<u64>(),
    ) {
        let mut s = Statevector::random_haar(q, seed).unwrap();
        for (kind, j, angle) in ops {
            match kind {
                0 => s.apply_rx(j % q, angle).unwrap(),
                1 => s.apply_heisenberg_pair(j % (q - 1), angle).unwrap(),
                _ => {
                    let phases: Vec<f64> = (0..s.dim()).map(|b| angle * b as f64).collect();
                    s.apply_diagonal_phase(&phases).unwrap();
                    s.apply_hadamard_layer();
                }
            }
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn embeddings_are_normalized(family in 0u8..3, n in 1usize..6, c in 0.01f64..1.0, x in point(5)) {
        let spec = spec_of(family, n, c);
        let s = embed(&spec, &x[..n]).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn kernel_symmetric_and_bounded(
        family in 0u8..3, n in 1usize..6, c in 0.0f64..1.0, x in point(5), y in point(5),
    ) {
        let spec = spec_of(family, n, c);
        let k1 = kernel_value(&spec, &x[..n], &y[..n]).unwrap();
        let k2 = kernel_value(&spec, &y[..n], &x[..n]).unwrap();
        prop_assert!((k1 - k2).abs() < 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&k1));
        prop_assert_eq!(kernel_value(&spec, &x[..n], &x[..n]).unwrap(), 1.0);
    }

    #[test]
    fn product_rx_kernel_is_shift_invariant(n in 1usize..5, c in 0.01f64..1.0, x in point(4), y in point(4), t in -1.0f64..1.0) {
        let spec = FeatureMapSpec::product_rx(n, c).unwrap();
        let xs: Vec<f64> = x[..n].iter().map(|v| v + t).collect();
        let ys: Vec<f64> = y[..n].iter().map(|v| v + t).collect();
        let a = kernel_value(&spec, &x[..n], &y[..n]).unwrap();
        let b = kernel_value(&spec, &xs, &ys).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn gram_is_psd_symmetric_and_deterministic(family in 0u8..3, n in 1usize..5, c in 0.01f64..1.0, p in 2usize..40, seed in any::<u64>()) {
        let spec = spec_of(family, n, c);
        let xs = sample_uniform(n, p, seed);
        let g = gram(&spec, &xs).unwrap();
        prop_assert_eq!(&g, &gram(&spec, &xs).unwrap());
        for i in 0..p {
            prop_assert_eq!(g.get(i, i), 1.0);
            for j in 0..p {
                prop_assert_eq!(g.get(i, j), g.get(j, i));
            }
        }
        let b = g.bounds().unwrap();
        prop_assert!(b.all_hold(), "{:?}", b);
    }

    #[test]
    fn single_qubit_spectrum_is_ordered_and_normalized(c in 1e-6f64..1.0) {
        let l = single_qubit_spectrum(c).unwrap();
        prop_assert!((l[0] + l[1] + l[2] - 1.0).abs() < 1e-12);
        prop_assert!(l[0] >= l[1] - 1e-15 && l[1] >= l[2] - 1e-15 && l[2] >= -1e-15);
        prop_assert_eq!(l[3], 0.0);
    }

    #[test]
    fn tensor_spectrum_mass_is_one(n in 1usize..40, c in 0.01f64..1.0) {
        let levels = tensor_spectrum(n, c, usize::MAX).unwrap();
        let mass: f64 = levels.iter().map(|l| l.eigenvalue * l.degeneracy).sum();
        prop_assert!((mass - 1.0).abs() < 1e-9, "{}", mass);
        for w in levels.windows(2) {
            prop_assert!(w[0].eigenvalue > w[1].eigenvalue);
        }
    }

    #[test]
    fn kappa_satisfies_fixed_point(
        eig in prop::collection::vec(1e-8f64..1.0, 1..60),
        p in 0.0f64..500.0,
        ridge in prop_oneof![Just(0.0), 1e-10f64..10.0],
    ) {
        let kappa = solve_kappa(p, ridge, &eig).unwrap();
        prop_assert!(kappa >= 0.0);
        let levels: Vec<(f64, f64)> = eig.iter().map(|&e| (e, 1.0)).collect();
        let r = kappa_residual(p, ridge, &levels, kappa);
        prop_assert!(r.abs() <= 1e-10 * kappa.max(ridge).max(1.0), "residual {}", r);
    }

    #[test]
    fn theory_gamma_in_range_and_error_nonnegative(
        eig in prop::collection::vec(1e-6f64..1.0, 1..40),
        p in 1.0f64..300.0,
        ridge in 1e-8f64..1.0,
        noise in 0.0f64..0.5,
    ) {
        let w: Vec<f64> = eig.iter().map(|e| e.sqrt()).collect();
        let input = TheoryInput::from_modes(&eig, &w, ridge, noise).unwrap();
        let pt = generalization_error(&input, p).unwrap();
        prop_assert!((0.0..1.0).contains(&pt.gamma));
        prop_assert!(pt.error >= 0.0);
    }

    #[test]
    fn noiseless_theory_curve_is_nonincreasing(
        eig in prop::collection::vec(1e-6f64..1.0, 2..40),
        ridge in 1e-8f64..1e-1,
    ) {
        let w: Vec<f64> = eig.iter().map(|e| e.powf(0.3)).collect();
        let input = TheoryInput::from_modes(&eig, &w, ridge, 0.0).unwrap();
        let mut last = f64::INFINITY;
        for p in [0.0, 1.0, 2.0, 5.0, 10.0, 30.0, 100.0, 1000.0] {
            let e = generalization_error(&input, p).unwrap().error;
            prop_assert!(e <= last + 1e-10);
            last = e;
        }
    }

    #[test]
    fn krr_solves_regularized_system(p in 2usize..40, c in 0.05f64..1.0, ridge in 1e-6f64..1.0, seed in any::<u64>()) {
        let spec = FeatureMapSpec::product_rx(3, c).unwrap();
        let xs = sample_uniform(3, p, seed);
        let y: Vec<f64> = xs.iter().map(|x| x[0].sin() + x[2]).collect();
        let g = gram(&spec, &xs).unwrap();
        let m = krr_fit(&g, &y, ridge).unwrap();
        let ynorm: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(m.residual_norm(&g, &y) < 1e-8 * ynorm);
    }

    #[test]
    fn krr_is_backward_stable_at_tiny_ridge(p in 2usize..40, c in 0.05f64..1.0, ridge in prop_oneof![Just(0.0), 1e-10f64..1e-6], seed in any::<u64>()) {
        let spec = FeatureMapSpec::product_rx(3, c).unwrap();
        let xs = sample_uniform(3, p, seed);
        let y: Vec<f64> = xs.iter().map(|x| x[0].sin() + x[2]).collect();
        let g = gram(&spec, &xs).unwrap();
        let m = krr_fit(&g, &y, ridge).unwrap();
        let ynorm: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let anorm: f64 = m.dual_coefficients.iter().map(|v| v * v).sum::<f64>().sqrt();
        let knorm: f64 = g.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt() + m.ridge;
        let floor = 1e3 * f64::EPSILON * knorm * anorm;
        prop_assert!(m.residual_norm(&g, &y) < 1e-8 * ynorm + floor);
    }

    #[test]
    fn svm_dual_is_feasible(p in 4usize..50, c_svm in 0.1f64..10.0, bw in 0.1f64..1.0, seed in any::<u64>()) {
        let spec = FeatureMapSpec::product_rx(2, bw).unwrap();
        let xs = sample_uniform(2, p, seed);
        let mut y: Vec<f64> = xs.iter().map(|x| if x[0] + 0.3 * x[1] > 0.0 { 1.0 } else { -1.0 }).collect();
        y[0] = 1.0;
        y[1] = -1.0;
        let g = gram(&spec, &xs).unwrap();
        let m = svm_fit(&g, &y, c_svm).unwrap();
        let balance: f64 = m.dual_coefficients.iter().zip(&y).map(|(a, b)| a * b).sum();
        prop_assert!(balance.abs() < 1e-8);
        for &a in &m.dual_coefficients {
            prop_assert!((-1e-12..=c_svm + 1e-12).contains(&a));
        }
        prop_assert!(m.kkt_violation < 1e-3);
    }

    #[test]
    fn spectrum_trace_and_parseval(p in 2usize..40, c in 0.05f64..1.0, seed in any::<u64>()) {
        let spec = FeatureMapSpec::product_rx(3, c).unwrap();
        let xs = sample_uniform(3, p, seed);
        let y: Vec<f64> = xs.iter().map(|x| x[1].cos()).collect();
        let g = gram(&spec, &xs).unwrap();
        let r = empirical_spectrum(&g, &y).unwrap();
        let trace: f64 = r.eigenvalues.iter().sum();
        prop_assert!((trace - 1.0).abs() < 1e-8);
        let power: f64 = r.target_weights.iter().map(|a| a * a).sum();
        let expected = y.iter().map(|v| v * v).sum::<f64>() / p as f64;
        prop_assert!((power - expected).abs() < 1e-8 * expected.max(1.0));
        if r.total_power() > 0.0 {
            let curve = r.cumulative_curve().unwrap();
            for w in curve.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-12);
            }
            prop_assert!((curve[curve.len() - 1] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn full_rank_pca_is_an_isometry(d in 2usize..6, p in 8usize..30, seed in any::<u64>()) {
        let xs = sample_uniform(d, p, seed);
        let pca = Pca::fit(&xs, d).unwrap();
        for x in &xs {
            let back = pca.reconstruct(&pca.transform_one(x));
            for (a, b) in x.iter().zip(&back) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
        let z = pca.transform(&xs);
        let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>();
        prop_assert!((dist(&xs[0], &xs[1]) - dist(&z[0], &z[1])).abs() < 1e-9);
    }

    #[test]
    fn binary_gram_round_trip(p in 1usize..20, seed in any::<u64>()) {
        let xs = sample_uniform(2, p, seed);
        let g = gram(&FeatureMapSpec::iqp(2, 0.5).unwrap(), &xs).unwrap();
        let mut buf = Vec::new();
        g.write_binary(&mut buf).unwrap();
        let back = GramMatrix::read_binary(&buf[..]).unwrap();
        prop_assert_eq!(back.as_slice(), g.as_slice());
    }

    #[test]
    fn seed_derivation_is_deterministic(seed in any::<u64>(), i in any::<u64>()) {
        prop_assert_eq!(derive_seed(seed, i), derive_seed(seed, i));
        prop_assert_ne!(derive_seed(seed, i), derive_seed(seed, i.wrapping_add(1)));
    }

    #[test]
    fn family_names_round_trip(f in 0u8..3) {
        let fam = spec_of(f, 2, 0.5).family;
        prop_assert_eq!(fam.to_string().parse::<FeatureMapFamily>().unwrap(), fam);
    }
}
