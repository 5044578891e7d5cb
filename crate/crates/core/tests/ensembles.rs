use dpp_gicar::ensembles::{
    brute_force_log_normalization, cd_kernel, correlation, sample, sample_many, Ensemble,
    OrthonormalSystem, WeightFamily, auto_window, build_weight,
};
use dpp_gicar::lattice::{enumerate_configurations, Configuration, Window};
use dpp_gicar::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn charlier_window(hi: i64) -> (WeightFamily, Window) {
    (WeightFamily::charlier(1.0).unwrap(), Window::half_line(hi).unwrap())
}

/// Modified Gram–Schmidt on `x^n √w(x)` in the shifted variable `x − c`.
fn gram_schmidt_oracle(logw: &[f64], points: &[f64], count: usize) -> Vec<Vec<f64>> {
    let center = points.iter().zip(logw).map(|(x, l)| x * l.exp()).sum::<f64>()
        / logw.iter().map(|l| l.exp()).sum::<f64>();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for n in 0..count {
        let mut v: Vec<f64> = points
            .iter()
            .zip(logw)
            .map(|(x, l)| (x - center).powi(n as i32) * (0.5 * l).exp())
            .collect();
        for _ in 0..2 {
            for b in &basis {
                let c: f64 = v.iter().zip(b).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(b).for_each(|(a, b)| *a -= c * b);
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        basis.push(v);
    }
    basis
}

#[test]
fn charlier_ground_state_is_root_weight() {
    let (family, window) = charlier_window(40);
    let sys = OrthonormalSystem::new(&family, &window, 8).unwrap();
    assert!(sys.log_norm(0).abs() < 1e-14);
    for (i, x) in window.indices().enumerate() {
        let expected = (0.5 * family.log_weight(x)).exp();
        assert!((sys.value(0, i) - expected).abs() < 1e-14);
    }
    assert!(sys.gram_error() < 1e-10);
    let k1 = cd_kernel(&sys, 1).unwrap();
    for x in window.indices() {
        assert!((k1.get(x, x).unwrap() - family.log_weight(x).exp()).abs() < 1e-14);
    }
}

#[test]
fn orthonormal_functions_match_gram_schmidt() {
    let (family, window) = charlier_window(40);
    let sys = OrthonormalSystem::new(&family, &window, 8).unwrap();
    let logw = build_weight(&family, &window).unwrap();
    let oracle = gram_schmidt_oracle(&logw, &window.points(), 8);
    for (n, f) in oracle.iter().enumerate() {
        // Gram–Schmidt fixes the sign by the leading coefficient, as does the system.
        let diff = f.iter().enumerate().map(|(i, v)| (v - sys.value(n, i)).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-9, "n = {n}: {diff}");
    }
}

#[test]
fn requesting_too_many_functions_names_the_index() {
    let (family, window) = charlier_window(9);
    match OrthonormalSystem::new(&family, &window, 12) {
        Err(Error::Precision { index, .. }) => assert!(index <= 10),
        other => panic!("expected a precision error, got {other:?}"),
    }
    let reliable = OrthonormalSystem::reliable(&family, &window, 12).unwrap();
    assert!(reliable.count() <= 10);
    assert!(reliable.gram_error() < 1e-8);
}

#[test]
fn normalization_is_product_of_squared_norms() {
    let (family, window) = charlier_window(25);
    for n in [2, 3] {
        let brute = brute_force_log_normalization(&family, &window, n).unwrap();
        let sys = OrthonormalSystem::new(&family, &window, n).unwrap();
        let squared = sys.log_normalization(n);
        let unsquared = 0.5 * squared;
        assert!((brute - squared).exp_m1().abs() < 1e-8, "N = {n}");
        if n == 3 {
            // ‖p̃_2‖² = 2, so only the squared product matches here.
            assert!((brute - unsquared).abs() > 0.3);
        }
    }
}

#[test]
fn masses_sum_to_one() {
    let (family, window) = charlier_window(20);
    let ensemble = Ensemble::new(&family, &window, 3).unwrap();
    let total: f64 = enumerate_configurations(&window, 3)
        .unwrap()
        .iter()
        .map(|c| ensemble.mass(c).unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-10);

    let one = Ensemble::new(&family, &window, 1).unwrap();
    let total_w: f64 = window.indices().map(|x| family.log_weight(x).exp()).sum();
    for x in window.indices() {
        let c = Configuration::new(window, vec![x]).unwrap();
        assert!((one.mass(&c).unwrap() - family.log_weight(x).exp() / total_w).abs() < 1e-15);
    }
    let wrong = Configuration::new(window, vec![1, 2]).unwrap();
    assert!(matches!(ensemble.mass(&wrong), Err(Error::Domain(_))));
}

#[test]
fn pair_correlations_match_enumeration() {
    let (family, window) = charlier_window(11);
    let ensemble = Ensemble::new(&family, &window, 2).unwrap();
    let kernel = ensemble.kernel().unwrap();
    let configs = enumerate_configurations(&window, 2).unwrap();
    for x in window.indices() {
        for y in window.indices() {
            let expected: f64 = if x == y {
                0.0
            } else {
                configs
                    .iter()
                    .filter(|c| c.contains(x) && c.contains(y))
                    .map(|c| ensemble.mass(c).unwrap())
                    .sum()
            };
            let got = correlation(&kernel, &[x, y]).unwrap();
            assert!((got - expected).abs() < 1e-10, "({x}, {y}): {got} vs {expected}");
        }
    }
}

#[test]
fn askey_lesky_weights_are_positive() {
    let c = Complex64::new;
    let family = WeightFamily::askey_lesky(c(6.0, 1.0), c(6.0, -1.0), c(5.3, 0.0), c(5.6, 0.0)).unwrap();
    let (window, cert) = auto_window(&family, 3).unwrap();
    assert!(cert.passed);
    let logw = build_weight(&family, &window).unwrap();
    assert!(logw.iter().all(|l| l.is_finite()));
    assert!(family.pearson_residual(&window) < 1e-10);
}

#[test]
fn sampler_is_deterministic_and_matches_density() {
    let (family, window) = charlier_window(20);
    let ensemble = Ensemble::new(&family, &window, 2).unwrap();
    let kernel = ensemble.kernel().unwrap();
    assert_eq!(sample(&kernel, 7).unwrap(), sample(&kernel, 7).unwrap());

    let trials = 100_000;
    let samples = sample_many(&kernel, 2024, trials).unwrap();
    let mut counts = vec![0usize; window.len()];
    for s in &samples {
        assert_eq!(s.len(), 2);
        for &x in s.indices() {
            counts[window.position(x).unwrap()] += 1;
        }
    }
    for (i, x) in window.indices().enumerate() {
        let rho = kernel.get(x, x).unwrap();
        if rho < 1e-3 {
            continue;
        }
        let empirical = counts[i] as f64 / trials as f64;
        let se = (rho * (1.0 - rho) / trials as f64).sqrt();
        assert!((empirical - rho).abs() < 4.0 * se, "x = {x}: {empirical} vs {rho}");
    }
}

#[test]
fn sampler_rejects_non_projections() {
    let (family, window) = charlier_window(15);
    let sys = OrthonormalSystem::new(&family, &window, 2).unwrap();
    let kernel = cd_kernel(&sys, 2).unwrap();
    let scaled = dpp_gicar::ensembles::ProjectionKernel::from_matrix(kernel.matrix() * 0.9, 2, window).unwrap();
    assert!(matches!(sample(&scaled, 1), Err(Error::Validation(_))));
}

fn family_strategy() -> impl Strategy<Value = WeightFamily> {
    prop_oneof![
        (0.3f64..4.0).prop_map(|mu| WeightFamily::charlier(mu).unwrap()),
        (0.5f64..4.0, 0.05f64..0.6).prop_map(|(b, xi)| WeightFamily::meixner(b, xi).unwrap()),
        (4.0f64..8.0, 0.1f64..2.0, 4.2f64..8.0).prop_map(|(ur, ui, wr)| {
            let c = Complex64::new;
            WeightFamily::askey_lesky(c(ur, ui), c(ur, -ui), c(wr, 0.0), c(wr.floor() + 0.5 * (wr.fract() + 1.0) * 0.9, 0.0))
                .unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernels_are_projections(family in family_strategy(), n in 1usize..4) {
        let (window, _) = auto_window(&family, n).unwrap();
        let ensemble = Ensemble::new(&family, &window, n).unwrap();
        let kernel = ensemble.kernel().unwrap();
        prop_assert!(kernel.projector_residual() < 1e-10);
        prop_assert!((kernel.trace() - n as f64).abs() < 1e-8);
        for ev in kernel.eigenvalues().unwrap() {
            prop_assert!((-1e-10..=1.0 + 1e-10).contains(&ev));
        }
    }

    #[test]
    fn correlations_are_inclusion_probabilities(
        family in family_strategy(),
        n in 1usize..4,
        order in 1usize..4,
        lo in -3i64..3,
    ) {
        let window = family.window(lo, lo + 9).unwrap();
        let ensemble = Ensemble::new(&family, &window, n).unwrap();
        let kernel = ensemble.kernel().unwrap();
        let configs = enumerate_configurations(&window, n).unwrap();
        for subset in enumerate_configurations(&window, order).unwrap() {
            let expected: f64 = configs
                .iter()
                .filter(|c| subset.indices().iter().all(|&x| c.contains(x)))
                .map(|c| ensemble.mass(c).unwrap())
                .sum();
            let got = correlation(&kernel, subset.indices()).unwrap();
            prop_assert!((got - expected).abs() < 1e-10, "{subset}: {got} vs {expected}");
        }
    }

    #[test]
    fn mass_ignores_presentation_order(mut points in proptest::sample::subsequence((0i64..15).collect::<Vec<_>>(), 3)) {
        let (family, window) = charlier_window(15);
        let ensemble = Ensemble::new(&family, &window, 3).unwrap();
        let sorted = ensemble.mass(&Configuration::new(window, points.clone()).unwrap()).unwrap();
        points.reverse();
        let reversed = ensemble.mass(&Configuration::new(window, points).unwrap()).unwrap();
        prop_assert_eq!(sorted, reversed);
    }
}
