use dpp_gicar::lattice::{Partition, Window};
use dpp_gicar::numerics::LogValue;
use dpp_gicar::zmeasure::{
    diagram_inner, dim, exit_rate, factorial, fs_function, m_function, m_value, mass_tail, partition_density,
    pochhammer_lambda, pochhammer_skew, q_generator, q_row, simulate_jump_chain, simulate_stationary,
    size_marginal, skew_dim, subdiagrams, z_mass, zmeasure_kernel, SkewDimensions, ZMeasureTable, ZParams,
};
use dpp_gicar::Error;
use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

fn p(parts: &[u32]) -> Partition {
    Partition::new(parts.to_vec()).unwrap()
}

fn degenerate() -> ZParams {
    ZParams::real(2.0, 3.0, 0.1).unwrap()
}

fn parameter_sets() -> Vec<ZParams> {
    vec![
        degenerate(),
        ZParams::real(1.5, 1.7, 0.3).unwrap(),
        ZParams::new(Complex64::new(0.5, 1.2), Complex64::new(0.5, -1.2), 0.2).unwrap(),
    ]
}

fn bigint_factorial(n: i64) -> Option<BigInt> {
    (n >= 0).then(|| (1..=n).fold(BigInt::one(), |acc, k| acc * k))
}

/// `|λ/μ|! det[1/(λ_i − μ_j − i + j)!]`, with `1/k! = 0` for negative `k`.
fn jacobi_trudi_skew(lambda: &Partition, mu: &Partition) -> BigUint {
    let l = lambda.length();
    if l == 0 {
        return BigUint::one();
    }
    let entry = |i: usize, j: usize| -> BigRational {
        let k = lambda.part(i) as i64 - mu.part(j) as i64 - i as i64 + j as i64;
        match bigint_factorial(k) {
            Some(f) => BigRational::new(BigInt::one(), f),
            None => BigRational::zero(),
        }
    };
    let mut m: Vec<Vec<BigRational>> = (0..l).map(|i| (0..l).map(|j| entry(i, j)).collect()).collect();
    let mut det = BigRational::one();
    for c in 0..l {
        let Some(pivot) = (c..l).find(|&r| !m[r][c].is_zero()) else {
            return BigUint::zero();
        };
        if pivot != c {
            m.swap(pivot, c);
            det = -det;
        }
        det *= m[c][c].clone();
        for r in c + 1..l {
            let factor = m[r][c].clone() / m[c][c].clone();
            for k in c..l {
                let delta = factor.clone() * m[c][k].clone();
                m[r][k] -= delta;
            }
        }
    }
    let total = det * BigRational::from_integer(bigint_factorial((lambda.size() - mu.size()) as i64).unwrap());
    assert!(total.is_integer() && !total.is_negative());
    total.to_integer().to_biguint().unwrap()
}

/// Standard tableaux counted by placing the largest entry in every corner.
fn count_tableaux(lambda: &Partition) -> BigUint {
    if lambda.is_empty() {
        return BigUint::one();
    }
    lambda.removable_rows().into_iter().map(|i| count_tableaux(&lambda.without_box(i))).sum()
}

#[test]
fn small_dimensions() {
    assert_eq!(dim(&Partition::empty()), BigUint::one());
    for n in 1..8 {
        assert_eq!(dim(&p(&[n])), BigUint::one());
    }
    assert_eq!(dim(&p(&[2, 1])), BigUint::from(2u32));
    assert_eq!(dim(&p(&[3, 2])), BigUint::from(5u32));
    assert_eq!(factorial(5), BigUint::from(120u32));
}

#[test]
fn hook_lengths_agree_with_enumeration() {
    for lambda in Partition::all_up_to(10) {
        assert_eq!(dim(&lambda), count_tableaux(&lambda), "{lambda}");
    }
    let table = SkewDimensions::new(&Partition::empty(), 10);
    for lambda in Partition::all_up_to(10) {
        assert_eq!(table.get(&lambda), dim(&lambda));
    }
}

#[test]
fn skew_dimensions_agree_with_the_determinant_formula() {
    for lambda in Partition::all_up_to(8) {
        assert_eq!(skew_dim(&lambda, &Partition::empty()), dim(&lambda));
        for mu in subdiagrams(&lambda) {
            assert_eq!(skew_dim(&lambda, &mu), jacobi_trudi_skew(&lambda, &mu), "{lambda}/{mu}");
        }
    }
    assert_eq!(skew_dim(&p(&[2]), &p(&[1, 1])), BigUint::zero());
    let mu = p(&[2, 1]);
    let table = SkewDimensions::new(&mu, 8);
    for lambda in Partition::all_up_to(8) {
        assert_eq!(table.get(&lambda), skew_dim(&lambda, &mu), "{lambda}");
    }
}

#[test]
fn subdiagrams_are_complete() {
    let lambda = p(&[3, 1]);
    let subs = subdiagrams(&lambda);
    let expected: Vec<Partition> = Partition::all_up_to(4).into_iter().filter(|m| lambda.contains(m)).collect();
    assert_eq!(subs.len(), expected.len());
    assert!(expected.iter().all(|m| subs.contains(m)));
}

#[test]
fn pochhammer_symbols() {
    assert_eq!(pochhammer_lambda(2.7, &Partition::empty()), LogValue::one());
    assert!((pochhammer_lambda(2.0, &p(&[2, 1])).value() - 6.0).abs() <= 1e-12);
    for lambda in Partition::all_up_to(6) {
        assert_eq!(pochhammer_skew(1.3, &lambda, &Partition::empty()), pochhammer_lambda(1.3, &lambda));
    }
    assert_eq!(pochhammer_lambda(1.0, &p(&[1, 1])), LogValue::Zero);
    assert!((pochhammer_skew(2.0, &p(&[3, 1]), &p(&[2])).value() - 4.0 * 1.0).abs() <= 1e-12);
}

#[test]
fn parameter_validation() {
    assert!(matches!(ZParams::real(1.5, 2.5, 0.1), Err(Error::Parameter(_))));
    assert!(matches!(ZParams::real(1.5, 1.7, 1.0), Err(Error::Parameter(_))));
    assert!(ZParams::new(Complex64::new(1.0, 1.0), Complex64::new(1.0, 1.0), 0.5).is_err());
}

#[test]
fn masses_are_positive_and_sum_to_one() {
    let params = ZParams::real(1.5, 1.7, 0.3).unwrap();
    assert!((z_mass(&params, &Partition::empty()) - 0.7f64.powf(1.5 * 1.7)).abs() <= 1e-15);
    for lambda in Partition::all_up_to(8) {
        assert!(z_mass(&params, &lambda) > 0.0, "{lambda}");
    }
    for params in parameter_sets() {
        let table = ZMeasureTable::new(&params, 20);
        for n in 0..=12 {
            let level: f64 = Partition::all_of_size(n).iter().map(|l| table.mass(l).unwrap()).sum();
            assert!((level - size_marginal(&params, n)).abs() <= 1e-13, "n = {n}");
        }
        let partial = table.partial_mass();
        assert!(partial <= 1.0 + 1e-12);
        assert!(partial + table.tail() >= 1.0 - 1e-12, "{partial} + {}", table.tail());
    }
}

#[test]
fn degenerate_series_partial_mass() {
    let params = degenerate();
    let table = ZMeasureTable::new(&params, 20);
    assert!(table.partial_mass() >= 1.0 - 1e-6);
    assert!(table.tail() <= 1e-15);
    assert_eq!(z_mass(&params, &p(&[1, 1, 1])), 0.0);
    assert!(z_mass(&params, &p(&[4, 4])) > 0.0);
    assert!(mass_tail(&params, 5) > mass_tail(&params, 10));
}

#[test]
fn csv_export_of_the_mass_table() {
    let table = ZMeasureTable::new(&degenerate(), 2);
    let mut out = Vec::new();
    table.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("partition,mass\n\"()\","));
}

fn kernel_window() -> Window {
    Window::half_integers(-50, 49).unwrap()
}

#[test]
fn kernel_is_a_projection() {
    for params in parameter_sets() {
        let kernel = zmeasure_kernel(&params, &kernel_window()).unwrap();
        assert!(kernel.projector_residual() <= 1e-10);
    }
}

#[test]
fn kernel_diagonal_matches_the_partition_sum() {
    for params in parameter_sets() {
        let window = kernel_window();
        let kernel = zmeasure_kernel(&params, &window).unwrap();
        let table = ZMeasureTable::new(&params, 20);
        let density = partition_density(&table, &window).unwrap();
        let tail = table.tail();
        for (k, x) in window.indices().enumerate() {
            if (-25..25).contains(&x) {
                let diff = (kernel.get(x, x).unwrap() - density[k]).abs();
                assert!(diff <= tail + 1e-10, "x = {}: {diff:e}", window.point(x));
            }
        }
    }
}

#[test]
fn kernel_freezes_as_xi_vanishes() {
    let window = Window::half_integers(-20, 19).unwrap();
    for params in [ZParams::real(2.0, 3.0, 1e-4).unwrap(), ZParams::real(1.5, 1.7, 1e-4).unwrap()] {
        let kernel = zmeasure_kernel(&params, &window).unwrap();
        for x in window.indices() {
            let expected = if x < 0 { 1.0 } else { 0.0 };
            assert!((kernel.get(x, x).unwrap() - expected).abs() <= 1e-3);
        }
    }
}

#[test]
fn trivial_eigenfunctions() {
    let fs = fs_function(&Partition::empty(), 10).unwrap();
    assert!(fs.values.values().all(|v| (v - 1.0).abs() <= 1e-15));
    for params in parameter_sets() {
        let m = m_function(&params, &Partition::empty(), 10).unwrap();
        assert!(m.values.values().all(|v| (v - 1.0).abs() <= 1e-15));
    }
    assert!(matches!(fs_function(&p(&[2, 1]), 2), Err(Error::Validation(_))));
}

#[test]
fn fs_values_by_hand() {
    let fs = fs_function(&p(&[1]), 6).unwrap();
    for lambda in Partition::all_up_to(6) {
        assert!((fs.get(&lambda).unwrap() - lambda.size() as f64).abs() <= 1e-12);
    }
    let fs = fs_function(&p(&[2]), 4).unwrap();
    assert_eq!(fs.get(&p(&[1, 1])).unwrap(), 0.0);
    assert!((fs.get(&p(&[2, 1])).unwrap() - 3.0).abs() <= 1e-12);
    assert!((fs.get(&p(&[3])).unwrap() - 6.0).abs() <= 1e-12);
}

#[test]
fn m_functions_are_orthogonal() {
    let cutoff = 25;
    for params in [degenerate(), ZParams::real(1.5, 1.7, 0.1).unwrap()] {
        let table = ZMeasureTable::new(&params, cutoff);
        let shapes = Partition::all_up_to(3);
        let ms: Vec<_> = shapes.iter().map(|l| m_function(&params, l, cutoff).unwrap()).collect();
        let norms: Vec<f64> = ms.iter().map(|m| diagram_inner(&table, m, m).unwrap().value).collect();
        for i in 0..ms.len() {
            for j in 0..i {
                let inner = diagram_inner(&table, &ms[i], &ms[j]).unwrap();
                let scale = (norms[i] * norms[j]).sqrt();
                assert!(
                    inner.value.abs() <= inner.tail + 1e-10 * scale.max(1.0),
                    "{} vs {}: {:e} (tail {:e})",
                    shapes[i],
                    shapes[j],
                    inner.value,
                    inner.tail
                );
            }
        }
    }
}

#[test]
fn generator_rows_are_conservative() {
    for params in parameter_sets() {
        for lambda in Partition::all_up_to(7) {
            let row = q_row(&params, &lambda);
            let (diagonal, off) = row.split_last().unwrap();
            assert_eq!(diagonal.0, lambda);
            assert!(off.iter().all(|(_, r)| *r >= 0.0));
            let total: f64 = off.iter().map(|(_, r)| r).sum();
            assert!((total + diagonal.1).abs() <= 1e-12);
            assert!((total - exit_rate(&params, &lambda)).abs() <= 1e-12 * total.max(1.0), "{lambda}");
        }
        let empty = Partition::empty();
        let xi = params.xi();
        assert!((q_generator(&params, &empty, &empty) + xi * params.product() / (1.0 - xi)).abs() <= 1e-14);
        assert!(q_row(&params, &empty).iter().all(|(nu, _)| nu.size() <= 1));
        assert_eq!(q_generator(&params, &p(&[2]), &p(&[3, 1])), 0.0);
    }
}

#[test]
fn generator_is_reversible_for_the_z_measure() {
    for params in parameter_sets() {
        for lambda in Partition::all_up_to(6) {
            for (nu, rate) in q_row(&params, &lambda) {
                if nu != lambda {
                    let forward = z_mass(&params, &lambda) * rate;
                    let backward = z_mass(&params, &nu) * q_generator(&params, &nu, &lambda);
                    assert!((forward - backward).abs() <= 1e-12 * forward.max(1e-300));
                }
            }
        }
    }
}

#[test]
fn m_functions_are_generator_eigenfunctions() {
    for params in parameter_sets() {
        for mu in Partition::all_up_to(3) {
            for lambda in Partition::all_up_to(4) {
                let image: f64 = q_row(&params, &lambda).iter().map(|(nu, r)| r * m_value(&params, &mu, nu)).sum();
                let expected = -(mu.size() as f64) * m_value(&params, &mu, &lambda);
                assert!((image - expected).abs() <= 1e-8, "mu = {mu}, lambda = {lambda}: {image} vs {expected}");
            }
        }
    }
}

#[test]
fn jump_chain_at_time_zero_stays_put() {
    let sample = simulate_jump_chain(&degenerate(), &Partition::empty(), 0.0, 1000, 1).unwrap();
    assert_eq!(sample.counts().len(), 1);
    assert_eq!(sample.counts()[&Partition::empty()], 1000);
    assert!(matches!(
        simulate_jump_chain(&degenerate(), &Partition::empty(), -1.0, 10, 1),
        Err(Error::Domain(_))
    ));
}

#[test]
fn jump_chain_is_deterministic_per_seed() {
    let params = degenerate();
    let a = simulate_jump_chain(&params, &p(&[2, 1]), 0.5, 5000, 9).unwrap();
    let b = simulate_jump_chain(&params, &p(&[2, 1]), 0.5, 5000, 9).unwrap();
    assert_eq!(a.counts(), b.counts());
}

#[test]
fn stationary_chains_keep_the_size_marginal() {
    let params = degenerate();
    let table = ZMeasureTable::new(&params, 20);
    let sample = simulate_stationary(&table, 0.5, 50_000, 4).unwrap();
    for n in 0..=6 {
        let expected = size_marginal(&params, n);
        let (observed, _) = sample.mean(|l| if l.size() == n { 1.0 } else { 0.0 });
        let stderr = (expected * (1.0 - expected) / sample.trials() as f64).sqrt();
        assert!((observed - expected).abs() <= 4.0 * stderr, "n = {n}");
    }
    let report = sample.compare(&table, 4);
    assert_eq!(report.entries.len(), 12);
    assert!(report.entries.iter().all(|e| e.z_score.unwrap().abs() <= 4.0));
}

#[test]
fn first_eigenfunction_decays_exponentially() {
    let params = degenerate();
    let start = p(&[2, 1]);
    let one = p(&[1]);
    let t = 0.7;
    let sample = simulate_jump_chain(&params, &start, t, 50_000, 17).unwrap();
    let (mean, stderr) = sample.mean(|l| m_value(&params, &one, l));
    let expected = (-t).exp() * m_value(&params, &one, &start);
    assert!((mean - expected).abs() <= 4.0 * stderr, "{mean} vs {expected} ± {stderr}");
}
