use dpp_gicar::numerics::{
    determinant, exp_action, log_pochhammer, max_abs, sym_eigen, sym_tridiag_eigen, LogValue,
    SymTridiag,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_tridiag(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> SymTridiag {
    let diag = (0..n).map(|_| rng.random_range(-scale..scale)).collect();
    let off = (0..n - 1).map(|_| rng.random_range(-scale..scale)).collect();
    SymTridiag::new(diag, off).unwrap()
}

/// Number of eigenvalues below `x` from the Sturm sequence of `T − x`.
fn sturm_count(t: &SymTridiag, x: f64) -> usize {
    let (d, e) = (t.diag(), t.offdiag());
    let mut count = 0;
    let mut q = d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        let denom = if q == 0.0 { f64::EPSILON } else { q };
        q = d[i] - x - e[i - 1] * e[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k`-th smallest eigenvalue by bisection.
fn bisect(t: &SymTridiag, k: usize) -> f64 {
    let bound = t.norm() + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(t, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn cofactor_det(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 1.0;
    }
    (0..n)
        .map(|j| {
            let minor = m.clone().remove_row(0).remove_column(j);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * m[(0, j)] * cofactor_det(&minor)
        })
        .sum()
}

fn taylor_expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let norm = max_abs(a) * a.nrows() as f64;
    let squarings = norm.log2().ceil().max(0.0) as i32 + 4;
    let scaled = a / 2f64.powi(squarings);
    let n = a.nrows();
    let mut term = DMatrix::identity(n, n);
    let mut sum = DMatrix::identity(n, n);
    for k in 1..30 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

#[test]
fn tridiagonal_spectrum_matches_bisection() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let t = random_tridiag(&mut rng, 20, 3.0);
        let eig = sym_tridiag_eigen(&t).unwrap();
        for k in 0..20 {
            assert!((eig.eigenvalues[19 - k] - bisect(&t, k)).abs() < 1e-10);
        }
        let dense = t.to_dense();
        for j in 0..20 {
            let v = eig.eigenvectors.column(j);
            let r = &dense * v - v * eig.eigenvalues[j];
            assert!(r.amax() <= 1e-10 * t.norm());
        }
    }
}

#[test]
fn determinant_matches_cofactor_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in 1..=6 {
        let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let oracle = cofactor_det(&m);
        assert!((determinant(&m) - oracle).abs() <= 1e-10 * oracle.abs().max(1e-3));
    }
    assert_eq!(determinant(&DMatrix::<f64>::identity(5, 5)), 1.0);
}

#[test]
fn exponential_matches_taylor() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let t = random_tridiag(&mut rng, 10, 2.0);
    let eig = sym_tridiag_eigen(&t).unwrap();
    let got = exp_action(&t, 0.3, &eig).unwrap();
    let oracle = taylor_expm(&(t.to_dense() * 0.3));
    assert!(max_abs(&(got.clone() - oracle)) < 1e-9);
    assert!(max_abs(&(got.clone() - got.transpose())) < 1e-12);
    let identity = exp_action(&t, 0.0, &eig).unwrap();
    assert!(max_abs(&(identity - DMatrix::identity(10, 10))) < 1e-12);

    let diag = SymTridiag::new(vec![0.5, -1.0, 2.0], vec![0.0, 0.0]).unwrap();
    let e = exp_action(&diag, 1.0, &sym_tridiag_eigen(&diag).unwrap()).unwrap();
    for (i, d) in [0.5f64, -1.0, 2.0].iter().enumerate() {
        assert!((e[(i, i)] - d.exp()).abs() < 1e-13);
    }
    let other = SymTridiag::new(vec![0.0; 4], vec![0.0; 3]).unwrap();
    assert!(exp_action(&other, 1.0, &eig).is_err());
}

#[test]
fn pochhammer_values() {
    assert_eq!(log_pochhammer(3.7, 0), LogValue::one());
    assert!((log_pochhammer(2.0, 3).value() - 24.0).abs() < 1e-12);
    assert!((log_pochhammer(-1.5, 2).value() - 0.75).abs() < 1e-15);
    assert_eq!(log_pochhammer(-2.0, 4), LogValue::Zero);
}

#[test]
fn large_eigenbasis_is_orthonormal() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let t = random_tridiag(&mut rng, 400, 5.0);
    let eig = sym_tridiag_eigen(&t).unwrap();
    let v = &eig.eigenvectors;
    assert!(max_abs(&(v.transpose() * v - DMatrix::identity(400, 400))) <= 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn eigenvectors_orthonormal(seed in any::<u64>(), n in 1usize..120) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tridiag(&mut rng, n.max(2), 10.0);
        let eig = sym_tridiag_eigen(&t).unwrap();
        let v = &eig.eigenvectors;
        prop_assert!(max_abs(&(v.transpose() * v - DMatrix::identity(v.nrows(), v.nrows()))) <= 1e-12);
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn exponential_semigroup(seed in any::<u64>(), s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..30);
        let mut op = random_tridiag(&mut rng, n, 25.0);
        while op.norm() > 50.0 {
            op = SymTridiag::new(op.diag().iter().map(|d| d / 2.0).collect(), op.offdiag().iter().map(|e| e / 2.0).collect()).unwrap();
        }
        let eig = sym_tridiag_eigen(&op).unwrap();
        let lhs = exp_action(&op, s, &eig).unwrap() * exp_action(&op, t, &eig).unwrap();
        let rhs = exp_action(&op, s + t, &eig).unwrap();
        // Entries reach e^50 for indefinite T, so the error is measured relative to the result.
        prop_assert!(max_abs(&(lhs - &rhs)) <= 1e-9 * max_abs(&rhs).max(1.0));
    }

    #[test]
    fn determinant_is_multiplicative(seed in any::<u64>(), n in 1usize..=12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let product: f64 = determinant(&(&a * &b));
        let separate: f64 = determinant(&a) * determinant(&b);
        prop_assert!((product - separate).abs() <= 1e-8 * separate.abs().max(1e-12));
    }

    #[test]
    fn dense_solver_agrees_with_tridiagonal(seed in any::<u64>(), n in 2usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tridiag(&mut rng, n, 4.0);
        let a = sym_tridiag_eigen(&t).unwrap().eigenvalues;
        let b = sym_eigen(&t.to_dense()).unwrap().eigenvalues;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }
}
