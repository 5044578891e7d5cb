use dpp_gicar::ensembles::{cd_kernel, OrthonormalSystem, WeightFamily};
use dpp_gicar::lattice::Window;
use dpp_gicar::numerics::max_abs;
use dpp_gicar::operators::{
    build_b, build_bessel_operator, build_hypergeometric_d, build_zmeasure_b, build_zmeasure_operator,
    hypergeometric_targets, match_spectrum, spectral_projection, write_operator_csv, write_spectrum_csv,
    zmeasure_targets,
};
use dpp_gicar::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
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

fn askey_lesky() -> WeightFamily {
    WeightFamily::askey_lesky(c(40.0, 1.0), c(40.0, -1.0), c(39.3, 0.0), c(39.6, 0.0)).unwrap()
}

#[test]
fn truncated_spectra_match_m_n() {
    let cases = [
        (WeightFamily::charlier(1.0).unwrap(), Window::half_line(199).unwrap()),
        (WeightFamily::meixner(1.5, 0.1).unwrap(), Window::half_line(199).unwrap()),
        (askey_lesky(), Window::integers(-100, 99).unwrap()),
    ];
    for (family, window) in cases {
        let op = build_hypergeometric_d(&family, &window).unwrap();
        let eigenvalues = op.eigenvalues().unwrap();
        assert!(eigenvalues[0] <= 1e-10, "{}: {}", family.name(), eigenvalues[0]);
        let matches = match_spectrum(eigenvalues, &hypergeometric_targets(&family, window.len() / 3 + 1));
        assert_eq!(matches.len(), window.len() / 3 + 1);
        for m in matches {
            assert!(m.residual < 1e-8, "{} n = {}: {}", family.name(), m.label, m.residual);
        }
    }
}

#[test]
fn eigenvectors_are_orthonormal_functions() {
    let family = WeightFamily::charlier(1.0).unwrap();
    let window = Window::half_line(60).unwrap();
    let op = build_hypergeometric_d(&family, &window).unwrap();
    let sys = OrthonormalSystem::new(&family, &window, 15).unwrap();
    let eig = op.decomposition().unwrap();
    for n in 0..15 {
        let v = eig.vector(n);
        let diff = v.iter().enumerate().map(|(i, a)| (a - sys.value(n, i)).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-7, "n = {n}: {diff}");
    }
}

#[test]
fn doubling_the_window_keeps_interior_eigenvalues() {
    let family = WeightFamily::charlier(2.0).unwrap();
    let small = build_hypergeometric_d(&family, &Window::half_line(60).unwrap()).unwrap();
    let large = build_hypergeometric_d(&family, &Window::half_line(121).unwrap()).unwrap();
    for n in 0..20 {
        let a = small.eigenvalues().unwrap()[n];
        let b = large.eigenvalues().unwrap()[n];
        assert!((a - b).abs() <= 1e-9, "n = {n}");
    }
}

#[test]
fn generator_gauge_is_consistent() {
    let cases = [
        (WeightFamily::charlier(1.0).unwrap(), Window::half_line(12).unwrap()),
        (WeightFamily::meixner(1.0, 0.5).unwrap(), Window::half_line(30).unwrap()),
    ];
    for (family, window) in cases {
        let op = build_hypergeometric_d(&family, &window).unwrap();
        let generator = op.generator_matrix().unwrap();
        let birth = op.birth().unwrap();
        let death = op.death().unwrap();
        for i in 0..window.len() - 1 {
            assert!((generator[(i, i + 1)] - birth[i]).abs() < 1e-12 * birth[i].max(1.0));
            assert!((generator[(i + 1, i)] - death[i + 1]).abs() < 1e-12 * death[i + 1].max(1.0));
        }
        for t in [0.1, 0.5, 1.0] {
            let gauge = op.generator_exp(t).unwrap();
            let oracle = taylor_expm(&(&generator * t));
            assert!(max_abs(&(gauge - oracle)) < 1e-10, "{} t = {t}", family.name());
        }
    }
}

#[test]
fn spectral_projection_equals_christoffel_darboux() {
    let family = WeightFamily::charlier(1.0).unwrap();
    let window = Window::half_line(50).unwrap();
    let op = build_hypergeometric_d(&family, &window).unwrap();
    let k = spectral_projection(&op, -2.5).unwrap();
    assert_eq!(k.rank(), 3);
    let cd = cd_kernel(&OrthonormalSystem::new(&family, &window, 3).unwrap(), 3).unwrap();
    assert!(max_abs(&(k.matrix() - cd.matrix())) < 1e-10);
    assert!(k.projector_residual() < 1e-10);
}

#[test]
fn signed_generator_flips_the_occupied_block() {
    let family = WeightFamily::charlier(1.0).unwrap();
    let window = Window::half_line(60).unwrap();
    let op = build_hypergeometric_d(&family, &window).unwrap();
    let k = spectral_projection(&op, -2.5).unwrap();
    let b = build_b(&op, &k, -2.5).unwrap();
    assert!(b.max_eigenvalue().unwrap() <= 1e-10);
    assert!(b.commutator(&k) <= 1e-10);
    let sys = OrthonormalSystem::new(&family, &window, 6).unwrap();
    for n in 0..6 {
        let p = nalgebra::DVector::from_vec(sys.function(n));
        let m_n = family.eigenvalue_m(n);
        let expected = if n < 3 { -(m_n + 2.5) } else { m_n + 2.5 };
        let image = b.matrix() * &p;
        assert!((image - &p * expected).amax() < 1e-8, "n = {n}");
    }
    assert!(matches!(build_b(&op, &k, -1.0), Err(Error::Shift { .. })));
    let other = build_hypergeometric_d(&WeightFamily::charlier(3.0).unwrap(), &window).unwrap();
    let foreign = spectral_projection(&other, -2.5).unwrap();
    assert!(matches!(build_b(&op, &foreign, -2.5), Err(Error::Compatibility { .. })));
}

#[test]
fn zmeasure_operator_spectrum() {
    let window = Window::half_integers(-100, 99).unwrap();
    for (z, z_prime) in [(c(2.2, 0.0), c(2.7, 0.0)), (c(1.0, 1.0), c(1.0, -1.0))] {
        let xi = 0.05;
        let op = build_zmeasure_operator(z, z_prime, xi, &window).unwrap();
        let matches = match_spectrum(op.eigenvalues().unwrap(), &zmeasure_targets(xi, 50.0));
        assert_eq!(matches.len(), 100);
        assert!(matches.iter().all(|m| m.residual < 1e-6));

        let k = spectral_projection(&op, 0.0).unwrap();
        let positive = op.eigenvalues().unwrap().iter().filter(|&&l| l > 0.0).count();
        assert_eq!(k.rank(), positive);
        assert!(matches.iter().filter(|m| m.label > 0.0).all(|m| m.eigenvalue > 0.0));

        let b = build_zmeasure_b(&op, &k).unwrap();
        assert!(b.max_eigenvalue().unwrap() <= 1e-10);
    }
    assert!(build_zmeasure_operator(c(1.5, 0.0), c(2.5, 0.0), 0.3, &window).is_err());
    assert!(build_zmeasure_operator(c(1.0, 1.0), c(1.0, -1.0), 1.0, &window).is_err());
}

#[test]
fn bessel_limit_of_the_zmeasure_operator() {
    let window = Window::half_integers(-6, 5).unwrap();
    let (s, theta) = (10_000.0, 1.0);
    let z = build_zmeasure_operator(c(s, 0.0), c(s, 0.0), theta / (s * s), &window).unwrap();
    let bessel = build_bessel_operator(theta, &window).unwrap();
    let diff = max_abs(&(z.dense() - bessel.dense()));
    assert!(diff < 1e-3, "{diff}");
}

#[test]
fn csv_exports() {
    let op = build_hypergeometric_d(&WeightFamily::charlier(1.0).unwrap(), &Window::half_line(3).unwrap()).unwrap();
    let mut out = Vec::new();
    write_operator_csv(&op, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 1 + 4 + 2 * 3);
    assert!(text.starts_with("row,col,value\n0,0,-1.0"));
    let matches = match_spectrum(op.eigenvalues().unwrap(), &[(0.0, 0.0)]);
    let mut out = Vec::new();
    write_spectrum_csv(&matches, &mut out).unwrap();
    assert!(String::from_utf8(out).unwrap().starts_with("index,eigenvalue,matched_m_n,residual\n0,"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hypergeometric_operators_are_negative_semidefinite(
        which in 0usize..3,
        a in 0.3f64..4.0,
        b in 0.05f64..0.8,
        hi in 5i64..80,
    ) {
        let (family, window) = match which {
            0 => (WeightFamily::charlier(a).unwrap(), Window::half_line(hi).unwrap()),
            1 => (WeightFamily::meixner(a, b).unwrap(), Window::half_line(hi).unwrap()),
            _ => (
                WeightFamily::askey_lesky(c(a + 3.0, b), c(a + 3.0, -b), c(a.floor() + 2.3, 0.0), c(a.floor() + 2.6, 0.0)).unwrap(),
                Window::integers(-hi, hi).unwrap(),
            ),
        };
        let op = build_hypergeometric_d(&family, &window).unwrap();
        let scale = op.matrix().norm().max(1.0);
        prop_assert!(op.eigenvalues().unwrap()[0] <= 1e-12 * scale);
        let (birth, death) = (op.birth().unwrap(), op.death().unwrap());
        for i in 0..window.len() - 1 {
            prop_assert!((op.matrix().offdiag()[i] - (death[i + 1] * birth[i]).sqrt()).abs() <= 1e-12 * scale);
            prop_assert_eq!(op.matrix().diag()[i], -(death[i] + birth[i]));
        }
    }
}
