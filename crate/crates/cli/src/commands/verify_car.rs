use dpp_gicar::car_fock::{
    cp_map, cp_map_sum, cyclic_subspace, hamiltonian, inner, predicted_spectrum, restricted_spectrum, wick_product,
    word_moment, CarOperator, DoubledGns, FockSpace, Mode, QuasiFreeState, Representation, Word,
};
use dpp_gicar::ensembles::stream_rng;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::{fail_unless, Check};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::Output;

const TOLERANCE: f64 = 1e-11;
const SPECTRUM_TOLERANCE: f64 = 1e-9;

#[derive(Serialize)]
struct Identity {
    cases: usize,
    #[serde(flatten)]
    check: Check,
}

#[derive(Serialize)]
struct CarReport {
    modes: usize,
    doubled: bool,
    representation_dim: usize,
    identities: Vec<Identity>,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn random_mode(rng: &mut impl Rng, n: usize) -> Mode {
    Mode::from_fn(n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn random_word(rng: &mut impl Rng, n: usize, creators: usize, annihilators: usize) -> Word {
    Word::new(
        (0..creators).map(|_| random_mode(rng, n)).collect(),
        (0..annihilators).map(|_| random_mode(rng, n)).collect(),
    )
}

/// Gram-Schmidt on random complex columns.
fn random_unitary(rng: &mut impl Rng, n: usize) -> DMatrix<Complex64> {
    let mut cols: Vec<Mode> = Vec::new();
    while cols.len() < n {
        let mut v = random_mode(rng, n);
        for _ in 0..2 {
            for q in &cols {
                let overlap = q.dotc(&v);
                v -= q * overlap;
            }
        }
        let norm = v.norm();
        if norm > 1e-3 {
            cols.push(v / c(norm));
        }
    }
    DMatrix::from_columns(&cols)
}

/// `U diag(d) U*`.
fn conjugated(u: &DMatrix<Complex64>, d: &[Complex64]) -> DMatrix<Complex64> {
    u * DMatrix::from_diagonal(&DVector::from_column_slice(d)) * u.adjoint()
}

fn hermitian_part(m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    (&m + m.adjoint()) * c(0.5)
}

fn commuting_contraction(rng: &mut impl Rng, u: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let tau: Vec<Complex64> = (0..u.nrows())
        .map(|_| Complex64::from_polar(rng.random_range(0.0..1.0), rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    conjugated(u, &tau)
}

fn anticommutator(a: &CarOperator, b: &CarOperator) -> CarOperator {
    &(a * b) + &(b * a)
}

fn car_residual(rep: &impl Representation, rng: &mut impl Rng, pairs: usize) -> Result<f64, CliError> {
    let n = rep.modes();
    let id = CarOperator::identity(rep.dim());
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let (h, k) = (random_mode(rng, n), random_mode(rng, n));
        let (ah, ak) = (rep.annihilator(&h)?, rep.annihilator(&k)?);
        let mixed = anticommutator(&rep.creator(&h)?, &ak).distance(&id.scale(inner(&h, &k)));
        worst = worst.max(mixed).max(anticommutator(&ah, &ak).max_abs());
    }
    Ok(worst)
}

fn determinant_residual(
    rep: &impl Representation,
    state: &QuasiFreeState,
    rng: &mut impl Rng,
    words: usize,
) -> Result<f64, CliError> {
    let n = rep.modes();
    let mut worst: f64 = 0.0;
    for _ in 0..words {
        let (m, k) = (rng.random_range(0..=3), rng.random_range(0..=3));
        let word = random_word(rng, n, m, k);
        worst = worst.max((word_moment(state, &word)? - word.vacuum_expectation(rep)?).norm());
    }
    Ok(worst)
}

pub fn run(config: &ExperimentConfig, out: &Output) -> Result<String, CliError> {
    let n = config.modes;
    if n == 0 {
        return Err(CliError::Config("modes must be positive".into()));
    }
    let fock = FockSpace::new(n)?;
    let mut rng = stream_rng(config.seed, 0);
    let u = random_unitary(&mut rng, n);
    let kappa: Vec<Complex64> = (0..n).map(|_| c(rng.random_range(0.0..1.0))).collect();
    let state = QuasiFreeState::new(hermitian_part(conjugated(&u, &kappa)))?;

    let mut identities = Vec::new();
    let mut push = |name: &str, cases: usize, value: f64, tolerance: f64| {
        identities.push(Identity { cases, check: Check::at_most(name, value, tolerance) });
    };

    let representation_dim;
    if config.doubled {
        let gns = DoubledGns::new(state.clone())?;
        representation_dim = gns.dim();
        push("car", config.words, car_residual(&gns, &mut stream_rng(config.seed, 1), config.words)?, TOLERANCE);
        let residual = determinant_residual(&gns, &state, &mut stream_rng(config.seed, 2), config.words)?;
        push("quasi_free_determinant", config.words, residual, TOLERANCE);
    } else {
        let vacuum_state = QuasiFreeState::new(DMatrix::zeros(n, n))?;
        representation_dim = fock.dim();
        push("car", config.words, car_residual(&fock, &mut stream_rng(config.seed, 1), config.words)?, TOLERANCE);
        let residual = determinant_residual(&fock, &vacuum_state, &mut stream_rng(config.seed, 2), config.words)?;
        push("quasi_free_determinant", config.words, residual, TOLERANCE);
    }

    let mut rng = stream_rng(config.seed, 3);
    let wick_cases = config.words.min(20);
    let mut worst: f64 = 0.0;
    for _ in 0..wick_cases {
        let t = commuting_contraction(&mut rng, &u);
        let (m, k) = (rng.random_range(1..=2), rng.random_range(1..=2));
        let word = random_word(&mut rng, n, m, k);
        let lhs = cp_map_sum(&state, &t, &wick_product(&state, &word)?)?;
        let rhs = wick_product(&state, &word.mapped(&t))?;
        worst = worst.max(lhs.operator(&fock)?.distance(&rhs.operator(&fock)?));
    }
    push("wick_intertwining", wick_cases, worst, TOLERANCE);

    let mut rng = stream_rng(config.seed, 4);
    let mut worst: f64 = 0.0;
    for _ in 0..config.words {
        let t = commuting_contraction(&mut rng, &u);
        let d = rng.random_range(0..=3);
        let word = random_word(&mut rng, n, d, d);
        let image = cp_map(&state, &t, &word)?;
        worst = worst.max((image.moment(&state)? - word_moment(&state, &word)?).norm());
    }
    push("cp_map_invariance", config.words, worst, TOLERANCE);

    if config.doubled && n >= 2 {
        let occupied: Vec<usize> = (0..n / 2).collect();
        let d: Vec<Complex64> = (0..n).map(|a| c(if occupied.contains(&a) { 1.0 } else { 0.0 })).collect();
        let gns = DoubledGns::new(QuasiFreeState::new(hermitian_part(conjugated(&u, &d)))?)?;
        let m: Vec<f64> = (0..n).map(|a| -(a as f64)).collect();
        let a = hamiltonian(&gns, &u, &occupied, &m)?;
        let span = cyclic_subspace(&gns)?;
        let spectrum = restricted_spectrum(&a, &span)?;
        let predicted = predicted_spectrum(&m, &occupied, true);
        let residual = if spectrum.len() == predicted.len() {
            spectrum.iter().zip(&predicted).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        push("hamiltonian_spectrum", span.len(), residual, SPECTRUM_TOLERANCE);
    }

    let report = CarReport { modes: n, doubled: config.doubled, representation_dim, identities };
    out.json("summary", &report)?;
    let checks: Vec<Check> = report.identities.iter().map(|i| i.check.clone()).collect();
    fail_unless(&checks)?;
    Ok(serde_json::to_string_pretty(&report).expect("report serializes"))
}
