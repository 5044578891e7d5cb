#![allow(dead_code)]

use dpp_gicar::car_fock::{Mode, Word};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_mode(rng: &mut impl Rng, n: usize) -> Mode {
    Mode::from_fn(n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_word(rng: &mut impl Rng, n: usize, creators: usize, annihilators: usize) -> Word {
    Word::new(
        (0..creators).map(|_| random_mode(rng, n)).collect(),
        (0..annihilators).map(|_| random_mode(rng, n)).collect(),
    )
}

/// Haar-like unitary from Gram-Schmidt on a random complex matrix.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> DMatrix<Complex64> {
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
            cols.push(v / c(norm, 0.0));
        }
    }
    DMatrix::from_columns(&cols)
}

/// `U diag(d) U*`.
pub fn conjugated(u: &DMatrix<Complex64>, d: &[Complex64]) -> DMatrix<Complex64> {
    u * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)) * u.adjoint()
}

pub fn max_entry(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}
