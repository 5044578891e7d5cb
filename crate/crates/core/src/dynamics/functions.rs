use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;

use crate::ensembles::{Ensemble, WeightFamily};
use crate::error::{Error, Result};
use crate::lattice::{frobenius_coordinates, ConfigurationSpace, Partition};
use crate::numerics::determinant;

/// Real function on the `N`-point configurations of a window, indexed like
/// the owning `ConfigurationSpace`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleFunction {
    pub values: Vec<f64>,
    pub label: Option<Partition>,
}

impl EnsembleFunction {
    pub fn constant(space: &ConfigurationSpace, value: f64) -> Self {
        Self { values: vec![value; space.len()], label: None }
    }
}

/// `det[x_j^{N−i}] = Π_{i<j}(x_i − x_j)`.
pub fn vandermonde(points: &[f64]) -> f64 {
    let mut v = 1.0;
    for (i, &x) in points.iter().enumerate() {
        for &y in &points[i + 1..] {
            v *= x - y;
        }
    }
    v
}

fn check_space(ensemble: &Ensemble, space: &ConfigurationSpace) -> Result<()> {
    if space.particles() != ensemble.particles() || space.window() != ensemble.window() {
        return Err(Error::Validation("configuration space does not match the ensemble".into()));
    }
    Ok(())
}

/// `F_{h_1,…,h_N}(x) = Z^{1/2} det[h_i(x_j)] / det[x_j^{N−i}]` with each `h_i`
/// evaluated by `eval(i, point)`.
fn wedge(ensemble: &Ensemble, space: &ConfigurationSpace, eval: impl Fn(usize, f64) -> f64) -> Vec<f64> {
    let n = ensemble.particles();
    let scale = (0.5 * ensemble.log_normalization()).exp();
    space
        .configs()
        .iter()
        .map(|omega| {
            let points = omega.points();
            let m = DMatrix::from_fn(n, n, |i, j| eval(i, points[j]));
            scale * determinant(&m) / vandermonde(&points)
        })
        .collect()
}

/// `F_{h_1,…,h_N}` for functions given by their values at the window points.
pub fn wedge_function(ensemble: &Ensemble, space: &ConfigurationSpace, h: &[Vec<f64>]) -> Result<EnsembleFunction> {
    check_space(ensemble, space)?;
    let window = ensemble.window();
    if h.len() != ensemble.particles() || h.iter().any(|f| f.len() != window.len()) {
        return Err(Error::Validation(format!(
            "need {} functions with {} values each",
            ensemble.particles(),
            window.len()
        )));
    }
    let lo = window.point(window.lo());
    let values = wedge(ensemble, space, |i, x| h[i][(x - lo).round() as usize]);
    Ok(EnsembleFunction { values, label: None })
}

/// `F_λ = F_{p_{λ_1+N−1}, p_{λ_2+N−2}, …, p_{λ_N}}`.
pub fn f_function(ensemble: &Ensemble, space: &ConfigurationSpace, lambda: &Partition) -> Result<EnsembleFunction> {
    check_space(ensemble, space)?;
    let n = ensemble.particles();
    if lambda.length() > n {
        return Err(Error::Validation(format!("partition {lambda} has more than {n} rows")));
    }
    let degrees: Vec<usize> = (0..n).map(|i| lambda.part(i) as usize + n - 1 - i).collect();
    let system = ensemble.system();
    if let Some(&top) = degrees.iter().find(|&&d| d >= system.count()) {
        let residual = system.gram_residuals().last().copied().unwrap_or(f64::INFINITY);
        return Err(Error::Precision { index: top, residual });
    }
    let values = wedge(ensemble, space, |i, x| system.normalized_polynomials(x)[degrees[i]]);
    Ok(EnsembleFunction { values, label: Some(lambda.clone()) })
}

/// `⟨f, g⟩` in `L²(M_{w,N})`, summed over every configuration of the space.
pub fn ensemble_inner(
    ensemble: &Ensemble,
    space: &ConfigurationSpace,
    f: &EnsembleFunction,
    g: &EnsembleFunction,
) -> Result<f64> {
    check_space(ensemble, space)?;
    space
        .configs()
        .iter()
        .zip(f.values.iter().zip(&g.values))
        .map(|(omega, (a, b))| Ok(ensemble.mass(omega)? * a * b))
        .sum()
}

fn degrees(lambda: &Partition, n: usize) -> Result<Vec<usize>> {
    if lambda.length() > n {
        return Err(Error::Validation(format!("partition {lambda} has more than {n} rows")));
    }
    Ok((0..n).map(|i| lambda.part(i) as usize + n - 1 - i).collect())
}

/// `m_λ − m_∅` with `m_λ = Σ_i m_{λ_i+N−i}`.
pub fn eigenvalue_shift(family: &WeightFamily, lambda: &Partition, n: usize) -> Result<f64> {
    let shifted: f64 = degrees(lambda, n)?.into_iter().map(|d| family.eigenvalue_m(d)).sum();
    let empty: f64 = (0..n).map(|d| family.eigenvalue_m(d)).sum();
    Ok(shifted - empty)
}

/// `m_λ − m_∅` in exact rational arithmetic.
pub fn eigenvalue_shift_exact(family: &WeightFamily, lambda: &Partition, n: usize) -> Result<BigRational> {
    let mut total = BigRational::zero();
    for d in degrees(lambda, n)? {
        total += family.eigenvalue_m_exact(d);
    }
    for d in 0..n {
        total -= family.eigenvalue_m_exact(d);
    }
    Ok(total)
}

/// `Σ_i (m_{α_i+N} − m_{N−1−β_i})` over the Frobenius coordinates of `λ`, exactly.
pub fn frobenius_shift_exact(family: &WeightFamily, lambda: &Partition, n: usize) -> Result<BigRational> {
    if lambda.length() > n {
        return Err(Error::Validation(format!("partition {lambda} has more than {n} rows")));
    }
    let coords = frobenius_coordinates(lambda, false);
    let mut total = BigRational::zero();
    for (&alpha, &beta) in coords.arms.iter().zip(&coords.legs) {
        total += family.eigenvalue_m_exact(alpha as usize + n);
        total -= family.eigenvalue_m_exact(n - 1 - beta as usize);
    }
    Ok(total)
}

/// `e^{it(m_λ − m_∅)}`.
pub fn unitary_phase(family: &WeightFamily, lambda: &Partition, n: usize, t: f64) -> Result<Complex64> {
    Ok(Complex64::from_polar(1.0, t * eigenvalue_shift(family, lambda, n)?))
}
