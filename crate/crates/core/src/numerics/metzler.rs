use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// `e^{tA}` for a matrix with non-negative off-diagonal entries.
///
/// Writes `tA = B − λI` with `B ≥ 0`, sums the Taylor series of `e^{B/2^s}`
/// and squares `s` times, so no step subtracts and every entry keeps its
/// relative accuracy however small it is.
pub fn metzler_exp(a: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::Validation("exponential of a non-square matrix".into()));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    let n = a.nrows();
    for i in 0..n {
        for j in 0..n {
            if i != j && a[(i, j)] < 0.0 {
                return Err(Error::Validation(format!("off-diagonal entry ({i}, {j}) is negative")));
            }
        }
    }
    let shift = (0..n).map(|i| -a[(i, i)] * t).fold(0.0, f64::max);
    let mut b = a * t;
    for i in 0..n {
        b[(i, i)] += shift;
    }
    let scale = b.iter().copied().fold(0.0, f64::max) * n as f64;
    let squarings = if scale > 0.5 { (scale / 0.5).log2().ceil() as i32 } else { 0 };
    let b = b / 2f64.powi(squarings);
    let mut term = DMatrix::identity(n, n);
    let mut sum = DMatrix::identity(n, n);
    for k in 1..64 {
        term = &term * &b / k as f64;
        sum += &term;
        if term.max() <= f64::EPSILON * 1e-3 * sum.max() {
            break;
        }
    }
    sum *= (-shift / 2f64.powi(squarings)).exp();
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    Ok(sum)
}
