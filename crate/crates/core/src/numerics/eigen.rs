use std::cmp::Ordering;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Entries below this magnitude are ignored when fixing eigenvector signs.
const SIGN_FLOOR: f64 = 1e-8;
const MAX_QL_ITERATIONS: usize = 60;

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl SymTridiag {
    /// `offdiag[i]` couples rows `i` and `i + 1`.
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::Validation("tridiagonal matrix needs n >= 1".into()));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::Validation(format!(
                "offdiagonal length {} does not match diagonal length {}",
                offdiag.len(),
                diag.len()
            )));
        }
        if diag.iter().chain(&offdiag).any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite tridiagonal entry".into()));
        }
        Ok(Self { diag, offdiag })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for (i, &e) in self.offdiag.iter().enumerate() {
            m[(i, i + 1)] = e;
            m[(i + 1, i)] = e;
        }
        m
    }

    /// Infinity norm (maximum absolute row sum).
    pub fn norm(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 };
                let right = if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
                self.diag[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.offdiag[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.offdiag[i] * v[i + 1];
                }
                s
            })
            .collect()
    }
}

/// Eigenvalues in descending order with matching orthonormal eigenvector columns.
///
/// Each eigenvector is signed so that its last entry of magnitude above 1e-8
/// is positive. Exactly equal eigenvalues are ordered by the lexicographic
/// order of their eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.eigenvectors.column(j).iter().copied().collect()
    }

    /// `V f(Λ) Vᵀ`.
    pub fn spectral_function(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        self.spectral_function_indexed(|_, l| f(l))
    }

    /// `Σ_j v_j v_jᵀ` over the selected columns.
    pub fn projector(&self, keep: impl Fn(usize, f64) -> bool) -> DMatrix<f64> {
        self.spectral_function_indexed(|j, l| if keep(j, l) { 1.0 } else { 0.0 })
    }

    fn spectral_function_indexed(&self, f: impl Fn(usize, f64) -> f64) -> DMatrix<f64> {
        let n = self.dim();
        let weights: Vec<f64> = (0..n).map(|j| f(j, self.eigenvalues[j])).collect();
        let scaled = DMatrix::from_fn(n, n, |i, j| self.eigenvectors[(i, j)] * weights[j]);
        let mut out = &scaled * self.eigenvectors.transpose();
        symmetrize(&mut out);
        out
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Full spectrum of a symmetric tridiagonal matrix by implicit QL with
/// Wilkinson shifts.
pub fn sym_tridiag_eigen(t: &SymTridiag) -> Result<EigenDecomposition> {
    let n = t.dim();
    let mut d = t.diag.clone();
    let mut e = t.offdiag.clone();
    e.push(0.0);
    let mut z = DMatrix::identity(n, n);
    tql(&mut d, &mut e, &mut z)?;
    Ok(finish(d, z))
}

/// Full spectrum of a dense real symmetric matrix (Householder reduction
/// followed by implicit QL).
pub fn sym_eigen(a: &DMatrix<f64>) -> Result<EigenDecomposition> {
    if !a.is_square() || a.nrows() == 0 {
        return Err(Error::Validation("symmetric eigenproblem needs a non-empty square matrix".into()));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("non-finite matrix entry".into()));
    }
    let n = a.nrows();
    let mut v = a.clone();
    symmetrize(&mut v);
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    householder_tridiagonalize(&mut v, &mut d, &mut e);
    // Householder leaves e[i] coupling i-1 and i; QL wants i and i+1.
    let mut off: Vec<f64> = e[1..].to_vec();
    off.push(0.0);
    tql(&mut d, &mut off, &mut v)?;
    Ok(finish(d, v))
}

/// Eigenvalues of a Hermitian matrix, descending.
///
/// Uses the real embedding `[[Re, -Im], [Im, Re]]`, whose spectrum is that of
/// the Hermitian matrix with every eigenvalue doubled.
pub fn hermitian_eigenvalues(h: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let eig = sym_eigen(&real_embedding(h))?;
    Ok(eig.eigenvalues.iter().step_by(2).copied().collect())
}

/// `f(H)` for Hermitian `H`.
pub fn hermitian_function(h: &DMatrix<Complex64>, f: impl Fn(f64) -> f64) -> Result<DMatrix<Complex64>> {
    let n = h.nrows();
    let eig = sym_eigen(&real_embedding(h))?;
    let big = eig.spectral_function(f);
    Ok(DMatrix::from_fn(n, n, |i, j| Complex64::new(big[(i, j)], big[(i + n, j)])))
}

fn real_embedding(h: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = h.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let c = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => c.re,
            (true, false) => -c.im,
            (false, true) => c.im,
        }
    })
}

/// `e^{time·T}` assembled from a decomposition of `T`.
pub fn exp_action(t: &SymTridiag, time: f64, via: &EigenDecomposition) -> Result<DMatrix<f64>> {
    if via.dim() != t.dim() {
        return Err(Error::Validation(format!(
            "decomposition has dimension {} but the operator has {}",
            via.dim(),
            t.dim()
        )));
    }
    Ok(via.spectral_function(|l| (time * l).exp()))
}

fn finish(d: Vec<f64>, mut z: DMatrix<f64>) -> EigenDecomposition {
    let n = d.len();
    for j in 0..n {
        let last = (0..n).rev().find(|&i| z[(i, j)].abs() > SIGN_FLOOR);
        if let Some(i) = last {
            if z[(i, j)] < 0.0 {
                z.column_mut(j).neg_mut();
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| match d[b].partial_cmp(&d[a]).unwrap_or(Ordering::Equal) {
        Ordering::Equal => {
            for i in 0..n {
                match z[(i, a)].partial_cmp(&z[(i, b)]).unwrap_or(Ordering::Equal) {
                    Ordering::Equal => continue,
                    other => return other,
                }
            }
            Ordering::Equal
        }
        other => other,
    });
    let eigenvalues = order.iter().map(|&j| d[j]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |i, j| z[(i, order[j])]);
    EigenDecomposition { eigenvalues, eigenvectors }
}

/// Implicit QL on diagonal `d` and couplings `e` (`e[i]` joins `i`, `i+1`;
/// `e[n-1]` is scratch). Rotations are accumulated into the columns of `z`.
fn tql(d: &mut [f64], e: &mut [f64], z: &mut DMatrix<f64>) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..z.nrows() {
                    let zf = z[(k, i + 1)];
                    let zi = z[(k, i)];
                    z[(k, i + 1)] = s * zi + c * zf;
                    z[(k, i)] = c * zi - s * zf;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Householder reduction of the symmetric matrix in `v` to tridiagonal form.
/// On return `v` holds the orthogonal transform, `d` the diagonal and `e[i]`
/// the coupling between `i - 1` and `i`.
fn householder_tridiagonalize(v: &mut DMatrix<f64>, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in j + 1..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n.saturating_sub(1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &DMatrix<f64>, eig: &EigenDecomposition) -> f64 {
        let mut worst = 0.0_f64;
        for j in 0..eig.dim() {
            let v = eig.eigenvectors.column(j);
            let r = a * v - v * eig.eigenvalues[j];
            worst = worst.max(r.amax());
        }
        worst
    }

    #[test]
    fn scalar_matrix_gives_standard_basis() {
        let t = SymTridiag::new(vec![2.5; 4], vec![0.0; 3]).unwrap();
        let eig = sym_tridiag_eigen(&t).unwrap();
        assert!(eig.eigenvalues.iter().all(|&l| l == 2.5));
        let id = DMatrix::<f64>::identity(4, 4);
        let mut cols: Vec<Vec<f64>> = (0..4).map(|j| eig.vector(j)).collect();
        cols.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for c in &cols {
            assert!((0..4).any(|k| id.column(k).iter().zip(c).all(|(a, b)| a == b)));
        }
    }

    #[test]
    fn two_by_two() {
        let t = SymTridiag::new(vec![0.0, 0.0], vec![1.0]).unwrap();
        let eig = sym_tridiag_eigen(&t).unwrap();
        assert!((eig.eigenvalues[0] - 1.0).abs() < 1e-15);
        assert!((eig.eigenvalues[1] + 1.0).abs() < 1e-15);
        // Last significant entry is positive.
        assert!(eig.eigenvectors[(1, 0)] > 0.0 && eig.eigenvectors[(1, 1)] > 0.0);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(SymTridiag::new(vec![f64::NAN, 1.0], vec![0.0]).is_err());
        assert!(SymTridiag::new(vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn dense_matches_tridiagonal_path() {
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[4.0, 1.0, -2.0, 2.0, 1.0, 2.0, 0.0, 1.0, -2.0, 0.0, 3.0, -2.0, 2.0, 1.0, -2.0, -1.0],
        );
        let eig = sym_eigen(&a).unwrap();
        assert!(residual(&a, &eig) < 1e-13);
        let gram = eig.eigenvectors.transpose() * &eig.eigenvectors;
        assert!((gram - DMatrix::identity(4, 4)).amax() < 1e-14);
        let trace: f64 = eig.eigenvalues.iter().sum();
        assert!((trace - 8.0).abs() < 1e-13);
    }

    #[test]
    fn hermitian_square_root() {
        let i = Complex64::i();
        let one = Complex64::from(1.0);
        let h = DMatrix::from_row_slice(2, 2, &[2.0 * one, i, -i, 2.0 * one]);
        let vals = hermitian_eigenvalues(&h).unwrap();
        assert!((vals[0] - 3.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        let root = hermitian_function(&h, f64::sqrt).unwrap();
        assert!((&root * &root - h).camax() < 1e-14);
    }
}
