//! Self-adjoint difference operators, their spectral projections and the
//! signed generators built from them.

use std::io::Write;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::ensembles::{build_weight, validate_zmeasure_pair, PairKind, ProjectionKernel, WeightFamily};
use crate::error::{Error, Result};
use crate::lattice::Window;
use crate::numerics::{exp_action, max_abs, sym_eigen, sym_tridiag_eigen, EigenDecomposition, SymTridiag};

/// Eigenvalues closer than this to a projection threshold are ambiguous.
pub const GAP_TOLERANCE: f64 = 1e-8;
/// Matches further than this from their target are flagged unreliable.
pub const MATCH_TOLERANCE: f64 = 1e-4;
/// Relative tolerance on `‖DK − KD‖_max`.
pub const COMMUTATOR_TOLERANCE: f64 = 1e-10;

/// Which operator a [`DifferenceOperator`] discretizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorKind {
    Hypergeometric(WeightFamily),
    ZMeasure { z: Complex64, z_prime: Complex64, xi: f64 },
    Bessel { theta: f64 },
}

/// Symmetric tridiagonal operator on a window, Dirichlet at both ends.
#[derive(Debug, Clone)]
pub struct DifferenceOperator {
    kind: OperatorKind,
    window: Window,
    matrix: SymTridiag,
    /// `λ_x` and `μ_x` at each window point (hypergeometric operators only).
    rates: Option<(Vec<f64>, Vec<f64>)>,
    /// `log w(x)` relating `D` to the generator in `L²(w)`.
    log_weights: Option<Vec<f64>>,
    decomposition: OnceLock<EigenDecomposition>,
}

impl DifferenceOperator {
    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn matrix(&self) -> &SymTridiag {
        &self.matrix
    }

    pub fn dense(&self) -> DMatrix<f64> {
        self.matrix.to_dense()
    }

    pub fn birth(&self) -> Option<&[f64]> {
        self.rates.as_ref().map(|(b, _)| b.as_slice())
    }

    pub fn death(&self) -> Option<&[f64]> {
        self.rates.as_ref().map(|(_, d)| d.as_slice())
    }

    pub fn log_weights(&self) -> Option<&[f64]> {
        self.log_weights.as_deref()
    }

    /// Eigendecomposition, computed once and shared.
    pub fn decomposition(&self) -> Result<&EigenDecomposition> {
        if let Some(d) = self.decomposition.get() {
            return Ok(d);
        }
        let d = sym_tridiag_eigen(&self.matrix)?;
        Ok(self.decomposition.get_or_init(|| d))
    }

    pub fn eigenvalues(&self) -> Result<&[f64]> {
        Ok(&self.decomposition()?.eigenvalues)
    }

    /// `e^{tD}` in the `ℓ²` gauge.
    pub fn exp(&self, time: f64) -> Result<DMatrix<f64>> {
        exp_action(&self.matrix, time, self.decomposition()?)
    }

    /// The birth–death generator `𝒟 = W^{−1/2} D W^{1/2}` acting on functions.
    pub fn generator_matrix(&self) -> Result<DMatrix<f64>> {
        let logw = self.require_gauge()?;
        let d = self.dense();
        Ok(DMatrix::from_fn(d.nrows(), d.ncols(), |x, y| {
            if d[(x, y)] == 0.0 {
                0.0
            } else {
                d[(x, y)] * (0.5 * (logw[y] - logw[x])).exp()
            }
        }))
    }

    /// `e^{t𝒟}(x, y) = √(w(y)/w(x)) e^{tD}(x, y)`.
    pub fn generator_exp(&self, time: f64) -> Result<DMatrix<f64>> {
        let logw = self.require_gauge()?.to_vec();
        let e = self.exp(time)?;
        Ok(DMatrix::from_fn(e.nrows(), e.ncols(), |x, y| {
            e[(x, y)] * (0.5 * (logw[y] - logw[x])).exp()
        }))
    }

    fn require_gauge(&self) -> Result<&[f64]> {
        self.log_weights
            .as_deref()
            .ok_or_else(|| Error::Validation("operator carries no weight gauge".into()))
    }
}

/// `[Df](x) = √(μ_{x+1}λ_x) f(x+1) − (μ_x+λ_x) f(x) + √(μ_x λ_{x−1}) f(x−1)`.
pub fn build_hypergeometric_d(family: &WeightFamily, window: &Window) -> Result<DifferenceOperator> {
    family.check_sigma(window)?;
    let log_weights = build_weight(family, window)?;
    let points = window.points();
    let birth: Vec<f64> = points.iter().map(|&x| family.birth_rate(x)).collect();
    let death: Vec<f64> = points.iter().map(|&x| family.death_rate(x)).collect();
    for (i, &x) in points.iter().enumerate().skip(1) {
        if i + 1 < points.len() && !(birth[i] > 0.0) {
            return Err(Error::Admissibility { point: x });
        }
    }
    let diag = birth.iter().zip(&death).map(|(b, d)| -(b + d)).collect();
    let offdiag = (0..points.len().saturating_sub(1))
        .map(|i| (death[i + 1] * birth[i]).max(0.0).sqrt())
        .collect();
    Ok(DifferenceOperator {
        kind: OperatorKind::Hypergeometric(*family),
        window: *window,
        matrix: SymTridiag::new(diag, offdiag)?,
        rates: Some((birth, death)),
        log_weights: Some(log_weights),
        decomposition: OnceLock::new(),
    })
}

fn require_half_integers(window: &Window) -> Result<()> {
    if window.offset() != 0.5 {
        return Err(Error::Validation("operator lives on a window of ℤ+1/2".into()));
    }
    Ok(())
}

/// `(diagonal at x, coupling between x and x+1)` of the z-measure operator.
pub fn zmeasure_entries(z: Complex64, z_prime: Complex64, xi: f64, x: f64) -> (f64, f64) {
    let diag = -(x + xi * ((z + z_prime).re + x));
    let coupling = (xi * ((z + x + 0.5) * (z_prime + x + 0.5)).re).sqrt();
    (diag, coupling)
}

/// `√(ξ(z+x+½)(z'+x+½)) f(x+1) − (x + ξ(z+z'+x)) f(x) + …` on ℤ+1/2.
pub fn build_zmeasure_operator(z: Complex64, z_prime: Complex64, xi: f64, window: &Window) -> Result<DifferenceOperator> {
    if validate_zmeasure_pair(z, z_prime) == PairKind::Invalid {
        return Err(Error::Parameter(format!("(z, z') = ({z}, {z_prime}) is not admissible")));
    }
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::Parameter(format!("xi must lie in (0, 1), got {xi}")));
    }
    require_half_integers(window)?;
    let points = window.points();
    let diag = points.iter().map(|&x| zmeasure_entries(z, z_prime, xi, x).0).collect();
    let offdiag = points[..points.len() - 1]
        .iter()
        .map(|&x| zmeasure_entries(z, z_prime, xi, x).1)
        .collect();
    Ok(DifferenceOperator {
        kind: OperatorKind::ZMeasure { z, z_prime, xi },
        window: *window,
        matrix: SymTridiag::new(diag, offdiag)?,
        rates: None,
        log_weights: None,
        decomposition: OnceLock::new(),
    })
}

/// `√θ f(x+1) − x f(x) + √θ f(x−1)` on ℤ+1/2.
pub fn build_bessel_operator(theta: f64, window: &Window) -> Result<DifferenceOperator> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Parameter(format!("theta must be positive, got {theta}")));
    }
    require_half_integers(window)?;
    let points = window.points();
    let diag = points.iter().map(|&x| -x).collect();
    let offdiag = vec![theta.sqrt(); points.len() - 1];
    Ok(DifferenceOperator {
        kind: OperatorKind::Bessel { theta },
        window: *window,
        matrix: SymTridiag::new(diag, offdiag)?,
        rates: None,
        log_weights: None,
        decomposition: OnceLock::new(),
    })
}

/// Projection onto the eigenvectors with eigenvalue above `threshold`.
pub fn spectral_projection(op: &DifferenceOperator, threshold: f64) -> Result<ProjectionKernel> {
    let eig = op.decomposition()?;
    if let Some(&eigenvalue) = eig.eigenvalues.iter().find(|l| (*l - threshold).abs() <= GAP_TOLERANCE) {
        return Err(Error::AmbiguousProjection { eigenvalue, threshold });
    }
    let rank = eig.eigenvalues.iter().filter(|&&l| l > threshold).count();
    ProjectionKernel::from_matrix(eig.projector(|_, l| l > threshold), rank, op.window)
}

/// Dense symmetric generator commuting with a projection kernel.
#[derive(Debug, Clone)]
pub struct SignedGenerator {
    matrix: DMatrix<f64>,
    shift: f64,
    rank: usize,
}

impl SignedGenerator {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(sym_eigen(&self.matrix)?.eigenvalues)
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    /// `‖BK − KB‖_max`.
    pub fn commutator(&self, kernel: &ProjectionKernel) -> f64 {
        let k = kernel.matrix();
        max_abs(&(&self.matrix * k - k * &self.matrix))
    }
}

/// `B_μ = (1−K)(D−μ) − K(D−μ)` for `μ` strictly between the largest eigenvalue
/// of `D` off the range of `K` and the smallest on it.
pub fn build_b(op: &DifferenceOperator, kernel: &ProjectionKernel, mu: f64) -> Result<SignedGenerator> {
    signed_generator(op, kernel, mu, 1.0)
}

/// `(1−ξ)^{−1}(D(1−K) − DK)` for the z-measure operator.
pub fn build_zmeasure_b(op: &DifferenceOperator, kernel: &ProjectionKernel) -> Result<SignedGenerator> {
    match op.kind {
        OperatorKind::ZMeasure { xi, .. } => signed_generator(op, kernel, 0.0, 1.0 / (1.0 - xi)),
        _ => Err(Error::Validation("expected the z-measure operator".into())),
    }
}

fn signed_generator(op: &DifferenceOperator, kernel: &ProjectionKernel, shift: f64, scale: f64) -> Result<SignedGenerator> {
    let d = op.dense();
    let k = kernel.matrix();
    if k.nrows() != d.nrows() {
        return Err(Error::Validation("kernel and operator live on different windows".into()));
    }
    let commutator = max_abs(&(&d * k - k * &d));
    if commutator > COMMUTATOR_TOLERANCE * max_abs(&d).max(1.0) {
        return Err(Error::Compatibility { commutator });
    }
    let (lower, upper) = spectral_gap(op, kernel)?;
    if !(shift > lower && shift < upper) {
        return Err(Error::Shift { shift, lower, upper });
    }
    let n = d.nrows();
    let shifted = d - DMatrix::identity(n, n) * shift;
    let reflection = DMatrix::identity(n, n) - k * 2.0;
    let mut matrix = (&reflection * &shifted + &shifted * &reflection) * (0.5 * scale);
    let sym = (&matrix + matrix.transpose()) * 0.5;
    matrix = sym;
    Ok(SignedGenerator { matrix, shift, rank: kernel.rank() })
}

/// `(max spec D off ran K, min spec D on ran K)`.
fn spectral_gap(op: &DifferenceOperator, kernel: &ProjectionKernel) -> Result<(f64, f64)> {
    let eig = op.decomposition()?;
    let k = kernel.matrix();
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for j in 0..eig.dim() {
        let v = eig.eigenvectors.column(j);
        let inside = (v.transpose() * k * v)[(0, 0)];
        let l = eig.eigenvalues[j];
        if inside > 0.5 {
            upper = upper.min(l);
        } else {
            lower = lower.max(l);
        }
    }
    Ok((lower, upper))
}

/// One eigenvalue paired with the quantum number it approximates.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectrumMatch {
    /// Position of the eigenvalue in the descending spectrum.
    pub index: usize,
    pub eigenvalue: f64,
    /// `n` for `m_n`, or `a` for `(1−ξ)a`.
    pub label: f64,
    pub target: f64,
    pub residual: f64,
    pub reliable: bool,
}

/// Greedily pairs each target, in order, with the nearest unused eigenvalue.
pub fn match_spectrum(eigenvalues: &[f64], targets: &[(f64, f64)]) -> Vec<SpectrumMatch> {
    let mut used = vec![false; eigenvalues.len()];
    let mut out = Vec::with_capacity(targets.len());
    for &(label, target) in targets {
        let best = eigenvalues
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()));
        if let Some((index, &eigenvalue)) = best {
            used[index] = true;
            let residual = (eigenvalue - target).abs();
            out.push(SpectrumMatch { index, eigenvalue, label, target, residual, reliable: residual <= MATCH_TOLERANCE });
        }
    }
    out
}

/// `(n, m_n)` for `n < count`, stopping where the family has no degree-`n` polynomial.
pub fn hypergeometric_targets(family: &WeightFamily, count: usize) -> Vec<(f64, f64)> {
    let limit = family.max_particles().map_or(count, |max| count.min(max + 1));
    (0..limit).map(|n| (n as f64, family.eigenvalue_m(n))).collect()
}

/// `(a, (1−ξ)a)` for half-integers `|a| ≤ bound`, descending.
pub fn zmeasure_targets(xi: f64, bound: f64) -> Vec<(f64, f64)> {
    let top = (bound - 0.5).floor() as i64;
    (-top - 1..=top)
        .rev()
        .map(|k| {
            let a = k as f64 + 0.5;
            (a, (1.0 - xi) * a)
        })
        .collect()
}

/// `(row, col, value)` for each nonzero entry.
pub fn write_operator_csv<W: Write>(op: &DifferenceOperator, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "row,col,value")?;
    let t = op.matrix();
    let window = op.window();
    for (i, &d) in t.diag().iter().enumerate() {
        let x = window.point(window.index_at(i));
        if i > 0 {
            let y = window.point(window.index_at(i - 1));
            writeln!(out, "{x},{y},{:.16e}", t.offdiag()[i - 1])?;
        }
        writeln!(out, "{x},{x},{d:.16e}")?;
        if i + 1 < t.dim() {
            let y = window.point(window.index_at(i + 1));
            writeln!(out, "{x},{y},{:.16e}", t.offdiag()[i])?;
        }
    }
    Ok(())
}

/// `(index, eigenvalue, matched_m_n, residual)` rows.
pub fn write_spectrum_csv<W: Write>(matches: &[SpectrumMatch], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "index,eigenvalue,matched_m_n,residual")?;
    for m in matches {
        writeln!(out, "{},{:.16e},{:.16e},{:.16e}", m.index, m.eigenvalue, m.target, m.residual)?;
    }
    Ok(())
}
