use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;

use super::fock::{basis_mode, CarOperator, FockSpace, Mode};
use super::words::{Representation, Word};
use crate::error::{Error, Result};
use crate::numerics::{hermitian_eigenvalues, hermitian_function};

/// Largest mode count for the doubled space (dimension `4^7`).
pub const MAX_DOUBLED_MODES: usize = 7;

/// Spectral slack allowed outside `[0, 1]` for a quasi-free state.
pub const STATE_TOLERANCE: f64 = 1e-12;

/// Residual norm below which a vector counts as dependent on the span so far.
pub const CYCLIC_TOLERANCE: f64 = 1e-10;

/// Quasi-free state `φ_K` with `S = (1 − K)^{1/2}` and `T = K^{1/2}`.
#[derive(Debug, Clone)]
pub struct QuasiFreeState {
    k: DMatrix<Complex64>,
    s: DMatrix<Complex64>,
    t: DMatrix<Complex64>,
}

impl QuasiFreeState {
    pub fn new(k: DMatrix<Complex64>) -> Result<Self> {
        if !k.is_square() {
            return Err(Error::Validation("symbol K must be square".into()));
        }
        let asymmetry = (&k - k.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
        if asymmetry > STATE_TOLERANCE {
            return Err(Error::Validation(format!("symbol K is not Hermitian (off by {asymmetry:.3e})")));
        }
        let spectrum = hermitian_eigenvalues(&k)?;
        if let Some(&bad) = spectrum.iter().find(|&&l| !(-STATE_TOLERANCE..=1.0 + STATE_TOLERANCE).contains(&l)) {
            return Err(Error::Validation(format!("symbol K has eigenvalue {bad} outside [0, 1]")));
        }
        let s = hermitian_function(&k, |x| (1.0 - snap(x)).sqrt())?;
        let t = hermitian_function(&k, |x| snap(x).sqrt())?;
        Ok(Self { k, s, t })
    }

    pub fn from_real(k: &DMatrix<f64>) -> Result<Self> {
        Self::new(k.map(|v| Complex64::new(v, 0.0)))
    }

    pub fn modes(&self) -> usize {
        self.k.nrows()
    }

    pub fn k(&self) -> &DMatrix<Complex64> {
        &self.k
    }

    pub fn s(&self) -> &DMatrix<Complex64> {
        &self.s
    }

    pub fn t(&self) -> &DMatrix<Complex64> {
        &self.t
    }
}

/// Pins eigenvalues within `STATE_TOLERANCE` of 0 or 1 so that square roots
/// of rounding noise do not leak into `S` and `T`.
fn snap(x: f64) -> f64 {
    if x <= STATE_TOLERANCE {
        0.0
    } else if x >= 1.0 - STATE_TOLERANCE {
        1.0
    } else {
        x
    }
}

impl Representation for FockSpace {
    fn dim(&self) -> usize {
        FockSpace::dim(self)
    }

    fn modes(&self) -> usize {
        FockSpace::modes(self)
    }

    fn annihilator(&self, h: &Mode) -> Result<CarOperator> {
        self.annihilation(h)
    }

    fn creator(&self, h: &Mode) -> Result<CarOperator> {
        self.creation(h)
    }

    fn vacuum(&self) -> Vec<Complex64> {
        FockSpace::vacuum(self)
    }
}

/// `ρ_K(a(h)) = a(Sh) ⊗ Γ_{−1} + 1 ⊗ a*(conj(Th))` on `ℱ(ℂ^n) ⊗ ℱ(ℂ^n)`.
#[derive(Debug, Clone)]
pub struct DoubledGns {
    state: QuasiFreeState,
    fock: FockSpace,
    parity: CarOperator,
    identity: CarOperator,
}

impl DoubledGns {
    pub fn new(state: QuasiFreeState) -> Result<Self> {
        let modes = state.modes();
        if modes > MAX_DOUBLED_MODES {
            return Err(Error::Ceiling { modes, limit: MAX_DOUBLED_MODES });
        }
        let fock = FockSpace::new(modes)?;
        let parity = fock.parity();
        let identity = CarOperator::identity(fock.dim());
        Ok(Self { state, fock, parity, identity })
    }

    pub fn state(&self) -> &QuasiFreeState {
        &self.state
    }

    pub fn factor(&self) -> &FockSpace {
        &self.fock
    }
}

impl Representation for DoubledGns {
    fn dim(&self) -> usize {
        self.fock.dim() * self.fock.dim()
    }

    fn modes(&self) -> usize {
        self.fock.modes()
    }

    fn annihilator(&self, h: &Mode) -> Result<CarOperator> {
        if h.len() != self.modes() {
            return Err(Error::Validation(format!(
                "mode vector has {} coordinates, expected {}",
                h.len(),
                self.modes()
            )));
        }
        let first = self.fock.annihilation(&(self.state.s() * h))?.kron(&self.parity);
        let conjugate = (self.state.t() * h).map(|v| v.conj());
        let second = self.identity.kron(&self.fock.creation(&conjugate)?);
        Ok(&first + &second)
    }

    fn vacuum(&self) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); self.dim()];
        v[0] = Complex64::new(1.0, 0.0);
        v
    }
}

/// Checks that `basis` is unitary and that `K` is the projection onto the
/// columns listed in `occupied`.
fn check_eigenbasis(state: &QuasiFreeState, basis: &DMatrix<Complex64>, occupied: &[usize]) -> Result<()> {
    let n = state.modes();
    if basis.nrows() != n || basis.ncols() != n {
        return Err(Error::Validation(format!("eigenbasis must be {n}x{n}")));
    }
    let unitarity = (basis.adjoint() * basis - DMatrix::identity(n, n)).iter().map(|v| v.norm()).fold(0.0, f64::max);
    if unitarity > CYCLIC_TOLERANCE {
        return Err(Error::Validation(format!("eigenbasis is not orthonormal (off by {unitarity:.3e})")));
    }
    for alpha in 0..n {
        let v = basis.column(alpha).into_owned();
        let target = if occupied.contains(&alpha) { v.clone() } else { v.map(|_| Complex64::new(0.0, 0.0)) };
        let residual = (state.k() * &v - target).camax();
        if residual > CYCLIC_TOLERANCE {
            return Err(Error::Validation(format!(
                "K is not the projection onto the occupied eigenvectors (mode {alpha} off by {residual:.3e})"
            )));
        }
    }
    Ok(())
}

/// `𝒜 = Σ_{α∉I0} m_α ρ_K(a*(v_α)a(v_α)) − Σ_{α∈I0} m_α ρ_K(a(v_α)a*(v_α))`.
pub fn hamiltonian(gns: &DoubledGns, basis: &DMatrix<Complex64>, occupied: &[usize], m: &[f64]) -> Result<CarOperator> {
    check_eigenbasis(gns.state(), basis, occupied)?;
    if m.len() != gns.modes() {
        return Err(Error::Validation(format!("need {} eigenvalues, got {}", gns.modes(), m.len())));
    }
    let mut out = CarOperator::zero(gns.dim());
    for (alpha, &m_alpha) in m.iter().enumerate() {
        let v = basis.column(alpha).into_owned();
        let (lower, raise) = (gns.annihilator(&v)?, gns.creator(&v)?);
        let term = if occupied.contains(&alpha) {
            (&lower * &raise).scale(Complex64::new(-m_alpha, 0.0))
        } else {
            (&raise * &lower).scale(Complex64::new(m_alpha, 0.0))
        };
        out = &out + &term;
    }
    Ok(out)
}

/// `ρ_K(a*(v_{α_1})⋯a*(v_{α_k}) a(v_{β_1})⋯a(v_{β_l})) Ω`.
pub fn excitation_vector(
    gns: &DoubledGns,
    basis: &DMatrix<Complex64>,
    raised: &[usize],
    lowered: &[usize],
) -> Result<Vec<Complex64>> {
    let column = |a: &usize| basis.column(*a).into_owned();
    let word = Word::new(raised.iter().map(column).collect(), lowered.iter().map(column).collect());
    word.apply(gns, &gns.vacuum())
}

/// Orthonormal basis of the span of `ρ_K(GICAR words) Ω`, using balanced
/// words in the standard modes.
pub fn cyclic_subspace(gns: &DoubledGns) -> Result<Vec<Vec<Complex64>>> {
    let n = gns.modes();
    let omega = gns.vacuum();
    let mut span: Vec<Vec<Complex64>> = Vec::new();
    for p in 0..=n {
        for raised in (0..n).combinations(p) {
            for lowered in (0..n).combinations(p) {
                let word = Word::new(
                    raised.iter().map(|&x| basis_mode(n, x)).collect(),
                    lowered.iter().map(|&y| basis_mode(n, y)).collect(),
                );
                let mut v = word.apply(gns, &omega)?;
                let scale = norm(&v).max(1.0);
                for _ in 0..2 {
                    for q in &span {
                        let overlap: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                        v.iter_mut().zip(q).for_each(|(a, b)| *a -= overlap * b);
                    }
                }
                let residual = norm(&v);
                if residual > CYCLIC_TOLERANCE * scale {
                    v.iter_mut().for_each(|a| *a /= residual);
                    span.push(v);
                }
            }
        }
    }
    Ok(span)
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigenvalues (descending) of `Q* A Q` for an orthonormal family `Q`.
pub fn restricted_spectrum(op: &CarOperator, span: &[Vec<Complex64>]) -> Result<Vec<f64>> {
    let images: Vec<Vec<Complex64>> = span.iter().map(|q| op.apply(q)).collect();
    let r = span.len();
    let compressed = DMatrix::from_fn(r, r, |i, j| span[i].iter().zip(&images[j]).map(|(a, b)| a.conj() * b).sum());
    let hermitian = (&compressed + compressed.adjoint()) * Complex64::new(0.5, 0.0);
    hermitian_eigenvalues(&hermitian)
}

/// `Σ_{α∈A} m_α − Σ_{β∈B} m_β` over `A ⊆ I0^c`, `B ⊆ I0`, descending.
/// With `balanced`, only `|A| = |B|` is kept.
pub fn predicted_spectrum(m: &[f64], occupied: &[usize], balanced: bool) -> Vec<f64> {
    let free: Vec<usize> = (0..m.len()).filter(|a| !occupied.contains(a)).collect();
    let mut out = Vec::new();
    for a in free.iter().powerset() {
        for b in occupied.iter().powerset() {
            if balanced && a.len() != b.len() {
                continue;
            }
            out.push(a.iter().map(|&&x| m[x]).sum::<f64>() - b.iter().map(|&&x| m[x]).sum::<f64>());
        }
    }
    out.sort_by(|x, y| y.total_cmp(x));
    out
}
