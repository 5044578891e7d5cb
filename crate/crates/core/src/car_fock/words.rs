use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;

use super::fock::{inner, CarOperator, Mode};
use super::state::QuasiFreeState;
use crate::error::{Error, Result};
use crate::numerics::{determinant, hermitian_eigenvalues, hermitian_function};

/// Tolerance on `‖T‖` above 1 before a map is rejected as a non-contraction.
pub const CONTRACTION_TOLERANCE: f64 = 1e-12;

/// Anything that represents `a(h)` as a matrix, with a distinguished vacuum.
pub trait Representation {
    fn dim(&self) -> usize;
    fn modes(&self) -> usize;
    fn annihilator(&self, h: &Mode) -> Result<CarOperator>;
    fn vacuum(&self) -> Vec<Complex64>;

    fn creator(&self, h: &Mode) -> Result<CarOperator> {
        Ok(self.annihilator(h)?.adjoint())
    }
}

/// Normal-ordered monomial `a*(c_0)⋯a*(c_{m−1}) a(d_0)⋯a(d_{n−1})`, stored
/// in product order.
#[derive(Debug, Clone, PartialEq)]
pub struct Word {
    pub creators: Vec<Mode>,
    pub annihilators: Vec<Mode>,
}

impl Word {
    pub fn new(creators: Vec<Mode>, annihilators: Vec<Mode>) -> Self {
        Self { creators, annihilators }
    }

    pub fn identity() -> Self {
        Self::new(Vec::new(), Vec::new())
    }

    pub fn degree(&self) -> (usize, usize) {
        (self.creators.len(), self.annihilators.len())
    }

    pub fn is_gauge_invariant(&self) -> bool {
        self.creators.len() == self.annihilators.len()
    }

    /// All factors live in `ℂ^modes`.
    pub fn validate(&self, modes: usize) -> Result<()> {
        for h in self.creators.iter().chain(&self.annihilators) {
            if h.len() != modes {
                return Err(Error::Validation(format!(
                    "word factor has {} coordinates, expected {modes}",
                    h.len()
                )));
            }
        }
        Ok(())
    }

    /// Applies every factor to a one-particle map.
    pub fn mapped(&self, t: &DMatrix<Complex64>) -> Self {
        Self::new(
            self.creators.iter().map(|h| t * h).collect(),
            self.annihilators.iter().map(|k| t * k).collect(),
        )
    }

    pub fn operator(&self, rep: &impl Representation) -> Result<CarOperator> {
        self.validate(rep.modes())?;
        let mut out = CarOperator::identity(rep.dim());
        for h in &self.creators {
            out = &out * &rep.creator(h)?;
        }
        for k in &self.annihilators {
            out = &out * &rep.annihilator(k)?;
        }
        Ok(out)
    }

    /// `word · v`, applying factors right to left.
    pub fn apply(&self, rep: &impl Representation, v: &[Complex64]) -> Result<Vec<Complex64>> {
        self.validate(rep.modes())?;
        let mut out = v.to_vec();
        for k in self.annihilators.iter().rev() {
            out = rep.annihilator(k)?.apply(&out);
        }
        for h in self.creators.iter().rev() {
            out = rep.creator(h)?.apply(&out);
        }
        Ok(out)
    }

    /// `⟨word Ω, Ω⟩` in the given representation.
    pub fn vacuum_expectation(&self, rep: &impl Representation) -> Result<Complex64> {
        let omega = rep.vacuum();
        let image = self.apply(rep, &omega)?;
        Ok(image.iter().zip(&omega).map(|(a, b)| a * b.conj()).sum())
    }
}

/// Finite linear combination of normal-ordered words.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WordSum {
    pub terms: Vec<(Complex64, Word)>,
}

impl WordSum {
    pub fn single(word: Word) -> Self {
        Self { terms: vec![(Complex64::new(1.0, 0.0), word)] }
    }

    pub fn push(&mut self, coefficient: Complex64, word: Word) {
        if coefficient != Complex64::new(0.0, 0.0) {
            self.terms.push((coefficient, word));
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn operator(&self, rep: &impl Representation) -> Result<CarOperator> {
        let mut out = CarOperator::zero(rep.dim());
        for (c, word) in &self.terms {
            out = &out + &word.operator(rep)?.scale(*c);
        }
        Ok(out)
    }

    pub fn vacuum_expectation(&self, rep: &impl Representation) -> Result<Complex64> {
        self.terms
            .iter()
            .map(|(c, w)| Ok(c * w.vacuum_expectation(rep)?))
            .sum()
    }

    /// `φ_K` of the sum through the determinant formula.
    pub fn moment(&self, state: &QuasiFreeState) -> Result<Complex64> {
        self.terms.iter().map(|(c, w)| Ok(c * word_moment(state, w)?)).sum()
    }
}

/// `φ_K(a*(h_n)⋯a*(h_1) a(k_1)⋯a(k_m)) = δ_{nm} det[⟨K h_i, k_j⟩]`.
pub fn quasi_free_moment(state: &QuasiFreeState, creators: &[Mode], annihilators: &[Mode]) -> Result<Complex64> {
    for v in creators.iter().chain(annihilators) {
        if v.len() != state.modes() {
            return Err(Error::Validation(format!(
                "vector has {} coordinates, expected {}",
                v.len(),
                state.modes()
            )));
        }
    }
    if creators.len() != annihilators.len() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let kh: Vec<Mode> = creators.iter().map(|h| state.k() * h).collect();
    let gram = DMatrix::from_fn(creators.len(), creators.len(), |i, j| inner(&kh[i], &annihilators[j]));
    Ok(determinant(&gram))
}

/// `φ_K` of a normal-ordered word given in product order.
pub fn word_moment(state: &QuasiFreeState, word: &Word) -> Result<Complex64> {
    let creators: Vec<Mode> = word.creators.iter().rev().cloned().collect();
    quasi_free_moment(state, &creators, &word.annihilators)
}

/// Sign of the permutation listing `chosen` first and then the rest, both ascending.
fn split_sign(chosen: &[usize]) -> f64 {
    let inversions: usize = chosen.iter().enumerate().map(|(a, &i)| i - a).sum();
    if inversions % 2 == 0 { 1.0 } else { -1.0 }
}

fn complement(chosen: &[usize], len: usize) -> Vec<usize> {
    (0..len).filter(|i| !chosen.contains(i)).collect()
}

/// `:a*(h_1)⋯a*(h_m) a(k_n)⋯a(k_1):_K` for the word
/// `a*(h_1)⋯a*(h_m) a(k_n)⋯a(k_1)` in product order.
///
/// Each `(I, J)` with `|I| = |J| = p` contributes
/// `(−1)^{(m−p)(n−p)} sgn(I) sgn(J) det[⟨K h_{i_a}, k_{j_b}⟩]` times the
/// remaining factors in their original order.
pub fn wick_product(state: &QuasiFreeState, word: &Word) -> Result<WordSum> {
    word.validate(state.modes())?;
    let (m, n) = word.degree();
    let h = &word.creators;
    let k: Vec<&Mode> = word.annihilators.iter().rev().collect();
    let kh: Vec<Mode> = h.iter().map(|v| state.k() * v).collect();
    let mut out = WordSum::default();
    for p in 0..=m.min(n) {
        let outer = if (m - p) * (n - p) % 2 == 0 { 1.0 } else { -1.0 };
        for chosen_h in (0..m).combinations(p) {
            for chosen_k in (0..n).combinations(p) {
                let gram = DMatrix::from_fn(p, p, |a, b| inner(&kh[chosen_h[a]], k[chosen_k[b]]));
                let sign = outer * split_sign(&chosen_h) * split_sign(&chosen_k);
                let creators = complement(&chosen_h, m).into_iter().map(|i| h[i].clone()).collect();
                let annihilators = complement(&chosen_k, n).into_iter().rev().map(|j| k[j].clone()).collect();
                out.push(determinant(&gram) * sign, Word::new(creators, annihilators));
            }
        }
    }
    Ok(out)
}

/// Rejects `‖T‖ > 1 + CONTRACTION_TOLERANCE` and returns `S_T = (1 − T*T)^{1/2}`.
pub fn contraction_defect(t: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let gram = t.adjoint() * t;
    let top = hermitian_eigenvalues(&gram)?.first().copied().unwrap_or(0.0);
    let norm = top.max(0.0).sqrt();
    if norm > 1.0 + CONTRACTION_TOLERANCE {
        return Err(Error::Contraction { norm });
    }
    hermitian_function(&gram, |x| (1.0 - x).max(0.0).sqrt())
}

/// Evans's completely positive map `a_K(T)` on the word
/// `a*(h_m)⋯a*(h_1) a(k_1)⋯a(k_n)` in product order.
///
/// Each `(I, J)` with `|I| = |J| = p` contributes
/// `sgn(I) sgn(J) det[⟨K S h_{i_a}, S k_{j_b}⟩]` times the remaining factors
/// mapped by `T`, with `S = (1 − T*T)^{1/2}`.
pub fn cp_map(state: &QuasiFreeState, t: &DMatrix<Complex64>, word: &Word) -> Result<WordSum> {
    check_square(t, state.modes())?;
    let defect = contraction_defect(t)?;
    cp_map_with(state, t, &defect, word)
}

/// `a_K(T)` extended linearly to a sum of words.
pub fn cp_map_sum(state: &QuasiFreeState, t: &DMatrix<Complex64>, sum: &WordSum) -> Result<WordSum> {
    check_square(t, state.modes())?;
    let defect = contraction_defect(t)?;
    let mut out = WordSum::default();
    for (c, word) in &sum.terms {
        for (d, image) in cp_map_with(state, t, &defect, word)?.terms {
            out.push(c * d, image);
        }
    }
    Ok(out)
}

fn check_square(t: &DMatrix<Complex64>, modes: usize) -> Result<()> {
    if t.nrows() != modes || t.ncols() != modes {
        return Err(Error::Validation(format!(
            "one-particle map is {}x{}, expected {modes}x{modes}",
            t.nrows(),
            t.ncols()
        )));
    }
    Ok(())
}

fn cp_map_with(
    state: &QuasiFreeState,
    t: &DMatrix<Complex64>,
    defect: &DMatrix<Complex64>,
    word: &Word,
) -> Result<WordSum> {
    word.validate(state.modes())?;
    let (m, n) = word.degree();
    let h: Vec<&Mode> = word.creators.iter().rev().collect();
    let k = &word.annihilators;
    let ksh: Vec<Mode> = h.iter().map(|v| state.k() * (defect * *v)).collect();
    let sk: Vec<Mode> = k.iter().map(|v| defect * v).collect();
    let mut out = WordSum::default();
    for p in 0..=m.min(n) {
        for chosen_h in (0..m).combinations(p) {
            for chosen_k in (0..n).combinations(p) {
                let gram = DMatrix::from_fn(p, p, |a, b| inner(&ksh[chosen_h[a]], &sk[chosen_k[b]]));
                let sign = split_sign(&chosen_h) * split_sign(&chosen_k);
                let creators = complement(&chosen_h, m).into_iter().rev().map(|i| t * h[i]).collect();
                let annihilators = complement(&chosen_k, n).into_iter().map(|j| t * &k[j]).collect();
                out.push(determinant(&gram) * sign, Word::new(creators, annihilators));
            }
        }
    }
    Ok(out)
}
