use std::io::Write;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coordinates of a one-particle vector.
pub type Mode = DVector<Complex64>;

/// Largest mode count for a single Fock space (dimension `2^14`).
pub const MAX_MODES: usize = 14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Sparse complex matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct CarOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl CarOperator {
    pub fn zero(dim: usize) -> Self {
        Self { dim, row_ptr: vec![0; dim + 1], cols: Vec::new(), vals: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal((0..dim).map(|_| ONE).collect())
    }

    pub fn diagonal(entries: Vec<Complex64>) -> Self {
        let dim = entries.len();
        Self::from_triplets(dim, entries.into_iter().enumerate().map(|(i, v)| (i, i, v)).collect())
    }

    /// Sums duplicate entries and drops exact zeros.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().expect("previous entry") += v;
            } else {
                row_ptr[r + 1] += 1;
                cols.push(c);
                vals.push(v);
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { dim, row_ptr, cols, vals }.pruned()
    }

    fn pruned(self) -> Self {
        if self.vals.iter().all(|v| *v != ZERO) {
            return self;
        }
        let mut row_ptr = vec![0; self.dim + 1];
        let mut cols = Vec::with_capacity(self.cols.len());
        let mut vals = Vec::with_capacity(self.vals.len());
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.vals[k] != ZERO {
                    cols.push(self.cols[k]);
                    vals.push(self.vals[k]);
                }
            }
            row_ptr[r + 1] = cols.len();
        }
        Self { dim: self.dim, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.row(r).find(|&(col, _)| col == c).map_or(ZERO, |(_, v)| v)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim).map(|r| self.row(r).map(|(c, a)| a * v[c]).sum()).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                triplets.push((c, r, v.conj()));
            }
        }
        Self::from_triplets(self.dim, triplets)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= factor);
        out.pruned()
    }

    /// `self ⊗ other` with index `i·dim(other) + j`.
    pub fn kron(&self, other: &Self) -> Self {
        let dim = self.dim * other.dim;
        let mut triplets = Vec::with_capacity(self.nnz() * other.nnz());
        for r1 in 0..self.dim {
            for (c1, v1) in self.row(r1) {
                for r2 in 0..other.dim {
                    for (c2, v2) in other.row(r2) {
                        triplets.push((r1 * other.dim + r2, c1 * other.dim + c2, v1 * v2));
                    }
                }
            }
        }
        Self::from_triplets(dim, triplets)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |self − other|` entrywise.
    pub fn distance(&self, other: &Self) -> f64 {
        (self - other).max_abs()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(self.dim, self.dim, ZERO);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    pub fn from_dense(m: &DMatrix<Complex64>) -> Self {
        let mut triplets = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)] != ZERO {
                    triplets.push((r, c, m[(r, c)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), triplets)
    }

    /// `(row, col, re, im)` for each stored entry.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "row,col,re,im")?;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                writeln!(out, "{r},{c},{:.16e},{:.16e}", v.re, v.im)?;
            }
        }
        Ok(())
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        assert_eq!(self.dim, other.dim, "operator dimensions differ");
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.dim {
            triplets.extend(self.row(r).map(|(c, v)| (r, c, v)));
            triplets.extend(other.row(r).map(|(c, v)| (r, c, v * sign)));
        }
        Self::from_triplets(self.dim, triplets)
    }
}

impl Add for &CarOperator {
    type Output = CarOperator;
    fn add(self, other: &CarOperator) -> CarOperator {
        self.combine(other, 1.0)
    }
}

impl Sub for &CarOperator {
    type Output = CarOperator;
    fn sub(self, other: &CarOperator) -> CarOperator {
        self.combine(other, -1.0)
    }
}

impl Mul for &CarOperator {
    type Output = CarOperator;
    fn mul(self, other: &CarOperator) -> CarOperator {
        assert_eq!(self.dim, other.dim, "operator dimensions differ");
        let mut acc = vec![ZERO; self.dim];
        let mut touched = Vec::new();
        let mut marked = vec![false; self.dim];
        let mut row_ptr = vec![0; self.dim + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if !marked[c] {
                        marked[c] = true;
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                if acc[c] != ZERO {
                    cols.push(c);
                    vals.push(acc[c]);
                }
                acc[c] = ZERO;
                marked[c] = false;
            }
            touched.clear();
            row_ptr[r + 1] = cols.len();
        }
        CarOperator { dim: self.dim, row_ptr, cols, vals }
    }
}

/// `⟨h, k⟩`, linear in `h` and antilinear in `k`.
pub fn inner(h: &Mode, k: &Mode) -> Complex64 {
    k.dotc(h)
}

/// Antisymmetric Fock space over `ℂ^n`, basis ordered by (particle count, bitmask).
#[derive(Debug, Clone)]
pub struct FockSpace {
    modes: usize,
    basis: Vec<u32>,
    position: Vec<usize>,
}

impl FockSpace {
    pub fn new(modes: usize) -> Result<Self> {
        if modes > MAX_MODES {
            return Err(Error::Ceiling { modes, limit: MAX_MODES });
        }
        let mut basis: Vec<u32> = (0..1u32 << modes).collect();
        basis.sort_by_key(|s| (s.count_ones(), *s));
        let mut position = vec![0; basis.len()];
        for (i, &s) in basis.iter().enumerate() {
            position[s as usize] = i;
        }
        Ok(Self { modes, basis, position })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Occupied-mode bitmask of basis vector `i`.
    pub fn subset(&self, i: usize) -> u32 {
        self.basis[i]
    }

    /// Basis position of an occupied-mode bitmask.
    pub fn position(&self, subset: u32) -> usize {
        self.position[subset as usize]
    }

    pub fn vacuum(&self) -> Vec<Complex64> {
        let mut v = vec![ZERO; self.dim()];
        v[0] = ONE;
        v
    }

    fn check(&self, h: &Mode) -> Result<()> {
        if h.len() != self.modes {
            return Err(Error::Validation(format!(
                "mode vector has {} coordinates, the space has {} modes",
                h.len(),
                self.modes
            )));
        }
        Ok(())
    }

    /// `a(h) = Σ_x conj(h_x) a(e_x)`, with `a(e_x)` carrying the sign
    /// `(−1)^{#occupied modes below x}`.
    pub fn annihilation(&self, h: &Mode) -> Result<CarOperator> {
        self.check(h)?;
        let mut triplets = Vec::new();
        for (col, &s) in self.basis.iter().enumerate() {
            for x in 0..self.modes {
                if s & (1 << x) == 0 || h[x] == ZERO {
                    continue;
                }
                let sign = if (s & ((1 << x) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                triplets.push((self.position(s & !(1 << x)), col, h[x].conj() * sign));
            }
        }
        Ok(CarOperator::from_triplets(self.dim(), triplets))
    }

    /// `a*(h)`, linear in `h`.
    pub fn creation(&self, h: &Mode) -> Result<CarOperator> {
        Ok(self.annihilation(h)?.adjoint())
    }

    /// `Γ_λ`: multiplies each `n`-particle vector by `λ^n`.
    pub fn gauge(&self, lambda: Complex64) -> CarOperator {
        CarOperator::diagonal(self.basis.iter().map(|s| lambda.powu(s.count_ones())).collect())
    }

    pub fn parity(&self) -> CarOperator {
        self.gauge(Complex64::new(-1.0, 0.0))
    }

    /// `q_x = a*_{x_1}a_{x_1} ⋯ a*_{x_k}a_{x_k}`.
    pub fn projector_word(&self, modes: &[usize]) -> Result<CarOperator> {
        let mask = occupation_mask(modes, self.modes)?;
        Ok(CarOperator::diagonal(
            self.basis.iter().map(|s| if s & mask == mask { ONE } else { ZERO }).collect(),
        ))
    }
}

/// Bitmask of distinct in-range modes.
pub fn occupation_mask(modes: &[usize], count: usize) -> Result<u32> {
    let mut mask = 0u32;
    for &x in modes {
        if x >= count {
            return Err(Error::Validation(format!("mode {x} out of range")));
        }
        if mask & (1 << x) != 0 {
            return Err(Error::Validation(format!("mode {x} repeated")));
        }
        mask |= 1 << x;
    }
    Ok(mask)
}

/// Standard basis vector `e_x` in `ℂ^n`.
pub fn basis_mode(n: usize, x: usize) -> Mode {
    let mut v = Mode::from_element(n, ZERO);
    v[x] = ONE;
    v
}
