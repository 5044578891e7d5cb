use std::collections::BTreeMap;

use super::diagrams::{dim, pair_pochhammer, skew_dim, subdiagrams, to_f64, SkewDimensions};
use super::measure::{certified_tail, ZMeasureTable, ZParams};
use crate::error::{Error, Result};
use crate::lattice::Partition;
use crate::numerics::ln_factorial;

/// Function on Young diagrams known on every `λ` with `|λ| ≤ cutoff`.
///
/// `growth` holds non-negative coefficients of a polynomial `P` with
/// `|f(λ)| ≤ P(|λ|)` everywhere, which bounds truncation tails.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagramFunction {
    pub values: BTreeMap<Partition, f64>,
    pub cutoff: usize,
    pub growth: Vec<f64>,
}

impl DiagramFunction {
    pub fn get(&self, lambda: &Partition) -> Option<f64> {
        self.values.get(lambda).copied()
    }
}

fn falling(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

/// `FS_μ(λ) = |λ|^{↓|μ|} dim λ/μ / dim λ`, zero unless `μ ⊆ λ`.
pub fn fs_value(mu: &Partition, lambda: &Partition) -> f64 {
    if !lambda.contains(mu) {
        return 0.0;
    }
    falling(lambda.size(), mu.size()) * to_f64(&skew_dim(lambda, mu)) / to_f64(&dim(lambda))
}

/// `FS_μ` on every diagram up to the cutoff.
pub fn fs_function(mu: &Partition, cutoff: usize) -> Result<DiagramFunction> {
    let dims = SkewDimensions::new(&Partition::empty(), cutoff);
    fs_with(mu, cutoff, &dims)
}

fn fs_with(mu: &Partition, cutoff: usize, dims: &SkewDimensions) -> Result<DiagramFunction> {
    if cutoff < mu.size() {
        return Err(Error::Validation(format!("cutoff {cutoff} is below |{mu}| = {}", mu.size())));
    }
    let skew = SkewDimensions::new(mu, cutoff);
    let values = Partition::all_up_to(cutoff)
        .into_iter()
        .map(|lambda| {
            let v = falling(lambda.size(), mu.size().min(lambda.size())) * skew.get_f64(&lambda)
                / dims.get_f64(&lambda);
            (lambda, v)
        })
        .collect();
    // |FS_μ(λ)| ≤ |λ|^{|μ|} since dim λ/μ ≤ dim λ.
    let mut growth = vec![0.0; mu.size() + 1];
    growth[mu.size()] = 1.0;
    Ok(DiagramFunction { values, cutoff, growth })
}

/// Coefficients of `𝔐_λ` in the `FS_μ`, `μ ⊆ λ`:
/// `(−ξ/(1−ξ))^{|λ|−|μ|} dim λ/μ / (|λ|−|μ|)! · (z)_{λ/μ}(z')_{λ/μ}`.
pub fn m_coefficients(params: &ZParams, lambda: &Partition) -> Vec<(Partition, f64)> {
    let ratio = -params.xi() / (1.0 - params.xi());
    subdiagrams(lambda)
        .into_iter()
        .map(|mu| {
            let k = lambda.size() - mu.size();
            let boxes = pair_pochhammer(params.z(), params.z_prime(), lambda, &mu).value();
            let coefficient =
                ratio.powi(k as i32) * to_f64(&skew_dim(lambda, &mu)) * (-ln_factorial(k as u64)).exp() * boxes;
            (mu, coefficient)
        })
        .collect()
}

/// `𝔐_λ(ν)` for a single diagram.
pub fn m_value(params: &ZParams, lambda: &Partition, nu: &Partition) -> f64 {
    m_coefficients(params, lambda).iter().map(|(mu, c)| c * fs_value(mu, nu)).sum()
}

/// `𝔐_λ` on every diagram up to the cutoff.
pub fn m_function(params: &ZParams, lambda: &Partition, cutoff: usize) -> Result<DiagramFunction> {
    if cutoff < lambda.size() {
        return Err(Error::Validation(format!("cutoff {cutoff} is below |{lambda}| = {}", lambda.size())));
    }
    let dims = SkewDimensions::new(&Partition::empty(), cutoff);
    let mut values: BTreeMap<Partition, f64> = BTreeMap::new();
    let mut growth = vec![0.0; lambda.size() + 1];
    for (mu, coefficient) in m_coefficients(params, lambda) {
        let fs = fs_with(&mu, cutoff, &dims)?;
        for (nu, v) in fs.values {
            *values.entry(nu).or_insert(0.0) += coefficient * v;
        }
        growth[mu.size()] += coefficient.abs();
    }
    Ok(DiagramFunction { values, cutoff, growth })
}

/// An inner product in `L²(𝕐, M)` summed up to a cutoff, with a bound on the
/// omitted part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramInner {
    pub value: f64,
    pub tail: f64,
}

fn poly_product(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `⟨f, g⟩ = Σ M(λ) f(λ) g(λ)` over the table's diagrams.
pub fn diagram_inner(table: &ZMeasureTable, f: &DiagramFunction, g: &DiagramFunction) -> Result<DiagramInner> {
    let cutoff = table.cutoff();
    if f.cutoff < cutoff || g.cutoff < cutoff {
        return Err(Error::Validation(format!(
            "functions known up to {} and {} but the table reaches {cutoff}",
            f.cutoff, g.cutoff
        )));
    }
    let value = table
        .shapes()
        .iter()
        .zip(table.masses())
        .map(|(lambda, m)| m * f.values[lambda] * g.values[lambda])
        .sum();
    let tail = certified_tail(table.params(), cutoff, &poly_product(&f.growth, &g.growth));
    Ok(DiagramInner { value, tail })
}
