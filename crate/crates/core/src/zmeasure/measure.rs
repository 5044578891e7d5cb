use std::collections::HashMap;
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;

use super::diagrams::{dim, pair_pochhammer, to_f64, SkewDimensions};
use crate::ensembles::{validate_zmeasure_pair, PairKind, ProjectionKernel};
use crate::error::{Error, Result};
use crate::lattice::{Partition, Window};
use crate::numerics::{ln_factorial, log_pochhammer, LogValue};
use crate::operators::{build_zmeasure_operator, spectral_projection};

/// Parameters `(z, z', ξ)` of a z-measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZParams {
    z: Complex64,
    z_prime: Complex64,
    xi: f64,
    kind: PairKind,
}

impl ZParams {
    /// Accepts principal, complementary and degenerate pairs with `ξ ∈ (0, 1)`.
    pub fn new(z: Complex64, z_prime: Complex64, xi: f64) -> Result<Self> {
        let kind = validate_zmeasure_pair(z, z_prime);
        if kind == PairKind::Invalid {
            return Err(Error::Parameter(format!("(z, z') = ({z}, {z_prime}) is not admissible")));
        }
        if !(xi > 0.0 && xi < 1.0) {
            return Err(Error::Parameter(format!("xi must lie in (0, 1), got {xi}")));
        }
        Ok(Self { z, z_prime, xi, kind })
    }

    pub fn real(z: f64, z_prime: f64, xi: f64) -> Result<Self> {
        Self::new(Complex64::new(z, 0.0), Complex64::new(z_prime, 0.0), xi)
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn z_prime(&self) -> Complex64 {
        self.z_prime
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn kind(&self) -> PairKind {
        self.kind
    }

    /// `zz'`.
    pub fn product(&self) -> f64 {
        (self.z * self.z_prime).re
    }

    /// `(z + c)(z' + c)` for a box of content `c`.
    pub fn box_factor(&self, content: i64) -> f64 {
        let c = content as f64;
        ((self.z + c) * (self.z_prime + c)).re
    }
}

fn log_mass_with_dim(params: &ZParams, lambda: &Partition, dim: f64) -> Option<f64> {
    let n = lambda.size();
    match pair_pochhammer(params.z, params.z_prime, lambda, &Partition::empty()) {
        LogValue::Zero => None,
        LogValue::Finite { log_abs, .. } => Some(
            params.product() * (-params.xi).ln_1p() + n as f64 * params.xi.ln() + log_abs
                + 2.0 * (dim.ln() - ln_factorial(n as u64)),
        ),
    }
}

/// `log M_{z,z',ξ}(λ)`, or `None` where the degenerate series vanishes.
pub fn log_z_mass(params: &ZParams, lambda: &Partition) -> Option<f64> {
    log_mass_with_dim(params, lambda, to_f64(&dim(lambda)))
}

/// `M(λ) = (1−ξ)^{zz'} ξ^{|λ|} (z)_λ (z')_λ (dim λ / |λ|!)²`.
pub fn z_mass(params: &ZParams, lambda: &Partition) -> f64 {
    log_z_mass(params, lambda).map_or(0.0, f64::exp)
}

/// Probability that `|λ| = n`: `(1−ξ)^{zz'} ξ^n (zz')_n / n!`.
pub fn size_marginal(params: &ZParams, n: usize) -> f64 {
    let head = params.product() * (-params.xi).ln_1p() + n as f64 * params.xi.ln() - ln_factorial(n as u64);
    log_pochhammer(params.product(), n as u64).mul(LogValue::Finite { log_abs: head, sign: 1.0 }).value()
}

/// Upper bound on `Σ_{|λ| > cutoff} M(λ) P(|λ|)` for `P(n) = Σ_k growth[k] n^k`
/// with non-negative coefficients.
///
/// Terms are summed until the ratio bound `ξ max(1, (zz'+n)/(n+1)) ((n+1)/n)^d`,
/// which is non-increasing in `n`, drops below 1; the rest is a geometric series.
pub fn certified_tail(params: &ZParams, cutoff: usize, growth: &[f64]) -> f64 {
    let degree = growth.len().saturating_sub(1) as i32;
    let poly = |n: f64| growth.iter().rev().fold(0.0, |acc, c| acc * n + c);
    let mut sum = 0.0;
    let mut n = cutoff + 1;
    loop {
        let term = size_marginal(params, n) * poly(n as f64);
        let m = n as f64;
        let ratio = params.xi * ((params.product() + m) / (m + 1.0)).max(1.0) * ((m + 1.0) / m).powi(degree);
        if ratio < 1.0 {
            return sum + term / (1.0 - ratio);
        }
        sum += term;
        n += 1;
    }
}

/// `Σ_{|λ| > cutoff} M(λ)`, bounded.
pub fn mass_tail(params: &ZParams, cutoff: usize) -> f64 {
    certified_tail(params, cutoff, &[1.0])
}

/// `M_{z,z',ξ}` on every diagram with `|λ| ≤ cutoff`.
#[derive(Debug, Clone)]
pub struct ZMeasureTable {
    params: ZParams,
    cutoff: usize,
    shapes: Vec<Partition>,
    masses: Vec<f64>,
    cumulative: Vec<f64>,
    position: HashMap<Partition, usize>,
}

impl ZMeasureTable {
    pub fn new(params: &ZParams, cutoff: usize) -> Self {
        let dims = SkewDimensions::new(&Partition::empty(), cutoff);
        let shapes = Partition::all_up_to(cutoff);
        let masses: Vec<f64> = shapes
            .iter()
            .map(|lambda| log_mass_with_dim(params, lambda, dims.get_f64(lambda)).map_or(0.0, f64::exp))
            .collect();
        let cumulative = masses
            .iter()
            .scan(0.0, |acc, m| {
                *acc += m;
                Some(*acc)
            })
            .collect();
        let position = shapes.iter().enumerate().map(|(k, s)| (s.clone(), k)).collect();
        Self { params: *params, cutoff, shapes, masses, cumulative, position }
    }

    pub fn params(&self) -> &ZParams {
        &self.params
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn shapes(&self) -> &[Partition] {
        &self.shapes
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass(&self, lambda: &Partition) -> Option<f64> {
        self.position.get(lambda).map(|&k| self.masses[k])
    }

    /// `Σ_{|λ| ≤ cutoff} M(λ)`.
    pub fn partial_mass(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn tail(&self) -> f64 {
        mass_tail(&self.params, self.cutoff)
    }

    /// A diagram drawn from the table renormalized to total mass 1.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Partition {
        let u = rng.random::<f64>() * self.partial_mass();
        let k = self.cumulative.partition_point(|&c| c <= u).min(self.shapes.len() - 1);
        self.shapes[k].clone()
    }

    /// `partition,mass`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "partition,mass")?;
        for (shape, mass) in self.shapes.iter().zip(&self.masses) {
            writeln!(out, "\"{shape}\",{mass:.16e}")?;
        }
        Ok(())
    }
}

/// Whether the point `index + 1/2` belongs to `ω^λ = {λ_i − i + 1/2}`.
pub fn occupies(lambda: &Partition, index: i64) -> bool {
    let rows = lambda.length() as i64;
    index < -rows || (1..=rows).any(|i| lambda.part(i as usize - 1) as i64 - i == index)
}

/// Spectral projection of the truncated `D_{z,z',ξ}` onto its positive part.
pub fn zmeasure_kernel(params: &ZParams, window: &Window) -> Result<ProjectionKernel> {
    spectral_projection(&build_zmeasure_operator(params.z, params.z_prime, params.xi, window)?, 0.0)
}

/// `Σ_{|λ| ≤ cutoff, x ∈ ω^λ} M(λ)` at every point of a window of `ℤ + 1/2`.
pub fn partition_density(table: &ZMeasureTable, window: &Window) -> Result<Vec<f64>> {
    if window.offset() != 0.5 {
        return Err(Error::Validation("partitions embed into ℤ + 1/2".into()));
    }
    Ok(window
        .indices()
        .map(|x| table.shapes.iter().zip(&table.masses).filter(|(s, _)| occupies(s, x)).map(|(_, m)| m).sum())
        .collect())
}
