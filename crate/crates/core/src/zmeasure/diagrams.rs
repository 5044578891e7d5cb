use std::collections::HashMap;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

use crate::lattice::Partition;
use crate::numerics::LogValue;

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// Number of standard tableaux of shape `λ`, by the hook length formula.
pub fn dim(lambda: &Partition) -> BigUint {
    let conjugate = lambda.conjugate();
    let hooks = lambda.boxes().fold(BigUint::one(), |acc, (i, j)| {
        let arm = lambda.part(i) as usize - j - 1;
        let leg = conjugate.part(j) as usize - i - 1;
        acc * (arm + leg + 1)
    });
    factorial(lambda.size()) / hooks
}

/// Number of standard tableaux of the skew shape `λ/μ`, zero unless `μ ⊆ λ`.
pub fn skew_dim(lambda: &Partition, mu: &Partition) -> BigUint {
    if !lambda.contains(mu) {
        return BigUint::zero();
    }
    let mut memo = HashMap::new();
    remove_corners(lambda, mu, &mut memo)
}

fn remove_corners(lambda: &Partition, mu: &Partition, memo: &mut HashMap<Partition, BigUint>) -> BigUint {
    if lambda == mu {
        return BigUint::one();
    }
    if let Some(count) = memo.get(lambda) {
        return count.clone();
    }
    let mut total = BigUint::zero();
    for i in lambda.removable_rows() {
        if lambda.part(i) > mu.part(i) {
            total += remove_corners(&lambda.without_box(i), mu, memo);
        }
    }
    memo.insert(lambda.clone(), total.clone());
    total
}

/// `dim ν/μ` for a fixed inner shape `μ` and every `ν ⊇ μ` with `|ν| ≤ cutoff`.
#[derive(Debug, Clone)]
pub struct SkewDimensions {
    inner: Partition,
    cutoff: usize,
    counts: HashMap<Partition, BigUint>,
}

impl SkewDimensions {
    /// Grows the table one box at a time from the inner shape.
    pub fn new(inner: &Partition, cutoff: usize) -> Self {
        let mut layer = HashMap::from([(inner.clone(), BigUint::one())]);
        let mut counts = layer.clone();
        for _ in inner.size()..cutoff {
            let mut next: HashMap<Partition, BigUint> = HashMap::new();
            for (shape, count) in &layer {
                for i in shape.addable_rows() {
                    *next.entry(shape.with_box(i)).or_default() += count;
                }
            }
            counts.extend(next.iter().map(|(k, v)| (k.clone(), v.clone())));
            layer = next;
        }
        Self { inner: inner.clone(), cutoff, counts }
    }

    pub fn inner(&self) -> &Partition {
        &self.inner
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// `dim ν/μ`, zero when `ν` does not contain the inner shape.
    pub fn get(&self, nu: &Partition) -> BigUint {
        assert!(nu.size() <= self.cutoff, "{nu} lies beyond the cutoff {}", self.cutoff);
        self.counts.get(nu).cloned().unwrap_or_default()
    }

    pub fn get_f64(&self, nu: &Partition) -> f64 {
        to_f64(&self.get(nu))
    }
}

pub(crate) fn to_f64(n: &BigUint) -> f64 {
    n.to_f64().unwrap_or(f64::INFINITY)
}

/// Every `μ ⊆ λ`.
pub fn subdiagrams(lambda: &Partition) -> Vec<Partition> {
    fn rec(lambda: &Partition, row: usize, cap: u32, prefix: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if row == lambda.length() {
            out.push(Partition::new(prefix.clone()).expect("weakly decreasing by construction"));
            return;
        }
        for p in 0..=cap.min(lambda.part(row)) {
            prefix.push(p);
            rec(lambda, row + 1, p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(lambda, 0, u32::MAX, &mut Vec::new(), &mut out);
    out
}

/// `(z)_{λ/μ} = Π (z + j − i)` over the boxes `(i, j)` of `λ/μ`.
pub fn pochhammer_skew(z: f64, lambda: &Partition, mu: &Partition) -> LogValue {
    lambda
        .skew_boxes(mu)
        .fold(LogValue::one(), |acc, (i, j)| acc.mul(LogValue::from_f64(z + j as f64 - i as f64)))
}

/// `(z)_λ`.
pub fn pochhammer_lambda(z: f64, lambda: &Partition) -> LogValue {
    pochhammer_skew(z, lambda, &Partition::empty())
}

/// `(z)_{λ/μ}(z')_{λ/μ}` box by box; each factor `(z + c)(z' + c)` is real
/// for the pairs accepted by `ZParams`.
pub fn pair_pochhammer(z: Complex64, z_prime: Complex64, lambda: &Partition, mu: &Partition) -> LogValue {
    lambda.skew_boxes(mu).fold(LogValue::one(), |acc, (i, j)| {
        let c = j as f64 - i as f64;
        acc.mul(LogValue::from_f64(((z + c) * (z_prime + c)).re))
    })
}
