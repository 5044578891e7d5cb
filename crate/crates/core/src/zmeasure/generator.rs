use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::diagrams::{dim, to_f64};
use super::measure::{ZMeasureTable, ZParams};
use crate::ensembles::stream_rng;
use crate::error::{Error, Result};
use crate::lattice::Partition;

/// Trials per random stream.
const BLOCK: usize = 4096;

/// Off-diagonal rates out of `λ`, then `(λ, −Σ rates)`.
///
/// The printed kernel has two typos, corrected here: the down rate is
/// `|λ| dim ν / dim λ` (printed `dim ν / dim ν`), and the diagonal is
/// negative (printed unsigned).
pub fn q_row(params: &ZParams, lambda: &Partition) -> Vec<(Partition, f64)> {
    let n = lambda.size() as f64;
    let scale = 1.0 / (1.0 - params.xi());
    let dim_lambda = to_f64(&dim(lambda));
    let mut row = Vec::new();
    for i in lambda.addable_rows() {
        let content = lambda.part(i) as i64 - i as i64;
        let nu = lambda.with_box(i);
        let rate = params.xi() * params.box_factor(content) * to_f64(&dim(&nu)) / ((n + 1.0) * dim_lambda);
        row.push((nu, scale * rate));
    }
    for i in lambda.removable_rows() {
        let nu = lambda.without_box(i);
        let rate = n * to_f64(&dim(&nu)) / dim_lambda;
        row.push((nu, scale * rate));
    }
    let total: f64 = row.iter().map(|(_, r)| r).sum();
    row.push((lambda.clone(), -total));
    row
}

/// `Q_{z,z',ξ}(λ, ν)`.
pub fn q_generator(params: &ZParams, lambda: &Partition, nu: &Partition) -> f64 {
    q_row(params, lambda).into_iter().find(|(target, _)| target == nu).map_or(0.0, |(_, rate)| rate)
}

/// `((1+ξ)|λ| + ξzz') / (1−ξ)`, the total jump rate out of `λ`.
pub fn exit_rate(params: &ZParams, lambda: &Partition) -> f64 {
    ((1.0 + params.xi()) * lambda.size() as f64 + params.xi() * params.product()) / (1.0 - params.xi())
}

fn run_chain<R: Rng>(params: &ZParams, start: Partition, t: f64, rng: &mut R) -> Partition {
    let mut state = start;
    let mut clock = 0.0;
    loop {
        let mut row = q_row(params, &state);
        let total = -row.pop().expect("row ends with the diagonal").1;
        if total <= 0.0 {
            return state;
        }
        clock += -(1.0 - rng.random::<f64>()).ln() / total;
        if clock > t {
            return state;
        }
        let mut pick = rng.random::<f64>() * total;
        let mut next = None;
        for (target, rate) in &row {
            if pick < *rate {
                next = Some(target.clone());
                break;
            }
            pick -= rate;
        }
        state = match next {
            Some(target) => target,
            None => row.into_iter().rev().find(|(_, r)| *r > 0.0).expect("positive total rate").0,
        };
    }
}

/// Endpoints of independent jump chains at a fixed time.
#[derive(Debug, Clone)]
pub struct JumpChainSample {
    time: f64,
    trials: usize,
    counts: BTreeMap<Partition, u64>,
}

/// One row of a jump-chain report.
#[derive(Debug, Clone, Serialize)]
pub struct JumpChainEntry {
    pub partition: Partition,
    pub count: u64,
    pub frequency: f64,
    pub stderr: f64,
    pub expected: Option<f64>,
    pub z_score: Option<f64>,
}

/// JSON report of a jump-chain run.
#[derive(Debug, Clone, Serialize)]
pub struct JumpChainReport {
    pub time: f64,
    pub trials: usize,
    pub entries: Vec<JumpChainEntry>,
}

fn simulate(
    params: &ZParams,
    t: f64,
    trials: usize,
    seed: u64,
    start: impl Fn(&mut rand_chacha::ChaCha8Rng) -> Partition + Sync,
) -> Result<JumpChainSample> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    if trials == 0 {
        return Err(Error::Statistics("at least one trial is needed".into()));
    }
    let blocks: Vec<BTreeMap<Partition, u64>> = (0..trials.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b as u64);
            let mut counts = BTreeMap::new();
            for _ in 0..BLOCK.min(trials - b * BLOCK) {
                let origin = start(&mut rng);
                *counts.entry(run_chain(params, origin, t, &mut rng)).or_insert(0) += 1;
            }
            counts
        })
        .collect();
    let mut counts = BTreeMap::new();
    for block in blocks {
        for (shape, c) in block {
            *counts.entry(shape).or_insert(0) += c;
        }
    }
    Ok(JumpChainSample { time: t, trials, counts })
}

/// Jump chains of `Q_{z,z',ξ}` from a fixed diagram.
pub fn simulate_jump_chain(
    params: &ZParams,
    start: &Partition,
    t: f64,
    trials: usize,
    seed: u64,
) -> Result<JumpChainSample> {
    simulate(params, t, trials, seed, |_| start.clone())
}

/// Jump chains started from the table's measure, renormalized.
pub fn simulate_stationary(table: &ZMeasureTable, t: f64, trials: usize, seed: u64) -> Result<JumpChainSample> {
    simulate(table.params(), t, trials, seed, |rng| table.sample(rng))
}

impl JumpChainSample {
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn trials(&self) -> usize {
        self.trials
    }

    pub fn counts(&self) -> &BTreeMap<Partition, u64> {
        &self.counts
    }

    /// Empirical probability of `λ` and its binomial standard error.
    pub fn frequency(&self, lambda: &Partition) -> (f64, f64) {
        let p = self.counts.get(lambda).copied().unwrap_or(0) as f64 / self.trials as f64;
        (p, (p * (1.0 - p) / self.trials as f64).sqrt())
    }

    /// Sample mean of `f` at the endpoints and its standard error.
    pub fn mean(&self, f: impl Fn(&Partition) -> f64) -> (f64, f64) {
        let n = self.trials as f64;
        let values: Vec<(f64, f64)> = self.counts.iter().map(|(s, &c)| (f(s), c as f64)).collect();
        let mean = values.iter().map(|(v, c)| v * c).sum::<f64>() / n;
        let var = values.iter().map(|(v, c)| c * (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        (mean, (var / n).sqrt())
    }

    /// Every visited diagram.
    pub fn report(&self) -> JumpChainReport {
        let entries = self
            .counts
            .iter()
            .map(|(shape, &count)| {
                let (frequency, stderr) = self.frequency(shape);
                JumpChainEntry { partition: shape.clone(), count, frequency, stderr, expected: None, z_score: None }
            })
            .collect();
        JumpChainReport { time: self.time, trials: self.trials, entries }
    }

    /// Every diagram with `|λ| ≤ max_size` against the table's mass; the
    /// standard error uses the expected probability.
    pub fn compare(&self, table: &ZMeasureTable, max_size: usize) -> JumpChainReport {
        let n = self.trials as f64;
        let entries = table
            .shapes()
            .iter()
            .zip(table.masses())
            .filter(|(shape, _)| shape.size() <= max_size)
            .map(|(shape, &expected)| {
                let (frequency, _) = self.frequency(shape);
                let stderr = (expected * (1.0 - expected) / n).sqrt();
                let z_score = if stderr > 0.0 {
                    (frequency - expected) / stderr
                } else if frequency == expected {
                    0.0
                } else {
                    f64::INFINITY
                };
                JumpChainEntry {
                    partition: shape.clone(),
                    count: self.counts.get(shape).copied().unwrap_or(0),
                    frequency,
                    stderr,
                    expected: Some(expected),
                    z_score: Some(z_score),
                }
            })
            .collect();
        JumpChainReport { time: self.time, trials: self.trials, entries }
    }
}
