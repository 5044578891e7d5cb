use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::functions::vandermonde;
use super::transition::TransitionMatrix;
use crate::ensembles::stream_rng;
use crate::error::{Error, Result};
use crate::lattice::Configuration;
use crate::operators::{DifferenceOperator, OperatorKind};

/// Trials per random stream.
const BLOCK: usize = 4096;

/// Entries whose expected number of hits falls below this are not compared.
pub const MIN_EXPECTED_COUNT: f64 = 10.0;

/// Endpoint counts of non-colliding birth-death trajectories.
#[derive(Debug, Clone)]
pub struct MonteCarloRow {
    start: Configuration,
    time: f64,
    trials: usize,
    survivors: usize,
    decay: f64,
    counts: BTreeMap<Vec<i64>, u64>,
}

/// One compared (or reported) entry of the empirical row.
#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloEntry {
    pub entry: Vec<i64>,
    pub count: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub expected: Option<f64>,
    pub z_score: Option<f64>,
}

/// JSON report of a Monte Carlo row.
#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloReport {
    pub start: Vec<i64>,
    pub time: f64,
    pub trials: usize,
    pub survivors: usize,
    pub entries: Vec<MonteCarloEntry>,
}

enum Outcome {
    Survived(Vec<usize>),
    Discarded,
}

fn run_trial<R: Rng>(rng: &mut R, start: &[usize], birth: &[f64], death: &[f64], t: f64) -> Outcome {
    let mut pos = start.to_vec();
    let last = birth.len() - 1;
    let mut clock = 0.0;
    loop {
        let total: f64 = pos.iter().map(|&p| birth[p] + death[p]).sum();
        if total <= 0.0 {
            return Outcome::Survived(pos);
        }
        clock += -(1.0 - rng.random::<f64>()).ln() / total;
        if clock > t {
            return Outcome::Survived(pos);
        }
        let mut pick = rng.random::<f64>() * total;
        let mut event = None;
        for (i, &p) in pos.iter().enumerate() {
            if pick < birth[p] {
                event = Some((i, true));
                break;
            }
            pick -= birth[p];
            if pick < death[p] {
                event = Some((i, false));
                break;
            }
            pick -= death[p];
        }
        let (i, up) = event.unwrap_or((pos.len() - 1, false));
        let p = pos[i];
        let next = match (up, p) {
            (true, p) if p == last => return Outcome::Discarded,
            (false, 0) => return Outcome::Discarded,
            (true, p) => p + 1,
            (false, p) => p - 1,
        };
        if pos.contains(&next) {
            return Outcome::Discarded;
        }
        pos[i] = next;
    }
}

/// Runs `trials` independent copies of `N` birth-death chains from `start`
/// for time `t`, discarding trajectories where two particles meet.
pub fn km_monte_carlo(
    op: &DifferenceOperator,
    start: &Configuration,
    t: f64,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloRow> {
    let family = match op.kind() {
        OperatorKind::Hypergeometric(family) => family,
        _ => return Err(Error::Validation("Monte Carlo needs a hypergeometric operator".into())),
    };
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    let window = op.window();
    if start.window() != window {
        return Err(Error::Validation("start configuration lives on a different window".into()));
    }
    let (birth, death) = (op.birth().unwrap_or(&[]), op.death().unwrap_or(&[]));
    let origin: Vec<usize> = start.indices().iter().map(|&x| (x - window.lo()) as usize).collect();
    let blocks = trials.div_ceil(BLOCK);
    let partial: Vec<(usize, BTreeMap<Vec<usize>, u64>)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b as u64);
            let size = BLOCK.min(trials - b * BLOCK);
            let mut counts = BTreeMap::new();
            let mut survivors = 0;
            for _ in 0..size {
                if let Outcome::Survived(mut end) = run_trial(&mut rng, &origin, birth, death, t) {
                    end.sort_unstable();
                    *counts.entry(end).or_insert(0) += 1;
                    survivors += 1;
                }
            }
            (survivors, counts)
        })
        .collect();
    let mut counts = BTreeMap::new();
    let mut survivors = 0;
    for (s, block) in partial {
        survivors += s;
        for (end, c) in block {
            let indices: Vec<i64> = end.iter().map(|&p| window.lo() + p as i64).collect();
            *counts.entry(indices).or_insert(0) += c;
        }
    }
    if survivors == 0 {
        return Err(Error::Statistics(format!(
            "no trajectory out of {trials} avoided collisions; use a smaller t or more trials"
        )));
    }
    let m_empty: f64 = (0..start.len()).map(|n| family.eigenvalue_m(n)).sum();
    Ok(MonteCarloRow { start: start.clone(), time: t, trials, survivors, decay: (-t * m_empty).exp(), counts })
}

impl MonteCarloRow {
    pub fn trials(&self) -> usize {
        self.trials
    }

    pub fn survivors(&self) -> usize {
        self.survivors
    }

    pub fn counts(&self) -> &BTreeMap<Vec<i64>, u64> {
        &self.counts
    }

    /// `e^{−t m_∅} V(y)/V(x)`, the weight turning a hit frequency into `P_t`.
    pub fn reweighting(&self, target: &[i64]) -> f64 {
        let points = |idx: &[i64]| idx.iter().map(|&i| self.start.window().point(i)).collect::<Vec<_>>();
        self.decay * vandermonde(&points(target)) / vandermonde(&points(self.start.indices()))
    }

    /// Estimate of `P_t(start, target)` and its standard error.
    pub fn estimate(&self, target: &[i64]) -> (f64, f64) {
        let c = self.reweighting(target);
        let hits = self.counts.get(target).copied().unwrap_or(0) as f64;
        let p = c * hits / self.trials as f64;
        (p, ((c * p - p * p).max(0.0) / self.trials as f64).sqrt())
    }

    /// Every hit entry, without a spectral comparison.
    pub fn report(&self) -> MonteCarloReport {
        let entries = self
            .counts
            .iter()
            .map(|(target, &count)| {
                let (estimate, stderr) = self.estimate(target);
                MonteCarloEntry { entry: target.clone(), count, estimate, stderr, expected: None, z_score: None }
            })
            .collect();
        MonteCarloReport {
            start: self.start.indices().to_vec(),
            time: self.time,
            trials: self.trials,
            survivors: self.survivors,
            entries,
        }
    }

    /// Compares against the spectral row on every target whose expected hit
    /// count is at least `MIN_EXPECTED_COUNT`; the standard error uses the
    /// spectral value.
    pub fn compare(&self, p: &TransitionMatrix) -> Result<MonteCarloReport> {
        let space = p.space();
        let from = space
            .find(self.start.indices())
            .ok_or_else(|| Error::Range("start configuration is not in the transition space".into()))?;
        let row = p.row_of(from).ok_or_else(|| Error::Range("no row was built for the start".into()))?;
        let mut entries = Vec::new();
        for (k, target) in space.configs().iter().enumerate() {
            let expected = p.entries()[(row, k)];
            let c = self.reweighting(target.indices());
            if expected / c * self.trials as f64 >= MIN_EXPECTED_COUNT {
                let (estimate, _) = self.estimate(target.indices());
                let stderr = ((c * expected - expected * expected).max(0.0) / self.trials as f64).sqrt();
                entries.push(MonteCarloEntry {
                    entry: target.indices().to_vec(),
                    count: self.counts.get(target.indices()).copied().unwrap_or(0),
                    estimate,
                    stderr,
                    expected: Some(expected),
                    z_score: Some((estimate - expected) / stderr),
                });
            }
        }
        Ok(MonteCarloReport {
            start: self.start.indices().to_vec(),
            time: self.time,
            trials: self.trials,
            survivors: self.survivors,
            entries,
        })
    }
}
