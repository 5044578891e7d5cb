use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::functions::{vandermonde, EnsembleFunction};
use crate::ensembles::{Ensemble, WeightFamily};
use crate::error::{Error, Result};
use crate::lattice::ConfigurationSpace;
use crate::numerics::{determinant, metzler_exp};
use crate::operators::{DifferenceOperator, OperatorKind};

/// Default relative mass below which source rows are not built.
pub const MASS_THRESHOLD: f64 = 1e-14;

/// Row-sum deviation that signals an undersized window.
pub const ROW_SUM_LIMIT: f64 = 1e-6;

/// Which source configurations get a row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RowSelection {
    All,
    /// Keep `x` when `M(x) ≥ ratio · max M`.
    MassThreshold(f64),
}

impl Default for RowSelection {
    fn default() -> Self {
        RowSelection::MassThreshold(MASS_THRESHOLD)
    }
}

/// `P_t` on `N`-point configurations, rows for selected sources and columns
/// for every configuration of the window.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    time: f64,
    space: ConfigurationSpace,
    rows: Vec<usize>,
    row_of: Vec<Option<usize>>,
    entries: DMatrix<f64>,
    log_masses: Vec<f64>,
}

fn family_of(op: &DifferenceOperator) -> Result<&WeightFamily> {
    match op.kind() {
        OperatorKind::Hypergeometric(family) => Ok(family),
        _ => Err(Error::Validation("transition matrices need a hypergeometric operator".into())),
    }
}

/// `P_t` with the default mass threshold.
pub fn transition_matrix(op: &DifferenceOperator, particles: usize, t: f64) -> Result<TransitionMatrix> {
    transition_matrix_with(op, particles, t, RowSelection::default())
}

/// `P_t(x, y) = e^{−t m_∅} V(y)/V(x) det[G_t(x_j, y_i)]` with
/// `G_t(x, y) = √(w(y)/w(x)) e^{tD}(x, y)`, the birth-death semigroup of the
/// truncated operator.
pub fn transition_matrix_with(
    op: &DifferenceOperator,
    particles: usize,
    t: f64,
    selection: RowSelection,
) -> Result<TransitionMatrix> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    let family = family_of(op)?;
    let window = *op.window();
    let ensemble = Ensemble::new(family, &window, particles)?;
    let space = ConfigurationSpace::new(&window, particles)?;
    let log_masses: Vec<f64> = space.configs().iter().map(|c| ensemble.log_mass(c)).collect::<Result<_>>()?;
    let top = log_masses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let rows: Vec<usize> = match selection {
        RowSelection::All => (0..space.len()).collect(),
        RowSelection::MassThreshold(ratio) => {
            (0..space.len()).filter(|&k| log_masses[k] >= top + ratio.ln()).collect()
        }
    };
    let mut row_of = vec![None; space.len()];
    for (r, &k) in rows.iter().enumerate() {
        row_of[k] = Some(r);
    }

    let g = metzler_exp(&op.generator_matrix()?, t)?;
    let m_empty: f64 = (0..particles).map(|n| family.eigenvalue_m(n)).sum();
    let decay = (-t * m_empty).exp();
    let lo = window.lo();
    let positions: Vec<Vec<usize>> =
        space.configs().iter().map(|c| c.indices().iter().map(|&x| (x - lo) as usize).collect()).collect();
    let vander: Vec<f64> = space.configs().iter().map(|c| vandermonde(&c.points())).collect();

    let row_data: Vec<Vec<f64>> = rows
        .par_iter()
        .map(|&src| {
            let xs = &positions[src];
            (0..space.len())
                .map(|dst| {
                    let ys = &positions[dst];
                    let m = DMatrix::from_fn(particles, particles, |i, j| g[(xs[j], ys[i])]);
                    decay * vander[dst] / vander[src] * determinant(&m)
                })
                .collect()
        })
        .collect();
    let entries = DMatrix::from_fn(rows.len(), space.len(), |r, c| row_data[r][c]);

    let matrix = TransitionMatrix { time: t, space, rows, row_of, entries, log_masses };
    if let Some((r, deviation)) = matrix.worst_row() {
        if deviation.abs() > ROW_SUM_LIMIT {
            return Err(Error::Truncation { row: matrix.source(r).to_string(), deviation });
        }
    }
    Ok(matrix)
}

impl TransitionMatrix {
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn space(&self) -> &ConfigurationSpace {
        &self.space
    }

    /// Configuration indices of the built rows.
    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    /// Built row for a configuration index, if any.
    pub fn row_of(&self, config: usize) -> Option<usize> {
        self.row_of[config]
    }

    pub fn source(&self, row: usize) -> &crate::lattice::Configuration {
        self.space.get(self.rows[row])
    }

    /// Rows indexed by built row, columns by configuration index.
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, from: usize, to: usize) -> Option<f64> {
        self.row_of[from].map(|r| self.entries[(r, to)])
    }

    /// `M_{w,N}` at every configuration of the window.
    pub fn masses(&self) -> Vec<f64> {
        self.log_masses.iter().map(|l| l.exp()).collect()
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.min()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.entries.row_iter().map(|r| r.sum()).collect()
    }

    /// Built row whose sum is farthest from 1, with the signed deviation.
    pub fn worst_row(&self) -> Option<(usize, f64)> {
        self.row_sums()
            .into_iter()
            .map(|s| s - 1.0)
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
    }

    /// `(P f)(x)` at the built rows.
    pub fn apply(&self, f: &EnsembleFunction) -> Vec<f64> {
        self.entries.row_iter().map(|r| r.iter().zip(&f.values).map(|(p, v)| p * v).sum()).collect()
    }

    /// `Σ_y self(x, y) other(y, z)` with `y` running over `other`'s built rows.
    pub fn compose(&self, other: &TransitionMatrix) -> DMatrix<f64> {
        let mut restricted = DMatrix::zeros(self.rows.len(), other.rows.len());
        for (j, &y) in other.rows.iter().enumerate() {
            restricted.set_column(j, &self.entries.column(y));
        }
        restricted * &other.entries
    }

    /// `Σ_{y not built in other} self(x, y)` for each built row.
    pub fn escape_mass(&self, other: &TransitionMatrix) -> Vec<f64> {
        self.entries
            .row_iter()
            .map(|r| (0..self.space.len()).filter(|&y| other.row_of[y].is_none()).map(|y| r[y]).sum())
            .collect()
    }

    /// `max_y |Σ_x M(x) P(x, y) − M(y)| / max M`, with `x` over built rows.
    pub fn invariance_defect(&self) -> f64 {
        let masses = self.masses();
        let top = masses.iter().copied().fold(0.0, f64::max);
        (0..self.space.len())
            .map(|y| {
                let pushed: f64 = self.rows.iter().enumerate().map(|(r, &x)| masses[x] * self.entries[(r, y)]).sum();
                (pushed - masses[y]).abs() / top
            })
            .fold(0.0, f64::max)
    }

    /// `max |M(x)P(x, y) − M(y)P(y, x)| / max M` over built pairs.
    pub fn detailed_balance_defect(&self) -> f64 {
        let masses = self.masses();
        let top = masses.iter().copied().fold(0.0, f64::max);
        let mut worst = 0.0_f64;
        for (r, &x) in self.rows.iter().enumerate() {
            for (s, &y) in self.rows.iter().enumerate() {
                let flow = masses[x] * self.entries[(r, y)] - masses[y] * self.entries[(s, x)];
                worst = worst.max(flow.abs() / top);
            }
        }
        worst
    }

    /// `source,target,value` with configurations as bracketed index lists.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "source,target,value")?;
        for (r, &x) in self.rows.iter().enumerate() {
            let source = serde_json::to_string(self.space.get(x).indices()).expect("indices serialize");
            for y in 0..self.space.len() {
                let target = serde_json::to_string(self.space.get(y).indices()).expect("indices serialize");
                writeln!(out, "\"{source}\",\"{target}\",{:.16e}", self.entries[(r, y)])?;
            }
        }
        Ok(())
    }
}

/// `‖P_t F − e^{t·rate} F‖ / ‖F‖` in `L²(M_{w,N})`, over the built rows.
pub fn eigen_residual(p: &TransitionMatrix, f: &EnsembleFunction, rate: f64) -> f64 {
    let masses = p.masses();
    let image = p.apply(f);
    let factor = (p.time() * rate).exp();
    let (mut diff, mut norm) = (0.0, 0.0);
    for (r, &x) in p.rows().iter().enumerate() {
        diff += masses[x] * (image[r] - factor * f.values[x]).powi(2);
        norm += masses[x] * f.values[x].powi(2);
    }
    (diff / norm).sqrt()
}

/// Richardson-extrapolated `((P_h − I)F)/h` at the built rows, from step
/// `h0` halved `levels − 1` times.
pub fn richardson_generator(
    op: &DifferenceOperator,
    particles: usize,
    f: &EnsembleFunction,
    h0: f64,
    levels: usize,
) -> Result<Vec<f64>> {
    if levels == 0 || !(h0 > 0.0) {
        return Err(Error::Validation("Richardson needs a positive step and at least one level".into()));
    }
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(levels);
    let mut rows: Option<Vec<usize>> = None;
    for k in 0..levels {
        let h = h0 / 2f64.powi(k as i32);
        let p = transition_matrix(op, particles, h)?;
        if rows.get_or_insert_with(|| p.rows().to_vec()) != p.rows() {
            return Err(Error::Validation("row selection changed between steps".into()));
        }
        let image = p.apply(f);
        table.push(p.rows().iter().zip(image).map(|(&x, v)| (v - f.values[x]) / h).collect());
    }
    for j in 1..levels {
        let factor = 2f64.powi(j as i32) - 1.0;
        for i in (j..levels).rev() {
            let refined: Vec<f64> =
                table[i].iter().zip(&table[i - 1]).map(|(fine, coarse)| fine + (fine - coarse) / factor).collect();
            table[i] = refined;
        }
    }
    Ok(table.pop().expect("at least one level"))
}
