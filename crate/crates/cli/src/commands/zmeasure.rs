use dpp_gicar::lattice::Partition;
use dpp_gicar::zmeasure::{
    m_value, partition_density, q_row, simulate_jump_chain, simulate_stationary, zmeasure_kernel, ZMeasureTable,
    ZParams,
};
use num_complex::Complex64;
use serde::Serialize;

use super::{fail_unless, Check};
use crate::config::{ComplexSpec, ExperimentConfig, FamilySpec, Model};
use crate::error::CliError;
use crate::output::{Output, Table};

const DEFAULT_TRIALS: usize = 20_000;

#[derive(Serialize)]
struct ParamsReport {
    z: [f64; 2],
    z_prime: [f64; 2],
    xi: f64,
    kind: String,
}

#[derive(Serialize)]
struct Decay {
    start: String,
    t: f64,
    mean: f64,
    stderr: f64,
    expected: f64,
}

#[derive(Serialize)]
struct ZMeasureSummary {
    params: ParamsReport,
    cutoff: usize,
    shapes: usize,
    partial_mass: f64,
    tail: f64,
    kernel_diagonal_max_diff: f64,
    q_row_sum_max: f64,
    q_eigen_max: f64,
    trials: usize,
    stationary_max_abs_z: f64,
    decay: Decay,
    checks: Vec<Check>,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn default_spec() -> FamilySpec {
    FamilySpec::Zmeasure { z: ComplexSpec::Real(2.0), z_prime: ComplexSpec::Real(3.0), xi: 0.1 }
}

/// `max |Σ_ν Q(λ, ν)|` and `max |Q𝔐_μ + |μ|𝔐_μ|` over `|μ| ≤ 3`, `|λ| ≤ max_size`.
fn generator_report(params: &ZParams, max_size: usize) -> (f64, f64) {
    let (mut row_sum, mut eigen): (f64, f64) = (0.0, 0.0);
    let mus = Partition::all_up_to(3);
    for lambda in Partition::all_up_to(max_size) {
        let row = q_row(params, &lambda);
        row_sum = row_sum.max(row.iter().map(|(_, r)| r).sum::<f64>().abs());
        for mu in &mus {
            let image: f64 = row.iter().map(|(nu, r)| r * m_value(params, mu, nu)).sum();
            eigen = eigen.max((image + mu.size() as f64 * m_value(params, mu, &lambda)).abs());
        }
    }
    (row_sum, eigen)
}

pub fn run(config: &ExperimentConfig, out: &Output) -> Result<String, CliError> {
    let Model::ZMeasure(params) = ExperimentConfig::model(&config.family_or(default_spec()))? else {
        return Err(CliError::Config("zmeasure needs a family of kind zmeasure".into()));
    };
    let trials = config.trials.unwrap_or(DEFAULT_TRIALS);
    let table = ZMeasureTable::new(&params, config.cutoff);

    let mut masses = Table::new(&["partition", "mass"]);
    for (shape, &mass) in table.shapes().iter().zip(table.masses()) {
        masses.push(vec![shape.to_string().into(), mass.into()]);
    }
    out.table("masses", &masses)?;

    let window = config.half_integer_window()?;
    let kernel = zmeasure_kernel(&params, &window)?;
    let density = partition_density(&table, &window)?;
    let quarter = window.len() as i64 / 4;
    let (inner_lo, inner_hi) = (window.lo() + quarter, window.hi() - quarter);
    let mut diagonal = Table::new(&["x", "kernel_diag", "partition_sum"]);
    let mut kernel_diff: f64 = 0.0;
    for (k, x) in window.indices().enumerate() {
        let value = kernel.get(x, x).expect("window point");
        diagonal.push(vec![window.point(x).into(), value.into(), density[k].into()]);
        if (inner_lo..=inner_hi).contains(&x) {
            kernel_diff = kernel_diff.max((value - density[k]).abs());
        }
    }
    out.table("kernel_diagonal", &diagonal)?;

    let (q_row_sum_max, q_eigen_max) = generator_report(&params, config.max_size);

    let stationary = simulate_stationary(&table, config.t, trials, config.seed)?.compare(&table, config.max_size);
    out.json("stationary", &stationary)?;
    let stationary_max_abs_z =
        stationary.entries.iter().filter_map(|e| e.z_score).map(f64::abs).fold(0.0, f64::max);

    let start = config.start_partition()?;
    let sample = simulate_jump_chain(&params, &start, config.t, trials, config.seed.wrapping_add(1))?;
    out.json("jump_chain", &sample.report())?;
    let one = Partition::new(vec![1]).expect("valid partition");
    let (mean, stderr) = sample.mean(|l| m_value(&params, &one, l));
    let expected = (-config.t).exp() * m_value(&params, &one, &start);

    let checks = vec![
        Check::at_least("partial_mass", table.partial_mass(), 1.0 - 1e-6),
        Check::at_most("kernel_diagonal", kernel_diff, table.tail() + 1e-10),
        Check::at_most("q_row_sum", q_row_sum_max, 1e-12),
        Check::at_most("q_eigen", q_eigen_max, 1e-8),
        Check::at_most("stationary_max_abs_z", stationary_max_abs_z, 4.0),
        Check::at_most("decay", (mean - expected).abs(), 4.0 * stderr + 1e-12 * expected.abs().max(1.0)),
    ];
    let summary = ZMeasureSummary {
        params: ParamsReport {
            z: pair(params.z()),
            z_prime: pair(params.z_prime()),
            xi: params.xi(),
            kind: format!("{:?}", params.kind()).to_lowercase(),
        },
        cutoff: table.cutoff(),
        shapes: table.shapes().len(),
        partial_mass: table.partial_mass(),
        tail: table.tail(),
        kernel_diagonal_max_diff: kernel_diff,
        q_row_sum_max,
        q_eigen_max,
        trials,
        stationary_max_abs_z,
        decay: Decay { start: start.to_string(), t: config.t, mean, stderr, expected },
        checks,
    };
    out.json("summary", &summary)?;
    fail_unless(&summary.checks)?;
    Ok(serde_json::to_string_pretty(&summary).expect("summary serializes"))
}
