use dpp_gicar::dynamics::{
    eigen_residual, eigenvalue_shift, f_function, km_monte_carlo, transition_matrix, MonteCarloReport, TransitionMatrix,
};
use dpp_gicar::ensembles::{Ensemble, OrthonormalSystem, WeightFamily};
use dpp_gicar::lattice::{Configuration, ConfigurationSpace, Partition};
use dpp_gicar::operators::build_hypergeometric_d;
use serde::Serialize;

use super::{charlier_default, fail_unless, Check};
use crate::config::{ExperimentConfig, FamilySpec, Model};
use crate::error::CliError;
use crate::output::{Cell, Output, Table};

#[derive(Serialize)]
struct RowSums {
    worst_row: Option<String>,
    worst_deviation: f64,
    min_entry: f64,
    max_identity_distance: f64,
}

#[derive(Serialize)]
struct EigenRow {
    partition: String,
    rate: f64,
    residual: f64,
}

#[derive(Serialize)]
struct MonteCarloSummary {
    trials: usize,
    survivors: usize,
    compared: usize,
    max_abs_z: f64,
}

#[derive(Serialize)]
struct EvolveSummary {
    family: FamilySpec,
    particles: usize,
    window: [f64; 2],
    t: f64,
    rows_built: usize,
    configurations: usize,
    row_sums: RowSums,
    invariance_defect: f64,
    detailed_balance_defect: f64,
    eigen: Vec<EigenRow>,
    monte_carlo: Option<MonteCarloSummary>,
    checks: Vec<Check>,
}

fn label(config: &Configuration) -> Cell {
    Cell::Text(serde_json::to_string(config.indices()).expect("indices serialize"))
}

/// `max |P_t − I|` over the built rows.
fn identity_distance(p: &TransitionMatrix) -> f64 {
    let entries = p.entries();
    let mut worst: f64 = 0.0;
    for (r, &source) in p.rows().iter().enumerate() {
        for c in 0..entries.ncols() {
            let target = if c == source { 1.0 } else { 0.0 };
            worst = worst.max((entries[(r, c)] - target).abs());
        }
    }
    worst
}

fn eigen_table(
    family: &WeightFamily,
    p: &TransitionMatrix,
    space: &ConfigurationSpace,
    eigen_max: usize,
) -> Result<Vec<EigenRow>, CliError> {
    let particles = space.particles();
    let system = OrthonormalSystem::new(family, space.window(), particles + eigen_max)?;
    let ensemble = Ensemble::from_system(system, particles);
    let mut rows = Vec::new();
    for lambda in Partition::all_up_to(eigen_max).into_iter().filter(|l| l.length() <= particles) {
        let f = f_function(&ensemble, space, &lambda)?;
        let rate = eigenvalue_shift(family, &lambda, particles)?;
        rows.push(EigenRow { partition: lambda.to_string(), rate, residual: eigen_residual(p, &f, rate) });
    }
    Ok(rows)
}

pub fn run(config: &ExperimentConfig, out: &Output) -> Result<String, CliError> {
    let spec = config.family_or(charlier_default());
    let Model::Hypergeometric(family) = ExperimentConfig::model(&spec)? else {
        return Err(CliError::Config("evolve needs a charlier, meixner or askey-lesky family".into()));
    };
    let window = config.dynamics_window(&family, config.eigen_max)?;
    let op = build_hypergeometric_d(&family, &window)?;
    let p = transition_matrix(&op, config.particles, config.t)?;
    let space = p.space();

    let mut table = Table::new(&["source", "target", "value"]);
    for (r, &source) in p.rows().iter().enumerate() {
        for (c, target) in space.configs().iter().enumerate() {
            table.push(vec![label(space.get(source)), label(target), p.entries()[(r, c)].into()]);
        }
    }
    out.table("transition", &table)?;

    let worst = p.worst_row();
    let row_sums = RowSums {
        worst_row: worst.map(|(r, _)| p.source(r).to_string()),
        worst_deviation: worst.map_or(0.0, |(_, d)| d),
        min_entry: p.min_entry(),
        max_identity_distance: identity_distance(&p),
    };
    let eigen = eigen_table(&family, &p, space, config.eigen_max)?;
    let mut eigen_rows = Table::new(&["partition", "rate", "residual"]);
    for row in &eigen {
        eigen_rows.push(vec![row.partition.clone().into(), row.rate.into(), row.residual.into()]);
    }
    out.table("eigen", &eigen_rows)?;

    let mut checks = vec![
        Check::at_least("min_entry", row_sums.min_entry, -1e-12),
        Check::at_most("row_sum_deviation", row_sums.worst_deviation.abs(), 1e-8),
        Check::at_most("invariance_defect", p.invariance_defect(), 1e-8),
        Check::at_most("detailed_balance_defect", p.detailed_balance_defect(), 1e-8),
        Check::at_most("eigen_residual", eigen.iter().map(|e| e.residual).fold(0.0, f64::max), 1e-7),
    ];

    let monte_carlo = match config.trials {
        None => None,
        Some(trials) => {
            let start = config.start.clone().unwrap_or_else(|| (0..config.particles as i64).map(|k| window.lo() + k).collect());
            let start = Configuration::new(window, start)?;
            let report: MonteCarloReport = km_monte_carlo(&op, &start, config.t, trials, config.seed)?.compare(&p)?;
            out.json("montecarlo", &report)?;
            let max_abs_z = report.entries.iter().filter_map(|e| e.z_score).map(f64::abs).fold(0.0, f64::max);
            checks.push(Check::at_most("monte_carlo_max_abs_z", max_abs_z, 4.0));
            Some(MonteCarloSummary {
                trials: report.trials,
                survivors: report.survivors,
                compared: report.entries.len(),
                max_abs_z,
            })
        }
    };

    let summary = EvolveSummary {
        family: spec,
        particles: config.particles,
        window: [window.point(window.lo()), window.point(window.hi())],
        t: config.t,
        rows_built: p.rows().len(),
        configurations: space.len(),
        row_sums,
        invariance_defect: p.invariance_defect(),
        detailed_balance_defect: p.detailed_balance_defect(),
        eigen,
        monte_carlo,
        checks,
    };
    out.json("summary", &summary)?;
    fail_unless(&summary.checks)?;
    Ok(serde_json::to_string_pretty(&summary).expect("summary serializes"))
}
