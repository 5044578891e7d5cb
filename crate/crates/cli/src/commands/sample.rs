use dpp_gicar::ensembles::sample_many;
use serde::Serialize;

use super::{charlier_default, fail_unless, kernel, Check};
use crate::config::{ExperimentConfig, FamilySpec};
use crate::error::CliError;
use crate::output::{Cell, Output, Table};

#[derive(Serialize)]
struct SampleSummary {
    family: FamilySpec,
    samples: usize,
    rank: usize,
    wrong_sizes: usize,
    max_abs_z: f64,
    checks: Vec<Check>,
}

pub fn run(config: &ExperimentConfig, out: &Output) -> Result<String, CliError> {
    if config.samples == 0 {
        return Err(CliError::Config("samples must be positive".into()));
    }
    let spec = config.family_or(charlier_default());
    let (kernel, _) = kernel::build(config, &spec)?;
    let window = *kernel.window();
    let draws = sample_many(&kernel, config.seed, config.samples)?;

    let mut samples = Table::new(&["sample", "points"]);
    let mut hits = vec![0u64; window.len()];
    for (k, draw) in draws.iter().enumerate() {
        samples.push(vec![Cell::Int(k as i64), serde_json::to_string(&draw.points()).expect("points serialize").into()]);
        for &x in draw.indices() {
            hits[window.position(x).expect("sample inside the window")] += 1;
        }
    }
    out.table("samples", &samples)?;

    let n = config.samples as f64;
    let diagonal = kernel.diagonal();
    let mut density = Table::new(&["x", "empirical", "kernel_diag", "stderr"]);
    let mut max_abs_z: f64 = 0.0;
    for (k, x) in window.indices().enumerate() {
        let empirical = hits[k] as f64 / n;
        let expected = diagonal[k];
        let stderr = (expected * (1.0 - expected)).max(0.0).sqrt() / n.sqrt();
        if stderr > 0.0 {
            max_abs_z = max_abs_z.max((empirical - expected).abs() / stderr);
        }
        density.push(vec![window.point(x).into(), empirical.into(), expected.into(), stderr.into()]);
    }
    out.table("density", &density)?;

    let wrong_sizes = draws.iter().filter(|d| d.len() != kernel.rank()).count();
    let checks = vec![
        Check::at_most("wrong_sizes", wrong_sizes as f64, 0.0),
        Check::at_most("density_max_abs_z", max_abs_z, 5.0),
    ];
    let summary = SampleSummary { family: spec, samples: config.samples, rank: kernel.rank(), wrong_sizes, max_abs_z, checks };
    out.json("summary", &summary)?;
    fail_unless(&summary.checks)?;
    Ok(serde_json::to_string_pretty(&summary).expect("summary serializes"))
}
