use dpp_gicar::ensembles::{certify_window, correlation, Ensemble, ProjectionKernel, WindowCertificate};
use dpp_gicar::zmeasure::zmeasure_kernel;
use serde::Serialize;

use super::{charlier_default, fail_unless, Check};
use crate::config::{ExperimentConfig, FamilySpec, Model};
use crate::error::CliError;
use crate::output::{Output, Table};

#[derive(Serialize)]
struct KernelSummary {
    family: FamilySpec,
    particles: Option<usize>,
    window: [f64; 2],
    rank: usize,
    trace: f64,
    projector_residual: f64,
    certificate: Option<WindowCertificate>,
    checks: Vec<Check>,
}

/// The kernel of the configured ensemble or z-measure.
pub fn build(config: &ExperimentConfig, spec: &FamilySpec) -> Result<(ProjectionKernel, Option<WindowCertificate>), CliError> {
    Ok(match ExperimentConfig::model(spec)? {
        Model::Hypergeometric(family) => {
            let window = config.hypergeometric_window(&family)?;
            let ensemble = Ensemble::new(&family, &window, config.particles)?;
            (ensemble.kernel()?, Some(certify_window(&family, &window, config.particles)?))
        }
        Model::ZMeasure(params) => (zmeasure_kernel(&params, &config.half_integer_window()?)?, None),
    })
}

pub fn run(config: &ExperimentConfig, out: &Output) -> Result<String, CliError> {
    let spec = config.family_or(charlier_default());
    let (kernel, certificate) = build(config, &spec)?;
    let window = *kernel.window();

    let mut entries = Table::new(&["x", "y", "value"]);
    for x in window.indices() {
        for y in window.indices() {
            let value = kernel.get(x, y).expect("window point");
            entries.push(vec![window.point(x).into(), window.point(y).into(), value.into()]);
        }
    }
    out.table("kernel", &entries)?;

    let mut correlations = Table::new(&["x", "rho1", "rho2_next"]);
    for x in window.indices() {
        let next = if window.contains(x + 1) { correlation(&kernel, &[x, x + 1])? } else { f64::NAN };
        correlations.push(vec![window.point(x).into(), correlation(&kernel, &[x])?.into(), next.into()]);
    }
    out.table("correlations", &correlations)?;

    let residual = kernel.projector_residual();
    let trace = kernel.trace();
    let checks = vec![
        Check::at_most("projector_residual", residual, 1e-10),
        Check::at_most("trace_minus_rank", (trace - kernel.rank() as f64).abs(), 1e-8),
    ];
    let particles = (!matches!(spec, FamilySpec::Zmeasure { .. })).then_some(config.particles);
    let summary = KernelSummary {
        family: spec,
        particles,
        window: [window.point(window.lo()), window.point(window.hi())],
        rank: kernel.rank(),
        trace,
        projector_residual: residual,
        certificate,
        checks,
    };
    out.json("summary", &summary)?;
    fail_unless(&summary.checks)?;
    Ok(serde_json::to_string_pretty(&summary).expect("summary serializes"))
}
