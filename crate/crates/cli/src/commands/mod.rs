pub mod evolve;
pub mod kernel;
pub mod sample;
pub mod verify_car;
pub mod zmeasure;

use serde::Serialize;

use crate::config::FamilySpec;
use crate::error::CliError;

/// One named residual against its tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, passed: value <= tolerance }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, tolerance: bound, passed: value >= bound }
    }
}

pub fn fail_unless(checks: &[Check]) -> Result<(), CliError> {
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} = {:e} (tolerance {:e})", c.name, c.value, c.tolerance))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join("; ")))
    }
}

pub fn charlier_default() -> FamilySpec {
    FamilySpec::Charlier { mu: 1.0 }
}
