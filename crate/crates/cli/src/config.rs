use std::path::Path;

use dpp_gicar::ensembles::{auto_window, WeightFamily};
use dpp_gicar::lattice::{Partition, Window, WindowKind};
use dpp_gicar::zmeasure::ZParams;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// A complex parameter, written as a number or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexSpec {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexSpec {
    pub fn value(self) -> Complex64 {
        match self {
            ComplexSpec::Real(re) => Complex64::new(re, 0.0),
            ComplexSpec::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilySpec {
    Charlier { mu: f64 },
    Meixner { beta: f64, xi: f64 },
    AskeyLesky { u: ComplexSpec, u_prime: ComplexSpec, w: ComplexSpec, w_prime: ComplexSpec },
    Zmeasure { z: ComplexSpec, z_prime: ComplexSpec, xi: f64 },
}

/// Inclusive index range of the lattice window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub lo: i64,
    pub hi: i64,
}

/// The model behind a command, after validation.
pub enum Model {
    Hypergeometric(WeightFamily),
    ZMeasure(ZParams),
}

/// Command-specific JSON config; every field is optional in the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: Option<FamilySpec>,
    pub particles: usize,
    pub window: Option<WindowSpec>,
    pub t: f64,
    pub start: Option<Vec<i64>>,
    pub eigen_max: usize,
    pub trials: Option<usize>,
    pub seed: u64,
    pub modes: usize,
    pub doubled: bool,
    pub words: usize,
    pub cutoff: usize,
    pub max_size: usize,
    pub start_partition: Vec<u32>,
    pub samples: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            family: None,
            particles: 2,
            window: None,
            t: 0.3,
            start: None,
            eigen_max: 3,
            trials: None,
            seed: 0,
            modes: 4,
            doubled: true,
            words: 50,
            cutoff: 20,
            max_size: 4,
            start_partition: vec![2, 1],
            samples: 1000,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn family_or(&self, fallback: FamilySpec) -> FamilySpec {
        self.family.clone().unwrap_or(fallback)
    }

    pub fn model(spec: &FamilySpec) -> Result<Model, CliError> {
        Ok(match *spec {
            FamilySpec::Charlier { mu } => Model::Hypergeometric(WeightFamily::charlier(mu)?),
            FamilySpec::Meixner { beta, xi } => Model::Hypergeometric(WeightFamily::meixner(beta, xi)?),
            FamilySpec::AskeyLesky { u, u_prime, w, w_prime } => Model::Hypergeometric(WeightFamily::askey_lesky(
                u.value(),
                u_prime.value(),
                w.value(),
                w_prime.value(),
            )?),
            FamilySpec::Zmeasure { z, z_prime, xi } => Model::ZMeasure(ZParams::new(z.value(), z_prime.value(), xi)?),
        })
    }

    /// The configured window, or the smallest certified one.
    pub fn hypergeometric_window(&self, family: &WeightFamily) -> Result<Window, CliError> {
        match self.window {
            Some(WindowSpec { lo, hi }) => Ok(match family.lattice_kind() {
                WindowKind::HalfLine if lo != 0 => {
                    return Err(CliError::Config(format!("{} lives on the half-line; lo must be 0", family.name())))
                }
                WindowKind::HalfLine => Window::half_line(hi)?,
                WindowKind::FullLine => Window::integers(lo, hi)?,
            }),
            None => Ok(auto_window(family, self.particles)?.0),
        }
    }

    /// The configured window, or the certified window for `particles + extra`
    /// polynomials with its length doubled, leaving room for the trajectories.
    pub fn dynamics_window(&self, family: &WeightFamily, extra: usize) -> Result<Window, CliError> {
        if self.window.is_some() {
            return self.hypergeometric_window(family);
        }
        let certified = auto_window(family, self.particles + extra)?.0;
        let len = certified.len() as i64;
        Ok(match family.lattice_kind() {
            WindowKind::HalfLine => certified.with_bounds(0, 2 * len - 1)?,
            WindowKind::FullLine => certified.with_bounds(certified.lo() - len / 2, certified.hi() + len / 2)?,
        })
    }

    /// The configured window of `ℤ + 1/2`, by default `[−50.5, 49.5]`.
    pub fn half_integer_window(&self) -> Result<Window, CliError> {
        let WindowSpec { lo, hi } = self.window.unwrap_or(WindowSpec { lo: -50, hi: 49 });
        Ok(Window::half_integers(lo, hi)?)
    }

    pub fn start_partition(&self) -> Result<Partition, CliError> {
        Partition::new(self.start_partition.clone()).map_err(|e| CliError::Config(e.to_string()))
    }
}
