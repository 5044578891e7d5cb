//! Weight families, orthonormal systems, Christoffel–Darboux kernels, ensemble
//! probabilities and exact sampling.

mod family;
mod kernel;
mod system;

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use family::{build_weight, validate_pair, validate_zmeasure_pair, PairKind, WeightFamily};
pub use kernel::{
    brute_force_log_normalization, cd_kernel, correlation, sample, sample_many, stream_rng,
    Ensemble, ProjectionKernel, Sampler,
};
pub use system::{auto_window, certify_window, OrthonormalSystem, WindowCertificate, RELIABLE_GRAM_TOLERANCE};

use crate::error::{Error, Result};
use crate::lattice::Window;

/// A real number, or a complex one written as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex([f64; 2]),
}

impl Scalar {
    pub fn complex(self) -> Complex64 {
        match self {
            Scalar::Real(re) => Complex64::new(re, 0.0),
            Scalar::Complex([re, im]) => Complex64::new(re, im),
        }
    }

    pub fn real(self) -> Result<f64> {
        match self {
            Scalar::Real(re) => Ok(re),
            Scalar::Complex([re, im]) if im == 0.0 => Ok(re),
            Scalar::Complex(_) => Err(Error::Parameter("expected a real parameter".into())),
        }
    }
}

/// Family parameters by name; only the ones the family uses are read.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_prime: Option<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_prime: Option<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_prime: Option<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Scalar>,
}

impl FamilyParams {
    pub fn require(&self, name: &str) -> Result<Scalar> {
        let value = match name {
            "mu" => self.mu,
            "beta" => self.beta,
            "xi" => self.xi,
            "u" => self.u,
            "u_prime" => self.u_prime,
            "w" => self.w,
            "w_prime" => self.w_prime,
            "z" => self.z,
            "z_prime" => self.z_prime,
            "theta" => self.theta,
            _ => None,
        };
        value.ok_or_else(|| Error::Parameter(format!("missing parameter `{name}`")))
    }
}

/// `"auto"` or an explicit `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WindowSpec {
    Auto(AutoTag),
    Bounds([i64; 2]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec::Auto(AutoTag::Auto)
    }
}

/// JSON ensemble definition: `{family, params, N, window}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub family: String,
    #[serde(default)]
    pub params: FamilyParams,
    #[serde(rename = "N")]
    pub particles: usize,
    #[serde(default)]
    pub window: WindowSpec,
}

impl EnsembleConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("bad config: {e}")))
    }

    /// Builds the weight family named by the config.
    pub fn weight_family(&self) -> Result<WeightFamily> {
        let p = &self.params;
        match self.family.to_ascii_lowercase().replace('_', "-").as_str() {
            "meixner" => WeightFamily::meixner(p.require("beta")?.real()?, p.require("xi")?.real()?),
            "charlier" => WeightFamily::charlier(p.require("mu")?.real()?),
            "askey-lesky" | "askeylesky" => WeightFamily::askey_lesky(
                p.require("u")?.complex(),
                p.require("u_prime")?.complex(),
                p.require("w")?.complex(),
                p.require("w_prime")?.complex(),
            ),
            other => Err(Error::Parameter(format!("unknown family `{other}`"))),
        }
    }

    /// The requested window, or the smallest certified one when `"auto"`.
    pub fn resolve_window(&self, family: &WeightFamily) -> Result<(Window, WindowCertificate)> {
        match self.window {
            WindowSpec::Auto(_) => auto_window(family, self.particles),
            WindowSpec::Bounds([lo, hi]) => {
                let window = family.window(lo, hi)?;
                let certificate = certify_window(family, &window, self.particles)?;
                Ok((window, certificate))
            }
        }
    }
}

/// Writes `x,y,K` rows for every pair of window points.
pub fn write_kernel_csv<W: Write>(kernel: &ProjectionKernel, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "x,y,K")?;
    let window = kernel.window();
    for (i, x) in window.indices().enumerate() {
        for (j, y) in window.indices().enumerate() {
            writeln!(
                out,
                "{},{},{:.16e}",
                window.point(x),
                window.point(y),
                kernel.matrix()[(i, j)]
            )?;
        }
    }
    Ok(())
}

/// JSON form of a kernel: the window, rank and row-major matrix.
pub fn kernel_json(kernel: &ProjectionKernel) -> serde_json::Value {
    let rows: Vec<Vec<f64>> = kernel
        .matrix()
        .row_iter()
        .map(|r| r.iter().copied().collect())
        .collect();
    serde_json::json!({
        "window": kernel.window(),
        "rank": kernel.rank(),
        "points": kernel.window().points(),
        "K": rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parses_real_and_complex_params() {
        let cfg = EnsembleConfig::from_json(
            r#"{"family":"askey-lesky","params":{"u":[2,1],"u_prime":[2,-1],"w":[3,0.5],"w_prime":[3,-0.5]},"N":3,"window":[-30,30]}"#,
        )
        .unwrap();
        assert_eq!(cfg.window, WindowSpec::Bounds([-30, 30]));
        assert!(matches!(cfg.weight_family().unwrap(), WeightFamily::AskeyLesky { .. }));

        let cfg = EnsembleConfig::from_json(r#"{"family":"charlier","params":{"mu":1},"N":2,"window":"auto"}"#).unwrap();
        assert_eq!(cfg.window, WindowSpec::default());
        assert_eq!(cfg.weight_family().unwrap(), WeightFamily::Charlier { mu: 1.0 });

        let cfg = EnsembleConfig::from_json(r#"{"family":"meixner","params":{"beta":1},"N":2}"#).unwrap();
        assert!(cfg.weight_family().is_err());
        assert!(EnsembleConfig::from_json(r#"{"family":"charlier","params":{"nu":1},"N":2}"#).is_err());
    }
}
