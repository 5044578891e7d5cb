use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Window, WindowKind};
use crate::numerics::{ln_factorial, ln_gamma, log_pochhammer, LogValue};

/// Admissibility class of a parameter pair `(z, z')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    /// `z' = conj(z)`, both nonreal.
    Principal,
    /// Both real and strictly inside the same unit interval `(k, k + 1)`.
    Complementary,
    /// Real, with `(z + k)(z' + k) ≥ 0` for every integer `k` and some factor zero.
    Degenerate,
    Invalid,
}

/// Classifies a pair; admissible pairs have `(z + k)(z' + k) > 0` for every integer `k`.
pub fn validate_pair(z: Complex64, z_prime: Complex64) -> PairKind {
    let scale = 1.0 + z.norm();
    if z.im != 0.0 && z_prime.im != 0.0 {
        if (z_prime - z.conj()).norm() <= 1e-14 * scale {
            PairKind::Principal
        } else {
            PairKind::Invalid
        }
    } else if z.im == 0.0 && z_prime.im == 0.0 {
        let (a, b) = (z.re, z_prime.re);
        let k = a.floor();
        if a.is_finite() && b.is_finite() && k == b.floor() && a > k && b > k {
            PairKind::Complementary
        } else {
            PairKind::Invalid
        }
    } else {
        PairKind::Invalid
    }
}

/// `validate_pair`, widened to the degenerate series of z-measures.
pub fn validate_zmeasure_pair(z: Complex64, z_prime: Complex64) -> PairKind {
    match validate_pair(z, z_prime) {
        PairKind::Invalid if z.im == 0.0 && z_prime.im == 0.0 && z.re.is_finite() && z_prime.re.is_finite() => {
            let (a, b) = (z.re.min(z_prime.re), z.re.max(z_prime.re));
            // (z + k)(z' + k) < 0 exactly when −k lies strictly between a and b.
            if a.floor() + 1.0 < b {
                PairKind::Invalid
            } else {
                PairKind::Degenerate
            }
        }
        kind => kind,
    }
}

/// Weight of hypergeometric type together with its Pearson data `(σ, τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightFamily {
    /// `w(x) = (β)_x ξ^x / x!` on `ℤ≥0`.
    Meixner { beta: f64, xi: f64 },
    /// `w(x) = e^{-μ} μ^x / x!` on `ℤ≥0`.
    Charlier { mu: f64 },
    /// `w(x) = 1 / [Γ(u-x+1)Γ(u'-x+1)Γ(w+x+1)Γ(w'+x+1)]` on `ℤ`.
    AskeyLesky { u: Complex64, u_prime: Complex64, w: Complex64, w_prime: Complex64 },
}

impl WeightFamily {
    pub fn meixner(beta: f64, xi: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Parameter(format!("Meixner needs beta > 0, got {beta}")));
        }
        if !(xi > 0.0 && xi < 1.0) {
            return Err(Error::Parameter(format!("Meixner needs xi in (0, 1), got {xi}")));
        }
        Ok(WeightFamily::Meixner { beta, xi })
    }

    pub fn charlier(mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Parameter(format!("Charlier needs mu > 0, got {mu}")));
        }
        Ok(WeightFamily::Charlier { mu })
    }

    pub fn askey_lesky(u: Complex64, u_prime: Complex64, w: Complex64, w_prime: Complex64) -> Result<Self> {
        for (name, a, b) in [("(u, u')", u, u_prime), ("(w, w')", w, w_prime)] {
            if validate_pair(a, b) == PairKind::Invalid {
                return Err(Error::Parameter(format!(
                    "{name} = ({a}, {b}) is neither a principal nor a complementary pair"
                )));
            }
        }
        Ok(WeightFamily::AskeyLesky { u, u_prime, w, w_prime })
    }

    pub fn name(&self) -> &'static str {
        match self {
            WeightFamily::Meixner { .. } => "meixner",
            WeightFamily::Charlier { .. } => "charlier",
            WeightFamily::AskeyLesky { .. } => "askey-lesky",
        }
    }

    pub fn lattice_kind(&self) -> WindowKind {
        match self {
            WeightFamily::AskeyLesky { .. } => WindowKind::FullLine,
            _ => WindowKind::HalfLine,
        }
    }

    /// Window `{lo, …, hi}` on this family's lattice (`lo` is ignored on ℤ≥0).
    pub fn window(&self, lo: i64, hi: i64) -> Result<Window> {
        match self.lattice_kind() {
            WindowKind::HalfLine => Window::half_line(hi),
            WindowKind::FullLine => Window::integers(lo, hi),
        }
    }

    /// `u + u' + w + w'` for Askey–Lesky.
    fn parameter_sum(&self) -> f64 {
        match self {
            WeightFamily::AskeyLesky { u, u_prime, w, w_prime } => (u + u_prime + w + w_prime).re,
            _ => 0.0,
        }
    }

    /// Largest particle number the family supports (`None` when unlimited).
    pub fn max_particles(&self) -> Option<usize> {
        match self {
            WeightFamily::AskeyLesky { .. } => {
                // u + u' + w + w' > 2N + 1
                let s = self.parameter_sum();
                let n = ((s - 1.0) / 2.0).ceil() - 1.0;
                Some(n.max(0.0) as usize)
            }
            _ => None,
        }
    }

    pub fn check_particles(&self, n: usize) -> Result<()> {
        match self.max_particles() {
            Some(max) if n > max => Err(Error::Parameter(format!(
                "u + u' + w + w' = {} does not exceed 2N + 1 for N = {n}",
                self.parameter_sum()
            ))),
            _ => Ok(()),
        }
    }

    pub fn sigma(&self, x: f64) -> f64 {
        match *self {
            WeightFamily::Meixner { .. } | WeightFamily::Charlier { .. } => x,
            WeightFamily::AskeyLesky { w, w_prime, .. } => ((x + w) * (x + w_prime)).re,
        }
    }

    pub fn tau(&self, x: f64) -> f64 {
        match *self {
            WeightFamily::Meixner { beta, xi } => -(1.0 - xi) * x + beta * xi,
            WeightFamily::Charlier { mu } => mu - x,
            WeightFamily::AskeyLesky { u, u_prime, w, w_prime } => {
                -self.parameter_sum() * x + (u * u_prime - w * w_prime).re
            }
        }
    }

    /// Birth rate `λ_x = σ(x) + τ(x)`.
    pub fn birth_rate(&self, x: f64) -> f64 {
        self.sigma(x) + self.tau(x)
    }

    /// Death rate `μ_x = σ(x)`.
    pub fn death_rate(&self, x: f64) -> f64 {
        self.sigma(x)
    }

    /// `(τ', σ'')`, the coefficients of `m_n = τ'n + σ''n(n-1)/2`.
    pub fn spectral_coefficients(&self) -> (f64, f64) {
        match *self {
            WeightFamily::Meixner { xi, .. } => (-(1.0 - xi), 0.0),
            WeightFamily::Charlier { .. } => (-1.0, 0.0),
            WeightFamily::AskeyLesky { .. } => (-self.parameter_sum(), 2.0),
        }
    }

    /// Eigenvalue `m_n` of the difference operator on the degree-`n` polynomial.
    pub fn eigenvalue_m(&self, n: usize) -> f64 {
        let (tau1, sigma2) = self.spectral_coefficients();
        let n = n as f64;
        tau1 * n + sigma2 * n * (n - 1.0) / 2.0
    }

    /// `m_n` in exact rational arithmetic (binary floats convert exactly).
    pub fn eigenvalue_m_exact(&self, n: usize) -> BigRational {
        let (tau1, sigma2) = self.spectral_coefficients();
        let tau1 = BigRational::from_f64(tau1).unwrap_or_else(BigRational::zero);
        let sigma2 = BigRational::from_f64(sigma2).unwrap_or_else(BigRational::zero);
        let n_big = BigRational::from_integer(BigInt::from(n));
        let pairs = BigRational::from_integer(BigInt::from(n * n.saturating_sub(1) / 2));
        tau1 * n_big + sigma2 * pairs
    }

    /// `log w(x)` at a lattice point, straight from the closed form.
    pub fn log_weight(&self, x: i64) -> f64 {
        match *self {
            WeightFamily::Meixner { beta, xi } => {
                if x < 0 {
                    return f64::NEG_INFINITY;
                }
                let poch = match log_pochhammer(beta, x as u64) {
                    LogValue::Finite { log_abs, .. } => log_abs,
                    LogValue::Zero => return f64::NEG_INFINITY,
                };
                poch + x as f64 * xi.ln() - ln_factorial(x as u64)
            }
            WeightFamily::Charlier { mu } => {
                if x < 0 {
                    return f64::NEG_INFINITY;
                }
                -mu + x as f64 * mu.ln() - ln_factorial(x as u64)
            }
            WeightFamily::AskeyLesky { u, u_prime, w, w_prime } => {
                let x = x as f64;
                // Each pair multiplies to a positive real, so only real parts survive.
                -(ln_gamma(u - x + 1.0).re
                    + ln_gamma(u_prime - x + 1.0).re
                    + ln_gamma(w + x + 1.0).re
                    + ln_gamma(w_prime + x + 1.0).re)
            }
        }
    }
}

impl WeightFamily {
    /// Rejects windows with an interior point where `σ ≤ 0`.
    pub fn check_sigma(&self, window: &Window) -> Result<()> {
        for x in window.indices().skip(1) {
            let point = x as f64;
            if !(self.sigma(point) > 0.0) {
                return Err(Error::Admissibility { point });
            }
        }
        Ok(())
    }

    /// Largest relative residual of `Δ[σw] = τw` over the window, computed in log space.
    pub fn pearson_residual(&self, window: &Window) -> f64 {
        let mut worst = 0.0_f64;
        for x in window.indices().take(window.len().saturating_sub(1)) {
            let ratio = (self.log_weight(x + 1) - self.log_weight(x)).exp();
            let point = x as f64;
            let (s0, s1, t) = (self.sigma(point), self.sigma(point + 1.0) * ratio, self.tau(point));
            let scale = s0.abs() + s1.abs() + t.abs();
            if scale > 0.0 {
                worst = worst.max((s1 - s0 - t).abs() / scale);
            }
        }
        worst
    }
}

/// Log-weights at every point of the window.
pub fn build_weight(family: &WeightFamily, window: &Window) -> Result<Vec<f64>> {
    if window.kind() != family.lattice_kind() || window.offset() != 0.0 {
        return Err(Error::Validation(format!(
            "{} weights live on {:?} windows of the integers",
            family.name(),
            family.lattice_kind()
        )));
    }
    Ok(window.indices().map(|x| family.log_weight(x)).collect())
}
