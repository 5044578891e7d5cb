use nalgebra::DMatrix;
use serde::Serialize;

use super::family::{build_weight, WeightFamily};
use crate::error::{Error, Result};
use crate::lattice::{Window, WindowKind};

/// Gram residual above which an orthonormal function is no longer trusted.
pub const RELIABLE_GRAM_TOLERANCE: f64 = 1e-8;
const TAIL_RATIO: f64 = 1e-14;
const BOUNDARY_TERM: f64 = 1e-12;
const MAX_WINDOW: i64 = 200_000;

/// Truncation diagnostics for a window.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WindowCertificate {
    /// Estimated weight outside the window relative to the weight inside.
    pub tail_ratio: f64,
    /// Largest `|x^n σ(x) w(x)| / Σw` at an artificial edge, `n ≤ 2N−1`.
    pub boundary_term: f64,
    pub passed: bool,
}

/// Checks tail mass and boundary terms of `window` for `n` particles.
pub fn certify_window(family: &WeightFamily, window: &Window, n: usize) -> Result<WindowCertificate> {
    let logw = build_weight(family, window)?;
    let peak = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let inside: f64 = logw.iter().map(|l| (l - peak).exp()).sum();
    let mut tail = tail_sum(family, window.hi(), 1, peak);
    let mut edges = vec![window.hi()];
    if window.kind() == WindowKind::FullLine {
        tail += tail_sum(family, window.lo(), -1, peak);
        edges.push(window.lo());
    } else if family.sigma(window.point(window.lo())) != 0.0 {
        edges.push(window.lo());
    }
    let max_power = (2 * n).saturating_sub(1) as i32;
    let mut boundary = 0.0_f64;
    for &edge in &edges {
        let x = window.point(edge);
        let base = family.sigma(x).abs() * (family.log_weight(edge) - peak).exp() / inside;
        for p in 0..=max_power {
            boundary = boundary.max(x.abs().powi(p) * base);
        }
    }
    let tail_ratio = tail / inside;
    Ok(WindowCertificate {
        tail_ratio,
        boundary_term: boundary,
        passed: tail_ratio < TAIL_RATIO && boundary < BOUNDARY_TERM,
    })
}

/// Weight beyond `edge` in direction `step`, scaled by `exp(-peak)`. Summed
/// directly until terms are negligible, then closed with a ratio estimate.
fn tail_sum(family: &WeightFamily, edge: i64, step: i64, peak: f64) -> f64 {
    let mut total = 0.0;
    let mut x = edge + step;
    let mut prev = (family.log_weight(edge) - peak).exp();
    for _ in 0..1_000_000 {
        let term = (family.log_weight(x) - peak).exp();
        total += term;
        if term == 0.0 {
            return total;
        }
        let ratio = term / prev;
        if ratio < 1.0 && term * ratio / (1.0 - ratio) < 1e-6 * total.max(1e-300) {
            return total + term * ratio / (1.0 - ratio);
        }
        prev = term;
        x += step;
    }
    f64::INFINITY
}

/// Smallest window (grown geometrically around the weight's bulk) whose
/// certificate passes for `n` particles.
pub fn auto_window(family: &WeightFamily, n: usize) -> Result<(Window, WindowCertificate)> {
    family.check_particles(n)?;
    let center = match family.lattice_kind() {
        WindowKind::HalfLine => 0,
        WindowKind::FullLine => weight_mode(family),
    };
    let mut half = (4 * n as i64).max(8);
    while half <= MAX_WINDOW {
        let window = match family.lattice_kind() {
            WindowKind::HalfLine => Window::half_line(half)?,
            WindowKind::FullLine => Window::integers(center - half, center + half)?,
        };
        let cert = certify_window(family, &window, n)?;
        if cert.passed {
            return Ok((window, cert));
        }
        half = half + half / 4 + 1;
    }
    Err(Error::Window(format!(
        "no window up to {MAX_WINDOW} points certifies {} with N = {n}",
        family.name()
    )))
}

fn weight_mode(family: &WeightFamily) -> i64 {
    // Walk uphill from 0; the weights are unimodal.
    let mut x = 0;
    let step = if family.log_weight(1) > family.log_weight(0) { 1 } else { -1 };
    while family.log_weight(x + step) > family.log_weight(x) && x.abs() < MAX_WINDOW {
        x += step;
    }
    x
}

/// Orthonormal functions `p_n = p̃_n √w / ‖p̃_n‖` on a window.
#[derive(Debug, Clone)]
pub struct OrthonormalSystem {
    family: WeightFamily,
    window: Window,
    log_weights: Vec<f64>,
    /// Row `n` holds `p_n` at every window point.
    values: DMatrix<f64>,
    /// Recurrence `b_{n+1} P_{n+1} = (x − a_n) P_n − b_n P_{n−1}` for the
    /// normalized polynomials `P_n = p̃_n / ‖p̃_n‖`.
    diagonal: Vec<f64>,
    offdiagonal: Vec<f64>,
    log_norms: Vec<f64>,
    gram_residuals: Vec<f64>,
    edge_mass: Vec<f64>,
}

impl OrthonormalSystem {
    /// Exactly `count` functions; fails if any of them is unreliable.
    pub fn new(family: &WeightFamily, window: &Window, count: usize) -> Result<Self> {
        let sys = Self::stieltjes(family, window, count)?;
        if let Some((index, &residual)) =
            sys.gram_residuals.iter().enumerate().find(|(_, &r)| r > RELIABLE_GRAM_TOLERANCE)
        {
            return Err(Error::Precision { index, residual });
        }
        Ok(sys)
    }

    /// As many reliable functions as possible, at most `max_count`.
    pub fn reliable(family: &WeightFamily, window: &Window, max_count: usize) -> Result<Self> {
        let mut sys = Self::stieltjes(family, window, max_count.min(window.len()))?;
        let keep = sys.gram_residuals.iter().take_while(|&&r| r <= RELIABLE_GRAM_TOLERANCE).count();
        sys.truncate(keep);
        Ok(sys)
    }

    fn truncate(&mut self, keep: usize) {
        self.values = self.values.rows(0, keep).into_owned();
        self.diagonal.truncate(keep);
        self.offdiagonal.truncate(keep);
        self.log_norms.truncate(keep);
        self.gram_residuals.truncate(keep);
        self.edge_mass.truncate(keep);
    }

    /// Discretized Stieltjes procedure (Lanczos on multiplication by `x`
    /// started from `√w`) with a full re-orthogonalization pass.
    fn stieltjes(family: &WeightFamily, window: &Window, count: usize) -> Result<Self> {
        let size = window.len();
        if count > size {
            return Err(Error::Precision { index: size, residual: f64::INFINITY });
        }
        let log_weights = build_weight(family, window)?;
        let peak = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let scaled: Vec<f64> = log_weights.iter().map(|l| (l - peak).exp()).collect();
        let total: f64 = scaled.iter().sum();
        let xs = window.points();

        let mut edges = vec![size - 1];
        if window.kind() == WindowKind::FullLine || family.sigma(xs[0]) != 0.0 {
            edges.push(0);
        }

        let mut q: Vec<Vec<f64>> = Vec::with_capacity(count);
        let mut diagonal = Vec::with_capacity(count);
        let mut offdiagonal = Vec::with_capacity(count);
        let mut gram_residuals = Vec::with_capacity(count);
        let mut log_norms = Vec::with_capacity(count);
        let mut edge_mass = Vec::with_capacity(count);
        let log_norm0 = 0.5 * (total.ln() + peak);

        let mut current: Vec<f64> = scaled.iter().map(|w| (w / total).sqrt()).collect();
        let mut previous = vec![0.0; size];
        let mut coupling = 0.0;
        let mut log_norm = log_norm0;
        let mut loss = 0.0_f64;
        for n in 0..count {
            edge_mass.push(edges.iter().map(|&e| current[e] * current[e]).fold(0.0, f64::max));
            gram_residuals.push(loss);
            log_norms.push(log_norm);
            let a: f64 = xs.iter().zip(&current).map(|(x, v)| x * v * v).sum();
            diagonal.push(a);
            q.push(current.clone());
            if n + 1 == count {
                break;
            }
            let mut next: Vec<f64> = (0..size)
                .map(|i| (xs[i] - a) * current[i] - coupling * previous[i])
                .collect();
            let raw_norm = norm(&next);
            loss = 0.0;
            for pass in 0..2 {
                for basis in &q {
                    let c = dot(&next, basis);
                    if pass == 0 {
                        loss = f64::max(loss, c.abs() / raw_norm.max(f64::MIN_POSITIVE));
                    }
                    axpy(-c, basis, &mut next);
                }
            }
            let b = norm(&next);
            if !(b > 0.0 && b.is_finite()) {
                gram_residuals.resize(count, f64::INFINITY);
                break;
            }
            // Cancellation below this level means the Krylov space is exhausted.
            if b < 1e-10 * raw_norm.max(1.0) {
                loss = loss.max(1.0);
            }
            for v in next.iter_mut() {
                *v /= b;
            }
            offdiagonal.push(b);
            log_norm += b.ln();
            coupling = b;
            previous = std::mem::replace(&mut current, next);
        }
        offdiagonal.resize(diagonal.len(), 0.0);
        let values = DMatrix::from_fn(q.len(), size, |n, i| q[n][i]);
        Ok(Self {
            family: *family,
            window: *window,
            log_weights,
            values,
            diagonal,
            offdiagonal,
            log_norms,
            gram_residuals,
            edge_mass,
        })
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// Number of functions held.
    pub fn count(&self) -> usize {
        self.values.nrows()
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Row `n`: `p_n` at the window points.
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn value(&self, n: usize, position: usize) -> f64 {
        self.values[(n, position)]
    }

    pub fn function(&self, n: usize) -> Vec<f64> {
        self.values.row(n).iter().copied().collect()
    }

    /// `log ‖p̃_n‖` in `L²(window, w)`.
    pub fn log_norm(&self, n: usize) -> f64 {
        self.log_norms[n]
    }

    pub fn gram_residuals(&self) -> &[f64] {
        &self.gram_residuals
    }

    /// `p_n(x)²` at the artificial window edges; large values mean the
    /// window functions differ from those of the untruncated lattice.
    pub fn edge_mass(&self, n: usize) -> f64 {
        self.edge_mass[n]
    }

    /// `m_n` for each held function.
    pub fn eigenvalues(&self) -> Vec<f64> {
        (0..self.count()).map(|n| self.family.eigenvalue_m(n)).collect()
    }

    /// `‖ΣΣ p_m p_n − δ‖_max` over the held functions.
    pub fn gram_error(&self) -> f64 {
        let g = &self.values * self.values.transpose();
        (g - DMatrix::identity(self.count(), self.count())).amax()
    }

    /// `p̃_n(x) / ‖p̃_n‖` at every `n < count` and arbitrary real `x`.
    pub fn normalized_polynomials(&self, x: f64) -> Vec<f64> {
        let count = self.count();
        let mut out = Vec::with_capacity(count);
        if count == 0 {
            return out;
        }
        out.push((-self.log_norms[0]).exp());
        for n in 0..count - 1 {
            let prev = if n > 0 { self.offdiagonal[n - 1] * out[n - 1] } else { 0.0 };
            out.push(((x - self.diagonal[n]) * out[n] - prev) / self.offdiagonal[n]);
        }
        out
    }

    /// `log Z_{w,N} = Σ_{n<N} log ‖p̃_n‖²`.
    pub fn log_normalization(&self, n: usize) -> f64 {
        self.log_norms[..n].iter().map(|l| 2.0 * l).sum()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
