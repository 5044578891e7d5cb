use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::family::WeightFamily;
use super::system::OrthonormalSystem;
use crate::error::{Error, Result};
use crate::lattice::{enumerate_configurations, Configuration, Window};
use crate::numerics::{determinant, sym_eigen};

/// Dense symmetric kernel on a window whose minors are the correlation functions.
#[derive(Debug, Clone)]
pub struct ProjectionKernel {
    matrix: DMatrix<f64>,
    rank: usize,
    window: Window,
}

impl ProjectionKernel {
    pub fn from_matrix(matrix: DMatrix<f64>, rank: usize, window: Window) -> Result<Self> {
        if matrix.nrows() != window.len() || !matrix.is_square() {
            return Err(Error::Validation(format!(
                "kernel of size {}x{} on a window of {} points",
                matrix.nrows(),
                matrix.ncols(),
                window.len()
            )));
        }
        Ok(Self { matrix, rank, window })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// `K(x, y)` by lattice index.
    pub fn get(&self, x: i64, y: i64) -> Option<f64> {
        Some(self.matrix[(self.window.position(x)?, self.window.position(y)?)])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().copied().collect()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// `‖K² − K‖_max`.
    pub fn projector_residual(&self) -> f64 {
        (&self.matrix * &self.matrix - &self.matrix).amax()
    }

    /// Spectrum of the kernel, descending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(sym_eigen(&self.matrix)?.eigenvalues)
    }
}

/// `K(x, y) = Σ_{n<N} p_n(x) p_n(y)`.
pub fn cd_kernel(sys: &OrthonormalSystem, n: usize) -> Result<ProjectionKernel> {
    if n > sys.count() {
        return Err(Error::Precision { index: sys.count(), residual: f64::INFINITY });
    }
    let p = sys.values().rows(0, n);
    let matrix = p.transpose() * p;
    ProjectionKernel::from_matrix(matrix, n, *sys.window())
}

/// `det[K(x_i, x_j)]`; zero when a point repeats.
pub fn correlation(kernel: &ProjectionKernel, points: &[i64]) -> Result<f64> {
    let mut positions = Vec::with_capacity(points.len());
    for &x in points {
        let pos = kernel
            .window
            .position(x)
            .ok_or_else(|| Error::Range(format!("point {x} lies outside the kernel window")))?;
        if positions.contains(&pos) {
            return Ok(0.0);
        }
        positions.push(pos);
    }
    let minor = DMatrix::from_fn(points.len(), points.len(), |i, j| {
        kernel.matrix[(positions[i], positions[j])]
    });
    Ok(determinant(&minor))
}

/// The orthogonal-polynomial ensemble `M(ω) = V(ω)² Π w(x) / Z` on a window.
#[derive(Debug, Clone)]
pub struct Ensemble {
    system: OrthonormalSystem,
    particles: usize,
    log_z: f64,
}

impl Ensemble {
    pub fn new(family: &WeightFamily, window: &Window, particles: usize) -> Result<Self> {
        family.check_particles(particles)?;
        let system = OrthonormalSystem::new(family, window, particles)?;
        Ok(Self::from_system(system, particles))
    }

    /// Wraps an existing system holding at least `particles` functions.
    pub fn from_system(system: OrthonormalSystem, particles: usize) -> Self {
        let log_z = system.log_normalization(particles);
        Self { system, particles, log_z }
    }

    pub fn system(&self) -> &OrthonormalSystem {
        &self.system
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn window(&self) -> &Window {
        self.system.window()
    }

    /// `log Z_{w,N}` from the product of squared monic norms.
    pub fn log_normalization(&self) -> f64 {
        self.log_z
    }

    pub fn log_mass(&self, omega: &Configuration) -> Result<f64> {
        if omega.len() != self.particles {
            return Err(Error::Domain(format!(
                "configuration has {} points, the ensemble has {}",
                omega.len(),
                self.particles
            )));
        }
        let window = self.window();
        let logw = self.system.log_weights();
        let mut total = -self.log_z;
        for (i, &x) in omega.indices().iter().enumerate() {
            let pos = window
                .position(x)
                .ok_or_else(|| Error::Range(format!("point {x} lies outside the window")))?;
            total += logw[pos];
            for &y in &omega.indices()[i + 1..] {
                total += 2.0 * ((y - x) as f64).abs().ln();
            }
        }
        Ok(total)
    }

    pub fn mass(&self, omega: &Configuration) -> Result<f64> {
        Ok(self.log_mass(omega)?.exp())
    }

    pub fn kernel(&self) -> Result<ProjectionKernel> {
        cd_kernel(&self.system, self.particles)
    }
}

/// `log Σ_ω V(ω)² Π w(x)` by summing over every configuration of the window.
pub fn brute_force_log_normalization(family: &WeightFamily, window: &Window, n: usize) -> Result<f64> {
    let logw: Vec<f64> = window.indices().map(|x| family.log_weight(x)).collect();
    let terms: Vec<f64> = enumerate_configurations(window, n)?
        .iter()
        .map(|c| {
            let idx = c.indices();
            let mut t = 0.0;
            for (i, &x) in idx.iter().enumerate() {
                t += logw[window.position(x).unwrap_or(0)];
                for &y in &idx[i + 1..] {
                    t += 2.0 * ((y - x) as f64).ln();
                }
            }
            t
        })
        .collect();
    let peak = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(peak + terms.iter().map(|t| (t - peak).exp()).sum::<f64>().ln())
}

/// Exact sampler for a rank-`N` projection kernel by sequential conditioning.
#[derive(Debug, Clone)]
pub struct Sampler {
    kernel: ProjectionKernel,
}

impl Sampler {
    /// Rejects kernels that are not numerically a rank-`N` projection.
    pub fn new(kernel: &ProjectionKernel) -> Result<Self> {
        let residual = kernel.projector_residual();
        let trace = kernel.trace();
        if residual > 1e-8 || (trace - kernel.rank as f64).abs() > 1e-6 {
            return Err(Error::Validation(format!(
                "kernel is not a rank-{} projection (residual {residual:.2e}, trace {trace})",
                kernel.rank
            )));
        }
        Ok(Self { kernel: kernel.clone() })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Configuration {
        let k = &self.kernel.matrix;
        let size = k.nrows();
        let mut residual: Vec<f64> = (0..size).map(|i| k[(i, i)].max(0.0)).collect();
        let mut columns: Vec<Vec<f64>> = Vec::with_capacity(self.kernel.rank);
        let mut chosen = Vec::with_capacity(self.kernel.rank);
        for _ in 0..self.kernel.rank {
            let total: f64 = residual.iter().sum();
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            let mut last_positive = 0;
            for (i, &r) in residual.iter().enumerate() {
                if r <= 0.0 {
                    continue;
                }
                last_positive = i;
                acc += r;
                if acc > target {
                    pick = Some(i);
                    break;
                }
            }
            let x = pick.unwrap_or(last_positive);
            // Schur-complement update of the conditional kernel.
            let pivot = residual[x].sqrt();
            let col: Vec<f64> = (0..size)
                .map(|y| {
                    let mut v = k[(y, x)];
                    for c in &columns {
                        v -= c[y] * c[x];
                    }
                    v / pivot
                })
                .collect();
            for (r, c) in residual.iter_mut().zip(&col) {
                *r = (*r - c * c).max(0.0);
            }
            residual[x] = 0.0;
            columns.push(col);
            chosen.push(self.kernel.window.index_at(x));
        }
        Configuration::new(self.kernel.window, chosen).expect("sampled points are distinct")
    }
}

/// Seeded generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One configuration from a fixed seed.
pub fn sample(kernel: &ProjectionKernel, seed: u64) -> Result<Configuration> {
    Ok(Sampler::new(kernel)?.sample(&mut stream_rng(seed, 0)))
}

/// `count` independent samples; sample `i` uses stream `i` of `seed`.
pub fn sample_many(kernel: &ProjectionKernel, seed: u64, count: usize) -> Result<Vec<Configuration>> {
    let sampler = Sampler::new(kernel)?;
    Ok((0..count as u64)
        .into_par_iter()
        .map(|i| sampler.sample(&mut stream_rng(seed, i)))
        .collect())
}
