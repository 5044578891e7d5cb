//! z-measures on Young diagrams, their embedding into `ℤ + 1/2`, the
//! eigenfunctions `FS_μ` and `𝔐_λ`, and the jump generator `Q_{z,z',ξ}`.

mod diagrams;
mod functions;
mod generator;
mod measure;

pub use diagrams::{
    dim, factorial, pair_pochhammer, pochhammer_lambda, pochhammer_skew, skew_dim, subdiagrams, SkewDimensions,
};
pub use functions::{
    diagram_inner, fs_function, fs_value, m_coefficients, m_function, m_value, DiagramFunction, DiagramInner,
};
pub use generator::{
    exit_rate, q_generator, q_row, simulate_jump_chain, simulate_stationary, JumpChainEntry, JumpChainReport,
    JumpChainSample,
};
pub use measure::{
    certified_tail, log_z_mass, mass_tail, occupies, partition_density, size_marginal, z_mass, zmeasure_kernel,
    ZMeasureTable, ZParams,
};
