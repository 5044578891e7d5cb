//! Dynamics on ensemble configurations: the functions `F_λ`, unitary phases,
//! the stochastic semigroup `P_t` and its Karlin–McGregor Monte Carlo check.

mod functions;
mod montecarlo;
mod transition;

pub use functions::{
    eigenvalue_shift, eigenvalue_shift_exact, ensemble_inner, f_function, frobenius_shift_exact, unitary_phase,
    vandermonde, wedge_function, EnsembleFunction,
};
pub use montecarlo::{km_monte_carlo, MonteCarloEntry, MonteCarloReport, MonteCarloRow, MIN_EXPECTED_COUNT};
pub use transition::{
    eigen_residual, richardson_generator, transition_matrix, transition_matrix_with, RowSelection, TransitionMatrix,
    MASS_THRESHOLD, ROW_SUM_LIMIT,
};
