//! Finite-mode CAR algebra: Fock matrices, quasi-free states, the doubled
//! GNS representation, Wick products and Evans's completely positive maps.

mod fock;
mod state;
mod words;

pub use fock::{basis_mode, inner, occupation_mask, CarOperator, FockSpace, Mode, MAX_MODES};
pub use state::{
    cyclic_subspace, excitation_vector, hamiltonian, predicted_spectrum, restricted_spectrum, DoubledGns,
    QuasiFreeState, CYCLIC_TOLERANCE, MAX_DOUBLED_MODES, STATE_TOLERANCE,
};
pub use words::{
    contraction_defect, cp_map, cp_map_sum, quasi_free_moment, wick_product, word_moment, Representation, Word,
    WordSum, CONTRACTION_TOLERANCE,
};
