//! Discrete orthogonal-polynomial ensembles, the difference operators whose
//! spectral projections produce their kernels, the induced unitary and Markov
//! dynamics, and the quasi-free GICAR identities behind them, all at finite
//! truncation.

pub mod car_fock;
pub mod dynamics;
pub mod ensembles;
pub mod error;
pub mod lattice;
pub mod numerics;
pub mod operators;
pub mod zmeasure;

pub use error::{Error, Result};
