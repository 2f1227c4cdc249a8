//! Frequency-domain modeling of non-Markovian linear quantum feedback
//! networks.
//!
//! The toolkit is organized around a noncommutative coefficient ring of
//! doubled-up 2x2 matrices ([`dring`]), matrices over it ([`dmatrix`]),
//! s-evaluable transfer maps with memory-kernel half-transforms
//! ([`tfcore`]), signal flow graphs with a matrix gain rule ([`sfg`]),
//! network-level constructions ([`netlib`]), a time-domain integrator used
//! as an independent oracle ([`timedomain`]) and a textual network
//! description format ([`netdsl`]).

pub mod dring;
pub mod dmatrix;
pub mod tfcore;
pub mod sfg;
pub mod netlib;
pub mod timedomain;
pub mod netdsl;

mod cmat;
mod error;

pub use dring::{DNum, ModeInvariants};
pub use dmatrix::{classify_modes, d_column_decompose, ColumnDecomposition, DMatrix, Generator};
pub use error::{Error, Result};
pub use tfcore::{generator_from_hamiltonian, system_m, MemoryKernel, Sign, TransferMap};
