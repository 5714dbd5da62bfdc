//! Double dimer and monomer double-dimer models on discrete tori.

pub mod budget;
pub mod error;
pub mod lattice;
pub mod loops;
pub mod matching;
pub mod mdd;
pub mod report;
pub mod sampler;
pub mod spectral;
pub mod stats;
pub mod suite;
mod transfer;

pub use budget::Budget;
pub use error::{Error, Result};
pub use lattice::{Edge, LatticeSpec, Parity, TorusLattice};
pub use matching::Matching;
