//! Dense complex linear algebra over symbolic amplitudes, the fixed gate
//! set, and the closed-subspace lattice.

pub mod amp;
pub mod cvec;
pub mod gate;
pub mod subspace;
pub mod vector;

pub use amp::{Amp, AtomId};
pub use gate::Gate;
pub use subspace::Subspace;
pub use vector::SymVector;
