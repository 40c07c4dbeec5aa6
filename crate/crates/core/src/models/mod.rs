//! Spin-chain Hamiltonians and their spectral analysis.

mod hamiltonian;
mod spectrum;

pub use hamiltonian::{build_hamiltonian, Boundary, HamiltonianSpec, ModelKind, MAX_CHAIN_SITES};
pub use spectrum::{
    eigendecompose, nrc_report, GapClasses, LevelClasses, NrcReport, SpectralData, DEFAULT_CLUSTER_TOL,
};
