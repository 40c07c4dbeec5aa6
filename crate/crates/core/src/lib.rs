//! Bipartite out-of-time-order correlators for finite-dimensional quantum systems.
//!
//! The central quantity is the averaged commutator
//!
//! ```text
//! G(t) = 1 - (1/d) Re ∫dV dW Tr( V_A†(t) W_B† V_A(t) W_B )
//! ```
//!
//! for Haar-random unitaries `V_A = V ⊗ I_B`, `W_B = I_A ⊗ W` on the two sides of a
//! cut `H = H_A ⊗ H_B`. The crate evaluates it exactly (replica form, reduced-channel
//! form, operator entanglement), relates it to entangling power, computes the whole
//! family of long-time-average estimates for spin-chain Hamiltonians, and provides
//! Monte Carlo and typicality experiments that check the analytic statements
//! numerically.
//!
//! Module map:
//!
//! - [`linalg`]: dense complex operators tagged with a bipartite cut, partial traces,
//!   replica swaps, index realignment, Haar sampling and reproducible random streams.
//! - [`models`]: TFIM / XXZ chain Hamiltonians and spectral analysis with degeneracy
//!   and gap clustering.
//! - [`otoc`]: exact evaluations of `G` and its relatives.
//! - [`estimates`]: Haar, NRC, NRC⁺ and exact infinite-time averages.
//! - [`channels`]: reduced dynamics as a CPTP map, Choi states and distance bounds.
//! - [`montecarlo`]: ensemble sampling, exhaustive Pauli averaging and concentration
//!   experiments.
//! - [`matrix_io`]: the plain-text dense matrix format.
//!
//! ```
//! use bipartite_otoc::linalg::{BipartiteDims, DenseOperator};
//! use bipartite_otoc::otoc;
//!
//! let dims = BipartiteDims::new(2, 2).unwrap();
//! let swap = DenseOperator::swap(2);
//! let g = otoc::g_exact(&swap, dims).unwrap();
//! assert!((g - 0.75).abs() < 1e-12);
//! ```

pub mod channels;
pub mod error;
pub mod estimates;
pub mod linalg;
pub mod matrix_io;
pub mod models;
pub mod montecarlo;
pub mod otoc;

pub use error::{Error, Result};
pub use linalg::{BipartiteDims, DenseOperator, Factor, RngStream, C64};

/// Default absolute tolerance for equality checks on double-precision results.
pub const DEFAULT_TOL: f64 = 1e-10;
