//! Dense complex linear algebra specialized to a bipartite cut `H_A ⊗ H_B`.
//!
//! Index convention everywhere in the crate: a basis state `|a⟩ ⊗ |b⟩` of the
//! bipartite space has flat index `a * d_b + b`, i.e. factor A is the most
//! significant digit. For qubit chains this makes the leftmost sites factor A.

mod dims;
mod operator;
mod ops;
mod random;

pub use dims::{BipartiteDims, Factor};
pub use operator::DenseOperator;
pub use ops::{
    hs_inner, kron, linear_entropy, partial_trace, permute_bipartite, purity, reduced_state, swap_replica, Axis,
    IndexPermutation,
};
pub use random::{gaussian_matrix, haar_state, haar_unitary, RngStream};

/// Double-precision complex scalar.
pub type C64 = num_complex::Complex64;
