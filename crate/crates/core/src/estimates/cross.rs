//! Reduced cross-operators `X_pi = Tr_χ̄ |φ_p⟩⟨φ_i|` on the smaller factor and
//! norms of sums of their outer products.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{BipartiteDims, Factor, C64};
use crate::models::SpectralData;

/// Eigenvector coefficient matrices oriented so that the kept factor indexes rows.
pub(crate) struct CrossOperators {
    factor: Factor,
    coeffs: Vec<DMatrix<C64>>,
}

impl CrossOperators {
    pub(crate) fn new(spec: &SpectralData, dims: BipartiteDims, factor: Factor) -> Result<Self> {
        if spec.dim() != dims.d() {
            return Err(Error::DimensionMismatch(format!(
                "spectrum of dimension {} on {dims}",
                spec.dim()
            )));
        }
        let (da, db) = (dims.d_a(), dims.d_b());
        let v = spec.eigenvectors().as_matrix();
        let coeffs = (0..dims.d())
            .map(|k| match factor {
                Factor::A => DMatrix::from_fn(da, db, |a, b| v[(a * db + b, k)]),
                Factor::B => DMatrix::from_fn(db, da, |b, a| v[(a * db + b, k)]),
            })
            .collect();
        Ok(Self { factor, coeffs })
    }

    pub(crate) fn factor(&self) -> Factor {
        self.factor
    }

    /// Side length of each cross-operator.
    pub(crate) fn side(&self) -> usize {
        self.coeffs[0].nrows()
    }

    /// `X_pi = K_p K_i†`.
    pub(crate) fn cross(&self, p: usize, i: usize) -> DMatrix<C64> {
        &self.coeffs[p] * self.coeffs[i].adjoint()
    }
}

/// Columns per block when accumulating `Σ v v†` directly.
const CHUNK: usize = 1024;

/// `‖Σ_j vec(X_j) vec(X_j)†‖_2²` over the cross-operators of `pairs`.
///
/// Uses the `m × m` Gram matrix of the vectors when there are fewer of them than
/// the vector length, and otherwise accumulates the outer-product sum in blocks.
pub(crate) fn outer_sum_norm_sq(ops: &CrossOperators, pairs: &[(u32, u32)]) -> f64 {
    let m = pairs.len();
    if m == 0 {
        return 0.0;
    }
    let len = ops.side() * ops.side();
    let column = |&(p, i): &(u32, u32)| ops.cross(p as usize, i as usize);
    if m == 1 {
        let n = column(&pairs[0]).iter().map(|z| z.norm_sqr()).sum::<f64>();
        return n * n;
    }
    if m <= len {
        let mut vecs = DMatrix::<C64>::zeros(len, m);
        for (j, pair) in pairs.iter().enumerate() {
            vecs.column_mut(j).copy_from_slice(column(pair).as_slice());
        }
        let gram = vecs.adjoint() * &vecs;
        return gram.iter().map(|z| z.norm_sqr()).sum();
    }
    let mut acc = DMatrix::<C64>::zeros(len, len);
    for chunk in pairs.chunks(CHUNK) {
        let mut vecs = DMatrix::<C64>::zeros(len, chunk.len());
        for (j, pair) in chunk.iter().enumerate() {
            vecs.column_mut(j).copy_from_slice(column(pair).as_slice());
        }
        acc += &vecs * vecs.adjoint();
    }
    acc.iter().map(|z| z.norm_sqr()).sum()
}
