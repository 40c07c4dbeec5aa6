use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{BipartiteDims, DenseOperator, Factor, C64};
use crate::error::{Error, Result};

/// Kronecker product `a ⊗ b`.
///
/// When both operands are square the result is tagged with the cut
/// `(a.rows, b.rows)`.
pub fn kron(a: &DenseOperator, b: &DenseOperator) -> DenseOperator {
    let out = DenseOperator::from_matrix(a.as_matrix().kronecker(b.as_matrix()));
    if a.is_square() && b.is_square() {
        if let Ok(dims) = BipartiteDims::new(a.rows(), b.rows()) {
            return out.with_dims(dims).expect("kron of square operators is square");
        }
    }
    out
}

fn require_bipartite_square(x: &DenseOperator, dims: BipartiteDims) -> Result<()> {
    if x.rows() != dims.d() || x.cols() != dims.d() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator does not act on {dims}",
            x.rows(),
            x.cols()
        )));
    }
    Ok(())
}

/// Partial trace keeping `keep`: `Tr_B x` for `keep = A`, `Tr_A x` for `keep = B`.
pub fn partial_trace(x: &DenseOperator, dims: BipartiteDims, keep: Factor) -> Result<DenseOperator> {
    require_bipartite_square(x, dims)?;
    let (da, db) = (dims.d_a(), dims.d_b());
    let m = x.as_matrix();
    let out = match keep {
        Factor::A => DMatrix::from_fn(da, da, |a, ap| (0..db).map(|b| m[(a * db + b, ap * db + b)]).sum()),
        Factor::B => DMatrix::from_fn(db, db, |b, bp| (0..da).map(|a| m[(a * db + b, a * db + bp)]).sum()),
    };
    Ok(DenseOperator::from_matrix(out))
}

/// Reduced density matrix of a pure state `|ψ⟩` without forming `|ψ⟩⟨ψ|`.
pub fn reduced_state(ket: &DenseOperator, dims: BipartiteDims, keep: Factor) -> Result<DenseOperator> {
    if ket.cols() != 1 || ket.rows() != dims.d() {
        return Err(Error::DimensionMismatch(format!(
            "expected a column vector of length {}, got {}x{}",
            dims.d(),
            ket.rows(),
            ket.cols()
        )));
    }
    let (da, db) = (dims.d_a(), dims.d_b());
    let psi = ket.as_matrix();
    let coeffs = DMatrix::from_fn(da, db, |a, b| psi[(a * db + b, 0)]);
    let rho = match keep {
        Factor::A => &coeffs * coeffs.adjoint(),
        Factor::B => coeffs.transpose() * coeffs.map(|z| z.conj()),
    };
    Ok(DenseOperator::from_matrix(rho))
}

/// Swap operator `S` on `C^d ⊗ C^d`: `S(|i⟩⊗|j⟩) = |j⟩⊗|i⟩`.
pub fn swap_replica(d: usize) -> DenseOperator {
    let n = d * d;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            m[(j * d + i, i * d + j)] = C64::new(1.0, 0.0);
        }
    }
    DenseOperator::from_matrix(m)
}

/// One of the four indices of an operator on `H_A ⊗ H_B` viewed as a tensor
/// `X[row_a, row_b, col_a, col_b]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    RowA,
    RowB,
    ColA,
    ColB,
}

impl Axis {
    fn slot(self) -> usize {
        match self {
            Axis::RowA => 0,
            Axis::RowB => 1,
            Axis::ColA => 2,
            Axis::ColB => 3,
        }
    }

    fn extent(self, dims: BipartiteDims) -> usize {
        match self {
            Axis::RowA | Axis::ColA => dims.d_a(),
            Axis::RowB | Axis::ColB => dims.d_b(),
        }
    }
}

/// Regrouping of the four tensor indices into a new matrix: the first two axes
/// (major, minor) index rows, the last two index columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexPermutation([Axis; 4]);

impl IndexPermutation {
    pub fn new(axes: [Axis; 4]) -> Result<Self> {
        let mut seen = [false; 4];
        for axis in axes {
            if std::mem::replace(&mut seen[axis.slot()], true) {
                return Err(Error::InvalidInput(format!("axis {axis:?} used twice")));
            }
        }
        Ok(Self(axes))
    }

    pub const IDENTITY: Self = Self([Axis::RowA, Axis::RowB, Axis::ColA, Axis::ColB]);

    /// Realignment across the `AA′ | BB′` cut: rows `(row_a, col_a)`, columns
    /// `(row_b, col_b)`. The singular values of the result are the operator-Schmidt
    /// coefficients of the input.
    pub const REALIGN: Self = Self([Axis::RowA, Axis::ColA, Axis::RowB, Axis::ColB]);

    /// Partial transpose on factor B.
    pub const PARTIAL_TRANSPOSE_B: Self = Self([Axis::RowA, Axis::ColB, Axis::ColA, Axis::RowB]);

    pub fn axes(&self) -> [Axis; 4] {
        self.0
    }
}

/// Reinterprets `u` as a rank-4 tensor and returns the matrix under the regrouped
/// indices given by `permutation`.
pub fn permute_bipartite(
    u: &DenseOperator,
    dims: BipartiteDims,
    permutation: IndexPermutation,
) -> Result<DenseOperator> {
    require_bipartite_square(u, dims)?;
    let [p0, p1, p2, p3] = permutation.0;
    let ext = [p0.extent(dims), p1.extent(dims), p2.extent(dims), p3.extent(dims)];
    let (rows, cols) = (ext[0] * ext[1], ext[2] * ext[3]);
    let db = dims.d_b();
    let m = u.as_matrix();
    let mut out = DMatrix::zeros(rows, cols);
    let mut idx = [0usize; 4];
    for i0 in 0..ext[0] {
        for i1 in 0..ext[1] {
            for i2 in 0..ext[2] {
                for i3 in 0..ext[3] {
                    idx[p0.slot()] = i0;
                    idx[p1.slot()] = i1;
                    idx[p2.slot()] = i2;
                    idx[p3.slot()] = i3;
                    let (r, c) = (idx[0] * db + idx[1], idx[2] * db + idx[3]);
                    out[(i0 * ext[1] + i1, i2 * ext[3] + i3)] = m[(r, c)];
                }
            }
        }
    }
    let out = DenseOperator::from_matrix(out);
    if permutation == IndexPermutation::IDENTITY {
        out.with_dims(dims)
    } else {
        Ok(out)
    }
}

/// Hilbert-Schmidt inner product `⟨X, Y⟩ = Tr(X†Y)`.
pub fn hs_inner(x: &DenseOperator, y: &DenseOperator) -> Result<C64> {
    if x.rows() != y.rows() || x.cols() != y.cols() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            x.rows(),
            x.cols(),
            y.rows(),
            y.cols()
        )));
    }
    Ok(x.as_matrix()
        .iter()
        .zip(y.as_matrix().iter())
        .map(|(a, b)| a.conj() * b)
        .sum())
}

/// `Tr(ρ²)`.
pub fn purity(rho: &DenseOperator) -> Result<f64> {
    if !rho.is_square() {
        return Err(Error::NotSquare {
            rows: rho.rows(),
            cols: rho.cols(),
        });
    }
    let m = rho.as_matrix();
    let n = rho.rows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += m[(i, j)] * m[(j, i)];
        }
    }
    Ok(acc.re)
}

/// Linear entropy `S_lin(ρ) = 1 - Tr(ρ²)`.
pub fn linear_entropy(rho: &DenseOperator) -> Result<f64> {
    Ok(1.0 - purity(rho)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gaussian_matrix, haar_state, RngStream};
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn kron_identities() {
        let i4 = kron(&DenseOperator::identity(2), &DenseOperator::identity(2));
        assert_eq!(i4.max_abs_diff(&DenseOperator::identity(4)), 0.0);
        assert_eq!(i4.dims(), Some(BipartiteDims::new(2, 2).unwrap()));
    }

    #[test]
    fn kron_sigma_x_sigma_z() {
        let k = kron(&DenseOperator::pauli(1), &DenseOperator::pauli(3));
        let mut expected = DenseOperator::zeros(4, 4);
        expected.set(0, 2, c(1.0));
        expected.set(1, 3, c(-1.0));
        expected.set(2, 0, c(1.0));
        expected.set(3, 1, c(-1.0));
        assert_eq!(k.max_abs_diff(&expected), 0.0);
    }

    #[test]
    fn kron_entry_definition() {
        let mut rng = RngStream::new(1, 0).rng();
        let a = gaussian_matrix(2, 2, &mut rng);
        let b = gaussian_matrix(2, 2, &mut rng);
        let k = kron(&a, &b);
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        assert_eq!(k.get(i * 2 + p, j * 2 + q), a.get(i, j) * b.get(p, q));
                    }
                }
            }
        }
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = RngStream::new(2, 0).rng();
        let ra = DenseOperator::projector(&haar_state(2, &mut rng));
        let rb = gaussian_matrix(3, 3, &mut rng);
        let dims = BipartiteDims::new(2, 3).unwrap();
        let pa = partial_trace(&kron(&ra, &rb), dims, Factor::A).unwrap();
        assert!(pa.max_abs_diff(&ra.scale(rb.trace())) < 1e-14);
    }

    #[test]
    fn partial_trace_bell_state() {
        let s = 0.5f64.sqrt();
        let phi = DenseOperator::ket(&[c(s), c(0.0), c(0.0), c(s)]);
        let dims = BipartiteDims::new(2, 2).unwrap();
        let pa = partial_trace(&DenseOperator::projector(&phi), dims, Factor::A).unwrap();
        assert!(pa.max_abs_diff(&DenseOperator::identity(2).scale_real(0.5)) < 1e-15);
        let pb = reduced_state(&phi, dims, Factor::B).unwrap();
        assert!(pb.max_abs_diff(&DenseOperator::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let mut rng = RngStream::new(3, 0).rng();
        let x = gaussian_matrix(6, 6, &mut rng);
        let dims = BipartiteDims::new(2, 3).unwrap();
        for keep in [Factor::A, Factor::B] {
            let t = partial_trace(&x, dims, keep).unwrap().trace();
            assert!((t - x.trace()).norm() < 1e-12);
        }
        assert!(partial_trace(&x, BipartiteDims::new(2, 2).unwrap(), Factor::A).is_err());
    }

    #[test]
    fn reduced_state_matches_partial_trace() {
        let mut rng = RngStream::new(4, 0).rng();
        let dims = BipartiteDims::new(3, 4).unwrap();
        let psi = haar_state(12, &mut rng);
        let full = DenseOperator::projector(&psi);
        for keep in [Factor::A, Factor::B] {
            let a = reduced_state(&psi, dims, keep).unwrap();
            let b = partial_trace(&full, dims, keep).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-14);
        }
    }

    #[test]
    fn swap_replica_basics() {
        let s = swap_replica(2);
        let mut expected = DenseOperator::identity(4);
        expected.set(1, 1, c(0.0));
        expected.set(2, 2, c(0.0));
        expected.set(1, 2, c(1.0));
        expected.set(2, 1, c(1.0));
        assert_eq!(s.max_abs_diff(&expected), 0.0);
        for d in 2..=4 {
            assert_eq!(swap_replica(d).trace(), c(d as f64));
        }
    }

    #[test]
    fn swap_replica_is_hermitian_unitary_involution() {
        for d in 1..=6 {
            let s = swap_replica(d);
            assert!(s.is_hermitian(1e-15));
            assert!(s.is_unitary(1e-15));
            assert_eq!((&s * &s).max_abs_diff(&DenseOperator::identity(d * d)), 0.0);
        }
    }

    #[test]
    fn swap_trick_three_by_three() {
        let mut rng = RngStream::new(5, 0).rng();
        let x = gaussian_matrix(3, 3, &mut rng);
        let y = gaussian_matrix(3, 3, &mut rng);
        let lhs = (&swap_replica(3) * &kron(&x, &y)).trace();
        let rhs = (&x * &y).trace();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn permutation_identity_and_involution() {
        let mut rng = RngStream::new(6, 0).rng();
        let dims = BipartiteDims::new(2, 3).unwrap();
        let u = gaussian_matrix(6, 6, &mut rng);
        let same = permute_bipartite(&u, dims, IndexPermutation::IDENTITY).unwrap();
        assert_eq!(same.max_abs_diff(&u), 0.0);
        let pt = IndexPermutation::PARTIAL_TRANSPOSE_B;
        let once = permute_bipartite(&u, dims, pt).unwrap();
        let twice = permute_bipartite(&once, dims, pt).unwrap();
        assert_eq!(twice.max_abs_diff(&u), 0.0);
        assert!(IndexPermutation::new([Axis::RowA, Axis::RowA, Axis::ColA, Axis::ColB]).is_err());
    }

    #[test]
    fn realigned_product_unitary_has_rank_one() {
        let mut rng = RngStream::new(7, 0).rng();
        let dims = BipartiteDims::new(2, 3).unwrap();
        let ua = crate::linalg::haar_unitary(2, &mut rng);
        let ub = crate::linalg::haar_unitary(3, &mut rng);
        let r = permute_bipartite(&kron(&ua, &ub), dims, IndexPermutation::REALIGN).unwrap();
        assert_eq!((r.rows(), r.cols()), (4, 9));
        let sv = r.as_matrix().clone().singular_values();
        let nonzero = sv.iter().filter(|s| **s > 1e-10).count();
        assert_eq!(nonzero, 1);
        // ‖U_A‖_2 ‖U_B‖_2 = √2 · √3
        assert!((sv.max() - 6f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn hs_inner_values() {
        let i3 = DenseOperator::identity(3);
        assert_eq!(hs_inner(&i3, &i3).unwrap(), c(3.0));
        assert_eq!(
            hs_inner(&DenseOperator::pauli(1), &DenseOperator::pauli(3)).unwrap(),
            c(0.0)
        );
        let mut rng = RngStream::new(8, 0).rng();
        let x = gaussian_matrix(3, 4, &mut rng);
        let direct: f64 = x.entries_row_major().iter().map(|z| z.norm_sqr()).sum();
        let ip = hs_inner(&x, &x).unwrap();
        assert!(ip.im.abs() < 1e-15 && (ip.re - direct).abs() < 1e-12);
        assert!(hs_inner(&x, &i3).is_err());
    }

    #[test]
    fn linear_entropy_values() {
        let pure = DenseOperator::projector(&DenseOperator::basis_ket(2, 0));
        assert_eq!(linear_entropy(&pure).unwrap(), 0.0);
        for d in [2usize, 3, 5] {
            let mixed = DenseOperator::identity(d).scale_real(1.0 / d as f64);
            assert!((linear_entropy(&mixed).unwrap() - (1.0 - 1.0 / d as f64)).abs() < 1e-15);
        }
        let rho = DenseOperator::from_real_diagonal(&[0.75, 0.25]);
        assert!((linear_entropy(&rho).unwrap() - 0.375).abs() < 1e-15);
        assert!(linear_entropy(&DenseOperator::zeros(2, 3)).is_err());
    }

    proptest! {
        #[test]
        fn swap_trick_holds(d in 1usize..=8, seed in any::<u64>()) {
            let mut rng = RngStream::new(seed, 0).rng();
            let x = gaussian_matrix(d, d, &mut rng);
            let y = gaussian_matrix(d, d, &mut rng);
            let lhs = (&swap_replica(d) * &kron(&x, &y)).trace();
            let rhs = (&x * &y).trace();
            prop_assert!((lhs - rhs).norm() < 1e-10);
        }

        #[test]
        fn partial_trace_keeps_density_matrices_valid(da in 1usize..=3, db in 1usize..=4, seed in any::<u64>()) {
            let mut rng = RngStream::new(seed, 1).rng();
            let dims = BipartiteDims::new(da, db).unwrap();
            let g = gaussian_matrix(dims.d(), dims.d(), &mut rng);
            let rho = &g * &g.adjoint();
            let rho = rho.scale_real(1.0 / rho.trace().re);
            for keep in [Factor::A, Factor::B] {
                let r = partial_trace(&rho, dims, keep).unwrap();
                prop_assert!((r.trace().re - 1.0).abs() < 1e-10);
                prop_assert!(r.hermitian_eigenvalues()[0] >= -1e-10);
            }
        }
    }
}
