use std::ops::{Add, Index, Mul, Sub};

use nalgebra::DMatrix;

use super::{BipartiteDims, C64};
use crate::error::{Error, Result};

/// Dense complex matrix, optionally tagged with the bipartite cut it acts on.
///
/// States (kets as `d × 1` columns, density matrices), unitaries, Hamiltonians and
/// reduced operators all use this type. When a [`BipartiteDims`] tag is present the
/// operator is square with side `dims.d()`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    mat: DMatrix<C64>,
    dims: Option<BipartiteDims>,
}

impl DenseOperator {
    /// Builds an operator from entries listed row by row.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("operator shape must be positive".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} operator",
                entries.len()
            )));
        }
        Ok(Self {
            mat: DMatrix::from_row_slice(rows, cols, &entries),
            dims: None,
        })
    }

    pub fn from_matrix(mat: DMatrix<C64>) -> Self {
        Self { mat, dims: None }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self::from_matrix(DMatrix::from_fn(rows, cols, f))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_matrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_matrix(DMatrix::identity(n, n))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Column vector `|ψ⟩` from its amplitudes.
    pub fn ket(amplitudes: &[C64]) -> Self {
        Self::from_matrix(DMatrix::from_column_slice(amplitudes.len(), 1, amplitudes))
    }

    /// Computational basis vector `|index⟩` in dimension `dim`.
    pub fn basis_ket(dim: usize, index: usize) -> Self {
        Self::from_fn(dim, 1, |i, _| {
            if i == index {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Matrix unit `|i⟩⟨j|` in dimension `dim`.
    pub fn matrix_unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        m.mat[(i, j)] = C64::new(1.0, 0.0);
        m
    }

    /// Pauli matrix `σ_k`, with `σ_0 = I`.
    pub fn pauli(k: usize) -> Self {
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let entries = match k {
            0 => [one, z, z, one],
            1 => [z, one, one, z],
            2 => [z, -i, i, z],
            3 => [one, z, z, -one],
            _ => panic!("Pauli index {k} out of range 0..4"),
        };
        Self::from_row_major(2, 2, entries.to_vec()).expect("2x2 Pauli")
    }

    /// The operator `SWAP_{AB}` exchanging the two factors of `C^d ⊗ C^d`.
    pub fn swap(d: usize) -> Self {
        let dims = BipartiteDims::new(d, d).expect("positive dimension");
        super::swap_replica(d).with_dims(dims).expect("square d^2 operator")
    }

    /// `|ψ⟩⟨ψ|` for a column vector.
    pub fn projector(ket: &DenseOperator) -> Self {
        Self::from_matrix(&ket.mat * ket.mat.adjoint())
    }

    /// Attaches a bipartite tag; the operator must be square with side `dims.d()`.
    pub fn with_dims(mut self, dims: BipartiteDims) -> Result<Self> {
        if self.rows() != dims.d() || self.cols() != dims.d() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} operator cannot act on {dims}",
                self.rows(),
                self.cols()
            )));
        }
        self.dims = Some(dims);
        Ok(self)
    }

    pub fn dims(&self) -> Option<BipartiteDims> {
        self.dims
    }

    pub fn rows(&self) -> usize {
        self.mat.nrows()
    }

    pub fn cols(&self) -> usize {
        self.mat.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.mat[(i, j)] = value;
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn entries_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.mat[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self {
            mat: self.mat.adjoint(),
            dims: self.dims,
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            mat: self.mat.transpose(),
            dims: self.dims,
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            mat: &self.mat * factor,
            dims: self.dims,
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    /// Matrix product with a shape check.
    pub fn try_mul(&self, rhs: &DenseOperator) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(self * rhs)
    }

    /// `U X U†`.
    pub fn conjugate_by(&self, u: &DenseOperator) -> Self {
        u * &(self * &u.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// Hilbert-Schmidt (Frobenius) norm `‖X‖_2`.
    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &DenseOperator) -> f64 {
        assert_eq!(self.mat.shape(), other.mat.shape(), "shape mismatch");
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |(U†U - I)_{ij}|`; zero for an exact unitary.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let prod = self.mat.adjoint() * &self.mat;
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// `max |(X - X†)_{ij}|`.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() < tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() < tol
    }

    /// Errors unless the operator is unitary within `tol`.
    pub fn require_unitary(&self, tol: f64) -> Result<()> {
        let defect = self.unitarity_defect();
        if defect < tol {
            Ok(())
        } else {
            Err(Error::NotUnitary(defect))
        }
    }

    pub fn require_hermitian(&self, tol: f64) -> Result<()> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows(),
                cols: self.cols(),
            });
        }
        let defect = self.hermiticity_defect();
        if defect < tol {
            Ok(())
        } else {
            Err(Error::NotHermitian(defect))
        }
    }

    /// Eigenvalues of a Hermitian operator in ascending order.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut vals: Vec<f64> = self.mat.clone().symmetric_eigenvalues().iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        vals
    }

    /// Trace norm `‖X‖_1` of a Hermitian operator.
    pub fn hermitian_trace_norm(&self) -> f64 {
        self.hermitian_eigenvalues().iter().map(|v| v.abs()).sum()
    }
}

impl Index<(usize, usize)> for DenseOperator {
    type Output = C64;

    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.mat[idx]
    }
}

fn merged_dims(a: &DenseOperator, b: &DenseOperator) -> Option<BipartiteDims> {
    match (a.dims, b.dims) {
        (Some(x), Some(y)) if x == y => Some(x),
        (Some(x), None) | (None, Some(x)) if a.rows() == x.d() && b.cols() == x.d() => Some(x),
        _ => None,
    }
}

impl Mul<&DenseOperator> for &DenseOperator {
    type Output = DenseOperator;

    fn mul(self, rhs: &DenseOperator) -> DenseOperator {
        DenseOperator {
            mat: &self.mat * &rhs.mat,
            dims: merged_dims(self, rhs),
        }
    }
}

impl Add<&DenseOperator> for &DenseOperator {
    type Output = DenseOperator;

    fn add(self, rhs: &DenseOperator) -> DenseOperator {
        DenseOperator {
            mat: &self.mat + &rhs.mat,
            dims: merged_dims(self, rhs),
        }
    }
}

impl Sub<&DenseOperator> for &DenseOperator {
    type Output = DenseOperator;

    fn sub(self, rhs: &DenseOperator) -> DenseOperator {
        DenseOperator {
            mat: &self.mat - &rhs.mat,
            dims: merged_dims(self, rhs),
        }
    }
}
