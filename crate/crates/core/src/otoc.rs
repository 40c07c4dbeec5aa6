//! Exact evaluation of the bipartite OTOC `G` and the quantities equal to it.
//!
//! All replica expressions are contracted through the realigned matrix
//! `M[(a, a′), (b, b′)] = U[(a b), (a′ b′)]`, so nothing of size `d² × d²` is ever
//! formed: `Tr(S_AA′ U^{⊗2} S_AA′ U^{†⊗2}) = ‖M M†‖_2²`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::channels;
use crate::error::{Error, Result};
use crate::linalg::{
    kron, linear_entropy, permute_bipartite, reduced_state, Axis, BipartiteDims, DenseOperator, Factor,
    IndexPermutation, C64,
};
use crate::models::eigendecompose;

/// Tolerance used when validating that an evolution is unitary.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Evolution plus cut, optionally at finite temperature.
#[derive(Clone, Debug)]
pub struct OtocRequest {
    pub unitary: DenseOperator,
    pub dims: BipartiteDims,
    /// Inverse temperature; `0` is the infinite-temperature OTOC.
    pub beta: f64,
    /// Needed to build `ρ_β` when `beta > 0`.
    pub hamiltonian: Option<DenseOperator>,
}

impl OtocRequest {
    pub fn new(unitary: DenseOperator, dims: BipartiteDims) -> Result<Self> {
        check_unitary(&unitary, dims)?;
        Ok(Self {
            unitary,
            dims,
            beta: 0.0,
            hamiltonian: None,
        })
    }

    pub fn thermal(mut self, beta: f64, hamiltonian: DenseOperator) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidInput(format!("beta must be finite and ≥ 0, got {beta}")));
        }
        if hamiltonian.rows() != self.dims.d() || hamiltonian.cols() != self.dims.d() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} Hamiltonian on {}",
                hamiltonian.rows(),
                hamiltonian.cols(),
                self.dims
            )));
        }
        hamiltonian.require_hermitian(1e-10 * hamiltonian.max_abs().max(1.0))?;
        self.beta = beta;
        self.hamiltonian = Some(hamiltonian);
        Ok(self)
    }

    /// `G` at the requested temperature.
    pub fn evaluate(&self) -> Result<f64> {
        if self.beta == 0.0 {
            g_exact(&self.unitary, self.dims)
        } else {
            g_thermal(self)
        }
    }
}

fn check_unitary(u: &DenseOperator, dims: BipartiteDims) -> Result<()> {
    if u.rows() != dims.d() || u.cols() != dims.d() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator on {dims}",
            u.rows(),
            u.cols()
        )));
    }
    u.require_unitary(UNITARITY_TOL)
}

/// Rows `(row_χ, col_χ)`, columns `(row_χ̄, col_χ̄)`.
fn realign_towards(u: &DenseOperator, dims: BipartiteDims, factor: Factor) -> DMatrix<C64> {
    let perm = match factor {
        Factor::A => IndexPermutation::REALIGN,
        Factor::B => IndexPermutation::new([Axis::RowB, Axis::ColB, Axis::RowA, Axis::ColA]).expect("bijection"),
    };
    permute_bipartite(u, dims, perm)
        .expect("shape checked by caller")
        .into_matrix()
}

fn frobenius_sq(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// `Tr(S_χχ′ U^{⊗2} S_χχ′ U^{†⊗2})`, contracted over the indices of `factor`.
pub fn replica_trace(u: &DenseOperator, dims: BipartiteDims, factor: Factor) -> Result<f64> {
    check_unitary(u, dims)?;
    let m = realign_towards(u, dims, factor);
    Ok(frobenius_sq(&(&m * m.adjoint())))
}

/// `G = 1 − Tr(S_χχ′ U^{⊗2} S_χχ′ U^{†⊗2}) / d²` using the replica of `factor`.
pub fn g_exact_via(u: &DenseOperator, dims: BipartiteDims, factor: Factor) -> Result<f64> {
    let d = dims.d() as f64;
    Ok(1.0 - replica_trace(u, dims, factor)? / (d * d))
}

/// The bipartite OTOC at infinite temperature.
///
/// Contracts over the smaller factor, costing `O(d_min⁴ d_max²)`.
pub fn g_exact(u: &DenseOperator, dims: BipartiteDims) -> Result<f64> {
    g_exact_via(u, dims, dims.smaller_factor())
}

/// `G = 1 − (1/d_χ²) Σ_ij ‖Λ(|i⟩⟨j|)‖_2²` with `Λ` the reduced dynamics on the
/// smaller factor.
pub fn g_reduced(u: &DenseOperator, dims: BipartiteDims) -> Result<f64> {
    check_unitary(u, dims)?;
    let ch = channels::reduced_channel(u, dims, dims.smaller_factor())?;
    let dc = ch.dim() as f64;
    let total: f64 = ch.action().iter().map(|x| x.frobenius_norm().powi(2)).sum();
    Ok(1.0 - total / (dc * dc))
}

/// As [`g_reduced`] but summing over a caller-supplied orthonormal operator basis
/// of the kept factor instead of matrix units.
pub fn g_reduced_in_basis(
    u: &DenseOperator,
    dims: BipartiteDims,
    keep: Factor,
    basis: &[DenseOperator],
) -> Result<f64> {
    check_unitary(u, dims)?;
    let ch = channels::reduced_channel(u, dims, keep)?;
    let dc = ch.dim();
    if basis.len() != dc * dc {
        return Err(Error::InvalidInput(format!(
            "operator basis needs {} elements, got {}",
            dc * dc,
            basis.len()
        )));
    }
    let mut total = 0.0;
    for b in basis {
        total += ch.apply(b)?.frobenius_norm().powi(2);
    }
    Ok(1.0 - total / (dc * dc) as f64)
}

/// Thermal generalization
/// `G_β = 1 − (1/d) Re Tr[(ρ_β ⊗ I) U^{†⊗2} S_AA′ U^{⊗2} S_AA′]`.
///
/// With `R = ρ_β U†`, `Q[(b, b′), (a, a′)] = R[(a′ b′), (a b)]` and `M` the
/// realignment of `U`, the trace equals `Tr(Q M M† M)`.
pub fn g_thermal(req: &OtocRequest) -> Result<f64> {
    let dims = req.dims;
    let u = &req.unitary;
    check_unitary(u, dims)?;
    let rho = if req.beta == 0.0 {
        DenseOperator::identity(dims.d()).scale_real(1.0 / dims.d() as f64)
    } else {
        let h = req
            .hamiltonian
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("a Hamiltonian is required when beta > 0".into()))?;
        eigendecompose(h, 0.0, 0.0)?.thermal_state(req.beta)
    };
    let r = &rho * &u.adjoint();
    let q = permute_bipartite(
        &r,
        dims,
        IndexPermutation::new([Axis::ColB, Axis::RowB, Axis::ColA, Axis::RowA]).expect("bijection"),
    )?
    .into_matrix();
    let m = realign_towards(u, dims, Factor::A);
    let k = if dims.d_a() <= dims.d_b() {
        (&m * m.adjoint()) * &m
    } else {
        &m * (m.adjoint() * &m)
    };
    // Tr(Q K) without forming the product.
    let mut t = C64::new(0.0, 0.0);
    for i in 0..q.nrows() {
        for j in 0..q.ncols() {
            t += q[(i, j)] * k[(j, i)];
        }
    }
    Ok(1.0 - t.re / dims.d() as f64)
}

/// `C = 1 − Re Tr(V(t)† W† V(t) W)/d` for `V = v_a ⊗ I_B`, `W = I_A ⊗ w_b` and
/// `V(t) = U† V U`.
pub fn commutator_otoc(
    u: &DenseOperator,
    v_a: &DenseOperator,
    w_b: &DenseOperator,
    dims: BipartiteDims,
) -> Result<f64> {
    check_unitary(u, dims)?;
    if v_a.rows() != dims.d_a() || w_b.rows() != dims.d_b() {
        return Err(Error::DimensionMismatch(format!(
            "local operators {}x{} and {}x{} on {dims}",
            v_a.rows(),
            v_a.cols(),
            w_b.rows(),
            w_b.cols()
        )));
    }
    v_a.require_unitary(UNITARITY_TOL)?;
    w_b.require_unitary(UNITARITY_TOL)?;
    Ok(commutator_otoc_unchecked(u, v_a, w_b, dims))
}

/// [`commutator_otoc`] without validation, for sampling loops over known-good inputs.
pub(crate) fn commutator_otoc_unchecked(
    u: &DenseOperator,
    v_a: &DenseOperator,
    w_b: &DenseOperator,
    dims: BipartiteDims,
) -> f64 {
    let v = kron(v_a, &DenseOperator::identity(dims.d_b()));
    let w = kron(&DenseOperator::identity(dims.d_a()), w_b);
    let vt = &(&u.adjoint() * &v) * u;
    let f = &(&(&vt.adjoint() * &w.adjoint()) * &vt) * &w;
    1.0 - f.trace().re / dims.d() as f64
}

/// Repeated evaluation of [`commutator_otoc`] for one fixed `U` and many `V`, `W`.
///
/// With `B_a` the rows of `U` whose A-index is `a`, `V(t) = Σ v_{aa′} B_a† B_{a′}`,
/// so after precomputing the `d_A²` products each `V(t)` costs `d_A² d²`.
/// `W† V(t) W` then only mixes B-indices within blocks.
pub(crate) struct CommutatorKernel<'a> {
    u: &'a DenseOperator,
    dims: BipartiteDims,
    products: Option<Vec<DMatrix<C64>>>,
}

impl<'a> CommutatorKernel<'a> {
    /// `precompute` pays `d_A d³` up front; worthwhile when many pairs share `U`.
    pub(crate) fn new(u: &'a DenseOperator, dims: BipartiteDims, precompute: bool) -> Self {
        let (da, db) = (dims.d_a(), dims.d_b());
        let products = (precompute && da * da <= dims.d()).then(|| {
            let m = u.as_matrix();
            let blocks: Vec<DMatrix<C64>> = (0..da).map(|a| m.rows(a * db, db).into_owned()).collect();
            (0..da * da)
                .into_par_iter()
                .map(|k| blocks[k / da].adjoint() * &blocks[k % da])
                .collect()
        });
        Self { u, dims, products }
    }

    fn evolved(&self, v_a: &DenseOperator) -> DMatrix<C64> {
        let (da, db, d) = (self.dims.d_a(), self.dims.d_b(), self.dims.d());
        let v = v_a.as_matrix();
        if let Some(products) = &self.products {
            let mut x = DMatrix::<C64>::zeros(d, d);
            for a in 0..da {
                for a2 in 0..da {
                    let c = v[(a, a2)];
                    if c != C64::new(0.0, 0.0) {
                        x.zip_apply(&products[a * da + a2], |xi, p| *xi += c * p);
                    }
                }
            }
            return x;
        }
        let m = self.u.as_matrix();
        let mut vu = DMatrix::<C64>::zeros(d, d);
        for a in 0..da {
            for a2 in 0..da {
                let c = v[(a, a2)];
                if c != C64::new(0.0, 0.0) {
                    let mut rows = vu.rows_mut(a * db, db);
                    rows.zip_apply(&m.rows(a2 * db, db), |r, p| *r += c * p);
                }
            }
        }
        m.adjoint() * vu
    }

    pub(crate) fn eval(&self, v_a: &DenseOperator, w_b: &DenseOperator) -> f64 {
        let (da, db, d) = (self.dims.d_a(), self.dims.d_b(), self.dims.d());
        let x = self.evolved(v_a);
        let w = w_b.as_matrix();
        // y = W† x, then z = y W, with W = I_A ⊗ w.
        let mut y = DMatrix::<C64>::zeros(d, d);
        for a in 0..da {
            let block = w.adjoint() * x.rows(a * db, db);
            y.rows_mut(a * db, db).copy_from(&block);
        }
        let mut z = DMatrix::<C64>::zeros(d, d);
        for a in 0..da {
            let block = y.columns(a * db, db) * w;
            z.columns_mut(a * db, db).copy_from(&block);
        }
        let overlap: f64 = x.iter().zip(z.iter()).map(|(p, q)| (p.conj() * q).re).sum();
        1.0 - overlap / d as f64
    }
}

/// Linear entropy of `σ_U = Tr_{BB′}|U⟩⟨U|` for `|U⟩ = (U ⊗ I)|φ⁺⟩`.
pub fn operator_entanglement(u: &DenseOperator, dims: BipartiteDims) -> Result<f64> {
    check_unitary(u, dims)?;
    // Regrouped as (A A′) ⊗ (B B′), the amplitudes of |U⟩ are the realigned entries.
    let m = realign_towards(u, dims, Factor::A);
    let norm = (dims.d() as f64).sqrt();
    let amps: Vec<C64> = (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
        .map(|(i, j)| m[(i, j)] / norm)
        .collect();
    let doubled = BipartiteDims::new(dims.d_a() * dims.d_a(), dims.d_b() * dims.d_b())?;
    let sigma = reduced_state(&DenseOperator::ket(&amps), doubled, Factor::A)?;
    linear_entropy(&sigma)
}

/// `e_P(U) = d/(√d+1)² (G_U + G_{U S} − G_S)` for a symmetric cut.
pub fn entangling_power(u: &DenseOperator, dims: BipartiteDims) -> Result<f64> {
    if !dims.is_symmetric() {
        return Err(Error::Unsupported(format!(
            "entangling power needs a symmetric cut, got {dims}"
        )));
    }
    check_unitary(u, dims)?;
    let swap = DenseOperator::swap(dims.d_a());
    let us = u * &swap;
    let gs: Vec<f64> = [u, &us, &swap]
        .par_iter()
        .map(|x| g_exact(x, dims))
        .collect::<Result<_>>()?;
    let d = dims.d() as f64;
    Ok(d / (d.sqrt() + 1.0).powi(2) * (gs[0] + gs[1] - gs[2]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_state, haar_unitary, RngStream};
    use crate::models::{build_hamiltonian, HamiltonianSpec};

    /// `S_AA′` on the doubled space ordered `(a1 b1 a2 b2)`.
    fn doubled_swap_a(dims: BipartiteDims) -> DenseOperator {
        let (da, db) = (dims.d_a(), dims.d_b());
        let d = dims.d();
        let mut s = DenseOperator::zeros(d * d, d * d);
        for a1 in 0..da {
            for b1 in 0..db {
                for a2 in 0..da {
                    for b2 in 0..db {
                        let from = (a1 * db + b1) * d + a2 * db + b2;
                        let to = (a2 * db + b1) * d + a1 * db + b2;
                        s.set(to, from, C64::new(1.0, 0.0));
                    }
                }
            }
        }
        s
    }

    fn brute_force_g(u: &DenseOperator, dims: BipartiteDims, rho: &DenseOperator) -> f64 {
        let s = doubled_swap_a(dims);
        let uu = kron(u, u);
        let x = kron(rho, &DenseOperator::identity(dims.d()));
        let prod = &(&(&(&x * &uu.adjoint()) * &s) * &uu) * &s;
        1.0 - prod.trace().re / dims.d() as f64
    }

    fn local_product(dims: BipartiteDims, rng: &mut impl rand::Rng) -> DenseOperator {
        kron(&haar_unitary(dims.d_a(), rng), &haar_unitary(dims.d_b(), rng))
    }

    #[test]
    fn identity_and_swap_values() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        assert!(g_exact(&DenseOperator::identity(4), dims).unwrap().abs() < 1e-14);
        let swap = DenseOperator::swap(2);
        assert!((g_exact(&swap, dims).unwrap() - 0.75).abs() < 1e-14);
        assert!((g_reduced(&swap, dims).unwrap() - 0.75).abs() < 1e-14);
        assert!((operator_entanglement(&swap, dims).unwrap() - 0.75).abs() < 1e-14);
        assert!(operator_entanglement(&DenseOperator::identity(4), dims).unwrap().abs() < 1e-14);
    }

    #[test]
    fn matches_doubled_space_trace() {
        let mut rng = RngStream::new(20, 0).rng();
        for dims in [BipartiteDims::new(2, 2).unwrap(), BipartiteDims::new(2, 3).unwrap()] {
            let rho = DenseOperator::identity(dims.d()).scale_real(1.0 / dims.d() as f64);
            for _ in 0..5 {
                let u = haar_unitary(dims.d(), &mut rng);
                let oracle = brute_force_g(&u, dims, &rho);
                assert!((g_exact(&u, dims).unwrap() - oracle).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn forms_agree_on_random_unitaries() {
        let mut rng = RngStream::new(21, 0).rng();
        for dims in [
            BipartiteDims::new(2, 3).unwrap(),
            BipartiteDims::new(2, 4).unwrap(),
            BipartiteDims::new(3, 2).unwrap(),
        ] {
            for _ in 0..10 {
                let u = haar_unitary(dims.d(), &mut rng);
                let g = g_exact(&u, dims).unwrap();
                let ga = g_exact_via(&u, dims, Factor::A).unwrap();
                let gb = g_exact_via(&u, dims, Factor::B).unwrap();
                assert!((ga - gb).abs() < 1e-10);
                assert!((g - g_reduced(&u, dims).unwrap()).abs() < 1e-10);
                assert!((g - operator_entanglement(&u, dims).unwrap()).abs() < 1e-10);
                let max = 1.0 - 1.0 / (dims.d_min() * dims.d_min()) as f64;
                assert!((-1e-12..=max + 1e-12).contains(&g));
            }
        }
    }

    #[test]
    fn reduced_form_is_basis_independent() {
        // Normalized Pauli basis on the qubit factor.
        let basis: Vec<DenseOperator> = (0..4)
            .map(|k| DenseOperator::pauli(k).scale_real(std::f64::consts::FRAC_1_SQRT_2))
            .collect();
        let dims = BipartiteDims::new(2, 3).unwrap();
        let mut rng = RngStream::new(22, 0).rng();
        for _ in 0..5 {
            let u = haar_unitary(6, &mut rng);
            let g = g_exact(&u, dims).unwrap();
            let gp = g_reduced_in_basis(&u, dims, Factor::A, &basis).unwrap();
            assert!((g - gp).abs() < 1e-10);
        }
    }

    #[test]
    fn product_unitaries_do_not_scramble() {
        let mut rng = RngStream::new(23, 0).rng();
        let dims = BipartiteDims::new(2, 3).unwrap();
        let u = local_product(dims, &mut rng);
        assert!(g_exact(&u, dims).unwrap().abs() < 1e-12);
        assert!(g_reduced(&u, dims).unwrap().abs() < 1e-12);
    }

    #[test]
    fn local_invariance() {
        let mut rng = RngStream::new(24, 0).rng();
        let dims = BipartiteDims::new(2, 4).unwrap();
        for _ in 0..5 {
            let u = haar_unitary(8, &mut rng);
            let l = local_product(dims, &mut rng);
            let r = local_product(dims, &mut rng);
            let dressed = &(&l * &u) * &r;
            let diff = g_exact(&u, dims).unwrap() - g_exact(&dressed, dims).unwrap();
            assert!(diff.abs() < 1e-10);
        }
    }

    #[test]
    fn time_reversal_symmetry() {
        let h = build_hamiltonian(&HamiltonianSpec::tfim(4, -1.05, 0.5)).unwrap();
        let s = eigendecompose(&h, 1e-9, 1e-9).unwrap();
        let dims = BipartiteDims::qubits(2, 2).unwrap();
        for t in [0.3, 1.7, 5.0] {
            let gp = g_exact(&s.evolution(t), dims).unwrap();
            let gm = g_exact(&s.evolution(-t), dims).unwrap();
            assert!((gp - gm).abs() < 1e-10);
        }
    }

    #[test]
    fn thermal_reduces_and_matches_oracle() {
        let spec = HamiltonianSpec::tfim(3, -1.05, 0.5);
        let h = build_hamiltonian(&spec).unwrap();
        let s = eigendecompose(&h, 1e-9, 1e-9).unwrap();
        let dims = BipartiteDims::qubits(1, 2).unwrap();
        let u = s.evolution(1.0);

        let req = OtocRequest::new(u.clone(), dims).unwrap();
        let g0 = g_thermal(&req).unwrap();
        assert!((g0 - g_exact(&u, dims).unwrap()).abs() < 1e-10);

        let req = req.thermal(1.0, h.clone()).unwrap();
        let oracle = brute_force_g(&u, dims, &s.thermal_state(1.0));
        assert!((req.evaluate().unwrap() - oracle).abs() < 1e-10);

        let dims_b = BipartiteDims::qubits(2, 1).unwrap();
        let req_b = OtocRequest::new(u.clone(), dims_b)
            .unwrap()
            .thermal(1.0, h.clone())
            .unwrap();
        let oracle_b = brute_force_g(&u, dims_b, &s.thermal_state(1.0));
        assert!((g_thermal(&req_b).unwrap() - oracle_b).abs() < 1e-10);

        let id = OtocRequest::new(DenseOperator::identity(8), dims)
            .unwrap()
            .thermal(2.0, h)
            .unwrap();
        assert!(g_thermal(&id).unwrap().abs() < 1e-12);
    }

    #[test]
    fn thermal_requires_hamiltonian() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        let mut req = OtocRequest::new(DenseOperator::identity(4), dims).unwrap();
        req.beta = 1.0;
        assert!(matches!(g_thermal(&req), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn kernel_matches_direct_commutator() {
        let mut rng = RngStream::new(70, 0).rng();
        for (da, db) in [(2, 3), (3, 2), (4, 2), (2, 4), (4, 4)] {
            let dims = BipartiteDims::new(da, db).unwrap();
            let u = haar_unitary(dims.d(), &mut rng);
            let with = CommutatorKernel::new(&u, dims, true);
            let without = CommutatorKernel::new(&u, dims, false);
            for _ in 0..5 {
                let v = haar_unitary(da, &mut rng);
                let w = haar_unitary(db, &mut rng);
                let direct = commutator_otoc_unchecked(&u, &v, &w, dims);
                assert!((with.eval(&v, &w) - direct).abs() < 1e-12);
                assert!((without.eval(&v, &w) - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn commutator_matches_norm_and_vanishes_for_identity() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        let mut rng = RngStream::new(25, 0).rng();
        for _ in 0..5 {
            let u = haar_unitary(4, &mut rng);
            let va = haar_unitary(2, &mut rng);
            let wb = haar_unitary(2, &mut rng);
            let c = commutator_otoc(&u, &va, &wb, dims).unwrap();
            let v = kron(&va, &DenseOperator::identity(2));
            let w = kron(&DenseOperator::identity(2), &wb);
            let vt = &(&u.adjoint() * &v) * &u;
            let comm = &(&vt * &w) - &(&w * &vt);
            let oracle = comm.frobenius_norm().powi(2) / 8.0;
            assert!((c - oracle).abs() < 1e-12);
            assert!((0.0..=2.0).contains(&c));
            let c0 = commutator_otoc(&DenseOperator::identity(4), &va, &wb, dims).unwrap();
            assert!(c0.abs() < 1e-12);
        }
    }

    #[test]
    fn haar_averaged_commutator_is_g() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        let mut rng = RngStream::new(26, 0).rng();
        let u = haar_unitary(4, &mut rng);
        let n = 10_000;
        let samples: Vec<f64> = (0..n)
            .map(|_| {
                let va = haar_unitary(2, &mut rng);
                let wb = haar_unitary(2, &mut rng);
                commutator_otoc(&u, &va, &wb, dims).unwrap()
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - g_exact(&u, dims).unwrap()).abs() < 3.0 * se);
    }

    #[test]
    fn entangling_power_closed_forms() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        assert!(entangling_power(&DenseOperator::identity(4), dims).unwrap().abs() < 1e-12);
        assert!(entangling_power(&DenseOperator::swap(2), dims).unwrap().abs() < 1e-12);
        let asym = BipartiteDims::new(2, 3).unwrap();
        assert!(matches!(
            entangling_power(&DenseOperator::identity(6), asym),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn entangling_power_matches_product_state_sampling() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        let mut rng = RngStream::new(27, 0).rng();
        let u = haar_unitary(4, &mut rng);
        let ep = entangling_power(&u, dims).unwrap();
        assert!(ep >= -1e-10);
        let n = 100_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let psi = kron(&haar_state(2, &mut rng), &haar_state(2, &mut rng));
            let out = &u * &psi;
            let e = linear_entropy(&reduced_state(&out, dims, Factor::A).unwrap()).unwrap();
            sum += e;
            sum_sq += e * e;
        }
        let mean = sum / n as f64;
        let var = (sum_sq - sum * sum / n as f64) / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - ep).abs() < 3.0 * se, "mean {mean} vs e_P {ep} (se {se})");
    }

    #[test]
    fn rejects_non_unitary() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        let m = DenseOperator::identity(4).scale_real(2.0);
        assert!(matches!(g_exact(&m, dims), Err(Error::NotUnitary(_))));
        assert!(matches!(g_reduced(&m, dims), Err(Error::NotUnitary(_))));
    }
}
