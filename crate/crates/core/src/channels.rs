//! Reduced dynamics as a CPTP map on one factor, and channel-level distances to the
//! completely depolarizing channel `T(ρ) = Tr(ρ) I/d_χ`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimates::EstimateReport;
use crate::linalg::{kron, BipartiteDims, DenseOperator, Factor, C64};
use crate::models::SpectralData;
use crate::otoc;

/// A linear map on `d × d` matrices stored by its action on matrix units.
#[derive(Clone, Debug)]
pub struct ChannelRep {
    dim: usize,
    /// Entry `i * dim + j` holds `Λ(|i⟩⟨j|)`.
    action: Vec<DenseOperator>,
    choi: DenseOperator,
}

impl ChannelRep {
    /// Wraps a precomputed action, checking shapes only.
    pub fn from_action(dim: usize, action: Vec<DenseOperator>) -> Result<Self> {
        if dim == 0 || action.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} matrix-unit images for dimension {dim}",
                action.len()
            )));
        }
        if let Some(bad) = action.iter().find(|x| x.rows() != dim || x.cols() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "image of shape {}x{} for dimension {dim}",
                bad.rows(),
                bad.cols()
            )));
        }
        let choi = build_choi(dim, &action);
        Ok(Self { dim, action, choi })
    }

    pub fn identity(dim: usize) -> Self {
        let action = (0..dim * dim)
            .map(|p| DenseOperator::matrix_unit(dim, p / dim, p % dim))
            .collect();
        Self::from_action(dim, action).expect("well-formed")
    }

    /// `T(ρ) = Tr(ρ) I/d`.
    pub fn depolarizing(dim: usize) -> Self {
        let mixed = DenseOperator::identity(dim).scale_real(1.0 / dim as f64);
        let zero = DenseOperator::zeros(dim, dim);
        let action = (0..dim * dim)
            .map(|p| {
                if p / dim == p % dim {
                    mixed.clone()
                } else {
                    zero.clone()
                }
            })
            .collect();
        Self::from_action(dim, action).expect("well-formed")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Images of the matrix units, row-major in `(i, j)`.
    pub fn action(&self) -> &[DenseOperator] {
        &self.action
    }

    /// `Λ(|i⟩⟨j|)`.
    pub fn image(&self, i: usize, j: usize) -> &DenseOperator {
        &self.action[i * self.dim + j]
    }

    pub fn choi(&self) -> &DenseOperator {
        &self.choi
    }

    /// `Σ_ij ρ_ij Λ(|i⟩⟨j|)`.
    pub fn apply(&self, rho: &DenseOperator) -> Result<DenseOperator> {
        if rho.rows() != self.dim || rho.cols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} input for a channel on dimension {}",
                rho.rows(),
                rho.cols(),
                self.dim
            )));
        }
        let mut out = DenseOperator::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let c = rho.get(i, j);
                if c != C64::new(0.0, 0.0) {
                    out = &out + &self.image(i, j).scale(c);
                }
            }
        }
        Ok(out)
    }

    /// Numerical defects of the CPTP and unitality conditions.
    pub fn certify(&self) -> CptpCertificate {
        let d = self.dim;
        let mut trace_defect = 0.0f64;
        let mut unit_sum = DenseOperator::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                trace_defect = trace_defect.max((self.image(i, j).trace() - target).norm());
            }
            unit_sum = &unit_sum + self.image(i, i);
        }
        let unitality_defect = unit_sum.max_abs_diff(&DenseOperator::identity(d));
        let eigs = self.choi.hermitian_eigenvalues();
        let choi_dims = BipartiteDims::new(d, d).expect("positive");
        let input_marginal =
            crate::linalg::partial_trace(&self.choi, choi_dims, Factor::B).expect("Choi state is square on d⊗d");
        CptpCertificate {
            trace_preservation_defect: trace_defect,
            unitality_defect,
            choi_hermiticity_defect: self.choi.hermiticity_defect(),
            choi_min_eigenvalue: eigs[0],
            choi_trace_defect: (self.choi.trace() - 1.0).norm(),
            choi_marginal_defect: input_marginal.max_abs_diff(&DenseOperator::identity(d).scale_real(1.0 / d as f64)),
        }
    }
}

fn build_choi(dim: usize, action: &[DenseOperator]) -> DenseOperator {
    let mut choi = DenseOperator::zeros(dim * dim, dim * dim);
    let scale = 1.0 / dim as f64;
    for i in 0..dim {
        for j in 0..dim {
            let img = &action[i * dim + j];
            for r in 0..dim {
                for c in 0..dim {
                    choi.set(r * dim + i, c * dim + j, img.get(r, c) * scale);
                }
            }
        }
    }
    choi.with_dims(BipartiteDims::new(dim, dim).expect("positive"))
        .expect("square d^2 operator")
}

/// Defects reported by [`ChannelRep::certify`]; all vanish for an exact unital CPTP map.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CptpCertificate {
    pub trace_preservation_defect: f64,
    pub unitality_defect: f64,
    pub choi_hermiticity_defect: f64,
    pub choi_min_eigenvalue: f64,
    pub choi_trace_defect: f64,
    /// Distance of the input-side marginal of the Choi state from `I/d`.
    pub choi_marginal_defect: f64,
}

impl CptpCertificate {
    pub fn is_cptp(&self, tol: f64) -> bool {
        self.trace_preservation_defect < tol
            && self.choi_hermiticity_defect < tol
            && self.choi_min_eigenvalue > -tol
            && self.choi_trace_defect < tol
            && self.choi_marginal_defect < tol
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.unitality_defect < tol
    }
}

/// `Λ(ρ) = Tr_χ̄[U (ρ ⊗ I/d_χ̄) U†]` on the factor `keep`.
pub fn reduced_channel(u: &DenseOperator, dims: BipartiteDims, keep: Factor) -> Result<ChannelRep> {
    if u.rows() != dims.d() || u.cols() != dims.d() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator on {dims}",
            u.rows(),
            u.cols()
        )));
    }
    u.require_unitary(otoc::UNITARITY_TOL)?;
    let db = dims.d_b();
    let (dk, de) = (dims.dim(keep), dims.dim(keep.other()));
    let m = u.as_matrix();
    let entry = |out_k: usize, out_e: usize, in_k: usize, in_e: usize| match keep {
        Factor::A => m[(out_k * db + out_e, in_k * db + in_e)],
        Factor::B => m[(out_e * db + out_k, in_e * db + in_k)],
    };
    // K_i[κ, (ε, e)] = U[(κ ε), (i e)], so Λ(|i⟩⟨j|) = K_i K_j† / d_χ̄.
    let blocks: Vec<nalgebra::DMatrix<C64>> = (0..dk)
        .map(|i| nalgebra::DMatrix::from_fn(dk, de * de, |kappa, col| entry(kappa, col / de, i, col % de)))
        .collect();
    let action: Vec<DenseOperator> = (0..dk * dk)
        .into_par_iter()
        .map(|p| {
            let (i, j) = (p / dk, p % dk);
            DenseOperator::from_matrix(&blocks[i] * blocks[j].adjoint() / C64::new(de as f64, 0.0))
        })
        .collect();
    ChannelRep::from_action(dk, action)
}

pub fn apply_channel(ch: &ChannelRep, rho: &DenseOperator) -> Result<DenseOperator> {
    ch.apply(rho)
}

/// `ρ_Λ = (Λ ⊗ id)(|φ⁺⟩⟨φ⁺|)`, output factor first.
pub fn choi_state(ch: &ChannelRep) -> DenseOperator {
    ch.choi.clone()
}

/// Both sides of `G = G_max − ‖ρ_Λ − ρ_T‖_2²`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ChoiDistance {
    pub g: f64,
    /// `1 − 1/d_χ²`.
    pub g_max: f64,
    /// `‖ρ_Λ − (I/d_χ)^{⊗2}‖_2²`.
    pub distance_sq: f64,
}

impl ChoiDistance {
    /// `|g_max − distance_sq − g|`.
    pub fn residual(&self) -> f64 {
        (self.g_max - self.distance_sq - self.g).abs()
    }
}

pub fn choi_distance_check(u: &DenseOperator, dims: BipartiteDims, keep: Factor) -> Result<ChoiDistance> {
    let ch = reduced_channel(u, dims, keep)?;
    let g = otoc::g_exact(u, dims)?;
    let dc = ch.dim();
    let reference = DenseOperator::identity(dc * dc).scale_real(1.0 / (dc * dc) as f64);
    let diff = ch.choi.as_matrix() - reference.as_matrix();
    Ok(ChoiDistance {
        g,
        g_max: 1.0 - 1.0 / (dc * dc) as f64,
        distance_sq: diff.iter().map(|z| z.norm_sqr()).sum(),
    })
}

/// Bounds on `‖Λ − T‖_◇` in terms of `G`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DiamondBounds {
    /// `√(G_max − G)`.
    pub lower: f64,
    /// `d_χ^{3/2} √(G_max − G)`.
    pub upper: f64,
}

pub fn diamond_bounds(u: &DenseOperator, dims: BipartiteDims, keep: Factor) -> Result<DiamondBounds> {
    let g = otoc::g_exact(u, dims)?;
    let dc = dims.dim(keep) as f64;
    let lower = (1.0 - 1.0 / (dc * dc) - g).max(0.0).sqrt();
    Ok(DiamondBounds {
        lower,
        upper: dc.powf(1.5) * lower,
    })
}

/// `‖ρ_Λ − ρ_T‖_1`, a lower bound on the diamond distance to `T`.
pub fn choi_trace_distance(ch: &ChannelRep) -> f64 {
    let dc = ch.dim();
    let reference = DenseOperator::identity(dc * dc).scale_real(1.0 / (dc * dc) as f64);
    (&ch.choi - &reference).hermitian_trace_norm()
}

/// Upper bound on the fraction of time for which `‖Λ_t − T‖_◇ ≥ ε`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MarkovBound {
    pub epsilon: f64,
    pub kappa: f64,
    /// Raw bound; may exceed 1.
    pub value: f64,
    /// Set when `value > 1`, i.e. the bound says nothing.
    pub vacuous: bool,
}

impl MarkovBound {
    /// The bound clamped to `[0, 1]` for display.
    pub fn display_value(&self) -> f64 {
        self.value.min(1.0)
    }
}

/// `2 d_χ^{3/2} κ/(ε d_χ̄)` with `κ = √(1 + (d_χ̄²/2)(Ḡ^Haar − Ḡ))`.
pub fn markov_fraction_bound(report: &EstimateReport, epsilon: f64, keep: Factor) -> Result<MarkovBound> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidInput(format!("epsilon must be > 0, got {epsilon}")));
    }
    let dk = report.dims.dim(keep) as f64;
    let de = report.dims.dim(keep.other()) as f64;
    let deficit = (report.haar - report.exact).max(0.0);
    let kappa = (1.0 + de * de / 2.0 * deficit).sqrt();
    let value = 2.0 * dk.powf(1.5) * kappa / (epsilon * de);
    Ok(MarkovBound {
        epsilon,
        kappa,
        value,
        vacuous: value > 1.0,
    })
}

/// Fraction of the sample times at which the trace-norm witness
/// `‖ρ_{Λ_t} − ρ_T‖_1` reaches `ε`.
///
/// The witness is below the diamond distance, so this underestimates the true
/// time fraction and must respect [`markov_fraction_bound`] up to finite-window
/// effects.
pub fn empirical_witness_fraction(
    spec: &SpectralData,
    dims: BipartiteDims,
    keep: Factor,
    epsilon: f64,
    times: &[f64],
) -> Result<f64> {
    if times.is_empty() {
        return Err(Error::InvalidInput("empty time grid".into()));
    }
    if spec.dim() != dims.d() {
        return Err(Error::DimensionMismatch(format!(
            "spectrum of dimension {} on {dims}",
            spec.dim()
        )));
    }
    let hits: Result<Vec<bool>> = times
        .par_iter()
        .map(|&t| {
            let ch = reduced_channel(&spec.evolution(t), dims, keep)?;
            Ok(choi_trace_distance(&ch) >= epsilon)
        })
        .collect();
    let hits = hits?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / times.len() as f64)
}

/// `(Λ ⊗ Λ)(X)` for an operator on two copies of the kept factor, by linearity over
/// matrix units.
pub(crate) fn apply_two_copies(ch: &ChannelRep, x: &DenseOperator) -> Result<DenseOperator> {
    let d = ch.dim();
    if x.rows() != d * d || x.cols() != d * d {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} input for two copies of dimension {d}",
            x.rows(),
            x.cols()
        )));
    }
    let mut out = DenseOperator::zeros(d * d, d * d);
    for i1 in 0..d {
        for i2 in 0..d {
            for j1 in 0..d {
                for j2 in 0..d {
                    let c = x.get(i1 * d + i2, j1 * d + j2);
                    if c != C64::new(0.0, 0.0) {
                        let term = kron(ch.image(i1, j1), ch.image(i2, j2)).scale(c);
                        out = &out + &term;
                    }
                }
            }
        }
    }
    Ok(out)
}
