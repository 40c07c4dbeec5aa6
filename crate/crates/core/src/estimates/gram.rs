use nalgebra::DMatrix;
use rayon::prelude::*;

use super::cross::CrossOperators;
use crate::error::Result;
use crate::linalg::{BipartiteDims, Factor};
use crate::models::SpectralData;

/// Overlaps `R^χ_kl = Tr(ρ_k^χ ρ_l^χ)` of the reduced eigenstates on both factors.
#[derive(Clone, Debug)]
pub struct GramData {
    pub r_a: DMatrix<f64>,
    pub r_b: DMatrix<f64>,
    /// Reduced purities `R_kk`, equal on both sides.
    pub diag: Vec<f64>,
}

impl GramData {
    pub fn get(&self, factor: Factor) -> &DMatrix<f64> {
        match factor {
            Factor::A => &self.r_a,
            Factor::B => &self.r_b,
        }
    }

    /// `R^χ / d_χ̄`, which is doubly stochastic.
    pub fn rescaled(&self, factor: Factor, dims: BipartiteDims) -> DMatrix<f64> {
        self.get(factor) / dims.dim(factor.other()) as f64
    }
}

/// Builds both Gram matrices from cross-operators on the smaller factor χ:
/// `R^χ_kl = Re⟨X_kk, X_ll⟩` and `R^χ̄_kl = ‖X_kl‖_2²`.
pub fn gram_matrices(spec: &SpectralData, dims: BipartiteDims) -> Result<GramData> {
    let small = dims.smaller_factor();
    let ops = CrossOperators::new(spec, dims, small)?;
    let d = dims.d();
    let side = ops.side();

    let mut states = DMatrix::zeros(side * side, d);
    for k in 0..d {
        states.column_mut(k).copy_from_slice(ops.cross(k, k).as_slice());
    }
    let overlaps = states.adjoint() * &states;
    let r_small = DMatrix::from_fn(d, d, |k, l| overlaps[(k, l)].re);

    let rows: Vec<Vec<f64>> = (0..d)
        .into_par_iter()
        .map(|k| {
            (0..d)
                .map(|l| {
                    if l < k {
                        0.0
                    } else {
                        ops.cross(k, l).iter().map(|z| z.norm_sqr()).sum()
                    }
                })
                .collect()
        })
        .collect();
    let r_large = DMatrix::from_fn(d, d, |k, l| if l >= k { rows[k][l] } else { rows[l][k] });

    let diag = (0..d).map(|k| r_small[(k, k)]).collect();
    let (r_a, r_b) = match ops.factor() {
        Factor::A => (r_small, r_large),
        Factor::B => (r_large, r_small),
    };
    Ok(GramData { r_a, r_b, diag })
}

fn frobenius_sq(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x * x).sum()
}

/// `1 − (1/d²) Σ_χ (‖R^χ‖_2² − ½‖R_D^χ‖_2²)`, evaluated for the solver's eigenbasis
/// whether or not the spectrum is actually free of resonances.
pub fn nrc_estimate(spec: &SpectralData, dims: BipartiteDims) -> Result<f64> {
    let gram = gram_matrices(spec, dims)?;
    Ok(nrc_from_gram(&gram, dims))
}

pub(crate) fn nrc_from_gram(gram: &GramData, dims: BipartiteDims) -> f64 {
    let d = dims.d() as f64;
    let diag_a: f64 = (0..gram.r_a.nrows()).map(|k| gram.r_a[(k, k)].powi(2)).sum();
    let diag_b: f64 = (0..gram.r_b.nrows()).map(|k| gram.r_b[(k, k)].powi(2)).sum();
    let total = frobenius_sq(&gram.r_a) - 0.5 * diag_a + frobenius_sq(&gram.r_b) - 0.5 * diag_b;
    1.0 - total / (d * d)
}
