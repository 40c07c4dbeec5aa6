use rayon::prelude::*;

use super::cross::{outer_sum_norm_sq, CrossOperators};
use crate::error::Result;
use crate::linalg::BipartiteDims;
use crate::models::SpectralData;

/// Projector estimate allowing degenerate levels.
///
/// With `D_lk = Σ_{p∈l, i∈k} vec(X_pi) vec(X_pi)†` over level classes `l, k`,
/// `Ḡ⁺ = 1 − (1/d²)(‖Σ_k D_kk‖² + Σ_{l≠k} ‖D_lk‖²)`: the zero-gap block keeps
/// every intra-level pair together and each ordered pair of distinct levels is its
/// own resonance class.
pub fn nrc_plus_estimate(spec: &SpectralData, dims: BipartiteDims) -> Result<f64> {
    let ops = CrossOperators::new(spec, dims, dims.smaller_factor())?;
    let levels = spec.level_classes();
    let n = levels.len();
    let members = |c: usize| levels.members(c).map(|k| k as u32);

    let intra: Vec<(u32, u32)> = (0..n)
        .flat_map(|c| members(c).flat_map(move |p| members(c).map(move |i| (p, i))))
        .collect();
    let diagonal_block = outer_sum_norm_sq(&ops, &intra);

    let off_diagonal: f64 = (0..n)
        .into_par_iter()
        .map(|l| {
            (0..n)
                .filter(|&k| k != l)
                .map(|k| {
                    let pairs: Vec<(u32, u32)> = members(l).flat_map(|p| members(k).map(move |i| (p, i))).collect();
                    outer_sum_norm_sq(&ops, &pairs)
                })
                .sum::<f64>()
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();

    let d = dims.d() as f64;
    Ok(1.0 - (diagonal_block + off_diagonal) / (d * d))
}

/// Infinite-time average of `G(t)`.
///
/// The average projects `U_t^{⊗2}(·)U_t^{†⊗2}` onto the commutant of
/// `H ⊗ I + I ⊗ H`, which keeps exactly the resonant terms
/// `E_p + E_q = E_r + E_s`. Grouping ordered pairs by gap, the surviving weight is
/// `Σ_ω ‖Σ_{(p,i)∈ω} vec(X_pi) vec(X_pi)†‖_2²`, one independent term per gap class.
pub fn exact_time_average(spec: &SpectralData, dims: BipartiteDims) -> Result<f64> {
    let ops = CrossOperators::new(spec, dims, dims.smaller_factor())?;
    let gaps = spec.gap_classes();
    let weights: Vec<f64> = (0..gaps.len())
        .into_par_iter()
        .map(|c| outer_sum_norm_sq(&ops, gaps.pairs(c)))
        .collect();
    let d = dims.d() as f64;
    Ok(1.0 - weights.iter().sum::<f64>() / (d * d))
}
