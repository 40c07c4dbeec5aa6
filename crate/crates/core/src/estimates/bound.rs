use serde::Serialize;

use super::cross::CrossOperators;
use crate::error::{Error, Result};
use crate::linalg::BipartiteDims;
use crate::models::SpectralData;

/// `E(|φ_k⟩) = S_lin(Tr_χ̄ |φ_k⟩⟨φ_k|)` for every eigenvector, in eigenvalue order.
pub fn eigenstate_entanglement_profile(spec: &SpectralData, dims: BipartiteDims) -> Result<Vec<f64>> {
    let ops = CrossOperators::new(spec, dims, dims.smaller_factor())?;
    Ok((0..dims.d())
        .map(|k| 1.0 - ops.cross(k, k).iter().map(|z| z.norm_sqr()).sum::<f64>())
        .collect())
}

/// `E_max = 1 − 1/d_max`.
pub fn max_entanglement(dims: BipartiteDims) -> f64 {
    1.0 - 1.0 / dims.d_max() as f64
}

/// NRC value for an eigenbasis of maximally entangled states, `(1 − 1/d)²`.
pub fn maximally_entangled_value(dims: BipartiteDims) -> f64 {
    (1.0 - 1.0 / dims.d() as f64).powi(2)
}

/// Deficits `E_max − E(|φ_k⟩) ≥ 0`.
pub fn entanglement_deficits(profile: &[f64], dims: BipartiteDims) -> Vec<f64> {
    let e_max = max_entanglement(dims);
    profile.iter().map(|e| (e_max - e).max(0.0)).collect()
}

/// Linearly interpolated `q`-th percentile (`0 ≤ q ≤ 100`).
pub fn percentile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidInput("percentile of an empty sample".into()));
    }
    if !(0.0..=100.0).contains(&q) {
        return Err(Error::InvalidInput(format!("percentile {q} outside [0, 100]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64))
}

/// Bound on how far the NRC estimate sits from its maximally entangled value,
/// given that a fraction `alpha` of eigenstates is within `epsilon` of `E_max`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EquilibrationBound {
    pub epsilon: f64,
    pub alpha: f64,
    pub j: f64,
    pub k: f64,
    /// `αJ + (1 − α)K`.
    pub bound: f64,
    /// `(1 − 1/d)²`.
    pub me_value: f64,
    /// `|me_value − Ḡ^NRC|` once compared against an NRC estimate.
    pub deviation: Option<f64>,
}

impl EquilibrationBound {
    pub fn compare(mut self, nrc: f64) -> Self {
        self.deviation = Some((self.me_value - nrc).abs());
        self
    }

    /// Whether the recorded deviation respects the bound (`None` before [`Self::compare`]).
    pub fn holds(&self) -> Option<bool> {
        self.deviation.map(|dev| dev <= self.bound)
    }
}

/// `J = 6ε/d_min + 5ε²/2 + 2(λ² − 1)/d_max²`,
/// `K = (1 + 2/d_min)(1 − α) + 2/d + 4(ε + √ε)`, bound `αJ + (1 − α)K`.
pub fn equilibration_bound(profile: &[f64], dims: BipartiteDims, epsilon: f64) -> Result<EquilibrationBound> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidInput(format!("epsilon must be ≥ 0, got {epsilon}")));
    }
    if profile.len() != dims.d() {
        return Err(Error::DimensionMismatch(format!(
            "profile of length {} on {dims}",
            profile.len()
        )));
    }
    let deficits = entanglement_deficits(profile, dims);
    let alpha = deficits.iter().filter(|&&x| x <= epsilon).count() as f64 / deficits.len() as f64;
    let d_min = dims.d_min() as f64;
    let d_max = dims.d_max() as f64;
    let lambda = dims.lambda();
    let j = 6.0 * epsilon / d_min + 2.5 * epsilon * epsilon + 2.0 * (lambda * lambda - 1.0) / (d_max * d_max);
    let k = (1.0 + 2.0 / d_min) * (1.0 - alpha) + 2.0 / dims.d() as f64 + 4.0 * (epsilon + epsilon.sqrt());
    Ok(EquilibrationBound {
        epsilon,
        alpha,
        j,
        k,
        bound: alpha * j + (1.0 - alpha) * k,
        me_value: maximally_entangled_value(dims),
        deviation: None,
    })
}
