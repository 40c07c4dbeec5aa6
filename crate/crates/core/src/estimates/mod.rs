//! Long-time averages of `G(t)`: the Haar value, the no-resonance estimates built
//! from reduced eigenstates, and the exact infinite-time average.
//!
//! For every Hamiltonian the four values are ordered,
//! `Ḡ^Haar ≥ Ḡ^NRC ≥ Ḡ^NRC⁺ ≥ Ḡ`, and [`hierarchy_report`] checks this.

mod averages;
mod bound;
mod cross;
mod gram;

pub use averages::{exact_time_average, nrc_plus_estimate};
pub use bound::{
    eigenstate_entanglement_profile, entanglement_deficits, equilibration_bound, max_entanglement,
    maximally_entangled_value, percentile, EquilibrationBound,
};
pub use gram::{gram_matrices, nrc_estimate, GramData};

use serde::Serialize;

use crate::error::Result;
use crate::linalg::BipartiteDims;
use crate::models::{NrcReport, SpectralData};

/// Slack allowed in the ordering checks.
pub const HIERARCHY_SLACK: f64 = 1e-8;

/// Average of `G` over Haar-random global unitaries,
/// `(d_A² − 1)(d_B² − 1)/(d² − 1)`.
pub fn haar_estimate(dims: BipartiteDims) -> f64 {
    let (da2, db2) = ((dims.d_a() * dims.d_a()) as f64, (dims.d_b() * dims.d_b()) as f64);
    let d2 = da2 * db2;
    if d2 == 1.0 {
        return 0.0;
    }
    (da2 - 1.0) * (db2 - 1.0) / (d2 - 1.0)
}

/// Limit of [`haar_estimate`] as `d_B → ∞` at fixed `d_A`: `1 − 1/d_A²`.
pub fn haar_asymptote(d_a: usize) -> f64 {
    1.0 - 1.0 / (d_a * d_a) as f64
}

/// Which of the three inequalities hold within [`HIERARCHY_SLACK`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HierarchyCheck {
    pub haar_ge_nrc: bool,
    pub nrc_ge_nrc_plus: bool,
    pub nrc_plus_ge_exact: bool,
}

impl HierarchyCheck {
    pub fn all(&self) -> bool {
        self.haar_ge_nrc && self.nrc_ge_nrc_plus && self.nrc_plus_ge_exact
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    pub model_tag: String,
    pub dims: BipartiteDims,
    pub haar: f64,
    pub nrc: f64,
    pub nrc_plus: f64,
    pub exact: f64,
    pub nrc_flags: NrcReport,
    pub ordering: HierarchyCheck,
}

impl EstimateReport {
    pub fn tagged(mut self, tag: impl Into<String>) -> Self {
        self.model_tag = tag.into();
        self
    }
}

/// All four estimates with the ordering check and resonance flags.
pub fn hierarchy_report(spec: &SpectralData, dims: BipartiteDims) -> Result<EstimateReport> {
    let haar = haar_estimate(dims);
    let nrc = nrc_estimate(spec, dims)?;
    let nrc_plus = nrc_plus_estimate(spec, dims)?;
    let exact = exact_time_average(spec, dims)?;
    let ordering = HierarchyCheck {
        haar_ge_nrc: haar >= nrc - HIERARCHY_SLACK,
        nrc_ge_nrc_plus: nrc >= nrc_plus - HIERARCHY_SLACK,
        nrc_plus_ge_exact: nrc_plus >= exact - HIERARCHY_SLACK,
    };
    Ok(EstimateReport {
        model_tag: String::new(),
        dims,
        haar,
        nrc,
        nrc_plus,
        exact,
        nrc_flags: spec.nrc_report(),
        ordering,
    })
}
