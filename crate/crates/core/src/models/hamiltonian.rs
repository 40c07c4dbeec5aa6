use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DenseOperator, C64};
use crate::matrix_io;

/// Largest chain handled by the dense builder (`2^14 × 2^14` complex entries is 4 GiB).
pub const MAX_CHAIN_SITES: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Transverse-field Ising chain, parameters `g` (transverse) and `h` (longitudinal).
    Tfim,
    /// Nearest-neighbour XXZ chain, parameters `J` and `Delta`.
    Xxz,
    /// Dense Hermitian matrix read from a file in the [`matrix_io`] format.
    CustomMatrix,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    #[default]
    Open,
}

/// Which Hamiltonian to build.
///
/// Site 0 is the leftmost spin and the most significant bit of the basis index, so
/// cutting after the first `n_a` sites gives factor A of dimension `2^n_a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub kind: ModelKind,
    #[serde(default)]
    pub n_sites: usize,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom_path: Option<PathBuf>,
}

impl HamiltonianSpec {
    /// `H = −Σ σᶻσᶻ − Σ (g σˣ + h σᶻ)`.
    pub fn tfim(n_sites: usize, g: f64, h: f64) -> Self {
        Self {
            kind: ModelKind::Tfim,
            n_sites,
            params: BTreeMap::from([("g".to_string(), g), ("h".to_string(), h)]),
            boundary: Boundary::Open,
            custom_path: None,
        }
    }

    /// `H = −J Σ (σˣσˣ + σʸσʸ + Δ σᶻσᶻ)`.
    pub fn xxz(n_sites: usize, j: f64, delta: f64) -> Self {
        Self {
            kind: ModelKind::Xxz,
            n_sites,
            params: BTreeMap::from([("J".to_string(), j), ("Delta".to_string(), delta)]),
            boundary: Boundary::Open,
            custom_path: None,
        }
    }

    pub fn custom(path: impl Into<PathBuf>) -> Self {
        Self {
            kind: ModelKind::CustomMatrix,
            n_sites: 0,
            params: BTreeMap::new(),
            boundary: Boundary::Open,
            custom_path: Some(path.into()),
        }
    }

    fn expected_params(&self) -> &'static [&'static str] {
        match self.kind {
            ModelKind::Tfim => &["g", "h"],
            ModelKind::Xxz => &["J", "Delta"],
            ModelKind::CustomMatrix => &[],
        }
    }

    /// Checks site count, parameter names and the custom path without building anything.
    pub fn validate(&self) -> Result<()> {
        let expected = self.expected_params();
        for key in self.params.keys() {
            if !expected.contains(&key.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "unknown parameter `{key}` for {:?} (expected {expected:?})",
                    self.kind
                )));
            }
        }
        for key in expected {
            match self.params.get(*key) {
                None => {
                    return Err(Error::InvalidInput(format!(
                        "missing parameter `{key}` for {:?}",
                        self.kind
                    )))
                }
                Some(v) if !v.is_finite() => {
                    return Err(Error::InvalidInput(format!("parameter `{key}` is not finite")))
                }
                Some(_) => {}
            }
        }
        match self.kind {
            ModelKind::Tfim | ModelKind::Xxz => {
                if !(2..=MAX_CHAIN_SITES).contains(&self.n_sites) {
                    return Err(Error::InvalidInput(format!(
                        "chain models need 2 ≤ n_sites ≤ {MAX_CHAIN_SITES}, got {}",
                        self.n_sites
                    )));
                }
            }
            ModelKind::CustomMatrix => {
                if self.custom_path.is_none() {
                    return Err(Error::InvalidInput("custom-matrix model requires custom_path".into()));
                }
            }
        }
        Ok(())
    }

    fn param(&self, key: &str) -> f64 {
        self.params[key]
    }
}

/// Dense matrix of the Hamiltonian described by `spec`.
pub fn build_hamiltonian(spec: &HamiltonianSpec) -> Result<DenseOperator> {
    spec.validate()?;
    match spec.kind {
        ModelKind::Tfim => Ok(tfim(spec.n_sites, spec.param("g"), spec.param("h"))),
        ModelKind::Xxz => Ok(xxz(spec.n_sites, spec.param("J"), spec.param("Delta"))),
        ModelKind::CustomMatrix => {
            let path = spec.custom_path.as_ref().expect("validated above");
            let h = matrix_io::load_matrix(path)?;
            let scale = h.max_abs().max(1.0);
            h.require_hermitian(1e-10 * scale)?;
            Ok(h)
        }
    }
}

/// `+1` for spin up (bit 0), `−1` for spin down.
fn z(state: usize, n: usize, site: usize) -> f64 {
    if state >> (n - 1 - site) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn flip(state: usize, n: usize, site: usize) -> usize {
    state ^ (1 << (n - 1 - site))
}

fn tfim(n: usize, g: f64, h: f64) -> DenseOperator {
    let d = 1 << n;
    let mut m = DenseOperator::zeros(d, d);
    for s in 0..d {
        let mut diag = 0.0;
        for i in 0..n - 1 {
            diag -= z(s, n, i) * z(s, n, i + 1);
        }
        for i in 0..n {
            diag -= h * z(s, n, i);
            let t = flip(s, n, i);
            m.set(t, s, m.get(t, s) - C64::new(g, 0.0));
        }
        m.set(s, s, m.get(s, s) + C64::new(diag, 0.0));
    }
    m
}

fn xxz(n: usize, j: f64, delta: f64) -> DenseOperator {
    let d = 1 << n;
    let mut m = DenseOperator::zeros(d, d);
    for s in 0..d {
        let mut diag = 0.0;
        for i in 0..n - 1 {
            let (zi, zj) = (z(s, n, i), z(s, n, i + 1));
            diag -= j * delta * zi * zj;
            // σˣσˣ + σʸσʸ hops anti-aligned neighbours with amplitude 2.
            if zi != zj {
                let t = flip(flip(s, n, i), n, i + 1);
                m.set(t, s, m.get(t, s) - C64::new(2.0 * j, 0.0));
            }
        }
        m.set(s, s, m.get(s, s) + C64::new(diag, 0.0));
    }
    m
}
