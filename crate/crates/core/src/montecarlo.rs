//! Ensemble sampling of the commutator OTOC, exhaustive Pauli averaging, the
//! entropy-production estimator, the two-copy swap protocol and concentration
//! experiments.
//!
//! Sampling is split into fixed blocks of [`BLOCK`] draws; block `b` uses
//! [`RngStream::block_rng`]`(b)`, so results are bit-identical for any thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{apply_two_copies, reduced_channel, ChannelRep};
use crate::error::{Error, Result};
use crate::estimates::haar_estimate;
use crate::linalg::{haar_state, haar_unitary, kron, linear_entropy, BipartiteDims, DenseOperator, Factor, RngStream};
use crate::otoc::{g_exact, CommutatorKernel, UNITARITY_TOL};

/// Draws per deterministic work unit.
pub const BLOCK: usize = 64;

/// Largest number of Pauli-string pairs [`pauli_exhaustive_average`] will enumerate.
pub const PAULI_ENUMERATION_LIMIT: u128 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    /// `V_A`, `W_B` Haar on each factor.
    HaarLocal,
    /// `V_A`, `W_B` uniformly random Pauli strings on qubit factors.
    PauliFactorized,
    /// The dynamics itself is Haar on the whole space, with Haar-local `V_A`, `W_B`.
    /// The reference is the Haar value rather than `G` of any fixed `U`.
    HaarGlobal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub dims: BipartiteDims,
    /// Qubit counts, used only by [`EnsembleKind::PauliFactorized`].
    pub n_sites_a: usize,
    pub n_sites_b: usize,
}

impl EnsembleSpec {
    pub fn haar_local(dims: BipartiteDims) -> Self {
        Self {
            kind: EnsembleKind::HaarLocal,
            dims,
            n_sites_a: 0,
            n_sites_b: 0,
        }
    }

    pub fn haar_global(dims: BipartiteDims) -> Self {
        Self {
            kind: EnsembleKind::HaarGlobal,
            dims,
            n_sites_a: 0,
            n_sites_b: 0,
        }
    }

    pub fn pauli(n_sites_a: usize, n_sites_b: usize) -> Result<Self> {
        let spec = Self {
            kind: EnsembleKind::PauliFactorized,
            dims: BipartiteDims::qubits(n_sites_a, n_sites_b)?,
            n_sites_a,
            n_sites_b,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Same kind and dims, with site counts filled in from the dims when they are
    /// powers of two.
    pub fn with_kind(kind: EnsembleKind, dims: BipartiteDims) -> Result<Self> {
        let sites = |d: usize| {
            if d.is_power_of_two() {
                d.trailing_zeros() as usize
            } else {
                0
            }
        };
        let spec = Self {
            kind,
            dims,
            n_sites_a: sites(dims.d_a()),
            n_sites_b: sites(dims.d_b()),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == EnsembleKind::PauliFactorized {
            let ok = |n: usize, d: usize| n < usize::BITS as usize && 1usize << n == d;
            if !ok(self.n_sites_a, self.dims.d_a()) || !ok(self.n_sites_b, self.dims.d_b()) {
                return Err(Error::InvalidInput(format!(
                    "Pauli ensemble with {}+{} qubits does not match {}",
                    self.n_sites_a, self.n_sites_b, self.dims
                )));
            }
        }
        Ok(())
    }
}

/// Uniform histogram bins on `[lo, hi]`; values outside fall in the end bins.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub bins: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        Self {
            bins: 64,
            lo: 0.0,
            hi: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    fn build(values: impl Iterator<Item = f64>, spec: HistogramSpec) -> Result<Self> {
        if spec.bins == 0 || spec.hi.partial_cmp(&spec.lo) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::InvalidInput(format!("bad histogram spec {spec:?}")));
        }
        let width = (spec.hi - spec.lo) / spec.bins as f64;
        let edges = (0..=spec.bins).map(|k| spec.lo + width * k as f64).collect();
        let mut counts = vec![0u64; spec.bins];
        for v in values {
            let k = ((v - spec.lo) / width).floor().clamp(0.0, (spec.bins - 1) as f64) as usize;
            counts[k] += 1;
        }
        Ok(Self { edges, counts })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub n_samples: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub reference: f64,
    /// Histogram of `|sample − reference|`.
    pub deviations: Histogram,
}

impl SampleStats {
    pub fn from_samples(samples: &[f64], reference: f64, hist: HistogramSpec) -> Result<Self> {
        let n = samples.len();
        if n == 0 {
            return Err(Error::InvalidInput("no samples".into()));
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let variance = if n > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Ok(Self {
            n_samples: n,
            mean,
            variance,
            reference,
            deviations: Histogram::build(samples.iter().map(|x| (x - reference).abs()), hist)?,
        })
    }

    pub fn std_error(&self) -> f64 {
        (self.variance / self.n_samples as f64).sqrt()
    }

    /// `|mean − reference|` in units of the standard error (0 when both vanish).
    pub fn z_score(&self) -> f64 {
        let diff = (self.mean - self.reference).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.std_error()
        }
    }
}

/// Runs `draw` `n` times, in order, with per-block generators.
fn sample_blocks<F>(n: usize, rng: RngStream, draw: F) -> Vec<f64>
where
    F: Fn(&mut rand_chacha::ChaCha20Rng) -> f64 + Sync,
{
    let blocks = n.div_ceil(BLOCK);
    let per_block: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut r = rng.block_rng(b as u64);
            let len = BLOCK.min(n - b * BLOCK);
            (0..len).map(|_| draw(&mut r)).collect()
        })
        .collect();
    per_block.concat()
}

fn random_pauli_string(n_sites: usize, rng: &mut impl rand::Rng) -> DenseOperator {
    (0..n_sites).fold(DenseOperator::identity(1), |acc, _| {
        kron(&acc, &DenseOperator::pauli(rng.random_range(0..4)))
    })
}

fn check_unitary_on(u: &DenseOperator, dims: BipartiteDims) -> Result<()> {
    if u.rows() != dims.d() || u.cols() != dims.d() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} unitary on {dims}",
            u.rows(),
            u.cols()
        )));
    }
    u.require_unitary(UNITARITY_TOL)
}

fn otoc_samples(u: &DenseOperator, ens: &EnsembleSpec, n: usize, rng: RngStream) -> Result<Vec<f64>> {
    ens.validate()?;
    check_unitary_on(u, ens.dims)?;
    if n == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let dims = ens.dims;
    let kernel = CommutatorKernel::new(u, dims, ens.kind != EnsembleKind::HaarGlobal);
    let samples = match ens.kind {
        EnsembleKind::HaarLocal => sample_blocks(n, rng, |r| {
            let v = haar_unitary(dims.d_a(), r);
            let w = haar_unitary(dims.d_b(), r);
            kernel.eval(&v, &w)
        }),
        EnsembleKind::PauliFactorized => sample_blocks(n, rng, |r| {
            let v = random_pauli_string(ens.n_sites_a, r);
            let w = random_pauli_string(ens.n_sites_b, r);
            kernel.eval(&v, &w)
        }),
        EnsembleKind::HaarGlobal => sample_blocks(n, rng, |r| {
            let global = haar_unitary(dims.d(), r);
            let v = haar_unitary(dims.d_a(), r);
            let w = haar_unitary(dims.d_b(), r);
            CommutatorKernel::new(&global, dims, false).eval(&v, &w)
        }),
    };
    Ok(samples)
}

fn otoc_reference(u: &DenseOperator, ens: &EnsembleSpec) -> Result<f64> {
    match ens.kind {
        EnsembleKind::HaarGlobal => Ok(haar_estimate(ens.dims)),
        _ => g_exact(u, ens.dims),
    }
}

/// `n` draws of `C_{V_A,W_B}` for `U = u`; the reference is `g_exact(u)`, or the
/// Haar value for [`EnsembleKind::HaarGlobal`].
pub fn sample_otoc(u: &DenseOperator, ens: &EnsembleSpec, n: usize, rng: RngStream) -> Result<SampleStats> {
    sample_otoc_with(u, ens, n, rng, HistogramSpec::default())
}

pub fn sample_otoc_with(
    u: &DenseOperator,
    ens: &EnsembleSpec,
    n: usize,
    rng: RngStream,
    hist: HistogramSpec,
) -> Result<SampleStats> {
    let samples = otoc_samples(u, ens, n, rng)?;
    SampleStats::from_samples(&samples, otoc_reference(u, ens)?, hist)
}

/// Exact average of `C_{V_A,W_B}` over every pair of Pauli strings.
pub fn pauli_exhaustive_average(u: &DenseOperator, ens: &EnsembleSpec) -> Result<f64> {
    if ens.kind != EnsembleKind::PauliFactorized {
        return Err(Error::InvalidInput(
            "exhaustive averaging needs a Pauli ensemble".into(),
        ));
    }
    ens.validate()?;
    let sites = (ens.n_sites_a + ens.n_sites_b) as u32;
    let count = 4u128.checked_pow(sites).unwrap_or(u128::MAX);
    if count > PAULI_ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            count,
            limit: PAULI_ENUMERATION_LIMIT,
        });
    }
    check_unitary_on(u, ens.dims)?;
    let strings = |n: usize| -> Vec<DenseOperator> {
        (0..1usize << (2 * n))
            .map(|code| {
                (0..n).fold(DenseOperator::identity(1), |acc, s| {
                    kron(&acc, &DenseOperator::pauli((code >> (2 * (n - 1 - s))) & 3))
                })
            })
            .collect()
    };
    let kernel = CommutatorKernel::new(u, ens.dims, true);
    let vs = strings(ens.n_sites_a);
    let ws = strings(ens.n_sites_b);
    let total: f64 = vs
        .par_iter()
        .map(|v| ws.iter().map(|w| kernel.eval(v, w)).sum::<f64>())
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(total / (vs.len() * ws.len()) as f64)
}

/// `(d_χ + 1)/d_χ`, the factor turning mean entropy production into `G`.
pub fn entropy_production_scale(d_chi: usize) -> f64 {
    (d_chi as f64 + 1.0) / d_chi as f64
}

fn entropy_samples(ch: &ChannelRep, n: usize, rng: RngStream) -> Vec<f64> {
    let dc = ch.dim();
    sample_blocks(n, rng, |r| {
        let psi = haar_state(dc, r);
        let out = ch
            .apply(&DenseOperator::projector(&psi))
            .expect("state on the channel input");
        linear_entropy(&out).expect("square output")
    })
}

/// `S_lin[Λ(|ψ⟩⟨ψ|)]` over Haar-random `|ψ⟩` on the kept factor; the reference is
/// `d_χ/(d_χ + 1) · G`.
pub fn entropy_production_estimate(
    u: &DenseOperator,
    dims: BipartiteDims,
    keep: Factor,
    n: usize,
    rng: RngStream,
) -> Result<SampleStats> {
    let (samples, reference) = entropy_draws(u, dims, keep, n, rng)?;
    SampleStats::from_samples(&samples, reference, HistogramSpec::default())
}

/// Entropy-production samples and their target `d_χ G/(d_χ + 1)`.
fn entropy_draws(
    u: &DenseOperator,
    dims: BipartiteDims,
    keep: Factor,
    n: usize,
    rng: RngStream,
) -> Result<(Vec<f64>, f64)> {
    check_unitary_on(u, dims)?;
    if n == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let ch = reduced_channel(u, dims, keep)?;
    let reference = g_exact(u, dims)? / entropy_production_scale(dims.dim(keep));
    Ok((entropy_samples(&ch, n, rng), reference))
}

/// Two-copy protocol: prepare `(|ψ⟩⟨ψ|)^{⊗2}`, apply `Λ ⊗ Λ`, and measure the swap
/// of the two copies, giving the output purity.
pub fn swap_protocol_sim(u: &DenseOperator, dims: BipartiteDims, keep: Factor, psi: &DenseOperator) -> Result<f64> {
    let dc = dims.dim(keep);
    if psi.rows() != dc || psi.cols() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} state for a factor of dimension {dc}",
            psi.rows(),
            psi.cols()
        )));
    }
    let norm = psi.frobenius_norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput(format!("state has norm {norm}, expected 1")));
    }
    let ch = reduced_channel(u, dims, keep)?;
    let rho = DenseOperator::projector(psi);
    let out = apply_two_copies(&ch, &kron(&rho, &rho))?;
    let measured = &crate::linalg::swap_replica(dc) * &out;
    Ok(measured.trace().re)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConcentrationVariant {
    /// `|C_{V_A,W_B} − G| ≥ ε` over Haar-local `V`, `W`; bound `2exp(−ε² d_max/64)`.
    Otoc,
    /// `|S_lin[Λ(|ψ⟩⟨ψ|)] − d_χ G/(d_χ+1)| ≥ ε` over Haar `|ψ⟩`; bound `exp(−d_χ ε²/64)`.
    State,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub epsilon: f64,
    pub empirical_p: f64,
    /// Binomial standard error of `empirical_p`.
    pub std_error: f64,
    pub bound: f64,
    /// The bound exceeds 1 and says nothing.
    pub vacuous: bool,
}

impl ConcentrationRow {
    /// `empirical_p ≤ bound + 3σ`.
    pub fn respects_bound(&self) -> bool {
        self.empirical_p <= self.bound + 3.0 * self.std_error
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationTable {
    pub variant: ConcentrationVariant,
    pub n_samples: usize,
    pub reference: f64,
    pub rows: Vec<ConcentrationRow>,
}

impl ConcentrationTable {
    fn from_samples(
        variant: ConcentrationVariant,
        samples: &[f64],
        reference: f64,
        eps_grid: &[f64],
        bound: impl Fn(f64) -> f64,
    ) -> Self {
        let n = samples.len() as f64;
        let rows = eps_grid
            .iter()
            .map(|&epsilon| {
                let p = samples.iter().filter(|x| (*x - reference).abs() >= epsilon).count() as f64 / n;
                let b = bound(epsilon);
                ConcentrationRow {
                    epsilon,
                    empirical_p: p,
                    std_error: (p * (1.0 - p) / n).sqrt(),
                    bound: b,
                    vacuous: b > 1.0,
                }
            })
            .collect();
        Self {
            variant,
            n_samples: samples.len(),
            reference,
            rows,
        }
    }
}

fn check_grid(eps_grid: &[f64]) -> Result<()> {
    if eps_grid.is_empty() {
        return Err(Error::InvalidInput("empty epsilon grid".into()));
    }
    if let Some(e) = eps_grid.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
        return Err(Error::InvalidInput(format!("epsilon {e} must be finite and ≥ 0")));
    }
    Ok(())
}

/// Exceedance fractions of `|C_{V_A,W_B} − G|` over a Haar-local ensemble.
pub fn concentration_experiment(
    u: &DenseOperator,
    ens: &EnsembleSpec,
    n: usize,
    eps_grid: &[f64],
    rng: RngStream,
) -> Result<ConcentrationTable> {
    Ok(sample_otoc_with_concentration(u, ens, n, eps_grid, rng)?.1)
}

/// [`sample_otoc`] and [`concentration_experiment`] from one set of draws.
pub fn sample_otoc_with_concentration(
    u: &DenseOperator,
    ens: &EnsembleSpec,
    n: usize,
    eps_grid: &[f64],
    rng: RngStream,
) -> Result<(SampleStats, ConcentrationTable)> {
    check_grid(eps_grid)?;
    if ens.kind != EnsembleKind::HaarLocal {
        return Err(Error::InvalidInput(
            "the OTOC concentration experiment needs a Haar-local ensemble".into(),
        ));
    }
    let samples = otoc_samples(u, ens, n, rng)?;
    let reference = g_exact(u, ens.dims)?;
    let d_max = ens.dims.d_max() as f64;
    let table = ConcentrationTable::from_samples(ConcentrationVariant::Otoc, &samples, reference, eps_grid, |e| {
        2.0 * (-e * e * d_max / 64.0).exp()
    });
    Ok((
        SampleStats::from_samples(&samples, reference, HistogramSpec::default())?,
        table,
    ))
}

/// Exceedance fractions of the entropy production `S_lin[Λ(|ψ⟩⟨ψ|)]` around its
/// mean over Haar states on the kept factor.
pub fn state_concentration_experiment(
    u: &DenseOperator,
    dims: BipartiteDims,
    keep: Factor,
    n: usize,
    eps_grid: &[f64],
    rng: RngStream,
) -> Result<ConcentrationTable> {
    Ok(entropy_production_with_concentration(u, dims, keep, n, eps_grid, rng)?.1)
}

/// [`entropy_production_estimate`] and [`state_concentration_experiment`] from one
/// set of draws.
pub fn entropy_production_with_concentration(
    u: &DenseOperator,
    dims: BipartiteDims,
    keep: Factor,
    n: usize,
    eps_grid: &[f64],
    rng: RngStream,
) -> Result<(SampleStats, ConcentrationTable)> {
    check_grid(eps_grid)?;
    let (samples, reference) = entropy_draws(u, dims, keep, n, rng)?;
    let dc = dims.dim(keep) as f64;
    let table = ConcentrationTable::from_samples(ConcentrationVariant::State, &samples, reference, eps_grid, |e| {
        (-dc * e * e / 64.0).exp()
    });
    Ok((
        SampleStats::from_samples(&samples, reference, HistogramSpec::default())?,
        table,
    ))
}
