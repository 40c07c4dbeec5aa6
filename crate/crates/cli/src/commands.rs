use std::time::Instant;

use anyhow::Context;
use bipartite_otoc::channels::{
    choi_trace_distance, diamond_bounds, markov_fraction_bound, reduced_channel, MarkovBound,
};
use bipartite_otoc::estimates::{
    eigenstate_entanglement_profile, entanglement_deficits, equilibration_bound, haar_asymptote, hierarchy_report,
    percentile, EquilibrationBound, EstimateReport,
};
use bipartite_otoc::models::{build_hamiltonian, eigendecompose, HamiltonianSpec, SpectralData};
use bipartite_otoc::montecarlo::{
    entropy_production_estimate, entropy_production_scale, entropy_production_with_concentration,
    pauli_exhaustive_average, sample_otoc, sample_otoc_with_concentration, ConcentrationTable, EnsembleKind,
    EnsembleSpec, SampleStats, PAULI_ENUMERATION_LIMIT,
};
use bipartite_otoc::otoc::{g_exact, OtocRequest};
use bipartite_otoc::{BipartiteDims, DenseOperator, Factor, RngStream};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Command, RunConfig};

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Clone, Debug, Serialize)]
pub struct CurveRow {
    pub t: f64,
    pub g: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundRow {
    pub percentile: f64,
    #[serde(flatten)]
    pub bound: EquilibrationBound,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChannelRow {
    pub t: f64,
    pub g: f64,
    pub diamond_lower: f64,
    pub diamond_upper: f64,
    /// `‖ρ_Λ − ρ_T‖_1`.
    pub choi_witness: f64,
    pub cptp: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Figure1Row {
    pub model: String,
    /// Absent for the `n → ∞` Haar asymptote.
    pub n: Option<usize>,
    pub estimator: String,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Figure1Check {
    pub model: String,
    pub n: usize,
    pub ordering_holds: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Payload {
    OtocCurve {
        dims: BipartiteDims,
        beta: f64,
        rows: Vec<CurveRow>,
    },
    Estimates {
        report: EstimateReport,
        bounds: Vec<BoundRow>,
    },
    Sample {
        time: f64,
        ensemble: EnsembleSpec,
        stats: SampleStats,
        /// Exact Pauli-pair average when the ensemble is Pauli and small enough.
        exhaustive: Option<f64>,
        /// Exceedance table for Haar-local ensembles.
        concentration: Option<ConcentrationTable>,
    },
    Entropy {
        time: f64,
        keep: Factor,
        dims: BipartiteDims,
        stats: SampleStats,
        /// `(d_χ + 1)/d_χ` times the sample mean.
        scaled_mean: f64,
        g_exact: f64,
        concentration: Option<ConcentrationTable>,
    },
    Channel {
        keep: Factor,
        dims: BipartiteDims,
        rows: Vec<ChannelRow>,
        markov: Vec<MarkovBound>,
    },
    Figure1 {
        d_a: usize,
        rows: Vec<Figure1Row>,
        checks: Vec<Figure1Check>,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct ResultRecord {
    pub schema_version: String,
    pub config_echo: RunConfig,
    pub payload: Payload,
    pub wall_time_seconds: f64,
}

struct Prepared {
    hamiltonian: DenseOperator,
    spectrum: SpectralData,
    dims: BipartiteDims,
}

fn prepare(cfg: &RunConfig) -> anyhow::Result<Prepared> {
    let hamiltonian = build_hamiltonian(&cfg.model).context("building the model")?;
    let dims = cfg.cut.resolve(hamiltonian.rows())?;
    let spectrum = eigendecompose(&hamiltonian, cfg.tolerances.tol_level, cfg.tolerances.tol_gap)
        .context("diagonalizing the model")?;
    Ok(Prepared {
        hamiltonian,
        spectrum,
        dims,
    })
}

fn rng(cfg: &RunConfig) -> RngStream {
    RngStream::new(cfg.seed, cfg.stream_id)
}

/// Runs the configured command and wraps the payload with the config echo and timing.
pub fn run(cfg: &RunConfig) -> anyhow::Result<ResultRecord> {
    cfg.validate()?;
    let start = Instant::now();
    let payload = match cfg.command {
        Command::OtocCurve => otoc_curve(cfg)?,
        Command::Estimates => estimates(cfg)?,
        Command::Sample => sample(cfg)?,
        Command::Entropy => entropy(cfg)?,
        Command::Channel => channel(cfg)?,
        Command::Figure1 => figure1(cfg)?,
    };
    Ok(ResultRecord {
        schema_version: SCHEMA_VERSION.to_string(),
        config_echo: cfg.clone(),
        payload,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

fn with_command(cfg: &RunConfig, command: Command) -> RunConfig {
    RunConfig { command, ..cfg.clone() }
}

pub fn run_otoc_curve(cfg: &RunConfig) -> anyhow::Result<ResultRecord> {
    run(&with_command(cfg, Command::OtocCurve))
}

pub fn run_estimates(cfg: &RunConfig) -> anyhow::Result<ResultRecord> {
    run(&with_command(cfg, Command::Estimates))
}

pub fn run_sample(cfg: &RunConfig) -> anyhow::Result<ResultRecord> {
    run(&with_command(cfg, Command::Sample))
}

pub fn run_entropy(cfg: &RunConfig) -> anyhow::Result<ResultRecord> {
    run(&with_command(cfg, Command::Entropy))
}

pub fn run_channel(cfg: &RunConfig) -> anyhow::Result<ResultRecord> {
    run(&with_command(cfg, Command::Channel))
}

pub fn run_figure1(cfg: &RunConfig) -> anyhow::Result<ResultRecord> {
    run(&with_command(cfg, Command::Figure1))
}

fn otoc_curve(cfg: &RunConfig) -> anyhow::Result<Payload> {
    let p = prepare(cfg)?;
    let rows: anyhow::Result<Vec<CurveRow>> = cfg
        .times
        .points()
        .into_par_iter()
        .map(|t| {
            let u = p.spectrum.evolution(t);
            let g = if cfg.beta == 0.0 {
                g_exact(&u, p.dims)?
            } else {
                OtocRequest::new(u, p.dims)?
                    .thermal(cfg.beta, p.hamiltonian.clone())?
                    .evaluate()?
            };
            Ok(CurveRow { t, g })
        })
        .collect();
    Ok(Payload::OtocCurve {
        dims: p.dims,
        beta: cfg.beta,
        rows: rows?,
    })
}

fn report_for(
    spectrum: &SpectralData,
    dims: BipartiteDims,
    spec: &HamiltonianSpec,
    eq_tol: f64,
) -> anyhow::Result<EstimateReport> {
    let mut report = hierarchy_report(spectrum, dims)?.tagged(model_tag(spec));
    // Re-check the ordering at the configured slack.
    report.ordering.haar_ge_nrc = report.haar >= report.nrc - eq_tol;
    report.ordering.nrc_ge_nrc_plus = report.nrc >= report.nrc_plus - eq_tol;
    report.ordering.nrc_plus_ge_exact = report.nrc_plus >= report.exact - eq_tol;
    Ok(report)
}

fn model_tag(spec: &HamiltonianSpec) -> String {
    let params: Vec<String> = spec.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    match &spec.custom_path {
        Some(path) => format!("custom-matrix:{}", path.display()),
        None => format!(
            "{}:n={}:{}",
            serde_json::to_value(spec.kind)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default(),
            spec.n_sites,
            params.join(",")
        ),
    }
}

fn estimates(cfg: &RunConfig) -> anyhow::Result<Payload> {
    let p = prepare(cfg)?;
    let report = report_for(&p.spectrum, p.dims, &cfg.model, cfg.tolerances.eq_tol)?;
    let profile = eigenstate_entanglement_profile(&p.spectrum, p.dims)?;
    let deficits = entanglement_deficits(&profile, p.dims);
    let bounds = cfg
        .percentiles
        .iter()
        .map(|&q| {
            let eps = percentile(&deficits, q)?;
            let bound = equilibration_bound(&profile, p.dims, eps)?.compare(report.nrc);
            Ok(BoundRow { percentile: q, bound })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(Payload::Estimates { report, bounds })
}

fn sample(cfg: &RunConfig) -> anyhow::Result<Payload> {
    let p = prepare(cfg)?;
    let ensemble = EnsembleSpec::with_kind(cfg.ensemble.kind, p.dims).context("ensemble")?;
    let u = p.spectrum.evolution(cfg.time);
    let (stats, concentration) = if ensemble.kind == EnsembleKind::HaarLocal && !cfg.epsilons.is_empty() {
        let (stats, table) = sample_otoc_with_concentration(&u, &ensemble, cfg.n_samples, &cfg.epsilons, rng(cfg))?;
        (stats, Some(table))
    } else {
        (sample_otoc(&u, &ensemble, cfg.n_samples, rng(cfg))?, None)
    };
    let exhaustive = if ensemble.kind == EnsembleKind::PauliFactorized
        && 4u128.pow((ensemble.n_sites_a + ensemble.n_sites_b) as u32) <= PAULI_ENUMERATION_LIMIT
    {
        Some(pauli_exhaustive_average(&u, &ensemble)?)
    } else {
        None
    };
    Ok(Payload::Sample {
        time: cfg.time,
        ensemble,
        stats,
        exhaustive,
        concentration,
    })
}

fn entropy(cfg: &RunConfig) -> anyhow::Result<Payload> {
    let p = prepare(cfg)?;
    let u = p.spectrum.evolution(cfg.time);
    let keep = cfg.keep.unwrap_or(p.dims.smaller_factor());
    let (stats, concentration) = if cfg.epsilons.is_empty() {
        (
            entropy_production_estimate(&u, p.dims, keep, cfg.n_samples, rng(cfg))?,
            None,
        )
    } else {
        let (stats, table) =
            entropy_production_with_concentration(&u, p.dims, keep, cfg.n_samples, &cfg.epsilons, rng(cfg))?;
        (stats, Some(table))
    };
    let scaled_mean = stats.mean * entropy_production_scale(p.dims.dim(keep));
    Ok(Payload::Entropy {
        time: cfg.time,
        keep,
        dims: p.dims,
        g_exact: g_exact(&u, p.dims)?,
        stats,
        scaled_mean,
        concentration,
    })
}

fn channel(cfg: &RunConfig) -> anyhow::Result<Payload> {
    let p = prepare(cfg)?;
    let keep = cfg.keep.unwrap_or(p.dims.smaller_factor());
    let rows: anyhow::Result<Vec<ChannelRow>> = cfg
        .times
        .points()
        .into_par_iter()
        .map(|t| {
            let u = p.spectrum.evolution(t);
            let bounds = diamond_bounds(&u, p.dims, keep)?;
            let ch = reduced_channel(&u, p.dims, keep)?;
            let cert = ch.certify();
            Ok(ChannelRow {
                t,
                g: g_exact(&u, p.dims)?,
                diamond_lower: bounds.lower,
                diamond_upper: bounds.upper,
                choi_witness: choi_trace_distance(&ch),
                cptp: cert.is_cptp(1e-10) && cert.is_unital(1e-10),
            })
        })
        .collect();
    let report = report_for(&p.spectrum, p.dims, &cfg.model, cfg.tolerances.eq_tol)?;
    let markov = cfg
        .epsilons
        .iter()
        .map(|&eps| markov_fraction_bound(&report, eps, keep))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Payload::Channel {
        keep,
        dims: p.dims,
        rows: rows?,
        markov,
    })
}

fn figure1_step(
    cfg: &RunConfig,
    n: usize,
    rows: &mut Vec<Figure1Row>,
    checks: &mut Vec<Figure1Check>,
) -> anyhow::Result<()> {
    let dims = BipartiteDims::qubits(1, n - 1)?;
    for (name, spec) in figure1_models(n) {
        let h = build_hamiltonian(&spec)?;
        let s = eigendecompose(&h, cfg.tolerances.tol_level, cfg.tolerances.tol_gap)?;
        let r = report_for(&s, dims, &spec, cfg.tolerances.eq_tol)?;
        for (estimator, value) in [
            ("haar", r.haar),
            ("nrc", r.nrc),
            ("nrc-plus", r.nrc_plus),
            ("exact", r.exact),
        ] {
            rows.push(Figure1Row {
                model: name.into(),
                n: Some(n),
                estimator: estimator.into(),
                value,
            });
        }
        checks.push(Figure1Check {
            model: name.into(),
            n,
            ordering_holds: r.ordering.all(),
        });
    }
    Ok(())
}

/// The three reference models at chain length `n`.
pub fn figure1_models(n: usize) -> [(&'static str, HamiltonianSpec); 3] {
    [
        ("tfim-chaotic", HamiltonianSpec::tfim(n, -1.05, 0.5)),
        ("tfim-integrable", HamiltonianSpec::tfim(n, -1.05, 0.0)),
        ("xxz", HamiltonianSpec::xxz(n, 0.4, 2.5)),
    ]
}

fn figure1(cfg: &RunConfig) -> anyhow::Result<Payload> {
    let mut n_values = cfg.figure1.n_values.clone();
    n_values.sort_unstable();
    n_values.dedup();
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut reached: Option<usize> = None;
    for &n in &n_values {
        figure1_step(cfg, n, &mut rows, &mut checks).with_context(|| match reached {
            Some(m) => format!("figure1 stopped at n = {n}; completed through n = {m}"),
            None => format!("figure1 stopped at n = {n}; no chain length completed"),
        })?;
        reached = Some(n);
    }
    rows.push(Figure1Row {
        model: "haar".into(),
        n: None,
        estimator: "haar-asymptote".into(),
        value: haar_asymptote(2),
    });
    Ok(Payload::Figure1 { d_a: 2, rows, checks })
}
