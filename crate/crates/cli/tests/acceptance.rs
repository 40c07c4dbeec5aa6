//! Acceptance checks, one line per criterion. Runs without the libtest harness so the
//! report is always printed; exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command as Process, ExitCode};
use std::time::{Duration, Instant};

use bipartite_otoc::channels::choi_distance_check;
use bipartite_otoc::estimates::{
    eigenstate_entanglement_profile, entanglement_deficits, equilibration_bound, exact_time_average, haar_asymptote,
    haar_estimate, hierarchy_report, nrc_estimate, percentile,
};
use bipartite_otoc::linalg::haar_unitary;
use bipartite_otoc::models::{build_hamiltonian, eigendecompose, HamiltonianSpec, SpectralData, DEFAULT_CLUSTER_TOL};
use bipartite_otoc::montecarlo::{
    entropy_production_estimate, entropy_production_scale, entropy_production_with_concentration,
    pauli_exhaustive_average, sample_otoc_with_concentration, EnsembleKind, EnsembleSpec,
};
use bipartite_otoc::otoc::{
    entangling_power, g_exact, g_exact_via, g_reduced, g_reduced_in_basis, operator_entanglement,
};
use bipartite_otoc::{BipartiteDims, DenseOperator, Factor, RngStream, C64};
use botoc_cli::{payload_json, run, Command, RunConfig};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn dims(a: usize, b: usize) -> BipartiteDims {
    BipartiteDims::new(a, b).unwrap()
}

fn spectrum(spec: &HamiltonianSpec) -> SpectralData {
    let h = build_hamiltonian(spec).unwrap();
    eigendecompose(&h, DEFAULT_CLUSTER_TOL, DEFAULT_CLUSTER_TOL).unwrap()
}

fn variants(n: usize) -> [(&'static str, HamiltonianSpec); 3] {
    [
        ("tfim-chaotic", HamiltonianSpec::tfim(n, -1.05, 0.5)),
        ("tfim-integrable", HamiltonianSpec::tfim(n, -1.05, 0.0)),
        ("xxz", HamiltonianSpec::xxz(n, 0.4, 2.5)),
    ]
}

fn within(limit: Duration, elapsed: Duration) -> Result<(), String> {
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:.1?}, limit {limit:?}"))
    }
}

fn matrix_units(d: usize) -> Vec<DenseOperator> {
    (0..d * d)
        .map(|k| DenseOperator::matrix_unit(d, k / d, k % d))
        .collect()
}

fn identity_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = RngStream::new(1001, 0).rng();
    let mut worst: f64 = 0.0;
    for d in [dims(2, 2), dims(2, 3), dims(2, 4), dims(4, 4)] {
        let units_a = matrix_units(d.d_a());
        let units_b = matrix_units(d.d_b());
        for _ in 0..50 {
            let u = haar_unitary(d.d(), &mut rng);
            let values = [
                g_exact(&u, d).unwrap(),
                g_reduced(&u, d).unwrap(),
                operator_entanglement(&u, d).unwrap(),
                g_exact_via(&u, d, Factor::A).unwrap(),
                g_exact_via(&u, d, Factor::B).unwrap(),
                g_reduced_in_basis(&u, d, Factor::A, &units_a).unwrap(),
                g_reduced_in_basis(&u, d, Factor::B, &units_b).unwrap(),
            ];
            for x in values {
                for y in values {
                    worst = worst.max((x - y).abs());
                }
            }
            for keep in [Factor::A, Factor::B] {
                worst = worst.max(choi_distance_check(&u, d, keep).unwrap().residual());
            }
        }
    }
    let elapsed = start.elapsed();
    if worst >= 1e-10 {
        return Err(format!("max disagreement {worst:.2e} ≥ 1e-10"));
    }
    within(Duration::from_secs(10), elapsed)?;
    Ok(format!(
        "max disagreement {worst:.2e} over 200 unitaries, {elapsed:.2?}"
    ))
}

fn closed_forms() -> Outcome {
    let mut worst: f64 = 0.0;
    for dc in [2, 3, 4] {
        let d = dims(dc, dc);
        let g = g_exact(&DenseOperator::swap(dc), d).unwrap();
        worst = worst.max((g - (1.0 - 1.0 / d.d() as f64)).abs());
        worst = worst.max(entangling_power(&DenseOperator::identity(d.d()), d).unwrap().abs());
        worst = worst.max(entangling_power(&DenseOperator::swap(dc), d).unwrap().abs());
    }
    if worst >= 1e-12 {
        return Err(format!("SWAP / entangling-power deviation {worst:.2e}"));
    }
    let haar = haar_estimate(dims(2, 2));
    if (haar - 0.6).abs() > f64::EPSILON || haar_asymptote(2) != 0.75 {
        return Err(format!("haar(2,2) = {haar:e}, asymptote {}", haar_asymptote(2)));
    }
    Ok(format!("max deviation {worst:.2e}; haar(2,2) = {haar}, asymptote 0.75"))
}

fn pauli_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = RngStream::new(1003, 0).rng();
    let mut worst: f64 = 0.0;
    for (na, nb) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        let ens = EnsembleSpec::pauli(na, nb).unwrap();
        for _ in 0..5 {
            let u = haar_unitary(ens.dims.d(), &mut rng);
            let avg = pauli_exhaustive_average(&u, &ens).unwrap();
            worst = worst.max((avg - g_exact(&u, ens.dims).unwrap()).abs());
        }
    }
    let elapsed = start.elapsed();
    if worst >= 1e-10 {
        return Err(format!("max deviation {worst:.2e}"));
    }
    within(Duration::from_secs(30), elapsed)?;
    Ok(format!("max deviation {worst:.2e}, {elapsed:.2?}"))
}

fn hierarchy() -> Outcome {
    let mut notes = Vec::new();
    let mut separation = [0.0; 2];
    let mut n8_time = Duration::ZERO;
    for n in [4, 6, 8] {
        let start = Instant::now();
        let cut = BipartiteDims::qubits(1, n - 1).unwrap();
        for (name, spec) in variants(n) {
            let r = hierarchy_report(&spectrum(&spec), cut).unwrap();
            let slack = 1e-8;
            if !(r.haar >= r.nrc - slack && r.nrc >= r.nrc_plus - slack && r.nrc_plus >= r.exact - slack) {
                return Err(format!("{name} n={n}: ordering fails {r:?}"));
            }
            if name == "xxz" && (r.nrc_plus - r.exact).abs() >= 1e-6 {
                return Err(format!(
                    "xxz n={n}: |NRC+ - exact| = {:.2e}",
                    (r.nrc_plus - r.exact).abs()
                ));
            }
            if n == 8 {
                match name {
                    "tfim-chaotic" => separation[0] = (r.nrc - r.exact).abs(),
                    "tfim-integrable" => separation[1] = r.nrc - r.exact,
                    _ => notes.push(format!("xxz |NRC+ - exact| = {:.1e}", (r.nrc_plus - r.exact).abs())),
                }
            }
        }
        if n == 8 {
            n8_time = start.elapsed();
        }
    }
    if separation[1] <= 10.0 * separation[0] {
        return Err(format!(
            "integrable NRC - exact = {:.2e} not > 10 × chaotic {:.2e}",
            separation[1], separation[0]
        ));
    }
    within(Duration::from_secs(300), n8_time)?;
    Ok(format!(
        "ordering holds; n=8 integrable gap {:.2e} vs chaotic {:.2e}; {}; n=8 in {n8_time:.2?}",
        separation[1],
        separation[0],
        notes.join(", ")
    ))
}

/// `1 − (1/d²) Σ |⟨pq|S_AA′|rs⟩|²` over all quadruples with `E_p + E_q = E_r + E_s`.
fn resonance_sum(s: &SpectralData, d: BipartiteDims) -> f64 {
    let (da, db, n) = (d.d_a(), d.d_b(), d.d());
    let e = s.eigenvalues();
    let tol = 1e-9 * s.spectral_range().max(1.0);
    let c: Vec<Vec<C64>> = (0..n).map(|k| s.eigenvector(k)).collect();
    let mut total = 0.0;
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for t in 0..n {
                    if (e[p] + e[q] - e[r] - e[t]).abs() > tol {
                        continue;
                    }
                    let mut amp = C64::new(0.0, 0.0);
                    for a1 in 0..da {
                        for b1 in 0..db {
                            for a2 in 0..da {
                                for b2 in 0..db {
                                    amp += c[p][a1 * db + b1].conj()
                                        * c[q][a2 * db + b2].conj()
                                        * c[r][a2 * db + b1]
                                        * c[t][a1 * db + b2];
                                }
                            }
                        }
                    }
                    total += amp.norm_sqr();
                }
            }
        }
    }
    1.0 - total / (n * n) as f64
}

fn exact_average_oracles() -> Outcome {
    let mut worst_sum: f64 = 0.0;
    for (_, spec) in variants(4) {
        let s = spectrum(&spec);
        for cut in [
            BipartiteDims::qubits(1, 3).unwrap(),
            BipartiteDims::qubits(2, 2).unwrap(),
        ] {
            let diff = (exact_time_average(&s, cut).unwrap() - resonance_sum(&s, cut)).abs();
            worst_sum = worst_sum.max(diff);
        }
    }
    if worst_sum >= 1e-10 {
        return Err(format!("resonance-sum disagreement {worst_sum:.2e}"));
    }
    // Weyl sequence on [0, 10⁴]: equidistributed sample times.
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let times: Vec<f64> = (1..=10_000).map(|k| 1e4 * (k as f64 * golden).fract()).collect();
    let mut worst_time: f64 = 0.0;
    for n in [4, 6] {
        let cut = BipartiteDims::qubits(1, n - 1).unwrap();
        for (name, spec) in variants(n) {
            let s = spectrum(&spec);
            let mean = times
                .iter()
                .map(|&t| g_exact(&s.evolution(t), cut).unwrap())
                .sum::<f64>()
                / times.len() as f64;
            let diff = (mean - exact_time_average(&s, cut).unwrap()).abs();
            if diff >= 5e-3 {
                return Err(format!("{name} n={n}: time average off by {diff:.2e}"));
            }
            worst_time = worst_time.max(diff);
        }
    }
    Ok(format!(
        "resonance sum within {worst_sum:.2e}; time average within {worst_time:.2e}"
    ))
}

fn entropy_production() -> Outcome {
    let mut rng = RngStream::new(1006, 0).rng();
    let d = dims(2, 4);
    let u = haar_unitary(8, &mut rng);
    let g = g_exact(&u, d).unwrap();
    let mut notes = Vec::new();
    for keep in [Factor::A, Factor::B] {
        let s = entropy_production_estimate(&u, d, keep, 10_000, RngStream::new(1006, 1)).unwrap();
        let scale = entropy_production_scale(d.dim(keep));
        let z = (s.mean * scale - g).abs() / (s.std_error() * scale);
        if z >= 3.0 {
            return Err(format!("keep {keep}: scaled mean off by {z:.2} standard errors"));
        }
        notes.push(format!("keep {keep}: {z:.2} SE"));
    }
    let s = entropy_production_estimate(
        &DenseOperator::swap(2),
        dims(2, 2),
        Factor::A,
        1000,
        RngStream::new(1006, 2),
    )
    .unwrap();
    let scaled = s.mean * entropy_production_scale(2);
    if (scaled - 0.75).abs() > 1e-12 || s.variance > 1e-24 {
        return Err(format!("SWAP: scaled mean {scaled}, variance {:e}", s.variance));
    }
    notes.push(format!("SWAP scaled mean {scaled}, variance {:.1e}", s.variance));
    Ok(notes.join("; "))
}

fn concentration() -> Outcome {
    let eps = [0.25, 0.5, 1.0];
    let mut notes = Vec::new();
    for n in [4, 6] {
        let cut = BipartiteDims::qubits(1, n - 1).unwrap();
        let u = spectrum(&HamiltonianSpec::tfim(n, -1.05, 0.5)).evolution(5.0);
        let (_, otoc) = sample_otoc_with_concentration(
            &u,
            &EnsembleSpec::haar_local(cut),
            10_000,
            &eps,
            RngStream::new(1007, n as u64),
        )
        .unwrap();
        let mut tables = vec![("otoc", otoc)];
        for keep in [Factor::A, Factor::B] {
            let (_, t) =
                entropy_production_with_concentration(&u, cut, keep, 10_000, &eps, RngStream::new(1008, n as u64))
                    .unwrap();
            tables.push((if keep == Factor::A { "state A" } else { "state B" }, t));
        }
        for (name, t) in tables {
            for row in &t.rows {
                if !row.respects_bound() {
                    return Err(format!(
                        "d_B={} {name} eps={}: p = {} > bound {}",
                        cut.d_b(),
                        row.epsilon,
                        row.empirical_p,
                        row.bound
                    ));
                }
            }
            let worst = t.rows.iter().map(|r| r.empirical_p).fold(0.0, f64::max);
            let informative = t.rows.iter().filter(|r| !r.vacuous).count();
            notes.push(format!(
                "d_B={} {name}: max p {worst:.3}, {informative} non-vacuous",
                cut.d_b()
            ));
        }
    }
    Ok(notes.join("; "))
}

fn equilibration() -> Outcome {
    let cut = BipartiteDims::qubits(4, 4).unwrap();
    let s = spectrum(&HamiltonianSpec::tfim(8, -1.05, 0.5));
    let profile = eigenstate_entanglement_profile(&s, cut).unwrap();
    let nrc = nrc_estimate(&s, cut).unwrap();
    let deficits = entanglement_deficits(&profile, cut);
    let mut notes = Vec::new();
    for q in [50.0, 90.0, 99.0] {
        let eps = percentile(&deficits, q).unwrap();
        let b = equilibration_bound(&profile, cut, eps).unwrap().compare(nrc);
        let dev = b.deviation.unwrap();
        if b.holds() != Some(true) {
            return Err(format!("p{q}: deviation {dev:.3e} > bound {:.3e}", b.bound));
        }
        notes.push(format!("p{q}: {dev:.2e} ≤ {:.2e}", b.bound));
    }
    Ok(notes.join("; "))
}

fn determinism() -> Outcome {
    let mut checked = 0;
    for command in [Command::Sample, Command::Entropy] {
        for kind in [
            EnsembleKind::HaarLocal,
            EnsembleKind::PauliFactorized,
            EnsembleKind::HaarGlobal,
        ] {
            let mut cfg = RunConfig::for_command(command);
            cfg.model = HamiltonianSpec::tfim(4, -1.05, 0.5);
            cfg.n_samples = 2000;
            cfg.seed = 20;
            cfg.ensemble.kind = kind;
            let a = payload_json(&run(&cfg).unwrap().payload).unwrap();
            let b = payload_json(&run(&cfg).unwrap().payload).unwrap();
            if a != b {
                return Err(format!("{command:?}/{kind:?} payloads differ"));
            }
            checked += 1;
        }
    }
    let exe = env!("CARGO_BIN_EXE_botoc");
    for command in ["sample", "entropy"] {
        let out = |threads: &str| {
            Process::new(exe)
                .args([command, "--seed", "7", "--format", "csv", "--threads", threads])
                .output()
                .unwrap()
        };
        let (a, b) = (out("1"), out("3"));
        if !a.status.success() || a.stdout != b.stdout {
            return Err(format!("binary `{command}` output differs between runs"));
        }
        checked += 1;
    }
    Ok(format!("{checked} repeated runs byte-identical"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("identity suite", identity_suite),
        ("closed-form values", closed_forms),
        ("1-design oracle", pauli_oracle),
        ("hierarchy reproduction", hierarchy),
        ("exact-average oracles", exact_average_oracles),
        ("entropy-production estimator", entropy_production),
        ("concentration", concentration),
        ("equilibration bound", equilibration),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} ({name}): PASS [{secs:.1} s] {detail}", k + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {} ({name}): FAIL [{secs:.1} s] {detail}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
