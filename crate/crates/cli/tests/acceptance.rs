//! Acceptance suite: every pipeline-level guarantee, checked against exact
//! simulation oracles at desk scale. One test per criterion; each prints a
//! `[PASS] criterion N` line (run with `--nocapture` to see them).

use qcross_cli::commands::*;
use qcross_core::circuits::{build_ghz, sample_qv_circuit, zero_state, Circuit};
use qcross_core::estimate::{
    bootstrap_fidelity, fidelity, overlap_protocol1, overlap_protocol2, purity_protocol1,
    purity_protocol1_plugin, purity_protocol2, purity_protocol2_plugin, Protocol,
};
use qcross_core::measure::{
    acquire_dataset, sample_settings_greedy, sample_settings_random, Basis, MeasurementDataset,
    MeasurementSetting,
};
use qcross_core::platforms::{
    exact_fidelity, simulate_density_matrix, ConnectivitySpec, DensityMatrix, NoiseModel,
    PlatformProfile, Technology,
};
use qcross_core::rng::{substream, substream_indexed};
use qcross_core::route::{overhead_curve, ConnectivityGraph};
use qcross_core::stats::{linear_fit, mean, sample_std};
use rand::Rng;
use std::time::{Duration, Instant};

const MASTER: u64 = 0x5eed_acce_97a6_ce00;

fn profile(name: &str, technology: Technology, p1: f64, p2: f64, readout: f64) -> PlatformProfile {
    PlatformProfile::new(
        name,
        technology,
        NoiseModel {
            p1,
            p2,
            readout_eps: readout,
        },
        ConnectivitySpec::Named("complete".into()),
    )
    .unwrap()
}

fn noiseless(name: &str) -> PlatformProfile {
    profile(name, Technology::Simulation, 0.0, 0.0, 0.0)
}

/// Every n-qubit Pauli basis string.
fn full_design(n: usize) -> Vec<MeasurementSetting> {
    (0..3usize.pow(n as u32))
        .map(|idx| {
            let mut bases = Vec::with_capacity(n);
            let mut a = idx;
            for _ in 0..n {
                bases.push([Basis::X, Basis::Y, Basis::Z][a % 3]);
                a /= 3;
            }
            MeasurementSetting::new(bases)
        })
        .collect()
}

struct OracleCase {
    ds_i: MeasurementDataset,
    ds_j: MeasurementDataset,
    f_exact: f64,
}

/// Ten random (circuit, noise) pairs at n <= 5: QV circuits of random width
/// and depth under two random depolarizing strengths, measured in 243
/// i.i.d. settings shared by both platforms, M_S = 2000.
fn oracle_cases() -> Vec<OracleCase> {
    (0..10u64)
        .map(|k| {
            let mut rng = substream_indexed(MASTER, "c1-case", k);
            let n = [2usize, 3, 4, 5][(k % 4) as usize];
            let d = 1 + (k % 2) as usize;
            let circuit = sample_qv_circuit(n, d, &mut rng).unwrap();
            let p2_i = 0.004 + 0.016 * rng.gen::<f64>();
            let p2_j = 0.004 + 0.016 * rng.gen::<f64>();
            let prof_i = profile("alpha", Technology::TrappedIon, p2_i / 10.0, p2_i, 0.0);
            let prof_j = profile("beta", Technology::Superconducting, p2_j / 10.0, p2_j, 0.0);
            let settings = sample_settings_random(n, 243, &mut rng);
            let ds_i =
                acquire_dataset(&prof_i, &circuit, &settings, 2000, rng.gen::<u64>()).unwrap();
            let ds_j =
                acquire_dataset(&prof_j, &circuit, &settings, 2000, rng.gen::<u64>()).unwrap();
            let rho_i = simulate_density_matrix(&circuit, &prof_i.noise).unwrap();
            let rho_j = simulate_density_matrix(&circuit, &prof_j.noise).unwrap();
            let f_exact = exact_fidelity(&rho_i, &rho_j).unwrap();
            OracleCase { ds_i, ds_j, f_exact }
        })
        .collect()
}

fn both_protocol_fidelities(case: &OracleCase) -> (f64, f64) {
    let f1 = fidelity(
        overlap_protocol1(&case.ds_i, &case.ds_j).unwrap(),
        purity_protocol1(&case.ds_i).unwrap(),
        purity_protocol1(&case.ds_j).unwrap(),
    )
    .unwrap();
    let f2 = fidelity(
        overlap_protocol2(&case.ds_i, &case.ds_j).unwrap(),
        purity_protocol2(&case.ds_i).unwrap(),
        purity_protocol2(&case.ds_j).unwrap(),
    )
    .unwrap();
    (f1, f2)
}

#[test]
fn criterion_01_oracle_convergence() {
    let t0 = Instant::now();
    let cases = oracle_cases();
    let mut successes = 0;
    for (k, case) in cases.iter().enumerate() {
        let (f1, f2) = both_protocol_fidelities(case);
        let ok = (f1 - case.f_exact).abs() <= 0.02 && (f2 - case.f_exact).abs() <= 0.02;
        println!(
            "  case {k}: exact {:.4}, protocol I {:.4}, protocol II {:.4}{}",
            case.f_exact,
            f1,
            f2,
            if ok { "" } else { "  <- outside 0.02" }
        );
        if ok {
            successes += 1;
        }
    }
    let elapsed = t0.elapsed();
    assert!(
        successes >= 9,
        "only {successes}/10 cases within 0.02 of the exact fidelity"
    );
    assert!(
        elapsed < Duration::from_secs(300),
        "took {elapsed:?}, budget 5 min"
    );
    println!(
        "[PASS] criterion 1: both protocols within 0.02 of exact fidelity in {successes}/10 cases ({elapsed:?})"
    );
}

#[test]
fn criterion_02_protocol_equivalence() {
    let cases = oracle_cases();
    for (k, case) in cases.iter().enumerate() {
        let (f1, f2) = both_protocol_fidelities(case);
        let mut rng1 = substream_indexed(MASTER, "c2-boot1", k as u64);
        let (_, std1) =
            bootstrap_fidelity(&case.ds_i, &case.ds_j, Protocol::One, 100, &mut rng1).unwrap();
        let mut rng2 = substream_indexed(MASTER, "c2-boot2", k as u64);
        let (_, std2) =
            bootstrap_fidelity(&case.ds_i, &case.ds_j, Protocol::Two, 100, &mut rng2).unwrap();
        let combined = (std1 * std1 + std2 * std2).sqrt();
        assert!(
            (f1 - f2).abs() <= 3.0 * combined,
            "case {k}: |{f1} - {f2}| > 3 * {combined}"
        );
    }
    println!("[PASS] criterion 2: |F_I - F_II| <= 3 combined bootstrap std on all 10 pairs");
}

#[test]
fn criterion_03_unbiased_purity() {
    let circuit = build_ghz(3).unwrap();
    let prof = profile("noisy3", Technology::TrappedIon, 1e-3, 0.02, 0.0);
    let exact = simulate_density_matrix(&circuit, &prof.noise).unwrap().purity();
    let reps = 200;
    // m_u = 27 at three qubits is the complete Pauli-basis design; each
    // acquisition draws fresh shots in all 27 bases.
    let settings = full_design(3);
    let mut p1 = Vec::with_capacity(reps);
    let mut p2 = Vec::with_capacity(reps);
    let mut plug1 = Vec::with_capacity(reps);
    let mut plug2 = Vec::with_capacity(reps);
    for rep in 0..reps {
        let mut rng = substream_indexed(MASTER, "c3-rep", rep as u64);
        let ds = acquire_dataset(&prof, &circuit, &settings, 500, rng.gen::<u64>()).unwrap();
        p1.push(purity_protocol1(&ds).unwrap());
        p2.push(purity_protocol2(&ds).unwrap());
        plug1.push(purity_protocol1_plugin(&ds).unwrap());
        plug2.push(purity_protocol2_plugin(&ds).unwrap());
    }
    let check = |name: &str, xs: &[f64], should_pass: bool| {
        let m = mean(xs);
        let se = sample_std(xs) / (xs.len() as f64).sqrt();
        let dev = (m - exact).abs();
        println!("  {name}: mean {m:.5}, exact {exact:.5}, |dev|/se = {:.2}", dev / se);
        if should_pass {
            assert!(dev <= 3.0 * se, "{name}: biased by {dev} (3 se = {})", 3.0 * se);
        } else {
            assert!(dev > 3.0 * se, "{name}: expected to fail the 3-se test but passed");
        }
    };
    check("protocol I purity", &p1, true);
    check("protocol II purity", &p2, true);
    check("plug-in protocol I", &plug1, false);
    check("plug-in protocol II", &plug2, false);
    println!("[PASS] criterion 3: unbiased purities within 3 se of exact over 200 acquisitions; plug-ins fail");
}

#[test]
fn criterion_04_greedy_beats_random() {
    let t0 = Instant::now();
    let circuit = build_ghz(5).unwrap();
    let ion = profile("ion", Technology::TrappedIon, 4e-4, 1.2e-2, 0.0);
    let sc = profile("sc", Technology::Superconducting, 1e-3, 2e-2, 0.0);
    let f_exact = exact_fidelity(
        &simulate_density_matrix(&circuit, &ion.noise).unwrap(),
        &simulate_density_matrix(&circuit, &sc.noise).unwrap(),
    )
    .unwrap();
    let m_u_grid = [10usize, 20, 40, 80];
    let seeds = 20u64;
    let mut report = String::new();
    for &m_u in &m_u_grid {
        let mut errs = [Vec::new(), Vec::new()]; // [greedy, random]
        for seed in 0..seeds {
            for (which, label) in ["greedy", "random"].iter().enumerate() {
                let mut rng = substream(MASTER, &format!("c4:{label}:{m_u}:{seed}"));
                let settings = if which == 0 {
                    sample_settings_greedy(5, m_u, 200, &mut rng)
                } else {
                    sample_settings_random(5, m_u, &mut rng)
                };
                let ds_i =
                    acquire_dataset(&ion, &circuit, &settings, 2000, rng.gen::<u64>()).unwrap();
                let ds_j =
                    acquire_dataset(&sc, &circuit, &settings, 2000, rng.gen::<u64>()).unwrap();
                let f = fidelity(
                    overlap_protocol2(&ds_i, &ds_j).unwrap(),
                    purity_protocol2(&ds_i).unwrap(),
                    purity_protocol2(&ds_j).unwrap(),
                )
                .unwrap();
                errs[which].push((f - f_exact).abs());
            }
        }
        let (g, r) = (mean(&errs[0]), mean(&errs[1]));
        report.push_str(&format!("  m_u {m_u}: greedy {g:.4} vs random {r:.4}\n"));
        assert!(
            g <= r,
            "at m_u = {m_u}: greedy mean error {g} > random mean error {r}"
        );
    }
    let elapsed = t0.elapsed();
    assert!(elapsed < Duration::from_secs(600), "took {elapsed:?}, budget 10 min");
    print!("{report}");
    println!("[PASS] criterion 4: greedy error <= random error at every m_u over 20 seeds ({elapsed:?})");
}

#[test]
fn criterion_05_tomography_fraction_trend() {
    let circuit = build_ghz(5).unwrap();
    let sim = noiseless("sim");
    let design = full_design(5);
    let grid = [10usize, 25, 50, 100];
    let reps = 20u64;
    let mut errors = vec![Vec::new(); grid.len()];
    for rep in 0..reps {
        let mut rng = substream_indexed(MASTER, "c5-rep", rep);
        // One acquisition over the full 243-basis design; subsampling
        // without replacement is then a prefix of a shuffled record list.
        let ds_i = acquire_dataset(&sim, &circuit, &design, 2000, rng.gen::<u64>()).unwrap();
        let ds_j = acquire_dataset(&sim, &circuit, &design, 2000, rng.gen::<u64>()).unwrap();
        let mut order: Vec<usize> = (0..243).collect();
        use rand::seq::SliceRandom;
        order.shuffle(&mut rng);
        for (gi, &m_u) in grid.iter().enumerate() {
            let take = |ds: &MeasurementDataset| {
                let mut sub = ds.clone();
                sub.records = order[..m_u].iter().map(|&i| ds.records[i].clone()).collect();
                sub
            };
            let (si, sj) = (take(&ds_i), take(&ds_j));
            let f = fidelity(
                overlap_protocol2(&si, &sj).unwrap(),
                purity_protocol2(&si).unwrap(),
                purity_protocol2(&sj).unwrap(),
            )
            .unwrap();
            errors[gi].push((f - 1.0).abs());
        }
    }
    let means: Vec<f64> = errors.iter().map(|e| mean(e)).collect();
    println!("  mean |F - 1| per m_u {grid:?}: {means:?}");
    for w in means.windows(2) {
        assert!(w[1] <= w[0], "error curve is not decreasing: {means:?}");
    }
    assert!(
        means[grid.len() - 1] <= 0.03,
        "mean error at m_u = 100 is {}",
        means[grid.len() - 1]
    );
    println!("[PASS] criterion 5: error decreases with m_u and reaches {:.4} <= 0.03 by m_u = 100", means[3]);
}

#[test]
fn criterion_06_subsystem_oracle() {
    let circuit = build_ghz(5).unwrap();
    let sim = noiseless("sim");
    let design = full_design(5);
    let mut rng = substream(MASTER, "c6");
    let ds_i = acquire_dataset(&sim, &circuit, &design, 2000, rng.gen::<u64>()).unwrap();
    let ds_j = acquire_dataset(&sim, &circuit, &design, 2000, rng.gen::<u64>()).unwrap();
    let exact_state = qcross_core::circuits::apply_circuit(&circuit, &zero_state(5)).unwrap();
    let exact_rho = DensityMatrix::from_statevector(&exact_state).unwrap();

    let mut subsets: Vec<Vec<usize>> = (0..5).map(|q| vec![q]).collect();
    for a in 0..5 {
        for b in a + 1..5 {
            subsets.push(vec![a, b]);
        }
    }
    assert_eq!(subsets.len(), 15);
    for subset in &subsets {
        let reduced = exact_rho.partial_trace(subset).unwrap();
        let exact_purity = reduced.purity();
        let exact_f = exact_fidelity(&reduced, &reduced).unwrap();
        let ra = qcross_core::estimate::subsystem_restrict(&ds_i, subset).unwrap();
        let rb = qcross_core::estimate::subsystem_restrict(&ds_j, subset).unwrap();
        let pa = purity_protocol2(&ra).unwrap();
        let pb = purity_protocol2(&rb).unwrap();
        let f = fidelity(overlap_protocol2(&ra, &rb).unwrap(), pa, pb).unwrap();
        assert!(
            (pa - exact_purity).abs() <= 0.03 && (pb - exact_purity).abs() <= 0.03,
            "subset {subset:?}: purities {pa:.4}/{pb:.4} vs exact {exact_purity:.4}"
        );
        assert!(
            (f - exact_f).abs() <= 0.03,
            "subset {subset:?}: fidelity {f:.4} vs exact {exact_f:.4}"
        );
    }
    println!("[PASS] criterion 6: all 15 subsystem purities and fidelities within 0.03 of the partial-trace oracle");
}

#[test]
fn criterion_07_thirteen_qubit_scale() {
    let t0 = Instant::now();
    let mut rng = substream(MASTER, "c7-circuit");
    let circuit = sample_qv_circuit(13, 2, &mut rng).unwrap();
    // Two profiles differing by 0.4% per-gate noise.
    let prof_a = profile("a13", Technology::TrappedIon, 1e-3, 0.010, 0.005);
    let prof_b = profile("b13", Technology::TrappedIon, 1e-3, 0.014, 0.005);
    let mut srng = substream(MASTER, "c7-settings");
    let settings = sample_settings_random(13, 100, &mut srng);
    let ds_a = acquire_dataset(&prof_a, &circuit, &settings, 500, 0xa13).unwrap();
    let ds_b = acquire_dataset(&prof_b, &circuit, &settings, 500, 0xb13).unwrap();
    let o = overlap_protocol1(&ds_a, &ds_b).unwrap();
    let pa = purity_protocol1(&ds_a).unwrap();
    let pb = purity_protocol1(&ds_b).unwrap();
    let f = fidelity(o, pa, pb).unwrap();
    assert!(f.is_finite(), "fidelity is not finite");
    let mut brng = substream(MASTER, "c7-bootstrap");
    let (bmean, bstd) = bootstrap_fidelity(&ds_a, &ds_b, Protocol::One, 100, &mut brng).unwrap();
    let elapsed = t0.elapsed();
    println!(
        "  13-qubit protocol I: overlap {o:.4}, purities {pa:.4}/{pb:.4}, fidelity {f:.4}, bootstrap {bmean:.4} +- {bstd:.4}"
    );
    assert!(bstd < 0.1, "bootstrap std {bstd} >= 0.1");
    assert!(
        elapsed < Duration::from_secs(1800),
        "took {elapsed:?}, budget 30 min"
    );
    println!("[PASS] criterion 7: QV(13, d=2) protocol I pipeline finished in {elapsed:?} with bootstrap std {bstd:.4} < 0.1");
}

#[test]
fn criterion_08_routing_trend() {
    let d_values: Vec<usize> = (1..=6).collect();
    let complete = ConnectivityGraph::complete(7).unwrap();
    let mut rng = substream(MASTER, "c8-complete");
    let complete_points = overhead_curve(7, &d_values, &complete, 20, &mut rng).unwrap();
    for p in &complete_points {
        assert_eq!(p.mean_total, (9 * p.d) as f64, "complete graph cost is not exact");
        assert_eq!(p.std_total, 0.0);
    }
    let line = ConnectivityGraph::line(7).unwrap();
    let mut rng = substream(MASTER, "c8-line");
    let line_points = overhead_curve(7, &d_values, &line, 20, &mut rng).unwrap();
    for (lp, cp) in line_points.iter().zip(&complete_points) {
        assert!(
            lp.mean_total > cp.mean_total,
            "line cost {} not above complete cost {} at d = {}",
            lp.mean_total,
            cp.mean_total,
            lp.d
        );
    }
    let xs: Vec<f64> = line_points.iter().map(|p| p.d as f64).collect();
    let ys: Vec<f64> = line_points.iter().map(|p| p.mean_total).collect();
    let (_, slope, r2) = linear_fit(&xs, &ys);
    println!("  line graph: totals {ys:?}, slope {slope:.2}, r^2 {r2:.4}");
    assert!(slope > 0.0, "slope {slope} not positive");
    assert!(r2 > 0.95, "r^2 {r2} <= 0.95");
    println!("[PASS] criterion 8: complete graph exactly 9d; line graph above it with linear growth (r^2 = {r2:.4})");
}

#[test]
fn criterion_09_pca_separation() {
    use qcross_core::analyze::{
        build_feature_matrix, pca_project, silhouette_1d, FeatureConfig, FeatureInput,
    };
    let mut crng = substream(MASTER, "c9-circuits");
    let qv_d2 = sample_qv_circuit(7, 2, &mut crng).unwrap();
    let qv_d3 = sample_qv_circuit(7, 3, &mut crng).unwrap();
    let low_a = profile("ion-x", Technology::TrappedIon, 4e-4, 0.008, 0.005);
    let high_b = profile("sc-y", Technology::Superconducting, 2e-3, 0.03, 0.02);
    let mut datasets = Vec::new();
    for (ci, circuit) in [&qv_d2, &qv_d3].into_iter().enumerate() {
        let mut srng = substream_indexed(MASTER, "c9-settings", ci as u64);
        let settings = sample_settings_random(7, 100, &mut srng);
        for (pi, prof) in [&low_a, &high_b].into_iter().enumerate() {
            let seed = 0xc9_00 + (ci * 2 + pi) as u64;
            datasets.push((
                acquire_dataset(prof, circuit, &settings, 500, seed).unwrap(),
                prof.technology,
                ci,
                pi,
            ));
        }
    }
    let config = FeatureConfig::default();
    let inputs: Vec<FeatureInput> = datasets
        .iter()
        .map(|(ds, tech, _, _)| FeatureInput {
            dataset: ds,
            technology: *tech,
        })
        .collect();
    let matrix = build_feature_matrix(&inputs, &config, substream(MASTER, "c9-feat").gen()).unwrap();
    let pca = pca_project(&matrix, 2).unwrap();
    let rows_per = config.n_repeat;
    let circuit_groups: Vec<usize> = (0..matrix.n_rows()).map(|r| datasets[r / rows_per].2).collect();
    let family_groups: Vec<usize> = (0..matrix.n_rows()).map(|r| datasets[r / rows_per].3).collect();
    let pc1: Vec<f64> = pca.projections.iter().map(|p| p[0]).collect();
    let pc2: Vec<f64> = pca.projections.iter().map(|p| p[1]).collect();
    let s_circuit = silhouette_1d(&pc1, &circuit_groups);
    let s_family = silhouette_1d(&pc2, &family_groups);
    println!(
        "  explained variance: PC1 {:.4}, PC2 {:.4}; silhouettes: circuits on PC1 {s_circuit:.3}, families on PC2 {s_family:.3}",
        pca.explained_variance[0], pca.explained_variance[1]
    );
    assert!(
        s_circuit > 0.0,
        "PC1 does not separate the two circuits (silhouette {s_circuit})"
    );
    assert!(
        s_family > 0.0,
        "PC2 does not separate the two noise families (silhouette {s_family})"
    );
    println!(
        "[PASS] criterion 9: PC1 separates circuits, PC2 separates noise families (explained {:.3}/{:.3})",
        pca.explained_variance[0], pca.explained_variance[1]
    );
}

#[test]
fn criterion_10_reproducibility() {
    let root = tempfile::tempdir().unwrap();
    let run = root.path().join("repro");
    let write_profile = |name: &str, p2: f64| {
        let path = root.path().join(format!("{name}.toml"));
        std::fs::write(
            &path,
            format!(
                "name = \"{name}\"\ntechnology = \"trapped-ion\"\np1 = {}\np2 = {p2}\nreadout_eps = 0.002\nconnectivity = \"complete\"\n",
                p2 / 10.0
            ),
        )
        .unwrap();
        path
    };
    let profiles = vec![write_profile("p_one", 0.01), write_profile("p_two", 0.02)];
    cmd_gen(&GenArgs {
        run_dir: run.clone(),
        kind: CircuitKind::Ghz { n: 3 },
        label: None,
        run_id: None,
        seed: 7,
    })
    .unwrap();

    let run_outputs = |threads: usize| -> std::collections::BTreeMap<String, Vec<u8>> {
        // Clear previous outputs, keep manifest + circuit.
        for sub in ["datasets", "estimates/pairs", "analysis"] {
            let dir = run.join(sub);
            if dir.exists() {
                for e in std::fs::read_dir(&dir).unwrap().filter_map(|e| e.ok()) {
                    if e.path().is_file() {
                        std::fs::remove_file(e.path()).unwrap();
                    }
                }
            }
        }
        let _ = std::fs::remove_file(run.join("estimates/fidelity_matrix.csv"));
        cmd_acquire(&AcquireArgs {
            run_dir: run.clone(),
            platform_paths: profiles.clone(),
            m_u: 30,
            m_s: 200,
            sampler: SamplerKind::Greedy,
            n_candidates: 200,
            threads: Some(threads),
        })
        .unwrap();
        cmd_estimate(&EstimateArgs {
            run_dir: run.clone(),
            protocol: None,
            bootstrap_b: 50,
            threads: Some(threads),
        })
        .unwrap();
        cmd_subsystem(&SubsystemArgs {
            run_dir: run.clone(),
            max_size: 2,
            protocol: None,
            bootstrap_b: 20,
            threads: Some(threads),
        })
        .unwrap();
        cmd_pca(&PcaArgs {
            run_dir: run.clone(),
            datasets: vec![],
            technologies: vec![],
            shots_per_sample: 100,
            n_repeat: 5,
            weight_cap: 1,
            n_min: 3,
            strict: None,
            components: 2,
            threads: Some(threads),
        })
        .unwrap();
        cmd_route(&RouteArgs {
            run_dir: run.clone(),
            graphs: vec!["line:5".into(), "complete:5".into()],
            n: 5,
            d_values: vec![1, 2, 3],
            trials: 8,
            threads: Some(threads),
        })
        .unwrap();
        // Snapshot every artifact.
        let mut snapshot = std::collections::BTreeMap::new();
        let mut stack = vec![run.clone()];
        while let Some(dir) = stack.pop() {
            for e in std::fs::read_dir(&dir).unwrap().filter_map(|e| e.ok()) {
                let path = e.path();
                if path.is_dir() {
                    stack.push(path);
                } else if path.file_name().is_some_and(|n| n != ".lock") {
                    let rel = path.strip_prefix(&run).unwrap().to_string_lossy().to_string();
                    snapshot.insert(rel, std::fs::read(&path).unwrap());
                }
            }
        }
        snapshot
    };

    let first = run_outputs(1);
    let second = run_outputs(8);
    assert_eq!(
        first.keys().collect::<Vec<_>>(),
        second.keys().collect::<Vec<_>>(),
        "artifact sets differ"
    );
    for (name, bytes) in &first {
        assert_eq!(
            bytes,
            second.get(name).unwrap(),
            "artifact {name} differs between 1-thread and 8-thread runs"
        );
    }
    println!(
        "[PASS] criterion 10: {} artifacts byte-identical across reruns with 1 and 8 threads",
        first.len()
    );
}
