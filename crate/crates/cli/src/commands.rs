//! Subcommand implementations, callable as library functions so tests can
//! drive full pipelines in-process.

use crate::manifest::{
    AcquisitionSpec, CircuitSpec, EstimationSpec, PlatformEntry, RunLock, RunManifest,
};
use anyhow::{anyhow, bail, Context, Result};
use qcross_core::analyze::{
    build_feature_matrix, pca_project, projection_csv, FeatureConfig, FeatureInput,
};
use qcross_core::circuits::{build_ghz, sample_qv_circuit, Circuit};
use qcross_core::estimate::{
    default_protocol, estimate_pair, FidelityEstimate, Protocol,
};
use qcross_core::measure::{
    acquire_dataset, ingest_dataset, sample_settings_greedy, sample_settings_random,
    MeasurementDataset, SettingRecord,
};
use qcross_core::platforms::{PlatformProfile, Technology};
use qcross_core::route::{overhead_curve, ConnectivityGraph, ROUTING_HEURISTIC};
use qcross_core::rng::substream;
use rand::Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Run a closure inside a rayon pool of the requested width. `None` uses the
/// global pool.
pub fn with_pool<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<T> + Send,
) -> Result<T> {
    match threads {
        None => f(),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .context("building thread pool")?;
            pool.install(f)
        }
    }
}

fn ensure_layout(run_dir: &Path) -> Result<()> {
    for sub in ["circuits", "datasets", "estimates", "estimates/pairs", "analysis"] {
        std::fs::create_dir_all(run_dir.join(sub))?;
    }
    Ok(())
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircuitKind {
    Ghz { n: usize },
    Qv { n: usize, d: usize },
}

#[derive(Debug, Clone)]
pub struct GenArgs {
    pub run_dir: PathBuf,
    pub kind: CircuitKind,
    pub label: Option<String>,
    pub run_id: Option<String>,
    pub seed: u64,
}

/// Create (or idempotently reopen) a run and write the circuit file.
pub fn cmd_gen(args: &GenArgs) -> Result<PathBuf> {
    let (kind_str, n, d) = match args.kind {
        CircuitKind::Ghz { n } => ("ghz", n, None),
        CircuitKind::Qv { n, d } => ("qv", n, Some(d)),
    };
    let label = args
        .label
        .clone()
        .unwrap_or_else(|| match args.kind {
            CircuitKind::Ghz { n } => format!("ghz{n}"),
            CircuitKind::Qv { n, d } => format!("qv{n}d{d}"),
        });
    let spec = CircuitSpec {
        kind: kind_str.to_string(),
        n,
        d,
        label: label.clone(),
    };
    let run_id = args
        .run_id
        .clone()
        .unwrap_or_else(|| format!("{label}-s{}", args.seed));

    ensure_layout(&args.run_dir)?;
    let _lock = RunLock::acquire(&args.run_dir)?;

    let manifest = if RunManifest::path(&args.run_dir).exists() {
        let existing = RunManifest::load(&args.run_dir)?;
        if existing.master_seed != args.seed || existing.circuit != spec || existing.run_id != run_id
        {
            bail!(
                "run directory {} already holds a different run (id {}, seed {})",
                args.run_dir.display(),
                existing.run_id,
                existing.master_seed
            );
        }
        existing
    } else {
        let manifest = RunManifest {
            run_id,
            created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            master_seed: args.seed,
            circuit: spec,
            platforms: vec![],
            acquisition: None,
            estimation: None,
        };
        manifest.save(&args.run_dir)?;
        manifest
    };

    let mut circuit = match args.kind {
        CircuitKind::Ghz { n } => build_ghz(n)?,
        CircuitKind::Qv { n, d } => {
            let mut rng = substream(args.seed, "circuit");
            sample_qv_circuit(n, d, &mut rng)?
        }
    };
    circuit.label = label.clone();
    circuit.seed = Some(args.seed);
    let mut file = circuit.to_file();
    file.manifest_hash = Some(manifest.hash());
    let path = args.run_dir.join("circuits").join(format!("{label}.json"));
    write_atomic(&path, &serde_json::to_string_pretty(&file)?)?;
    Ok(path)
}

fn load_circuit(run_dir: &Path, label: &str) -> Result<Circuit> {
    let path = run_dir.join("circuits").join(format!("{label}.json"));
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("reading circuit {}", path.display()))?;
    Ok(Circuit::from_json(&text)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Random,
    Greedy,
}

impl SamplerKind {
    pub fn parse(s: &str) -> Result<SamplerKind> {
        match s {
            "random" => Ok(SamplerKind::Random),
            "greedy" => Ok(SamplerKind::Greedy),
            other => bail!("unknown sampler {other:?} (expected random or greedy)"),
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            SamplerKind::Random => "random",
            SamplerKind::Greedy => "greedy",
        }
    }
}

#[derive(Debug, Clone)]
pub struct AcquireArgs {
    pub run_dir: PathBuf,
    pub platform_paths: Vec<PathBuf>,
    pub m_u: usize,
    pub m_s: u32,
    pub sampler: SamplerKind,
    pub n_candidates: usize,
    pub threads: Option<usize>,
}

/// Simulate the listed platforms and write one dataset file per platform.
/// Settings are drawn once from the run's "settings" substream and shared
/// across platforms.
pub fn cmd_acquire(args: &AcquireArgs) -> Result<Vec<PathBuf>> {
    ensure_layout(&args.run_dir)?;
    let _lock = RunLock::acquire(&args.run_dir)?;
    let mut manifest = RunManifest::load(&args.run_dir)?;
    let circuit = load_circuit(&args.run_dir, &manifest.circuit.label)?;

    let profiles: Vec<PlatformProfile> = args
        .platform_paths
        .iter()
        .map(|p| Ok(PlatformProfile::from_path(p)?))
        .collect::<Result<_>>()?;
    let mut seen = std::collections::HashSet::new();
    for p in &profiles {
        if !seen.insert(p.name.clone()) {
            bail!("duplicate platform name {:?} in this acquisition", p.name);
        }
    }

    let requested = AcquisitionSpec {
        m_u: args.m_u,
        m_s: args.m_s,
        sampler: args.sampler.as_str().to_string(),
        n_candidates: args.n_candidates,
    };
    match &manifest.acquisition {
        Some(existing) if *existing != requested => bail!(
            "acquisition parameters differ from the manifest (manifest: {existing:?})"
        ),
        Some(_) => {}
        None => manifest.acquisition = Some(requested),
    }
    for profile in &profiles {
        let entry = PlatformEntry {
            name: profile.name.clone(),
            technology: profile.technology.to_string(),
            p1: profile.noise.p1,
            p2: profile.noise.p2,
            readout_eps: profile.noise.readout_eps,
            connectivity: profile.connectivity.clone(),
        };
        match manifest.platforms.iter().find(|e| e.name == entry.name) {
            Some(existing) if *existing != entry => bail!(
                "platform {:?} already acquired with a different profile",
                entry.name
            ),
            Some(_) => {}
            None => manifest.platforms.push(entry),
        }
    }
    manifest.save(&args.run_dir)?;
    let hash = manifest.hash();

    let settings = {
        let mut rng = substream(manifest.master_seed, "settings");
        match args.sampler {
            SamplerKind::Random => sample_settings_random(circuit.n_qubits, args.m_u, &mut rng),
            SamplerKind::Greedy => {
                sample_settings_greedy(circuit.n_qubits, args.m_u, args.n_candidates, &mut rng)
            }
        }
    };

    with_pool(args.threads, || {
        let mut paths = Vec::new();
        for profile in &profiles {
            let seed: u64 = substream(manifest.master_seed, &format!("shots:{}", profile.name)).gen();
            let mut ds = acquire_dataset(profile, &circuit, &settings, args.m_s, seed)?;
            ds.timestamp = Some(manifest.created.clone());
            ds.manifest_hash = Some(hash.clone());
            let path = args
                .run_dir
                .join("datasets")
                .join(format!("{}.jsonl", profile.name));
            write_atomic(&path, &ds.to_jsonl_string())?;
            paths.push(path);
        }
        Ok(paths)
    })
}

fn read_datasets(run_dir: &Path) -> Result<Vec<MeasurementDataset>> {
    let dir = run_dir.join("datasets");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "jsonl"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no datasets in {}", dir.display());
    }
    files.iter().map(|p| Ok(ingest_dataset(p)?)).collect()
}

/// First/second half of the setting list, for self-consistency diagonals
/// under Protocol II.
fn split_by_settings(ds: &MeasurementDataset) -> Result<(MeasurementDataset, MeasurementDataset)> {
    if ds.m_u() < 2 {
        bail!("need at least 2 settings to split {}", ds.platform);
    }
    let mid = ds.m_u().div_ceil(2);
    let mut a = ds.clone();
    let mut b = ds.clone();
    b.records = a.records.split_off(mid);
    Ok((a, b))
}

/// Alternating-shot halves of every record, for self-consistency diagonals
/// under Protocol I (which needs aligned setting lists).
fn split_by_shots(ds: &MeasurementDataset) -> Result<(MeasurementDataset, MeasurementDataset)> {
    if ds.m_s < 2 {
        bail!("need at least 2 shots per setting to split {}", ds.platform);
    }
    let mut a = ds.clone();
    let mut b = ds.clone();
    a.m_s = ds.m_s.div_ceil(2);
    b.m_s = ds.m_s / 2;
    let split = |rec: &SettingRecord| {
        let mut ca: BTreeMap<u32, u32> = BTreeMap::new();
        let mut cb: BTreeMap<u32, u32> = BTreeMap::new();
        let mut idx = 0u32;
        for (&outcome, &count) in &rec.counts {
            for _ in 0..count {
                if idx % 2 == 0 {
                    *ca.entry(outcome).or_default() += 1;
                } else {
                    *cb.entry(outcome).or_default() += 1;
                }
                idx += 1;
            }
        }
        (ca, cb)
    };
    for (ra, rb) in a.records.iter_mut().zip(b.records.iter_mut()) {
        let (ca, cb) = split(ra);
        ra.counts = ca;
        ra.shots = ds.m_s.div_ceil(2);
        rb.counts = cb;
        rb.shots = ds.m_s / 2;
    }
    Ok((a, b))
}

#[derive(Debug, Clone)]
pub struct EstimateArgs {
    pub run_dir: PathBuf,
    /// None: Protocol II up to 10 qubits, Protocol I above.
    pub protocol: Option<Protocol>,
    pub bootstrap_b: usize,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct EstimateOutputs {
    pub matrix_csv: PathBuf,
    pub pair_files: Vec<PathBuf>,
    pub protocol: Protocol,
}

#[derive(Serialize)]
struct EstimateFile<'a> {
    manifest_hash: &'a str,
    #[serde(flatten)]
    estimate: &'a FidelityEstimate,
}

/// All-pairs fidelities with bootstrap errors. Diagonal entries compare two
/// halves of the same platform's data (split by settings under Protocol II,
/// by shots under Protocol I) as a self-consistency number.
pub fn cmd_estimate(args: &EstimateArgs) -> Result<EstimateOutputs> {
    let _lock = RunLock::acquire(&args.run_dir)?;
    let mut manifest = RunManifest::load(&args.run_dir)?;
    let datasets = read_datasets(&args.run_dir)?;
    let n = datasets[0].n_qubits;
    for ds in &datasets {
        if ds.n_qubits != n {
            bail!(
                "datasets disagree on the qubit count ({} vs {})",
                ds.n_qubits,
                n
            );
        }
        if ds.circuit_label != datasets[0].circuit_label {
            bail!("datasets come from different circuits");
        }
    }
    let protocol = args.protocol.unwrap_or_else(|| default_protocol(n));
    manifest.estimation = Some(EstimationSpec {
        protocol: protocol.as_str().to_string(),
        bootstrap_b: args.bootstrap_b,
    });
    manifest.save(&args.run_dir)?;
    let hash = manifest.hash();
    let master = manifest.master_seed;

    let estimates: Vec<FidelityEstimate> = with_pool(args.threads, || {
        let mut out = Vec::new();
        for i in 0..datasets.len() {
            for j in i..datasets.len() {
                let est = if i == j {
                    let (a, b) = match protocol {
                        Protocol::One => split_by_shots(&datasets[i])?,
                        Protocol::Two => split_by_settings(&datasets[i])?,
                    };
                    let mut rng = substream(
                        master,
                        &format!("bootstrap:{}:diag", datasets[i].platform),
                    );
                    let mut est = estimate_pair(&a, &b, protocol, args.bootstrap_b, &mut rng)?;
                    est.pair = (datasets[i].platform.clone(), datasets[i].platform.clone());
                    est
                } else {
                    let mut rng = substream(
                        master,
                        &format!(
                            "bootstrap:{}__{}",
                            datasets[i].platform, datasets[j].platform
                        ),
                    );
                    estimate_pair(&datasets[i], &datasets[j], protocol, args.bootstrap_b, &mut rng)?
                };
                out.push(est);
            }
        }
        Ok(out)
    })?;

    // All computation succeeded; only now touch the filesystem.
    let mut pair_files = Vec::new();
    let names: Vec<String> = datasets.iter().map(|d| d.platform.clone()).collect();
    let mut matrix = vec![vec![f64::NAN; names.len()]; names.len()];
    let mut iter = estimates.iter();
    for i in 0..names.len() {
        for j in i..names.len() {
            let est = iter.next().unwrap();
            matrix[i][j] = est.fidelity;
            matrix[j][i] = est.fidelity;
            let path = args
                .run_dir
                .join("estimates/pairs")
                .join(format!("{}__{}.json", names[i], names[j]));
            let file = EstimateFile {
                manifest_hash: &hash,
                estimate: est,
            };
            write_atomic(&path, &serde_json::to_string_pretty(&file)?)?;
            pair_files.push(path);
        }
    }
    let mut csv = format!("# manifest={hash}\nplatform");
    for name in &names {
        csv.push(',');
        csv.push_str(name);
    }
    csv.push('\n');
    for (i, name) in names.iter().enumerate() {
        csv.push_str(name);
        for j in 0..names.len() {
            csv.push_str(&format!(",{}", matrix[i][j]));
        }
        csv.push('\n');
    }
    let matrix_csv = args.run_dir.join("estimates/fidelity_matrix.csv");
    write_atomic(&matrix_csv, &csv)?;
    Ok(EstimateOutputs {
        matrix_csv,
        pair_files,
        protocol,
    })
}

#[derive(Debug, Clone)]
pub struct SubsystemArgs {
    pub run_dir: PathBuf,
    pub max_size: usize,
    pub protocol: Option<Protocol>,
    pub bootstrap_b: usize,
    pub threads: Option<usize>,
}

fn subsets_up_to(n: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    fn rec(n: usize, start: usize, remaining: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            out.push(stack.clone());
            return;
        }
        for q in start..n {
            stack.push(q);
            rec(n, q + 1, remaining - 1, stack, out);
            stack.pop();
        }
    }
    for size in 1..=max_size.min(n) {
        rec(n, 0, size, &mut stack, &mut out);
    }
    out
}

/// Cross-platform fidelities of every qubit subset up to `max_size`, from
/// the same datasets with discarded qubits traced out.
pub fn cmd_subsystem(args: &SubsystemArgs) -> Result<PathBuf> {
    let _lock = RunLock::acquire(&args.run_dir)?;
    let manifest = RunManifest::load(&args.run_dir)?;
    let datasets = read_datasets(&args.run_dir)?;
    if datasets.len() < 2 {
        bail!("subsystem comparison needs at least 2 datasets");
    }
    let n = datasets[0].n_qubits;
    let hash = manifest.hash();
    let master = manifest.master_seed;
    let subsets = subsets_up_to(n, args.max_size);

    let mut csv = format!(
        "# manifest={hash}\nsubset_size,subset,platform_i,platform_j,protocol,overlap,purity_i,purity_j,fidelity,bootstrap_mean,bootstrap_std\n"
    );
    with_pool(args.threads, || {
        for i in 0..datasets.len() {
            for j in i + 1..datasets.len() {
                for subset in &subsets {
                    let protocol = args
                        .protocol
                        .unwrap_or_else(|| default_protocol(subset.len()));
                    let ra = qcross_core::estimate::subsystem_restrict(&datasets[i], subset)?;
                    let rb = qcross_core::estimate::subsystem_restrict(&datasets[j], subset)?;
                    let subset_tag = subset
                        .iter()
                        .map(|q| q.to_string())
                        .collect::<Vec<_>>()
                        .join("+");
                    let mut rng = substream(
                        master,
                        &format!(
                            "subsystem:{}__{}:{}",
                            datasets[i].platform, datasets[j].platform, subset_tag
                        ),
                    );
                    let est = estimate_pair(&ra, &rb, protocol, args.bootstrap_b, &mut rng)?;
                    csv.push_str(&format!(
                        "{},{},{},{},{},{},{},{},{},{},{}\n",
                        subset.len(),
                        subset_tag,
                        datasets[i].platform,
                        datasets[j].platform,
                        protocol.as_str(),
                        est.overlap,
                        est.purity_i,
                        est.purity_j,
                        est.fidelity,
                        est.bootstrap.mean,
                        est.bootstrap.std
                    ));
                }
            }
        }
        Ok(())
    })?;
    let path = args.run_dir.join("analysis/subsystem_fidelity.csv");
    write_atomic(&path, &csv)?;
    Ok(path)
}

#[derive(Debug, Clone)]
pub struct PcaArgs {
    pub run_dir: PathBuf,
    /// Dataset files to project; empty means every dataset of this run.
    pub datasets: Vec<PathBuf>,
    /// Overrides of the technology tag by platform name.
    pub technologies: Vec<(String, String)>,
    pub shots_per_sample: usize,
    pub n_repeat: usize,
    pub weight_cap: usize,
    pub n_min: usize,
    pub strict: Option<bool>,
    pub components: usize,
    pub threads: Option<usize>,
}

fn parse_technology(tag: &str) -> Result<Technology> {
    serde_json::from_value(serde_json::Value::String(tag.to_string()))
        .map_err(|_| anyhow!("unknown technology tag {tag:?}"))
}

/// Find a dataset's technology: explicit override first, then the platform
/// entry of the manifest sitting two levels above the dataset file.
fn resolve_technology(
    path: &Path,
    platform: &str,
    overrides: &BTreeMap<String, String>,
    this_manifest: &RunManifest,
    run_dir: &Path,
) -> Result<Technology> {
    if let Some(tag) = overrides.get(platform) {
        return parse_technology(tag);
    }
    if let Some(entry) = this_manifest.platforms.iter().find(|e| e.name == platform) {
        return parse_technology(&entry.technology);
    }
    if let Some(other_dir) = path.parent().and_then(|p| p.parent()) {
        if other_dir != run_dir && RunManifest::path(other_dir).exists() {
            let other = RunManifest::load(other_dir)?;
            if let Some(entry) = other.platforms.iter().find(|e| e.name == platform) {
                return parse_technology(&entry.technology);
            }
        }
    }
    bail!(
        "cannot resolve the technology of platform {platform:?}; pass --technology {platform}=<tag>"
    )
}

#[derive(Serialize)]
struct PcaSidecar {
    manifest_hash: String,
    k: usize,
    explained_variance: Vec<f64>,
    zero_variance: bool,
    weight_cap: usize,
    n_min: usize,
    shots_per_sample: usize,
    n_repeat: usize,
    strict: bool,
    n_rows: usize,
    n_columns: usize,
}

/// Build Pauli-expectation features from shot subsets and project them onto
/// the first principal axes.
pub fn cmd_pca(args: &PcaArgs) -> Result<(PathBuf, PathBuf, PathBuf)> {
    let _lock = RunLock::acquire(&args.run_dir)?;
    let manifest = RunManifest::load(&args.run_dir)?;
    let hash = manifest.hash();
    let paths: Vec<PathBuf> = if args.datasets.is_empty() {
        let dir = args.run_dir.join("datasets");
        let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|e| e == "jsonl"))
            .collect();
        files.sort();
        files
    } else {
        args.datasets.clone()
    };
    if paths.is_empty() {
        bail!("no datasets to analyze");
    }
    let overrides: BTreeMap<String, String> = args.technologies.iter().cloned().collect();
    let datasets: Vec<MeasurementDataset> =
        paths.iter().map(|p| Ok(ingest_dataset(p)?)).collect::<Result<_>>()?;
    let technologies: Vec<Technology> = datasets
        .iter()
        .zip(&paths)
        .map(|(ds, path)| {
            resolve_technology(path, &ds.platform, &overrides, &manifest, &args.run_dir)
        })
        .collect::<Result<_>>()?;

    let config = FeatureConfig {
        shots_per_sample: args.shots_per_sample,
        n_repeat: args.n_repeat,
        weight_cap: args.weight_cap,
        n_min: args.n_min,
        strict: args.strict,
    };
    let seed: u64 = substream(manifest.master_seed, "pca").gen();
    let (matrix, pca) = with_pool(args.threads, || {
        let inputs: Vec<FeatureInput> = datasets
            .iter()
            .zip(&technologies)
            .map(|(dataset, &technology)| FeatureInput {
                dataset,
                technology,
            })
            .collect();
        let matrix = build_feature_matrix(&inputs, &config, seed)?;
        let pca = pca_project(&matrix, args.components)?;
        Ok((matrix, pca))
    })?;

    let features_path = args.run_dir.join("analysis/features.csv");
    write_atomic(
        &features_path,
        &format!("# manifest={hash}\n{}", matrix.to_csv()),
    )?;
    let projection_path = args.run_dir.join("analysis/pca_projection.csv");
    write_atomic(
        &projection_path,
        &format!("# manifest={hash}\n{}", projection_csv(&matrix.labels, &pca)),
    )?;
    let sidecar = PcaSidecar {
        manifest_hash: hash,
        k: args.components,
        explained_variance: pca.explained_variance.clone(),
        zero_variance: pca.zero_variance,
        weight_cap: config.weight_cap,
        n_min: config.n_min,
        shots_per_sample: config.shots_per_sample,
        n_repeat: config.n_repeat,
        strict: config.strict.unwrap_or(false),
        n_rows: matrix.n_rows(),
        n_columns: matrix.n_cols(),
    };
    let variance_path = args.run_dir.join("analysis/pca_variance.json");
    write_atomic(&variance_path, &serde_json::to_string_pretty(&sidecar)?)?;
    Ok((features_path, projection_path, variance_path))
}

#[derive(Debug, Clone)]
pub struct RouteArgs {
    pub run_dir: PathBuf,
    /// Graph specs: "line:N", "complete:N", "t-shaped-7",
    /// "heavy-hex-fragment", or a path to a graph JSON file.
    pub graphs: Vec<String>,
    pub n: usize,
    pub d_values: Vec<usize>,
    pub trials: usize,
    pub threads: Option<usize>,
}

pub fn parse_graph_spec(spec: &str, n: usize) -> Result<ConnectivityGraph> {
    let graph = if let Some(rest) = spec.strip_prefix("line:") {
        ConnectivityGraph::line(rest.parse()?)?
    } else if let Some(rest) = spec.strip_prefix("complete:") {
        ConnectivityGraph::complete(rest.parse()?)?
    } else if spec == "line" {
        ConnectivityGraph::line(n)?
    } else if spec == "complete" {
        ConnectivityGraph::complete(n)?
    } else if spec == "t-shaped-7" {
        ConnectivityGraph::t_shaped_7()?
    } else if spec == "heavy-hex-fragment" {
        ConnectivityGraph::heavy_hex_fragment()?
    } else if spec.ends_with(".json") {
        ConnectivityGraph::from_json(&std::fs::read_to_string(spec)?)?
    } else {
        bail!("unknown graph spec {spec:?}");
    };
    if graph.n_qubits() != n {
        bail!(
            "graph {spec:?} has {} qubits, requested circuits have {n}",
            graph.n_qubits()
        );
    }
    Ok(graph)
}

/// Mean CNOT-equivalent cost of freshly sampled QV circuits per depth, for
/// each connectivity graph.
pub fn cmd_route(args: &RouteArgs) -> Result<PathBuf> {
    ensure_layout(&args.run_dir)?;
    let _lock = RunLock::acquire(&args.run_dir)?;
    let manifest = RunManifest::load(&args.run_dir)?;
    let hash = manifest.hash();
    let mut csv = format!(
        "# manifest={hash}\n# heuristic={ROUTING_HEURISTIC}\nd,mean_total,std_total,graph\n"
    );
    with_pool(args.threads, || {
        for spec in &args.graphs {
            let graph = parse_graph_spec(spec, args.n)?;
            let mut rng = substream(manifest.master_seed, &format!("route:{spec}"));
            let points = overhead_curve(args.n, &args.d_values, &graph, args.trials, &mut rng)?;
            for p in points {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    p.d, p.mean_total, p.std_total, graph.name
                ));
            }
        }
        Ok(())
    })?;
    let path = args.run_dir.join("analysis/route_overhead.csv");
    write_atomic(&path, &csv)?;
    Ok(path)
}

#[derive(Debug, Clone)]
pub struct ReportArgs {
    pub run_dir: PathBuf,
}

/// Bundle the manifest, file inventory and parsed estimates into one JSON.
pub fn cmd_report(args: &ReportArgs) -> Result<PathBuf> {
    let _lock = RunLock::acquire(&args.run_dir)?;
    let manifest = RunManifest::load(&args.run_dir)?;
    let hash = manifest.hash();

    let list_files = |sub: &str| -> Result<Vec<serde_json::Value>> {
        let dir = args.run_dir.join(sub);
        if !dir.exists() {
            return Ok(vec![]);
        }
        let mut entries: Vec<PathBuf> = std::fs::read_dir(&dir)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.is_file())
            .collect();
        entries.sort();
        entries
            .iter()
            .map(|p| {
                Ok(serde_json::json!({
                    "path": format!("{sub}/{}", p.file_name().unwrap().to_string_lossy()),
                    "bytes": std::fs::metadata(p)?.len(),
                }))
            })
            .collect()
    };

    let mut pair_estimates = Vec::new();
    let pairs_dir = args.run_dir.join("estimates/pairs");
    if pairs_dir.exists() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(&pairs_dir)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .collect();
        files.sort();
        for f in files {
            let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&f)?)?;
            pair_estimates.push(value);
        }
    }
    let read_text = |rel: &str| -> Option<String> {
        std::fs::read_to_string(args.run_dir.join(rel)).ok()
    };
    let report = serde_json::json!({
        "run_id": manifest.run_id,
        "manifest_hash": hash,
        "manifest": manifest,
        "files": {
            "circuits": list_files("circuits")?,
            "datasets": list_files("datasets")?,
            "estimates": list_files("estimates")?.into_iter()
                .chain(list_files("estimates/pairs")?).collect::<Vec<_>>(),
            "analysis": list_files("analysis")?,
        },
        "estimates": {
            "pairs": pair_estimates,
            "fidelity_matrix_csv": read_text("estimates/fidelity_matrix.csv"),
        },
        "analysis": {
            "subsystem_csv": read_text("analysis/subsystem_fidelity.csv"),
            "route_overhead_csv": read_text("analysis/route_overhead.csv"),
            "pca_variance": read_text("analysis/pca_variance.json")
                .and_then(|t| serde_json::from_str::<serde_json::Value>(&t).ok()),
        },
    });
    let path = args.run_dir.join("report.json");
    write_atomic(&path, &serde_json::to_string_pretty(&report)?)?;
    Ok(path)
}
