//! Randomized measurement settings, shot acquisition, and the portable
//! measurement-record format.
//!
//! A setting assigns one Pauli basis per qubit; the basis label denotes the
//! single-qubit rotation mapping that Pauli's eigenbasis to the computational
//! basis (X via Hadamard, Y via S† then Hadamard, Z via identity). Datasets
//! are JSON Lines: a header object
//! `{platform, circuit_label, n_qubits, m_u, m_s, seed, ...}` followed by one
//! line per setting `{"bases": "ZXY...", "counts": {"0101...": k, ...}}`.
//! Bitstrings are written qubit-0-first. This file format is the interchange
//! contract: records from a real device in the same schema are accepted.

use crate::circuits::{self, Circuit};
use crate::error::{Error, Result};
use crate::platforms::{
    simulate_density_matrix_with_cap, DensityMatrix, PlatformProfile, DM_QUBIT_CAP,
    TRAJECTORY_QUBIT_CAP,
};
use crate::rng::substream_indexed;
use crate::C64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::sync::OnceLock;

/// Measurement basis for one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

    pub fn as_char(self) -> char {
        match self {
            Basis::X => 'X',
            Basis::Y => 'Y',
            Basis::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Result<Basis> {
        match c {
            'X' => Ok(Basis::X),
            'Y' => Ok(Basis::Y),
            'Z' => Ok(Basis::Z),
            other => Err(Error::Parse(format!("invalid basis character {other:?}"))),
        }
    }

    fn index(self) -> usize {
        match self {
            Basis::X => 0,
            Basis::Y => 1,
            Basis::Z => 2,
        }
    }

    /// The rotation u mapping this basis' eigenstates to |0>, |1>.
    pub fn rotation_matrix(self) -> [C64; 4] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Basis::Z => circuits::identity2(),
            Basis::X => circuits::hadamard(),
            // H * S†: first S†, then Hadamard.
            Basis::Y => [
                C64::new(h, 0.0),
                C64::new(0.0, -h),
                C64::new(h, 0.0),
                C64::new(0.0, h),
            ],
        }
    }
}

/// Per-qubit basis labels for one randomized measurement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MeasurementSetting {
    bases: Vec<Basis>,
}

impl MeasurementSetting {
    pub fn new(bases: Vec<Basis>) -> MeasurementSetting {
        MeasurementSetting { bases }
    }

    pub fn parse(s: &str) -> Result<MeasurementSetting> {
        Ok(MeasurementSetting {
            bases: s.chars().map(Basis::from_char).collect::<Result<_>>()?,
        })
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn bases(&self) -> &[Basis] {
        &self.bases
    }

    pub fn basis(&self, qubit: usize) -> Basis {
        self.bases[qubit]
    }

    /// Restrict to a (sorted) qubit subset, keeping subset order.
    pub fn restrict(&self, qubits: &[usize]) -> MeasurementSetting {
        MeasurementSetting {
            bases: qubits.iter().map(|&q| self.bases[q]).collect(),
        }
    }
}

impl std::fmt::Display for MeasurementSetting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.bases {
            write!(f, "{}", b.as_char())?;
        }
        Ok(())
    }
}

/// Aggregated outcomes of one setting: counts per observed bitstring.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SettingRecord {
    pub setting: MeasurementSetting,
    pub counts: BTreeMap<u32, u32>,
    pub shots: u32,
}

impl SettingRecord {
    /// (outcome, cumulative count) pairs in outcome order; the last
    /// cumulative value equals `shots`.
    pub fn cumulative_counts(&self) -> Vec<(u32, u32)> {
        let mut acc = 0u32;
        self.counts
            .iter()
            .map(|(&outcome, &count)| {
                acc += count;
                (outcome, acc)
            })
            .collect()
    }

    /// Outcome of the `index`-th shot under the canonical sorted expansion.
    pub fn outcome_at(&self, index: u32) -> u32 {
        let mut acc = 0u32;
        for (&outcome, &count) in &self.counts {
            acc += count;
            if index < acc {
                return outcome;
            }
        }
        panic!("shot index {index} out of range ({} shots)", self.shots);
    }
}

/// All records for one (platform, circuit) pair; the unit sent to the
/// central data repository.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MeasurementDataset {
    pub platform: String,
    pub circuit_label: String,
    pub n_qubits: usize,
    pub m_s: u32,
    pub seed: u64,
    pub timestamp: Option<String>,
    pub manifest_hash: Option<String>,
    pub records: Vec<SettingRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DatasetHeader {
    platform: String,
    circuit_label: String,
    n_qubits: usize,
    m_u: usize,
    m_s: u32,
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    timestamp: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    manifest_hash: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RecordLine {
    bases: String,
    counts: BTreeMap<String, u32>,
}

fn outcome_to_string(outcome: u32, n: usize) -> String {
    (0..n)
        .map(|k| if (outcome >> k) & 1 == 1 { '1' } else { '0' })
        .collect()
}

fn outcome_from_string(s: &str, n: usize) -> Result<u32> {
    if s.len() != n {
        return Err(Error::Parse(format!(
            "outcome {s:?} has length {}, expected {n}",
            s.len()
        )));
    }
    let mut outcome = 0u32;
    for (k, c) in s.chars().enumerate() {
        match c {
            '0' => {}
            '1' => outcome |= 1 << k,
            other => return Err(Error::Parse(format!("invalid outcome bit {other:?}"))),
        }
    }
    Ok(outcome)
}

impl MeasurementDataset {
    pub fn m_u(&self) -> usize {
        self.records.len()
    }

    pub fn total_shots(&self) -> u64 {
        self.records.len() as u64 * u64::from(self.m_s)
    }

    /// True when both datasets carry the same setting list in the same order.
    pub fn aligned_with(&self, other: &MeasurementDataset) -> bool {
        self.n_qubits == other.n_qubits
            && self.records.len() == other.records.len()
            && self
                .records
                .iter()
                .zip(&other.records)
                .all(|(a, b)| a.setting == b.setting)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > 32 {
            return Err(Error::InvalidArgument(format!(
                "n_qubits = {} out of supported range",
                self.n_qubits
            )));
        }
        for (index, rec) in self.records.iter().enumerate() {
            if rec.setting.len() != self.n_qubits {
                return Err(Error::InvariantViolation {
                    index,
                    reason: format!(
                        "setting has {} bases, dataset has {} qubits",
                        rec.setting.len(),
                        self.n_qubits
                    ),
                });
            }
            if rec.shots != self.m_s {
                return Err(Error::InvariantViolation {
                    index,
                    reason: format!("record has {} shots, header says {}", rec.shots, self.m_s),
                });
            }
            let sum: u64 = rec.counts.values().map(|&c| u64::from(c)).sum();
            if sum != u64::from(rec.shots) {
                return Err(Error::InvariantViolation {
                    index,
                    reason: format!("counts sum to {sum}, expected {} shots", rec.shots),
                });
            }
            for &outcome in rec.counts.keys() {
                if u64::from(outcome) >= (1u64 << self.n_qubits) {
                    return Err(Error::InvariantViolation {
                        index,
                        reason: format!("outcome {outcome} outside {}-qubit range", self.n_qubits),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn to_jsonl_string(&self) -> String {
        let header = DatasetHeader {
            platform: self.platform.clone(),
            circuit_label: self.circuit_label.clone(),
            n_qubits: self.n_qubits,
            m_u: self.m_u(),
            m_s: self.m_s,
            seed: self.seed,
            timestamp: self.timestamp.clone(),
            manifest_hash: self.manifest_hash.clone(),
        };
        let mut out = serde_json::to_string(&header).expect("header serialization");
        out.push('\n');
        for rec in &self.records {
            let line = RecordLine {
                bases: rec.setting.to_string(),
                counts: rec
                    .counts
                    .iter()
                    .map(|(&o, &c)| (outcome_to_string(o, self.n_qubits), c))
                    .collect(),
            };
            out.push_str(&serde_json::to_string(&line).expect("record serialization"));
            out.push('\n');
        }
        out
    }

    pub fn write_jsonl(&self, path: &std::path::Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_jsonl_string().as_bytes())?;
        Ok(())
    }

    pub fn parse_jsonl(text: &str) -> Result<MeasurementDataset> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header_line = lines
            .next()
            .ok_or_else(|| Error::Parse("empty dataset file".into()))?;
        let header: DatasetHeader = serde_json::from_str(header_line)?;
        let mut records = Vec::new();
        for (index, line) in lines.enumerate() {
            let parsed: RecordLine = serde_json::from_str(line).map_err(|e| Error::InvariantViolation {
                index,
                reason: format!("malformed record line: {e}"),
            })?;
            let setting = MeasurementSetting::parse(&parsed.bases).map_err(|e| {
                Error::InvariantViolation {
                    index,
                    reason: e.to_string(),
                }
            })?;
            let mut counts = BTreeMap::new();
            for (key, count) in parsed.counts {
                let outcome = outcome_from_string(&key, header.n_qubits).map_err(|e| {
                    Error::InvariantViolation {
                        index,
                        reason: e.to_string(),
                    }
                })?;
                counts.insert(outcome, count);
            }
            records.push(SettingRecord {
                setting,
                counts,
                shots: header.m_s,
            });
        }
        if records.len() != header.m_u {
            return Err(Error::Parse(format!(
                "header declares m_u = {}, file has {} records",
                header.m_u,
                records.len()
            )));
        }
        let ds = MeasurementDataset {
            platform: header.platform,
            circuit_label: header.circuit_label,
            n_qubits: header.n_qubits,
            m_s: header.m_s,
            seed: header.seed,
            timestamp: header.timestamp,
            manifest_hash: header.manifest_hash,
            records,
        };
        ds.validate()?;
        Ok(ds)
    }
}

/// Read and validate a dataset file.
pub fn ingest_dataset(path: &std::path::Path) -> Result<MeasurementDataset> {
    let text = std::fs::read_to_string(path)?;
    MeasurementDataset::parse_jsonl(&text)
}

/// `m_u` settings with every basis label i.i.d. uniform over {X, Y, Z}.
pub fn sample_settings_random(
    n: usize,
    m_u: usize,
    rng: &mut impl Rng,
) -> Vec<MeasurementSetting> {
    (0..m_u)
        .map(|_| {
            MeasurementSetting::new(
                (0..n)
                    .map(|_| Basis::ALL[rng.gen_range(0..3)])
                    .collect(),
            )
        })
        .collect()
}

/// How per-qubit distances combine into a setting distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceAggregation {
    /// Sum over qubits (default).
    Sum,
    /// Maximum over qubits.
    Max,
}

/// 26-point Bloch-sphere design: the nonzero points of {-1,0,1}^3, normalized
/// (cube faces, edges and corners). Deterministic and symmetric under axis
/// interchange.
fn bloch_design() -> Vec<[f64; 3]> {
    let mut points = Vec::with_capacity(26);
    for x in -1i32..=1 {
        for y in -1i32..=1 {
            for z in -1i32..=1 {
                if (x, y, z) == (0, 0, 0) {
                    continue;
                }
                let v = [f64::from(x), f64::from(y), f64::from(z)];
                let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                points.push([v[0] / norm, v[1] / norm, v[2] / norm]);
            }
        }
    }
    points
}

/// p(outcome 0) when the state with Bloch vector `n` is measured in `basis`.
fn prob_zero(basis: Basis, n: &[f64; 3]) -> f64 {
    let u = basis.rotation_matrix();
    // rho = (I + n . sigma)/2
    let rho = [
        C64::new((1.0 + n[2]) / 2.0, 0.0),
        C64::new(n[0] / 2.0, -n[1] / 2.0),
        C64::new(n[0] / 2.0, n[1] / 2.0),
        C64::new((1.0 - n[2]) / 2.0, 0.0),
    ];
    // (u rho u†)[0][0]
    let mut acc = C64::new(0.0, 0.0);
    for a in 0..2 {
        for b in 0..2 {
            acc += u[a] * rho[a * 2 + b] * u[b].conj();
        }
    }
    acc.re
}

/// Pairwise single-qubit distances, computed once.
fn distance_table() -> &'static [[f64; 3]; 3] {
    static TABLE: OnceLock<[[f64; 3]; 3]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let design = bloch_design();
        let mut table = [[0.0f64; 3]; 3];
        for a in Basis::ALL {
            for b in Basis::ALL {
                let mut best: f64 = 0.0;
                for n in &design {
                    // Trace distance of the post-measurement (dephased)
                    // states equals the total-variation distance of the
                    // outcome distributions.
                    let d = (prob_zero(a, n) - prob_zero(b, n)).abs();
                    best = best.max(d);
                }
                table[a.index()][b.index()] = best;
            }
        }
        table
    })
}

/// Distance between two single-qubit bases: maximum over the 26-point Bloch
/// design of the trace distance between the dephased rotated states. Zero
/// iff the bases are measurement-equivalent.
pub fn single_qubit_distance(a: Basis, b: Basis) -> f64 {
    distance_table()[a.index()][b.index()]
}

/// Distance between two product settings.
pub fn setting_distance(a: &MeasurementSetting, b: &MeasurementSetting) -> Result<f64> {
    setting_distance_with(a, b, DistanceAggregation::Sum)
}

pub fn setting_distance_with(
    a: &MeasurementSetting,
    b: &MeasurementSetting,
    agg: DistanceAggregation,
) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "settings of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    let per_qubit = a
        .bases()
        .iter()
        .zip(b.bases())
        .map(|(&x, &y)| single_qubit_distance(x, y));
    Ok(match agg {
        DistanceAggregation::Sum => per_qubit.sum(),
        DistanceAggregation::Max => per_qubit.fold(0.0f64, f64::max),
    })
}

/// Greedy max-spread sampling: the first setting is uniform; each subsequent
/// setting is the best of `n_candidates` fresh uniform candidates under the
/// cost C(u; u_1..u_{i-1}) = -sum_j d(u, u_j), ties broken by the first
/// candidate drawn. Candidates equal to an already-chosen setting are
/// skipped while distinct ones exist, so the output has no duplicates as
/// long as m_u <= 3^n is achievable within the candidate budget.
pub fn sample_settings_greedy(
    n: usize,
    m_u: usize,
    n_candidates: usize,
    rng: &mut impl Rng,
) -> Vec<MeasurementSetting> {
    sample_settings_greedy_with(n, m_u, n_candidates, DistanceAggregation::Sum, rng)
}

pub fn sample_settings_greedy_with(
    n: usize,
    m_u: usize,
    n_candidates: usize,
    agg: DistanceAggregation,
    rng: &mut impl Rng,
) -> Vec<MeasurementSetting> {
    assert!(m_u >= 1 && n_candidates >= 1);
    let table = distance_table();
    let mut chosen: Vec<MeasurementSetting> = Vec::with_capacity(m_u);
    let mut chosen_keys: std::collections::HashSet<Vec<Basis>> = std::collections::HashSet::new();
    // Per-qubit tallies of chosen bases; for the Sum rule the total distance
    // to every prior setting reduces to a 3-entry dot product per qubit.
    let mut tallies = vec![[0u32; 3]; n];

    let first = sample_settings_random(n, 1, rng).pop().unwrap();
    chosen_keys.insert(first.bases().to_vec());
    for (k, &b) in first.bases().iter().enumerate() {
        tallies[k][b.index()] += 1;
    }
    chosen.push(first);

    for _ in 1..m_u {
        let mut best_fresh: Option<(f64, MeasurementSetting)> = None;
        let mut best_any: Option<(f64, MeasurementSetting)> = None;
        for _ in 0..n_candidates {
            let cand = sample_settings_random(n, 1, rng).pop().unwrap();
            let spread = match agg {
                DistanceAggregation::Sum => {
                    let mut acc = 0.0;
                    for (k, &b) in cand.bases().iter().enumerate() {
                        for other in 0..3 {
                            acc += f64::from(tallies[k][other]) * table[b.index()][other];
                        }
                    }
                    acc
                }
                DistanceAggregation::Max => chosen
                    .iter()
                    .map(|prev| setting_distance_with(&cand, prev, agg).unwrap())
                    .sum(),
            };
            let fresh = !chosen_keys.contains(cand.bases());
            if best_any.as_ref().map_or(true, |(s, _)| spread > *s) {
                best_any = Some((spread, cand.clone()));
            }
            if fresh && best_fresh.as_ref().map_or(true, |(s, _)| spread > *s) {
                best_fresh = Some((spread, cand));
            }
        }
        let (_, pick) = best_fresh.or(best_any).unwrap();
        chosen_keys.insert(pick.bases().to_vec());
        for (k, &b) in pick.bases().iter().enumerate() {
            tallies[k][b.index()] += 1;
        }
        chosen.push(pick);
    }
    chosen
}

enum Prepared {
    /// Exact noisy state; reused across settings.
    Dense(DensityMatrix),
    /// Noiseless final state for the no-insertion fast path; noisy shots
    /// re-simulate their trajectory.
    Trajectory { noiseless: Vec<C64> },
}

fn prepare_state(
    profile: &PlatformProfile,
    circuit: &Circuit,
    dm_cap: usize,
    trajectory_cap: usize,
) -> Result<Prepared> {
    profile.noise.validate()?;
    if circuit.n_qubits <= dm_cap {
        Ok(Prepared::Dense(simulate_density_matrix_with_cap(
            circuit,
            &profile.noise,
            dm_cap,
        )?))
    } else if circuit.n_qubits <= trajectory_cap {
        Ok(Prepared::Trajectory {
            noiseless: circuits::apply_circuit(circuit, &circuits::zero_state(circuit.n_qubits))?,
        })
    } else {
        Err(Error::Capacity(format!(
            "{} qubits exceeds the trajectory cap of {trajectory_cap}",
            circuit.n_qubits
        )))
    }
}

fn rotate_statevector(state: &[C64], setting: &MeasurementSetting) -> Vec<C64> {
    let mut out = state.to_vec();
    for (q, &b) in setting.bases().iter().enumerate() {
        circuits::apply_one_qubit(&mut out, q, &b.rotation_matrix());
    }
    out
}

fn cumulative_from_probs(probs: &[f64]) -> Vec<f64> {
    let mut cum = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p.max(0.0);
        cum.push(acc);
    }
    cum
}

fn sample_from_cumulative(cum: &[f64], rng: &mut impl Rng) -> u32 {
    let total = *cum.last().unwrap();
    let u = rng.gen::<f64>() * total;
    let idx = cum.partition_point(|&c| c <= u);
    idx.min(cum.len() - 1) as u32
}

fn apply_readout(outcome: u32, n: usize, eps: f64, rng: &mut impl Rng) -> u32 {
    if eps <= 0.0 {
        return outcome;
    }
    let mut out = outcome;
    for k in 0..n {
        if rng.gen::<f64>() < eps {
            out ^= 1 << k;
        }
    }
    out
}

fn shots_from_prepared(
    prepared: &Prepared,
    profile: &PlatformProfile,
    circuit: &Circuit,
    setting: &MeasurementSetting,
    m_s: u32,
    rng: &mut impl Rng,
) -> SettingRecord {
    let n = circuit.n_qubits;
    let eps = profile.noise.readout_eps;
    let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
    match prepared {
        Prepared::Dense(rho) => {
            let mut rotated = rho.clone();
            for (q, &b) in setting.bases().iter().enumerate() {
                rotated.apply_one_qubit(q, &b.rotation_matrix());
            }
            let cum = cumulative_from_probs(&rotated.diagonal_probs());
            for _ in 0..m_s {
                let raw = sample_from_cumulative(&cum, rng);
                let outcome = apply_readout(raw, n, eps, rng);
                *counts.entry(outcome).or_default() += 1;
            }
        }
        Prepared::Trajectory { noiseless } => {
            let rotated = rotate_statevector(noiseless, setting);
            let cum = cumulative_from_probs(&rotated.iter().map(|a| a.norm_sqr()).collect::<Vec<_>>());
            let noise = &profile.noise;
            for _ in 0..m_s {
                // Draw the per-gate insertion pattern first so the stream
                // layout does not depend on the fast path being taken.
                let mut insertions: Vec<(usize, usize)> = Vec::new();
                for (gi, gate) in circuit.gates().iter().enumerate() {
                    let p = match gate.kind() {
                        circuits::GateKind::OneQubit => noise.p1,
                        circuits::GateKind::TwoQubit => noise.p2,
                    };
                    if p > 0.0 && rng.gen::<f64>() < p {
                        let n_paulis = match gate.kind() {
                            circuits::GateKind::OneQubit => 4usize,
                            circuits::GateKind::TwoQubit => 16usize,
                        };
                        insertions.push((gi, rng.gen_range(1..n_paulis)));
                    }
                }
                let raw = if insertions.is_empty() {
                    sample_from_cumulative(&cum, rng)
                } else {
                    let mut state = circuits::zero_state(n);
                    let mut next = insertions.iter().peekable();
                    for (gi, gate) in circuit.gates().iter().enumerate() {
                        circuits::apply_gate(&mut state, gate);
                        if let Some(&&(idx, pauli)) = next.peek() {
                            if idx == gi {
                                apply_pauli_insertion(&mut state, gate, pauli);
                                next.next();
                            }
                        }
                    }
                    for (q, &b) in setting.bases().iter().enumerate() {
                        circuits::apply_one_qubit(&mut state, q, &b.rotation_matrix());
                    }
                    let probs: Vec<f64> = state.iter().map(|a| a.norm_sqr()).collect();
                    sample_from_cumulative(&cumulative_from_probs(&probs), rng)
                };
                let outcome = apply_readout(raw, n, eps, rng);
                *counts.entry(outcome).or_default() += 1;
            }
        }
    }
    SettingRecord {
        setting: setting.clone(),
        counts,
        shots: m_s,
    }
}

fn apply_pauli_insertion(state: &mut [C64], gate: &crate::circuits::Gate, pauli: usize) {
    match gate.kind() {
        circuits::GateKind::OneQubit => {
            circuits::apply_one_qubit(state, gate.targets()[0], &circuits::pauli_matrix(pauli));
        }
        circuits::GateKind::TwoQubit => {
            let (pa, pb) = (pauli & 3, pauli >> 2);
            if pa != 0 {
                circuits::apply_one_qubit(state, gate.targets()[0], &circuits::pauli_matrix(pa));
            }
            if pb != 0 {
                circuits::apply_one_qubit(state, gate.targets()[1], &circuits::pauli_matrix(pb));
            }
        }
    }
}

/// Simulate one setting: prepare the (noisy) state, rotate into the
/// measurement basis, draw `m_s` outcomes, apply readout flips.
pub fn acquire_shots(
    profile: &PlatformProfile,
    circuit: &Circuit,
    setting: &MeasurementSetting,
    m_s: u32,
    rng: &mut impl Rng,
) -> Result<SettingRecord> {
    if m_s < 1 {
        return Err(Error::InvalidArgument("m_s must be >= 1".into()));
    }
    if setting.len() != circuit.n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "setting has {} bases, circuit has {} qubits",
            setting.len(),
            circuit.n_qubits
        )));
    }
    let prepared = prepare_state(profile, circuit, DM_QUBIT_CAP, TRAJECTORY_QUBIT_CAP)?;
    Ok(shots_from_prepared(
        &prepared, profile, circuit, setting, m_s, rng,
    ))
}

/// Acquire a full dataset: the state is simulated once and settings run in
/// parallel, each on its own generator derived from `seed`, so the result is
/// independent of the worker count.
pub fn acquire_dataset(
    profile: &PlatformProfile,
    circuit: &Circuit,
    settings: &[MeasurementSetting],
    m_s: u32,
    seed: u64,
) -> Result<MeasurementDataset> {
    acquire_dataset_with_caps(
        profile,
        circuit,
        settings,
        m_s,
        seed,
        DM_QUBIT_CAP,
        TRAJECTORY_QUBIT_CAP,
    )
}

/// [`acquire_dataset`] with explicit simulator caps.
pub fn acquire_dataset_with_caps(
    profile: &PlatformProfile,
    circuit: &Circuit,
    settings: &[MeasurementSetting],
    m_s: u32,
    seed: u64,
    dm_cap: usize,
    trajectory_cap: usize,
) -> Result<MeasurementDataset> {
    if settings.is_empty() {
        return Err(Error::InvalidArgument("no measurement settings".into()));
    }
    if m_s < 1 {
        return Err(Error::InvalidArgument("m_s must be >= 1".into()));
    }
    for s in settings {
        if s.len() != circuit.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "setting has {} bases, circuit has {} qubits",
                s.len(),
                circuit.n_qubits
            )));
        }
    }
    let prepared = prepare_state(profile, circuit, dm_cap, trajectory_cap)?;
    let records: Vec<SettingRecord> = settings
        .par_iter()
        .enumerate()
        .map(|(idx, setting)| {
            let mut rng = substream_indexed(seed, "setting", idx as u64);
            shots_from_prepared(&prepared, profile, circuit, setting, m_s, &mut rng)
        })
        .collect();
    let ds = MeasurementDataset {
        platform: profile.name.clone(),
        circuit_label: circuit.label.clone(),
        n_qubits: circuit.n_qubits,
        m_s,
        seed,
        timestamp: None,
        manifest_hash: None,
        records,
    };
    ds.validate()?;
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::build_ghz;
    use crate::platforms::{NoiseModel, Technology};
    use crate::platforms::ConnectivitySpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn simulation_profile(name: &str) -> PlatformProfile {
        PlatformProfile::new(
            name,
            Technology::Simulation,
            NoiseModel::noiseless(),
            ConnectivitySpec::Named("complete".into()),
        )
        .unwrap()
    }

    #[test]
    fn random_settings_have_requested_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let settings = sample_settings_random(13, 1000, &mut rng);
        assert_eq!(settings.len(), 1000);
        assert!(settings.iter().all(|s| s.len() == 13));
    }

    #[test]
    fn random_settings_are_uniform_per_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let settings = sample_settings_random(1, 30_000, &mut rng);
        let mut counts = [0u32; 3];
        for s in &settings {
            counts[s.basis(0).index()] += 1;
        }
        for &c in &counts {
            let freq = f64::from(c) / 30_000.0;
            assert!((freq - 1.0 / 3.0).abs() < 0.01, "freq {freq}");
        }
    }

    #[test]
    fn random_settings_are_deterministic() {
        let a = sample_settings_random(6, 40, &mut ChaCha8Rng::seed_from_u64(9));
        let b = sample_settings_random(6, 40, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn distance_is_zero_iff_same_basis() {
        for a in Basis::ALL {
            for b in Basis::ALL {
                let d = single_qubit_distance(a, b);
                if a == b {
                    assert_eq!(d, 0.0);
                } else {
                    assert!(d > 0.0);
                }
            }
        }
    }

    #[test]
    fn distance_is_symmetric_under_basis_interchange() {
        let dzx = single_qubit_distance(Basis::Z, Basis::X);
        let dzy = single_qubit_distance(Basis::Z, Basis::Y);
        let dxy = single_qubit_distance(Basis::X, Basis::Y);
        assert!(dzx > 0.0);
        assert!((dzx - dzy).abs() < 1e-12);
        assert!((dzx - dxy).abs() < 1e-12);
        // Max over the design is attained on the +-axis points: 1/sqrt(2).
        assert!((dzx - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn setting_distance_is_additive_over_qubits() {
        let zz = MeasurementSetting::parse("ZZ").unwrap();
        let zx = MeasurementSetting::parse("ZX").unwrap();
        let d = setting_distance(&zz, &zx).unwrap();
        assert!((d - single_qubit_distance(Basis::Z, Basis::X)).abs() < 1e-12);
        assert_eq!(setting_distance(&zz, &zz).unwrap(), 0.0);
        assert!(setting_distance(
            &zz,
            &MeasurementSetting::parse("ZZZ").unwrap()
        )
        .is_err());
    }

    #[test]
    fn greedy_single_qubit_covers_all_bases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let settings = sample_settings_greedy(1, 3, 200, &mut rng);
        for i in 0..3 {
            for j in i + 1..3 {
                assert!(setting_distance(&settings[i], &settings[j]).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn greedy_with_single_setting_is_uniform_draw() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let settings = sample_settings_greedy(4, 1, 200, &mut rng);
        assert_eq!(settings.len(), 1);
    }

    #[test]
    fn greedy_has_no_duplicates_within_basis_space() {
        for (n, m_u) in [(1usize, 3usize), (2, 9), (3, 20)] {
            let mut rng = ChaCha8Rng::seed_from_u64(7 + n as u64);
            let settings = sample_settings_greedy(n, m_u, 200, &mut rng);
            let mut keys: Vec<String> = settings.iter().map(|s| s.to_string()).collect();
            keys.sort();
            keys.dedup();
            assert_eq!(keys.len(), m_u, "duplicates in greedy output");
        }
    }

    #[test]
    fn greedy_spreads_more_than_random() {
        let mean_pairwise = |settings: &[MeasurementSetting]| -> f64 {
            let mut acc = 0.0;
            let mut count = 0u32;
            for i in 0..settings.len() {
                for j in i + 1..settings.len() {
                    acc += setting_distance(&settings[i], &settings[j]).unwrap();
                    count += 1;
                }
            }
            acc / f64::from(count)
        };
        let mut greedy_mean = 0.0;
        let mut random_mean = 0.0;
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            greedy_mean += mean_pairwise(&sample_settings_greedy(5, 100, 200, &mut rng));
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            random_mean += mean_pairwise(&sample_settings_random(5, 100, &mut rng));
        }
        assert!(
            greedy_mean >= random_mean,
            "greedy {greedy_mean} vs random {random_mean}"
        );
    }

    #[test]
    fn ghz_all_z_acquisition_is_two_peaked() {
        let profile = simulation_profile("sim");
        let circ = build_ghz(5).unwrap();
        let setting = MeasurementSetting::parse("ZZZZZ").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rec = acquire_shots(&profile, &circ, &setting, 2000, &mut rng).unwrap();
        assert!(rec.counts.keys().all(|&o| o == 0 || o == 31));
        let f0 = f64::from(rec.counts[&0]) / 2000.0;
        assert!((f0 - 0.5).abs() < 0.02, "freq {f0}");
        let total: u32 = rec.counts.values().sum();
        assert_eq!(total, 2000);
    }

    #[test]
    fn ghz2_in_xx_basis_has_even_parity() {
        let profile = simulation_profile("sim");
        let circ = build_ghz(2).unwrap();
        let setting = MeasurementSetting::parse("XX").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rec = acquire_shots(&profile, &circ, &setting, 1000, &mut rng).unwrap();
        assert!(rec.counts.keys().all(|&o| o == 0b00 || o == 0b11));
    }

    #[test]
    fn acquisition_reproduces_born_probabilities() {
        // 4-standard-error check on every outcome with p >= 0.01.
        let profile = simulation_profile("sim");
        let circ = build_ghz(3).unwrap();
        let setting = MeasurementSetting::parse("ZXZ").unwrap();
        let m_s = 20_000u32;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rec = acquire_shots(&profile, &circ, &setting, m_s, &mut rng).unwrap();
        let mut rho =
            crate::platforms::simulate_density_matrix(&circ, &NoiseModel::noiseless()).unwrap();
        for (q, &b) in setting.bases().iter().enumerate() {
            rho.apply_one_qubit(q, &b.rotation_matrix());
        }
        let probs = rho.diagonal_probs();
        for (outcome, &p) in probs.iter().enumerate() {
            if p < 0.01 {
                continue;
            }
            let observed =
                f64::from(rec.counts.get(&(outcome as u32)).copied().unwrap_or(0)) / f64::from(m_s);
            let se = (p * (1.0 - p) / f64::from(m_s)).sqrt();
            assert!(
                (observed - p).abs() < 4.0 * se,
                "outcome {outcome}: {observed} vs {p}"
            );
        }
    }

    #[test]
    fn acquire_dataset_is_deterministic_and_thread_safe() {
        let profile = simulation_profile("sim");
        let circ = build_ghz(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let settings = sample_settings_random(4, 20, &mut rng);
        let a = acquire_dataset(&profile, &circ, &settings, 100, 42).unwrap();
        let b = acquire_dataset(&profile, &circ, &settings, 100, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trajectory_path_matches_dense_path_statistically() {
        // Force the trajectory path on a small system by lowering the cap
        // and compare outcome frequencies against the exact dense path.
        let profile = PlatformProfile::new(
            "noisy",
            Technology::TrappedIon,
            NoiseModel {
                p1: 0.002,
                p2: 0.03,
                readout_eps: 0.01,
            },
            ConnectivitySpec::Named("complete".into()),
        )
        .unwrap();
        let circ = build_ghz(3).unwrap();
        let settings = vec![MeasurementSetting::parse("ZXY").unwrap()];
        let m_s = 40_000u32;
        let dense = acquire_dataset(&profile, &circ, &settings, m_s, 7).unwrap();
        let traj =
            acquire_dataset_with_caps(&profile, &circ, &settings, m_s, 7, 0, 13).unwrap();
        for outcome in 0..8u32 {
            let fd = f64::from(dense.records[0].counts.get(&outcome).copied().unwrap_or(0))
                / f64::from(m_s);
            let ft = f64::from(traj.records[0].counts.get(&outcome).copied().unwrap_or(0))
                / f64::from(m_s);
            assert!((fd - ft).abs() < 0.01, "outcome {outcome}: {fd} vs {ft}");
        }
    }

    #[test]
    fn jsonl_round_trip_is_lossless() {
        let profile = simulation_profile("ion_a");
        let circ = build_ghz(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let settings = sample_settings_random(3, 9, &mut rng);
        let mut ds = acquire_dataset(&profile, &circ, &settings, 50, 3).unwrap();
        ds.timestamp = Some("2021-06-01T00:00:00Z".into());
        ds.manifest_hash = Some("abc123".into());
        let text = ds.to_jsonl_string();
        let back = MeasurementDataset::parse_jsonl(&text).unwrap();
        assert_eq!(ds, back);
        assert_eq!(text, back.to_jsonl_string());
    }

    #[test]
    fn ingest_rejects_bad_counts_sum_with_record_index() {
        let text = concat!(
            r#"{"platform":"p","circuit_label":"c","n_qubits":2,"m_u":2,"m_s":4,"seed":0}"#,
            "\n",
            r#"{"bases":"ZZ","counts":{"00":2,"11":2}}"#,
            "\n",
            r#"{"bases":"XZ","counts":{"00":1,"10":2}}"#,
            "\n"
        );
        match MeasurementDataset::parse_jsonl(text) {
            Err(Error::InvariantViolation { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected invariant violation, got {other:?}"),
        }
    }

    #[test]
    fn ingest_accepts_external_schema_files() {
        // A file not produced by this crate (no timestamp, no hash) parses.
        let text = concat!(
            r#"{"platform":"real-device","circuit_label":"ghz2","n_qubits":2,"m_u":1,"m_s":3,"seed":9}"#,
            "\n",
            r#"{"bases":"XY","counts":{"00":1,"01":1,"11":1}}"#,
            "\n"
        );
        let ds = MeasurementDataset::parse_jsonl(text).unwrap();
        assert_eq!(ds.m_u(), 1);
        assert_eq!(ds.records[0].counts[&0b10], 1);
    }

    #[test]
    fn outcome_strings_are_qubit_zero_first() {
        assert_eq!(outcome_to_string(0b01, 2), "10");
        assert_eq!(outcome_from_string("10", 2).unwrap(), 0b01);
        assert!(outcome_from_string("102", 3).is_err());
    }
}
