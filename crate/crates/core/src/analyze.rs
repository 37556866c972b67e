//! Pauli-expectation feature vectors and PCA over randomized-measurement data.
//!
//! Small shot subsets are drawn from each dataset; the Pauli strings whose
//! expectation values the subset can evaluate (basis-matching shots on the
//! string's support) become feature coordinates, and repeats build a row per
//! subset. Projecting the rows onto the first two principal axes exposes
//! which circuit produced a dataset and which noise family the platform
//! belongs to.

use crate::error::{Error, Result};
use crate::measure::{Basis, MeasurementDataset, MeasurementSetting};
use crate::platforms::Technology;
use crate::rng::substream_indexed;
use crate::stats::{mean, pairwise_sum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Single-qubit Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PauliOp {
    I,
    X,
    Y,
    Z,
}

impl PauliOp {
    pub fn as_char(self) -> char {
        match self {
            PauliOp::I => 'I',
            PauliOp::X => 'X',
            PauliOp::Y => 'Y',
            PauliOp::Z => 'Z',
        }
    }

    fn matches(self, basis: Basis) -> bool {
        matches!(
            (self, basis),
            (PauliOp::X, Basis::X) | (PauliOp::Y, Basis::Y) | (PauliOp::Z, Basis::Z)
        )
    }
}

/// A Pauli string over n qubits (qubit 0 first).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    ops: Vec<PauliOp>,
}

impl PauliString {
    pub fn new(ops: Vec<PauliOp>) -> PauliString {
        PauliString { ops }
    }

    pub fn parse(s: &str) -> Result<PauliString> {
        let ops = s
            .chars()
            .map(|c| match c {
                'I' => Ok(PauliOp::I),
                'X' => Ok(PauliOp::X),
                'Y' => Ok(PauliOp::Y),
                'Z' => Ok(PauliOp::Z),
                other => Err(Error::Parse(format!("invalid Pauli letter {other:?}"))),
            })
            .collect::<Result<_>>()?;
        Ok(PauliString { ops })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.ops.iter().filter(|&&op| op != PauliOp::I).count()
    }

    /// Bitmask over the non-identity support.
    pub fn support_mask(&self) -> u32 {
        let mut mask = 0u32;
        for (k, &op) in self.ops.iter().enumerate() {
            if op != PauliOp::I {
                mask |= 1 << k;
            }
        }
        mask
    }

    /// A shot can evaluate this string when the measured basis matches every
    /// non-identity factor.
    pub fn evaluable_in(&self, setting: &MeasurementSetting) -> bool {
        self.ops
            .iter()
            .enumerate()
            .all(|(k, &op)| op == PauliOp::I || op.matches(setting.basis(k)))
    }
}

impl std::fmt::Display for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for op in &self.ops {
            write!(f, "{}", op.as_char())?;
        }
        Ok(())
    }
}

/// One shot of a randomized measurement.
#[derive(Debug, Clone, Copy)]
pub struct ShotSample<'a> {
    pub setting: &'a MeasurementSetting,
    pub outcome: u32,
}

/// Every Pauli string of weight 1..=`weight_cap`.
pub fn enumerate_paulis(n: usize, weight_cap: usize) -> Vec<PauliString> {
    let mut out = Vec::new();
    let letters = [PauliOp::X, PauliOp::Y, PauliOp::Z];
    let mut positions: Vec<usize> = Vec::new();
    fn rec(
        n: usize,
        start: usize,
        remaining: usize,
        positions: &mut Vec<usize>,
        letters: &[PauliOp; 3],
        out: &mut Vec<PauliString>,
    ) {
        if remaining == 0 {
            let k = positions.len();
            for assignment in 0..3usize.pow(k as u32) {
                let mut ops = vec![PauliOp::I; n];
                let mut a = assignment;
                for &pos in positions.iter() {
                    ops[pos] = letters[a % 3];
                    a /= 3;
                }
                out.push(PauliString::new(ops));
            }
            return;
        }
        for pos in start..n {
            positions.push(pos);
            rec(n, pos + 1, remaining - 1, positions, letters, out);
            positions.pop();
        }
    }
    for w in 1..=weight_cap.min(n) {
        rec(n, 0, w, &mut positions, &letters, &mut out);
    }
    out.sort();
    out
}

fn matching_count(string: &PauliString, sample: &[ShotSample<'_>]) -> usize {
    sample
        .iter()
        .filter(|shot| string.evaluable_in(shot.setting))
        .count()
}

/// All Pauli strings up to `weight_cap` with at least `n_min` matching shots
/// in the sample.
pub fn evaluable_paulis(
    sample: &[ShotSample<'_>],
    weight_cap: usize,
    n_min: usize,
) -> Result<Vec<PauliString>> {
    if sample.is_empty() {
        return Err(Error::InvalidArgument("empty shot sample".into()));
    }
    let n = sample[0].setting.len();
    Ok(enumerate_paulis(n, weight_cap)
        .into_iter()
        .filter(|p| matching_count(p, sample) >= n_min)
        .collect())
}

/// Expectation values over the sample: for each string, the average over
/// matching shots of the product of outcome eigenvalues on its support.
pub fn pauli_expectations(sample: &[ShotSample<'_>], paulis: &[PauliString]) -> Result<Vec<f64>> {
    paulis
        .iter()
        .map(|p| {
            let mask = p.support_mask();
            let mut acc = 0.0f64;
            let mut count = 0u32;
            for shot in sample {
                if p.evaluable_in(shot.setting) {
                    let parity = (shot.outcome & mask).count_ones() & 1;
                    acc += if parity == 0 { 1.0 } else { -1.0 };
                    count += 1;
                }
            }
            if count == 0 {
                return Err(Error::InvalidArgument(format!(
                    "Pauli string {p} is not evaluable in the sample"
                )));
            }
            Ok(acc / f64::from(count))
        })
        .collect()
}

/// Feature-construction parameters; defaults follow the pipeline
/// conventions (1000-shot samples, 500 repeats, weight cap 2, 20 matching
/// shots required per string).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub shots_per_sample: usize,
    pub n_repeat: usize,
    pub weight_cap: usize,
    pub n_min: usize,
    /// Some(true): repeats must not reuse shots (error if infeasible);
    /// Some(false): fresh draw per repeat; None: strict when capacity allows.
    pub strict: Option<bool>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            shots_per_sample: 1000,
            n_repeat: 500,
            weight_cap: 2,
            n_min: 20,
            strict: None,
        }
    }
}

/// One dataset tagged with the technology of the platform that produced it.
#[derive(Debug, Clone, Copy)]
pub struct FeatureInput<'a> {
    pub dataset: &'a MeasurementDataset,
    pub technology: Technology,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowLabel {
    pub platform: String,
    pub technology: String,
    pub circuit: String,
}

/// Dense feature matrix: one row per (dataset, repeat), one column per
/// Pauli string evaluable in every row.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    pub labels: Vec<RowLabel>,
    pub columns: Vec<PauliString>,
    values: Vec<f64>,
    pub config: FeatureConfig,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.n_cols()..(r + 1) * self.n_cols()]
    }

    pub fn value(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.n_cols() + c]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("platform,technology,circuit");
        for c in &self.columns {
            out.push(',');
            out.push_str(&c.to_string());
        }
        out.push('\n');
        for (r, label) in self.labels.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}",
                label.platform, label.technology, label.circuit
            ));
            for v in self.row(r) {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Build the feature matrix: `n_repeat` shot subsets per dataset, shots
/// sampled without replacement within a subset, columns restricted to the
/// Pauli strings evaluable in every subset so the matrix is dense.
pub fn build_feature_matrix(
    inputs: &[FeatureInput<'_>],
    config: &FeatureConfig,
    seed: u64,
) -> Result<FeatureMatrix> {
    if inputs.is_empty() {
        return Err(Error::InvalidArgument("no datasets".into()));
    }
    let n = inputs[0].dataset.n_qubits;
    for input in inputs {
        if input.dataset.n_qubits != n {
            return Err(Error::DimensionMismatch(
                "feature datasets must share the qubit count".into(),
            ));
        }
        let total = input.dataset.total_shots() as usize;
        if total < config.shots_per_sample {
            return Err(Error::InvalidArgument(format!(
                "dataset {} has {total} shots, fewer than shots_per_sample = {}",
                input.dataset.platform, config.shots_per_sample
            )));
        }
    }
    let needed = config.n_repeat * config.shots_per_sample;
    let capacity = inputs
        .iter()
        .all(|i| i.dataset.total_shots() as usize >= needed);
    let strict = match config.strict {
        Some(true) if !capacity => {
            return Err(Error::InvalidArgument(format!(
                "strict sampling needs n_repeat * shots_per_sample = {needed} shots per dataset"
            )));
        }
        Some(s) => s,
        None => capacity,
    };

    // Per-dataset cumulative count tables for shot-index lookup.
    let cum_tables: Vec<Vec<Vec<(u32, u32)>>> = inputs
        .iter()
        .map(|i| i.dataset.records.iter().map(|r| r.cumulative_counts()).collect())
        .collect();
    let lookup = |d: usize, shot_index: usize| -> (u32, u32) {
        let ds = inputs[d].dataset;
        let rec = shot_index / ds.m_s as usize;
        let within = (shot_index % ds.m_s as usize) as u32;
        let cum = &cum_tables[d][rec];
        let idx = cum.partition_point(|&(_, c)| c <= within);
        (rec as u32, cum[idx.min(cum.len() - 1)].0)
    };

    // Shot index sets per row: strict mode partitions one large draw,
    // otherwise each repeat draws independently.
    let mut row_indices: Vec<Vec<usize>> = Vec::with_capacity(inputs.len() * config.n_repeat);
    for (d, input) in inputs.iter().enumerate() {
        let total = input.dataset.total_shots() as usize;
        if strict {
            let mut rng = substream_indexed(seed, "feature-partition", d as u64);
            let picked = rand::seq::index::sample(&mut rng, total, needed).into_vec();
            for r in 0..config.n_repeat {
                row_indices.push(
                    picked[r * config.shots_per_sample..(r + 1) * config.shots_per_sample].to_vec(),
                );
            }
        } else {
            for r in 0..config.n_repeat {
                let mut rng =
                    substream_indexed(seed, &format!("feature:{d}"), r as u64);
                row_indices.push(
                    rand::seq::index::sample(&mut rng, total, config.shots_per_sample).into_vec(),
                );
            }
        }
    }

    let candidates = enumerate_paulis(n, config.weight_cap);
    // Per row: Some(expectation) for strings with >= n_min matching shots.
    let rows: Vec<Vec<Option<f64>>> = row_indices
        .par_iter()
        .enumerate()
        .map(|(row, indices)| {
            let d = row / config.n_repeat;
            let ds = inputs[d].dataset;
            let shots: Vec<(u32, u32)> = indices.iter().map(|&i| lookup(d, i)).collect();
            candidates
                .iter()
                .map(|p| {
                    let mask = p.support_mask();
                    let mut acc = 0.0f64;
                    let mut count = 0usize;
                    for &(rec, outcome) in &shots {
                        if p.evaluable_in(&ds.records[rec as usize].setting) {
                            let parity = (outcome & mask).count_ones() & 1;
                            acc += if parity == 0 { 1.0 } else { -1.0 };
                            count += 1;
                        }
                    }
                    if count >= config.n_min {
                        Some(acc / count as f64)
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();

    let keep: Vec<usize> = (0..candidates.len())
        .filter(|&c| rows.iter().all(|row| row[c].is_some()))
        .collect();
    if keep.is_empty() {
        return Err(Error::InvalidArgument(
            "no Pauli string is evaluable in every sample (empty column intersection)".into(),
        ));
    }
    let columns: Vec<PauliString> = keep.iter().map(|&c| candidates[c].clone()).collect();
    let mut values = Vec::with_capacity(rows.len() * keep.len());
    for row in &rows {
        for &c in &keep {
            values.push(row[c].unwrap());
        }
    }
    let labels = inputs
        .iter()
        .flat_map(|input| {
            let label = RowLabel {
                platform: input.dataset.platform.clone(),
                technology: input.technology.to_string(),
                circuit: input.dataset.circuit_label.clone(),
            };
            std::iter::repeat(label).take(config.n_repeat)
        })
        .collect();
    Ok(FeatureMatrix {
        labels,
        columns,
        values,
        config: config.clone(),
    })
}

/// PCA projection result.
#[derive(Debug, Clone)]
pub struct PcaResult {
    /// Row projections onto the top-k axes (rows x k).
    pub projections: Vec<Vec<f64>>,
    /// Principal axes in feature space (k x cols).
    pub axes: Vec<Vec<f64>>,
    /// Explained-variance ratios of the top-k axes, descending.
    pub explained_variance: Vec<f64>,
    /// Set when the matrix has no variance at all.
    pub zero_variance: bool,
}

/// Mean-center the columns, take the SVD, and project onto the top-k right
/// singular vectors. Axis signs are fixed so the largest-magnitude loading
/// is positive.
pub fn pca_project(matrix: &FeatureMatrix, k: usize) -> Result<PcaResult> {
    let rows = matrix.n_rows();
    let cols = matrix.n_cols();
    if rows < 2 {
        return Err(Error::InvalidArgument("PCA needs at least 2 rows".into()));
    }
    if k == 0 || k > rows.min(cols) {
        return Err(Error::InvalidArgument(format!(
            "k = {k} outside 1..=min(rows, cols) = {}",
            rows.min(cols)
        )));
    }
    let mut centered = Vec::with_capacity(rows * cols);
    let col_means: Vec<f64> = (0..cols)
        .map(|c| mean(&(0..rows).map(|r| matrix.value(r, c)).collect::<Vec<_>>()))
        .collect();
    for r in 0..rows {
        for c in 0..cols {
            centered.push(matrix.value(r, c) - col_means[c]);
        }
    }
    let m = nalgebra::DMatrix::from_row_slice(rows, cols, &centered);
    let svd = m.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors");
    let total: f64 = pairwise_sum(
        &svd.singular_values
            .iter()
            .map(|s| s * s)
            .collect::<Vec<_>>(),
    );
    if total < 1e-18 {
        return Ok(PcaResult {
            projections: vec![vec![0.0; k]; rows],
            axes: vec![vec![0.0; cols]; k],
            explained_variance: vec![0.0; k],
            zero_variance: true,
        });
    }
    // nalgebra does not guarantee ordering; sort by singular value.
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
    });
    let mut axes = Vec::with_capacity(k);
    let mut explained = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        let mut axis: Vec<f64> = (0..cols).map(|c| v_t[(idx, c)]).collect();
        let lead = axis
            .iter()
            .cloned()
            .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
        if lead < 0.0 {
            for x in &mut axis {
                *x = -*x;
            }
        }
        explained.push(svd.singular_values[idx] * svd.singular_values[idx] / total);
        axes.push(axis);
    }
    let projections: Vec<Vec<f64>> = (0..rows)
        .map(|r| {
            axes.iter()
                .map(|axis| {
                    let terms: Vec<f64> = (0..cols)
                        .map(|c| centered[r * cols + c] * axis[c])
                        .collect();
                    pairwise_sum(&terms)
                })
                .collect()
        })
        .collect();
    Ok(PcaResult {
        projections,
        axes,
        explained_variance: explained,
        zero_variance: false,
    })
}

/// Mean silhouette score of a 1-d clustering. Positive values mean points
/// sit closer to their own group than to the nearest other group.
pub fn silhouette_1d(values: &[f64], groups: &[usize]) -> f64 {
    assert_eq!(values.len(), groups.len());
    let distinct: std::collections::BTreeSet<usize> = groups.iter().copied().collect();
    let mut scores = Vec::with_capacity(values.len());
    for i in 0..values.len() {
        let mut intra = Vec::new();
        let mut inter: std::collections::BTreeMap<usize, Vec<f64>> = Default::default();
        for j in 0..values.len() {
            if i == j {
                continue;
            }
            let d = (values[i] - values[j]).abs();
            if groups[j] == groups[i] {
                intra.push(d);
            } else {
                inter.entry(groups[j]).or_default().push(d);
            }
        }
        if intra.is_empty() || distinct.len() < 2 {
            scores.push(0.0);
            continue;
        }
        let a = mean(&intra);
        let b = inter
            .values()
            .map(|ds| mean(ds))
            .fold(f64::INFINITY, f64::min);
        scores.push((b - a) / a.max(b));
    }
    mean(&scores)
}

/// CSV of row labels and top-k projections, one row per feature-matrix row.
pub fn projection_csv(labels: &[RowLabel], pca: &PcaResult) -> String {
    let k = pca.axes.len();
    let mut out = String::from("platform,technology,circuit");
    for i in 1..=k {
        out.push_str(&format!(",PC{i}"));
    }
    out.push('\n');
    for (label, proj) in labels.iter().zip(&pca.projections) {
        out.push_str(&format!(
            "{},{},{}",
            label.platform, label.technology, label.circuit
        ));
        for v in proj {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}
