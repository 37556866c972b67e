//! Overlap, purity and fidelity estimators over measurement datasets.
//!
//! Two estimation routes are implemented:
//!
//! - **Protocol I** (outcome cross-correlations): `tr[rho_i rho_j] = 2^N *
//!   avg_U sum_{s,s'} (-2)^{-D[s,s']} P_i(s) P_j(s')` with `D` the Hamming
//!   distance and `P` the per-setting empirical frequencies. It needs the
//!   same setting list on both platforms. The purity (i = j) replaces the
//!   plain frequency products with the unbiased multinomial pair estimator.
//!
//! - **Protocol II** (classical shadows): each shot defines the product
//!   shadow `(x)_k (3 u_k† |s_k><s_k| u_k - I)` and overlaps are averages of
//!   `tr[shadow_i shadow_j]` over shot pairs. Bilinearity collapses the pair
//!   average to a trace of mean-shadow matrices (dense, guarded at
//!   [`SHADOW_QUBIT_CAP`] qubits). Pairs drawn from the *same* setting share
//!   their rotation and are not independent samples, so purities (and
//!   overlaps of setting-aligned datasets) drop all same-setting pairs; with
//!   i.i.d.-sampled settings this keeps the estimators unbiased at any m_u.
//!
//! Estimators are exactly symmetric in their dataset arguments (operands are
//! ordered canonically before any arithmetic) and every reduction has a
//! fixed order, so results are reproducible across worker counts.

use crate::error::{Error, Result};
use crate::measure::{Basis, MeasurementDataset, MeasurementSetting, SettingRecord};
use crate::platforms::hermitian_trace_product;
use crate::stats::{mean, pairwise_sum, sample_std};
use crate::C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Dense mean-shadow matrices are limited to this many qubits.
pub const SHADOW_QUBIT_CAP: usize = 10;

/// Estimation route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    /// Outcome cross-correlations (Hamming-weighted).
    One,
    /// Classical shadows.
    Two,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::One => "I",
            Protocol::Two => "II",
        }
    }

    pub fn parse(s: &str) -> Result<Protocol> {
        match s {
            "I" | "1" => Ok(Protocol::One),
            "II" | "2" => Ok(Protocol::Two),
            other => Err(Error::Parse(format!("unknown protocol {other:?}"))),
        }
    }
}

impl Serialize for Protocol {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Protocol {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Protocol::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Default protocol split: shadows up to 10 qubits, cross-correlations above.
pub fn default_protocol(n_qubits: usize) -> Protocol {
    if n_qubits > 10 {
        Protocol::One
    } else {
        Protocol::Two
    }
}

/// Hamming distance between two equal-length bitstrings.
pub fn hamming(a: &str, b: &str) -> Result<u32> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "bitstrings of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.chars().zip(b.chars()).filter(|(x, y)| x != y).count() as u32)
}

#[inline]
fn hamming_u32(a: u32, b: u32) -> usize {
    (a ^ b).count_ones() as usize
}

/// Order a dataset pair canonically so estimators are exactly symmetric.
fn canonical_pair<'a>(
    a: &'a MeasurementDataset,
    b: &'a MeasurementDataset,
) -> (&'a MeasurementDataset, &'a MeasurementDataset) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn check_common(a: &MeasurementDataset, b: &MeasurementDataset) -> Result<()> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "datasets over {} and {} qubits",
            a.n_qubits, b.n_qubits
        )));
    }
    if a.m_u() == 0 || b.m_u() == 0 {
        return Err(Error::InvalidArgument("empty dataset".into()));
    }
    Ok(())
}

/// (-1/2)^d for d = 0..=n.
fn neg_half_powers(n: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(n + 1);
    let mut cur = 1.0f64;
    for _ in 0..=n {
        w.push(cur);
        cur *= -0.5;
    }
    w
}

/// Per-setting cross-correlation term over observed outcome pairs.
fn cross_term(rec_a: &SettingRecord, rec_b: &SettingRecord, w: &[f64]) -> f64 {
    let ma = f64::from(rec_a.shots);
    let mb = f64::from(rec_b.shots);
    let mut acc = 0.0;
    for (&s, &ca) in &rec_a.counts {
        let pa = f64::from(ca) / ma;
        for (&t, &cb) in &rec_b.counts {
            acc += w[hamming_u32(s, t)] * pa * (f64::from(cb) / mb);
        }
    }
    acc
}

/// Cross-platform overlap via Protocol I. Requires order-aligned setting
/// lists and distinct acquisitions.
pub fn overlap_protocol1(ds_i: &MeasurementDataset, ds_j: &MeasurementDataset) -> Result<f64> {
    let (a, b) = canonical_pair(ds_i, ds_j);
    check_common(a, b)?;
    if !a.aligned_with(b) {
        return Err(Error::SettingMismatch(
            "Protocol I needs the same setting list on both datasets".into(),
        ));
    }
    let n = a.n_qubits;
    let w = neg_half_powers(n);
    let per_setting: Vec<f64> = a
        .records
        .par_iter()
        .zip(b.records.par_iter())
        .map(|(ra, rb)| cross_term(ra, rb, &w))
        .collect();
    Ok((1u64 << n) as f64 * mean(&per_setting))
}

/// Purity via Protocol I with the unbiased multinomial pair estimator:
/// within a setting, `P(s)P(s')` becomes `n_s n_s' / (M(M-1))` for distinct
/// outcomes and `n_s (n_s - 1) / (M(M-1))` on the diagonal.
pub fn purity_protocol1(ds: &MeasurementDataset) -> Result<f64> {
    purity1_impl(ds, true)
}

/// The naive plug-in purity (biased); kept for comparison studies.
pub fn purity_protocol1_plugin(ds: &MeasurementDataset) -> Result<f64> {
    purity1_impl(ds, false)
}

/// Unbiased per-setting purity term over pairs of distinct physical shots.
///
/// `dup` is the sum of squared multiplicities of the original shots behind
/// the counts: `shots` for raw data (each shot once), larger for bootstrap
/// resamples. Pairs tracing back to the same physical shot carry no
/// information about P(s)P(s') and are removed from both the sum and the
/// normalization: the raw-data case reduces to the multinomial estimator
/// n_s n_s' / (M(M-1)) off-diagonal and n_s (n_s - 1) / (M(M-1)) on it.
fn purity1_setting_term(rec: &SettingRecord, dup: f64, w: &[f64]) -> f64 {
    let m = f64::from(rec.shots);
    let mut acc = -dup; // subtract same-origin diagonal pairs (w = 1)
    for (&s, &cs) in &rec.counts {
        let cs = f64::from(cs);
        acc += cs * cs;
        for (&t, &ct) in rec.counts.range(s + 1..) {
            acc += 2.0 * w[hamming_u32(s, t)] * cs * f64::from(ct);
        }
    }
    acc / (m * m - dup)
}

fn purity1_unbiased(ds: &MeasurementDataset, dups: Option<&[f64]>) -> f64 {
    let n = ds.n_qubits;
    let w = neg_half_powers(n);
    let per_setting: Vec<f64> = ds
        .records
        .par_iter()
        .enumerate()
        .map(|(i, rec)| {
            let dup = dups.map_or(f64::from(rec.shots), |d| d[i]);
            purity1_setting_term(rec, dup, &w)
        })
        .collect();
    (1u64 << n) as f64 * mean(&per_setting)
}

fn purity1_impl(ds: &MeasurementDataset, unbiased: bool) -> Result<f64> {
    if ds.m_u() == 0 {
        return Err(Error::InvalidArgument("empty dataset".into()));
    }
    if unbiased && ds.m_s < 2 {
        return Err(Error::InvalidArgument(
            "unbiased purity needs at least 2 shots per setting".into(),
        ));
    }
    if unbiased {
        return Ok(purity1_unbiased(ds, None));
    }
    let n = ds.n_qubits;
    let w = neg_half_powers(n);
    let per_setting: Vec<f64> = ds
        .records
        .par_iter()
        .map(|rec| cross_term(rec, rec, &w))
        .collect();
    Ok((1u64 << n) as f64 * mean(&per_setting))
}

// ---------------------------------------------------------------------------
// Protocol II: classical shadows.
// ---------------------------------------------------------------------------

/// `tr[shadow_a shadow_b]` for two single shots, via the per-qubit factor
/// tr[(3A - I)(3B - I)] = 9 |<a|b>|^2 - 4: 5 for same basis and same bit,
/// -4 for same basis and different bit, 1/2 across different bases.
pub fn shadow_pair_overlap(
    setting_a: &MeasurementSetting,
    outcome_a: u32,
    setting_b: &MeasurementSetting,
    outcome_b: u32,
) -> Result<f64> {
    if setting_a.len() != setting_b.len() {
        return Err(Error::DimensionMismatch(format!(
            "settings of length {} and {}",
            setting_a.len(),
            setting_b.len()
        )));
    }
    let mut acc = 1.0f64;
    for k in 0..setting_a.len() {
        let factor = if setting_a.basis(k) == setting_b.basis(k) {
            if (outcome_a >> k) & 1 == (outcome_b >> k) & 1 {
                5.0
            } else {
                -4.0
            }
        } else {
            0.5
        };
        acc *= factor;
    }
    Ok(acc)
}

/// `tr[shadow^2]` of any single Pauli-basis shot: 5^n.
pub fn shadow_self_overlap(n_qubits: usize) -> f64 {
    5.0f64.powi(n_qubits as i32)
}

/// 5^(n-d) * (-4)^d for d = 0..=n; the same-basis pair factor by Hamming
/// distance.
fn shadow_pair_table(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|d| 5.0f64.powi((n - d) as i32) * (-4.0f64).powi(d as i32))
        .collect()
}

/// True when the setting list is exactly the complete n-qubit Pauli basis
/// design (every one of the 3^n strings once). Complete designs admit the
/// exact quadrature identity, where same-setting shot pairs carry the
/// diagonal weight; sampled lists are treated as i.i.d. draws instead.
fn is_complete_design(ds: &MeasurementDataset) -> bool {
    let n = ds.n_qubits;
    if n > SHADOW_QUBIT_CAP || ds.m_u() != 3usize.pow(n as u32) {
        return false;
    }
    let distinct: std::collections::HashSet<&[Basis]> =
        ds.records.iter().map(|r| r.setting.bases()).collect();
    distinct.len() == ds.m_u()
}

fn shadow_factor(basis: Basis, s_bit: usize) -> [C64; 4] {
    let u = basis.rotation_matrix();
    let mut f = [C64::new(0.0, 0.0); 4];
    for a in 0..2 {
        for b in 0..2 {
            let proj = u[s_bit * 2 + a].conj() * u[s_bit * 2 + b];
            f[a * 2 + b] = proj * 3.0;
            if a == b {
                f[a * 2 + b] -= 1.0;
            }
        }
    }
    f
}

/// Unnormalized sum of shot shadows for one setting, as a dense matrix
/// (row-major, index = row * 2^n + col). Built by expanding the outcome
/// count vector one qubit at a time, O(4^n) per setting.
fn setting_shadow_sum(record: &SettingRecord, n: usize) -> Vec<C64> {
    let dim = 1usize << n;
    let mut cur = vec![C64::new(0.0, 0.0); dim];
    for (&outcome, &count) in &record.counts {
        cur[outcome as usize] = C64::new(f64::from(count), 0.0);
    }
    for k in 0..n {
        let factors = [
            shadow_factor(record.setting.basis(k), 0),
            shadow_factor(record.setting.basis(k), 1),
        ];
        let pk = 1usize << k;
        let rest_dim = 1usize << (n - k - 1);
        let mut next = vec![C64::new(0.0, 0.0); pk * pk * 4 * rest_dim];
        for a in 0..pk {
            for b in 0..pk {
                let old_base = (a * pk + b) * rest_dim * 2;
                for rest in 0..rest_dim {
                    let v0 = cur[old_base + 2 * rest];
                    let v1 = cur[old_base + 2 * rest + 1];
                    for ak in 0..2 {
                        let ap = a + ak * pk;
                        for bk in 0..2 {
                            let bp = b + bk * pk;
                            let val = factors[0][ak * 2 + bk] * v0 + factors[1][ak * 2 + bk] * v1;
                            next[(ap * pk * 2 + bp) * rest_dim + rest] = val;
                        }
                    }
                }
            }
        }
        cur = next;
    }
    cur
}

/// Shot-averaged shadow matrix of a dataset (dense 2^n x 2^n).
pub fn mean_shadow(ds: &MeasurementDataset) -> Result<Vec<C64>> {
    if ds.m_u() == 0 {
        return Err(Error::InvalidArgument("empty dataset".into()));
    }
    if ds.n_qubits > SHADOW_QUBIT_CAP {
        return Err(Error::Capacity(format!(
            "{} qubits exceeds the dense-shadow cap of {SHADOW_QUBIT_CAP}; use Protocol I",
            ds.n_qubits
        )));
    }
    let n = ds.n_qubits;
    let dim = 1usize << n;
    // Fixed-size chunks keep the reduction order independent of the worker
    // count while bounding the number of live partial matrices.
    let partials: Vec<Vec<C64>> = ds
        .records
        .par_chunks(32)
        .map(|chunk| {
            let mut acc = vec![C64::new(0.0, 0.0); dim * dim];
            for rec in chunk {
                let contrib = setting_shadow_sum(rec, n);
                for (dst, src) in acc.iter_mut().zip(&contrib) {
                    *dst += src;
                }
            }
            acc
        })
        .collect();
    let mut acc = vec![C64::new(0.0, 0.0); dim * dim];
    for partial in &partials {
        for (dst, src) in acc.iter_mut().zip(partial) {
            *dst += src;
        }
    }
    let scale = 1.0 / ds.total_shots() as f64;
    for x in &mut acc {
        *x *= scale;
    }
    Ok(acc)
}

/// All-ordered-pairs shadow sum within one aligned setting (includes
/// same-shot pairs), computed from the counts with the 5/-4 factor table.
fn same_setting_pair_sum(rec_a: &SettingRecord, rec_b: &SettingRecord, table: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&s, &ca) in &rec_a.counts {
        let ca = f64::from(ca);
        for (&t, &cb) in &rec_b.counts {
            acc += table[hamming_u32(s, t)] * ca * f64::from(cb);
        }
    }
    acc
}

/// Cross-platform overlap via Protocol II.
///
/// For independently sampled settings this is the trace of the two mean
/// shadows. When the datasets share one *sampled* setting list (the
/// pipeline's shared rotations), shots of the same setting share the
/// rotation draw, so the same-index pairs are removed from the average;
/// a shared complete design keeps them (the quadrature identity needs its
/// diagonal), and degenerate single-setting data falls back to the plain
/// pair average.
pub fn overlap_protocol2(ds_i: &MeasurementDataset, ds_j: &MeasurementDataset) -> Result<f64> {
    let (a, b) = canonical_pair(ds_i, ds_j);
    check_common(a, b)?;
    let n = a.n_qubits;
    let dim = 1usize << n;
    let sa = mean_shadow(a)?;
    let sb = mean_shadow(b)?;
    let t = hermitian_trace_product(&sa, &sb, dim);
    if a.aligned_with(b) && a.m_u() >= 2 && !is_complete_design(a) {
        let table = shadow_pair_table(n);
        let same: Vec<f64> = a
            .records
            .par_iter()
            .zip(b.records.par_iter())
            .map(|(ra, rb)| same_setting_pair_sum(ra, rb, &table))
            .collect();
        let m_u = a.m_u() as f64;
        let ms_a = f64::from(a.m_s);
        let ms_b = f64::from(b.m_s);
        let all_pairs = (a.total_shots() as f64) * (b.total_shots() as f64);
        let cross = all_pairs * t - pairwise_sum(&same);
        Ok(cross / (m_u * (m_u - 1.0) * ms_a * ms_b))
    } else {
        Ok(t)
    }
}

/// Purity via Protocol II, as a U-statistic over shot pairs.
///
/// On a complete Pauli-basis design the quadrature identity holds with
/// same-setting pairs included, so only the same-shot diagonal (every shot
/// has tr[shadow^2] = 5^n) is removed: (M^2 tr[mean^2] - M 5^n) / (M(M-1)).
/// On a sampled setting list, shots of the same setting share the rotation
/// draw and are not independent shadow samples, so all same-setting pairs
/// are dropped; with i.i.d.-sampled settings that keeps the estimator
/// unbiased at any m_u.
pub fn purity_protocol2(ds: &MeasurementDataset) -> Result<f64> {
    purity2_impl(ds, None)
}

fn purity2_impl(ds: &MeasurementDataset, dups: Option<&[f64]>) -> Result<f64> {
    if ds.m_u() < 2 {
        return Err(Error::InvalidArgument(
            "shadow purity needs at least 2 settings".into(),
        ));
    }
    let n = ds.n_qubits;
    let dim = 1usize << n;
    let sh = mean_shadow(ds)?;
    let t = hermitian_trace_product(&sh, &sh, dim);
    let m = ds.total_shots() as f64;
    if is_complete_design(ds) {
        // Same-origin shot pairs contribute tr[shadow^2] = 5^n each.
        let dup_total = dups.map_or(m, |d| crate::stats::pairwise_sum(d));
        return Ok((m * m * t - dup_total * shadow_self_overlap(n)) / (m * m - dup_total));
    }
    let table = shadow_pair_table(n);
    let same: Vec<f64> = ds
        .records
        .par_iter()
        .map(|rec| same_setting_pair_sum(rec, rec, &table))
        .collect();
    let m_u = ds.m_u() as f64;
    let ms = f64::from(ds.m_s);
    Ok((m * m * t - pairwise_sum(&same)) / (m_u * (m_u - 1.0) * ms * ms))
}

/// The naive plug-in shadow purity tr[mean_shadow^2] (biased); kept for
/// comparison studies.
pub fn purity_protocol2_plugin(ds: &MeasurementDataset) -> Result<f64> {
    let n = ds.n_qubits;
    let sh = mean_shadow(ds)?;
    Ok(hermitian_trace_product(&sh, &sh, 1usize << n))
}

/// Overlap under the given protocol.
pub fn overlap(
    ds_i: &MeasurementDataset,
    ds_j: &MeasurementDataset,
    protocol: Protocol,
) -> Result<f64> {
    match protocol {
        Protocol::One => overlap_protocol1(ds_i, ds_j),
        Protocol::Two => overlap_protocol2(ds_i, ds_j),
    }
}

/// Purity under the given protocol.
pub fn purity(ds: &MeasurementDataset, protocol: Protocol) -> Result<f64> {
    match protocol {
        Protocol::One => purity_protocol1(ds),
        Protocol::Two => purity_protocol2(ds),
    }
}

/// overlap / sqrt(purity_i * purity_j), reported raw: estimator noise can
/// push the value outside [0, 1] and no clamping is applied.
pub fn fidelity(overlap: f64, purity_i: f64, purity_j: f64) -> Result<f64> {
    if purity_i <= 0.0 || purity_j <= 0.0 {
        return Err(Error::UndefinedFidelity { purity_i, purity_j });
    }
    Ok(overlap / (purity_i * purity_j).sqrt())
}

/// True when a fidelity value falls outside [0, 1].
pub fn fidelity_out_of_range(f: f64) -> bool {
    !(0.0..=1.0).contains(&f)
}

/// Restrict a dataset to a qubit subset: bases and outcome bits are kept in
/// ascending subset order and counts are summed over the discarded bits.
/// Estimators applied to the result estimate reduced-state quantities.
pub fn subsystem_restrict(ds: &MeasurementDataset, qubits: &[usize]) -> Result<MeasurementDataset> {
    if qubits.is_empty() {
        return Err(Error::InvalidArgument("empty qubit subset".into()));
    }
    let mut sorted = qubits.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != qubits.len() {
        return Err(Error::InvalidArgument("duplicate qubits in subset".into()));
    }
    if *sorted.last().unwrap() >= ds.n_qubits {
        return Err(Error::InvalidArgument(format!(
            "subset qubit {} out of range for {} qubits",
            sorted.last().unwrap(),
            ds.n_qubits
        )));
    }
    let records = ds
        .records
        .iter()
        .map(|rec| {
            let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
            for (&outcome, &count) in &rec.counts {
                let mut reduced = 0u32;
                for (pos, &q) in sorted.iter().enumerate() {
                    reduced |= ((outcome >> q) & 1) << pos;
                }
                *counts.entry(reduced).or_default() += count;
            }
            SettingRecord {
                setting: rec.setting.restrict(&sorted),
                counts,
                shots: rec.shots,
            }
        })
        .collect();
    let out = MeasurementDataset {
        platform: ds.platform.clone(),
        circuit_label: ds.circuit_label.clone(),
        n_qubits: sorted.len(),
        m_s: ds.m_s,
        seed: ds.seed,
        timestamp: ds.timestamp.clone(),
        manifest_hash: ds.manifest_hash.clone(),
        records,
    };
    out.validate()?;
    Ok(out)
}

/// Multinomial resample of one record's shots. Returns the record plus the
/// sum of squared multiplicities of the original shots, which the purity
/// estimators need to discount same-origin pairs.
fn resample_record(rec: &SettingRecord, rng: &mut impl Rng) -> (SettingRecord, f64) {
    let cum = rec.cumulative_counts();
    let mut multiplicity = vec![0u32; rec.shots as usize];
    for _ in 0..rec.shots {
        multiplicity[rng.gen_range(0..rec.shots) as usize] += 1;
    }
    let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
    let mut dup = 0.0;
    let mut origin = 0u32;
    for &(outcome, cum_end) in &cum {
        let mut total = 0u32;
        while origin < cum_end {
            let c = multiplicity[origin as usize];
            total += c;
            dup += f64::from(c) * f64::from(c);
            origin += 1;
        }
        if total > 0 {
            counts.insert(outcome, total);
        }
    }
    (
        SettingRecord {
            setting: rec.setting.clone(),
            counts,
            shots: rec.shots,
        },
        dup,
    )
}

fn resample_dataset(
    ds: &MeasurementDataset,
    indices: &[usize],
    rng: &mut impl Rng,
) -> (MeasurementDataset, Vec<f64>) {
    let mut dups = Vec::with_capacity(indices.len());
    let records = indices
        .iter()
        .map(|&i| {
            let (rec, dup) = resample_record(&ds.records[i], rng);
            dups.push(dup);
            rec
        })
        .collect();
    (
        MeasurementDataset {
            records,
            ..ds.clone()
        },
        dups,
    )
}

/// Per-original-setting pair sums used by the shadow replicates.
struct ShadowPairTables {
    self_i: Vec<f64>,
    self_j: Vec<f64>,
    /// Cross-platform sums per aligned setting; empty when not aligned.
    cross: Vec<f64>,
}

fn shadow_tables(
    ds_i: &MeasurementDataset,
    ds_j: &MeasurementDataset,
    aligned: bool,
) -> ShadowPairTables {
    let table = shadow_pair_table(ds_i.n_qubits);
    let self_sums = |ds: &MeasurementDataset| -> Vec<f64> {
        ds.records
            .par_iter()
            .map(|rec| same_setting_pair_sum(rec, rec, &table))
            .collect()
    };
    ShadowPairTables {
        self_i: self_sums(ds_i),
        self_j: self_sums(ds_j),
        cross: if aligned {
            ds_i.records
                .par_iter()
                .zip(ds_j.records.par_iter())
                .map(|(ra, rb)| same_setting_pair_sum(ra, rb, &table))
                .collect()
        } else {
            Vec::new()
        },
    }
}

/// Shadow estimators over a setting-index resample: replicate copies of the
/// same original setting share their shots, so pairs are excluded by origin
/// (multiplicity-squared weights), not by replicate position.
fn shadow_replicate(
    ds: &MeasurementDataset,
    other: Option<&MeasurementDataset>,
    indices: &[usize],
    self_or_cross_sums: &[f64],
) -> Result<f64> {
    let ri = MeasurementDataset {
        records: indices.iter().map(|&k| ds.records[k].clone()).collect(),
        ..ds.clone()
    };
    let n = ds.n_qubits;
    let dim = 1usize << n;
    let sa = mean_shadow(&ri)?;
    let (t, ms_b, m_b) = match other {
        Some(o) => {
            let rj = MeasurementDataset {
                records: indices.iter().map(|&k| o.records[k].clone()).collect(),
                ..o.clone()
            };
            let sb = mean_shadow(&rj)?;
            (
                hermitian_trace_product(&sa, &sb, dim),
                f64::from(o.m_s),
                rj.total_shots() as f64,
            )
        }
        None => (
            hermitian_trace_product(&sa, &sa, dim),
            f64::from(ds.m_s),
            ri.total_shots() as f64,
        ),
    };
    let mut mult = vec![0u64; ds.m_u()];
    for &k in indices {
        mult[k] += 1;
    }
    let mut sq_terms = Vec::with_capacity(ds.m_u());
    let mut diag_terms = Vec::with_capacity(ds.m_u());
    for (k, &c) in mult.iter().enumerate() {
        if c > 0 {
            let c2 = (c * c) as f64;
            sq_terms.push(c2);
            diag_terms.push(c2 * self_or_cross_sums[k]);
        }
    }
    let sq_sum = pairwise_sum(&sq_terms);
    let m_u = indices.len() as f64;
    let m_a = ri.total_shots() as f64;
    let ms_a = f64::from(ds.m_s);
    Ok((m_a * m_b * t - pairwise_sum(&diag_terms)) / (ms_a * ms_b * (m_u * m_u - sq_sum)))
}

/// Bootstrap of the fidelity, resampling the stage that carries the
/// sampling randomness: setting lists drawn by a sampler are resampled with
/// replacement at the setting level (the per-setting shot noise is already
/// part of the between-setting spread), while complete-design acquisitions
/// keep their settings and resample shots, with same-origin shot pairs
/// discounted in the purity kernels. Setting indices are shared across the
/// two datasets when their lists are aligned (always the case for Protocol
/// I), and independent otherwise. Replicates with a non-positive purity are
/// discarded; more than B/2 discards is an error.
pub fn bootstrap_fidelity(
    ds_i: &MeasurementDataset,
    ds_j: &MeasurementDataset,
    protocol: Protocol,
    b: usize,
    rng: &mut impl Rng,
) -> Result<(f64, f64)> {
    if b < 2 {
        return Err(Error::InvalidArgument("bootstrap needs B >= 2".into()));
    }
    check_common(ds_i, ds_j)?;
    let aligned = ds_i.aligned_with(ds_j);
    if protocol == Protocol::One && !aligned {
        return Err(Error::SettingMismatch(
            "Protocol I needs the same setting list on both datasets".into(),
        ));
    }
    let fixed_designs = is_complete_design(ds_i) && is_complete_design(ds_j);
    let tables = if protocol == Protocol::Two && !fixed_designs {
        Some(shadow_tables(ds_i, ds_j, aligned))
    } else {
        None
    };
    let seeds: Vec<u64> = (0..b).map(|_| rng.gen()).collect();
    let replicates: Vec<Option<f64>> = seeds
        .par_iter()
        .map(|&seed| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let est = if fixed_designs {
                // Shot-stage resample with duplicate-aware kernels.
                let identity: Vec<usize> = (0..ds_i.m_u()).collect();
                let (ri, dups_i) = resample_dataset(ds_i, &identity, &mut r);
                let (rj, dups_j) = resample_dataset(ds_j, &identity, &mut r);
                overlap(&ri, &rj, protocol).and_then(|o| {
                    let pi = match protocol {
                        Protocol::One => purity1_unbiased(&ri, Some(&dups_i)),
                        Protocol::Two => purity2_impl(&ri, Some(&dups_i))?,
                    };
                    let pj = match protocol {
                        Protocol::One => purity1_unbiased(&rj, Some(&dups_j)),
                        Protocol::Two => purity2_impl(&rj, Some(&dups_j))?,
                    };
                    fidelity(o, pi, pj)
                })
            } else {
                // Setting-stage resample, records kept intact.
                let draw = |r: &mut ChaCha8Rng, m_u: usize| -> Vec<usize> {
                    (0..m_u).map(|_| r.gen_range(0..m_u)).collect()
                };
                let idx_i = draw(&mut r, ds_i.m_u());
                let idx_j = if aligned {
                    idx_i.clone()
                } else {
                    draw(&mut r, ds_j.m_u())
                };
                let clone_by = |ds: &MeasurementDataset, idx: &[usize]| MeasurementDataset {
                    records: idx.iter().map(|&k| ds.records[k].clone()).collect(),
                    ..ds.clone()
                };
                match (protocol, &tables) {
                    (Protocol::One, _) => {
                        let ri = clone_by(ds_i, &idx_i);
                        let rj = clone_by(ds_j, &idx_j);
                        overlap_protocol1(&ri, &rj).and_then(|o| {
                            let pi = purity_protocol1(&ri)?;
                            let pj = purity_protocol1(&rj)?;
                            fidelity(o, pi, pj)
                        })
                    }
                    (Protocol::Two, Some(tables)) => {
                        let o = if aligned && ds_i.m_u() >= 2 {
                            shadow_replicate(ds_i, Some(ds_j), &idx_i, &tables.cross)?
                        } else {
                            let ri = clone_by(ds_i, &idx_i);
                            let rj = clone_by(ds_j, &idx_j);
                            overlap_protocol2(&ri, &rj)?
                        };
                        let pi = shadow_replicate(ds_i, None, &idx_i, &tables.self_i)?;
                        let pj = shadow_replicate(ds_j, None, &idx_j, &tables.self_j)?;
                        fidelity(o, pi, pj)
                    }
                    (Protocol::Two, None) => unreachable!("tables built for protocol II"),
                }
            };
            match est {
                Ok(f) => Ok(Some(f)),
                Err(Error::UndefinedFidelity { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let kept: Vec<f64> = replicates.into_iter().flatten().collect();
    if kept.len() * 2 < b {
        return Err(Error::Undefined(format!(
            "bootstrap discarded {} of {b} replicates (non-positive purity)",
            b - kept.len()
        )));
    }
    Ok((mean(&kept), sample_std(&kept)))
}

/// Summary of a bootstrap run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    #[serde(rename = "B")]
    pub b: usize,
    pub mean: f64,
    pub std: f64,
}

/// A full pairwise comparison result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityEstimate {
    pub pair: (String, String),
    pub protocol: Protocol,
    pub overlap: f64,
    pub purity_i: f64,
    pub purity_j: f64,
    pub fidelity: f64,
    pub bootstrap: BootstrapSummary,
    pub flags: Vec<String>,
    pub m_u_used: (usize, usize),
    pub m_s: (u32, u32),
}

/// Estimate overlap, purities, fidelity and bootstrap errors for one pair.
pub fn estimate_pair(
    ds_i: &MeasurementDataset,
    ds_j: &MeasurementDataset,
    protocol: Protocol,
    bootstrap_b: usize,
    rng: &mut impl Rng,
) -> Result<FidelityEstimate> {
    let o = overlap(ds_i, ds_j, protocol)?;
    let pi = purity(ds_i, protocol)?;
    let pj = purity(ds_j, protocol)?;
    let f = fidelity(o, pi, pj)?;
    let (bmean, bstd) = bootstrap_fidelity(ds_i, ds_j, protocol, bootstrap_b, rng)?;
    let mut flags = Vec::new();
    if fidelity_out_of_range(f) {
        flags.push("out_of_range".to_string());
    }
    Ok(FidelityEstimate {
        pair: (ds_i.platform.clone(), ds_j.platform.clone()),
        protocol,
        overlap: o,
        purity_i: pi,
        purity_j: pj,
        fidelity: f,
        bootstrap: BootstrapSummary {
            b: bootstrap_b,
            mean: bmean,
            std: bstd,
        },
        flags,
        m_u_used: (ds_i.m_u(), ds_j.m_u()),
        m_s: (ds_i.m_s, ds_j.m_s),
    })
}
