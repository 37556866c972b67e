//! Test-state circuits and the random primitives they are built from.
//!
//! Circuits are ordered lists of explicit gate matrices over `n` qubits, so
//! noise channels and routing can treat every gate uniformly. Qubit 0 is the
//! least-significant bit of basis-state indices, and bitstrings are written
//! qubit-0-first; every module in the crate uses this convention.
//!
//! Two-qubit gate matrices act on the local index `bit(targets[0]) + 2 *
//! bit(targets[1])`, i.e. the first target is the low bit of the 4-dim block.

use crate::error::{Error, Result};
use crate::C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Max-abs tolerance for `U†U - I` when validating gate matrices.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Arity of a gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    OneQubit,
    TwoQubit,
}

/// A gate: one or two target qubits plus an explicit unitary matrix
/// (2x2 or 4x4, row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    targets: Vec<usize>,
    matrix: Vec<C64>,
}

impl Gate {
    pub fn one_qubit(target: usize, matrix: [C64; 4]) -> Result<Gate> {
        let g = Gate {
            targets: vec![target],
            matrix: matrix.to_vec(),
        };
        g.check_unitary()?;
        Ok(g)
    }

    pub fn two_qubit(a: usize, b: usize, matrix: [C64; 16]) -> Result<Gate> {
        if a == b {
            return Err(Error::InvalidArgument(format!(
                "two-qubit gate targets must be distinct, got ({a}, {b})"
            )));
        }
        let g = Gate {
            targets: vec![a, b],
            matrix: matrix.to_vec(),
        };
        g.check_unitary()?;
        Ok(g)
    }

    pub fn kind(&self) -> GateKind {
        if self.targets.len() == 1 {
            GateKind::OneQubit
        } else {
            GateKind::TwoQubit
        }
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    /// Row-major matrix entries (length 4 or 16).
    pub fn matrix(&self) -> &[C64] {
        &self.matrix
    }

    fn dim(&self) -> usize {
        1 << self.targets.len()
    }

    fn check_unitary(&self) -> Result<()> {
        let d = self.dim();
        if self.matrix.len() != d * d {
            return Err(Error::DimensionMismatch(format!(
                "gate on {} target(s) needs a {d}x{d} matrix",
                self.targets.len()
            )));
        }
        let m = &self.matrix;
        for i in 0..d {
            for j in 0..d {
                // (U†U)[i,j] = sum_k conj(U[k,i]) U[k,j]
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..d {
                    acc += m[k * d + i].conj() * m[k * d + j];
                }
                let expected = if i == j { 1.0 } else { 0.0 };
                if (acc - expected).norm() > UNITARITY_TOL {
                    return Err(Error::InvalidArgument(format!(
                        "gate matrix is not unitary (|U†U - I| = {:.3e} at ({i},{j}))",
                        (acc - expected).norm()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A permutation of qubit labels `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Permutation> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &v in &image {
            if v >= n || seen[v] {
                return Err(Error::InvalidArgument(
                    "permutation image is not a bijection".into(),
                ));
            }
            seen[v] = true;
        }
        Ok(Permutation(image))
    }

    pub fn identity(n: usize) -> Permutation {
        Permutation((0..n).collect())
    }

    pub fn image(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// An ordered gate list over `n_qubits`, with the metadata needed to
/// regenerate and serialize it.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub label: String,
    pub n_qubits: usize,
    /// Seed the circuit was generated from, when it was generated.
    pub seed: Option<u64>,
    /// Layer count for quantum-volume circuits.
    pub depth_d: Option<usize>,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(label: impl Into<String>, n_qubits: usize) -> Circuit {
        Circuit {
            label: label.into(),
            n_qubits,
            seed: None,
            depth_d: None,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        for &t in gate.targets() {
            if t >= self.n_qubits {
                return Err(Error::InvalidArgument(format!(
                    "gate target {t} out of range for {} qubits",
                    self.n_qubits
                )));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| g.kind() == GateKind::TwoQubit)
            .count()
    }

    pub fn one_qubit_count(&self) -> usize {
        self.gates.len() - self.two_qubit_count()
    }

    pub fn to_file(&self) -> CircuitFile {
        CircuitFile {
            label: self.label.clone(),
            n_qubits: self.n_qubits,
            seed: self.seed,
            depth_d: self.depth_d,
            manifest_hash: None,
            gates: self
                .gates
                .iter()
                .map(|g| GateDto {
                    targets: g.targets.clone(),
                    matrix: g.matrix.iter().map(|c| [c.re, c.im]).collect(),
                })
                .collect(),
        }
    }

    pub fn from_file(f: &CircuitFile) -> Result<Circuit> {
        let mut c = Circuit::new(f.label.clone(), f.n_qubits);
        c.seed = f.seed;
        c.depth_d = f.depth_d;
        for (i, g) in f.gates.iter().enumerate() {
            let matrix: Vec<C64> = g.matrix.iter().map(|p| C64::new(p[0], p[1])).collect();
            let gate = match g.targets.len() {
                1 => Gate::one_qubit(
                    g.targets[0],
                    matrix
                        .try_into()
                        .map_err(|_| Error::Parse(format!("gate {i}: bad matrix length")))?,
                ),
                2 => Gate::two_qubit(
                    g.targets[0],
                    g.targets[1],
                    matrix
                        .try_into()
                        .map_err(|_| Error::Parse(format!("gate {i}: bad matrix length")))?,
                ),
                k => Err(Error::Parse(format!("gate {i}: unsupported arity {k}"))),
            }?;
            c.push(gate)?;
        }
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("circuit serialization")
    }

    pub fn from_json(s: &str) -> Result<Circuit> {
        let f: CircuitFile = serde_json::from_str(s)?;
        Circuit::from_file(&f)
    }
}

/// On-disk circuit representation: matrices as row-major `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircuitFile {
    pub label: String,
    pub n_qubits: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest_hash: Option<String>,
    pub gates: Vec<GateDto>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateDto {
    pub targets: Vec<usize>,
    pub matrix: Vec<[f64; 2]>,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity2() -> [C64; 4] {
    [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]
}

pub fn hadamard() -> [C64; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]
}

pub fn s_dagger() -> [C64; 4] {
    [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)]
}

/// Pauli matrix by index: 0 = I, 1 = X, 2 = Y, 3 = Z.
pub fn pauli_matrix(idx: usize) -> [C64; 4] {
    match idx {
        0 => identity2(),
        1 => [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        2 => [c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
        3 => [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
        _ => panic!("pauli index out of range"),
    }
}

/// CNOT with the first target as control (local index = control + 2*target).
pub fn cnot() -> [C64; 16] {
    let mut m = [c(0.0, 0.0); 16];
    m[0] = c(1.0, 0.0); // |c0 t0> -> |c0 t0>
    m[3 * 4 + 1] = c(1.0, 0.0); // |c1 t0> -> |c1 t1>
    m[2 * 4 + 2] = c(1.0, 0.0); // |c0 t1> -> |c0 t1>
    m[4 + 3] = c(1.0, 0.0); // |c1 t1> -> |c1 t0>
    m
}

/// GHZ ladder: Hadamard on qubit 0, then CNOT(k -> k+1) for k = 0..n-2.
/// Applied to |0...0> it prepares (|0...0> + |1...1>)/sqrt(2).
pub fn build_ghz(n: usize) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "GHZ circuit needs at least 2 qubits, got {n}"
        )));
    }
    let mut circuit = Circuit::new(format!("ghz{n}"), n);
    circuit.push(Gate::one_qubit(0, hadamard())?)?;
    for k in 0..n - 1 {
        circuit.push(Gate::two_qubit(k, k + 1, cnot())?)?;
    }
    Ok(circuit)
}

/// Uniform random permutation of `0..n` (Fisher-Yates).
pub fn sample_permutation(n: usize, rng: &mut impl Rng) -> Permutation {
    let mut image: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        image.swap(i, j);
    }
    Permutation(image)
}

/// Haar-random element of SU(4).
///
/// QR decomposition of a complex Ginibre matrix via modified Gram-Schmidt;
/// the R diagonal comes out real positive, which fixes the QR phase gauge
/// and makes Q Haar on U(4). Dividing out a fourth root of the determinant
/// then pins det = 1.
pub fn sample_haar_su4(rng: &mut impl Rng) -> [C64; 16] {
    use rand_distr::StandardNormal;
    let mut q = [[C64::new(0.0, 0.0); 4]; 4];
    for row in &mut q {
        for x in row.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *x = C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
        }
    }
    // Modified Gram-Schmidt on the columns.
    for j in 0..4 {
        for k in 0..j {
            let mut proj = C64::new(0.0, 0.0);
            for i in 0..4 {
                proj += q[i][k].conj() * q[i][j];
            }
            for i in 0..4 {
                let sub = proj * q[i][k];
                q[i][j] -= sub;
            }
        }
        let norm: f64 = (0..4).map(|i| q[i][j].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..4 {
            q[i][j] /= norm;
        }
    }
    // Fix the global phase: divide by det^(1/4).
    let det = det4(&q);
    let corr = C64::from_polar(1.0, -det.arg() / 4.0);
    let mut out = [C64::new(0.0, 0.0); 16];
    for i in 0..4 {
        for j in 0..4 {
            out[i * 4 + j] = q[i][j] * corr;
        }
    }
    out
}

fn det4(m: &[[C64; 4]; 4]) -> C64 {
    let minor = |rows: [usize; 3], cols: [usize; 3]| -> C64 {
        let a = |i: usize, j: usize| m[rows[i]][cols[j]];
        a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
            - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
            + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
    };
    let cols = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];
    let mut det = C64::new(0.0, 0.0);
    for j in 0..4 {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        det += m[0][j] * minor([1, 2, 3], cols[j]) * sign;
    }
    det
}

/// Quantum-volume circuit: `d` layers, each a fresh uniform permutation of
/// the qubit labels followed by independent Haar SU(4) gates on the paired
/// labels. Only N' = 2*floor(n/2) labels are paired; for odd `n` the
/// unpaired label idles in that layer.
pub fn sample_qv_circuit(n: usize, d: usize, rng: &mut impl Rng) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "QV circuit needs at least 2 qubits, got {n}"
        )));
    }
    if d < 1 {
        return Err(Error::InvalidArgument("QV circuit needs depth >= 1".into()));
    }
    let mut circuit = Circuit::new(format!("qv{n}d{d}"), n);
    circuit.depth_d = Some(d);
    for _ in 0..d {
        let perm = sample_permutation(n, rng);
        for pair in 0..n / 2 {
            let a = perm.image()[2 * pair];
            let b = perm.image()[2 * pair + 1];
            circuit.push(Gate::two_qubit(a, b, sample_haar_su4(rng))?)?;
        }
    }
    Ok(circuit)
}

/// The |0...0> statevector on `n` qubits.
pub fn zero_state(n: usize) -> Vec<C64> {
    let mut state = vec![C64::new(0.0, 0.0); 1 << n];
    state[0] = C64::new(1.0, 0.0);
    state
}

pub fn apply_one_qubit(state: &mut [C64], qubit: usize, m: &[C64; 4]) {
    let bit = 1usize << qubit;
    for base in 0..state.len() {
        if base & bit == 0 {
            let a = state[base];
            let b = state[base | bit];
            state[base] = m[0] * a + m[1] * b;
            state[base | bit] = m[2] * a + m[3] * b;
        }
    }
}

pub fn apply_two_qubit(state: &mut [C64], q0: usize, q1: usize, m: &[C64; 16]) {
    let b0 = 1usize << q0;
    let b1 = 1usize << q1;
    for base in 0..state.len() {
        if base & b0 == 0 && base & b1 == 0 {
            let idx = [base, base | b0, base | b1, base | b0 | b1];
            let amps = [state[idx[0]], state[idx[1]], state[idx[2]], state[idx[3]]];
            for (r, &target) in idx.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (col, &amp) in amps.iter().enumerate() {
                    acc += m[r * 4 + col] * amp;
                }
                state[target] = acc;
            }
        }
    }
}

pub fn apply_gate(state: &mut [C64], gate: &Gate) {
    match gate.kind() {
        GateKind::OneQubit => {
            let m: [C64; 4] = gate.matrix().try_into().unwrap();
            apply_one_qubit(state, gate.targets()[0], &m);
        }
        GateKind::TwoQubit => {
            let m: [C64; 16] = gate.matrix().try_into().unwrap();
            apply_two_qubit(state, gate.targets()[0], gate.targets()[1], &m);
        }
    }
}

/// Apply every gate of `circuit` to a copy of `state` (exact, noiseless).
pub fn apply_circuit(circuit: &Circuit, state: &[C64]) -> Result<Vec<C64>> {
    if state.len() != 1 << circuit.n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "state has dimension {}, circuit expects {}",
            state.len(),
            1 << circuit.n_qubits
        )));
    }
    let mut out = state.to_vec();
    for gate in circuit.gates() {
        apply_gate(&mut out, gate);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn norm2(state: &[C64]) -> f64 {
        state.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn ghz_gate_counts() {
        let circ = build_ghz(5).unwrap();
        assert_eq!(circ.one_qubit_count(), 1);
        assert_eq!(circ.two_qubit_count(), 4);
    }

    #[test]
    fn ghz_rejects_single_qubit() {
        assert!(matches!(build_ghz(1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn ghz_2_is_bell_state() {
        let circ = build_ghz(2).unwrap();
        let out = apply_circuit(&circ, &zero_state(2)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(out[0].re, h, epsilon = 1e-12);
        assert_abs_diff_eq!(out[3].re, h, epsilon = 1e-12);
        assert!(out[1].norm() < 1e-12 && out[2].norm() < 1e-12);
    }

    #[test]
    fn ghz_5_statevector() {
        let circ = build_ghz(5).unwrap();
        let out = apply_circuit(&circ, &zero_state(5)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (i, amp) in out.iter().enumerate() {
            if i == 0 || i == 31 {
                assert_abs_diff_eq!(amp.re, h, epsilon = 1e-12);
                assert_abs_diff_eq!(amp.im, 0.0, epsilon = 1e-12);
            } else {
                assert!(amp.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn permutation_of_one_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(sample_permutation(1, &mut rng).image(), &[0]);
    }

    #[test]
    fn permutation_is_deterministic() {
        let a = sample_permutation(7, &mut ChaCha8Rng::seed_from_u64(11));
        let b = sample_permutation(7, &mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(a, b);
    }

    #[test]
    fn permutations_are_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut counts: HashMap<Vec<usize>, u32> = HashMap::new();
        let draws = 60_000;
        for _ in 0..draws {
            let p = sample_permutation(3, &mut rng);
            *counts.entry(p.image().to_vec()).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        for (_, &count) in &counts {
            let freq = f64::from(count) / f64::from(draws);
            assert!((freq - 1.0 / 6.0).abs() < 0.01, "freq {freq}");
        }
    }

    #[test]
    fn haar_su4_is_unitary_with_unit_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let m = sample_haar_su4(&mut rng);
            for i in 0..4 {
                for j in 0..4 {
                    let mut acc = C64::new(0.0, 0.0);
                    for k in 0..4 {
                        acc += m[k * 4 + i].conj() * m[k * 4 + j];
                    }
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((acc - expected).norm() < 1e-10);
                }
            }
            let mut rows = [[C64::new(0.0, 0.0); 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    rows[i][j] = m[i * 4 + j];
                }
            }
            assert!((det4(&rows) - 1.0).norm() < 1e-10);
        }
    }

    #[test]
    fn haar_su4_first_moment() {
        // <|U_ij|^2> = 1/4 for Haar on U(4)/SU(4); |U_00|^2 ~ Beta(1,3) has
        // std ~ 0.19, so 3 standard errors at 10^4 draws is ~ 0.006.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 10_000;
        let mut acc = 0.0;
        for _ in 0..draws {
            let m = sample_haar_su4(&mut rng);
            acc += m[0].norm_sqr();
        }
        let mean = acc / f64::from(draws);
        assert!((mean - 0.25).abs() < 0.006, "mean {mean}");
    }

    #[test]
    fn qv_two_qubit_gate_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = sample_qv_circuit(7, 3, &mut rng).unwrap();
        assert_eq!(c.two_qubit_count(), 9);
        let c = sample_qv_circuit(13, 2, &mut rng).unwrap();
        assert_eq!(c.two_qubit_count(), 12);
        let c = sample_qv_circuit(2, 1, &mut rng).unwrap();
        assert_eq!(c.two_qubit_count(), 1);
        let t = c.gates()[0].targets();
        assert_eq!({ let mut t = t.to_vec(); t.sort_unstable(); t }, vec![0, 1]);
    }

    #[test]
    fn qv_count_formula_over_grid() {
        for n in 2..=13 {
            for d in 1..=5 {
                let mut rng = ChaCha8Rng::seed_from_u64((n * 100 + d) as u64);
                let c = sample_qv_circuit(n, d, &mut rng).unwrap();
                assert_eq!(c.two_qubit_count(), d * (n / 2));
            }
        }
    }

    #[test]
    fn qv_rejects_bad_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_qv_circuit(1, 2, &mut rng).is_err());
        assert!(sample_qv_circuit(4, 0, &mut rng).is_err());
    }

    #[test]
    fn qv_is_reproducible_bit_for_bit() {
        let a = sample_qv_circuit(6, 3, &mut ChaCha8Rng::seed_from_u64(99)).unwrap();
        let b = sample_qv_circuit(6, 3, &mut ChaCha8Rng::seed_from_u64(99)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_circuit_is_identity() {
        let circ = Circuit::new("empty", 3);
        let state = zero_state(3);
        assert_eq!(apply_circuit(&circ, &state).unwrap(), state);
    }

    #[test]
    fn ghz_3_from_applying_gates() {
        let out = apply_circuit(&build_ghz(3).unwrap(), &zero_state(3)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(out[0].re, h, epsilon = 1e-12);
        assert_abs_diff_eq!(out[7].re, h, epsilon = 1e-12);
    }

    #[test]
    fn apply_circuit_rejects_dimension_mismatch() {
        let circ = build_ghz(3).unwrap();
        assert!(matches!(
            apply_circuit(&circ, &zero_state(2)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn random_circuits_preserve_norm() {
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = sample_qv_circuit(5, 3, &mut rng).unwrap();
            let out = apply_circuit(&c, &zero_state(5)).unwrap();
            assert!((norm2(&out) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn circuit_json_round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut circ = sample_qv_circuit(4, 2, &mut rng).unwrap();
        circ.seed = Some(12);
        let json = circ.to_json();
        let back = Circuit::from_json(&json).unwrap();
        assert_eq!(circ, back);
        // Second trip must be byte-identical.
        assert_eq!(json, back.to_json());
    }

    #[test]
    fn gate_rejects_non_unitary_matrix() {
        let bad = [
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
        ];
        assert!(Gate::one_qubit(0, bad).is_err());
    }

    proptest! {
        #[test]
        fn sampled_permutations_are_bijections(n in 1usize..10, seed in 0u64..500) {
            let p = sample_permutation(n, &mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert!(Permutation::new(p.image().to_vec()).is_ok());
        }

        #[test]
        fn qv_circuits_round_trip_through_json(n in 2usize..6, d in 1usize..4, seed in 0u64..200) {
            let c = sample_qv_circuit(n, d, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let back = Circuit::from_json(&c.to_json()).unwrap();
            prop_assert_eq!(c, back);
        }
    }
}
