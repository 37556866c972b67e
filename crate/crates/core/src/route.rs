//! SWAP overhead of running circuits on restricted connectivity graphs.
//!
//! The cost model counts CNOT equivalents only: 3 per two-qubit gate (the
//! canonical decomposition of a generic SU(4)) and 3 per inserted SWAP. The
//! routing heuristic starts from the trivial layout (logical qubit k on
//! physical qubit k) and inserts SWAPs along shortest paths, walking the
//! lighter-degree endpoint; the heuristic name is reported in the output.

use crate::circuits::{sample_qv_circuit, Circuit, GateKind};
use crate::error::{Error, Result};
use crate::stats;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Reported name of the routing heuristic.
pub const ROUTING_HEURISTIC: &str = "trivial-layout+greedy-shortest-path-lighter-endpoint";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphName {
    Line,
    TShaped,
    HeavyHexFragment,
    Complete,
    Custom,
}

impl std::fmt::Display for GraphName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            GraphName::Line => "line",
            GraphName::TShaped => "t-shaped",
            GraphName::HeavyHexFragment => "heavy-hex-fragment",
            GraphName::Complete => "complete",
            GraphName::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// Undirected connectivity graph over physical qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityGraph {
    pub name: GraphName,
    #[serde(rename = "n")]
    n_qubits: usize,
    edges: Vec<(usize, usize)>,
}

impl ConnectivityGraph {
    pub fn new(name: GraphName, n_qubits: usize, edges: Vec<(usize, usize)>) -> Result<ConnectivityGraph> {
        let mut normalized: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(a, b)| if a <= b { (a, b) } else { (b, a) })
            .collect();
        normalized.sort_unstable();
        normalized.dedup();
        let g = ConnectivityGraph {
            name,
            n_qubits,
            edges: normalized,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn line(n: usize) -> Result<ConnectivityGraph> {
        ConnectivityGraph::new(GraphName::Line, n, (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect())
    }

    pub fn complete(n: usize) -> Result<ConnectivityGraph> {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                edges.push((a, b));
            }
        }
        ConnectivityGraph::new(GraphName::Complete, n, edges)
    }

    /// 7-qubit T/H-shaped graph (casablanca-like).
    pub fn t_shaped_7() -> Result<ConnectivityGraph> {
        ConnectivityGraph::new(
            GraphName::TShaped,
            7,
            vec![(0, 1), (1, 2), (1, 3), (3, 5), (4, 5), (5, 6)],
        )
    }

    /// One heavy-hexagon cell: a 12-cycle.
    pub fn heavy_hex_fragment() -> Result<ConnectivityGraph> {
        ConnectivityGraph::new(
            GraphName::HeavyHexFragment,
            12,
            (0..12).map(|i| (i, (i + 1) % 12)).collect(),
        )
    }

    pub fn custom(n: usize, edges: Vec<(usize, usize)>) -> Result<ConnectivityGraph> {
        ConnectivityGraph::new(GraphName::Custom, n, edges)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.n_qubits * (self.n_qubits - 1) / 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(Error::InvalidArgument("graph has no vertices".into()));
        }
        for &(a, b) in &self.edges {
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {a}")));
            }
            if b >= self.n_qubits {
                return Err(Error::InvalidArgument(format!(
                    "edge ({a}, {b}) references vertex outside 0..{}",
                    self.n_qubits
                )));
            }
        }
        if !self.is_connected() {
            return Err(Error::InvalidArgument("graph is disconnected".into()));
        }
        Ok(())
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_qubits];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == v || b == v)
            .count()
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.edges.binary_search(&key).is_ok()
    }

    fn is_connected(&self) -> bool {
        if self.n_qubits == 1 {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.n_qubits];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.n_qubits
    }

    /// Shortest path between two vertices (BFS, deterministic neighbor order).
    pub fn shortest_path(&self, from: usize, to: usize) -> Vec<usize> {
        if from == to {
            return vec![from];
        }
        let adj = self.adjacency();
        let mut prev = vec![usize::MAX; self.n_qubits];
        let mut queue = VecDeque::from([from]);
        prev[from] = from;
        while let Some(v) = queue.pop_front() {
            if v == to {
                break;
            }
            for &w in &adj[v] {
                if prev[w] == usize::MAX {
                    prev[w] = v;
                    queue.push_back(w);
                }
            }
        }
        let mut path = vec![to];
        let mut cur = to;
        while cur != from {
            cur = prev[cur];
            path.push(cur);
        }
        path.reverse();
        path
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serialization")
    }

    pub fn from_json(s: &str) -> Result<ConnectivityGraph> {
        let g: ConnectivityGraph = serde_json::from_str(s)?;
        g.validate()?;
        Ok(g)
    }
}

/// CNOT-equivalent cost of one routed circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutedCost {
    pub circuit_label: String,
    pub graph_name: String,
    pub depth_d: Option<usize>,
    /// 3 CNOT equivalents per native two-qubit gate.
    pub native_two_qubit_count: u64,
    pub swap_count: u64,
    /// native_two_qubit_count + 3 * swap_count.
    pub cnot_equivalent_total: u64,
    pub heuristic: String,
}

/// One step of a routed execution, for replay checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoutedOp {
    /// SWAP between two physical qubits.
    Swap(usize, usize),
    /// Original two-qubit gate `gate_index` executed on a physical pair.
    Gate {
        gate_index: usize,
        logical: (usize, usize),
        physical: (usize, usize),
    },
}

/// Route with the trivial initial layout; returns the cost, the trace of
/// SWAPs and gate executions, and the initial logical-to-physical map.
pub fn route_circuit_traced(
    circuit: &Circuit,
    graph: &ConnectivityGraph,
    rng: &mut impl Rng,
) -> Result<(RoutedCost, Vec<RoutedOp>, Vec<usize>)> {
    if circuit.n_qubits != graph.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "circuit has {} qubits, graph has {}",
            circuit.n_qubits,
            graph.n_qubits()
        )));
    }
    graph.validate()?;
    let n = circuit.n_qubits;

    // Trivial layout: logical k starts on physical k. A layout that packs
    // the opening gates onto edges would hide the restricted-connectivity
    // overhead of shallow circuits entirely.
    let mut pos: Vec<usize> = (0..n).collect(); // logical -> physical
    let mut occ: Vec<usize> = (0..n).collect(); // physical -> logical
    let initial_mapping = pos.clone();

    let mut ops: Vec<RoutedOp> = Vec::new();
    let mut swap_count: u64 = 0;
    let mut two_qubit_gates: u64 = 0;
    for (gate_index, gate) in circuit.gates().iter().enumerate() {
        if gate.kind() != GateKind::TwoQubit {
            continue;
        }
        two_qubit_gates += 1;
        let (la, lb) = (gate.targets()[0], gate.targets()[1]);
        loop {
            let (pa, pb) = (pos[la], pos[lb]);
            if graph.is_adjacent(pa, pb) {
                ops.push(RoutedOp::Gate {
                    gate_index,
                    logical: (la, lb),
                    physical: (pa, pb),
                });
                break;
            }
            let path = graph.shortest_path(pa, pb);
            let (da, db) = (graph.degree(pa), graph.degree(pb));
            let move_a = match da.cmp(&db) {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Greater => false,
                std::cmp::Ordering::Equal => rng.gen_bool(0.5),
            };
            let (from, to) = if move_a {
                (pa, path[1])
            } else {
                (pb, path[path.len() - 2])
            };
            let other = occ[to];
            occ[to] = occ[from];
            occ[from] = other;
            pos[occ[to]] = to;
            if other != usize::MAX {
                pos[other] = from;
            }
            swap_count += 1;
            ops.push(RoutedOp::Swap(from, to));
        }
    }

    let native = 3 * two_qubit_gates;
    let cost = RoutedCost {
        circuit_label: circuit.label.clone(),
        graph_name: graph.name.to_string(),
        depth_d: circuit.depth_d,
        native_two_qubit_count: native,
        swap_count,
        cnot_equivalent_total: native + 3 * swap_count,
        heuristic: ROUTING_HEURISTIC.to_string(),
    };
    Ok((cost, ops, initial_mapping))
}

/// Route a circuit and report its CNOT-equivalent cost.
pub fn route_circuit(
    circuit: &Circuit,
    graph: &ConnectivityGraph,
    rng: &mut impl Rng,
) -> Result<RoutedCost> {
    route_circuit_traced(circuit, graph, rng).map(|(cost, _, _)| cost)
}

/// Mean routed cost per depth value, averaged over freshly sampled QV circuits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OverheadPoint {
    pub d: usize,
    pub mean_total: f64,
    pub std_total: f64,
}

pub fn overhead_curve(
    n: usize,
    d_values: &[usize],
    graph: &ConnectivityGraph,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<Vec<OverheadPoint>> {
    if trials < 1 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    graph.validate()?;
    let mut points = Vec::with_capacity(d_values.len());
    for &d in d_values {
        let seeds: Vec<u64> = (0..trials).map(|_| rng.gen()).collect();
        let totals: Vec<f64> = seeds
            .par_iter()
            .map(|&seed| {
                let mut trial_rng = ChaCha8Rng::seed_from_u64(seed);
                let circuit = sample_qv_circuit(n, d, &mut trial_rng)?;
                let cost = route_circuit(&circuit, graph, &mut trial_rng)?;
                Ok(cost.cnot_equivalent_total as f64)
            })
            .collect::<Result<Vec<f64>>>()?;
        points.push(OverheadPoint {
            d,
            mean_total: stats::mean(&totals),
            std_total: stats::sample_std(&totals),
        });
    }
    Ok(points)
}
