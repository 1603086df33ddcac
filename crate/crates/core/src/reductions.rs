//! Correspondence between vertex covers of a graph and circuits for the
//! trees `{0, i, j}`, one per edge `{i, j}`.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::circuit::{Circuit, CircuitBuilder, NodeRef, ValidationMode};
use crate::instance::{Instance, Operator, Tree};
use crate::matching::Hypergraph;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReductionError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("circuit is not a valid solution for the reduced instance: {0}")]
    InvalidCircuit(String),
    #[error("vertex set misses edge ({0}, {1})")]
    NotACover(u32, u32),
}

/// Simple graph on vertices `1..=num_vertices`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VCGraph {
    num_vertices: u32,
    edges: Vec<(u32, u32)>,
}

impl VCGraph {
    /// Normalizes edges to `(min, max)` and drops parallels. Panics on
    /// loops or out-of-range endpoints.
    pub fn new(num_vertices: u32, edges: impl IntoIterator<Item = (u32, u32)>) -> VCGraph {
        let set: BTreeSet<(u32, u32)> = edges
            .into_iter()
            .map(|(a, b)| {
                assert!(a != b, "loop at {a}");
                assert!(
                    (1..=num_vertices).contains(&a) && (1..=num_vertices).contains(&b),
                    "edge ({a}, {b}) out of range"
                );
                (a.min(b), a.max(b))
            })
            .collect();
        VCGraph {
            num_vertices,
            edges: set.into_iter().collect(),
        }
    }

    pub fn num_vertices(&self) -> u32 {
        self.num_vertices
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Reads `n m` followed by `m` lines `i j` (vertices numbered from 1).
    pub fn parse(text: &str) -> Result<VCGraph, ReductionError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let nums = |line: usize, l: &str| -> Result<Vec<u32>, ReductionError> {
            let v = l
                .split_whitespace()
                .map(|t| t.parse::<u32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| ReductionError::Parse {
                    line,
                    msg: e.to_string(),
                })?;
            if v.len() != 2 {
                return Err(ReductionError::Parse {
                    line,
                    msg: format!("expected two integers, found {}", v.len()),
                });
            }
            Ok(v)
        };
        let (hl, header) = lines.next().ok_or(ReductionError::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let h = nums(hl, header)?;
        let (n, m) = (h[0], h[1] as usize);
        let mut edges = Vec::with_capacity(m);
        for (line, l) in lines {
            let e = nums(line, l)?;
            if e[0] == e[1] || !(1..=n).contains(&e[0]) || !(1..=n).contains(&e[1]) {
                return Err(ReductionError::Parse {
                    line,
                    msg: format!("bad edge ({}, {}) for {n} vertices", e[0], e[1]),
                });
            }
            edges.push((e[0], e[1]));
        }
        if edges.len() != m {
            return Err(ReductionError::Parse {
                line: hl,
                msg: format!("header announces {m} edges but {} were given", edges.len()),
            });
        }
        Ok(VCGraph::new(n, edges))
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.num_vertices, self.edges.len());
        for (a, b) in &self.edges {
            s.push_str(&format!("{a} {b}\n"));
        }
        s
    }

    /// The graph as a hypergraph on vertices `0..num_vertices` (shifted by one).
    pub fn to_hypergraph(&self) -> Hypergraph {
        Hypergraph::new(
            self.num_vertices as usize,
            self.edges
                .iter()
                .map(|&(a, b)| vec![a as usize - 1, b as usize - 1]),
        )
    }

    pub fn is_cover(&self, cover: &[u32]) -> Result<(), ReductionError> {
        match self
            .edges
            .iter()
            .find(|(a, b)| !cover.contains(a) && !cover.contains(b))
        {
            Some(&(a, b)) => Err(ReductionError::NotACover(a, b)),
            None => Ok(()),
        }
    }
}

/// One AND tree `{0, i, j}` per edge, over variables `0..=n`.
pub fn vc_to_bstso(g: &VCGraph) -> Instance {
    let trees = g.edges.iter().map(|&(a, b)| vec![0, a, b]).collect();
    Instance::new(g.num_vertices as usize + 1, Operator::And, trees)
        .expect("edges are in range")
        .instance
}

/// Reads a vertex cover off a valid circuit for the reduced instance: each
/// edge tree's output combines a pair with one input; pair `{0, a}` selects
/// `a`, pair `{i, j}` selects `min(i, j)`.
pub fn extract_vc(g: &VCGraph, circuit: &Circuit) -> Result<Vec<u32>, ReductionError> {
    let instance = vc_to_bstso(g);
    let report = circuit.validate(&instance, ValidationMode::Lenient);
    if let Some(e) = report.errors.first() {
        return Err(ReductionError::InvalidCircuit(e.to_string()));
    }
    let sets = circuit.gate_varsets();
    let mut cover = BTreeSet::new();
    for tree in instance.trees() {
        let NodeRef::Gate(out) = circuit.outputs[tree] else {
            unreachable!("a 3-variable output is a gate");
        };
        let pair = circuit.gates[out]
            .operands()
            .into_iter()
            .map(|r| circuit.node_varset(&sets, r))
            .find(|s| s.len() == 2)
            .expect("a 3-variable gate has a 2-variable operand");
        let v = pair.to_vec();
        cover.insert(if v[0] == 0 { v[1] } else { v[0] });
    }
    Ok(cover.into_iter().collect())
}

/// Circuit with one gate `x0 ∘ xi` per cover vertex and one output gate per
/// edge: `|cover| + |E|` gates.
pub fn vc_from_cover_circuit(g: &VCGraph, cover: &[u32]) -> Result<Circuit, ReductionError> {
    g.is_cover(cover)?;
    let instance = vc_to_bstso(g);
    let cover: BTreeSet<u32> = cover.iter().copied().collect();
    let mut b = CircuitBuilder::new(instance.num_vars(), instance.operator());
    let pair: std::collections::BTreeMap<u32, NodeRef> =
        cover.iter().map(|&v| (v, b.balanced(&[0, v]))).collect();
    for &(i, j) in &g.edges {
        let (c, other) = if cover.contains(&i) { (i, j) } else { (j, i) };
        let node = b.gate(pair[&c], NodeRef::input(other));
        b.output(&Tree::new(vec![0, i, j]), node);
    }
    Ok(b.finish())
}
