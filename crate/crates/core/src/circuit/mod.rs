//! Circuits of two-input gates: model, validation, metrics, evaluation and
//! interchange formats.

mod builder;
mod rewrite;

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::instance::{Instance, Operator, Tree, VarId};
use crate::varset::VarSet;

pub use builder::CircuitBuilder;
pub use rewrite::{dedupe_gates, depth2_normalize};

/// A circuit node: an input variable or a gate (by position in topological order).
///
/// Inputs sort before gates, which makes the canonical operand order of a
/// gate deterministic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeRef {
    Input(VarId),
    Gate(usize),
}

impl NodeRef {
    pub fn input(v: u32) -> NodeRef {
        NodeRef::Input(VarId(v))
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRef::Input(v) => write!(f, "x{}", v.0),
            NodeRef::Gate(g) => write!(f, "g{g}"),
        }
    }
}

impl Serialize for NodeRef {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            NodeRef::Input(v) => s.serialize_str(&format!("x{}", v.0)),
            NodeRef::Gate(g) => s.serialize_u64(*g as u64),
        }
    }
}

impl<'de> Deserialize<'de> for NodeRef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct RefVisitor;
        impl Visitor<'_> for RefVisitor {
            type Value = NodeRef;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a gate index or an input name like \"x3\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<NodeRef, E> {
                Ok(NodeRef::Gate(v as usize))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<NodeRef, E> {
                u64::try_from(v)
                    .map(|v| NodeRef::Gate(v as usize))
                    .map_err(|_| E::custom("negative gate index"))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<NodeRef, E> {
                v.strip_prefix('x')
                    .and_then(|n| n.parse::<u32>().ok())
                    .map(NodeRef::input)
                    .ok_or_else(|| E::custom(format!("bad input reference `{v}`")))
            }
        }
        d.deserialize_any(RefVisitor)
    }
}

/// A two-input gate. Operands are stored in canonical order (`left <= right`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gate {
    #[serde(rename = "l")]
    pub left: NodeRef,
    #[serde(rename = "r")]
    pub right: NodeRef,
}

impl Gate {
    pub fn new(a: NodeRef, b: NodeRef) -> Gate {
        Gate {
            left: a.min(b),
            right: a.max(b),
        }
    }

    pub fn operands(&self) -> [NodeRef; 2] {
        [self.left, self.right]
    }
}

/// A shared circuit: gates in topological order plus one output node per tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    pub num_vars: usize,
    pub operator: Operator,
    pub gates: Vec<Gate>,
    pub outputs: BTreeMap<Tree, NodeRef>,
}

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("assignment has {got} bits but the circuit has {expected} variables")]
    AssignmentLength { expected: usize, got: usize },
    #[error("circuit references a missing node {0}")]
    BadReference(NodeRef),
    #[error("invalid circuit JSON: {0}")]
    Json(String),
}

/// Strictness of [`Circuit::validate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValidationMode {
    Lenient,
    /// Also reports undirected cycles through shared gates, as warnings.
    Strict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Header(String),
    BadReference { gate: usize, operand: NodeRef },
    NotTopological { gate: usize, operand: NodeRef },
    NonRedundancy { gate: usize, shared: Vec<u32> },
    MissingOutput { tree: Tree },
    BadOutputNode { tree: Tree, node: NodeRef },
    OutputMismatch { tree: Tree, computed: Vec<u32> },
    ExtraOutput { tree: Tree },
    UndirectedCycle { gate: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Header(msg) => write!(f, "header mismatch: {msg}"),
            Violation::BadReference { gate, operand } => {
                write!(f, "gate {gate}: reference to missing node {operand}")
            }
            Violation::NotTopological { gate, operand } => {
                write!(f, "gate {gate}: operand {operand} does not precede it")
            }
            Violation::NonRedundancy { gate, shared } => write!(
                f,
                "non-redundancy violation at gate {gate}: operands share variables {shared:?}"
            ),
            Violation::MissingOutput { tree } => write!(f, "missing output for tree {tree}"),
            Violation::BadOutputNode { tree, node } => {
                write!(f, "output for tree {tree} points at missing node {node}")
            }
            Violation::OutputMismatch { tree, computed } => write!(
                f,
                "output mismatch for tree {tree}: node computes {computed:?}"
            ),
            Violation::ExtraOutput { tree } => {
                write!(f, "output for tree {tree} which is not in the instance")
            }
            Violation::UndirectedCycle { gate } => {
                write!(f, "gate {gate} closes an undirected cycle")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<Violation>,
    pub warnings: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

#[derive(Serialize, Deserialize)]
struct OutputJson {
    tree: Tree,
    node: NodeRef,
}

#[derive(Serialize, Deserialize)]
struct CircuitJson {
    num_vars: usize,
    #[serde(default)]
    operator: Operator,
    gates: Vec<Gate>,
    outputs: Vec<OutputJson>,
}

impl Circuit {
    pub fn new(num_vars: usize, operator: Operator) -> Circuit {
        Circuit {
            num_vars,
            operator,
            gates: Vec::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn size(&self) -> usize {
        self.gates.len()
    }

    /// Length, in gates, of the longest directed path.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.gates.len()];
        for (i, g) in self.gates.iter().enumerate() {
            let d = |r: NodeRef| match r {
                NodeRef::Gate(j) if j < i => level[j],
                _ => 0,
            };
            level[i] = 1 + d(g.left).max(d(g.right));
        }
        level.into_iter().max().unwrap_or(0)
    }

    /// Variable set of every gate. Malformed references contribute nothing;
    /// [`Circuit::validate`] reports them.
    pub fn gate_varsets(&self) -> Vec<VarSet> {
        let mut sets: Vec<VarSet> = Vec::with_capacity(self.gates.len());
        for (i, g) in self.gates.iter().enumerate() {
            let s = {
                let of = |r: NodeRef| match r {
                    NodeRef::Input(v) => VarSet::singleton(v.0),
                    NodeRef::Gate(j) if j < i => sets[j].clone(),
                    NodeRef::Gate(_) => VarSet::new(),
                };
                of(g.left).union(&of(g.right))
            };
            sets.push(s);
        }
        sets
    }

    pub fn node_varset(&self, sets: &[VarSet], r: NodeRef) -> VarSet {
        match r {
            NodeRef::Input(v) => VarSet::singleton(v.0),
            NodeRef::Gate(j) => sets.get(j).cloned().unwrap_or_default(),
        }
    }

    fn ref_ok(&self, r: NodeRef) -> bool {
        match r {
            NodeRef::Input(v) => (v.0 as usize) < self.num_vars,
            NodeRef::Gate(j) => j < self.gates.len(),
        }
    }

    pub fn validate(&self, instance: &Instance, mode: ValidationMode) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.num_vars != instance.num_vars() {
            report.errors.push(Violation::Header(format!(
                "circuit has {} variables, instance has {}",
                self.num_vars,
                instance.num_vars()
            )));
        }
        if self.operator != instance.operator() {
            report.warnings.push(Violation::Header(format!(
                "circuit operator {} differs from instance operator {}",
                self.operator,
                instance.operator()
            )));
        }

        for (i, g) in self.gates.iter().enumerate() {
            for r in g.operands() {
                match r {
                    NodeRef::Gate(j) if j >= i && j < self.gates.len() => {
                        report.errors.push(Violation::NotTopological {
                            gate: i,
                            operand: r,
                        })
                    }
                    _ if !self.ref_ok(r) => report.errors.push(Violation::BadReference {
                        gate: i,
                        operand: r,
                    }),
                    _ => {}
                }
            }
        }
        let sets = self.gate_varsets();
        for (i, g) in self.gates.iter().enumerate() {
            let a = self.node_varset(&sets, g.left);
            let b = self.node_varset(&sets, g.right);
            if g.left == g.right || !a.is_disjoint(&b) {
                report.errors.push(Violation::NonRedundancy {
                    gate: i,
                    shared: a.intersection(&b).to_vec(),
                });
            }
        }

        for tree in instance.trees() {
            match self.outputs.get(tree) {
                None => report
                    .errors
                    .push(Violation::MissingOutput { tree: tree.clone() }),
                Some(&node) if !self.ref_ok(node) => report.errors.push(Violation::BadOutputNode {
                    tree: tree.clone(),
                    node,
                }),
                Some(&node) => {
                    let got = self.node_varset(&sets, node);
                    if got != tree.varset() {
                        report.errors.push(Violation::OutputMismatch {
                            tree: tree.clone(),
                            computed: got.to_vec(),
                        });
                    }
                }
            }
        }
        for tree in self.outputs.keys() {
            if instance.trees().binary_search(tree).is_err() {
                report
                    .warnings
                    .push(Violation::ExtraOutput { tree: tree.clone() });
            }
        }

        if mode == ValidationMode::Strict && report.is_ok() {
            let mut uf = UnionFind::new(self.num_vars + self.gates.len());
            let id = |r: NodeRef| match r {
                NodeRef::Input(v) => v.0 as usize,
                NodeRef::Gate(j) => self.num_vars + j,
            };
            for (i, g) in self.gates.iter().enumerate() {
                let me = self.num_vars + i;
                let mut cyclic = false;
                for r in g.operands() {
                    if !uf.union(id(r), me) {
                        cyclic = true;
                    }
                }
                if cyclic {
                    report.warnings.push(Violation::UndirectedCycle { gate: i });
                }
            }
        }
        report
    }

    /// Evaluates every output under `assignment` (one bit per variable).
    pub fn evaluate(&self, assignment: &[bool]) -> Result<BTreeMap<Tree, bool>, CircuitError> {
        if assignment.len() != self.num_vars {
            return Err(CircuitError::AssignmentLength {
                expected: self.num_vars,
                got: assignment.len(),
            });
        }
        let mut values: Vec<bool> = Vec::with_capacity(self.gates.len());
        let value = |values: &Vec<bool>, r: NodeRef| match r {
            NodeRef::Input(v) => assignment
                .get(v.0 as usize)
                .copied()
                .ok_or(CircuitError::BadReference(r)),
            NodeRef::Gate(j) => values.get(j).copied().ok_or(CircuitError::BadReference(r)),
        };
        for g in &self.gates {
            let v = self
                .operator
                .apply(value(&values, g.left)?, value(&values, g.right)?);
            values.push(v);
        }
        self.outputs
            .iter()
            .map(|(t, &r)| Ok((t.clone(), value(&values, r)?)))
            .collect()
    }

    /// Checks every output against the operator folded over its tree, for
    /// all `2^num_vars` assignments. Returns the first failing assignment.
    pub fn check_exhaustive(&self) -> Result<(), Vec<bool>> {
        assert!(
            self.num_vars <= 24,
            "exhaustive check limited to 24 variables"
        );
        for bits in 0u64..(1 << self.num_vars) {
            let a: Vec<bool> = (0..self.num_vars).map(|i| bits >> i & 1 == 1).collect();
            let Ok(out) = self.evaluate(&a) else {
                return Err(a);
            };
            for (t, v) in out {
                if v != self.operator.fold(t.vars().iter().map(|&i| a[i as usize])) {
                    return Err(a);
                }
            }
        }
        Ok(())
    }

    /// Number of references (gate operands and outputs) to each gate.
    pub fn fanout(&self) -> Vec<usize> {
        let mut count = vec![0; self.gates.len()];
        let refs = self
            .gates
            .iter()
            .flat_map(|g| g.operands())
            .chain(self.outputs.values().copied());
        for r in refs {
            if let NodeRef::Gate(j) = r {
                if let Some(c) = count.get_mut(j) {
                    *c += 1;
                }
            }
        }
        count
    }

    pub fn to_json(&self) -> String {
        let raw = CircuitJson {
            num_vars: self.num_vars,
            operator: self.operator,
            gates: self.gates.clone(),
            outputs: self
                .outputs
                .iter()
                .map(|(t, &node)| OutputJson {
                    tree: t.clone(),
                    node,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("circuit serializes")
    }

    /// Reads circuit JSON. Operand order is canonicalized; semantic checks
    /// are left to [`Circuit::validate`].
    pub fn from_json(text: &str) -> Result<Circuit, CircuitError> {
        let raw: CircuitJson =
            serde_json::from_str(text).map_err(|e| CircuitError::Json(e.to_string()))?;
        let mut outputs = BTreeMap::new();
        for o in raw.outputs {
            if o.tree.is_empty() {
                return Err(CircuitError::Json("output with an empty tree".into()));
            }
            outputs.insert(Tree::new(o.tree.vars().to_vec()), o.node);
        }
        Ok(Circuit {
            num_vars: raw.num_vars,
            operator: raw.operator,
            gates: raw
                .gates
                .into_iter()
                .map(|g| Gate::new(g.left, g.right))
                .collect(),
            outputs,
        })
    }

    /// Graphviz rendering: inputs as boxes, gates as circles, outputs as bold edges.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph circuit {\n  rankdir=TB;\n");
        let mut inputs: Vec<u32> = self
            .gates
            .iter()
            .flat_map(|g| g.operands())
            .chain(self.outputs.values().copied())
            .filter_map(|r| match r {
                NodeRef::Input(v) => Some(v.0),
                NodeRef::Gate(_) => None,
            })
            .collect();
        inputs.sort_unstable();
        inputs.dedup();
        let name = |r: NodeRef| match r {
            NodeRef::Input(v) => format!("x{}", v.0),
            NodeRef::Gate(g) => format!("g{g}"),
        };
        for v in inputs {
            let _ = writeln!(s, "  x{v} [shape=box, label=\"x{v}\"];");
        }
        for (i, g) in self.gates.iter().enumerate() {
            let _ = writeln!(s, "  g{i} [shape=circle, label=\"{}\"];", self.operator);
            let _ = writeln!(s, "  {} -> g{i};", name(g.left));
            let _ = writeln!(s, "  {} -> g{i};", name(g.right));
        }
        for (k, (t, &r)) in self.outputs.iter().enumerate() {
            let _ = writeln!(s, "  out{k} [shape=plaintext, label=\"{t}\"];");
            let _ = writeln!(s, "  {} -> out{k} [style=bold, penwidth=3];", name(r));
        }
        s.push_str("}\n");
        s
    }

    /// Map from each gate's variable set to the first gate computing it.
    pub(crate) fn varset_index(&self) -> HashMap<VarSet, usize> {
        let mut index = HashMap::new();
        for (i, s) in self.gate_varsets().into_iter().enumerate() {
            index.entry(s).or_insert(i);
        }
        index
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// False when `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}
