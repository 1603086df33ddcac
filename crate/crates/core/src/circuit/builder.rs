use std::collections::{BTreeMap, HashMap};

use super::{Circuit, Gate, NodeRef};
use crate::instance::{Operator, Tree};
use crate::varset::VarSet;

/// Incremental circuit construction with variable-set bookkeeping and
/// per-phase gate counts.
pub struct CircuitBuilder {
    circuit: Circuit,
    sets: Vec<VarSet>,
    index: HashMap<VarSet, usize>,
    phase: String,
    phases: BTreeMap<String, usize>,
}

impl CircuitBuilder {
    pub fn new(num_vars: usize, operator: Operator) -> Self {
        CircuitBuilder {
            circuit: Circuit::new(num_vars, operator),
            sets: Vec::new(),
            index: HashMap::new(),
            phase: "main".into(),
            phases: BTreeMap::new(),
        }
    }

    /// Attributes subsequent gates to `name`.
    pub fn phase(&mut self, name: &str) {
        self.phase = name.to_string();
        self.phases.entry(self.phase.clone()).or_insert(0);
    }

    pub fn phases(&self) -> &BTreeMap<String, usize> {
        &self.phases
    }

    pub fn size(&self) -> usize {
        self.circuit.gates.len()
    }

    pub fn varset(&self, r: NodeRef) -> VarSet {
        match r {
            NodeRef::Input(v) => VarSet::singleton(v.0),
            NodeRef::Gate(j) => self.sets[j].clone(),
        }
    }

    /// Existing node computing exactly `set` (singletons map to inputs).
    pub fn lookup(&self, set: &VarSet) -> Option<NodeRef> {
        if set.len() == 1 {
            return set.iter().next().map(NodeRef::input);
        }
        self.index.get(set).map(|&g| NodeRef::Gate(g))
    }

    /// Appends one gate. Panics if the operands overlap.
    pub fn gate(&mut self, a: NodeRef, b: NodeRef) -> NodeRef {
        let (sa, sb) = (self.varset(a), self.varset(b));
        assert!(
            sa.is_disjoint(&sb),
            "gate operands {sa:?} and {sb:?} overlap"
        );
        let id = self.circuit.gates.len();
        self.circuit.gates.push(Gate::new(a, b));
        let set = sa.union(&sb);
        self.index.entry(set.clone()).or_insert(id);
        self.sets.push(set);
        *self.phases.entry(self.phase.clone()).or_insert(0) += 1;
        NodeRef::Gate(id)
    }

    /// Combines disjoint nodes pairwise in rounds: `parts.len() - 1` gates,
    /// logarithmic depth.
    pub fn join(&mut self, mut parts: Vec<NodeRef>) -> NodeRef {
        assert!(!parts.is_empty(), "join of nothing");
        while parts.len() > 1 {
            let mut next = Vec::with_capacity(parts.len().div_ceil(2));
            for pair in parts.chunks(2) {
                next.push(match *pair {
                    [a, b] => self.gate(a, b),
                    [a] => a,
                    _ => unreachable!(),
                });
            }
            parts = next;
        }
        parts[0]
    }

    /// Builds the product of `vars` from inputs alone (`|vars| - 1` gates).
    pub fn balanced(&mut self, vars: &[u32]) -> NodeRef {
        self.join(vars.iter().map(|&v| NodeRef::input(v)).collect())
    }

    /// Extends `base` by the variables of `extra` (`|extra|` gates).
    pub fn extend(&mut self, base: NodeRef, extra: &[u32]) -> NodeRef {
        if extra.is_empty() {
            return base;
        }
        let rest = self.balanced(extra);
        self.gate(base, rest)
    }

    /// Declares `node` as the output for `tree`. Panics if it computes another set.
    pub fn output(&mut self, tree: &Tree, node: NodeRef) {
        assert_eq!(
            self.varset(node),
            tree.varset(),
            "output node does not compute tree {tree}"
        );
        self.circuit.outputs.insert(tree.clone(), node);
    }

    pub fn finish(self) -> Circuit {
        self.circuit
    }
}
