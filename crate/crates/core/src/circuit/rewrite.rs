//! Size-preserving circuit rewrites.

use std::collections::HashMap;

use super::{Circuit, Gate, NodeRef};
use crate::instance::Instance;

/// Merges gates with identical canonical operands into their first
/// occurrence and drops gates no output depends on.
///
/// Operands are remapped before hashing, so one forward pass reaches the
/// fixpoint. Gate order is otherwise preserved.
pub fn dedupe_gates(circuit: &Circuit) -> Circuit {
    let mut remap: Vec<NodeRef> = Vec::with_capacity(circuit.gates.len());
    let mut seen: HashMap<Gate, usize> = HashMap::new();
    let mut gates = Vec::new();
    let map = |remap: &Vec<NodeRef>, r: NodeRef| match r {
        NodeRef::Gate(j) => remap[j],
        input => input,
    };
    for g in &circuit.gates {
        let g = Gate::new(map(&remap, g.left), map(&remap, g.right));
        let id = *seen.entry(g).or_insert_with(|| {
            gates.push(g);
            gates.len() - 1
        });
        remap.push(NodeRef::Gate(id));
    }
    let merged = Circuit {
        num_vars: circuit.num_vars,
        operator: circuit.operator,
        gates,
        outputs: circuit
            .outputs
            .iter()
            .map(|(t, &r)| (t.clone(), map(&remap, r)))
            .collect(),
    };
    sweep_dead(&merged)
}

/// Removes gates unreachable from every output, keeping the relative order.
pub(crate) fn sweep_dead(circuit: &Circuit) -> Circuit {
    let n = circuit.gates.len();
    let mut live = vec![false; n];
    for r in circuit.outputs.values() {
        if let NodeRef::Gate(j) = *r {
            live[j] = true;
        }
    }
    for i in (0..n).rev() {
        if live[i] {
            for r in circuit.gates[i].operands() {
                if let NodeRef::Gate(j) = r {
                    live[j] = true;
                }
            }
        }
    }
    let mut new_id = vec![usize::MAX; n];
    let mut gates = Vec::new();
    let map = |new_id: &Vec<usize>, r: NodeRef| match r {
        NodeRef::Gate(j) => NodeRef::Gate(new_id[j]),
        input => input,
    };
    for (i, g) in circuit.gates.iter().enumerate() {
        if live[i] {
            new_id[i] = gates.len();
            gates.push(Gate::new(map(&new_id, g.left), map(&new_id, g.right)));
        }
    }
    Circuit {
        num_vars: circuit.num_vars,
        operator: circuit.operator,
        gates,
        outputs: circuit
            .outputs
            .iter()
            .map(|(t, &r)| (t.clone(), map(&new_id, r)))
            .collect(),
    }
}

/// Rebalances the output cone of every 4-variable tree built as
/// `((a∘b)∘c)∘d` into `(a∘b)∘(c∘d)` when the 3-variable intermediate has no
/// other use. Never increases size; an already present `c∘d` gate is reused.
pub fn depth2_normalize(circuit: &Circuit, instance: &Instance) -> Circuit {
    let mut out = circuit.clone();
    let sets = out.gate_varsets();
    let fanout = out.fanout();
    let index = out.varset_index();
    let mut reused = false;

    for tree in instance.trees().iter().filter(|t| t.len() == 4) {
        let Some(&NodeRef::Gate(u)) = out.outputs.get(tree) else {
            continue;
        };
        if sets[u] != tree.varset() {
            continue;
        }
        let ug = out.gates[u];
        let (v, x4) = match (ug.left, ug.right) {
            (NodeRef::Input(x), NodeRef::Gate(v)) | (NodeRef::Gate(v), NodeRef::Input(x)) => (v, x),
            _ => continue,
        };
        if sets[v].len() != 3 || fanout[v] != 1 {
            continue;
        }
        let vg = out.gates[v];
        let (w, x3) = match (vg.left, vg.right) {
            (NodeRef::Input(x), NodeRef::Gate(w)) | (NodeRef::Gate(w), NodeRef::Input(x)) => (w, x),
            _ => continue,
        };
        if sets[w].len() != 2 {
            continue;
        }
        let pair = [x3.0, x4.0].iter().collect();
        let tail = match index.get(&pair) {
            Some(&e) if e < u && e != v => {
                reused = true;
                e
            }
            _ => {
                out.gates[v] = Gate::new(NodeRef::Input(x3), NodeRef::Input(x4));
                v
            }
        };
        out.gates[u] = Gate::new(NodeRef::Gate(w), NodeRef::Gate(tail));
    }
    if reused {
        sweep_dead(&out)
    } else {
        out
    }
}
