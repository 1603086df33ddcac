//! 4/3-approximation for trees of at most three variables.

use std::collections::{BTreeMap, HashMap};

use crate::circuit::{CircuitBuilder, NodeRef};
use crate::instance::{Instance, Tree};
use crate::matching::{max_matching, MatchGraph};
use crate::report::{PhaseReport, Solution, SolveError};
use crate::varset::VarSet;

/// Lexicographically smallest 2-subset contained in the most trees, if it
/// is contained in at least three.
fn popular_pair(trees: &[Tree]) -> Option<(VarSet, usize)> {
    let mut count: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
    for t in trees {
        let v = t.vars();
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                *count.entry(vec![v[i], v[j]]).or_default() += 1;
            }
        }
    }
    let mut best: Option<(&Vec<u32>, usize)> = None;
    for (pair, &c) in &count {
        if c >= 3 && best.is_none_or(|(_, bc)| c > bc) {
            best = Some((pair, c));
        }
    }
    best.map(|(p, c)| (p.iter().collect(), c))
}

pub fn solve_k3(instance: &Instance) -> Result<Solution, SolveError> {
    let k = instance.max_tree_size();
    if k > 3 {
        return Err(SolveError::TooWide {
            algorithm: "k3",
            limit: 3,
            k,
        });
    }
    let mut b = CircuitBuilder::new(instance.num_vars(), instance.operator());
    let mut out: HashMap<Tree, NodeRef> = HashMap::new();

    b.phase("preprocess");
    let twos: Vec<&Tree> = instance.trees().iter().filter(|t| t.len() == 2).collect();
    for t in &twos {
        let node = b.balanced(t.vars());
        out.insert((*t).clone(), node);
    }
    let mut remaining = Vec::new();
    for t in instance.trees().iter().filter(|t| t.len() == 3) {
        match twos.iter().find(|p| p.is_subset(t)) {
            Some(p) => {
                let rest = t.varset().difference(&p.varset()).to_vec();
                let node = b.extend(out[*p], &rest);
                out.insert(t.clone(), node);
            }
            None => remaining.push(t.clone()),
        }
    }

    b.phase("shared");
    while let Some((pair, _)) = popular_pair(&remaining) {
        let shared = b.balanced(&pair.to_vec());
        let (owners, rest): (Vec<Tree>, Vec<Tree>) = remaining
            .into_iter()
            .partition(|t| pair.is_subset(&t.varset()));
        for t in owners {
            let extra = t.varset().difference(&pair).to_vec();
            let node = b.extend(shared, &extra);
            out.insert(t, node);
        }
        remaining = rest;
    }

    let edges = (0..remaining.len()).flat_map(|i| {
        let remaining = &remaining;
        (i + 1..remaining.len()).filter_map(move |j| {
            let common = remaining[i].varset().intersection(&remaining[j].varset());
            (common.len() == 2).then_some((i, j))
        })
    });
    let g = MatchGraph::new(remaining.len(), edges.collect::<Vec<_>>());
    let matched = max_matching(&g);

    b.phase("matching");
    let mut done = vec![false; remaining.len()];
    for &(i, j) in &matched {
        let common = remaining[i].varset().intersection(&remaining[j].varset());
        let shared = b.balanced(&common.to_vec());
        for idx in [i, j] {
            let t = &remaining[idx];
            let node = b.extend(shared, &t.varset().difference(&common).to_vec());
            out.insert(t.clone(), node);
            done[idx] = true;
        }
    }

    b.phase("unmatched");
    for (idx, t) in remaining.iter().enumerate() {
        if !done[idx] {
            let node = b.balanced(t.vars());
            out.insert(t.clone(), node);
        }
    }

    for t in instance.trees() {
        let node = if t.len() == 1 {
            NodeRef::input(t.vars()[0])
        } else {
            out[t]
        };
        b.output(t, node);
    }
    let report = PhaseReport {
        phases: b.phases().clone(),
        notes: Vec::new(),
    };
    Ok(Solution {
        circuit: b.finish(),
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::ValidationMode;

    fn solve(inst: &Instance) -> Solution {
        let s = solve_k3(inst).unwrap();
        assert!(s.circuit.validate(inst, ValidationMode::Lenient).is_ok());
        assert_eq!(s.report.total(), s.circuit.size());
        s
    }

    #[test]
    fn star_of_three() {
        let inst = Instance::from_sets(6, &[&[1, 2, 3], &[1, 2, 4], &[1, 2, 5]]);
        assert_eq!(solve(&inst).circuit.size(), 4);
    }

    #[test]
    fn disjoint_pair() {
        let inst = Instance::from_sets(7, &[&[1, 2, 3], &[4, 5, 6]]);
        assert_eq!(solve(&inst).circuit.size(), 4);
    }

    #[test]
    fn nine_tree_trace() {
        let inst = Instance::from_sets(
            10,
            &[
                &[1, 2, 3],
                &[2, 3, 4],
                &[2, 3, 6],
                &[3, 5, 7],
                &[4, 5, 7],
                &[5, 6, 7],
                &[6, 7, 8],
                &[7, 8, 9],
                &[1, 2, 4],
            ],
        );
        let s = solve(&inst);
        assert_eq!(s.circuit.size(), 13);
        assert_eq!(s.report.phases["shared"], 8);
        assert_eq!(s.report.phases["matching"], 3);
        assert_eq!(s.report.phases["unmatched"], 2);
    }

    #[test]
    fn preprocessing() {
        let inst = Instance::from_sets(6, &[&[1, 2], &[1, 2, 3], &[3, 4, 5], &[4]]);
        let s = solve(&inst);
        assert_eq!(s.report.phases["preprocess"], 2);
        assert_eq!(s.circuit.size(), 4);
    }

    #[test]
    fn rejects_wide() {
        let inst = Instance::from_sets(5, &[&[1, 2, 3, 4]]);
        assert!(matches!(
            solve_k3(&inst),
            Err(SolveError::TooWide { k: 4, .. })
        ));
    }
}
