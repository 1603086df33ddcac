//! Approximation for arbitrary tree sizes: trees strictly containing a
//! large enough tree are completed from it, large subsets shared by several
//! trees are built once, everything else is built from scratch.

use std::collections::{BTreeSet, HashMap};

use crate::circuit::{dedupe_gates, CircuitBuilder, NodeRef};
use crate::instance::{Instance, Tree};
use crate::report::{PhaseReport, Solution};
use crate::varset::VarSet;

pub const DEFAULT_CANDIDATE_CAP: usize = 10_000;

#[derive(Clone, Debug)]
pub struct GeneralOptions {
    /// Maximum number of closed candidate subsets enumerated per search
    /// before falling back to pairwise intersections.
    pub candidate_cap: usize,
}

impl Default for GeneralOptions {
    fn default() -> Self {
        GeneralOptions {
            candidate_cap: DEFAULT_CANDIDATE_CAP,
        }
    }
}

/// Trees completed from a contained tree, and the rest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupSplit {
    /// `(tree, parent)` pairs in increasing tree size, then lex order.
    pub t_sup: Vec<(Tree, Tree)>,
    pub remainder: Vec<Tree>,
}

/// Splits off every tree `T` strictly containing another tree `T'` with
/// `3|T'| >= k`, where `k` is the largest tree size of the whole instance.
/// The parent is the largest such `T'` (ties: lexicographically smallest).
/// Single-variable trees are ignored.
pub fn preprocess_sup(instance: &Instance) -> SupSplit {
    let trees: Vec<&Tree> = instance.trees().iter().filter(|t| t.len() >= 2).collect();
    let k = instance.max_tree_size();
    let mut t_sup = Vec::new();
    let mut remainder = Vec::new();
    for &t in &trees {
        let parent = trees
            .iter()
            .filter(|p| p.len() < t.len() && 3 * p.len() >= k && p.is_subset(t))
            .min_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        match parent {
            Some(&p) => t_sup.push((t.clone(), p.clone())),
            None => remainder.push(t.clone()),
        }
    }
    t_sup.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
    SupSplit { t_sup, remainder }
}

/// A shared subset and the indices of all trees containing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharedSubset {
    pub set: VarSet,
    pub owners: Vec<usize>,
    /// True when the candidate cap forced the pairwise fallback.
    pub capped: bool,
}

fn qualifies(len: usize, owners: usize, i: usize, k: usize) -> bool {
    owners >= i && 3 * (i - 1) * len >= i * k
}

/// Intersection-closed subsets of `trees` with at least `floor` elements,
/// or `None` once more than `cap` have been found.
fn closed_sets(trees: &[VarSet], floor: usize, cap: usize) -> Option<BTreeSet<VarSet>> {
    let mut seen: BTreeSet<VarSet> = BTreeSet::new();
    let mut frontier: Vec<VarSet> = trees.iter().filter(|t| t.len() >= floor).cloned().collect();
    seen.extend(frontier.iter().cloned());
    while let Some(c) = frontier.pop() {
        for t in trees {
            let s = c.intersection(t);
            if s.len() >= floor && !seen.contains(&s) {
                if seen.len() >= cap {
                    return None;
                }
                seen.insert(s.clone());
                frontier.push(s);
            }
        }
    }
    Some(seen)
}

/// Finds a set `S` with `3(i-1)|S| >= i*k` contained in at least `i` of
/// `trees`, preferring more owners, then larger `S`, then lex order.
pub fn find_shared_subset(trees: &[Tree], i: usize, k: usize, cap: usize) -> Option<SharedSubset> {
    assert!(i >= 2, "need at least two owners");
    let sets: Vec<VarSet> = trees.iter().map(Tree::varset).collect();
    let floor = k.div_ceil(3).max(1);
    let (candidates, capped) = match closed_sets(&sets, floor, cap) {
        Some(c) => (c, false),
        None => {
            let mut pairs = BTreeSet::new();
            for (a, sa) in sets.iter().enumerate() {
                for sb in &sets[a + 1..] {
                    let s = sa.intersection(sb);
                    if s.len() >= floor {
                        pairs.insert(s);
                    }
                }
            }
            (pairs, true)
        }
    };
    let mut best: Option<(usize, usize, VarSet, Vec<usize>)> = None;
    for s in candidates {
        let owners: Vec<usize> = (0..sets.len()).filter(|&j| s.is_subset(&sets[j])).collect();
        if !qualifies(s.len(), owners.len(), i, k) {
            continue;
        }
        let better = match &best {
            None => true,
            Some((o, l, bs, _)) => {
                (owners.len(), s.len()) > (*o, *l)
                    || ((owners.len(), s.len()) == (*o, *l) && s < *bs)
            }
        };
        if better {
            best = Some((owners.len(), s.len(), s, owners));
        }
    }
    best.map(|(_, _, set, owners)| SharedSubset {
        set,
        owners,
        capped,
    })
}

pub fn solve_general(instance: &Instance, opts: &GeneralOptions) -> Solution {
    let k = instance.max_tree_size();
    let split = preprocess_sup(instance);
    let mut b = CircuitBuilder::new(instance.num_vars(), instance.operator());
    let mut report = PhaseReport::default();
    let mut out: HashMap<Tree, NodeRef> = HashMap::new();

    b.phase("shared");
    let mut remaining = split.remainder.clone();
    let rounds = remaining.len();
    let mut capped = false;
    for i in 2..=rounds {
        while let Some(found) = find_shared_subset(&remaining, i, k, opts.candidate_cap) {
            capped |= found.capped;
            let shared = b.balanced(&found.set.to_vec());
            for &j in &found.owners {
                let t = &remaining[j];
                let rest = t.varset().difference(&found.set).to_vec();
                let node = b.extend(shared, &rest);
                out.insert(t.clone(), node);
            }
            let owners: BTreeSet<usize> = found.owners.into_iter().collect();
            remaining = remaining
                .into_iter()
                .enumerate()
                .filter(|(j, _)| !owners.contains(j))
                .map(|(_, t)| t)
                .collect();
        }
    }
    if capped {
        report
            .notes
            .push("candidate cap hit: shared subsets limited to pairwise intersections".into());
    }

    b.phase("scratch");
    for t in &remaining {
        let node = b.balanced(t.vars());
        out.insert(t.clone(), node);
    }

    b.phase("sup");
    for (t, parent) in &split.t_sup {
        let base = out[parent];
        let rest = t.varset().difference(&parent.varset()).to_vec();
        let node = b.extend(base, &rest);
        out.insert(t.clone(), node);
    }

    for t in instance.trees() {
        let node = if t.len() == 1 {
            NodeRef::input(t.vars()[0])
        } else {
            out[t]
        };
        b.output(t, node);
    }
    report.phases = b.phases().clone();
    let raw = b.finish();
    let circuit = dedupe_gates(&raw);
    if circuit.size() < raw.size() {
        report.notes.push(format!(
            "dedupe removed {} gate(s)",
            raw.size() - circuit.size()
        ));
    }
    Solution { circuit, report }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::ValidationMode;

    fn t(v: &[u32]) -> Tree {
        Tree::new(v.to_vec())
    }

    #[test]
    fn sup_threshold() {
        let inst = Instance::from_sets(8, &[&[1, 2, 3, 4, 5, 6], &[1, 2, 3]]);
        let s = preprocess_sup(&inst);
        assert_eq!(s.t_sup, vec![(t(&[1, 2, 3, 4, 5, 6]), t(&[1, 2, 3]))]);

        // the bound is inclusive: 3 * 2 >= 6
        let inst = Instance::from_sets(8, &[&[1, 2, 3, 4, 5, 6], &[1, 2]]);
        assert_eq!(preprocess_sup(&inst).t_sup.len(), 1);
        let inst = Instance::from_sets(8, &[&[1, 2, 3, 4, 5, 6, 7], &[1, 2]]);
        assert!(preprocess_sup(&inst).t_sup.is_empty());
    }

    #[test]
    fn sup_chain_in_size_order() {
        let inst = Instance::from_sets(
            10,
            &[&[1, 2, 3], &[1, 2, 3, 4, 5], &[1, 2, 3, 4, 5, 6, 7, 8, 9]],
        );
        let s = preprocess_sup(&inst);
        assert_eq!(s.remainder, vec![t(&[1, 2, 3])]);
        assert_eq!(s.t_sup[0], (t(&[1, 2, 3, 4, 5]), t(&[1, 2, 3])));
        assert_eq!(s.t_sup[1].1, t(&[1, 2, 3, 4, 5]));
        let sol = solve_general(&inst, &GeneralOptions::default());
        // 2 + 2 + 4
        assert_eq!(sol.circuit.size(), 8);
        assert_eq!(sol.report.phases["sup"], 6);
    }

    #[test]
    fn shared_subset_threshold() {
        let trees = [t(&[1, 2, 3, 4, 5, 6]), t(&[1, 2, 3, 4, 7, 8])];
        let s = find_shared_subset(&trees, 2, 6, DEFAULT_CANDIDATE_CAP).unwrap();
        assert_eq!(s.set.to_vec(), vec![1, 2, 3, 4]);
        assert_eq!(s.owners, vec![0, 1]);

        let trees = [t(&[1, 2, 3, 4, 5, 6]), t(&[1, 2, 3, 7, 8, 9])];
        assert!(find_shared_subset(&trees, 2, 6, DEFAULT_CANDIDATE_CAP).is_none());
    }

    #[test]
    fn group_cost() {
        let inst = Instance::from_sets(9, &[&[1, 2, 3, 4, 5, 6], &[1, 2, 3, 4, 7, 8]]);
        let sol = solve_general(&inst, &GeneralOptions::default());
        assert_eq!(sol.circuit.size(), 7);
        assert!(sol.circuit.validate(&inst, ValidationMode::Lenient).is_ok());
    }

    #[test]
    fn single_tree_and_singletons() {
        let inst = Instance::from_sets(7, &[&[0, 1, 2, 3, 4, 5], &[6]]);
        let sol = solve_general(&inst, &GeneralOptions::default());
        assert_eq!(sol.circuit.size(), 5);
        assert!(sol.circuit.validate(&inst, ValidationMode::Lenient).is_ok());
    }

    #[test]
    fn tiny_cap_falls_back() {
        let inst = Instance::from_sets(
            9,
            &[
                &[0, 1, 2, 3],
                &[0, 1, 2, 4],
                &[0, 1, 5, 6],
                &[0, 1, 2, 7],
                &[1, 2, 8],
            ],
        );
        let sol = solve_general(&inst, &GeneralOptions { candidate_cap: 1 });
        assert!(sol.report.notes.iter().any(|n| n.contains("candidate cap")));
        assert!(sol.circuit.validate(&inst, ValidationMode::Lenient).is_ok());
        assert!(sol.circuit.size() <= inst.scratch_cost());
    }
}
