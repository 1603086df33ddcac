//! 1.9-approximation for trees of at most four variables.
//!
//! Four-variable trees that are cheap to finish (they contain a 3-tree, share
//! a 3-subset with several others, or pair up through a maximum matching) are
//! set aside. The rest, together with the 2- and 3-variable trees, form a
//! core that is built in two gate levels: the first level is a vertex cover
//! of a hypergraph over variable pairs, the second combines two covered
//! pairs (or a pair and an input) into each tree.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::circuit::{dedupe_gates, CircuitBuilder, NodeRef};
use crate::instance::{Instance, Tree};
use crate::matching::{
    cover_from_matching, max_matching, maximal_matching, prune_cover, Hypergraph, MatchGraph,
};
use crate::report::{PhaseReport, Solution, SolveError};

/// Classification of the trees of a `k <= 4` instance.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Partition4 {
    pub t2: Vec<Tree>,
    pub t3: Vec<Tree>,
    /// 4-trees containing a 3-tree.
    pub t4_sup3: Vec<Tree>,
    /// Groups of at least three 4-trees sharing a 3-subset, with that subset.
    pub intersect_groups: Vec<(Tree, Vec<Tree>)>,
    /// Pairs of 4-trees matched through a common 3-subset.
    pub matched_pairs: Vec<(Tree, Tree)>,
    pub t4_depth2: Vec<Tree>,
    /// `t3` plus the intersections of matched pairs, sorted and distinct.
    pub t3_prime: Vec<Tree>,
}

impl Partition4 {
    pub fn t4_intersect(&self) -> Vec<Tree> {
        self.intersect_groups
            .iter()
            .flat_map(|(_, g)| g.iter().cloned())
            .collect()
    }

    pub fn t4_matching(&self) -> Vec<Tree> {
        self.matched_pairs
            .iter()
            .flat_map(|(a, b)| [a.clone(), b.clone()])
            .collect()
    }

    pub fn t_easy(&self) -> Vec<Tree> {
        let mut v = self.t4_sup3.clone();
        v.extend(self.t4_matching());
        v
    }

    /// True when everything besides the depth-two core is empty.
    pub fn is_pure_core(&self) -> bool {
        self.t4_sup3.is_empty() && self.intersect_groups.is_empty() && self.matched_pairs.is_empty()
    }
}

fn intersection(a: &Tree, b: &Tree) -> Tree {
    Tree::from_varset(&a.varset().intersection(&b.varset()))
}

/// Most popular 3-subset (ties: lex smallest) lying in at least three trees.
fn popular_triple(trees: &[Tree]) -> Option<Tree> {
    let mut count: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
    for t in trees {
        let v = t.vars();
        for skip in 0..v.len() {
            let triple: Vec<u32> = (0..v.len()).filter(|&i| i != skip).map(|i| v[i]).collect();
            *count.entry(triple).or_default() += 1;
        }
    }
    let mut best: Option<(&Vec<u32>, usize)> = None;
    for (s, &c) in &count {
        if c >= 3 && best.is_none_or(|(_, bc)| c > bc) {
            best = Some((s, c));
        }
    }
    best.map(|(s, _)| Tree::new(s.clone()))
}

pub fn partition_k4(instance: &Instance) -> Result<Partition4, SolveError> {
    let k = instance.max_tree_size();
    if k > 4 {
        return Err(SolveError::TooWide {
            algorithm: "k4",
            limit: 4,
            k,
        });
    }
    let of_size = |n: usize| -> Vec<Tree> {
        instance
            .trees()
            .iter()
            .filter(|t| t.len() == n)
            .cloned()
            .collect()
    };
    let mut p = Partition4 {
        t2: of_size(2),
        t3: of_size(3),
        ..Partition4::default()
    };
    let mut rest = Vec::new();
    for t in of_size(4) {
        if p.t3.iter().any(|s| s.is_subset(&t)) {
            p.t4_sup3.push(t);
        } else {
            rest.push(t);
        }
    }

    while let Some(s) = popular_triple(&rest) {
        let (group, others): (Vec<Tree>, Vec<Tree>) =
            rest.into_iter().partition(|t| s.is_subset(t));
        p.intersect_groups.push((s, group));
        rest = others;
    }

    let mut edges = Vec::new();
    for i in 0..rest.len() {
        for j in i + 1..rest.len() {
            if rest[i].varset().intersection(&rest[j].varset()).len() == 3 {
                edges.push((i, j));
            }
        }
    }
    let matched = max_matching(&MatchGraph::new(rest.len(), edges));
    let mut used = vec![false; rest.len()];
    let mut t3_prime: BTreeSet<Tree> = p.t3.iter().cloned().collect();
    for (i, j) in matched {
        used[i] = true;
        used[j] = true;
        t3_prime.insert(intersection(&rest[i], &rest[j]));
        p.matched_pairs.push((rest[i].clone(), rest[j].clone()));
    }
    p.t4_depth2 = rest
        .into_iter()
        .zip(used)
        .filter(|(_, u)| !u)
        .map(|(t, _)| t)
        .collect();
    p.t3_prime = t3_prime.into_iter().collect();
    Ok(p)
}

/// Hypergraph over variable pairs whose vertex covers are the possible
/// first levels of a depth-two core circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreHypergraph {
    pub graph: Hypergraph,
    /// Pair represented by each vertex, in increasing order.
    pub pairs: Vec<[u32; 2]>,
}

impl CoreHypergraph {
    pub fn vertex(&self, pair: [u32; 2]) -> usize {
        self.pairs.binary_search(&pair).expect("pair is a vertex")
    }
}

/// Complementary pair table of a 4-tree `{a<b<c<d}`:
/// `({a,b},{c,d})`, `({a,c},{b,d})`, `({a,d},{b,c})`.
pub fn complementary_pairs(t: &Tree) -> [([u32; 2], [u32; 2]); 3] {
    let [a, b, c, d] = t.vars() else {
        panic!("complementary pairs need a 4-tree, got {t}");
    };
    [
        ([*a, *b], [*c, *d]),
        ([*a, *c], [*b, *d]),
        ([*a, *d], [*b, *c]),
    ]
}

fn pairs_of(t: &Tree) -> Vec<[u32; 2]> {
    let v = t.vars();
    let mut out = Vec::new();
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            out.push([v[i], v[j]]);
        }
    }
    out
}

pub fn build_hypergraph(
    t2: &[Tree],
    t3_prime: &[Tree],
    t4_depth2: &[Tree],
) -> Result<CoreHypergraph, SolveError> {
    let check = |trees: &[Tree], n: usize| -> Result<(), SolveError> {
        match trees.iter().find(|t| t.len() != n) {
            Some(t) => Err(SolveError::Malformed(format!(
                "tree {t} listed among {n}-trees"
            ))),
            None => Ok(()),
        }
    };
    check(t2, 2)?;
    check(t3_prime, 3)?;
    check(t4_depth2, 4)?;

    let pairs: BTreeSet<[u32; 2]> = t2
        .iter()
        .chain(t3_prime)
        .chain(t4_depth2)
        .flat_map(pairs_of)
        .collect();
    let pairs: Vec<[u32; 2]> = pairs.into_iter().collect();
    let id = |p: [u32; 2]| pairs.binary_search(&p).expect("pair collected");

    let mut edges: Vec<Vec<usize>> = Vec::new();
    for t in t2 {
        edges.push(vec![id([t.vars()[0], t.vars()[1]])]);
    }
    for t in t3_prime {
        edges.push(pairs_of(t).into_iter().map(id).collect());
    }
    for t in t4_depth2 {
        let table = complementary_pairs(t);
        for choice in 0..8u32 {
            let edge = table
                .iter()
                .enumerate()
                .map(|(i, (u, ubar))| id(if choice >> i & 1 == 0 { *u } else { *ubar }))
                .collect();
            edges.push(edge);
        }
    }
    Ok(CoreHypergraph {
        graph: Hypergraph::new(pairs.len(), edges),
        pairs,
    })
}

pub fn solve_k4(instance: &Instance) -> Result<Solution, SolveError> {
    let p = partition_k4(instance)?;
    let mut b = CircuitBuilder::new(instance.num_vars(), instance.operator());
    let mut report = PhaseReport::default();
    let mut out: HashMap<Tree, NodeRef> = HashMap::new();

    b.phase("intersect");
    for (s, group) in &p.intersect_groups {
        let shared = b.balanced(s.vars());
        for t in group {
            let extra = t.varset().difference(&s.varset()).to_vec();
            let node = b.extend(shared, &extra);
            out.insert(t.clone(), node);
        }
    }

    let core = build_hypergraph(&p.t2, &p.t3_prime, &p.t4_depth2)?;
    let matching = maximal_matching(&core.graph);
    let cover = cover_from_matching(&core.graph, &matching).expect("maximal matching covers");
    let cover = prune_cover(&core.graph, &cover).expect("cover stays a cover");
    let cap = p.t2.len() + p.t3_prime.len() + 2 * p.t4_depth2.len();
    if cover.len() > cap {
        report.notes.push(format!(
            "cover of {} pairs exceeds {cap}; core built tree by tree",
            cover.len()
        ));
        b.phase("core_fallback");
        for t in p.t2.iter().chain(&p.t3_prime).chain(&p.t4_depth2) {
            let node = b.balanced(t.vars());
            out.insert(t.clone(), node);
        }
    } else {
        b.phase("core_cover");
        let mut pair_node: BTreeMap<[u32; 2], NodeRef> = BTreeMap::new();
        for &v in &cover {
            let pair = core.pairs[v];
            pair_node.insert(pair, b.balanced(&pair));
        }
        for t in &p.t2 {
            out.insert(t.clone(), pair_node[&[t.vars()[0], t.vars()[1]]]);
        }
        b.phase("core_combine");
        for t in &p.t3_prime {
            let pair = pairs_of(t)
                .into_iter()
                .find(|q| pair_node.contains_key(q))
                .expect("every 3-tree edge is covered");
            let third = *t.vars().iter().find(|v| !pair.contains(v)).expect("3-tree");
            let node = b.gate(pair_node[&pair], NodeRef::input(third));
            out.insert(t.clone(), node);
        }
        for t in &p.t4_depth2 {
            let (u, ubar) = complementary_pairs(t)
                .into_iter()
                .find(|(u, ubar)| pair_node.contains_key(u) && pair_node.contains_key(ubar))
                .expect("a pruned cover contains a complementary pair of every 4-tree");
            let node = b.gate(pair_node[&u], pair_node[&ubar]);
            out.insert(t.clone(), node);
        }
    }

    b.phase("easy");
    for t in &p.t4_sup3 {
        let parent =
            p.t3.iter()
                .find(|s| s.is_subset(t))
                .expect("t4_sup3 contains a 3-tree");
        let extra = t.varset().difference(&parent.varset()).to_vec();
        let node = b.extend(out[parent], &extra);
        out.insert(t.clone(), node);
    }
    for (x, y) in &p.matched_pairs {
        let common = intersection(x, y);
        for t in [x, y] {
            let extra = t.varset().difference(&common.varset()).to_vec();
            let node = b.extend(out[&common], &extra);
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
    report.phases = b.phases().clone();
    let raw = b.finish();
    let circuit = dedupe_gates(&raw);
    if circuit.size() < raw.size() {
        report.notes.push(format!(
            "dedupe removed {} gate(s)",
            raw.size() - circuit.size()
        ));
    }
    Ok(Solution { circuit, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::ValidationMode;

    fn t(v: &[u32]) -> Tree {
        Tree::new(v.to_vec())
    }

    fn solve(inst: &Instance) -> Solution {
        let s = solve_k4(inst).unwrap();
        assert!(s.circuit.validate(inst, ValidationMode::Lenient).is_ok());
        s
    }

    #[test]
    fn partition_labels() {
        let inst = Instance::from_sets(
            9,
            &[
                &[1, 2, 3],
                &[2, 3, 4, 5],
                &[3, 5, 6, 7],
                &[5, 6, 7, 8],
                &[1, 2, 3, 4],
                &[6, 7],
            ],
        );
        let p = partition_k4(&inst).unwrap();
        assert_eq!(p.t2, vec![t(&[6, 7])]);
        assert_eq!(p.t3, vec![t(&[1, 2, 3])]);
        assert_eq!(p.t4_sup3, vec![t(&[1, 2, 3, 4])]);
        assert!(p.intersect_groups.is_empty());
        assert_eq!(p.matched_pairs, vec![(t(&[3, 5, 6, 7]), t(&[5, 6, 7, 8]))]);
        assert_eq!(p.t4_depth2, vec![t(&[2, 3, 4, 5])]);
        assert_eq!(p.t3_prime, vec![t(&[1, 2, 3]), t(&[5, 6, 7])]);
        let s = solve(&inst);
        assert_eq!(s.report.phases["easy"], p.t_easy().len());
    }

    #[test]
    fn matched_flow() {
        let inst = Instance::from_sets(
            8,
            &[&[1, 2, 3, 4], &[2, 3, 4, 5], &[4, 5, 6, 7], &[3, 4, 6, 7]],
        );
        let p = partition_k4(&inst).unwrap();
        assert_eq!(p.matched_pairs.len(), 2);
        assert_eq!(p.t3_prime, vec![t(&[2, 3, 4]), t(&[4, 6, 7])]);
        let s = solve(&inst);
        assert_eq!(
            s.report.phases["core_cover"] + s.report.phases["core_combine"],
            4
        );
        assert_eq!(s.report.phases["easy"], 4);
        assert_eq!(s.circuit.size(), 8);
    }

    #[test]
    fn shared_triple_group() {
        let inst = Instance::from_sets(7, &[&[1, 2, 3, 4], &[1, 2, 3, 5], &[1, 2, 3, 6]]);
        let s = solve(&inst);
        assert_eq!(s.circuit.size(), 5);
        assert_eq!(s.report.phases["intersect"], 5);
    }

    #[test]
    fn single_and_disjoint_trees() {
        let one = Instance::from_sets(5, &[&[1, 2, 3, 4]]);
        assert_eq!(solve(&one).circuit.size(), 3);
        let two = Instance::from_sets(9, &[&[1, 2, 3, 4], &[5, 6, 7, 8]]);
        let p = partition_k4(&two).unwrap();
        assert_eq!(p.t4_depth2.len(), 2);
        assert!(p.is_pure_core());
        assert_eq!(solve(&two).circuit.size(), 6);
    }

    #[test]
    fn hypergraph_shapes() {
        let h = build_hypergraph(&[], &[], &[t(&[1, 2, 3, 4])]).unwrap();
        assert_eq!(h.graph.num_vertices(), 6);
        assert_eq!(h.graph.edges().len(), 8);
        let table = complementary_pairs(&t(&[1, 2, 3, 4]));
        for e in h.graph.edges() {
            for (u, ubar) in table {
                let hits = e
                    .iter()
                    .filter(|&&v| v == h.vertex(u) || v == h.vertex(ubar))
                    .count();
                assert_eq!(hits, 1);
            }
        }
        let h3 = build_hypergraph(&[], &[t(&[1, 2, 3])], &[]).unwrap();
        assert_eq!(h3.graph.edges(), &[vec![0, 1, 2]]);
        let h2 = build_hypergraph(&[t(&[1, 2])], &[], &[]).unwrap();
        assert_eq!(h2.graph.edges(), &[vec![0]]);
        assert!(build_hypergraph(&[t(&[1, 2, 3])], &[], &[]).is_err());
    }

    #[test]
    fn rejects_wide() {
        let inst = Instance::from_sets(6, &[&[1, 2, 3, 4, 5]]);
        assert!(matches!(
            solve_k4(&inst),
            Err(SolveError::TooWide { k: 5, .. })
        ));
    }
}
