//! Exact minimum circuits by iterative-deepening search, and exact minimum
//! vertex covers for small (hyper)graphs.
//!
//! Two reductions keep the search small without losing optimality:
//!
//! * Variables occurring in exactly the same trees are merged; a class of
//!   `c` variables costs `c - 1` gates on its own, and an optimal circuit
//!   for the merged instance lifts back by substituting class products.
//! * Only gates whose variable set lies in at least two trees ("shared"
//!   sets) are searched. A set contained in a single tree can only serve that
//!   tree, so each such tree is finished by joining a minimum partition of
//!   itself into already available sets.
//!
//! Shared sets are emitted in the greedy-smallest topological order: each
//! gate either has a larger mask than its predecessor or consumes it.

use std::collections::{BTreeMap, HashMap};

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::algo_general::{solve_general, GeneralOptions};
use crate::circuit::{dedupe_gates, Circuit, CircuitBuilder, NodeRef};
use crate::instance::Instance;
use crate::matching::Hypergraph;

/// Largest number of variable classes the search accepts.
pub const MAX_EXACT_VARS: usize = 20;
pub const DEFAULT_NODE_BUDGET: u64 = 20_000_000;
pub const MAX_VC_VERTICES: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExactError {
    #[error(
        "exact search supports at most {limit} distinct variable classes, instance has {used}"
    )]
    TooManyVars { used: usize, limit: usize },
    #[error("exact vertex cover supports at most {limit} vertices, got {got}")]
    TooManyVertices { got: usize, limit: usize },
}

#[derive(Clone, Debug)]
pub struct ExactSolution {
    pub circuit: Circuit,
    pub size: usize,
    /// False when the node budget ran out; `circuit` is then the best known.
    pub exact: bool,
    /// Proven lower bound on the optimum; equals `size` when `exact`.
    pub lower_bound: usize,
    pub nodes: u64,
}

type Key = (Vec<u32>, u32);

struct Search {
    all_trees: Vec<u32>,
    /// Trees contained in another tree; they are built by the search.
    inner: Vec<u32>,
    /// Trees contained in no other tree; finished from a partition.
    outer: Vec<u32>,
    reach: u32,
    /// Number of trees containing each set.
    owners: Vec<u8>,
    avail: Vec<bool>,
    built: Vec<u32>,
    trace: Vec<(u32, u32, u32)>,
    memo: FxHashMap<Key, u32>,
    nodes: u64,
    node_budget: u64,
    aborted: bool,
}

fn low_bit(t: u32) -> u32 {
    t & t.wrapping_neg()
}

impl Search {
    fn shared(&self, x: u32) -> bool {
        self.owners[x as usize] >= 2
    }

    /// Minimum number of available sets partitioning `t`, with the first
    /// piece of an optimal partition.
    fn partition(
        &self,
        t: u32,
        parts: &[u32],
        memo: &mut FxHashMap<u32, (u32, u32)>,
    ) -> (u32, u32) {
        if t == 0 {
            return (0, 0);
        }
        if self.avail[t as usize] {
            return (1, t);
        }
        if let Some(&v) = memo.get(&t) {
            return v;
        }
        let low = low_bit(t);
        let mut best = (1 + self.partition(t & !low, parts, memo).0, low);
        for &a in parts {
            if a & low != 0 && a & !t == 0 {
                let c = 1 + self.partition(t & !a, parts, memo).0;
                if c < best.0 {
                    best = (c, a);
                }
            }
        }
        memo.insert(t, best);
        best
    }

    fn parts_within(&self, t: u32) -> Vec<u32> {
        self.built
            .iter()
            .copied()
            .filter(|&b| b & !t == 0)
            .collect()
    }

    fn cost(&self, t: u32) -> u32 {
        self.partition(t, &self.parts_within(t), &mut FxHashMap::default())
            .0
            - 1
    }

    /// Gates needed to finish each outer tree from the available sets.
    fn completion(&self) -> Vec<u32> {
        self.outer.iter().map(|&t| self.cost(t)).collect()
    }

    /// Pieces of a minimum partition of `t`.
    fn pieces(&self, t: u32) -> Vec<u32> {
        let parts = self.parts_within(t);
        let mut memo = FxHashMap::default();
        let mut rest = t;
        let mut out = Vec::new();
        while rest != 0 {
            let (_, piece) = self.partition(rest, &parts, &mut memo);
            out.push(piece);
            rest &= !piece;
        }
        out
    }

    fn lower_bound(&self, missing_inner: u32, costs: &[u32]) -> u32 {
        let trees_left = missing_inner + costs.len() as u32;
        // Every future shared gate lowers each outer tree's partition by at most one.
        // A gate lies in at most `reach` outer trees.
        let total: u32 = costs.iter().sum();
        let by_partition = (missing_inner..=total.max(missing_inner))
            .map(|s| {
                let per_tree: u32 = costs.iter().map(|&c| s.min(c.saturating_sub(1))).sum();
                s + total - per_tree.min(s * self.reach)
            })
            .min()
            .unwrap_or(0);
        // Built sets nothing uses yet must become operands of future gates.
        let dangling = self
            .built
            .iter()
            .filter(|&&d| {
                self.all_trees.binary_search(&d).is_err()
                    && !self.built.iter().any(|&s| s != d && s & d == d)
            })
            .count() as u32;
        trees_left
            .max(by_partition)
            .max(dangling.saturating_sub(trees_left))
    }

    /// Candidate shared gates `(set, left, right)` in increasing set order.
    fn candidates(&self, prev: u32) -> Vec<(u32, u32, u32)> {
        let mut out: BTreeMap<u32, (u32, u32)> = BTreeMap::new();
        let targets = self
            .outer
            .iter()
            .chain(self.inner.iter().filter(|&&t| !self.avail[t as usize]));
        for &t in targets {
            let mut parts: Vec<u32> = (0..32).map(|b| 1u32 << b).filter(|&b| t & b != 0).collect();
            parts.extend(self.parts_within(t).into_iter().filter(|&b| b != t));
            for (i, &a) in parts.iter().enumerate() {
                for &b in &parts[i + 1..] {
                    let x = a | b;
                    if a & b != 0 || self.avail[x as usize] || out.contains_key(&x) {
                        continue;
                    }
                    let ordered = x > prev || a == prev || b == prev;
                    if ordered && self.shared(x) {
                        out.insert(x, (a, b));
                    }
                }
            }
        }
        out.into_iter().map(|(x, (a, b))| (x, a, b)).collect()
    }

    /// `costs` holds the completion cost of each outer tree before `prev`
    /// was added; only trees containing `prev` can change.
    fn dfs(&mut self, prev: u32, r: u32, parent_costs: &[u32]) -> bool {
        let missing_inner = self
            .inner
            .iter()
            .filter(|&&t| !self.avail[t as usize])
            .count() as u32;
        let costs: Vec<u32> = self
            .outer
            .iter()
            .zip(parent_costs)
            .map(|(&t, &c)| {
                if prev != 0 && prev & !t == 0 {
                    self.cost(t)
                } else {
                    c
                }
            })
            .collect();
        if missing_inner == 0 && costs.iter().sum::<u32>() <= r {
            return true;
        }
        if self.nodes >= self.node_budget {
            self.aborted = true;
            return false;
        }
        self.nodes += 1;
        if self.lower_bound(missing_inner, &costs) > r {
            return false;
        }
        let mut family = self.built.clone();
        family.sort_unstable();
        let key = (family, prev);
        if self.memo.get(&key).is_some_and(|&failed| failed >= r) {
            return false;
        }
        for (x, a, b) in self.candidates(prev) {
            self.avail[x as usize] = true;
            self.built.push(x);
            self.trace.push((x, a, b));
            if self.dfs(x, r - 1, &costs) {
                return true;
            }
            self.trace.pop();
            self.built.pop();
            self.avail[x as usize] = false;
            if self.aborted {
                return false;
            }
        }
        let e = self.memo.entry(key).or_insert(0);
        *e = (*e).max(r);
        false
    }
}

/// Minimum-size circuit for `instance`, exploring at most `node_budget`
/// search nodes.
pub fn solve_exact(instance: &Instance, node_budget: u64) -> Result<ExactSolution, ExactError> {
    let big: Vec<_> = instance.trees().iter().filter(|t| t.len() >= 2).collect();

    // Variable classes by tree membership; each class is represented by one bit.
    let mut membership: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, t) in big.iter().enumerate() {
        for &v in t.vars() {
            membership.entry(v).or_default().push(i);
        }
    }
    let mut classes: BTreeMap<Vec<usize>, Vec<u32>> = BTreeMap::new();
    for (v, owners) in membership {
        classes.entry(owners).or_default().push(v);
    }
    let mut classes: Vec<Vec<u32>> = classes.into_values().collect();
    classes.sort();
    if classes.len() > MAX_EXACT_VARS {
        return Err(ExactError::TooManyVars {
            used: classes.len(),
            limit: MAX_EXACT_VARS,
        });
    }
    let class_of: HashMap<u32, usize> = classes
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |&v| (v, i)))
        .collect();
    let mask = |vars: &[u32]| vars.iter().fold(0u32, |m, v| m | 1 << class_of[v]);
    let merged: u32 = classes.iter().map(|c| c.len() as u32 - 1).sum();

    let mut all_trees: Vec<u32> = big.iter().map(|t| mask(t.vars())).collect();
    all_trees.sort_unstable();
    let multi: Vec<u32> = all_trees
        .iter()
        .copied()
        .filter(|t| t.count_ones() >= 2)
        .collect();
    let (inner, outer): (Vec<u32>, Vec<u32>) = multi
        .iter()
        .partition(|&&t| all_trees.iter().any(|&o| o != t && t & !o == 0));

    let reach = (0..classes.len())
        .flat_map(|i| (i + 1..classes.len()).map(move |j| 1u32 << i | 1 << j))
        .map(|pair| outer.iter().filter(|&&t| pair & !t == 0).count() as u32)
        .max()
        .unwrap_or(0);

    let heuristic = dedupe_gates(&solve_general(instance, &GeneralOptions::default()).circuit);
    let upper = heuristic.size() as u32 - merged;

    let mut owners = vec![0u8; 1usize << classes.len()];
    for &t in &all_trees {
        let mut sub = t;
        while sub != 0 {
            owners[sub as usize] = owners[sub as usize].saturating_add(1);
            sub = (sub - 1) & t;
        }
    }

    let mut avail = vec![false; 1usize << classes.len()];
    for i in 0..classes.len() {
        avail[1 << i] = true;
    }
    let mut s = Search {
        all_trees,
        reach,
        owners,
        inner,
        outer,
        avail,
        built: Vec::new(),
        trace: Vec::new(),
        memo: FxHashMap::default(),
        nodes: 0,
        node_budget,
        aborted: false,
    };
    let costs = s.completion();
    let start = s.lower_bound(s.inner.len() as u32, &costs);
    let mut found = false;
    let mut proven = start;
    for budget in start..upper {
        if s.dfs(0, budget, &costs) {
            found = true;
            break;
        }
        if s.aborted {
            break;
        }
        proven = budget + 1;
    }
    if !found {
        let size = heuristic.size();
        return Ok(ExactSolution {
            circuit: heuristic,
            size,
            exact: !s.aborted,
            lower_bound: if s.aborted {
                (proven + merged) as usize
            } else {
                size
            },
            nodes: s.nodes,
        });
    }

    let mut b = CircuitBuilder::new(instance.num_vars(), instance.operator());
    let mut node: HashMap<u32, NodeRef> = HashMap::new();
    for (i, class) in classes.iter().enumerate() {
        node.insert(1 << i, b.balanced(class));
    }
    for &(x, l, r) in &s.trace {
        let g = b.gate(node[&l], node[&r]);
        node.insert(x, g);
    }
    for &t in &s.outer {
        let pieces = s.pieces(t).into_iter().map(|p| node[&p]).collect();
        let g = b.join(pieces);
        node.insert(t, g);
    }
    for t in instance.trees() {
        let n = if t.len() == 1 {
            NodeRef::input(t.vars()[0])
        } else {
            node[&mask(t.vars())]
        };
        b.output(t, n);
    }
    let circuit = b.finish();
    Ok(ExactSolution {
        size: circuit.size(),
        lower_bound: circuit.size(),
        circuit,
        exact: true,
        nodes: s.nodes,
    })
}

/// Minimum vertex cover by bounded branching on an uncovered edge.
pub fn brute_min_vc(h: &Hypergraph) -> Result<Vec<usize>, ExactError> {
    if h.num_vertices() > MAX_VC_VERTICES {
        return Err(ExactError::TooManyVertices {
            got: h.num_vertices(),
            limit: MAX_VC_VERTICES,
        });
    }
    fn branch(edges: &[u64], chosen: u64, left: u32) -> Option<u64> {
        let Some(&e) = edges.iter().find(|&&e| e & chosen == 0) else {
            return Some(chosen);
        };
        if left == 0 {
            return None;
        }
        let mut rest = e;
        while rest != 0 {
            let v = rest & rest.wrapping_neg();
            rest &= rest - 1;
            if let Some(c) = branch(edges, chosen | v, left - 1) {
                return Some(c);
            }
        }
        None
    }
    let edges: Vec<u64> = h
        .edges()
        .iter()
        .map(|e| e.iter().fold(0u64, |m, &v| m | 1 << v))
        .collect();
    let cover = (0..=h.num_vertices() as u32)
        .find_map(|k| branch(&edges, 0, k))
        .expect("all vertices always cover");
    Ok((0..h.num_vertices())
        .filter(|&v| cover >> v & 1 == 1)
        .collect())
}
