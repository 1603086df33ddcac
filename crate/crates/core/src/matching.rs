//! Maximum matching in general graphs, maximal matching in hypergraphs with
//! edges of size at most three, and vertex covers derived from them.

use std::collections::VecDeque;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatchingError {
    #[error("exhaustive search limited to {limit} vertices, got {got}")]
    TooLarge { limit: usize, got: usize },
    #[error("vertex set leaves edge {0:?} uncovered")]
    NotACover(Vec<usize>),
}

/// Simple undirected graph on vertices `0..num_vertices`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchGraph {
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl MatchGraph {
    /// Normalizes each edge to `(min, max)`, sorts and drops parallel edges.
    /// Panics on self-loops or out-of-range endpoints.
    pub fn new(num_vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut edges: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(a, b)| {
                assert!(a != b, "self-loop at {a}");
                assert!(a.max(b) < num_vertices, "edge ({a}, {b}) out of range");
                (a.min(b), a.max(b))
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        MatchGraph {
            num_vertices,
            edges,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_vertices];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }
}

const NONE: usize = usize::MAX;

/// Edmonds' blossom search state for one augmenting-path phase.
struct Blossom<'a> {
    adj: &'a [Vec<usize>],
    mate: Vec<usize>,
    parent: Vec<usize>,
    base: Vec<usize>,
    used: Vec<bool>,
    in_blossom: Vec<bool>,
}

impl Blossom<'_> {
    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        let mut seen = vec![false; self.mate.len()];
        loop {
            a = self.base[a];
            seen[a] = true;
            if self.mate[a] == NONE {
                break;
            }
            a = self.parent[self.mate[a]];
        }
        loop {
            b = self.base[b];
            if seen[b] {
                return b;
            }
            b = self.parent[self.mate[b]];
        }
    }

    fn mark_path(&mut self, mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            self.in_blossom[self.base[v]] = true;
            self.in_blossom[self.base[self.mate[v]]] = true;
            self.parent[v] = child;
            child = self.mate[v];
            v = self.parent[self.mate[v]];
        }
    }

    /// Endpoint of an augmenting path from `root`, if one exists.
    fn find_path(&mut self, root: usize) -> Option<usize> {
        let n = self.mate.len();
        self.used.fill(false);
        self.parent.fill(NONE);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.used[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &to in &self.adj[v] {
                if self.base[v] == self.base[to] || self.mate[v] == to {
                    continue;
                }
                if to == root || (self.mate[to] != NONE && self.parent[self.mate[to]] != NONE) {
                    let cur = self.lca(v, to);
                    self.in_blossom.fill(false);
                    self.mark_path(v, cur, to);
                    self.mark_path(to, cur, v);
                    for i in 0..n {
                        if self.in_blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.used[i] {
                                self.used[i] = true;
                                queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to] == NONE {
                    self.parent[to] = v;
                    if self.mate[to] == NONE {
                        return Some(to);
                    }
                    let next = self.mate[to];
                    self.used[next] = true;
                    queue.push_back(next);
                }
            }
        }
        None
    }
}

/// Maximum-cardinality matching (Edmonds' blossom algorithm). Edges are
/// returned as `(min, max)` pairs in sorted order.
pub fn max_matching(g: &MatchGraph) -> Vec<(usize, usize)> {
    let n = g.num_vertices;
    let adj = g.adjacency();
    let mut s = Blossom {
        adj: &adj,
        mate: vec![NONE; n],
        parent: vec![NONE; n],
        base: (0..n).collect(),
        used: vec![false; n],
        in_blossom: vec![false; n],
    };
    for root in 0..n {
        if s.mate[root] != NONE {
            continue;
        }
        if let Some(mut v) = s.find_path(root) {
            while v != NONE {
                let pv = s.parent[v];
                let next = s.mate[pv];
                s.mate[v] = pv;
                s.mate[pv] = v;
                v = next;
            }
        }
    }
    (0..n)
        .filter(|&v| s.mate[v] != NONE && v < s.mate[v])
        .map(|v| (v, s.mate[v]))
        .collect()
}

/// Largest vertex count `brute_matching` accepts.
pub const BRUTE_MATCHING_LIMIT: usize = 20;

/// Maximum matching size by exhaustive search over vertex subsets: the lowest
/// remaining vertex is either left unmatched or matched to a neighbour.
pub fn brute_matching(g: &MatchGraph) -> Result<usize, MatchingError> {
    let n = g.num_vertices;
    if n > BRUTE_MATCHING_LIMIT {
        return Err(MatchingError::TooLarge {
            limit: BRUTE_MATCHING_LIMIT,
            got: n,
        });
    }
    let mut adj = vec![0u32; n];
    for &(a, b) in &g.edges {
        adj[a] |= 1 << b;
        adj[b] |= 1 << a;
    }
    fn go(rest: u32, adj: &[u32], memo: &mut [u8]) -> u8 {
        if rest == 0 {
            return 0;
        }
        if memo[rest as usize] != u8::MAX {
            return memo[rest as usize];
        }
        let v = rest.trailing_zeros() as usize;
        let without = rest & !(1 << v);
        let mut best = go(without, adj, memo);
        let mut partners = adj[v] & without;
        while partners != 0 {
            let u = partners.trailing_zeros();
            partners &= partners - 1;
            best = best.max(1 + go(without & !(1 << u), adj, memo));
        }
        memo[rest as usize] = best;
        best
    }
    let mut memo = vec![u8::MAX; 1 << n];
    Ok(go(((1u64 << n) - 1) as u32, &adj, &mut memo) as usize)
}

/// Hypergraph on vertices `0..num_vertices` with edges of 1 to 3 vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    num_vertices: usize,
    edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    /// Sorts every edge and the edge list, dropping duplicates. Panics on
    /// empty or oversized edges and out-of-range vertices.
    pub fn new(num_vertices: usize, edges: impl IntoIterator<Item = Vec<usize>>) -> Self {
        let mut edges: Vec<Vec<usize>> = edges
            .into_iter()
            .map(|mut e| {
                e.sort_unstable();
                e.dedup();
                assert!(
                    (1..=3).contains(&e.len()),
                    "edge {e:?} must have 1 to 3 vertices"
                );
                assert!(
                    e.iter().all(|&v| v < num_vertices),
                    "edge {e:?} out of range"
                );
                e
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        Hypergraph {
            num_vertices,
            edges,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    /// First edge (in canonical order) that `cover` misses.
    pub fn uncovered<'a>(&'a self, cover: &[usize]) -> Option<&'a Vec<usize>> {
        let mut mark = vec![false; self.num_vertices];
        for &v in cover {
            mark[v] = true;
        }
        self.edges.iter().find(|e| !e.iter().any(|&v| mark[v]))
    }
}

/// Greedy maximal matching over edges in canonical order; returns edge indices.
pub fn maximal_matching(h: &Hypergraph) -> Vec<usize> {
    let mut used = vec![false; h.num_vertices];
    let mut chosen = Vec::new();
    for (i, e) in h.edges.iter().enumerate() {
        if e.iter().all(|&v| !used[v]) {
            for &v in e {
                used[v] = true;
            }
            chosen.push(i);
        }
    }
    chosen
}

/// All vertices of the matched edges, sorted. Errors if the result is not a
/// cover, i.e. the matching was not maximal.
pub fn cover_from_matching(
    h: &Hypergraph,
    matching: &[usize],
) -> Result<Vec<usize>, MatchingError> {
    let mut cover: Vec<usize> = matching
        .iter()
        .flat_map(|&i| h.edges[i].iter().copied())
        .collect();
    cover.sort_unstable();
    cover.dedup();
    match h.uncovered(&cover) {
        Some(e) => Err(MatchingError::NotACover(e.clone())),
        None => Ok(cover),
    }
}

/// Drops vertices in increasing order while the rest still covers every
/// edge. The result is inclusion-minimal.
pub fn prune_cover(h: &Hypergraph, cover: &[usize]) -> Result<Vec<usize>, MatchingError> {
    if let Some(e) = h.uncovered(cover) {
        return Err(MatchingError::NotACover(e.clone()));
    }
    let mut cover = cover.to_vec();
    cover.sort_unstable();
    cover.dedup();
    let mut hits = vec![0usize; h.edges.len()];
    let mut incident = vec![Vec::new(); h.num_vertices];
    let mut member = vec![false; h.num_vertices];
    for &v in &cover {
        member[v] = true;
    }
    for (i, e) in h.edges.iter().enumerate() {
        for &v in e {
            incident[v].push(i);
            if member[v] {
                hits[i] += 1;
            }
        }
    }
    let mut kept = Vec::new();
    for v in cover {
        if incident[v].iter().all(|&i| hits[i] > 1) {
            for &i in &incident[v] {
                hits[i] -= 1;
            }
        } else {
            kept.push(v);
        }
    }
    Ok(kept)
}
