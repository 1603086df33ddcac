//! Acceptance criteria, one PASS/FAIL line each. Every criterion writes a
//! JSON report; the determinism criterion reruns them and compares bytes.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use treeshare::algo_general::{solve_general, GeneralOptions};
use treeshare::algo_k3::solve_k3;
use treeshare::algo_k4::{build_hypergraph, partition_k4, solve_k4};
use treeshare::circuit::{dedupe_gates, depth2_normalize, Circuit, NodeRef, ValidationMode};
use treeshare::exact::{brute_min_vc, solve_exact, DEFAULT_NODE_BUDGET};
use treeshare::instance::{gen_random, Instance, Operator, Tree};
use treeshare::matching::{
    brute_matching, cover_from_matching, max_matching, maximal_matching, prune_cover, Hypergraph,
    MatchGraph,
};
use treeshare::reductions::{vc_to_bstso, VCGraph};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn load(name: &str) -> Instance {
    Instance::parse(&std::fs::read_to_string(data(name)).unwrap())
        .unwrap()
        .instance
}

/// Result of one criterion: its verdict, a one-line summary, the report
/// written to disk and every circuit it produced.
struct Outcome {
    pass: bool,
    summary: String,
    report: Value,
    circuits: Vec<(Instance, Circuit)>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            pass: true,
            summary: String::new(),
            report: json!([]),
            circuits: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok && self.pass {
            self.pass = false;
            self.summary = what();
        }
    }

    fn row(&mut self, row: Value) {
        self.report.as_array_mut().unwrap().push(row);
    }

    fn keep(&mut self, inst: &Instance, c: &Circuit) {
        self.circuits.push((inst.clone(), c.clone()));
    }

    fn summarize(&mut self, text: String) {
        if self.pass {
            self.summary = text;
        }
    }
}

fn sound(inst: &Instance, c: &Circuit) -> bool {
    c.validate(inst, ValidationMode::Lenient).is_ok()
        && (inst.num_vars() > 10 || c.check_exhaustive().is_ok())
}

fn scratch(inst: &Instance) -> usize {
    inst.trees().iter().map(|t| t.len() - 1).sum()
}

/// Optimum as a proven interval; `lo == hi` when the search finished.
fn optimum(inst: &Instance, out: &mut Outcome) -> (usize, usize) {
    let s = solve_exact(inst, DEFAULT_NODE_BUDGET).unwrap();
    out.check(sound(inst, &s.circuit), || {
        format!("exact circuit unsound for {:?}", inst.trees())
    });
    out.keep(inst, &s.circuit);
    (s.lower_bound, s.size)
}

fn random_graph(rng: &mut ChaCha8Rng, max_n: u32) -> VCGraph {
    let n = rng.gen_range(1..=max_n);
    let p = rng.gen_range(0.15..0.85);
    let mut edges = Vec::new();
    for a in 1..=n {
        for b in a + 1..=n {
            if rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    VCGraph::new(n, edges)
}

fn fixtures() -> Outcome {
    let mut out = Outcome::new();
    let overlapping = load("overlapping.txt");
    let circuit =
        Circuit::from_json(&std::fs::read_to_string(data("overlapping_circuit.json")).unwrap()).unwrap();
    out.check(sound(&overlapping, &circuit), || {
        "fixture circuit fails validation".into()
    });
    out.check((circuit.size(), circuit.depth()) == (9, 3), || {
        format!(
            "fixture circuit has size {} depth {}",
            circuit.size(),
            circuit.depth()
        )
    });
    out.keep(&overlapping, &circuit);

    let nine = load("nine_triples.txt");
    let k3 = solve_k3(&nine).unwrap();
    out.check(sound(&nine, &k3.circuit), || {
        "k3 trace circuit unsound".into()
    });
    out.check(k3.circuit.size() == 13, || {
        format!("k3 trace has {} gates", k3.circuit.size())
    });
    out.keep(&nine, &k3.circuit);

    let four = Tree::new(vec![1, 2, 3, 4]);
    let h = build_hypergraph(&[], &[], &[four]).unwrap();
    let triples = h
        .graph
        .edges()
        .iter()
        .all(|e| e.iter().collect::<BTreeSet<_>>().len() == 3);
    out.check(
        h.graph.num_vertices() == 6 && h.graph.edges().len() == 8 && triples,
        || {
            format!(
                "hypergraph has {} vertices, {} edges",
                h.graph.num_vertices(),
                h.graph.edges().len()
            )
        },
    );
    out.row(json!({
        "fixture_size": circuit.size(),
        "fixture_depth": circuit.depth(),
        "trace_gates": k3.circuit.size(),
        "trace_phases": k3.report.phases,
        "hypergraph": [h.graph.num_vertices(), h.graph.edges().len()],
    }));
    out.summarize(
        "fixture size 9 depth 3, trace 13 gates, hypergraph 6 vertices / 8 triples".into(),
    );
    out
}

fn reduction_identity() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x2001);
    for i in 0..50 {
        let g = random_graph(&mut rng, 8);
        let inst = vc_to_bstso(&g);
        let (lo, hi) = optimum(&inst, &mut out);
        let vc = brute_min_vc(&g.to_hypergraph()).unwrap().len();
        let m = g.edges().len();
        out.check(lo == hi && hi == vc + m, || {
            format!("graph {i}: optimum in [{lo}, {hi}], cover {vc} + edges {m}")
        });
        out.row(
            json!({"graph": i, "vertices": g.num_vertices(), "edges": m, "cover": vc, "opt": hi}),
        );
    }
    out.summarize("50 graphs: optimum == min vertex cover + |E| on every one".into());
    out
}

fn k3_ratio() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x3001);
    let (mut tight, mut worst) = (0, (0, 1));
    for i in 0..200u64 {
        let n = rng.gen_range(4..=8);
        let m = rng.gen_range(1..=8);
        let bias = rng.gen_range(0.2..0.95);
        let inst = gen_random(n, m, 3, bias, 0x3000_0000 + i).unwrap();
        let s = solve_k3(&inst).unwrap();
        out.check(sound(&inst, &s.circuit), || {
            format!("instance {i}: k3 circuit unsound")
        });
        out.keep(&inst, &s.circuit);
        let size = s.circuit.size();
        let (opt, hi) = optimum(&inst, &mut out);
        out.check(opt == hi, || format!("instance {i}: optimum not settled"));
        out.check(3 * size <= 4 * opt, || {
            format!("instance {i}: size {size} vs opt {opt}")
        });

        // residual family: only 3-trees and no pair inside three of them
        let big: Vec<&Tree> = inst.trees().iter().filter(|t| t.len() >= 2).collect();
        let popular = big.iter().any(|t| {
            let v = t.vars();
            (0..v.len()).any(|x| {
                (x + 1..v.len()).any(|y| {
                    big.iter()
                        .filter(|u| u.vars().contains(&v[x]) && u.vars().contains(&v[y]))
                        .count()
                        >= 3
                })
            })
        });
        let residual = !popular && big.iter().all(|t| t.len() == 3);
        if residual {
            tight += 1;
            out.check(size == opt, || {
                format!("instance {i}: residual size {size} != opt {opt}")
            });
        }
        if size * worst.1 > worst.0 * opt {
            worst = (size, opt);
        }
        out.row(json!({"instance": i, "size": size, "opt": opt, "residual": residual}));
    }
    out.summarize(format!(
        "200 instances, worst {}/{}, {tight} residual instances all optimal",
        worst.0, worst.1
    ));
    out
}

fn k4_ratio() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x4001);
    let (mut core, mut worst) = (0, (0, 1));
    for i in 0..150u64 {
        let n = rng.gen_range(4..=9);
        let m = rng.gen_range(1..=7);
        let bias = rng.gen_range(0.2..0.95);
        let inst = gen_random(n, m, 4, bias, 0x4000_0000 + i).unwrap();
        let s = solve_k4(&inst).unwrap();
        out.check(sound(&inst, &s.circuit), || {
            format!("instance {i}: k4 circuit unsound")
        });
        out.keep(&inst, &s.circuit);
        let size = s.circuit.size();
        let (opt, hi) = optimum(&inst, &mut out);
        out.check(opt == hi, || format!("instance {i}: optimum not settled"));
        out.check(10 * size <= 19 * opt, || {
            format!("instance {i}: size {size} vs opt {opt}")
        });
        let pure = partition_k4(&inst).unwrap().is_pure_core();
        if pure {
            core += 1;
            out.check(5 * size <= 9 * opt, || {
                format!("instance {i}: core size {size} vs opt {opt}")
            });
        }
        if size * worst.1 > worst.0 * opt {
            worst = (size, opt);
        }
        out.row(json!({"instance": i, "size": size, "opt": opt, "pure_core": pure}));
    }
    out.summarize(format!(
        "150 instances, worst {}/{}, {core} pure-core instances within 9/5",
        worst.0, worst.1
    ));
    out
}

fn general_ratio() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5001);
    let (mut bounded, mut worst) = (0, (0, 1));
    for i in 0..150u64 {
        let max_size = rng.gen_range(2..=7);
        let n = rng.gen_range(max_size.max(4)..=10);
        let m = rng.gen_range(1..=6);
        let bias = rng.gen_range(0.2..0.95);
        let inst = gen_random(n, m, max_size, bias, 0x5000_0000 + i).unwrap();
        let s = solve_general(&inst, &GeneralOptions::default());
        out.check(sound(&inst, &s.circuit), || {
            format!("instance {i}: general circuit unsound")
        });
        out.keep(&inst, &s.circuit);
        let size = s.circuit.size();
        let k = inst.max_tree_size();
        // a proven lower bound implies the ratio against the true optimum
        let (lo, hi) = optimum(&inst, &mut out);
        if lo < hi {
            bounded += 1;
        }
        out.check(3 * size <= 2 * k * lo, || {
            format!("instance {i}: size {size}, k {k}, opt >= {lo}")
        });
        out.check(size <= scratch(&inst), || {
            format!("instance {i}: size {size} above scratch")
        });
        if size * worst.1 > worst.0 * hi {
            worst = (size, hi);
        }
        out.row(json!({"instance": i, "k": k, "size": size, "opt_lo": lo, "opt_hi": hi}));
    }
    out.summarize(format!(
        "150 instances, worst {}/{}, {bounded} certified by lower bound only",
        worst.0, worst.1
    ));
    out
}

fn matching_exactness() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6001);
    for i in 0..300 {
        let n = rng.gen_range(1..=12usize);
        let p = rng.gen_range(0.05..0.7);
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|_| rng.gen_bool(p))
            .collect();
        let g = MatchGraph::new(n, edges.clone());
        let m = max_matching(&g);
        let mut seen = BTreeSet::new();
        let valid = m.iter().all(|&(a, b)| {
            (edges.contains(&(a, b)) || edges.contains(&(b, a))) && seen.insert(a) && seen.insert(b)
        });
        let brute = brute_matching(&g).unwrap();
        out.check(valid && m.len() == brute, || {
            format!(
                "graph {i}: blossom {} vs brute {brute}, valid {valid}",
                m.len()
            )
        });
        out.row(json!({"graph": i, "vertices": n, "edges": edges.len(), "matching": m.len()}));
    }
    out.summarize("300 graphs: blossom matching == brute force".into());
    out
}

fn cover_properties() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7001);
    let mut worst = (0, 1);
    for i in 0..100 {
        let n = rng.gen_range(3..=12usize);
        let m = rng.gen_range(1..=20);
        let edges: Vec<Vec<usize>> = (0..m)
            .map(|_| {
                let size = rng.gen_range(1..=3);
                let set: BTreeSet<usize> = (0..size).map(|_| rng.gen_range(0..n)).collect();
                set.into_iter().collect()
            })
            .collect();
        let h = Hypergraph::new(n, edges.clone());
        let covers = |c: &[usize]| edges.iter().all(|e| e.iter().any(|v| c.contains(v)));
        let cover = cover_from_matching(&h, &maximal_matching(&h)).unwrap();
        out.check(covers(&cover), || {
            format!("hypergraph {i}: matching cover misses an edge")
        });
        let pruned = prune_cover(&h, &cover).unwrap();
        out.check(covers(&pruned), || {
            format!("hypergraph {i}: pruned cover misses an edge")
        });
        let minimal = (0..pruned.len()).all(|j| {
            let mut less = pruned.clone();
            less.remove(j);
            !covers(&less)
        });
        out.check(minimal, || {
            format!("hypergraph {i}: pruned cover not minimal")
        });
        let opt = brute_min_vc(&h).unwrap().len();
        out.check(pruned.len() <= 3 * opt, || {
            format!("hypergraph {i}: {} vs 3*{opt}", pruned.len())
        });
        if pruned.len() * worst.1 > worst.0 * opt {
            worst = (pruned.len(), opt);
        }
        out.row(json!({"hypergraph": i, "cover": cover.len(), "pruned": pruned.len(), "opt": opt}));
    }
    out.summarize(format!(
        "100 hypergraphs, worst pruned/opt {}/{}",
        worst.0, worst.1
    ));
    out
}

/// Depth of the cone below `node`.
fn cone_depth(c: &Circuit, node: NodeRef) -> usize {
    match node {
        NodeRef::Input(_) => 0,
        NodeRef::Gate(i) => {
            let g = c.gates[i];
            1 + cone_depth(c, g.left).max(cone_depth(c, g.right))
        }
    }
}

/// 4-trees whose output is `((a∘b)∘c)∘d` with the middle gate used once.
fn chain_trees(c: &Circuit) -> Vec<Tree> {
    let sets = c.gate_varsets();
    let fanout = c.fanout();
    let single = |r: NodeRef, len: usize| match r {
        NodeRef::Gate(j) if sets[j].len() == len => Some(j),
        _ => None,
    };
    c.outputs
        .iter()
        .filter(|(t, _)| t.len() == 4)
        .filter_map(|(t, &node)| {
            let NodeRef::Gate(u) = node else { return None };
            let g = c.gates[u];
            let v = single(g.left, 3).or(single(g.right, 3))?;
            let h = c.gates[v];
            let inputs = [g.left, g.right, h.left, h.right]
                .iter()
                .filter(|r| matches!(r, NodeRef::Input(_)))
                .count();
            let pair = single(h.left, 2).or(single(h.right, 2));
            (fanout[v] == 1 && inputs == 2 && pair.is_some()).then(|| t.clone())
        })
        .collect()
}

fn rewrite_safety(circuits: &[(Instance, Circuit)]) -> Outcome {
    let mut out = Outcome::new();
    let mut applied = 0;
    for (idx, (inst, c)) in circuits.iter().enumerate() {
        let deduped = dedupe_gates(c);
        let normal = depth2_normalize(c, inst);
        out.check(
            deduped.size() <= c.size() && normal.size() <= c.size(),
            || format!("circuit {idx}: rewrite grew the circuit"),
        );
        for op in Operator::ALL {
            let on = |x: &Circuit| {
                let mut x = x.clone();
                x.operator = op;
                x
            };
            out.check(
                on(&deduped).check_exhaustive().is_ok() && on(&normal).check_exhaustive().is_ok(),
                || format!("circuit {idx}: rewrite changed {op} semantics"),
            );
        }
        for t in chain_trees(c) {
            applied += 1;
            let d = cone_depth(&normal, normal.outputs[&t]);
            out.check(d <= 2, || {
                format!("circuit {idx}: cone of {t:?} has depth {d}")
            });
        }
        out.row(json!({"circuit": idx, "size": c.size(), "dedupe": deduped.size(), "normalized": normal.size()}));
    }
    out.summarize(format!(
        "{} circuits under AND/OR/XOR, {applied} chain cones now depth 2",
        circuits.len()
    ));
    out
}

type Criterion = fn() -> Outcome;

const CRITERIA: [(&str, Criterion, u64); 7] = [
    ("fixture fidelity", fixtures, 1),
    ("reduction identity", reduction_identity, 120),
    ("k3 ratio 4/3", k3_ratio, 300),
    ("k4 ratio 19/10", k4_ratio, 600),
    ("general ratio 2k/3", general_ratio, 600),
    ("matching exactness", matching_exactness, 60),
    ("cover properties", cover_properties, 60),
];

fn report_path(dir: &Path, n: usize) -> PathBuf {
    dir.join(format!("criterion-{n}.json"))
}

fn write_report(dir: &Path, n: usize, report: &Value) -> Vec<u8> {
    let bytes = serde_json::to_vec_pretty(report).unwrap();
    std::fs::write(report_path(dir, n), &bytes).unwrap();
    bytes
}

fn line(n: usize, name: &str, pass: bool, summary: &str, elapsed: Duration, limit: u64) -> bool {
    let in_time = elapsed.as_secs_f64() < limit as f64;
    let ok = pass && in_time;
    let timing = if in_time {
        format!("{:.2}s", elapsed.as_secs_f64())
    } else {
        format!("{:.2}s, limit {limit}s", elapsed.as_secs_f64())
    };
    println!(
        "{} criterion {n} ({name}): {summary} [{timing}]",
        if ok { "PASS" } else { "FAIL" }
    );
    ok
}

fn main() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    let mut all_ok = true;
    let mut circuits = Vec::new();
    let mut first_bytes = Vec::new();

    // criterion 8 consumes circuits from 1-5, so it is reported after 7
    for (i, &(name, run, limit)) in CRITERIA.iter().enumerate() {
        let n = i + 1;
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        first_bytes.push(write_report(&dir, n, &out.report));
        all_ok &= line(n, name, out.pass, &out.summary, elapsed, limit);
        circuits.extend(out.circuits);
    }

    let start = Instant::now();
    let out = rewrite_safety(&circuits);
    let elapsed = start.elapsed();
    first_bytes.push(write_report(&dir, 8, &out.report));
    all_ok &= line(8, "rewrite safety", out.pass, &out.summary, elapsed, 300);

    let start = Instant::now();
    let mut same = true;
    let mut differing = Vec::new();
    let mut rerun_circuits = Vec::new();
    for (i, &(_, run, _)) in CRITERIA.iter().enumerate() {
        let out = run();
        let before = std::fs::read(report_path(&dir, i + 1)).unwrap();
        if write_report(&dir, i + 1, &out.report) != before || before != first_bytes[i] {
            same = false;
            differing.push(i + 1);
        }
        rerun_circuits.extend(out.circuits);
    }
    let before = std::fs::read(report_path(&dir, 8)).unwrap();
    if write_report(&dir, 8, &rewrite_safety(&rerun_circuits).report) != before {
        same = false;
        differing.push(8);
    }
    let summary = if same {
        "criteria 1-8 rerun with the same seeds give byte-identical reports".to_string()
    } else {
        format!("reports differ on rerun for criteria {differing:?}")
    };
    all_ok &= line(9, "determinism", same, &summary, start.elapsed(), 1800);

    if !all_ok {
        std::process::exit(1);
    }
}
