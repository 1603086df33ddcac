//! Problem instances: a family of variable sets ("trees") whose products
//! must all appear as outputs of one shared circuit.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::varset::VarSet;

/// Index of a Boolean input variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

/// Associative, commutative two-input operator shared by every gate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Operator {
    #[default]
    And,
    Or,
    Xor,
}

impl Operator {
    pub const ALL: [Operator; 3] = [Operator::And, Operator::Or, Operator::Xor];

    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            Operator::And => a && b,
            Operator::Or => a || b,
            Operator::Xor => a ^ b,
        }
    }

    /// Folds the operator over a nonempty sequence of bits.
    pub fn fold(self, bits: impl IntoIterator<Item = bool>) -> bool {
        let mut it = bits.into_iter();
        let first = it.next().expect("fold over an empty operand list");
        it.fold(first, |acc, b| self.apply(acc, b))
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Operator::And => "AND",
            Operator::Or => "OR",
            Operator::Xor => "XOR",
        })
    }
}

impl FromStr for Operator {
    type Err = InstanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "and" => Ok(Operator::And),
            "or" => Ok(Operator::Or),
            "xor" => Ok(Operator::Xor),
            _ => Err(InstanceError::Malformed {
                line: 0,
                msg: format!("unknown operator `{s}`"),
            }),
        }
    }
}

/// A set of variable indices, kept sorted and duplicate-free.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tree(Vec<u32>);

impl Tree {
    /// Canonicalizes `vars` (sort + dedup). Panics on an empty list.
    pub fn new(mut vars: Vec<u32>) -> Tree {
        assert!(!vars.is_empty(), "a tree needs at least one variable");
        vars.sort_unstable();
        vars.dedup();
        Tree(vars)
    }

    pub fn vars(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn varset(&self) -> VarSet {
        self.0.iter().collect()
    }

    pub fn from_varset(set: &VarSet) -> Tree {
        Tree::new(set.to_vec())
    }

    pub fn is_subset(&self, other: &Tree) -> bool {
        // both sorted
        let mut it = other.0.iter();
        self.0.iter().all(|v| it.any(|w| w == v))
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: variable index {var} out of range (num_vars = {num_vars})")]
    VarOutOfRange {
        line: usize,
        var: i64,
        num_vars: usize,
    },
    #[error("line {line}: empty tree")]
    EmptyTree { line: usize },
    #[error("header announces {expected} trees but {found} were given")]
    TreeCount { expected: usize, found: usize },
    #[error("invalid JSON instance: {0}")]
    Json(String),
    #[error("infeasible generator parameters: {0}")]
    Infeasible(String),
}

/// A canonical instance: trees sorted lexicographically and pairwise distinct.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    num_vars: usize,
    operator: Operator,
    trees: Vec<Tree>,
}

/// Result of reading an instance, with the number of duplicate trees merged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Parsed {
    pub instance: Instance,
    pub duplicates: usize,
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    num_vars: usize,
    #[serde(default)]
    operator: Operator,
    trees: Vec<Vec<i64>>,
}

impl Instance {
    /// Builds a canonical instance, merging duplicate trees.
    #[allow(clippy::new_ret_no_self)]
    pub fn new(
        num_vars: usize,
        operator: Operator,
        trees: Vec<Vec<u32>>,
    ) -> Result<Parsed, InstanceError> {
        let mut set = BTreeSet::new();
        let mut total = 0;
        for (i, t) in trees.into_iter().enumerate() {
            if t.is_empty() {
                return Err(InstanceError::EmptyTree { line: i + 1 });
            }
            if let Some(&v) = t.iter().find(|&&v| v as usize >= num_vars) {
                return Err(InstanceError::VarOutOfRange {
                    line: i + 1,
                    var: v as i64,
                    num_vars,
                });
            }
            total += 1;
            set.insert(Tree::new(t));
        }
        let duplicates = total - set.len();
        if duplicates > 0 {
            log::warn!("merged {duplicates} duplicate tree(s)");
        }
        Ok(Parsed {
            instance: Instance {
                num_vars,
                operator,
                trees: set.into_iter().collect(),
            },
            duplicates,
        })
    }

    /// Panicking shorthand for literals in tests and fixtures.
    pub fn from_sets(num_vars: usize, trees: &[&[u32]]) -> Instance {
        Instance::new(
            num_vars,
            Operator::And,
            trees.iter().map(|t| t.to_vec()).collect(),
        )
        .expect("valid instance literal")
        .instance
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn operator(&self) -> Operator {
        self.operator
    }

    pub fn with_operator(mut self, operator: Operator) -> Instance {
        self.operator = operator;
        self
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    /// Largest tree cardinality, 0 for an empty instance.
    pub fn max_tree_size(&self) -> usize {
        self.trees.iter().map(Tree::len).max().unwrap_or(0)
    }

    /// Gates needed when every tree is built on its own.
    pub fn scratch_cost(&self) -> usize {
        self.trees.iter().map(|t| t.len() - 1).sum()
    }

    /// Reads either the line format or the JSON mirror (detected by a leading `{`).
    pub fn parse(text: &str) -> Result<Parsed, InstanceError> {
        if text.trim_start().starts_with('{') {
            Instance::from_json(text)
        } else {
            Instance::parse_text(text)
        }
    }

    /// Line format: header `num_vars num_trees [one_indexed] [AND|OR|XOR]`,
    /// then one tree per line. `#` starts a comment.
    pub fn parse_text(text: &str) -> Result<Parsed, InstanceError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (hline, header) = lines.next().ok_or(InstanceError::Malformed {
            line: 1,
            msg: "missing header".into(),
        })?;
        let mut tokens = header.split_whitespace();
        let mut count = |what: &str| -> Result<usize, InstanceError> {
            tokens
                .next()
                .ok_or_else(|| InstanceError::Malformed {
                    line: hline,
                    msg: format!("header is missing {what}"),
                })?
                .parse::<usize>()
                .map_err(|e| InstanceError::Malformed {
                    line: hline,
                    msg: format!("bad {what}: {e}"),
                })
        };
        let num_vars = count("num_vars")?;
        let num_trees = count("num_trees")?;
        let mut one_indexed = false;
        let mut operator = Operator::And;
        for tok in tokens {
            if tok == "one_indexed" {
                one_indexed = true;
            } else {
                operator = tok.parse().map_err(|_| InstanceError::Malformed {
                    line: hline,
                    msg: format!("unknown header flag `{tok}`"),
                })?;
            }
        }

        let offset: i64 = if one_indexed { 1 } else { 0 };
        let mut trees = Vec::new();
        for (line, body) in lines {
            let mut tree = Vec::new();
            for tok in body.split_whitespace() {
                let raw: i64 = tok.parse().map_err(|_| InstanceError::Malformed {
                    line,
                    msg: format!("not an integer: `{tok}`"),
                })?;
                let v = raw - offset;
                if v < 0 || v as usize >= num_vars {
                    return Err(InstanceError::VarOutOfRange {
                        line,
                        var: raw,
                        num_vars,
                    });
                }
                tree.push(v as u32);
            }
            if tree.is_empty() {
                return Err(InstanceError::EmptyTree { line });
            }
            trees.push(tree);
        }
        if trees.len() != num_trees {
            return Err(InstanceError::TreeCount {
                expected: num_trees,
                found: trees.len(),
            });
        }
        Instance::new(num_vars, operator, trees)
    }

    pub fn from_json(text: &str) -> Result<Parsed, InstanceError> {
        let raw: InstanceJson =
            serde_json::from_str(text).map_err(|e| InstanceError::Json(e.to_string()))?;
        let mut trees = Vec::with_capacity(raw.trees.len());
        for (i, t) in raw.trees.iter().enumerate() {
            if t.is_empty() {
                return Err(InstanceError::EmptyTree { line: i + 1 });
            }
            let mut tree = Vec::with_capacity(t.len());
            for &v in t {
                if v < 0 || v as usize >= raw.num_vars {
                    return Err(InstanceError::VarOutOfRange {
                        line: i + 1,
                        var: v,
                        num_vars: raw.num_vars,
                    });
                }
                tree.push(v as u32);
            }
            trees.push(tree);
        }
        Instance::new(raw.num_vars, raw.operator, trees)
    }

    pub fn to_json(&self) -> String {
        let raw = InstanceJson {
            num_vars: self.num_vars,
            operator: self.operator,
            trees: self
                .trees
                .iter()
                .map(|t| t.vars().iter().map(|&v| v as i64).collect())
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("instance serializes")
    }

    /// Zero-indexed line format; the operator is always written to the header.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.num_vars, self.trees.len(), self.operator);
        for t in &self.trees {
            let line: Vec<String> = t.vars().iter().map(u32::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Seeded random instance. Tree sizes are uniform in `[2, max_size]`; with
/// probability `overlap_bias` each variable is drawn from those already used
/// by earlier trees.
pub fn gen_random(
    num_vars: usize,
    num_trees: usize,
    max_size: usize,
    overlap_bias: f64,
    seed: u64,
) -> Result<Instance, InstanceError> {
    if num_trees == 0 || max_size < 2 || max_size > num_vars {
        return Err(InstanceError::Infeasible(format!(
            "need num_trees >= 1 and 2 <= max_size <= num_vars (got {num_trees}, {max_size}, {num_vars})"
        )));
    }
    if !(0.0..=1.0).contains(&overlap_bias) {
        return Err(InstanceError::Infeasible(format!(
            "overlap_bias {overlap_bias} outside [0, 1]"
        )));
    }
    let available: u128 = (2..=max_size).map(|s| binomial(num_vars, s)).sum();
    if available < num_trees as u128 {
        return Err(InstanceError::Infeasible(format!(
            "only {available} distinct trees of size 2..={max_size} over {num_vars} variables exist"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trees: BTreeSet<Vec<u32>> = BTreeSet::new();
    let mut used = BTreeSet::new();
    let max_attempts = 1000 * num_trees + 10_000;
    let mut attempts = 0;
    while trees.len() < num_trees {
        attempts += 1;
        if attempts > max_attempts {
            return Err(InstanceError::Infeasible(format!(
                "gave up after {max_attempts} samples; parameters too tight"
            )));
        }
        let size = rng.gen_range(2..=max_size);
        let mut chosen = BTreeSet::new();
        while chosen.len() < size {
            let from_pool: Vec<u32> = used
                .iter()
                .copied()
                .filter(|v| !chosen.contains(v))
                .collect();
            let v = if !from_pool.is_empty() && rng.gen_bool(overlap_bias) {
                from_pool[rng.gen_range(0..from_pool.len())]
            } else {
                rng.gen_range(0..num_vars as u32)
            };
            chosen.insert(v);
        }
        let tree: Vec<u32> = chosen.into_iter().collect();
        if trees.insert(tree.clone()) {
            used.extend(tree);
        }
    }
    Ok(Instance::new(num_vars, Operator::And, trees.into_iter().collect())?.instance)
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}
