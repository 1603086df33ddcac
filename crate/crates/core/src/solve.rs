//! Algorithm dispatch and the machine-readable solve report.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::algo_general::{solve_general, GeneralOptions, DEFAULT_CANDIDATE_CAP};
use crate::algo_k3::solve_k3;
use crate::algo_k4::solve_k4;
use crate::circuit::{dedupe_gates, Circuit, ValidationMode};
use crate::exact::{solve_exact, DEFAULT_NODE_BUDGET};
use crate::instance::Instance;
use crate::report::{PhaseReport, SolveError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Exact,
    K3,
    K4,
    General,
    /// `k3` for k <= 3, `k4` for k = 4, `general` otherwise.
    Auto,
}

impl Algorithm {
    pub fn resolve(self, instance: &Instance) -> Algorithm {
        match (self, instance.max_tree_size()) {
            (Algorithm::Auto, 0..=3) => Algorithm::K3,
            (Algorithm::Auto, 4) => Algorithm::K4,
            (Algorithm::Auto, _) => Algorithm::General,
            (a, _) => a,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Exact => "exact",
            Algorithm::K3 => "k3",
            Algorithm::K4 => "k4",
            Algorithm::General => "general",
            Algorithm::Auto => "auto",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub algorithm: Algorithm,
    pub candidate_cap: usize,
    pub node_budget: u64,
    pub dedupe: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            algorithm: Algorithm::Auto,
            candidate_cap: DEFAULT_CANDIDATE_CAP,
            node_budget: DEFAULT_NODE_BUDGET,
            dedupe: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolveReport {
    pub algorithm: Algorithm,
    pub size: usize,
    pub depth: usize,
    pub phases: BTreeMap<String, usize>,
    pub validated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

pub struct Outcome {
    pub circuit: Circuit,
    pub report: SolveReport,
}

/// Runs the chosen algorithm and validates its circuit. A failed validation
/// is reported through `validated: false`, never hidden.
pub fn run(instance: &Instance, opts: &SolveOptions) -> Result<Outcome, SolveError> {
    let algorithm = opts.algorithm.resolve(instance);
    let (mut circuit, phase_report, exact) = match algorithm {
        Algorithm::Exact => {
            let s = solve_exact(instance, opts.node_budget)?;
            let mut phases = BTreeMap::new();
            phases.insert("search".to_string(), s.size);
            let report = PhaseReport {
                phases,
                notes: Vec::new(),
            };
            (s.circuit, report, Some(s.exact))
        }
        Algorithm::K3 => {
            let s = solve_k3(instance)?;
            (s.circuit, s.report, None)
        }
        Algorithm::K4 => {
            let s = solve_k4(instance)?;
            (s.circuit, s.report, None)
        }
        Algorithm::General | Algorithm::Auto => {
            let s = solve_general(
                instance,
                &GeneralOptions {
                    candidate_cap: opts.candidate_cap,
                },
            );
            (s.circuit, s.report, None)
        }
    };
    let mut notes = phase_report.notes;
    if opts.dedupe {
        let before = circuit.size();
        circuit = dedupe_gates(&circuit);
        if circuit.size() < before {
            notes.push(format!(
                "dedupe removed {} gate(s)",
                before - circuit.size()
            ));
        }
    }
    let validated = circuit.validate(instance, ValidationMode::Lenient).is_ok();
    let report = SolveReport {
        algorithm,
        size: circuit.size(),
        depth: circuit.depth(),
        phases: phase_report.phases,
        validated,
        exact,
        notes,
    };
    Ok(Outcome { circuit, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_dispatch() {
        let i3 = Instance::from_sets(4, &[&[0, 1, 2]]);
        let i4 = Instance::from_sets(5, &[&[0, 1, 2, 3]]);
        let i5 = Instance::from_sets(6, &[&[0, 1, 2, 3, 4]]);
        assert_eq!(Algorithm::Auto.resolve(&i3), Algorithm::K3);
        assert_eq!(Algorithm::Auto.resolve(&i4), Algorithm::K4);
        assert_eq!(Algorithm::Auto.resolve(&i5), Algorithm::General);
        assert_eq!(Algorithm::Exact.resolve(&i5), Algorithm::Exact);
    }

    #[test]
    fn report_json_keys() {
        let inst = Instance::from_sets(4, &[&[0, 1, 2], &[0, 1, 3]]);
        let out = run(&inst, &SolveOptions::default()).unwrap();
        assert!(out.report.validated);
        let json = serde_json::to_string(&out.report).unwrap();
        assert!(json.starts_with(r#"{"algorithm":"k3","size":3,"depth":2,"phases":{"#));
    }

    #[test]
    fn precondition_error() {
        let inst = Instance::from_sets(5, &[&[0, 1, 2, 3]]);
        let opts = SolveOptions {
            algorithm: Algorithm::K3,
            ..SolveOptions::default()
        };
        assert!(run(&inst, &opts).is_err());
    }
}
