use std::collections::BTreeMap;

use serde::Serialize;

use crate::circuit::Circuit;

/// Gate counts per algorithm phase plus free-form notes (fallbacks taken,
/// caps hit, and the like).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PhaseReport {
    pub phases: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl PhaseReport {
    pub fn total(&self) -> usize {
        self.phases.values().sum()
    }
}

/// A produced circuit together with how it was built.
#[derive(Clone, Debug)]
pub struct Solution {
    pub circuit: Circuit,
    pub report: PhaseReport,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("algorithm {algorithm} requires trees of at most {limit} variables, but the instance has k = {k}")]
    TooWide {
        algorithm: &'static str,
        limit: usize,
        k: usize,
    },
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error(transparent)]
    Exact(#[from] crate::exact::ExactError),
}
