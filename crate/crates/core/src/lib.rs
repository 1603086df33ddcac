//! Shared construction of symmetric-operator trees over overlapping
//! variable sets: exact search, approximation algorithms, and circuit tooling.

pub mod algo_general;
pub mod algo_k3;
pub mod algo_k4;
pub mod bench;
pub mod circuit;
pub mod cli;
pub mod exact;
pub mod instance;
pub mod matching;
pub mod reductions;
pub mod report;
pub mod solve;
pub mod varset;
