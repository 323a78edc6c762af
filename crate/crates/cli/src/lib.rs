//! Experiment runner around the `nlslab` solvers: configuration loading,
//! the CLI verbs, and the CSV/report output layer.

pub mod commands;
pub mod config;
pub mod report;
