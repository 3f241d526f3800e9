//! Experiment harness for the `geosat` toolkit: DIMACS interchange,
//! balls-into-bins, configuration and JSON-lines reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod bins;
pub mod config;
pub mod dimacs;
pub mod experiment;

pub use bins::{balls_into_bins, max_load_threshold};
pub use config::{ExperimentConfig, ExperimentKind, Model, Params};
pub use dimacs::{emit_dimacs, parse_dimacs, to_dimacs_string};
pub use experiment::{rerun, run_experiment, ReportRecord};
