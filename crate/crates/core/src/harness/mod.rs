//! Experiment orchestration: method × seed grids, aggregate tables, Pareto scans and
//! report emission.
//!
//! Every run of a grid uses the listed seed as its master seed, so runs of different
//! methods under one seed are paired (same initialisation and batch order) and adding
//! a method never changes another run.

mod emit;
mod pareto;
mod run;
mod spec;

pub use emit::{
    emit_report, emit_scatter, format_sig6, parse_csv_report, ReportFormat, REPORT_SCHEMA_VERSION,
};
pub use pareto::{pareto_scan, pareto_scan_spec, ScatterPoint, PARETO_GRID};
pub use run::{run_experiment, run_single, ExperimentOutcome, ResultRow, ResultsTable, RunRecord};
pub use spec::{DatasetRef, ExperimentSpec, GnfSpec, MethodSpec, MetricKind};
