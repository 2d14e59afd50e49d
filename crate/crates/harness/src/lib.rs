//! Experiment harness: deterministic instance generation, an exact
//! small-instance optimum oracle, and batch runs with per-row certification.

pub mod bench;
pub mod gen;
pub mod opt;

pub use bench::{bench, rows_to_csv, BenchConfig, ExperimentRow};
pub use gen::generate_unit_instance;
pub use opt::exact_opt;
