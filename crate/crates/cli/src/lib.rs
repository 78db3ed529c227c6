//! Batch runner for SFQ pulse-train searches: sweep configuration, the
//! per-frequency scheduler, CSV reports and stem plots.

pub mod config;
pub mod error;
pub mod plot;
pub mod record;
pub mod sweep;

pub use config::{LengthRange, SweepConfig, DEFAULT_FREQUENCIES_GHZ};
pub use error::CliError;
pub use plot::emit_plot;
pub use record::{read_csv, sci, write_csv, ReportKind, Repetition, RunRecord};
pub use sweep::{run_sweep, scoring_threads, write_outputs, SweepOutcome};
