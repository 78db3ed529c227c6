//! Simulation of a truncated anharmonic transmon driven by trains of
//! single-flux-quantum (SFQ) pulses, and a genetic search for trains that
//! realize a target single-qubit rotation with low leakage.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: transmon parameters, ladder operators and the free spectrum.
//! - [`pulse`]: ternary pulse trains and their text/CSV encodings.
//! - [`propagate`]: gate unitaries built from instantaneous kicks and free
//!   evolution, plus the rotating-frame transform.
//! - [`fitness`]: rotation-angle extraction, six-state average fidelity and the
//!   thresholded lexicographic score ordering.
//! - [`ga`]: the genetic search itself.
//! - [`oracle`]: closed-form two-level propagation and exhaustive search, used
//!   to validate everything above.
//!
//! Units: ħ = 1, angular frequencies in rad/ns, times in ns.

pub mod error;
pub mod fitness;
pub mod ga;
pub mod model;
pub mod oracle;
pub mod propagate;
pub mod pulse;

pub use error::{Error, Result};
pub use fitness::{FitnessOrder, FitnessScore, ScoreMode, Scorer, TargetGate};
pub use ga::{evolve, CancelToken, GaConfig, GaResult, Individual, SearchMode};
pub use model::{CircuitParams, DriveConfig, TransmonModel};
pub use propagate::{GateUnitary, Propagator};
pub use pulse::{Alphabet, Pulse, PulseSequence};

pub use num_complex::Complex64;
