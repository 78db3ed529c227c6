//! Sweep configuration, loadable from JSON.
//!
//! Every field has a default, so a config file only needs the keys it
//! changes:
//!
//! ```json
//! {
//!   "frequencies_ghz": [4.54643, 4.59251],
//!   "mode": "subsequence",
//!   "lengths": { "start": 16, "end": 56 },
//!   "ga": { "max_rep": 35, "max_duration": 12.0 }
//! }
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sfq_core::model::{DEFAULT_ANHARMONICITY_GHZ, DEFAULT_DELTA_THETA, DEFAULT_DIM, DEFAULT_GENERATOR_GHZ};
use sfq_core::{DriveConfig, GaConfig, SearchMode, TargetGate, TransmonModel};

use crate::error::CliError;

/// Default grid of qubit frequencies, GHz.
pub const DEFAULT_FREQUENCIES_GHZ: [f64; 21] = [
    4.54643, 4.59251, 4.6305, 4.652, 4.68842, 4.73047, 4.76289, 4.78802, 4.80851, 4.87898,
    4.89201, 4.90296, 5.18978, 5.20945, 5.28923, 5.32036, 5.35835, 5.39307, 5.40655, 5.43571,
    5.48906,
];

/// Inclusive range of genome lengths, written `A..B` on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthRange {
    pub start: usize,
    pub end: usize,
}

impl LengthRange {
    pub fn new(start: usize, end: usize) -> Result<Self, CliError> {
        if start == 0 || start > end {
            return Err(CliError::Config(format!("empty length range {start}..{end}")));
        }
        Ok(Self { start, end })
    }

    pub fn single(len: usize) -> Result<Self, CliError> {
        Self::new(len, len)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.start..=self.end
    }
}

impl FromStr for LengthRange {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("length range '{s}' is not of the form A..B"));
        let (a, b) = s.split_once("..").ok_or_else(bad)?;
        let b = b.strip_prefix('=').unwrap_or(b);
        Self::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?)
    }
}

impl fmt::Display for LengthRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// Everything a sweep needs. `ga.sequence_length` is ignored; lengths come
/// from `lengths`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub frequencies_ghz: Vec<f64>,
    pub generator_ghz: f64,
    pub delta_theta: f64,
    pub anharmonicity_ghz: f64,
    pub dim: usize,
    /// Target rotation angle about y, rad.
    pub theta_target: f64,
    pub mode: SearchMode,
    pub lengths: LengthRange,
    /// Seeds `ga.rng_seed .. ga.rng_seed + seeds_per_point` are tried at every
    /// frequency and length.
    pub seeds_per_point: u64,
    /// Concurrent searches.
    pub workers: usize,
    pub ga: GaConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            frequencies_ghz: DEFAULT_FREQUENCIES_GHZ.to_vec(),
            generator_ghz: DEFAULT_GENERATOR_GHZ,
            delta_theta: DEFAULT_DELTA_THETA,
            anharmonicity_ghz: DEFAULT_ANHARMONICITY_GHZ,
            dim: DEFAULT_DIM,
            theta_target: std::f64::consts::FRAC_PI_2,
            mode: SearchMode::Sequence,
            lengths: LengthRange { start: 96, end: 120 },
            seeds_per_point: 1,
            workers: 1,
            ga: GaConfig::default(),
        }
    }
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(f) = self.frequencies_ghz.iter().find(|f| !(**f > 0.0) || !f.is_finite()) {
            return Err(CliError::Config(format!("frequency {f} GHz is not positive")));
        }
        LengthRange::new(self.lengths.start, self.lengths.end)?;
        if self.seeds_per_point == 0 {
            return Err(CliError::Config("seeds_per_point must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        self.drive()?;
        self.gate()?;
        if let Some(&f0) = self.frequencies_ghz.first() {
            self.model(f0)?;
        }
        GaConfig {
            sequence_length: self.lengths.start.max(4),
            ..self.ga.clone()
        }
        .validate()?;
        Ok(())
    }

    pub fn model(&self, f0: f64) -> Result<TransmonModel, CliError> {
        Ok(TransmonModel::from_ghz(f0, self.anharmonicity_ghz, self.delta_theta, self.dim)?)
    }

    pub fn drive(&self) -> Result<DriveConfig, CliError> {
        Ok(DriveConfig::from_ghz(self.generator_ghz)?)
    }

    pub fn gate(&self) -> Result<TargetGate, CliError> {
        Ok(TargetGate::y_rotation(self.theta_target)?)
    }

    /// GA settings for one search.
    pub fn ga_for(&self, len: usize, seed: u64) -> GaConfig {
        GaConfig {
            sequence_length: len,
            mode: self.mode,
            rng_seed: seed,
            ..self.ga.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_syntax() {
        assert_eq!("96..120".parse::<LengthRange>().unwrap(), LengthRange { start: 96, end: 120 });
        assert_eq!("8..=8".parse::<LengthRange>().unwrap(), LengthRange::single(8).unwrap());
        assert!("120..96".parse::<LengthRange>().is_err());
        assert!("0..3".parse::<LengthRange>().is_err());
        assert!("12".parse::<LengthRange>().is_err());
        assert_eq!(LengthRange { start: 3, end: 5 }.iter().count(), 3);
    }

    #[test]
    fn partial_json_keeps_defaults() {
        let c = SweepConfig::from_json(r#"{"mode": "subsequence", "ga": {"max_rep": 12}}"#).unwrap();
        assert_eq!(c.mode, SearchMode::Subsequence);
        assert_eq!(c.ga.max_rep, 12);
        assert_eq!(c.ga.crossover_prob, 0.8);
        assert_eq!(c.frequencies_ghz.len(), 21);
        assert_eq!(SweepConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(SweepConfig::from_json(r#"{"bogus": 1}"#).is_err());
        let c = SweepConfig {
            frequencies_ghz: vec![5.0, -1.0],
            ..SweepConfig::default()
        };
        assert!(c.validate().is_err());
        let c = SweepConfig {
            workers: 0,
            ..SweepConfig::default()
        };
        assert!(c.validate().is_err());
        assert!(SweepConfig::default().validate().is_ok());
    }
}
