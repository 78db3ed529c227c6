//! One result row per frequency and its CSV form.
//!
//! Sequence-mode reports have eight leading columns; subsequence-mode reports
//! insert the subsequence length and repetition count after `f0_ghz`. Both
//! end with `rng_seed`, `satisfied` and `genome` so that a report can be
//! replayed.

use std::io::{Read, Write};

use sfq_core::{Alphabet, PulseSequence};

use crate::error::CliError;

const SEQUENCE_HEADER: [&str; 11] = [
    "N",
    "delta_theta_rad",
    "f0_ghz",
    "sequence_length",
    "duration_ns",
    "angle_precision_rad",
    "infidelity",
    "wall_time_s",
    "rng_seed",
    "satisfied",
    "genome",
];

const SUBSEQUENCE_HEADER: [&str; 13] = [
    "N",
    "delta_theta_rad",
    "f0_ghz",
    "subsequence_length",
    "repetitions",
    "sequence_length",
    "duration_ns",
    "angle_precision_rad",
    "infidelity",
    "wall_time_s",
    "rng_seed",
    "satisfied",
    "genome",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    Sequence,
    Subsequence,
}

impl ReportKind {
    pub fn header(self) -> &'static [&'static str] {
        match self {
            ReportKind::Sequence => &SEQUENCE_HEADER,
            ReportKind::Subsequence => &SUBSEQUENCE_HEADER,
        }
    }
}

/// Subsequence-mode extras.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Repetition {
    pub subsequence_length: usize,
    pub repetitions: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    /// 1-based row index.
    pub index: usize,
    pub delta_theta: f64,
    pub f0: f64,
    pub repetition: Option<Repetition>,
    /// Full train length (subsequence length × repetitions in subsequence mode).
    pub sequence_length: usize,
    pub duration_ns: f64,
    pub angle_precision: f64,
    pub infidelity: f64,
    /// Seconds spent in the search call that produced the row.
    pub wall_time: f64,
    pub rng_seed: u64,
    pub satisfied: bool,
    /// The searched genome: the whole train, or the repeated unit.
    pub genome: PulseSequence,
}

impl RunRecord {
    pub fn kind(&self) -> ReportKind {
        match self.repetition {
            Some(_) => ReportKind::Subsequence,
            None => ReportKind::Sequence,
        }
    }

    /// The train actually played: the genome, repeated if needed.
    pub fn full_train(&self) -> PulseSequence {
        match self.repetition {
            Some(r) => self
                .genome
                .repeat(r.repetitions)
                .expect("stored trains are within the length limit"),
            None => self.genome.clone(),
        }
    }

    fn fields(&self) -> Vec<String> {
        let mut f = vec![
            self.index.to_string(),
            self.delta_theta.to_string(),
            self.f0.to_string(),
        ];
        if let Some(r) = self.repetition {
            f.push(r.subsequence_length.to_string());
            f.push(r.repetitions.to_string());
        }
        f.extend([
            self.sequence_length.to_string(),
            self.duration_ns.to_string(),
            self.angle_precision.to_string(),
            self.infidelity.to_string(),
            self.wall_time.to_string(),
            self.rng_seed.to_string(),
            self.satisfied.to_string(),
            self.genome.to_text(),
        ]);
        f
    }
}

/// Three significant digits in scientific notation, e.g. `9.51e-5`.
pub fn sci(x: f64) -> String {
    format!("{x:.2e}")
}

/// Writes `records` as CSV. All records must share one kind; an empty slice
/// produces a header-only file of `kind`.
pub fn write_csv<W: Write>(out: W, kind: ReportKind, records: &[RunRecord]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(kind.header())?;
    for r in records {
        if r.kind() != kind {
            return Err(CliError::Format(format!(
                "record {} does not belong in a {kind:?} report",
                r.index
            )));
        }
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

fn parse<T: std::str::FromStr>(row: &csv::StringRecord, col: usize, name: &str) -> Result<T, CliError> {
    let raw = row.get(col).unwrap_or("");
    raw.trim()
        .parse()
        .map_err(|_| CliError::Format(format!("column {name}: cannot parse '{raw}'")))
}

/// Reads a report written by [`write_csv`].
pub fn read_csv<R: Read>(input: R, alphabet: Alphabet) -> Result<(ReportKind, Vec<RunRecord>), CliError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    let kind = [ReportKind::Sequence, ReportKind::Subsequence]
        .into_iter()
        .find(|k| k.header() == header.as_slice())
        .ok_or_else(|| CliError::Format(format!("unrecognised header: {}", header.join(","))))?;
    let cols = kind.header();
    let mut records = Vec::new();
    for row in r.records() {
        let row = row?;
        let get = |name: &str| cols.iter().position(|c| *c == name).expect("known column");
        let repetition = match kind {
            ReportKind::Sequence => None,
            ReportKind::Subsequence => Some(Repetition {
                subsequence_length: parse(&row, get("subsequence_length"), "subsequence_length")?,
                repetitions: parse(&row, get("repetitions"), "repetitions")?,
            }),
        };
        let genome_text = row.get(get("genome")).unwrap_or("");
        records.push(RunRecord {
            index: parse(&row, get("N"), "N")?,
            delta_theta: parse(&row, get("delta_theta_rad"), "delta_theta_rad")?,
            f0: parse(&row, get("f0_ghz"), "f0_ghz")?,
            repetition,
            sequence_length: parse(&row, get("sequence_length"), "sequence_length")?,
            duration_ns: parse(&row, get("duration_ns"), "duration_ns")?,
            angle_precision: parse(&row, get("angle_precision_rad"), "angle_precision_rad")?,
            infidelity: parse(&row, get("infidelity"), "infidelity")?,
            wall_time: parse(&row, get("wall_time_s"), "wall_time_s")?,
            rng_seed: parse(&row, get("rng_seed"), "rng_seed")?,
            satisfied: parse(&row, get("satisfied"), "satisfied")?,
            genome: PulseSequence::parse_text(genome_text, alphabet)?,
        });
    }
    Ok((kind, records))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(rep: Option<Repetition>) -> RunRecord {
        RunRecord {
            index: 1,
            delta_theta: 0.032,
            f0: 4.54643,
            repetition: rep,
            sequence_length: 114,
            duration_ns: 4.56,
            angle_precision: 9.25e-7,
            infidelity: 9.51e-5,
            wall_time: 21.74,
            rng_seed: 7,
            satisfied: true,
            genome: "+0-".parse().unwrap(),
        }
    }

    #[test]
    fn column_counts() {
        let mut buf = Vec::new();
        write_csv(&mut buf, ReportKind::Sequence, &[record(None)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap().split(',').count(), 11);
        assert!(lines.next().unwrap().starts_with("1,0.032,4.54643,114,4.56,"));
    }

    #[test]
    fn empty_report_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&mut buf, ReportKind::Subsequence, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
    }

    #[test]
    fn mixed_kinds_are_rejected() {
        let rep = Some(Repetition {
            subsequence_length: 19,
            repetitions: 8,
        });
        assert!(write_csv(Vec::new(), ReportKind::Sequence, &[record(rep)]).is_err());
    }

    #[test]
    fn scientific_display() {
        assert_eq!(sci(9.51e-5), "9.51e-5");
        assert_eq!(sci(1.2345e-7), "1.23e-7");
        assert_eq!(sci(0.0), "0.00e0");
    }
}
