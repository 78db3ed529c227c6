//! Ternary SFQ pulse trains.
//!
//! One symbol per generator tick: `+` (positive pulse), `-` (negative pulse)
//! or `0` (no pulse). Two encodings are supported: a single text line over
//! `+`, `-`, `0` and a comma-separated list of integers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_SEQUENCE_LENGTH: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(i8)]
pub enum Pulse {
    Negative = -1,
    Zero = 0,
    Positive = 1,
}

impl Pulse {
    pub fn value(self) -> i8 {
        self as i8
    }

    pub fn from_value(v: i64) -> Option<Self> {
        match v {
            -1 => Some(Pulse::Negative),
            0 => Some(Pulse::Zero),
            1 => Some(Pulse::Positive),
            _ => None,
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '-' => Some(Pulse::Negative),
            '0' => Some(Pulse::Zero),
            '+' => Some(Pulse::Positive),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pulse::Negative => '-',
            Pulse::Zero => '0',
            Pulse::Positive => '+',
        }
    }

    /// Index into per-symbol tables ordered (−1, 0, +1).
    pub(crate) fn index(self) -> usize {
        (self.value() + 1) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alphabet {
    #[default]
    Bipolar,
    Unipolar,
}

impl Alphabet {
    /// Symbols in enumeration order.
    pub fn symbols(self) -> &'static [Pulse] {
        match self {
            Alphabet::Bipolar => &[Pulse::Negative, Pulse::Zero, Pulse::Positive],
            Alphabet::Unipolar => &[Pulse::Zero, Pulse::Positive],
        }
    }

    pub fn contains(self, p: Pulse) -> bool {
        self.symbols().contains(&p)
    }

    /// The values a mutation may turn `p` into.
    pub fn alternatives(self, p: Pulse) -> &'static [Pulse] {
        use Pulse::*;
        match (self, p) {
            (Alphabet::Bipolar, Negative) => &[Zero, Positive],
            (Alphabet::Bipolar, Zero) => &[Negative, Positive],
            (Alphabet::Bipolar, Positive) => &[Negative, Zero],
            (Alphabet::Unipolar, Zero) => &[Positive],
            (Alphabet::Unipolar, _) => &[Zero],
        }
    }
}

impl FromStr for Alphabet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bipolar" => Ok(Alphabet::Bipolar),
            "unipolar" => Ok(Alphabet::Unipolar),
            other => Err(Error::ParameterDomain(format!("unknown alphabet '{other}'"))),
        }
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Alphabet::Bipolar => "bipolar",
            Alphabet::Unipolar => "unipolar",
        })
    }
}

/// A pulse train whose symbols all belong to its alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PulseSequence {
    symbols: Vec<Pulse>,
    alphabet: Alphabet,
}

impl PulseSequence {
    pub fn new(symbols: Vec<Pulse>, alphabet: Alphabet) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::MalformedSequence("empty sequence".into()));
        }
        if symbols.len() > MAX_SEQUENCE_LENGTH {
            return Err(Error::MalformedSequence(format!(
                "length {} exceeds {MAX_SEQUENCE_LENGTH}",
                symbols.len()
            )));
        }
        if let Some((i, p)) = symbols.iter().enumerate().find(|(_, p)| !alphabet.contains(**p)) {
            return Err(Error::MalformedSequence(format!(
                "symbol {} at position {i} is not in the {alphabet} alphabet",
                p.value()
            )));
        }
        Ok(Self { symbols, alphabet })
    }

    pub fn bipolar(symbols: Vec<Pulse>) -> Result<Self> {
        Self::new(symbols, Alphabet::Bipolar)
    }

    pub fn zeros(len: usize, alphabet: Alphabet) -> Result<Self> {
        Self::new(vec![Pulse::Zero; len], alphabet)
    }

    pub fn from_values(values: &[i64], alphabet: Alphabet) -> Result<Self> {
        let symbols = values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                Pulse::from_value(v).ok_or_else(|| {
                    Error::MalformedSequence(format!("value {v} at position {i} is not a pulse"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(symbols, alphabet)
    }

    /// Parses the `+`/`-`/`0` line format. Surrounding whitespace is ignored.
    pub fn parse_text(s: &str, alphabet: Alphabet) -> Result<Self> {
        let symbols = s
            .trim()
            .chars()
            .enumerate()
            .map(|(i, c)| {
                Pulse::from_char(c).ok_or_else(|| {
                    Error::MalformedSequence(format!("character '{c}' at position {i}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(symbols, alphabet)
    }

    /// Parses comma-separated integers, e.g. `1,0,-1`.
    pub fn parse_csv(s: &str, alphabet: Alphabet) -> Result<Self> {
        let values = s
            .trim()
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::MalformedSequence(format!("'{}' is not an integer", t.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(&values, alphabet)
    }

    pub fn to_text(&self) -> String {
        self.symbols.iter().map(|p| p.as_char()).collect()
    }

    pub fn to_csv(&self) -> String {
        self.symbols
            .iter()
            .map(|p| p.value().to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn symbols(&self) -> &[Pulse] {
        &self.symbols
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn zero_count(&self) -> usize {
        self.symbols.iter().filter(|&&p| p == Pulse::Zero).count()
    }

    pub fn pulse_count(&self) -> usize {
        self.len() - self.zero_count()
    }

    /// Number of differing positions; `None` when lengths differ.
    pub fn hamming(&self, other: &PulseSequence) -> Option<usize> {
        (self.len() == other.len()).then(|| {
            self.symbols
                .iter()
                .zip(&other.symbols)
                .filter(|(a, b)| a != b)
                .count()
        })
    }

    /// `self` repeated `times` times.
    pub fn repeat(&self, times: usize) -> Result<Self> {
        Self::new(self.symbols.repeat(times), self.alphabet)
    }

    pub fn concat(&self, other: &PulseSequence) -> Result<Self> {
        let mut symbols = self.symbols.clone();
        symbols.extend_from_slice(&other.symbols);
        Self::new(symbols, self.alphabet)
    }

    /// Replaces one site. The new symbol must belong to the alphabet.
    pub fn set(&mut self, index: usize, p: Pulse) -> Result<()> {
        if !self.alphabet.contains(p) {
            return Err(Error::MalformedSequence(format!(
                "symbol {} is not in the {} alphabet",
                p.value(),
                self.alphabet
            )));
        }
        self.symbols[index] = p;
        Ok(())
    }

    /// Swaps the tails of two equal-length sequences starting at `point`.
    pub(crate) fn swap_tails(a: &mut PulseSequence, b: &mut PulseSequence, point: usize) {
        a.symbols[point..].swap_with_slice(&mut b.symbols[point..]);
    }
}

impl fmt::Display for PulseSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for PulseSequence {
    type Err = Error;

    /// Bipolar text line.
    fn from_str(s: &str) -> Result<Self> {
        Self::parse_text(s, Alphabet::Bipolar)
    }
}
