//! Independent reference implementations.
//!
//! [`two_level_propagate`] multiplies closed-form 2×2 rotation and phase
//! matrices without any numerical exponential; [`exhaustive_search`] scores
//! every genome of a small search space with the same scorer the GA uses.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::fitness::{FitnessScore, ScoreMode, Scorer};
use crate::model::{DriveConfig, TransmonModel};
use crate::propagate::GateUnitary;
use crate::pulse::{Alphabet, Pulse, PulseSequence};

/// Largest search space [`exhaustive_search`] accepts.
pub const EXHAUSTIVE_BOUND: u64 = 2_000_000;

type M2 = [[Complex64; 2]; 2];

fn mul(a: &M2, b: &M2) -> M2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Lab-frame propagator of `seq` for a two-level model, from closed-form
/// factors: a kick of polarity s is the real rotation
/// `[[cos(Δθ/2), −s·sin(Δθ/2)], [s·sin(Δθ/2), cos(Δθ/2)]]` and one tick of
/// free evolution is `diag(1, exp(−i·ω0·T_g))`.
pub fn two_level_propagate(
    seq: &PulseSequence,
    model: &TransmonModel,
    drive: &DriveConfig,
) -> Result<GateUnitary> {
    if model.dim() != 2 {
        return domain(format!("two-level oracle needs dim = 2, got {}", model.dim()));
    }
    let (s, c) = (0.5 * model.delta_theta()).sin_cos();
    let re = |x: f64| Complex64::new(x, 0.0);
    let kick = |sign: f64| -> M2 { [[re(c), re(-sign * s)], [re(sign * s), re(c)]] };
    let kicks = [kick(-1.0), kick(0.0), kick(1.0)];
    let free: M2 = [
        [re(1.0), re(0.0)],
        [re(0.0), Complex64::from_polar(1.0, -model.omega0() * drive.tick())],
    ];
    let mut u: M2 = [[re(1.0), re(0.0)], [re(0.0), re(1.0)]];
    for &p in seq.symbols() {
        if p != Pulse::Zero {
            u = mul(&kicks[(p.value() + 1) as usize], &u);
        }
        u = mul(&free, &u);
    }
    let m = DMatrix::from_row_slice(2, 2, &[u[0][0], u[0][1], u[1][0], u[1][1]]);
    Ok(GateUnitary::new(m, seq.len() as f64 * drive.tick()))
}

/// Unipolar train of `kicks` pulses spaced `spacing` ticks apart.
pub fn resonant_comb(kicks: usize, spacing: usize) -> Result<PulseSequence> {
    if kicks == 0 || spacing == 0 {
        return domain("resonant comb needs at least one kick and a positive spacing");
    }
    let mut symbols = vec![Pulse::Zero; (kicks - 1) * spacing + 1];
    for k in 0..kicks {
        symbols[k * spacing] = Pulse::Positive;
    }
    PulseSequence::new(symbols, Alphabet::Unipolar)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub best_genome: PulseSequence,
    pub best_score: FitnessScore,
    pub best_rep: usize,
    pub evaluated: u64,
}

/// Genome number `index` of the base-|alphabet| enumeration; position 0 is
/// the most significant digit and digits map to symbols in alphabet order
/// (−1, 0, +1).
pub fn genome_at(index: u64, len: usize, alphabet: Alphabet) -> PulseSequence {
    let symbols = alphabet.symbols();
    let base = symbols.len() as u64;
    let mut digits = vec![Pulse::Zero; len];
    let mut rest = index;
    for slot in digits.iter_mut().rev() {
        *slot = symbols[(rest % base) as usize];
        rest /= base;
    }
    PulseSequence::new(digits, alphabet).expect("digits are alphabet symbols")
}

pub fn search_space(len: usize, alphabet: Alphabet) -> u128 {
    (alphabet.symbols().len() as u128).saturating_pow(len as u32)
}

/// Scores every genome of length `len` and returns the global optimum under
/// the scorer's ordering; ties go to the lowest enumeration index.
pub fn exhaustive_search(
    len: usize,
    alphabet: Alphabet,
    scorer: &Scorer,
    mode: ScoreMode,
) -> Result<OracleReport> {
    if len == 0 {
        return domain("genome length must be positive");
    }
    let size = search_space(len, alphabet);
    if size > EXHAUSTIVE_BOUND as u128 {
        return Err(Error::SearchSpaceTooLarge {
            size,
            bound: EXHAUSTIVE_BOUND,
        });
    }
    let count = size as u64;
    let order = *scorer.order();
    let pick = |a: (u64, usize, FitnessScore), b: (u64, usize, FitnessScore)| match order
        .compare(&a.2, &b.2)
        .then(a.0.cmp(&b.0))
    {
        Ordering::Greater => b,
        _ => a,
    };
    let best = (0..count)
        .into_par_iter()
        .map(|i| {
            let (rep, score) = scorer.score(&genome_at(i, len, alphabet), mode)?;
            Ok((i, rep, score))
        })
        .try_reduce_with(|a, b| Ok(pick(a, b)))
        .expect("search space is non-empty")?;
    Ok(OracleReport {
        best_genome: genome_at(best.0, len, alphabet),
        best_score: best.2,
        best_rep: best.1,
        evaluated: count,
    })
}
