//! Scoring of pulse trains against a target y-rotation.
//!
//! A train is scored by a pair: the rotation-angle error `|θ̂ − θ_target|`
//! and the infidelity `1 − ⟨F⟩`, where `⟨F⟩` averages
//! `|⟨α|U_g†·U_id|α⟩|²` over the six cardinal Bloch states. Only the 2×2
//! computational block of `U_g` contributes, so population left outside the
//! qubit subspace lowers the fidelity and the phases of leaked levels do not
//! matter.

use std::cmp::Ordering;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::{DriveConfig, TransmonModel};
use crate::propagate::{Block2, Columns, GateUnitary, Propagator};
use crate::pulse::PulseSequence;

/// Angle error below which two scores are ranked by infidelity.
pub const DEFAULT_ANGLE_THRESHOLD: f64 = 1e-4;
pub const MAX_REPETITIONS: usize = 64;

/// Rotation by `theta_target` about the y axis, `U_id = exp(i·θ·σ_y/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetGate {
    theta_target: f64,
}

impl TargetGate {
    pub fn y_rotation(theta_target: f64) -> Result<Self> {
        if !(theta_target > 0.0 && theta_target <= std::f64::consts::PI) {
            return domain(format!("target angle must lie in (0, π], got {theta_target}"));
        }
        Ok(Self { theta_target })
    }

    pub fn y_half_pi() -> Self {
        Self {
            theta_target: std::f64::consts::FRAC_PI_2,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta_target
    }

    pub fn ideal_block(&self) -> Block2 {
        let (s, c) = (0.5 * self.theta_target).sin_cos();
        [
            [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
            [Complex64::new(-s, 0.0), Complex64::new(c, 0.0)],
        ]
    }

    /// `U_id` embedded in a `dim`-level space, identity outside the qubit block.
    pub fn ideal_unitary(&self, dim: usize) -> GateUnitary {
        let b = self.ideal_block();
        let mut m = nalgebra::DMatrix::identity(dim, dim);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = b[i][j];
            }
        }
        GateUnitary::new(m, 0.0)
    }
}

impl Default for TargetGate {
    fn default() -> Self {
        Self::y_half_pi()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessScore {
    /// |θ̂ − θ_target|, rad.
    pub angle_error: f64,
    /// 1 − ⟨F⟩.
    pub infidelity: f64,
}

impl FitnessScore {
    pub fn new(angle_error: f64, infidelity: f64) -> Self {
        Self {
            angle_error,
            infidelity,
        }
    }

    pub fn fidelity(&self) -> f64 {
        1.0 - self.infidelity
    }

    /// Both tolerances met (strict inequalities).
    pub fn satisfies(&self, angle_tol: f64, infid_tol: f64) -> bool {
        self.angle_error < angle_tol && self.infidelity < infid_tol
    }
}

/// Thresholded lexicographic ordering: scores are ranked by angle error unless
/// both are below `angle_threshold`, in which case infidelity decides.
/// Smaller is better.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessOrder {
    pub angle_threshold: f64,
}

impl Default for FitnessOrder {
    fn default() -> Self {
        Self {
            angle_threshold: DEFAULT_ANGLE_THRESHOLD,
        }
    }
}

impl FitnessOrder {
    pub fn compare(&self, a: &FitnessScore, b: &FitnessScore) -> Ordering {
        let t = self.angle_threshold;
        if a.angle_error < t && b.angle_error < t {
            a.infidelity
                .total_cmp(&b.infidelity)
                .then(a.angle_error.total_cmp(&b.angle_error))
        } else {
            a.angle_error
                .total_cmp(&b.angle_error)
                .then(a.infidelity.total_cmp(&b.infidelity))
        }
    }

    pub fn is_better(&self, a: &FitnessScore, b: &FitnessScore) -> bool {
        self.compare(a, b) == Ordering::Less
    }
}

/// [`FitnessOrder::compare`] with the default 10⁻⁴ rad switch-over.
pub fn compare(a: &FitnessScore, b: &FitnessScore) -> Ordering {
    FitnessOrder::default().compare(a, b)
}

fn block_angle(b: &Block2) -> f64 {
    2.0 * b[1][0].norm().clamp(0.0, 1.0).asin()
}

fn block_fidelity(b: &Block2, ideal: &Block2) -> f64 {
    let h = FRAC_1_SQRT_2;
    let i = Complex64::i();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let states = [
        [one * h, one * h],
        [one * h, -one * h],
        [one * h, i * h],
        [one * h, -i * h],
        [one, zero],
        [zero, one],
    ];
    let apply = |m: &Block2, v: &[Complex64; 2]| {
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    };
    let total: f64 = states
        .iter()
        .map(|v| {
            let g = apply(b, v);
            let t = apply(ideal, v);
            (g[0].conj() * t[0] + g[1].conj() * t[1]).norm_sqr()
        })
        .sum();
    (total / 6.0).clamp(0.0, 1.0)
}

/// θ̂ = 2·arcsin(|⟨1|u|0⟩|), in [0, π]. `u` must be in the rotating frame.
pub fn extract_angle(u: &GateUnitary) -> f64 {
    block_angle(&u.computational_block())
}

/// Six-cardinal-state average fidelity of `u` (rotating frame) against `gate`.
pub fn average_fidelity(u: &GateUnitary, gate: &TargetGate) -> f64 {
    block_fidelity(&u.computational_block(), &gate.ideal_block())
}

/// How a genome maps to a gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum ScoreMode {
    /// The genome is the whole train.
    Sequence,
    /// The genome is repeated 1..=max_rep times; the best repetition count wins.
    Subsequence { max_rep: usize },
}

/// Scores pulse trains for one model, clock and target. Cheap to share across
/// threads; every method is a pure function of its arguments.
#[derive(Debug, Clone)]
pub struct Scorer {
    propagator: Propagator,
    gate: TargetGate,
    ideal: Block2,
    order: FitnessOrder,
}

impl Scorer {
    pub fn new(model: &TransmonModel, drive: &DriveConfig, gate: &TargetGate) -> Self {
        Self {
            propagator: Propagator::new(model, drive),
            gate: *gate,
            ideal: gate.ideal_block(),
            order: FitnessOrder::default(),
        }
    }

    pub fn with_order(mut self, order: FitnessOrder) -> Self {
        self.order = order;
        self
    }

    pub fn order(&self) -> &FitnessOrder {
        &self.order
    }

    pub fn propagator(&self) -> &Propagator {
        &self.propagator
    }

    pub fn model(&self) -> &TransmonModel {
        self.propagator.model()
    }

    pub fn drive(&self) -> &DriveConfig {
        self.propagator.drive()
    }

    pub fn gate(&self) -> &TargetGate {
        &self.gate
    }

    fn score_block(&self, b: &Block2) -> FitnessScore {
        FitnessScore::new(
            (block_angle(b) - self.gate.theta()).abs(),
            1.0 - block_fidelity(b, &self.ideal),
        )
    }

    /// Scores a rotating-frame gate directly.
    pub fn score_unitary(&self, u: &GateUnitary) -> FitnessScore {
        self.score_block(&u.computational_block())
    }

    pub fn score_sequence(&self, seq: &PulseSequence) -> FitnessScore {
        self.score_block(&self.propagator.rotating_block(seq))
    }

    /// Best repetition count in `1..=max_rep` for `sub` and its score. Ties go
    /// to the smaller count.
    pub fn score_subsequence(
        &self,
        sub: &PulseSequence,
        max_rep: usize,
    ) -> Result<(usize, FitnessScore)> {
        if !(1..=MAX_REPETITIONS).contains(&max_rep) {
            return domain(format!(
                "repetition bound must lie in 1..={MAX_REPETITIONS}, got {max_rep}"
            ));
        }
        let unit = self.propagator.propagate(sub);
        let w = self.model().omega0();
        let mut cols = Columns::basis(self.model().dim());
        let mut best: Option<(usize, FitnessScore)> = None;
        for r in 1..=max_rep {
            cols.apply(unit.matrix());
            let t = self.propagator.duration(r * sub.len());
            let score = self.score_block(&cols.framed_block(w * t));
            if best.map_or(true, |(_, b)| self.order.is_better(&score, &b)) {
                best = Some((r, score));
            }
        }
        Ok(best.expect("max_rep >= 1"))
    }

    /// Dispatches on `mode`; sequence mode always reports one repetition.
    pub fn score(&self, genome: &PulseSequence, mode: ScoreMode) -> Result<(usize, FitnessScore)> {
        match mode {
            ScoreMode::Sequence => Ok((1, self.score_sequence(genome))),
            ScoreMode::Subsequence { max_rep } => self.score_subsequence(genome, max_rep),
        }
    }
}

pub fn score_sequence(
    seq: &PulseSequence,
    model: &TransmonModel,
    drive: &DriveConfig,
    gate: &TargetGate,
) -> FitnessScore {
    Scorer::new(model, drive, gate).score_sequence(seq)
}

pub fn score_subsequence(
    sub: &PulseSequence,
    max_rep: usize,
    model: &TransmonModel,
    drive: &DriveConfig,
    gate: &TargetGate,
) -> Result<(usize, FitnessScore)> {
    Scorer::new(model, drive, gate).score_subsequence(sub, max_rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagate::{propagate, to_rotating_frame};
    use crate::pulse::Alphabet;
    use std::f64::consts::FRAC_PI_2;

    fn setup(dim: usize) -> (TransmonModel, DriveConfig) {
        (
            TransmonModel::from_ghz(5.0, 0.25, 0.032, dim).unwrap(),
            DriveConfig::from_ghz(25.0).unwrap(),
        )
    }

    #[test]
    fn angle_of_identity_and_exact_rotation() {
        assert_eq!(extract_angle(&GateUnitary::identity(5)), 0.0);
        let u = TargetGate::y_half_pi().ideal_unitary(5);
        assert!((extract_angle(&u) - FRAC_PI_2).abs() < 1e-12);
        let s = Scorer::new(
            &TransmonModel::from_ghz(5.0, 0.25, 0.032, 5).unwrap(),
            &DriveConfig::from_ghz(25.0).unwrap(),
            &TargetGate::y_half_pi(),
        )
        .score_unitary(&u);
        assert_eq!(s.infidelity, 0.0);
        assert!(s.angle_error <= f64::EPSILON);
    }

    #[test]
    fn single_kick_angle() {
        let (m, d) = setup(2);
        let seq: PulseSequence = "+".parse().unwrap();
        let g = to_rotating_frame(&propagate(&seq, &m, &d), &m);
        assert!((extract_angle(&g) - 0.032).abs() < 1e-12);
    }

    #[test]
    fn fidelity_reference_values() {
        let gate = TargetGate::y_half_pi();
        assert_eq!(average_fidelity(&gate.ideal_unitary(5), &gate), 1.0);
        let f = average_fidelity(&GateUnitary::identity(5), &gate);
        assert!((f - 2.0 / 3.0).abs() < 1e-15);
        // |0⟩↔|2⟩, |1⟩↔|3⟩: computational block is zero
        let mut leaked = nalgebra::DMatrix::zeros(4, 4);
        for (i, j) in [(2, 0), (3, 1), (0, 2), (1, 3)] {
            leaked[(i, j)] = Complex64::new(1.0, 0.0);
        }
        assert_eq!(average_fidelity(&GateUnitary::new(leaked, 0.0), &gate), 0.0);
    }

    #[test]
    fn idle_train_score() {
        let (m, d) = setup(5);
        let s = score_sequence(
            &PulseSequence::zeros(20, Alphabet::Bipolar).unwrap(),
            &m,
            &d,
            &TargetGate::y_half_pi(),
        );
        assert!((s.angle_error - FRAC_PI_2).abs() < 1e-12);
        assert!((s.infidelity - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn compare_examples() {
        let o = FitnessOrder::default();
        let a = FitnessScore::new(1e-5, 0.5);
        let b = FitnessScore::new(1e-5, 0.01);
        assert_eq!(o.compare(&b, &a), Ordering::Less);
        let a = FitnessScore::new(0.2, 0.0);
        let b = FitnessScore::new(0.1, 0.9);
        assert_eq!(o.compare(&b, &a), Ordering::Less);
        assert_eq!(o.compare(&a, &a), Ordering::Equal);
        // straddling: under-threshold always wins
        let a = FitnessScore::new(5e-5, 0.9);
        let b = FitnessScore::new(2e-4, 0.0);
        assert_eq!(o.compare(&a, &b), Ordering::Less);
    }

    #[test]
    fn subsequence_single_rep_is_sequence() {
        let (m, d) = setup(5);
        let scorer = Scorer::new(&m, &d, &TargetGate::y_half_pi());
        let sub: PulseSequence = "+0-0++0--0+".parse().unwrap();
        let (r, s) = scorer.score_subsequence(&sub, 1).unwrap();
        assert_eq!(r, 1);
        let direct = scorer.score_sequence(&sub);
        assert!((s.angle_error - direct.angle_error).abs() < 1e-12);
        assert!((s.infidelity - direct.infidelity).abs() < 1e-12);
        assert!(scorer.score_subsequence(&sub, 0).is_err());
        assert!(scorer.score_subsequence(&sub, 65).is_err());
    }

    #[test]
    fn rejects_bad_targets() {
        assert!(TargetGate::y_rotation(0.0).is_err());
        assert!(TargetGate::y_rotation(4.0).is_err());
        assert!(TargetGate::y_rotation(std::f64::consts::PI).is_ok());
    }
}
