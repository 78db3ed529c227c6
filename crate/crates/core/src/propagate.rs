//! Gate unitaries of SFQ pulse trains.
//!
//! Each generator tick starts with an instantaneous kick
//! `K(s) = exp(s·(Δθ/2)·(a† − a))`, `s ∈ {−1, 0, +1}`, followed by free
//! evolution under H0 for one tick. The lab-frame propagator of a train
//! `s_0 … s_{L−1}` is
//!
//! ```text
//! U_lab = F(T_g)·K(s_{L−1}) ⋯ F(T_g)·K(s_0)
//! ```
//!
//! and comparisons with an ideal gate are made after moving to the frame
//! rotating at ω0: `U_g = exp(i·ω0·t·n̂)·U_lab` with `t = L·T_g`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::model::{ladder_matrices, DriveConfig, TransmonModel, MAX_DIM};
use crate::pulse::{Pulse, PulseSequence};

/// Top-left 2×2 block, indexed `[row][col]`.
pub type Block2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct GateUnitary {
    matrix: DMatrix<Complex64>,
    total_time: f64,
}

impl GateUnitary {
    pub fn new(matrix: DMatrix<Complex64>, total_time: f64) -> Self {
        assert!(matrix.is_square(), "gate matrix must be square");
        Self { matrix, total_time }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim), 0.0)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    /// Elapsed time in ns.
    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// ‖U†U − I‖ in the max-entry norm.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim();
        let p = self.matrix.adjoint() * &self.matrix;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p[(i, j)] - Complex64::new(want, 0.0)).norm());
            }
        }
        worst
    }

    pub fn computational_block(&self) -> Block2 {
        let m = &self.matrix;
        [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
    }

    /// `self` followed by `later`; times add.
    pub fn then(&self, later: &GateUnitary) -> GateUnitary {
        GateUnitary::new(&later.matrix * &self.matrix, self.total_time + later.total_time)
    }

    pub fn max_abs_diff(&self, other: &GateUnitary) -> f64 {
        (&self.matrix - &other.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// `exp(s·(Δθ/2)·(a† − a))`, computed from the eigendecomposition of the
/// Hermitian matrix `i(a† − a)`. `Pulse::Zero` gives the identity.
pub fn kick_unitary(model: &TransmonModel, polarity: Pulse) -> GateUnitary {
    let dim = model.dim();
    let s = polarity.value() as f64;
    if s == 0.0 {
        return GateUnitary::identity(dim);
    }
    let generator = ladder_matrices(dim).expect("model dim >= 2").kick_generator;
    let hermitian = generator.map(|z| z * Complex64::i());
    let eig = SymmetricEigen::new(hermitian);
    // a† − a = −iH, so exp(c(a† − a)) = V·diag(exp(−i·c·λ))·V†
    let c = s * 0.5 * model.delta_theta();
    let phases = eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -c * l));
    let v = &eig.eigenvectors;
    let scaled = DMatrix::from_fn(dim, dim, |i, j| v[(i, j)] * phases[j]);
    GateUnitary::new(scaled * v.adjoint(), 0.0)
}

/// Diagonal `exp(−i·E_n·dt)` for any real `dt`.
fn free_evolution(model: &TransmonModel, dt: f64) -> DMatrix<Complex64> {
    let phases: Vec<Complex64> = model
        .energies()
        .iter()
        .map(|e| Complex64::from_polar(1.0, -e * dt))
        .collect();
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(phases))
}

/// Free evolution over `dt > 0` ns.
pub fn free_step(model: &TransmonModel, dt: f64) -> Result<GateUnitary> {
    if !(dt > 0.0) || !dt.is_finite() {
        return domain(format!("free-evolution step must be positive, got {dt} ns"));
    }
    Ok(GateUnitary::new(free_evolution(model, dt), dt))
}

/// Applies `R(t) = exp(i·ω0·t·n̂)` on the left; `t` may be negative.
pub fn shift_frame(u: &GateUnitary, model: &TransmonModel, t: f64) -> GateUnitary {
    let w = model.omega0();
    let mut m = u.matrix.clone();
    for (n, mut row) in m.row_iter_mut().enumerate() {
        row *= Complex64::from_polar(1.0, w * t * n as f64);
    }
    GateUnitary::new(m, u.total_time)
}

/// Moves a lab-frame propagator into the frame rotating at ω0, evaluated at
/// the propagator's own total time.
pub fn to_rotating_frame(u: &GateUnitary, model: &TransmonModel) -> GateUnitary {
    shift_frame(u, model, u.total_time)
}

/// Lab-frame propagator of a complete train.
pub fn propagate(seq: &PulseSequence, model: &TransmonModel, drive: &DriveConfig) -> GateUnitary {
    Propagator::new(model, drive).propagate(seq)
}

/// Per-tick step matrices `F(T_g)·K(s)` for one model and clock, shared
/// read-only by every propagation.
#[derive(Debug, Clone)]
pub struct Propagator {
    model: TransmonModel,
    drive: DriveConfig,
    /// Indexed by `Pulse::index()`.
    steps: [DMatrix<Complex64>; 3],
    /// Row-major copies of `steps` for the vector fast path.
    flat: [Vec<Complex64>; 3],
    /// Diagonal of F(T_g).
    free_diag: Vec<Complex64>,
}

impl Propagator {
    pub fn new(model: &TransmonModel, drive: &DriveConfig) -> Self {
        let free = free_evolution(model, drive.tick());
        let steps = [Pulse::Negative, Pulse::Zero, Pulse::Positive]
            .map(|p| &free * kick_unitary(model, p).matrix);
        let d = model.dim();
        let flat = steps
            .clone()
            .map(|m| (0..d * d).map(|k| m[(k / d, k % d)]).collect());
        let free_diag = (0..d).map(|n| free[(n, n)]).collect();
        Self {
            model: model.clone(),
            drive: *drive,
            steps,
            flat,
            free_diag,
        }
    }

    pub fn model(&self) -> &TransmonModel {
        &self.model
    }

    pub fn drive(&self) -> &DriveConfig {
        &self.drive
    }

    pub fn step(&self, p: Pulse) -> &DMatrix<Complex64> {
        &self.steps[p.index()]
    }

    pub fn duration(&self, len: usize) -> f64 {
        len as f64 * self.drive.tick()
    }

    pub fn propagate(&self, seq: &PulseSequence) -> GateUnitary {
        self.continue_from(&GateUnitary::identity(self.model.dim()), seq)
    }

    /// Propagates `seq` starting from an existing lab-frame propagator `u`.
    pub fn continue_from(&self, u: &GateUnitary, seq: &PulseSequence) -> GateUnitary {
        let mut m = u.matrix.clone();
        for &p in seq.symbols() {
            if p == Pulse::Zero {
                for (n, mut row) in m.row_iter_mut().enumerate() {
                    row *= self.free_diag[n];
                }
            } else {
                m = self.step(p) * m;
            }
        }
        GateUnitary::new(m, u.total_time + self.duration(seq.len()))
    }

    /// Rotating-frame computational block of the train's propagator, from the
    /// images of |0⟩ and |1⟩ only.
    pub fn rotating_block(&self, seq: &PulseSequence) -> Block2 {
        let d = self.model.dim();
        let mut cols = Columns::basis(d);
        for &p in seq.symbols() {
            self.apply_step(p, &mut cols);
        }
        cols.framed_block(self.model.omega0() * self.duration(seq.len()))
    }

    pub(crate) fn apply_step(&self, p: Pulse, cols: &mut Columns) {
        let d = cols.dim;
        if p == Pulse::Zero {
            for c in cols.v.iter_mut() {
                for (x, f) in c[..d].iter_mut().zip(&self.free_diag) {
                    *x *= f;
                }
            }
            return;
        }
        let m = &self.flat[p.index()];
        for c in cols.v.iter_mut() {
            let src = *c;
            for (i, row) in m.chunks_exact(d).enumerate() {
                c[i] = row.iter().zip(&src[..d]).map(|(a, b)| a * b).sum();
            }
        }
    }
}

/// Images of |0⟩ and |1⟩ under a propagator, on the stack.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Columns {
    pub dim: usize,
    pub v: [[Complex64; MAX_DIM]; 2],
}

impl Columns {
    pub fn basis(dim: usize) -> Self {
        let mut v = [[ZERO; MAX_DIM]; 2];
        v[0][0] = Complex64::new(1.0, 0.0);
        v[1][1] = Complex64::new(1.0, 0.0);
        Self { dim, v }
    }

    /// Left-multiplies both columns by a dense matrix.
    pub fn apply(&mut self, m: &DMatrix<Complex64>) {
        let d = self.dim;
        for c in self.v.iter_mut() {
            let src = *c;
            for (i, x) in c[..d].iter_mut().enumerate() {
                *x = (0..d).map(|k| m[(i, k)] * src[k]).sum();
            }
        }
    }

    /// Computational block after applying `R(t)` with `phase = ω0·t`.
    pub fn framed_block(&self, phase: f64) -> Block2 {
        let r1 = Complex64::from_polar(1.0, phase);
        [
            [self.v[0][0], self.v[1][0]],
            [r1 * self.v[0][1], r1 * self.v[1][1]],
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::Alphabet;
    use std::f64::consts::PI;

    fn model(f0: f64, fa: f64, dim: usize) -> TransmonModel {
        TransmonModel::from_ghz(f0, fa, 0.032, dim).unwrap()
    }

    #[test]
    fn two_level_kick_matrix() {
        let k = kick_unitary(&model(5.0, 0.25, 2), Pulse::Positive);
        let (c, s) = (0.016f64.cos(), 0.016f64.sin());
        let want = [[c, -s], [s, c]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((k.matrix()[(i, j)] - Complex64::new(want[i][j], 0.0)).norm() < 1e-15);
            }
        }
        assert!((k.matrix()[(1, 0)].norm() - 0.015_999_317_3).abs() < 1e-10);
    }

    #[test]
    fn kick_pair_is_identity() {
        for d in 2..=8 {
            let m = model(5.0, 0.25, d);
            let prod = kick_unitary(&m, Pulse::Positive).then(&kick_unitary(&m, Pulse::Negative));
            assert!(prod.max_abs_diff(&GateUnitary::identity(d)) < 1e-12);
        }
    }

    #[test]
    fn free_step_values() {
        let m = model(5.0, 0.25, 2);
        let u = free_step(&m, 2.0 * PI / m.omega0()).unwrap();
        assert!((u.matrix()[(1, 1)] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let u = free_step(&m, 0.04).unwrap();
        let want = Complex64::from_polar(1.0, -2.0 * PI * 0.2);
        assert!((u.matrix()[(1, 1)] - want).norm() < 1e-14);
        assert!(free_step(&m, 0.0).is_err());
        assert!(free_step(&m, -1.0).is_err());
    }

    #[test]
    fn zero_train_is_free_evolution() {
        let m = model(4.7, 0.25, 5);
        let drive = DriveConfig::from_ghz(25.0).unwrap();
        let seq = PulseSequence::zeros(37, Alphabet::Bipolar).unwrap();
        let u = propagate(&seq, &m, &drive);
        let f = free_step(&m, 37.0 * drive.tick()).unwrap();
        assert!(u.max_abs_diff(&f) < 1e-12);
        assert!((u.total_time() - 37.0 * 0.04).abs() < 1e-12);
    }

    #[test]
    fn rotating_frame_of_idle_train() {
        let drive = DriveConfig::from_ghz(25.0).unwrap();
        let m2 = model(5.0, 0.25, 2);
        let seq = PulseSequence::zeros(13, Alphabet::Bipolar).unwrap();
        let g = to_rotating_frame(&propagate(&seq, &m2, &drive), &m2);
        assert!(g.max_abs_diff(&GateUnitary::identity(2)) < 1e-12);

        let m3 = model(5.0, 0.25, 3);
        let g = to_rotating_frame(&propagate(&seq, &m3, &drive), &m3);
        let t = 13.0 * drive.tick();
        let want = Complex64::from_polar(1.0, m3.alpha() * t);
        assert!((g.matrix()[(2, 2)] - want).norm() < 1e-12);
    }

    #[test]
    fn frame_shift_inverts() {
        let m = model(5.0, 0.25, 4);
        let drive = DriveConfig::from_ghz(25.0).unwrap();
        let seq: PulseSequence = "+0-+00-+-".parse().unwrap();
        let u = propagate(&seq, &m, &drive);
        let back = shift_frame(&to_rotating_frame(&u, &m), &m, -u.total_time());
        assert!(back.max_abs_diff(&u) < 1e-12);
    }

    #[test]
    fn table_one_row_one_duration() {
        let drive = DriveConfig::from_ghz(25.0).unwrap();
        let p = Propagator::new(&model(4.54643, 0.25, 5), &drive);
        let u = p.propagate(&PulseSequence::zeros(114, Alphabet::Bipolar).unwrap());
        assert!((u.total_time() - 4.56).abs() < 1e-12);
    }

    #[test]
    fn fast_block_matches_full_matrix() {
        let m = model(5.1, 0.3, 6);
        let p = Propagator::new(&m, &DriveConfig::from_ghz(25.0).unwrap());
        let seq: PulseSequence = "+0-+00-+-++0--0+".parse().unwrap();
        let full = to_rotating_frame(&p.propagate(&seq), &m).computational_block();
        let fast = p.rotating_block(&seq);
        for i in 0..2 {
            for j in 0..2 {
                assert!((full[i][j] - fast[i][j]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn bipolar_pair_nearly_cancels() {
        let m = model(5.0, 0.25, 5);
        let drive = DriveConfig::from_ghz(25.0).unwrap();
        let seq: PulseSequence = "+-".parse().unwrap();
        let g = to_rotating_frame(&propagate(&seq, &m, &drive), &m);
        let bound = 2.0 * (m.omega0() * drive.tick() / 2.0).sin() * m.delta_theta() + 1e-6;
        let block = g.computational_block();
        let dev = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| (block[i][j] - if i == j { 1.0 } else { 0.0 }).norm())
            .fold(0.0, f64::max);
        assert!(dev < bound, "deviation {dev} exceeds {bound}");
    }
}
