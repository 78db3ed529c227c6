//! Truncated transmon model.
//!
//! The transmon is treated as a Kerr (Bose-Hubbard) oscillator
//!
//! ```text
//! H0 = ω0 a†a − (α/2) a†a (a†a − 1)
//! ```
//!
//! truncated to `dim` levels. Everything is stored in angular units (rad/ns)
//! with ħ = 1; the GHz accessors exist only for I/O.

use std::f64::consts::PI;

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Magnetic flux quantum h/2e in Wb.
pub const FLUX_QUANTUM: f64 = 2.067_833_848e-15;
/// Reduced Planck constant in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

pub const DEFAULT_DIM: usize = 5;
pub const MAX_DIM: usize = 16;
/// Default anharmonicity α/2π in GHz. Not a measured value for any device;
/// a typical transmon figure used when nothing better is known.
pub const DEFAULT_ANHARMONICITY_GHZ: f64 = 0.25;
pub const DEFAULT_DELTA_THETA: f64 = 0.032;
pub const DEFAULT_GENERATOR_GHZ: f64 = 25.0;

/// E_J/E_C below which a warning is logged.
pub const TRANSMON_RATIO_WARN: f64 = 20.0;

pub fn ghz_to_angular(f: f64) -> f64 {
    2.0 * PI * f
}

pub fn angular_to_ghz(w: f64) -> f64 {
    w / (2.0 * PI)
}

/// Circuit-level transmon parameters. Energies are in rad/ns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    pub josephson_energy: f64,
    pub charging_energy: f64,
    /// Coupling capacitance to the SFQ driver, F.
    pub coupling_capacitance: Option<f64>,
    /// Junction capacitance, F.
    pub qubit_capacitance: Option<f64>,
}

impl CircuitParams {
    pub fn new(josephson_energy: f64, charging_energy: f64) -> Self {
        Self {
            josephson_energy,
            charging_energy,
            coupling_capacitance: None,
            qubit_capacitance: None,
        }
    }

    pub fn with_capacitances(mut self, coupling: f64, qubit: f64) -> Self {
        self.coupling_capacitance = Some(coupling);
        self.qubit_capacitance = Some(qubit);
        self
    }

    /// Circuit energies that reproduce qubit frequency `f0_ghz` at a fixed
    /// E_J/E_C ratio.
    pub fn for_frequency(f0_ghz: f64, ratio: f64) -> Result<Self> {
        if !(f0_ghz > 0.0) || !(ratio > 0.0) {
            return domain(format!(
                "frequency and E_J/E_C must be positive, got f0 = {f0_ghz}, ratio = {ratio}"
            ));
        }
        let omega0 = ghz_to_angular(f0_ghz);
        // ω0 = √(8 E_J E_C) = E_C √(8 r)
        let charging = omega0 / (8.0 * ratio).sqrt();
        Ok(Self::new(ratio * charging, charging))
    }

    /// Inverts [`derive_model`] on ω0 and α.
    pub fn from_model(model: &TransmonModel) -> Self {
        let charging = 12.0 * model.alpha();
        let josephson = model.omega0() * model.omega0() / (8.0 * charging);
        Self::new(josephson, charging)
    }

    pub fn ratio(&self) -> f64 {
        self.josephson_energy / self.charging_energy
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.josephson_energy > 0.0) || !(self.charging_energy > 0.0) {
            return domain(format!(
                "energies must be positive, got E_J = {}, E_C = {}",
                self.josephson_energy, self.charging_energy
            ));
        }
        let ratio = self.ratio();
        if ratio <= 1.0 {
            return domain(format!("E_J/E_C = {ratio} is outside the transmon regime"));
        }
        if ratio < TRANSMON_RATIO_WARN {
            warn!("E_J/E_C = {ratio:.2} is below {TRANSMON_RATIO_WARN}; charge dispersion is not modelled");
        }
        for (name, c) in [
            ("coupling capacitance", self.coupling_capacitance),
            ("qubit capacitance", self.qubit_capacitance),
        ] {
            if let Some(c) = c {
                if !(c > 0.0) {
                    return domain(format!("{name} must be positive, got {c}"));
                }
            }
        }
        Ok(())
    }
}

/// Builds a [`TransmonModel`] from circuit energies.
///
/// ω0 = √(8 E_J E_C) and α = E_C/12. When both capacitances are present the
/// kick angle is C_c Φ0 √(ω0 / 2ħC_q) (SI units, ω0 in rad/s); otherwise
/// [`DEFAULT_DELTA_THETA`] is used and can be replaced with
/// [`TransmonModel::with_delta_theta`].
pub fn derive_model(circuit: &CircuitParams, dim: usize) -> Result<TransmonModel> {
    circuit.validate()?;
    let omega0 = (8.0 * circuit.josephson_energy * circuit.charging_energy).sqrt();
    let alpha = circuit.charging_energy / 12.0;
    let delta_theta = match (circuit.coupling_capacitance, circuit.qubit_capacitance) {
        (Some(cc), Some(cq)) => kick_angle(cc, cq, omega0),
        _ => DEFAULT_DELTA_THETA,
    };
    TransmonModel::new(omega0, alpha, delta_theta, dim)
}

/// Per-pulse rotation angle for coupling capacitance `cc`, junction
/// capacitance `cq` (both F) and qubit frequency `omega0` in rad/ns.
pub fn kick_angle(cc: f64, cq: f64, omega0: f64) -> f64 {
    let omega_si = omega0 * 1e9;
    cc * FLUX_QUANTUM * (omega_si / (2.0 * HBAR * cq)).sqrt()
}

/// Physical parameters of the truncated transmon. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmonModel {
    omega0: f64,
    alpha: f64,
    delta_theta: f64,
    dim: usize,
}

impl TransmonModel {
    pub fn new(omega0: f64, alpha: f64, delta_theta: f64, dim: usize) -> Result<Self> {
        if !(omega0 > 0.0) || !omega0.is_finite() {
            return domain(format!("qubit frequency must be positive, got {omega0} rad/ns"));
        }
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return domain(format!("anharmonicity must be non-negative, got {alpha} rad/ns"));
        }
        if !(delta_theta > 0.0 && delta_theta < PI / 4.0) {
            return domain(format!("kick angle must lie in (0, π/4), got {delta_theta}"));
        }
        if !(2..=MAX_DIM).contains(&dim) {
            return domain(format!("truncation dimension must lie in 2..={MAX_DIM}, got {dim}"));
        }
        Ok(Self {
            omega0,
            alpha,
            delta_theta,
            dim,
        })
    }

    /// Same as [`TransmonModel::new`] with frequencies given as f/2π in GHz.
    pub fn from_ghz(f0: f64, f_alpha: f64, delta_theta: f64, dim: usize) -> Result<Self> {
        Self::new(ghz_to_angular(f0), ghz_to_angular(f_alpha), delta_theta, dim)
    }

    pub fn with_delta_theta(&self, delta_theta: f64) -> Result<Self> {
        Self::new(self.omega0, self.alpha, delta_theta, self.dim)
    }

    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Self::new(self.omega0, self.alpha, self.delta_theta, dim)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn f0(&self) -> f64 {
        angular_to_ghz(self.omega0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn f_alpha(&self) -> f64 {
        angular_to_ghz(self.alpha)
    }

    pub fn delta_theta(&self) -> f64 {
        self.delta_theta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Diagonal of H0.
    pub fn energies(&self) -> Vec<f64> {
        free_hamiltonian(self)
    }
}

/// E_n = ω0·n − (α/2)·n·(n−1) for n = 0..dim.
pub fn free_hamiltonian(model: &TransmonModel) -> Vec<f64> {
    (0..model.dim)
        .map(|n| {
            let n = n as f64;
            model.omega0 * n - 0.5 * model.alpha * n * (n - 1.0)
        })
        .collect()
}

/// Truncated ladder operators.
#[derive(Debug, Clone)]
pub struct LadderMatrices {
    pub lowering: DMatrix<Complex64>,
    pub raising: DMatrix<Complex64>,
    /// a† − a; anti-Hermitian, real.
    pub kick_generator: DMatrix<Complex64>,
}

pub fn ladder_matrices(dim: usize) -> Result<LadderMatrices> {
    if dim < 2 {
        return domain(format!("ladder operators need dim >= 2, got {dim}"));
    }
    let mut lowering = DMatrix::<Complex64>::zeros(dim, dim);
    for n in 1..dim {
        lowering[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    let raising = lowering.adjoint();
    let kick_generator = &raising - &lowering;
    Ok(LadderMatrices {
        lowering,
        raising,
        kick_generator,
    })
}

/// SFQ clock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    omega_g: f64,
    tick: f64,
}

impl DriveConfig {
    pub fn new(omega_g: f64) -> Result<Self> {
        if !(omega_g > 0.0) || !omega_g.is_finite() {
            return domain(format!("generator frequency must be positive, got {omega_g} rad/ns"));
        }
        Ok(Self {
            omega_g,
            tick: 2.0 * PI / omega_g,
        })
    }

    pub fn from_ghz(f_g: f64) -> Result<Self> {
        Self::new(ghz_to_angular(f_g))
    }

    pub fn omega_g(&self) -> f64 {
        self.omega_g
    }

    pub fn f_g(&self) -> f64 {
        angular_to_ghz(self.omega_g)
    }

    /// Generator period T_g in ns.
    pub fn tick(&self) -> f64 {
        self.tick
    }

    /// Logs a warning when the clock gives fewer than two ticks per qubit period.
    pub fn check_against(&self, model: &TransmonModel) -> bool {
        let ok = self.omega_g > 2.0 * model.omega0();
        if !ok {
            warn!(
                "generator at {:.4} GHz gives fewer than two ticks per qubit period ({:.4} GHz)",
                self.f_g(),
                model.f0()
            );
        }
        ok
    }
}

impl Default for DriveConfig {
    fn default() -> Self {
        Self::from_ghz(DEFAULT_GENERATOR_GHZ).expect("default clock is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn omega0_for_ratio_fifty() {
        let x = 0.3;
        let m = derive_model(&CircuitParams::new(50.0 * x, x), 5).unwrap();
        assert_relative_eq!(m.omega0(), 20.0 * x, max_relative = 1e-15);
    }

    #[test]
    fn alpha_is_ec_over_twelve() {
        let m = derive_model(&CircuitParams::new(50.0 * 0.012, 0.012), 5).unwrap();
        assert_relative_eq!(m.alpha(), 0.001, max_relative = 1e-14);
    }

    #[test]
    fn frequency_inversion_round_trips() {
        let c = CircuitParams::for_frequency(4.54643, 50.0).unwrap();
        assert_relative_eq!(c.ratio(), 50.0, max_relative = 1e-14);
        let m = derive_model(&c, 5).unwrap();
        assert!((m.f0() - 4.54643).abs() < 1e-9);
    }

    #[test]
    fn circuit_round_trip() {
        let c = CircuitParams::new(17.3, 0.41);
        let m = derive_model(&c, 4).unwrap();
        let back = derive_model(&CircuitParams::from_model(&m), 4).unwrap();
        assert!(((back.omega0() - m.omega0()) / m.omega0()).abs() < 1e-12);
        assert!(((back.alpha() - m.alpha()) / m.alpha()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_energies() {
        assert!(derive_model(&CircuitParams::new(-1.0, 0.1), 5).is_err());
        assert!(derive_model(&CircuitParams::new(1.0, 0.0), 5).is_err());
        assert!(derive_model(&CircuitParams::new(1.0, 1.0), 5).is_err());
        // below 20 only warns
        assert!(derive_model(&CircuitParams::new(10.0, 1.0), 5).is_ok());
    }

    #[test]
    fn capacitances_set_kick_angle() {
        let c = CircuitParams::for_frequency(5.0, 50.0)
            .unwrap()
            .with_capacitances(1e-16, 1e-13);
        let m = derive_model(&c, 5).unwrap();
        let expected = 1e-16 * FLUX_QUANTUM * (m.omega0() * 1e9 / (2.0 * HBAR * 1e-13)).sqrt();
        assert_relative_eq!(m.delta_theta(), expected, max_relative = 1e-14);
        assert!(m.delta_theta() > 0.0 && m.delta_theta() < 0.1);
    }

    #[test]
    fn model_invariants() {
        assert!(TransmonModel::new(1.0, 0.1, 0.032, 1).is_err());
        assert!(TransmonModel::new(1.0, 0.1, 0.032, 17).is_err());
        assert!(TransmonModel::new(1.0, 0.1, PI / 4.0, 5).is_err());
        assert!(TransmonModel::new(1.0, -0.1, 0.032, 5).is_err());
        assert!(TransmonModel::new(0.0, 0.1, 0.032, 5).is_err());
        assert!(TransmonModel::new(1.0, 0.0, 0.032, 2).is_ok());
    }

    #[test]
    fn ladder_small_cases() {
        let l = ladder_matrices(2).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        assert_eq!(l.lowering, DMatrix::from_row_slice(2, 2, &[zero, one, zero, zero]));
        let l3 = ladder_matrices(3).unwrap();
        assert_eq!(l3.lowering[(1, 2)], Complex64::new(2f64.sqrt(), 0.0));
        assert!(ladder_matrices(1).is_err());
    }

    #[test]
    fn kick_generator_is_anti_hermitian() {
        let g = ladder_matrices(5).unwrap().kick_generator;
        assert_eq!(g.adjoint(), -g);
    }

    #[test]
    fn truncated_commutator() {
        for d in 2..=8 {
            let l = ladder_matrices(d).unwrap();
            let comm = &l.lowering * &l.raising - &l.raising * &l.lowering;
            for i in 0..d {
                for j in 0..d {
                    let want = match (i == j, i + 1 == d) {
                        (true, false) => 1.0,
                        (true, true) => 1.0 - d as f64,
                        _ => 0.0,
                    };
                    assert!((comm[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn spectrum_values() {
        let m = TransmonModel::from_ghz(5.0, 0.25, 0.032, 5).unwrap();
        let e = m.energies();
        assert_eq!(e[0], 0.0);
        assert_relative_eq!(e[1], m.omega0(), max_relative = 1e-15);
        assert_relative_eq!(angular_to_ghz(e[2]), 9.75, max_relative = 1e-14);
        assert!(e.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn drive_tick() {
        let d = DriveConfig::from_ghz(25.0).unwrap();
        assert!((d.tick() * d.omega_g() - 2.0 * PI).abs() < 1e-12);
        assert!((d.tick() - 0.04).abs() < 1e-15);
        let m = TransmonModel::from_ghz(5.0, 0.25, 0.032, 5).unwrap();
        assert!(d.check_against(&m));
        assert!(!DriveConfig::from_ghz(8.0).unwrap().check_against(&m));
        assert!(DriveConfig::new(0.0).is_err());
    }
}
