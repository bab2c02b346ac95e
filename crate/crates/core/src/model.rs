//! Physical constants, trap geometry and the effective two-mode parameters.
//!
//! Every downstream module consumes [`ModelParams`]; the geometric route through
//! [`PhysicalParams`] is only one way to build it.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// CODATA 2018 constants in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub vacuum_permittivity: f64,
    pub reduced_planck: f64,
    pub boltzmann: f64,
}

pub const CODATA_2018: Constants = Constants {
    vacuum_permittivity: 8.854_187_812_8e-12,
    reduced_planck: 1.054_571_817e-34,
    boltzmann: 1.380_649e-23,
};

impl Constants {
    /// Coulomb constant k = 1/(4 pi eps0).
    pub fn coulomb(&self) -> f64 {
        1.0 / (4.0 * std::f64::consts::PI * self.vacuum_permittivity)
    }
}

/// Trap geometry of two identical ions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Ion mass in kg.
    pub mass: f64,
    /// Ion charge in C.
    pub charge: f64,
    /// Equilibrium separation in m.
    pub separation: f64,
    /// Bare trap frequency in rad/s.
    pub trap_frequency: f64,
    /// Optional hbar*omega0 / (k_B T).
    #[serde(default)]
    pub temperature_ratio: Option<f64>,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        positive("mass", self.mass)?;
        if !(self.charge.is_finite() && self.charge != 0.0) {
            return Err(invalid("charge", "must be finite and non-zero"));
        }
        positive("separation", self.separation)?;
        positive("trap_frequency", self.trap_frequency)?;
        if let Some(ratio) = self.temperature_ratio {
            positive("temperature_ratio", ratio)?;
        }
        Ok(())
    }
}

/// Renormalised frequency and Coulomb exchange coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveModel {
    pub omega0: f64,
    pub coupling: f64,
}

/// Second-order Coulomb expansion: `Omega = -k q^2 / (m w d^3)` and
/// `omega0 = w + k q^2 / (m w d^3)`.
pub fn effective_model(p: &PhysicalParams) -> Result<EffectiveModel> {
    effective_model_with(p, &CODATA_2018)
}

pub fn effective_model_with(p: &PhysicalParams, constants: &Constants) -> Result<EffectiveModel> {
    p.validate()?;
    let shift = constants.coulomb() * p.charge * p.charge
        / (p.mass * p.trap_frequency * p.separation.powi(3));
    Ok(EffectiveModel {
        omega0: p.trap_frequency + shift,
        coupling: -shift,
    })
}

/// Bose-Einstein occupation `1/(e^x - 1)` for `x = hbar*omega0/(k_B T)`.
pub fn bose_occupation(ratio: f64) -> Result<f64> {
    positive("temperature_ratio", ratio)?;
    Ok(1.0 / ratio.exp_m1())
}

/// Effective parameters of the cross-damped model with symmetric damping.
///
/// Invariants: `0 <= gamma12 <= gamma`, `nbar >= 0`, all values finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    omega0: f64,
    coupling: f64,
    gamma: f64,
    gamma12: f64,
    nbar: f64,
}

impl ModelParams {
    pub fn new(omega0: f64, coupling: f64, gamma: f64, gamma12: f64, nbar: f64) -> Result<Self> {
        finite("omega0", omega0)?;
        finite("coupling", coupling)?;
        non_negative("gamma", gamma)?;
        non_negative("gamma12", gamma12)?;
        non_negative("nbar", nbar)?;
        if gamma12 > gamma {
            return Err(invalid(
                "gamma12",
                format!("cross-damping {gamma12} exceeds local damping {gamma}"),
            ));
        }
        Ok(Self {
            omega0,
            coupling,
            gamma,
            gamma12,
            nbar,
        })
    }

    /// Builds the model from trap geometry; the reservoir occupation comes from
    /// `temperature_ratio` when present, else from `nbar`.
    pub fn from_physical(p: &PhysicalParams, gamma: f64, gamma12: f64, nbar: Option<f64>) -> Result<Self> {
        let eff = effective_model(p)?;
        let nbar = match (p.temperature_ratio, nbar) {
            (Some(ratio), None) => bose_occupation(ratio)?,
            (None, Some(n)) => n,
            (Some(_), Some(_)) => {
                return Err(invalid("nbar", "give either temperature_ratio or nbar, not both"))
            }
            (None, None) => return Err(invalid("nbar", "reservoir occupation is unspecified")),
        };
        Self::new(eff.omega0, eff.coupling, gamma, gamma12, nbar)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }
    pub fn coupling(&self) -> f64 {
        self.coupling
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn gamma12(&self) -> f64 {
        self.gamma12
    }
    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    pub fn with_gamma12(self, gamma12: f64) -> Result<Self> {
        Self::new(self.omega0, self.coupling, self.gamma, gamma12, self.nbar)
    }
    pub fn with_coupling(self, coupling: f64) -> Result<Self> {
        Self::new(self.omega0, coupling, self.gamma, self.gamma12, self.nbar)
    }
    pub fn with_nbar(self, nbar: f64) -> Result<Self> {
        Self::new(self.omega0, self.coupling, self.gamma, self.gamma12, nbar)
    }

    /// True when the stored cross-damping bit-equals the local damping.
    pub fn is_decoherence_free(&self) -> bool {
        self.gamma12 == self.gamma
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(invalid(name, format!("{v} is not finite")));
    }
    Ok(())
}

fn non_negative(name: &'static str, v: f64) -> Result<()> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(invalid(name, format!("{v} must be finite and >= 0")));
    }
    Ok(())
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(invalid(name, format!("{v} must be finite and > 0")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn calcium() -> PhysicalParams {
        PhysicalParams {
            mass: 6.642e-26,
            charge: 1.602e-19,
            separation: 30e-6,
            trap_frequency: 2.0 * std::f64::consts::PI * 1e6,
            temperature_ratio: None,
        }
    }

    #[test]
    fn calcium_fixture() {
        // Reference from 40-digit arithmetic with the same constants.
        let eff = effective_model(&calcium()).unwrap();
        assert!((eff.coupling - (-20470.286_724_541_5)).abs() < 1e-7);
        assert!((eff.omega0 - 6_303_655.593_904_128).abs() < 1e-6);
    }

    #[test]
    fn frequency_shift_is_minus_coupling() {
        for d in [5e-6, 30e-6, 1e-3] {
            let p = PhysicalParams { separation: d, ..calcium() };
            let eff = effective_model(&p).unwrap();
            assert!(((eff.omega0 - p.trap_frequency) + eff.coupling).abs() <= 1e-9 * eff.coupling.abs());
            assert!(eff.coupling < 0.0);
            assert!(eff.omega0 > p.trap_frequency);
        }
    }

    #[test]
    fn inverse_cube_law() {
        let a = effective_model(&calcium()).unwrap();
        let b = effective_model(&PhysicalParams { separation: 60e-6, ..calcium() }).unwrap();
        assert!((a.coupling / b.coupling - 8.0).abs() < 1e-12);
    }

    #[test]
    fn coupling_vanishes_at_large_separation() {
        let p = PhysicalParams { separation: 1.0, ..calcium() };
        let eff = effective_model(&p).unwrap();
        assert!(eff.coupling.abs() < 1e-9);
        assert!((eff.omega0 - p.trap_frequency).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(effective_model(&PhysicalParams { mass: 0.0, ..calcium() }).is_err());
        assert!(effective_model(&PhysicalParams { separation: -1.0, ..calcium() }).is_err());
        assert!(effective_model(&PhysicalParams { trap_frequency: 0.0, ..calcium() }).is_err());
    }

    #[test]
    fn bose_values() {
        assert!((bose_occupation(0.1).unwrap() - 9.508_331_944_775_05).abs() < 1e-12);
        assert!((bose_occupation(1.0).unwrap() - 0.581_976_706_869_326_4).abs() < 1e-14);
        assert!(bose_occupation(800.0).unwrap() < 1e-300);
        assert!(bose_occupation(0.0).is_err());
        assert!(bose_occupation(-1.0).is_err());
    }

    #[test]
    fn bose_is_decreasing() {
        let mut prev = f64::INFINITY;
        for i in 1..200 {
            let v = bose_occupation(i as f64 * 0.05).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn cauchy_schwarz_boundary() {
        assert!(ModelParams::new(0.0, 1.0, 0.1, 0.1, 1.0).unwrap().is_decoherence_free());
        assert!(ModelParams::new(0.0, 1.0, 0.1, 0.1000001, 1.0).is_err());
        assert!(ModelParams::new(0.0, 1.0, 0.1, 0.05, -1.0).is_err());
    }
}
