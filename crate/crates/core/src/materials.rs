//! Dispersive media and atoms.
//!
//! Media are described by Drude–Lorentz oscillator sums for the electric and
//! magnetic susceptibilities; atoms by single-pole polarizability and
//! magnetizability resonances plus a list of dipole transitions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaterialError {
    #[error("imaginary frequency must be non-negative, got {0}")]
    NegativeFrequency(f64),
    #[error("oscillator {index} has zero resonance and zero damping: static response diverges")]
    DivergentStatic { index: usize },
}

/// One Drude–Lorentz term `ω_p² / (ω_T² − ω² − iγω)`.
///
/// `strength` is `ω_p²` (rad²/s² in SI, reduced otherwise).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillator {
    pub strength: f64,
    pub resonance: f64,
    pub damping: f64,
}

impl Oscillator {
    pub fn new(plasma_frequency: f64, resonance: f64, damping: f64) -> Self {
        Self {
            strength: plasma_frequency * plasma_frequency,
            resonance,
            damping,
        }
    }

    /// Drude term: free carriers with no restoring force.
    pub fn drude(plasma_frequency: f64, damping: f64) -> Self {
        Self::new(plasma_frequency, 0.0, damping)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OscillatorModel {
    #[serde(default)]
    pub oscillators: Vec<Oscillator>,
}

impl OscillatorModel {
    pub fn vacuum() -> Self {
        Self::default()
    }

    pub fn single(oscillator: Oscillator) -> Self {
        Self {
            oscillators: vec![oscillator],
        }
    }

    /// `χ(iξ) = Σ ω_p² / (ω_T² + ξ² + γξ)`.
    pub fn susceptibility(&self, xi: f64) -> Result<f64, MaterialError> {
        if !(xi >= 0.0) {
            return Err(MaterialError::NegativeFrequency(xi));
        }
        let mut chi = 0.0;
        for (index, osc) in self.oscillators.iter().enumerate() {
            if osc.resonance == 0.0 && osc.damping == 0.0 {
                return Err(MaterialError::DivergentStatic { index });
            }
            let denom = osc.resonance * osc.resonance + xi * xi + osc.damping * xi;
            chi += osc.strength / denom;
        }
        Ok(chi)
    }

    /// `χ(ω)` on the real axis.
    pub fn susceptibility_real(&self, omega: f64) -> Complex64 {
        self.oscillators
            .iter()
            .map(|osc| {
                let denom = Complex64::new(
                    osc.resonance * osc.resonance - omega * omega,
                    -osc.damping * omega,
                );
                osc.strength / denom
            })
            .sum()
    }

    fn violations(&self, field: &str, out: &mut Vec<Violation>) {
        for (i, osc) in self.oscillators.iter().enumerate() {
            let path = format!("{field}.oscillators[{i}]");
            let finite = osc.strength.is_finite() && osc.resonance.is_finite() && osc.damping.is_finite();
            if !finite {
                out.push(Violation::error(&path, "all oscillator parameters must be finite"));
                continue;
            }
            if osc.strength < 0.0 {
                out.push(Violation::error(
                    format!("{path}.strength"),
                    "positivity: plasma strength ω_p² must be ≥ 0",
                ));
            }
            if osc.resonance < 0.0 {
                out.push(Violation::error(
                    format!("{path}.resonance"),
                    "resonance frequency must be ≥ 0",
                ));
            }
            if osc.damping < 0.0 {
                out.push(Violation::error(
                    format!("{path}.damping"),
                    "passivity: damping must be ≥ 0",
                ));
            }
            if osc.resonance == 0.0 && osc.damping == 0.0 {
                out.push(Violation::error(
                    path.clone(),
                    "zero resonance with zero damping diverges at all frequencies",
                ));
            } else if osc.damping == 0.0 && osc.strength > 0.0 {
                out.push(Violation::flag(
                    format!("{path}.damping"),
                    "lossless oscillator admitted as a limit; real-frequency response has a pole",
                ));
            }
        }
    }

    /// Largest characteristic frequency of the model (0 for vacuum).
    pub fn characteristic_frequency(&self) -> f64 {
        self.oscillators
            .iter()
            .map(|o| o.resonance.max(o.damping).max(o.strength.max(0.0).sqrt()))
            .fold(0.0, f64::max)
    }
}

/// Relative permittivity or permeability as a function of frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Response {
    /// `1 + χ` with `χ` an oscillator sum.
    Oscillators(OscillatorModel),
    /// Frequency-independent value. Not causal; meant for ideal limits only.
    Constant { value: f64 },
    /// Infinite response: a perfect electric (for ε) or magnetic (for μ) conductor.
    Perfect,
}

impl Default for Response {
    fn default() -> Self {
        Response::Oscillators(OscillatorModel::vacuum())
    }
}

impl Response {
    pub fn vacuum() -> Self {
        Self::default()
    }

    pub fn is_vacuum(&self) -> bool {
        match self {
            Response::Oscillators(m) => m.oscillators.iter().all(|o| o.strength == 0.0),
            Response::Constant { value } => *value == 1.0,
            Response::Perfect => false,
        }
    }

    /// Value on the imaginary frequency axis, `ξ ≥ 0`.
    pub fn at_imaginary(&self, xi: f64) -> Result<f64, MaterialError> {
        if !(xi >= 0.0) {
            return Err(MaterialError::NegativeFrequency(xi));
        }
        match self {
            Response::Oscillators(m) => Ok(1.0 + m.susceptibility(xi)?),
            Response::Constant { value } => Ok(*value),
            Response::Perfect => Ok(f64::INFINITY),
        }
    }

    /// Value at a real frequency `ω`.
    pub fn at_real(&self, omega: f64) -> Complex64 {
        match self {
            Response::Oscillators(m) => 1.0 + m.susceptibility_real(omega),
            Response::Constant { value } => Complex64::new(*value, 0.0),
            Response::Perfect => Complex64::new(f64::INFINITY, 0.0),
        }
    }

    fn violations(&self, field: &str, out: &mut Vec<Violation>) {
        match self {
            Response::Oscillators(m) => m.violations(field, out),
            Response::Constant { value } => {
                if !value.is_finite() || *value == 0.0 {
                    out.push(Violation::error(
                        format!("{field}.value"),
                        "constant response must be finite and non-zero",
                    ));
                }
                out.push(Violation::flag(
                    field,
                    "non-causal constant response; excluded from Kramers–Kronig-sensitive claims",
                ));
            }
            Response::Perfect => out.push(Violation::flag(
                field,
                "ideal (infinite) response; non-causal idealisation",
            )),
        }
    }

    fn characteristic_frequency(&self) -> f64 {
        match self {
            Response::Oscillators(m) => m.characteristic_frequency(),
            _ => 0.0,
        }
    }
}

/// A homogeneous, isotropic magnetoelectric medium.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MaterialModel {
    #[serde(default)]
    pub permittivity: Response,
    #[serde(default)]
    pub permeability: Response,
}

impl MaterialModel {
    pub fn vacuum() -> Self {
        Self::default()
    }

    pub fn new(permittivity: Response, permeability: Response) -> Self {
        Self {
            permittivity,
            permeability,
        }
    }

    /// Purely electric medium with `μ = 1`.
    pub fn electric(model: OscillatorModel) -> Self {
        Self::new(Response::Oscillators(model), Response::vacuum())
    }

    /// Purely magnetic medium with `ε = 1`.
    pub fn magnetic(model: OscillatorModel) -> Self {
        Self::new(Response::vacuum(), Response::Oscillators(model))
    }

    pub fn perfect_electric_conductor() -> Self {
        Self::new(Response::Perfect, Response::vacuum())
    }

    pub fn perfect_magnetic_conductor() -> Self {
        Self::new(Response::vacuum(), Response::Perfect)
    }

    pub fn constant(epsilon: f64, mu: f64) -> Self {
        Self::new(
            Response::Constant { value: epsilon },
            Response::Constant { value: mu },
        )
    }

    pub fn is_vacuum(&self) -> bool {
        self.permittivity.is_vacuum() && self.permeability.is_vacuum()
    }

    /// False when either response is a constant or ideal override.
    pub fn is_causal(&self) -> bool {
        matches!(self.permittivity, Response::Oscillators(_))
            && matches!(self.permeability, Response::Oscillators(_))
    }

    pub fn permittivity_at(&self, xi: f64) -> Result<f64, MaterialError> {
        self.permittivity.at_imaginary(xi)
    }

    pub fn permeability_at(&self, xi: f64) -> Result<f64, MaterialError> {
        self.permeability.at_imaginary(xi)
    }

    pub fn permittivity_real(&self, omega: f64) -> Complex64 {
        self.permittivity.at_real(omega)
    }

    pub fn permeability_real(&self, omega: f64) -> Complex64 {
        self.permeability.at_real(omega)
    }

    /// The `ε ↔ μ` exchanged medium.
    pub fn swapped(&self) -> Self {
        Self::new(self.permeability.clone(), self.permittivity.clone())
    }

    pub fn characteristic_frequency(&self) -> f64 {
        self.permittivity
            .characteristic_frequency()
            .max(self.permeability.characteristic_frequency())
    }
}

/// One pole `α_k ω_k² / (ω_k² + ξ²)` of an atomic response function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub strength: f64,
    pub frequency: f64,
}

/// A downward dipole transition `upper → lower` with its matrix elements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub upper: u32,
    pub lower: u32,
    pub frequency: f64,
    pub electric_dipole: [f64; 3],
    pub magnetic_dipole: [f64; 3],
}

/// Isotropic atom: polarizability `α(iξ)`, magnetizability `β(iξ)` and transitions.
///
/// In reduced units `α` is measured in `ε₀L³` and `β` in `L³/μ₀`, so the
/// dual of an atom simply exchanges the two lists.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AtomModel {
    #[serde(default)]
    pub polarizability: Vec<Resonance>,
    #[serde(default)]
    pub magnetizability: Vec<Resonance>,
    #[serde(default)]
    pub transitions: Vec<Transition>,
}

fn pole_sum(resonances: &[Resonance], xi: f64) -> Result<f64, MaterialError> {
    if !(xi >= 0.0) {
        return Err(MaterialError::NegativeFrequency(xi));
    }
    Ok(resonances
        .iter()
        .map(|r| {
            let w2 = r.frequency * r.frequency;
            r.strength * w2 / (w2 + xi * xi)
        })
        .sum())
}

impl AtomModel {
    /// Polarizable atom with a single resonance.
    pub fn polarizable(static_value: f64, frequency: f64) -> Self {
        Self {
            polarizability: vec![Resonance {
                strength: static_value,
                frequency,
            }],
            ..Default::default()
        }
    }

    /// Magnetizable atom with a single resonance.
    pub fn magnetizable(static_value: f64, frequency: f64) -> Self {
        Self {
            magnetizability: vec![Resonance {
                strength: static_value,
                frequency,
            }],
            ..Default::default()
        }
    }

    pub fn with_transition(mut self, t: Transition) -> Self {
        self.transitions.push(t);
        self
    }

    pub fn static_polarizability(&self) -> f64 {
        self.polarizability.iter().map(|r| r.strength).sum()
    }

    pub fn static_magnetizability(&self) -> f64 {
        self.magnetizability.iter().map(|r| r.strength).sum()
    }

    pub fn polarizability_at(&self, xi: f64) -> Result<f64, MaterialError> {
        pole_sum(&self.polarizability, xi)
    }

    pub fn magnetizability_at(&self, xi: f64) -> Result<f64, MaterialError> {
        pole_sum(&self.magnetizability, xi)
    }

    /// Exchanges electric and magnetic properties (`α ↔ β`, `d ↔ m` in reduced units).
    pub fn swapped(&self) -> Self {
        Self {
            polarizability: self.magnetizability.clone(),
            magnetizability: self.polarizability.clone(),
            transitions: self
                .transitions
                .iter()
                .map(|t| Transition {
                    electric_dipole: t.magnetic_dipole,
                    magnetic_dipole: t.electric_dipole,
                    ..*t
                })
                .collect(),
        }
    }

    pub fn characteristic_frequency(&self) -> f64 {
        self.polarizability
            .iter()
            .chain(&self.magnetizability)
            .map(|r| r.frequency)
            .chain(self.transitions.iter().map(|t| t.frequency))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    /// Invariant broken; the model must not be used.
    Error,
    /// Admissible but flagged (non-causal or limiting model).
    Flag,
}

/// A broken or flagged model invariant, naming the offending field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub invariant: String,
    pub severity: Severity,
}

impl Violation {
    fn error(field: impl Into<String>, invariant: &str) -> Self {
        Self {
            field: field.into(),
            invariant: invariant.into(),
            severity: Severity::Error,
        }
    }

    fn flag(field: impl Into<String>, invariant: &str) -> Self {
        Self {
            field: field.into(),
            invariant: invariant.into(),
            severity: Severity::Flag,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Flag => "flag",
        };
        write!(f, "{tag}: {}: {}", self.field, self.invariant)
    }
}

/// Model types that can check their own invariants.
pub trait Validate {
    fn violations(&self) -> Vec<Violation>;
}

impl Validate for MaterialModel {
    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        self.permittivity.violations("permittivity", &mut out);
        self.permeability.violations("permeability", &mut out);
        if matches!(self.permittivity, Response::Perfect)
            && matches!(self.permeability, Response::Perfect)
        {
            out.push(Violation::error(
                "permittivity",
                "ε and μ cannot both be infinite (reflection undefined)",
            ));
        }
        out
    }
}

impl Validate for AtomModel {
    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (name, list) in [
            ("polarizability", &self.polarizability),
            ("magnetizability", &self.magnetizability),
        ] {
            for (i, r) in list.iter().enumerate() {
                if !(r.strength >= 0.0 && r.strength.is_finite()) {
                    out.push(Violation::error(
                        format!("{name}[{i}].strength"),
                        "static strength must be finite and ≥ 0",
                    ));
                }
                if !(r.frequency > 0.0 && r.frequency.is_finite()) {
                    out.push(Violation::error(
                        format!("{name}[{i}].frequency"),
                        "resonance frequency must be finite and > 0",
                    ));
                }
            }
        }
        for (i, t) in self.transitions.iter().enumerate() {
            if !(t.frequency > 0.0 && t.frequency.is_finite()) {
                out.push(Violation::error(
                    format!("transitions[{i}].frequency"),
                    "downward transition frequency must be finite and > 0",
                ));
            }
            if t.upper <= t.lower {
                out.push(Violation::error(
                    format!("transitions[{i}]"),
                    "upper state index must exceed lower state index",
                ));
            }
            if t.electric_dipole.iter().chain(&t.magnetic_dipole).any(|v| !v.is_finite()) {
                out.push(Violation::error(
                    format!("transitions[{i}]"),
                    "dipole matrix elements must be finite",
                ));
            }
        }
        out
    }
}

/// Checks any model's invariants; empty iff all hold.
pub fn validate_model<M: Validate + ?Sized>(model: &M) -> Vec<Violation> {
    model.violations()
}
