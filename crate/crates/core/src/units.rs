//! Reduced units (`ħ = c = ε₀ = μ₀ = 1`) and conversion to SI at output.
//!
//! A reference angular frequency `ω_ref` fixes the scale: frequencies are in
//! units of `ω_ref`, lengths in `c/ω_ref`, energies in `ħω_ref`.
//! Polarizabilities are measured in `ε₀(c/ω_ref)³` and magnetizabilities in
//! `(c/ω_ref)³/μ₀`, so the duality exchange `α ↔ β/c²` is a plain swap of
//! the reduced numbers.

use serde::{Deserialize, Serialize};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const EPSILON_0: f64 = 8.854_187_818_8e-12;
pub const MU_0: f64 = 1.256_637_061_27e-6;

/// Physical dimension of an observable value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Pressure,
    Energy,
    Rate,
}

impl Quantity {
    pub fn si_symbol(self) -> &'static str {
        match self {
            Quantity::Pressure => "Pa",
            Quantity::Energy => "J",
            Quantity::Rate => "1/s",
        }
    }

    pub fn reduced_symbol(self) -> &'static str {
        match self {
            Quantity::Pressure => "hbar*omega_ref^4/c^3",
            Quantity::Energy => "hbar*omega_ref",
            Quantity::Rate => "omega_ref",
        }
    }

    /// SI value of one reduced unit of this quantity.
    pub fn si_factor(self, omega_ref: f64) -> f64 {
        match self {
            Quantity::Pressure => HBAR * omega_ref.powi(4) / SPEED_OF_LIGHT.powi(3),
            Quantity::Energy => HBAR * omega_ref,
            Quantity::Rate => omega_ref,
        }
    }
}

/// Unit system declared by a scenario file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "snake_case")]
pub enum UnitSystem {
    #[default]
    Reduced,
    /// Inputs remain reduced; results are additionally reported in SI using `omega_ref` [rad/s].
    Si { omega_ref: f64 },
}

impl UnitSystem {
    pub fn to_si(&self, quantity: Quantity, reduced: f64) -> Option<f64> {
        match *self {
            UnitSystem::Reduced => None,
            UnitSystem::Si { omega_ref } => Some(reduced * quantity.si_factor(omega_ref)),
        }
    }
}
