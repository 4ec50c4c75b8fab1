//! Macroscopic QED observables for planar magnetoelectric systems.
//!
//! Green tensors of free space, a half-space and a planar cavity at imaginary
//! (and, for decay rates, real) frequency; Casimir pressures, Casimir–Polder
//! and van der Waals potentials, spontaneous decay rates; and the discrete
//! electric–magnetic duality that maps every one of these onto its dual.
//!
//! All quantities are in reduced units `ħ = c = ε₀ = μ₀ = 1`; see [`units`].

// `!(x > 0.0)` is used on purpose so that NaN is rejected with the invalid values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod duality;
pub mod greens;
pub mod materials;
pub mod observables;
pub mod quadrature;
pub mod scenario;
pub mod units;

pub use duality::{
    dualize_green, dualize_scenario, group_power, rotate_dual_pair, transform_materials,
    DualPair, DualityAngle, DualityError, DualityTransform, LocalMedia, PairKind,
};
pub use greens::{
    cavity_reflection_kernel, fresnel_coefficients, halfspace_scattering_green,
    halfspace_scattering_green_real, vacuum_green, GreenError, GreenSet, Mat3, PlanarCavity,
    PlanarHalfSpace, Vec3,
};
pub use materials::{
    validate_model, AtomModel, MaterialError, MaterialModel, Oscillator, OscillatorModel,
    Resonance, Response, Severity, Transition, Validate, Violation,
};
pub use observables::{
    casimir_pressure_planar, cp_potential_halfspace, decay_rate, retarded_local_field_potential,
    two_atom_potential_freespace, Environment, ObservableError, ObservableResult, ResponseKind,
};
pub use quadrature::{Estimate, QuadratureError, QuadratureSettings, Transform};
pub use scenario::{evaluate, AtomEntry, Body, Observable, Scenario, ScenarioError};
pub use units::{Quantity, UnitSystem};
