//! Dispersion potentials, Casimir pressure and spontaneous decay rates.
//!
//! Reduced units (`ħ = c = ε₀ = μ₀ = 1`). Each integral over the imaginary
//! frequency `ξ` uses the caller's [`QuadratureSettings`]; inner transverse
//! integrals run in `κ = √(ξ² + k∥²)` with an exponential map.

use crate::greens::{
    cavity_kernel_at, halfspace_scattering_green_real, kappa_integral, kappa_settings,
    vacuum_green, vacuum_im_green_coincident, GreenError, Mat3, PlanarCavity, PlanarHalfSpace,
    ScatteringKernel, Vec3,
};
use crate::materials::{AtomModel, MaterialError, MaterialModel};
use crate::quadrature::{
    at_node, integrate_semi_infinite, integrate_semi_infinite_carrying,
    integrate_semi_infinite_inner, QuadratureError,
    QuadratureSettings,
};
use crate::units::Quantity;
use serde::{Deserialize, Serialize};
use std::cell::OnceCell;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObservableError {
    #[error("{0}")]
    Invalid(String),
    #[error(
        "atom at z = {0} lies inside the medium; local-field corrections via the \
         real-cavity model would be required and are not implemented"
    )]
    EmbeddedAtom(f64),
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

impl ObservableError {
    /// True when the failure is a quadrature non-convergence or non-finite integrand.
    pub fn is_quadrature(&self) -> bool {
        matches!(
            self,
            ObservableError::Quadrature(_) | ObservableError::Green(GreenError::Quadrature(_))
        )
    }
}

/// A computed observable in reduced units, with its error estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableResult {
    pub value: f64,
    pub quantity: Quantity,
    pub quadrature_error: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_si: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario_hash: Option<String>,
    pub settings: QuadratureSettings,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notices: Vec<String>,
}

impl ObservableResult {
    pub fn new(value: f64, error: f64, quantity: Quantity, settings: &QuadratureSettings) -> Self {
        Self {
            value,
            quantity,
            quadrature_error: error,
            value_si: None,
            scenario_hash: None,
            settings: *settings,
            notices: Vec::new(),
        }
    }

    pub fn with_notice(mut self, notice: impl Into<String>) -> Self {
        self.notices.push(notice.into());
        self
    }
}

/// Tolerances for inner integrals, tight enough that their accumulated error
/// stays below the outer target.
fn inner_settings(settings: &QuadratureSettings) -> QuadratureSettings {
    let mut inner = kappa_settings(settings);
    inner.rel_tol = (settings.rel_tol * 0.1).max(5e-15);
    inner.abs_tol = settings.abs_tol * 0.1;
    inner
}

/// Transform scale for `ξ`: the smaller of the dominant response frequency
/// (fallback 1, i.e. `ω_ref`) and the geometric frequency `c/(2L)`.
fn frequency_scale(dominant: f64, length: f64) -> f64 {
    let dominant = if dominant > 0.0 { dominant } else { 1.0 };
    dominant.min(0.5 / length)
}

fn causality_notice(materials: &[&MaterialModel]) -> Option<String> {
    materials
        .iter()
        .any(|m| !m.is_causal() && !m.is_vacuum())
        .then(|| {
            "non-causal (constant or ideal) response used in a full-spectrum integral".to_string()
        })
}

/// Casimir pressure between the two half-spaces of a planar cavity.
///
/// `P = −(1/2π²) ∫₀^∞ dξ ∫_ξ^∞ dκ κ² Σ_σ x_σ/(1 − x_σ)`, with
/// `x_σ = r_σL r_σR e^{−2κa}`. Negative values attract.
pub fn casimir_pressure_planar(
    cavity: &PlanarCavity,
    settings: &QuadratureSettings,
) -> Result<ObservableResult, ObservableError> {
    if !(cavity.gap > 0.0) {
        return Err(GreenError::NonPositiveGap(cavity.gap).into());
    }
    settings.validate()?;
    if cavity.left.is_vacuum() || cavity.right.is_vacuum() {
        return Ok(ObservableResult::new(0.0, 0.0, Quantity::Pressure, settings));
    }
    let a = cavity.gap;
    let inner = inner_settings(settings);
    let scale = frequency_scale(
        cavity
            .left
            .characteristic_frequency()
            .max(cavity.right.characteristic_frequency()),
        a,
    );
    let green_failure = OnceCell::new();
    let est = integrate_semi_infinite_carrying(
        |xi| {
            let inner_est = integrate_semi_infinite_inner(
                |q| {
                    let kappa = xi + q;
                    match cavity_kernel_at(q * (2.0 * xi + q), kappa, xi, cavity) {
                        Ok(k) => kappa * kappa * k.pressure_weight(),
                        Err(e) => {
                            let _ = green_failure.set(e);
                            f64::NAN
                        }
                    }
                },
                &inner,
                0.5 / a,
            )
            .map_err(|e| at_node(e, xi))?;
            Ok((inner_est.value, inner_est.error))
        },
        settings,
        scale,
    );
    if let Some(e) = green_failure.into_inner() {
        return Err(e.into());
    }
    let est = est?;
    let factor = -1.0 / (2.0 * PI * PI);
    let result = ObservableResult::new(
        factor * est.value,
        factor.abs() * est.error,
        Quantity::Pressure,
        settings,
    );
    Ok(match causality_notice(&[&cavity.left, &cavity.right]) {
        Some(n) => result.with_notice(n),
        None => result,
    })
}

/// Ground-state Casimir–Polder potential of an atom at height `z` above a half-space:
///
/// `U = (1/2π) ∫₀^∞ dξ [α(iξ) Tr G⁽¹⁾_ee + β(iξ) Tr G⁽¹⁾_mm]`.
pub fn cp_potential_halfspace(
    atom: &AtomModel,
    hs: &PlanarHalfSpace,
    z: f64,
    settings: &QuadratureSettings,
) -> Result<ObservableResult, ObservableError> {
    if !(z > 0.0) {
        return Err(ObservableError::EmbeddedAtom(z));
    }
    settings.validate()?;
    let no_response = atom.polarizability.is_empty() && atom.magnetizability.is_empty();
    if hs.material.is_vacuum() || no_response {
        return Ok(ObservableResult::new(0.0, 0.0, Quantity::Energy, settings));
    }
    let inner = inner_settings(settings);
    let scale = frequency_scale(
        atom.characteristic_frequency()
            .max(hs.material.characteristic_frequency()),
        z,
    );
    let mut material_failure = None;
    let est = integrate_semi_infinite_carrying(
        |xi| {
            let response = (|| -> Result<_, MaterialError> {
                Ok((
                    atom.polarizability_at(xi)?,
                    atom.magnetizability_at(xi)?,
                    hs.material.permittivity_at(xi)?,
                    hs.material.permeability_at(xi)?,
                ))
            })();
            let (alpha, beta, eps, mu) = match response {
                Ok(v) => v,
                Err(e) => {
                    material_failure.get_or_insert(e);
                    return Err(QuadratureError::NonFinite { at: xi });
                }
            };
            kappa_integral(z, xi, &inner, |q| {
                let k = ScatteringKernel::at(q, xi, eps, mu);
                alpha * k.ee_trace() + beta * k.mm_trace()
            })
            .map_err(|e| at_node(e, xi))
        },
        settings,
        scale,
    );
    if let Some(e) = material_failure {
        return Err(e.into());
    }
    let est = est?;
    let factor = 1.0 / (2.0 * PI);
    let result = ObservableResult::new(
        factor * est.value,
        factor * est.error,
        Quantity::Energy,
        settings,
    );
    Ok(match causality_notice(&[&hs.material]) {
        Some(n) => result.with_notice(n),
        None => result,
    })
}

/// Integrand of the free-space two-atom potential at imaginary frequency `ξ`
/// (without the `−1/2π` prefactor): the four-term trace
/// `αα G_ee·G_ee + αβ G_em·G_me + βα G_me·G_em + ββ G_mm·G_mm`.
pub fn two_atom_integrand(
    atom_a: &AtomModel,
    atom_b: &AtomModel,
    pos_a: Vec3,
    pos_b: Vec3,
    xi: f64,
) -> Result<f64, ObservableError> {
    let ab = vacuum_green(pos_a, pos_b, xi)?;
    let ba = vacuum_green(pos_b, pos_a, xi)?;
    let alpha_a = atom_a.polarizability_at(xi)?;
    let beta_a = atom_a.magnetizability_at(xi)?;
    let alpha_b = atom_b.polarizability_at(xi)?;
    let beta_b = atom_b.magnetizability_at(xi)?;
    let tr = |x: &Mat3, y: &Mat3| (x * y).trace();
    Ok(alpha_a * alpha_b * tr(&ab.ee, &ba.ee)
        + alpha_a * beta_b * tr(&ab.em, &ba.me)
        + beta_a * alpha_b * tr(&ab.me, &ba.em)
        + beta_a * beta_b * tr(&ab.mm, &ba.mm))
}

/// Ground-state van der Waals potential of two atoms in free space at separation `r`.
///
/// `U = −(1/2π) ∫₀^∞ dξ Tr{…}` with all four electric/magnetic terms.
pub fn two_atom_potential_freespace(
    atom_a: &AtomModel,
    atom_b: &AtomModel,
    separation: f64,
    settings: &QuadratureSettings,
) -> Result<ObservableResult, ObservableError> {
    if !(separation > 0.0 && separation.is_finite()) {
        return Err(ObservableError::Invalid(format!(
            "atom separation must be positive, got {separation}"
        )));
    }
    settings.validate()?;
    let pos_a = Vec3::zeros();
    let pos_b = Vec3::new(0.0, 0.0, separation);
    let scale = frequency_scale(
        atom_a
            .characteristic_frequency()
            .max(atom_b.characteristic_frequency()),
        separation,
    );
    let failure = OnceCell::new();
    let est = integrate_semi_infinite(
        |xi| match two_atom_integrand(atom_a, atom_b, pos_a, pos_b, xi) {
            Ok(v) => v,
            Err(e) => {
                let _ = failure.set(e);
                f64::NAN
            }
        },
        settings,
        scale,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let est = est?;
    let factor = -1.0 / (2.0 * PI);
    Ok(ObservableResult::new(
        factor * est.value,
        factor.abs() * est.error,
        Quantity::Energy,
        settings,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseKind {
    Electric,
    Magnetic,
}

impl ResponseKind {
    pub fn dual(self) -> Self {
        match self {
            ResponseKind::Electric => ResponseKind::Magnetic,
            ResponseKind::Magnetic => ResponseKind::Electric,
        }
    }
}

/// Closed-form retarded potential of two atoms embedded in a medium with
/// constant `(ε, μ)`, including real-cavity local-field corrections.
///
/// Electric: `U = −1863 α_A α_B ε² / [64π³ √(εμ) (2ε+1)⁴ r⁷]`;
/// magnetic: `U = −1863 β_A β_B μ² / [64π³ √(εμ) (2μ+1)⁴ r⁷]` (reduced units).
pub fn retarded_local_field_potential(
    kind: ResponseKind,
    strength_a: f64,
    strength_b: f64,
    epsilon: f64,
    mu: f64,
    separation: f64,
) -> Result<f64, ObservableError> {
    for (name, v) in [("ε", epsilon), ("μ", mu), ("r", separation)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(ObservableError::Invalid(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    let local = match kind {
        ResponseKind::Electric => epsilon,
        ResponseKind::Magnetic => mu,
    };
    let coefficient =
        1863.0 * local * local / ((2.0 * local + 1.0).powi(4) * (epsilon * mu).sqrt());
    Ok(-coefficient * strength_a * strength_b / (64.0 * PI.powi(3) * separation.powi(7)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Environment<'a> {
    Vacuum,
    HalfSpace(&'a PlanarHalfSpace),
}

/// Spontaneous decay rate of state `state` of an atom at height `z`:
///
/// `Γ = 2 Σ_{k<n} [d·Im G_ee(ω_nk)·d + m·Im G_mm(ω_nk)·m]`.
pub fn decay_rate(
    atom: &AtomModel,
    environment: Environment<'_>,
    z: f64,
    state: u32,
    settings: &QuadratureSettings,
) -> Result<ObservableResult, ObservableError> {
    settings.validate()?;
    if let Environment::HalfSpace(_) = environment {
        if !(z > 0.0) {
            return Err(ObservableError::EmbeddedAtom(z));
        }
    }
    let channels: Vec<_> = atom
        .transitions
        .iter()
        .filter(|t| t.upper == state && t.lower < state && t.frequency > 0.0)
        .collect();
    if channels.is_empty() {
        return Ok(ObservableResult::new(0.0, 0.0, Quantity::Rate, settings).with_notice(format!(
            "state {state} has no downward transitions; rate is zero"
        )));
    }
    let mut rate = 0.0;
    let mut error = 0.0;
    // Sum of |contributions|: the scale the tolerance refers to, since the
    // free and scattering parts may cancel (e.g. a dipole parallel to a mirror).
    let mut scale = 0.0;
    let partial = inner_settings(settings).with_transform(settings.transform);
    for t in channels {
        let omega = t.frequency;
        let d = Vec3::from(t.electric_dipole);
        let m = Vec3::from(t.magnetic_dipole);
        let free = vacuum_im_green_coincident(omega);
        let (mut im_ee, mut im_mm) = (Mat3::identity() * free, Mat3::identity() * free);
        let (mut scat_ee, mut scat_mm) = (Mat3::zeros(), Mat3::zeros());
        if let Environment::HalfSpace(hs) = environment {
            let scat = halfspace_scattering_green_real(z, omega, hs, &partial)?;
            scat_ee = scat.im_ee;
            scat_mm = scat.im_mm;
            im_ee += scat_ee;
            im_mm += scat_mm;
            error += 2.0 * scat.quadrature_error * (d.norm_squared() + m.norm_squared());
        }
        rate += 2.0 * (d.dot(&(im_ee * d)) + m.dot(&(im_mm * m)));
        let abs_quad = |g: &Mat3, v: &Vec3| v.abs().dot(&(g.abs() * v.abs()));
        scale += 2.0
            * (free * (d.norm_squared() + m.norm_squared())
                + abs_quad(&scat_ee, &d)
                + abs_quad(&scat_mm, &m));
    }
    if error > settings.target(scale) {
        return Err(QuadratureError::NonConvergence {
            value: rate,
            error,
            subdivisions: settings.max_subdivisions,
            node: None,
        }
        .into());
    }
    Ok(ObservableResult::new(rate, error, Quantity::Rate, settings))
}
