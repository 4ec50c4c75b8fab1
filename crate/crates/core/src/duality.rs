//! Electric–magnetic duality: the rotation of dual field pairs, its action on
//! media and atoms, and the induced transformation of Green sets.
//!
//! Field pairs `(√ε₀E, √μ₀H)`, `(√μ₀D, √ε₀B)` and `(√μ₀P, √ε₀μ₀M)` rotate under
//! the continuous group of angles `θ`. Constitutive relations with `ε ≠ μ`
//! survive only quarter turns `θ = nπ/2`, a cyclic group of order four whose
//! generator swaps `ε ↔ μ` and `α ↔ β/c²`.

use crate::greens::{GreenSet, Vec3};
use crate::materials::{AtomModel, MaterialModel};
use crate::scenario::{Observable, Scenario};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DualityError {
    #[error(
        "θ = {theta} is not a quarter turn and ε ≠ μ: constitutive relations \
         acquire off-diagonal residual (μ − ε)·sinθ·cosθ = {residual}"
    )]
    NonQuarterTurn { theta: f64, residual: f64 },
    #[error("singular duality transform: {which} = {value} at the {point} point")]
    Singular {
        which: &'static str,
        value: f64,
        point: &'static str,
    },
    #[error("coincident points must share the same local ε and μ")]
    InconsistentMedia,
}

/// A duality angle; quarter turns are kept as exact integers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityAngle {
    theta: f64,
    quarter_turns: Option<i64>,
}

impl DualityAngle {
    pub fn quarter_turns(n: i64) -> Self {
        Self {
            theta: n as f64 * FRAC_PI_2,
            quarter_turns: Some(n),
        }
    }

    /// Angle in radians; snapped to a quarter turn when within 1e-12 of one.
    pub fn radians(theta: f64) -> Self {
        let turns = theta / FRAC_PI_2;
        let nearest = turns.round();
        if (turns - nearest).abs() <= 1e-12 * nearest.abs().max(1.0) {
            Self::quarter_turns(nearest as i64)
        } else {
            Self {
                theta,
                quarter_turns: None,
            }
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn as_quarter_turns(&self) -> Option<i64> {
        self.quarter_turns
    }

    /// `(cos θ, sin θ)`, exact for quarter turns.
    pub fn cos_sin(&self) -> (f64, f64) {
        match self.quarter_turns.map(|n| n.rem_euclid(4)) {
            Some(0) => (1.0, 0.0),
            Some(1) => (0.0, 1.0),
            Some(2) => (-1.0, 0.0),
            Some(3) => (0.0, -1.0),
            _ => (self.theta.cos(), self.theta.sin()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairKind {
    /// `(√ε₀ E, √μ₀ H)`
    EH,
    /// `(√μ₀ D, √ε₀ B)`
    DB,
    /// `(√μ₀ P, √ε₀ μ₀ M)`
    PM,
}

/// Two rescaled fields sharing units, mixed by the duality rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualPair {
    pub x: Vec3,
    pub y: Vec3,
    pub kind: PairKind,
}

impl DualPair {
    pub fn new(kind: PairKind, x: Vec3, y: Vec3) -> Self {
        Self { x, y, kind }
    }
}

/// `(x, y) → (x cosθ + y sinθ, −x sinθ + y cosθ)`.
pub fn rotate_dual_pair(pair: &DualPair, angle: DualityAngle) -> DualPair {
    let (c, s) = angle.cos_sin();
    DualPair {
        x: pair.x * c + pair.y * s,
        y: pair.y * c - pair.x * s,
        kind: pair.kind,
    }
}

/// Transformed `(ε*, μ*)`.
///
/// Quarter turns mix the diagonal entries with `cos²θ`, `sin²θ`; any angle is
/// allowed when `ε = μ`. Otherwise the rotated constitutive matrix has the
/// off-diagonal residual reported in the error.
pub fn transform_materials(
    epsilon: f64,
    mu: f64,
    angle: DualityAngle,
) -> Result<(f64, f64), DualityError> {
    if let Some(n) = angle.as_quarter_turns() {
        return Ok(if n.rem_euclid(2) == 0 {
            (epsilon, mu)
        } else {
            (mu, epsilon)
        });
    }
    if epsilon == mu {
        return Ok((epsilon, mu));
    }
    let (c, s) = angle.cos_sin();
    Err(DualityError::NonQuarterTurn {
        theta: angle.theta(),
        residual: (mu - epsilon) * s * c,
    })
}

/// Element `θ = nπ/2` of the discrete duality group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DualityTransform {
    quarter_turns: u8,
}

/// `n`-th power of the generator `θ = π/2`.
pub fn group_power(n: i64) -> DualityTransform {
    DualityTransform {
        quarter_turns: n.rem_euclid(4) as u8,
    }
}

impl DualityTransform {
    pub fn identity() -> Self {
        group_power(0)
    }

    pub fn generator() -> Self {
        group_power(1)
    }

    pub fn quarter_turns(&self) -> u8 {
        self.quarter_turns
    }

    pub fn angle(&self) -> DualityAngle {
        DualityAngle::quarter_turns(self.quarter_turns as i64)
    }

    pub fn compose(&self, other: &Self) -> Self {
        group_power(self.quarter_turns as i64 + other.quarter_turns as i64)
    }

    /// Odd powers exchange electric and magnetic properties of media and atoms.
    pub fn swaps_media(&self) -> bool {
        self.quarter_turns % 2 == 1
    }

    pub fn apply_pair(&self, pair: &DualPair) -> DualPair {
        rotate_dual_pair(pair, self.angle())
    }

    pub fn apply_material(&self, material: &MaterialModel) -> MaterialModel {
        if self.swaps_media() {
            material.swapped()
        } else {
            material.clone()
        }
    }

    pub fn apply_atom(&self, atom: &AtomModel) -> AtomModel {
        if self.swaps_media() {
            atom.swapped()
        } else {
            atom.clone()
        }
    }
}

/// Local medium values at the field (`r`) and source (`r′`) points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalMedia {
    pub epsilon_field: f64,
    pub mu_field: f64,
    pub epsilon_source: f64,
    pub mu_source: f64,
}

impl LocalMedia {
    pub fn vacuum() -> Self {
        Self {
            epsilon_field: 1.0,
            mu_field: 1.0,
            epsilon_source: 1.0,
            mu_source: 1.0,
        }
    }

    /// Media after `ε ↔ μ`.
    pub fn swapped(&self) -> Self {
        Self {
            epsilon_field: self.mu_field,
            mu_field: self.epsilon_field,
            epsilon_source: self.mu_source,
            mu_source: self.epsilon_source,
        }
    }
}

/// Green set of the `ε ↔ μ` exchanged system:
///
/// ```text
/// G*_ee = μ(r)⁻¹ G_mm μ(r′)⁻¹ + μ(r)⁻¹ δ
/// G*_em = −μ(r)⁻¹ G_me ε(r′)
/// G*_me = −ε(r) G_em μ(r′)⁻¹
/// G*_mm = ε(r) G_ee ε(r′) − ε(r) δ
/// ```
///
/// Smooth parts are transformed numerically, δ terms through the symbolic
/// coefficients. Scattering-only sets never acquire δ terms, and neither do
/// sets at distinct points.
pub fn dualize_green(g: &GreenSet, media: &LocalMedia) -> Result<GreenSet, DualityError> {
    let checks = [
        ("ε", media.epsilon_field, "field"),
        ("μ", media.mu_field, "field"),
        ("ε", media.epsilon_source, "source"),
        ("μ", media.mu_source, "source"),
    ];
    for (which, value, point) in checks {
        if value == 0.0 || !value.is_finite() {
            return Err(DualityError::Singular {
                which,
                value,
                point,
            });
        }
    }
    let coincident = g.is_coincident();
    if coincident
        && (media.epsilon_field != media.epsilon_source || media.mu_field != media.mu_source)
    {
        return Err(DualityError::InconsistentMedia);
    }
    let LocalMedia {
        epsilon_field: eps_r,
        mu_field: mu_r,
        epsilon_source: eps_s,
        mu_source: mu_s,
    } = *media;

    let mut out = g.clone();
    out.ee = g.mm / (mu_r * mu_s);
    out.em = -g.me * (eps_s / mu_r);
    out.me = -g.em * (eps_r / mu_s);
    out.mm = g.ee * (eps_r * eps_s);
    out.delta.ee = g.delta.mm / (mu_r * mu_s);
    out.delta.mm = g.delta.ee * (eps_r * eps_s);
    if !g.scattering_only && coincident {
        out.delta.ee += 1.0 / mu_r;
        out.delta.mm -= eps_r;
    }
    Ok(out)
}

/// The dual scenario: every material has `ε ↔ μ`, every atom `α ↔ β` and
/// `d ↔ m`; geometry, units and settings are unchanged. Applying it twice
/// returns the original scenario.
pub fn dualize_scenario(scenario: &Scenario) -> Scenario {
    let generator = DualityTransform::generator();
    let mut out = scenario.clone();
    for m in out.materials.values_mut() {
        *m = generator.apply_material(m);
    }
    for a in &mut out.atoms {
        a.model = generator.apply_atom(&a.model);
    }
    if let Observable::RetardedFormula {
        response,
        epsilon,
        mu,
        ..
    } = &mut out.observable
    {
        *response = response.dual();
        std::mem::swap(epsilon, mu);
    }
    out
}
