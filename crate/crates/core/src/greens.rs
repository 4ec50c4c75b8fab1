//! Dyadic Green tensors with the electric/magnetic index convention.
//!
//! A left (right) index `e` multiplies the bare tensor `G` by `−ξ/c` from the
//! left (right); a left `m` applies `∇×`, a right `m` applies `×∇′`. On the
//! imaginary axis this gives
//!
//! ```text
//! G_ee = ξ² G,   G_em = −ξ G×∇′,   G_me = −ξ ∇×G,   G_mm = ∇×G×∇′
//! ```
//!
//! All blocks are real there. At real frequencies the electric and magnetic
//! blocks are normalised as `ω² G` (and its dual), so that `Im G_ee` is
//! positive and reproduces the free-space emission rate.
//!
//! Reduced units (`c = 1`) throughout.

use crate::materials::{MaterialError, MaterialModel};
use crate::quadrature::{
    integrate_interval_inner, integrate_semi_infinite_inner, QuadratureError,
    QuadratureSettings, Transform,
};
use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

pub type Mat3 = Matrix3<f64>;
pub type Vec3 = Vector3<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GreenError {
    #[error("evaluation height must be above the interface (z > 0), got {0}")]
    NonPositiveHeight(f64),
    #[error("frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),
    #[error("coincident points need the scattering part; the bulk tensor is singular")]
    CoincidentPoints,
    #[error("cavity gap must be positive, got {0}")]
    NonPositiveGap(f64),
    #[error("cavity round-trip denominator for {polarization}-polarisation is {value:e} ≤ 0")]
    CavityDenominator { polarization: char, value: f64 },
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Symbolic coefficients of `δ(r − r′) I` carried by the `ee` and `mm` blocks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DeltaCoefficients {
    pub ee: f64,
    pub mm: f64,
}

/// The four labelled blocks of the Green tensor at a pair of points and an
/// imaginary frequency `ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenSet {
    pub ee: Mat3,
    pub em: Mat3,
    pub me: Mat3,
    pub mm: Mat3,
    /// Only the geometry-induced (bulk-subtracted) part is represented.
    pub scattering_only: bool,
    pub delta: DeltaCoefficients,
    pub field_point: Vec3,
    pub source_point: Vec3,
    pub xi: f64,
    /// Largest quadrature error estimate over all block entries (0 if analytic).
    pub quadrature_error: f64,
}

impl GreenSet {
    pub fn zero(field_point: Vec3, source_point: Vec3, xi: f64, scattering_only: bool) -> Self {
        Self {
            ee: Mat3::zeros(),
            em: Mat3::zeros(),
            me: Mat3::zeros(),
            mm: Mat3::zeros(),
            scattering_only,
            delta: DeltaCoefficients::default(),
            field_point,
            source_point,
            xi,
            quadrature_error: 0.0,
        }
    }

    pub fn is_coincident(&self) -> bool {
        self.field_point == self.source_point
    }

    pub fn blocks(&self) -> [&Mat3; 4] {
        [&self.ee, &self.em, &self.me, &self.mm]
    }

    /// Largest blockwise relative deviation from `other`, measured against the
    /// largest entry of either set.
    pub fn max_relative_difference(&self, other: &GreenSet) -> f64 {
        let scale = self
            .blocks()
            .iter()
            .chain(other.blocks().iter())
            .map(|m| m.amax())
            .fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        self.blocks()
            .iter()
            .zip(other.blocks())
            .map(|(a, b)| (*a - b).amax())
            .fold(0.0, f64::max)
            / scale
    }
}

/// Cross-product matrix: `cross_matrix(v) * w == v × w`.
pub fn cross_matrix(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Bulk vacuum Green set for `r ≠ r′` at imaginary frequency `ξ`.
pub fn vacuum_green(field_point: Vec3, source_point: Vec3, xi: f64) -> Result<GreenSet, GreenError> {
    if !(xi > 0.0) {
        return Err(GreenError::NonPositiveFrequency(xi));
    }
    let sep = field_point - source_point;
    let rho = sep.norm();
    if rho == 0.0 {
        return Err(GreenError::CoincidentPoints);
    }
    let dir = sep / rho;
    let x = xi * rho;
    let decay = (-x).exp();
    let g = decay / (4.0 * PI * rho);
    let a = 1.0 + 1.0 / x + 1.0 / (x * x);
    let b = 1.0 + 3.0 / x + 3.0 / (x * x);
    let bare = (Mat3::identity() * a - dir * dir.transpose() * b) * g;
    // dg/dρ of the scalar e^{−ξρ}/(4πρ)
    let dg = -decay * (1.0 + x) / (4.0 * PI * rho * rho);
    let curl = cross_matrix(&dir) * dg;
    Ok(GreenSet {
        ee: bare * (xi * xi),
        em: curl * xi,
        me: curl * (-xi),
        mm: bare * (xi * xi),
        scattering_only: false,
        delta: DeltaCoefficients::default(),
        field_point,
        source_point,
        xi,
        quadrature_error: 0.0,
    })
}

/// `Im G_ee(r, r, ω)` of free space under the adopted real-frequency
/// normalisation: `ω³/(6π) I` (also equal to `Im G_mm`).
pub fn vacuum_im_green_coincident(omega: f64) -> f64 {
    omega.powi(3) / (6.0 * PI)
}

/// Fresnel coefficients `(r_s, r_p)` of a vacuum/medium interface at
/// imaginary frequency `ξ` and in-plane wave number `k∥`.
pub fn fresnel_coefficients(k_par: f64, xi: f64, epsilon: f64, mu: f64) -> (f64, f64) {
    let k2 = k_par * k_par;
    reflection(k2, (xi * xi + k2).sqrt(), xi, epsilon, mu)
}

/// Fresnel coefficients from `k∥²` and `κ = √(ξ² + k∥²)`.
pub(crate) fn reflection(k_par_sq: f64, kappa: f64, xi: f64, epsilon: f64, mu: f64) -> (f64, f64) {
    match (epsilon.is_infinite(), mu.is_infinite()) {
        (true, true) => (f64::NAN, f64::NAN),
        (true, false) => (-1.0, 1.0),
        (false, true) => (1.0, -1.0),
        (false, false) => {
            // (μκ − κ₁)/(μκ + κ₁) with the numerator rationalised: for weak
            // media and k∥ ≫ ξ the direct difference cancels catastrophically.
            let kappa_medium = (epsilon * mu * xi * xi + k_par_sq).sqrt();
            let xi2 = xi * xi;
            let den_s = mu * kappa + kappa_medium;
            let den_p = epsilon * kappa + kappa_medium;
            let rs = ((mu * mu - 1.0) * k_par_sq + mu * (mu - epsilon) * xi2) / (den_s * den_s);
            let rp = ((epsilon * epsilon - 1.0) * k_par_sq + epsilon * (epsilon - mu) * xi2)
                / (den_p * den_p);
            (rs, rp)
        }
    }
}

/// Fresnel coefficients at a real frequency `ω` for a (possibly complex)
/// normal wave number `k_z` with `k∥² = ω² − k_z²`.
pub(crate) fn reflection_real(
    kz: Complex64,
    k_par_sq: f64,
    omega: f64,
    epsilon: Complex64,
    mu: Complex64,
) -> (Complex64, Complex64) {
    let one = Complex64::new(1.0, 0.0);
    match (epsilon.re.is_infinite(), mu.re.is_infinite()) {
        (true, true) => (Complex64::new(f64::NAN, 0.0), Complex64::new(f64::NAN, 0.0)),
        (true, false) => (-one, one),
        (false, true) => (one, -one),
        (false, false) => {
            let mut kz_medium = (epsilon * mu * omega * omega - k_par_sq).sqrt();
            if kz_medium.im < 0.0 || (kz_medium.im == 0.0 && kz_medium.re < 0.0) {
                kz_medium = -kz_medium;
            }
            // Rationalised as on the imaginary axis: μ²k_z² − k_z1² is
            // (1 − μ²)k∥² + μ(μ − ε)ω², free of cancellation for large k∥.
            let w2 = omega * omega;
            let den_s = mu * kz + kz_medium;
            let den_p = epsilon * kz + kz_medium;
            let rs = ((one - mu * mu) * k_par_sq + mu * (mu - epsilon) * w2) / (den_s * den_s);
            let rp = ((one - epsilon * epsilon) * k_par_sq + epsilon * (epsilon - mu) * w2)
                / (den_p * den_p);
            (rs, rp)
        }
    }
}

/// Vacuum above (`z > 0`), `material` filling `z < 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarHalfSpace {
    pub material: MaterialModel,
}

impl PlanarHalfSpace {
    pub fn new(material: MaterialModel) -> Self {
        Self { material }
    }
}

/// Two half-spaces, `left` for `z < 0` and `right` for `z > gap`, vacuum between.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarCavity {
    pub left: MaterialModel,
    pub right: MaterialModel,
    pub gap: f64,
}

/// Integrand components of the coincident-point scattering Green set above a
/// half-space, per unit `e^{−2κz}/(8π)` and in the variable `κ ∈ [ξ, ∞)`.
///
/// With `k∥² = κ² − ξ²`:
///
/// ```text
/// ee:  (ξ² r_s − κ² r_p)(xx + yy) − 2k∥² r_p zz
/// mm:  (ξ² r_p − κ² r_s)(xx + yy) − 2k∥² r_s zz
/// em = me:  ξκ (r_p − r_s)(xy − yx)
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringKernel {
    pub ee_parallel: f64,
    pub ee_normal: f64,
    pub mm_parallel: f64,
    pub mm_normal: f64,
    pub cross: f64,
}

impl ScatteringKernel {
    /// `q = κ − ξ ≥ 0`; `(ε, μ)` are the medium values at `ξ`.
    pub fn at(q: f64, xi: f64, epsilon: f64, mu: f64) -> Self {
        let kappa = xi + q;
        let k_par_sq = q * (2.0 * xi + q);
        let (rs, rp) = reflection(k_par_sq, kappa, xi, epsilon, mu);
        let xi2 = xi * xi;
        let kappa2 = kappa * kappa;
        Self {
            ee_parallel: xi2 * rs - kappa2 * rp,
            ee_normal: -2.0 * k_par_sq * rp,
            mm_parallel: xi2 * rp - kappa2 * rs,
            mm_normal: -2.0 * k_par_sq * rs,
            cross: xi * kappa * (rp - rs),
        }
    }

    pub fn ee_trace(&self) -> f64 {
        2.0 * self.ee_parallel + self.ee_normal
    }

    pub fn mm_trace(&self) -> f64 {
        2.0 * self.mm_parallel + self.mm_normal
    }
}

/// Inner-integral settings derived from the outer ones: exponential map in `κ − ξ`.
pub(crate) fn kappa_settings(settings: &QuadratureSettings) -> QuadratureSettings {
    settings.with_transform(Transform::ExpDecay)
}

/// `∫_ξ^∞ dκ e^{−2κz} h(κ) / (8π)`, integrating over `q = κ − ξ`.
pub(crate) fn kappa_integral<H>(
    z: f64,
    xi: f64,
    settings: &QuadratureSettings,
    h: H,
) -> Result<(f64, f64), QuadratureError>
where
    H: Fn(f64) -> f64,
{
    let prefactor = (-2.0 * xi * z).exp() / (8.0 * PI);
    if prefactor == 0.0 {
        return Ok((0.0, 0.0));
    }
    let est = integrate_semi_infinite_inner(
        |q| (-2.0 * q * z).exp() * h(q),
        &kappa_settings(settings),
        0.5 / z,
    )?;
    Ok((prefactor * est.value, prefactor * est.error))
}

/// Scattering part of the Green set at `r = r′ = (0, 0, z)` above a half-space.
pub fn halfspace_scattering_green(
    z: f64,
    xi: f64,
    hs: &PlanarHalfSpace,
    settings: &QuadratureSettings,
) -> Result<GreenSet, GreenError> {
    if !(z > 0.0) {
        return Err(GreenError::NonPositiveHeight(z));
    }
    if !(xi > 0.0) {
        return Err(GreenError::NonPositiveFrequency(xi));
    }
    let point = Vec3::new(0.0, 0.0, z);
    let mut set = GreenSet::zero(point, point, xi, true);
    if hs.material.is_vacuum() {
        return Ok(set);
    }
    let eps = hs.material.permittivity_at(xi)?;
    let mu = hs.material.permeability_at(xi)?;
    let component = |pick: fn(&ScatteringKernel) -> f64| {
        kappa_integral(z, xi, settings, |q| pick(&ScatteringKernel::at(q, xi, eps, mu)))
    };
    let (ee_par, e1) = component(|k| k.ee_parallel)?;
    let (ee_zz, e2) = component(|k| k.ee_normal)?;
    let (mm_par, e3) = component(|k| k.mm_parallel)?;
    let (mm_zz, e4) = component(|k| k.mm_normal)?;
    let (cross, e5) = component(|k| k.cross)?;

    set.ee = Mat3::from_diagonal(&Vec3::new(ee_par, ee_par, ee_zz));
    set.mm = Mat3::from_diagonal(&Vec3::new(mm_par, mm_par, mm_zz));
    let antisym = Mat3::new(0.0, cross, 0.0, -cross, 0.0, 0.0, 0.0, 0.0, 0.0);
    set.em = antisym;
    set.me = antisym;
    set.quadrature_error = [e1, e2, e3, e4, e5].into_iter().fold(0.0, f64::max);
    Ok(set)
}

/// Imaginary parts of the coincident scattering blocks at a real frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealFrequencyScattering {
    pub im_ee: Mat3,
    pub im_mm: Mat3,
    pub quadrature_error: f64,
}

/// `Im G⁽¹⁾_ee` and `Im G⁽¹⁾_mm` at `r = r′ = (0, 0, z)` and real frequency `ω`.
///
/// The `k∥` integral is split into the propagating part (`k_z ∈ [0, ω]`) and
/// the evanescent part (`k_z = iκ`, `κ ∈ [0, ∞)`).
pub fn halfspace_scattering_green_real(
    z: f64,
    omega: f64,
    hs: &PlanarHalfSpace,
    settings: &QuadratureSettings,
) -> Result<RealFrequencyScattering, GreenError> {
    if !(z > 0.0) {
        return Err(GreenError::NonPositiveHeight(z));
    }
    if !(omega > 0.0) {
        return Err(GreenError::NonPositiveFrequency(omega));
    }
    if hs.material.is_vacuum() {
        return Ok(RealFrequencyScattering {
            im_ee: Mat3::zeros(),
            im_mm: Mat3::zeros(),
            quadrature_error: 0.0,
        });
    }
    let eps = hs.material.permittivity_real(omega);
    let mu = hs.material.permeability_real(omega);
    let w2 = omega * omega;

    // Each closure returns [ee_par, ee_zz, mm_par, mm_zz] for one component index.
    let propagating = |kz: f64, which: usize| {
        let k_par_sq = w2 - kz * kz;
        let (rs, rp) = reflection_real(Complex64::new(kz, 0.0), k_par_sq, omega, eps, mu);
        let phase = Complex64::from_polar(1.0, 2.0 * kz * z);
        let term = match which {
            0 => w2 * rs - kz * kz * rp,
            1 => 2.0 * k_par_sq * rp,
            2 => w2 * rp - kz * kz * rs,
            _ => 2.0 * k_par_sq * rs,
        };
        (phase * term).re
    };
    let evanescent = |kappa: f64, which: usize| {
        let k_par_sq = w2 + kappa * kappa;
        let (rs, rp) = reflection_real(Complex64::new(0.0, kappa), k_par_sq, omega, eps, mu);
        let term = match which {
            0 => w2 * rs + kappa * kappa * rp,
            1 => 2.0 * k_par_sq * rp,
            2 => w2 * rp + kappa * kappa * rs,
            _ => 2.0 * k_par_sq * rs,
        };
        (-2.0 * kappa * z).exp() * term.im
    };

    let evanescent_settings = kappa_settings(settings);
    let mut values = [0.0; 4];
    let mut error = 0.0f64;
    for (which, slot) in values.iter_mut().enumerate() {
        // Both pieces are partial sums of one component: converge each against
        // its L1 norm; `decay_rate` certifies the assembled rate.
        let p = integrate_interval_inner(|kz| propagating(kz, which), 0.0, omega, settings)?;
        let e = integrate_semi_infinite_inner(
            |k| evanescent(k, which),
            &evanescent_settings,
            0.5 / z,
        )?;
        *slot = (p.value + e.value) / (8.0 * PI);
        error = error.max((p.error + e.error) / (8.0 * PI));
    }
    Ok(RealFrequencyScattering {
        im_ee: Mat3::from_diagonal(&Vec3::new(values[0], values[0], values[1])),
        im_mm: Mat3::from_diagonal(&Vec3::new(values[2], values[2], values[3])),
        quadrature_error: error,
    })
}

/// Round-trip factor `r_L r_R e^{−2κa}` and denominator `1 − r_L r_R e^{−2κa}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundTrip {
    pub factor: f64,
    pub denominator: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityKernel {
    pub s: RoundTrip,
    pub p: RoundTrip,
}

impl CavityKernel {
    /// `Σ_σ x_σ/(1 − x_σ)`, the pressure integrand per unit `κ²`.
    pub fn pressure_weight(&self) -> f64 {
        self.s.factor / self.s.denominator + self.p.factor / self.p.denominator
    }
}

/// Round-trip reflection factors of a planar cavity at `(k∥, ξ)`.
pub fn cavity_reflection_kernel(
    k_par: f64,
    xi: f64,
    cavity: &PlanarCavity,
) -> Result<CavityKernel, GreenError> {
    if !(xi > 0.0) {
        return Err(GreenError::NonPositiveFrequency(xi));
    }
    let k2 = k_par * k_par;
    cavity_kernel_at(k2, (xi * xi + k2).sqrt(), xi, cavity)
}

pub(crate) fn cavity_kernel_at(
    k_par_sq: f64,
    kappa: f64,
    xi: f64,
    cavity: &PlanarCavity,
) -> Result<CavityKernel, GreenError> {
    if !(cavity.gap > 0.0) {
        return Err(GreenError::NonPositiveGap(cavity.gap));
    }
    let (ls, lp) = side_reflection(&cavity.left, k_par_sq, kappa, xi)?;
    let (rs, rp) = side_reflection(&cavity.right, k_par_sq, kappa, xi)?;
    let attenuation = (-2.0 * kappa * cavity.gap).exp();
    let trip = |pol: char, a: f64, b: f64| {
        let factor = a * b * attenuation;
        let denominator = 1.0 - factor;
        if denominator > 0.0 {
            Ok(RoundTrip {
                factor,
                denominator,
            })
        } else {
            Err(GreenError::CavityDenominator {
                polarization: pol,
                value: denominator,
            })
        }
    };
    Ok(CavityKernel {
        s: trip('s', ls, rs)?,
        p: trip('p', lp, rp)?,
    })
}

fn side_reflection(
    material: &MaterialModel,
    k_par_sq: f64,
    kappa: f64,
    xi: f64,
) -> Result<(f64, f64), GreenError> {
    if material.is_vacuum() {
        return Ok((0.0, 0.0));
    }
    Ok(reflection(
        k_par_sq,
        kappa,
        xi,
        material.permittivity_at(xi)?,
        material.permeability_at(xi)?,
    ))
}
