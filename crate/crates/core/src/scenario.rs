//! TOML scenario files: materials, bodies, atoms, one observable and
//! quadrature settings. Scenarios are validated before evaluation and hashed
//! over their canonical serialisation.

use crate::greens::{PlanarCavity, PlanarHalfSpace, Vec3};
use crate::materials::{validate_model, AtomModel, MaterialModel, Violation};
use crate::observables::{
    casimir_pressure_planar, cp_potential_halfspace, decay_rate, retarded_local_field_potential,
    two_atom_potential_freespace, Environment, ObservableError, ObservableResult, ResponseKind,
};
use crate::quadrature::{QuadratureError, QuadratureSettings};
use crate::units::{Quantity, UnitSystem};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported schema_version {found} (this build reads version {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("{path}: unknown material '{name}'")]
    UnknownMaterial { path: String, name: String },
    #[error("{path}: unknown atom '{name}'")]
    UnknownAtom { path: String, name: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("{path}.{}: {}", .violation.field, .violation.invariant)]
    Model { path: String, violation: Violation },
    #[error("quadrature: {0}")]
    Quadrature(QuadratureError),
    #[error("parameter '{path}': {message}")]
    Parameter { path: String, message: String },
    #[error(transparent)]
    Observable(#[from] ObservableError),
}

impl ScenarioError {
    fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        ScenarioError::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True when evaluation failed inside the integrator rather than on input.
    pub fn is_quadrature(&self) -> bool {
        matches!(self, ScenarioError::Observable(e) if e.is_quadrature())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Body {
    /// Material filling `z < 0`; vacuum above.
    HalfSpace { material: String },
    /// Two half-spaces bounding a vacuum gap of width `gap`.
    Cavity {
        left: String,
        right: String,
        gap: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomEntry {
    pub name: String,
    pub position: [f64; 3],
    #[serde(default)]
    pub model: AtomModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Observable {
    /// Pressure on the plates of the (single) cavity body.
    Casimir,
    /// Ground-state potential of `atom` above the (single) half-space body.
    CasimirPolder { atom: String },
    /// Free-space potential between two atoms.
    VanDerWaals { atom_a: String, atom_b: String },
    /// Spontaneous decay of `atom` from excited state `state`.
    DecayRate { atom: String, state: u32 },
    /// Closed-form retarded potential of two atoms in a homogeneous medium.
    RetardedFormula {
        response: ResponseKind,
        strength_a: f64,
        strength_b: f64,
        epsilon: f64,
        mu: f64,
        separation: f64,
    },
}

impl Observable {
    pub fn quantity(&self) -> Quantity {
        match self {
            Observable::Casimir => Quantity::Pressure,
            Observable::DecayRate { .. } => Quantity::Rate,
            _ => Quantity::Energy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    #[serde(default)]
    pub units: UnitSystem,
    pub observable: Observable,
    #[serde(default)]
    pub quadrature: QuadratureSettings,
    #[serde(default)]
    pub materials: BTreeMap<String, MaterialModel>,
    #[serde(default)]
    pub bodies: Vec<Body>,
    #[serde(default)]
    pub atoms: Vec<AtomEntry>,
}

impl Scenario {
    pub fn new(observable: Observable) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            units: UnitSystem::Reduced,
            observable,
            quadrature: QuadratureSettings::default(),
            materials: BTreeMap::new(),
            bodies: Vec::new(),
            atoms: Vec::new(),
        }
    }

    pub fn with_material(mut self, name: &str, model: MaterialModel) -> Self {
        self.materials.insert(name.to_string(), model);
        self
    }

    pub fn with_body(mut self, body: Body) -> Self {
        self.bodies.push(body);
        self
    }

    pub fn with_atom(mut self, name: &str, position: [f64; 3], model: AtomModel) -> Self {
        self.atoms.push(AtomEntry {
            name: name.to_string(),
            position,
            model,
        });
        self
    }

    pub fn with_quadrature(mut self, settings: QuadratureSettings) -> Self {
        self.quadrature = settings;
        self
    }

    /// Parses and validates a scenario. Parse errors carry line and column.
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario =
            toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Canonical serialisation: fixed field order, sorted material names.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario types always serialise to TOML")
    }

    /// SHA-256 of the canonical serialisation, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml_string().as_bytes()))
    }

    pub fn atom(&self, name: &str) -> Option<&AtomEntry> {
        self.atoms.iter().find(|a| a.name == name)
    }

    fn resolve_atom(&self, path: &str, name: &str) -> Result<&AtomEntry, ScenarioError> {
        self.atom(name).ok_or_else(|| ScenarioError::UnknownAtom {
            path: path.to_string(),
            name: name.to_string(),
        })
    }

    fn resolve_material(&self, path: String, name: &str) -> Result<&MaterialModel, ScenarioError> {
        self.materials
            .get(name)
            .ok_or_else(|| ScenarioError::UnknownMaterial {
                path,
                name: name.to_string(),
            })
    }

    fn half_spaces(&self) -> Result<Vec<PlanarHalfSpace>, ScenarioError> {
        let mut out = Vec::new();
        for (i, b) in self.bodies.iter().enumerate() {
            if let Body::HalfSpace { material } = b {
                let m = self.resolve_material(format!("bodies[{i}].material"), material)?;
                out.push(PlanarHalfSpace::new(m.clone()));
            }
        }
        Ok(out)
    }

    fn cavities(&self) -> Result<Vec<PlanarCavity>, ScenarioError> {
        let mut out = Vec::new();
        for (i, b) in self.bodies.iter().enumerate() {
            if let Body::Cavity { left, right, gap } = b {
                out.push(PlanarCavity {
                    left: self.resolve_material(format!("bodies[{i}].left"), left)?.clone(),
                    right: self.resolve_material(format!("bodies[{i}].right"), right)?.clone(),
                    gap: *gap,
                });
            }
        }
        Ok(out)
    }

    /// Checks every invariant. Returns admissible-but-flagged findings as notices.
    pub fn validate(&self) -> Result<Vec<String>, ScenarioError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ScenarioError::SchemaVersion {
                found: self.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        self.quadrature.validate().map_err(ScenarioError::Quadrature)?;
        if let UnitSystem::Si { omega_ref } = self.units {
            if !(omega_ref > 0.0 && omega_ref.is_finite()) {
                return Err(ScenarioError::invalid(
                    "units.omega_ref",
                    "reference frequency must be positive",
                ));
            }
        }

        let mut notices = Vec::new();
        let mut absorb = |path: String, violations: Vec<Violation>| {
            for v in violations {
                if v.is_error() {
                    return Err(ScenarioError::Model {
                        path: path.clone(),
                        violation: v,
                    });
                }
                notices.push(format!("{path}.{}: {}", v.field, v.invariant));
            }
            Ok(())
        };
        for (name, m) in &self.materials {
            absorb(format!("materials.{name}"), validate_model(m))?;
        }
        for (i, a) in self.atoms.iter().enumerate() {
            absorb(format!("atoms[{i}].model"), validate_model(&a.model))?;
            if a.position.iter().any(|x| !x.is_finite()) {
                return Err(ScenarioError::invalid(
                    format!("atoms[{i}].position"),
                    "coordinates must be finite",
                ));
            }
            if self.atoms[..i].iter().any(|b| b.name == a.name) {
                return Err(ScenarioError::invalid(
                    format!("atoms[{i}].name"),
                    format!("duplicate atom name '{}'", a.name),
                ));
            }
        }
        for (i, b) in self.bodies.iter().enumerate() {
            if let Body::Cavity { gap, .. } = b {
                if !(*gap > 0.0 && gap.is_finite()) {
                    return Err(ScenarioError::invalid(
                        format!("bodies[{i}].gap"),
                        "cavity gap must be positive and finite",
                    ));
                }
            }
        }
        let half_spaces = self.half_spaces()?;
        let cavities = self.cavities()?;

        let require_atom_above = |name: &str, path: &str| -> Result<(), ScenarioError> {
            let atom = self.resolve_atom(path, name)?;
            if !half_spaces.is_empty() && !(atom.position[2] > 0.0) {
                let idx = self.atoms.iter().position(|a| a.name == name).unwrap_or(0);
                return Err(ScenarioError::invalid(
                    format!("atoms[{idx}].position"),
                    ObservableError::EmbeddedAtom(atom.position[2]).to_string(),
                ));
            }
            Ok(())
        };

        match &self.observable {
            Observable::Casimir => {
                if cavities.len() != 1 || !half_spaces.is_empty() {
                    return Err(ScenarioError::invalid(
                        "bodies",
                        "casimir requires exactly one cavity body and nothing else",
                    ));
                }
            }
            Observable::CasimirPolder { atom } => {
                if half_spaces.len() != 1 || !cavities.is_empty() {
                    return Err(ScenarioError::invalid(
                        "bodies",
                        "casimir_polder requires exactly one half_space body",
                    ));
                }
                require_atom_above(atom, "observable.atom")?;
            }
            Observable::DecayRate { atom, .. } => {
                if half_spaces.len() > 1 || !cavities.is_empty() {
                    return Err(ScenarioError::invalid(
                        "bodies",
                        "decay_rate supports free space or a single half_space body",
                    ));
                }
                require_atom_above(atom, "observable.atom")?;
            }
            Observable::VanDerWaals { atom_a, atom_b } => {
                if !self.bodies.is_empty() {
                    return Err(ScenarioError::invalid(
                        "bodies",
                        "van_der_waals is evaluated in free space; remove all bodies",
                    ));
                }
                let a = self.resolve_atom("observable.atom_a", atom_a)?;
                let b = self.resolve_atom("observable.atom_b", atom_b)?;
                if separation(a, b) == 0.0 {
                    return Err(ScenarioError::invalid(
                        "observable",
                        "the two atoms are at the same position",
                    ));
                }
            }
            Observable::RetardedFormula {
                strength_a,
                strength_b,
                epsilon,
                mu,
                separation,
                ..
            } => {
                for (name, v) in [
                    ("epsilon", epsilon),
                    ("mu", mu),
                    ("separation", separation),
                ] {
                    if !(*v > 0.0 && v.is_finite()) {
                        return Err(ScenarioError::invalid(
                            format!("observable.{name}"),
                            "must be positive and finite",
                        ));
                    }
                }
                for (name, v) in [("strength_a", strength_a), ("strength_b", strength_b)] {
                    if !v.is_finite() {
                        return Err(ScenarioError::invalid(
                            format!("observable.{name}"),
                            "must be finite",
                        ));
                    }
                }
            }
        }
        Ok(notices)
    }

    /// A copy with the numeric value at dotted `path` replaced, e.g.
    /// `bodies.0.gap` or `atoms.1.position.2`. The result is revalidated.
    pub fn with_parameter(&self, path: &str, value: f64) -> Result<Scenario, ScenarioError> {
        let fail = |message: String| ScenarioError::Parameter {
            path: path.to_string(),
            message,
        };
        let mut root = toml::Value::try_from(self).map_err(|e| fail(e.to_string()))?;
        let mut node = &mut root;
        for segment in path.split('.') {
            node = match node {
                toml::Value::Table(t) => t.get_mut(segment),
                toml::Value::Array(a) => segment.parse::<usize>().ok().and_then(|i| a.get_mut(i)),
                _ => None,
            }
            .ok_or_else(|| fail(format!("no field '{segment}'")))?;
        }
        match node {
            toml::Value::Float(_) => *node = toml::Value::Float(value),
            toml::Value::Integer(_) if value.fract() == 0.0 && value.abs() < 2f64.powi(53) => {
                *node = toml::Value::Integer(value as i64)
            }
            toml::Value::Integer(_) => return Err(fail(format!("integer field cannot take {value}"))),
            other => return Err(fail(format!("not numeric ({})", other.type_str()))),
        }
        let scenario: Scenario = root.try_into().map_err(|e: toml::de::Error| fail(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }
}

fn separation(a: &AtomEntry, b: &AtomEntry) -> f64 {
    (Vec3::from(a.position) - Vec3::from(b.position)).norm()
}

/// Validates and evaluates a scenario's observable.
pub fn evaluate(scenario: &Scenario) -> Result<ObservableResult, ScenarioError> {
    let notices = scenario.validate()?;
    let settings = &scenario.quadrature;
    let entry = |name: &str| scenario.resolve_atom("observable", name);
    let mut result = match &scenario.observable {
        Observable::Casimir => casimir_pressure_planar(&scenario.cavities()?[0], settings)?,
        Observable::CasimirPolder { atom } => {
            let a = entry(atom)?;
            let hs = &scenario.half_spaces()?[0];
            cp_potential_halfspace(&a.model, hs, a.position[2], settings)?
        }
        Observable::VanDerWaals { atom_a, atom_b } => {
            let (a, b) = (entry(atom_a)?, entry(atom_b)?);
            two_atom_potential_freespace(&a.model, &b.model, separation(a, b), settings)?
        }
        Observable::DecayRate { atom, state } => {
            let a = entry(atom)?;
            let hs = scenario.half_spaces()?;
            let env = match hs.first() {
                Some(h) => Environment::HalfSpace(h),
                None => Environment::Vacuum,
            };
            decay_rate(&a.model, env, a.position[2], *state, settings)?
        }
        Observable::RetardedFormula {
            response,
            strength_a,
            strength_b,
            epsilon,
            mu,
            separation,
        } => {
            let u = retarded_local_field_potential(
                *response,
                *strength_a,
                *strength_b,
                *epsilon,
                *mu,
                *separation,
            )?;
            ObservableResult::new(u, 0.0, Quantity::Energy, settings)
        }
    };
    result.notices.extend(notices);
    result.value_si = scenario.units.to_si(result.quantity, result.value);
    result.scenario_hash = Some(scenario.hash());
    Ok(result)
}
