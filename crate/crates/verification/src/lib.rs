//! Random but valid scenario generators for the acceptance suite.
//!
//! Every generator draws from a caller-supplied RNG, so a seed fixes the
//! whole scenario set.

use mqed_core::{
    AtomModel, Body, MaterialModel, Observable, Oscillator, OscillatorModel, QuadratureSettings,
    Resonance, Response, Scenario, Transition,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn oscillators<R: Rng>(rng: &mut R) -> OscillatorModel {
    let n = rng.random_range(1..=2);
    OscillatorModel {
        oscillators: (0..n)
            .map(|_| {
                let plasma = rng.random_range(0.2..3.0);
                let damping = rng.random_range(0.02..0.5);
                if rng.random_bool(0.2) {
                    Oscillator::drude(plasma, damping)
                } else {
                    Oscillator::new(plasma, rng.random_range(0.2..3.0), damping)
                }
            })
            .collect(),
    }
}

/// Electric, magnetic or magnetoelectric oscillator medium.
pub fn material<R: Rng>(rng: &mut R) -> MaterialModel {
    match rng.random_range(0..3) {
        0 => MaterialModel::electric(oscillators(rng)),
        1 => MaterialModel::magnetic(oscillators(rng)),
        _ => MaterialModel::new(
            Response::Oscillators(oscillators(rng)),
            Response::Oscillators(oscillators(rng)),
        ),
    }
}

fn resonances<R: Rng>(rng: &mut R) -> Vec<Resonance> {
    (0..rng.random_range(1..=2))
        .map(|_| Resonance {
            strength: rng.random_range(1e-4..1e-2),
            frequency: rng.random_range(0.3..3.0),
        })
        .collect()
}

/// Ground-state atom: polarizable, magnetizable, or both.
pub fn ground_atom<R: Rng>(rng: &mut R) -> AtomModel {
    let mut atom = AtomModel::default();
    match rng.random_range(0..3) {
        0 => atom.polarizability = resonances(rng),
        1 => atom.magnetizability = resonances(rng),
        _ => {
            atom.polarizability = resonances(rng);
            atom.magnetizability = resonances(rng);
        }
    }
    atom
}

fn vector<R: Rng>(rng: &mut R, scale: f64) -> [f64; 3] {
    [0; 3].map(|_| rng.random_range(-scale..scale))
}

/// Excited atom with one or two downward transitions out of state 1.
pub fn excited_atom<R: Rng>(rng: &mut R) -> AtomModel {
    let mut atom = AtomModel::default();
    for _ in 0..rng.random_range(1..=2) {
        let electric = rng.random_bool(0.7);
        let magnetic = !electric || rng.random_bool(0.5);
        atom = atom.with_transition(Transition {
            upper: 1,
            lower: 0,
            frequency: rng.random_range(0.3..3.0),
            electric_dipole: if electric { vector(rng, 0.1) } else { [0.0; 3] },
            magnetic_dipole: if magnetic { vector(rng, 0.1) } else { [0.0; 3] },
        });
    }
    atom
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Casimir,
    CasimirPolder,
    VanDerWaals,
    Decay,
}

pub const KINDS: [Kind; 4] = [Kind::Casimir, Kind::CasimirPolder, Kind::VanDerWaals, Kind::Decay];

pub fn scenario<R: Rng>(rng: &mut R, kind: Kind, settings: QuadratureSettings) -> Scenario {
    let s = match kind {
        Kind::Casimir => Scenario::new(Observable::Casimir)
            .with_material("left", material(rng))
            .with_material("right", material(rng))
            .with_body(Body::Cavity {
                left: "left".into(),
                right: "right".into(),
                gap: rng.random_range(0.2..5.0),
            }),
        Kind::CasimirPolder => {
            let z = rng.random_range(0.1..5.0);
            Scenario::new(Observable::CasimirPolder { atom: "A".into() })
                .with_material("plate", material(rng))
                .with_body(Body::HalfSpace {
                    material: "plate".into(),
                })
                .with_atom("A", [0.0, 0.0, z], ground_atom(rng))
        }
        Kind::VanDerWaals => {
            let r = rng.random_range(0.3..10.0);
            let theta: f64 = rng.random_range(0.0..std::f64::consts::PI);
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let b = [
                r * theta.sin() * phi.cos(),
                r * theta.sin() * phi.sin(),
                r * theta.cos(),
            ];
            Scenario::new(Observable::VanDerWaals {
                atom_a: "A".into(),
                atom_b: "B".into(),
            })
            .with_atom("A", [0.0; 3], ground_atom(rng))
            .with_atom("B", b, ground_atom(rng))
        }
        Kind::Decay => {
            let z = rng.random_range(0.1..3.0);
            let s = Scenario::new(Observable::DecayRate {
                atom: "A".into(),
                state: 1,
            })
            .with_atom("A", [0.0, 0.0, z], excited_atom(rng));
            if rng.random_bool(0.8) {
                s.with_material("plate", material(rng)).with_body(Body::HalfSpace {
                    material: "plate".into(),
                })
            } else {
                s
            }
        }
    };
    s.with_quadrature(settings)
}
