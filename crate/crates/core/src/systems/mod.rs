//! Dynamical systems `ẋ = f(x, t)` and the three application models.

mod crtbp;
mod duffing;
mod rayleigh_plesset;

pub use crtbp::{
    crtbp, crtbp_recast, effective_potential, libration_point_x, potential_gradient, CrtbpParams,
    LibrationPoint, EARTH_MOON_MU,
};
pub use duffing::{duffing_system, linear_oscillator, DuffingParams};
pub use rayleigh_plesset::{rayleigh_plesset, rayleigh_plesset_recast, RayleighPlessetParams};

use crate::poly::Polynomial;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// `f(x, t, ω, out)`.
pub type FieldFn = dyn Fn(&[f64], f64, f64, &mut [f64]) + Send + Sync;
/// Maps a physical state onto the full (recast) state.
pub type LiftFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

#[derive(Clone)]
pub enum VectorField {
    /// One polynomial per state component.
    Polynomial(Arc<Vec<Polynomial>>),
    General(Arc<FieldFn>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Degree {
    Finite(u32),
    NonPolynomial,
}

/// Immutable description of a dynamical system.
#[derive(Clone)]
pub struct SystemDef {
    name: String,
    dim: usize,
    field: VectorField,
    autonomous: bool,
    params: BTreeMap<String, f64>,
    invariants: Vec<Polynomial>,
    physical_dim: usize,
    lift: Option<Arc<LiftFn>>,
    phase_anchor: Option<usize>,
}

impl fmt::Debug for SystemDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemDef")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("degree", &self.degree())
            .field("autonomous", &self.autonomous)
            .field("params", &self.params)
            .finish()
    }
}

impl SystemDef {
    pub fn polynomial(name: &str, components: Vec<Polynomial>, autonomous: bool) -> Self {
        let dim = components.len();
        assert!(
            components.iter().all(|p| p.dim() == dim),
            "polynomial dimension mismatch"
        );
        Self {
            name: name.to_string(),
            dim,
            field: VectorField::Polynomial(Arc::new(components)),
            autonomous,
            params: BTreeMap::new(),
            invariants: Vec::new(),
            physical_dim: dim,
            lift: None,
            phase_anchor: autonomous.then_some(0),
        }
    }

    pub fn general(name: &str, dim: usize, field: Arc<FieldFn>, autonomous: bool) -> Self {
        Self {
            name: name.to_string(),
            dim,
            field: VectorField::General(field),
            autonomous,
            params: BTreeMap::new(),
            invariants: Vec::new(),
            physical_dim: dim,
            lift: None,
            phase_anchor: autonomous.then_some(0),
        }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    /// Algebraic constraints `g(x) = 0` that the periodic solution must satisfy
    /// (for instance `u·R − 1` after recasting).
    pub fn with_invariants(mut self, invariants: Vec<Polynomial>) -> Self {
        self.invariants = invariants;
        self
    }

    pub fn with_lift(mut self, physical_dim: usize, lift: Arc<LiftFn>) -> Self {
        self.physical_dim = physical_dim;
        self.lift = Some(lift);
        self
    }

    pub fn with_phase_anchor(mut self, coordinate: Option<usize>) -> Self {
        self.phase_anchor = coordinate;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_autonomous(&self) -> bool {
        self.autonomous
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn invariants(&self) -> &[Polynomial] {
        &self.invariants
    }

    pub fn physical_dim(&self) -> usize {
        self.physical_dim
    }

    pub fn phase_anchor(&self) -> Option<usize> {
        self.phase_anchor
    }

    pub fn field(&self) -> &VectorField {
        &self.field
    }

    pub fn polynomials(&self) -> Option<&[Polynomial]> {
        match &self.field {
            VectorField::Polynomial(p) => Some(p),
            VectorField::General(_) => None,
        }
    }

    pub fn degree(&self) -> Degree {
        match &self.field {
            VectorField::Polynomial(p) => {
                Degree::Finite(p.iter().map(Polynomial::degree).max().unwrap_or(0).max(1))
            }
            VectorField::General(_) => Degree::NonPolynomial,
        }
    }

    pub fn degree_phi(&self) -> Option<u32> {
        match self.degree() {
            Degree::Finite(d) => Some(d),
            Degree::NonPolynomial => None,
        }
    }

    pub fn eval(&self, x: &[f64], t: f64, omega: f64, out: &mut [f64]) {
        match &self.field {
            VectorField::Polynomial(p) => {
                let phase = omega * t;
                for (o, poly) in out.iter_mut().zip(p.iter()) {
                    *o = poly.eval(x, phase);
                }
            }
            VectorField::General(f) => f(x, t, omega, out),
        }
    }

    pub fn eval_vec(&self, x: &[f64], t: f64, omega: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval(x, t, omega, &mut out);
        out
    }

    /// Completes a physical state with auxiliary (recast) variables.
    pub fn lift_state(&self, physical: &[f64]) -> Vec<f64> {
        match &self.lift {
            Some(l) => l(physical),
            None => physical.to_vec(),
        }
    }
}

/// `ẋ = λx` for a scalar state; its only periodic solution is zero.
pub fn linear_system(lambda: f64) -> SystemDef {
    SystemDef::polynomial(
        "linear",
        vec![Polynomial::zero(1).with(lambda, &[(0, 1)])],
        true,
    )
    .with_param("lambda", lambda)
    .with_phase_anchor(None)
}
