use super::SystemDef;
use crate::poly::{Forcing, Polynomial};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// `R R̈ = −(3/2) Ṙ² − A Ṙ/R − B/R + C/R³ + D − E cos(ωt)`.
///
/// The defaults are a scaled parameter set (equilibrium radius 1, so
/// `D = B − C`) chosen to give a strongly nonlinear but smooth response.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayleighPlessetParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub omega: f64,
}

impl Default for RayleighPlessetParams {
    fn default() -> Self {
        Self {
            a: 0.2,
            b: 0.1,
            c: 1.1,
            d: -1.0,
            e: 0.5,
            omega: 0.5,
        }
    }
}

impl RayleighPlessetParams {
    /// `R̈` of the original equation.
    pub fn acceleration(&self, r: f64, rdot: f64, t: f64, omega: f64) -> f64 {
        (-1.5 * rdot * rdot - self.a * rdot / r - self.b / r + self.c / r.powi(3) + self.d
            - self.e * (omega * t).cos())
            / r
    }
}

fn tag(sys: SystemDef, p: &RayleighPlessetParams) -> SystemDef {
    sys.with_param("A", p.a)
        .with_param("B", p.b)
        .with_param("C", p.c)
        .with_param("D", p.d)
        .with_param("E", p.e)
        .with_param("omega", p.omega)
}

/// The original two-dimensional, non-polynomial field in `(R, Ṙ)`.
pub fn rayleigh_plesset(p: &RayleighPlessetParams) -> SystemDef {
    let q = p.clone();
    let field = Arc::new(move |x: &[f64], t: f64, w: f64, out: &mut [f64]| {
        out[0] = x[1];
        out[1] = q.acceleration(x[0], x[1], t, w);
    });
    tag(SystemDef::general("rayleigh_plesset", 2, field, false), p)
}

/// Polynomial recast in `(R, Ṙ, u = 1/R)`:
///
/// ```text
/// x₁′ = x₂
/// x₂′ = −(3/2) x₂² u − A x₂ u² − B u² + C u⁴ + (D − E cos ωt) u
/// u′  = −x₂ u²
/// ```
///
/// The highest monomial is `C u⁴`, so the degree of nonlinearity is 4.
pub fn rayleigh_plesset_recast(p: &RayleighPlessetParams) -> SystemDef {
    let r = Polynomial::zero(3).with(1.0, &[(1, 1)]);
    let rdot = Polynomial::zero(3)
        .with(-1.5, &[(1, 2), (2, 1)])
        .with(-p.a, &[(1, 1), (2, 2)])
        .with(-p.b, &[(2, 2)])
        .with(p.c, &[(2, 4)])
        .with(p.d, &[(2, 1)])
        .with_forcing(-p.e, &[(2, 1)], Forcing::Cos);
    let u = Polynomial::zero(3).with(-1.0, &[(1, 1), (2, 2)]);
    let consistency = Polynomial::zero(3)
        .with(1.0, &[(0, 1), (2, 1)])
        .with(-1.0, &[]);
    let sys = SystemDef::polynomial("rayleigh_plesset_recast", vec![r, rdot, u], false)
        .with_invariants(vec![consistency])
        .with_lift(2, Arc::new(|x: &[f64]| vec![x[0], x[1], 1.0 / x[0]]));
    tag(sys, p)
}
