use super::SystemDef;
use crate::error::{HbError, Result};
use crate::poly::{Forcing, Polynomial};
use serde::{Deserialize, Serialize};

/// `ẍ + cẋ + kx + Σ αᵢ x^φᵢ = F sin(ωt)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DuffingParams {
    pub c: f64,
    pub k: f64,
    /// `(α, φ)` pairs; a single `(α, 3)` is the cubic oscillator.
    pub terms: Vec<(f64, u32)>,
    pub force: f64,
    pub omega: f64,
}

impl Default for DuffingParams {
    fn default() -> Self {
        Self {
            c: 0.1,
            k: 1.0,
            terms: vec![(1.0, 3)],
            force: 1.0,
            omega: 2.0,
        }
    }
}

impl DuffingParams {
    pub fn single(c: f64, k: f64, alpha: f64, phi: u32, force: f64, omega: f64) -> Self {
        Self {
            c,
            k,
            terms: vec![(alpha, phi)],
            force,
            omega,
        }
    }
}

/// First-order form `x₁′ = x₂`, `x₂′ = −c x₂ − k x₁ − Σ α x₁^φ + F sin ωt`.
pub fn duffing_system(p: &DuffingParams) -> Result<SystemDef> {
    if p.force < 0.0 || !p.force.is_finite() {
        return Err(HbError::InvalidInput(format!(
            "forcing amplitude must be >= 0, got {}",
            p.force
        )));
    }
    if p.terms.iter().any(|&(_, phi)| phi < 2) {
        return Err(HbError::InvalidInput(
            "nonlinear exponents must be >= 2".into(),
        ));
    }
    let x1 = Polynomial::zero(2).with(1.0, &[(1, 1)]);
    let mut x2 = Polynomial::zero(2)
        .with(-p.c, &[(1, 1)])
        .with(-p.k, &[(0, 1)])
        .with_forcing(p.force, &[], Forcing::Sin);
    for &(alpha, phi) in &p.terms {
        x2 = x2.with(-alpha, &[(0, phi)]);
    }
    let mut sys = SystemDef::polynomial("duffing", vec![x1, x2], false)
        .with_param("c", p.c)
        .with_param("k", p.k)
        .with_param("force", p.force)
        .with_param("omega", p.omega);
    for (i, &(alpha, phi)) in p.terms.iter().enumerate() {
        sys = sys
            .with_param(&format!("alpha{i}"), alpha)
            .with_param(&format!("phi{i}"), phi as f64);
    }
    Ok(sys)
}

/// `ẍ + cẋ + kx = F sin(ωt)`, a degree-one system.
pub fn linear_oscillator(c: f64, k: f64, force: f64) -> SystemDef {
    let x1 = Polynomial::zero(2).with(1.0, &[(1, 1)]);
    let x2 = Polynomial::zero(2)
        .with(-c, &[(1, 1)])
        .with(-k, &[(0, 1)])
        .with_forcing(force, &[], Forcing::Sin);
    SystemDef::polynomial("linear_oscillator", vec![x1, x2], false)
        .with_param("c", c)
        .with_param("k", k)
        .with_param("force", force)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::Degree;

    #[test]
    fn unforced_equilibrium() {
        let s = duffing_system(&DuffingParams::single(0.1, 1.0, 0.0, 3, 0.0, 2.0)).unwrap();
        assert_eq!(s.eval_vec(&[0.0, 0.0], 1.3, 2.0), vec![0.0, 0.0]);
    }

    #[test]
    fn degree_and_rhb_count() {
        let s = duffing_system(&DuffingParams::default()).unwrap();
        assert_eq!(s.degree(), Degree::Finite(3));
        assert!(!s.is_autonomous());
        let phi = s.degree_phi().unwrap() as usize;
        assert_eq!((phi + 1) * 3 + 1, 13);
        let q = duffing_system(&DuffingParams {
            terms: vec![(1.0, 3), (0.2, 5)],
            ..Default::default()
        })
        .unwrap();
        assert_eq!(q.degree(), Degree::Finite(5));
    }

    #[test]
    fn field_matches_equation() {
        let p = DuffingParams::single(0.2, 1.5, 0.7, 3, 1.2, 1.3);
        let s = duffing_system(&p).unwrap();
        let (x, v, t) = (0.8, -0.3, 0.9);
        let f = s.eval_vec(&[x, v], t, p.omega);
        let want = -0.2 * v - 1.5 * x - 0.7 * x * x * x + 1.2 * (1.3 * t).sin();
        assert_eq!(f[0], v);
        assert!((f[1] - want).abs() < 1e-14);
    }

    #[test]
    fn rejects_negative_force() {
        assert!(duffing_system(&DuffingParams {
            force: -1.0,
            ..Default::default()
        })
        .is_err());
    }
}
