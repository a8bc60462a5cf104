use super::SystemDef;
use crate::error::{HbError, Result};
use crate::poly::Polynomial;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Earth-Moon mass ratio.
pub const EARTH_MOON_MU: f64 = 0.012150585609624;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LibrationPoint {
    L1,
    L2,
}

/// Rotating-frame, nondimensional circular restricted three-body problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrtbpParams {
    pub mu: f64,
    pub point: LibrationPoint,
    /// x-coordinate of `point`.
    pub x_point: f64,
}

impl CrtbpParams {
    pub fn new(mu: f64, point: LibrationPoint) -> Result<Self> {
        let x_point = libration_point_x(mu, point)?;
        Ok(Self { mu, point, x_point })
    }

    pub fn earth_moon_l2() -> Self {
        Self::new(EARTH_MOON_MU, LibrationPoint::L2).expect("Earth-Moon L2 exists")
    }
}

fn distances(p: &[f64], mu: f64) -> (f64, f64) {
    let r1 = ((p[0] + mu).powi(2) + p[1] * p[1] + p[2] * p[2]).sqrt();
    let r2 = ((p[0] - 1.0 + mu).powi(2) + p[1] * p[1] + p[2] * p[2]).sqrt();
    (r1, r2)
}

/// `U = (x² + y²)/2 + (1−μ)/r₁ + μ/r₂`.
pub fn effective_potential(position: &[f64], mu: f64) -> f64 {
    let (r1, r2) = distances(position, mu);
    0.5 * (position[0].powi(2) + position[1].powi(2)) + (1.0 - mu) / r1 + mu / r2
}

pub fn potential_gradient(position: &[f64], mu: f64) -> [f64; 3] {
    let (x, y, z) = (position[0], position[1], position[2]);
    let (r1, r2) = distances(position, mu);
    let (a, b) = ((1.0 - mu) / r1.powi(3), mu / r2.powi(3));
    [
        x - a * (x + mu) - b * (x - 1.0 + mu),
        y - a * y - b * y,
        -a * z - b * z,
    ]
}

/// Collinear libration point abscissa, by bisection on `∂U/∂x` along the x-axis.
pub fn libration_point_x(mu: f64, point: LibrationPoint) -> Result<f64> {
    if !(mu > 0.0 && mu <= 0.5) {
        return Err(HbError::InvalidInput(format!(
            "mass ratio must lie in (0, 1/2], got {mu}"
        )));
    }
    let g = |x: f64| potential_gradient(&[x, 0.0, 0.0], mu)[0];
    let eps = 1e-12;
    let (mut lo, mut hi) = match point {
        LibrationPoint::L1 => (-mu + eps, 1.0 - mu - eps),
        LibrationPoint::L2 => (1.0 - mu + eps, 2.0),
    };
    let (mut glo, ghi) = (g(lo), g(hi));
    if glo.signum() == ghi.signum() {
        return Err(HbError::NoBracket(format!("{point:?} for mu = {mu}")));
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    Ok(if g(lo).abs() <= g(hi).abs() { lo } else { hi })
}

fn tag(sys: SystemDef, p: &CrtbpParams) -> SystemDef {
    sys.with_param("mu", p.mu).with_param("x_point", p.x_point)
}

/// Six-dimensional state `(x, y, z, ẋ, ẏ, ż)`; the field is non-polynomial.
pub fn crtbp(p: &CrtbpParams) -> SystemDef {
    let mu = p.mu;
    let field = Arc::new(move |s: &[f64], _t: f64, _w: f64, out: &mut [f64]| {
        let g = potential_gradient(&s[..3], mu);
        out[0] = s[3];
        out[1] = s[4];
        out[2] = s[5];
        out[3] = 2.0 * s[4] + g[0];
        out[4] = -2.0 * s[3] + g[1];
        out[5] = g[2];
    });
    tag(SystemDef::general("crtbp", 6, field, true), p).with_phase_anchor(Some(1))
}

/// Eight-dimensional polynomial recast with `u₁ = 1/r₁`, `u₂ = 1/r₂`.
///
/// ```text
/// ẍ = 2ẏ + x − (1−μ)(x+μ)u₁³ − μ(x−1+μ)u₂³
/// ÿ = −2ẋ + y − (1−μ) y u₁³ − μ y u₂³
/// z̈ = −(1−μ) z u₁³ − μ z u₂³
/// u̇₁ = −u₁³ ((x+μ)ẋ + yẏ + zż)
/// u̇₂ = −u₂³ ((x−1+μ)ẋ + yẏ + zż)
/// ```
///
/// The auxiliary equations contain `x ẋ u³`, so the degree is 5. The
/// invariants `u₁² r₁² − 1` and `u₂² r₂² − 1` keep the solution on the
/// physical manifold.
pub fn crtbp_recast(p: &CrtbpParams) -> SystemDef {
    let mu = p.mu;
    let (x, y, z, vx, vy, vz, u1, u2) = (0, 1, 2, 3, 4, 5, 6, 7);
    let d2 = mu - 1.0;
    let zero = || Polynomial::zero(8);
    let ax = zero()
        .with(2.0, &[(vy, 1)])
        .with(1.0, &[(x, 1)])
        .with(-(1.0 - mu), &[(x, 1), (u1, 3)])
        .with(-(1.0 - mu) * mu, &[(u1, 3)])
        .with(-mu, &[(x, 1), (u2, 3)])
        .with(-mu * d2, &[(u2, 3)]);
    let ay = zero()
        .with(-2.0, &[(vx, 1)])
        .with(1.0, &[(y, 1)])
        .with(-(1.0 - mu), &[(y, 1), (u1, 3)])
        .with(-mu, &[(y, 1), (u2, 3)]);
    let az = zero()
        .with(-(1.0 - mu), &[(z, 1), (u1, 3)])
        .with(-mu, &[(z, 1), (u2, 3)]);
    let aux = |u: usize, shift: f64| {
        zero()
            .with(-1.0, &[(u, 3), (x, 1), (vx, 1)])
            .with(-shift, &[(u, 3), (vx, 1)])
            .with(-1.0, &[(u, 3), (y, 1), (vy, 1)])
            .with(-1.0, &[(u, 3), (z, 1), (vz, 1)])
    };
    let constraint = |u: usize, shift: f64| {
        zero()
            .with(1.0, &[(u, 2), (x, 2)])
            .with(2.0 * shift, &[(u, 2), (x, 1)])
            .with(shift * shift, &[(u, 2)])
            .with(1.0, &[(u, 2), (y, 2)])
            .with(1.0, &[(u, 2), (z, 2)])
            .with(-1.0, &[])
    };
    let components = vec![
        zero().with(1.0, &[(vx, 1)]),
        zero().with(1.0, &[(vy, 1)]),
        zero().with(1.0, &[(vz, 1)]),
        ax,
        ay,
        az,
        aux(u1, mu),
        aux(u2, d2),
    ];
    let lift = Arc::new(move |s: &[f64]| {
        let (r1, r2) = distances(s, mu);
        let mut out = s[..6].to_vec();
        out.push(1.0 / r1);
        out.push(1.0 / r2);
        out
    });
    let sys = SystemDef::polynomial("crtbp_recast", components, true)
        .with_invariants(vec![constraint(u1, mu), constraint(u2, d2)])
        .with_lift(6, lift)
        .with_phase_anchor(Some(1));
    tag(sys, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::Degree;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn libration_points() {
        let mu = EARTH_MOON_MU;
        let l2 = libration_point_x(mu, LibrationPoint::L2).unwrap();
        assert!((l2 - 1.1556821603).abs() < 1e-8, "{l2}");
        assert!(potential_gradient(&[l2, 0.0, 0.0], mu)[0].abs() < 1e-12);
        let l1 = libration_point_x(mu, LibrationPoint::L1).unwrap();
        assert!((l1 - 0.8369151324).abs() < 1e-8, "{l1}");
        assert!(potential_gradient(&[l1, 0.0, 0.0], mu)[0].abs() < 1e-12);
        assert_eq!(libration_point_x(0.5, LibrationPoint::L1).unwrap(), 0.0);
        assert!(libration_point_x(0.0, LibrationPoint::L1).is_err());
    }

    #[test]
    fn l2_small_mass_limit() {
        for mu in [1e-9, 1e-7, 1e-5, 1e-4] {
            let h = (mu / 3.0f64).cbrt();
            let x = libration_point_x(mu, LibrationPoint::L2).unwrap();
            let rel = ((x - 1.0) - h).abs() / h;
            assert!(rel < h, "mu {mu}: rel {rel}");
        }
    }

    #[test]
    fn equilibrium_at_libration_point() {
        let p = CrtbpParams::earth_moon_l2();
        let s = crtbp_recast(&p);
        assert_eq!(s.degree(), Degree::Finite(5));
        let state = s.lift_state(&[p.x_point, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let f = s.eval_vec(&state, 0.0, 1.0);
        assert!(f.iter().all(|v| v.abs() < 1e-12), "{f:?}");
    }

    #[test]
    fn recast_matches_direct_and_preserves_constraints() {
        let p = CrtbpParams::earth_moon_l2();
        let s = crtbp_recast(&p);
        let direct = crtbp(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let phys: Vec<f64> = (0..6)
                .map(|i| {
                    if i < 3 {
                        rng.random_range(-1.5..1.5)
                    } else {
                        rng.random_range(-1.0..1.0)
                    }
                })
                .collect();
            let full = s.lift_state(&phys);
            let f = s.eval_vec(&full, 0.0, 1.0);
            let g = direct.eval_vec(&phys, 0.0, 1.0);
            for i in 0..6 {
                assert!(
                    (f[i] - g[i]).abs() <= 1e-12 * g[i].abs().max(1.0),
                    "{i}: {} vs {}",
                    f[i],
                    g[i]
                );
            }
            // d(u₁² r₁²)/dt = 0 on the manifold
            for (inv, _) in s.invariants().iter().zip(0..) {
                assert!(inv.eval(&full, 0.0).abs() < 1e-12);
                let h = 1e-7;
                let fwd: Vec<f64> = full.iter().zip(&f).map(|(a, b)| a + h * b).collect();
                let bwd: Vec<f64> = full.iter().zip(&f).map(|(a, b)| a - h * b).collect();
                let rate = (inv.eval(&fwd, 0.0) - inv.eval(&bwd, 0.0)) / (2.0 * h);
                let scale = f.iter().fold(1.0f64, |a, b| a.max(b.abs()));
                assert!(rate.abs() < 1e-6 * scale, "rate {rate}");
            }
        }
    }
}
