use super::propagate;
use crate::error::{HbError, Result};
use crate::spectral::{eval_series, eval_series_derivative, FourierCoeffs, HarmonicBasis};
use crate::systems::{effective_potential, SystemDef};
use serde::{Deserialize, Serialize};

/// `C_J = 2U − |v|²` of a physical CRTBP state `(x, y, z, ẋ, ẏ, ż)`.
pub fn jacobi_constant(state: &[f64], mu: f64) -> Result<f64> {
    if state.len() < 6 {
        return Err(HbError::InvalidInput(
            "CRTBP state needs six components".into(),
        ));
    }
    let r1 = ((state[0] + mu).powi(2) + state[1].powi(2) + state[2].powi(2)).sqrt();
    let r2 = ((state[0] - 1.0 + mu).powi(2) + state[1].powi(2) + state[2].powi(2)).sqrt();
    if r1 == 0.0 || r2 == 0.0 {
        return Err(HbError::Singularity(
            "state coincides with a primary".into(),
        ));
    }
    let v2 = state[3].powi(2) + state[4].powi(2) + state[5].powi(2);
    Ok(2.0 * effective_potential(&state[..3], mu) - v2)
}

/// Relative spread `(max − min) / |mean|` of the Jacobi constant over
/// `samples` equally spaced points of a CRTBP Fourier orbit.
pub fn jacobi_variation(
    coeffs: &FourierCoeffs,
    basis: &HarmonicBasis,
    mu: f64,
    samples: usize,
) -> Result<f64> {
    if coeffs.dim() < 6 || samples == 0 {
        return Err(HbError::InvalidInput(
            "Jacobi variation needs a CRTBP orbit and samples > 0".into(),
        ));
    }
    let mut values = Vec::with_capacity(samples);
    for i in 0..samples {
        let x = eval_series(coeffs, basis, i as f64 * basis.period() / samples as f64);
        values.push(jacobi_constant(&x[..6], mu)?);
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / samples as f64;
    Ok((hi - lo) / mean.abs().max(f64::MIN_POSITIVE))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitKeepingOptions {
    pub max_periods: usize,
    /// Position distance from the nominal orbit at equal time that counts as drift.
    pub drift_threshold: f64,
    /// Radius of the ball around the nominal section point in which crossings count.
    pub section_radius: f64,
    pub tol: f64,
    pub samples_per_period: usize,
}

impl Default for OrbitKeepingOptions {
    fn default() -> Self {
        Self {
            max_periods: 10,
            drift_threshold: 0.05,
            section_radius: 0.05,
            tol: 1e-12,
            samples_per_period: 512,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitKeepingReport {
    pub periods_maintained: f64,
    pub section_crossings: usize,
    /// Largest position drift observed within each period.
    pub drift_per_period: Vec<f64>,
}

fn position_gap(a: &[f64], b: &[f64]) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>().sqrt()
}

/// Propagates the initial state of a CRTBP Fourier orbit and measures how long
/// the trajectory stays on it. The section is the plane `y = 0`, crossed in the
/// direction of the nominal orbit's first crossing after `t = 0`.
pub fn orbit_keeping(
    sys: &SystemDef,
    coeffs: &FourierCoeffs,
    basis: &HarmonicBasis,
    opts: &OrbitKeepingOptions,
) -> Result<OrbitKeepingReport> {
    if sys.physical_dim() < 6 || coeffs.dim() != sys.dim() {
        return Err(HbError::InvalidInput(
            "orbit keeping needs a CRTBP system and matching coefficients".into(),
        ));
    }
    let period = basis.period();
    let omega = basis.omega();
    let physical = sys.physical_dim();
    let series0 = eval_series(coeffs, basis, 0.0);
    let x0 = sys.lift_state(&series0[..physical]);
    let span = opts.max_periods as f64 * period;
    let per = opts.samples_per_period.max(16);

    let nominal_crossing = {
        let mut found = None;
        let mut prev_t = 0.0;
        let mut prev_y = series0[1];
        for s in 1..=per {
            let t = s as f64 * period / per as f64;
            let y = eval_series(coeffs, basis, t)[1];
            if prev_y != 0.0 && prev_y.signum() != y.signum() {
                let tc = bisect(|t| eval_series(coeffs, basis, t)[1], prev_t, t);
                let p = eval_series(coeffs, basis, tc);
                let dir = eval_series_derivative(coeffs, basis, tc)[1].signum();
                found = Some((p, dir));
                break;
            }
            prev_t = t;
            prev_y = y;
        }
        found
    };

    let traj = propagate(sys, &x0, (0.0, span), opts.tol, omega);
    let (traj, reached) = match traj {
        Ok(t) => (Some(t), span),
        Err(HbError::StepUnderflow { t, .. }) => (None, t),
        Err(e) => return Err(e),
    };
    let Some(traj) = traj else {
        return Ok(OrbitKeepingReport {
            periods_maintained: reached / period,
            section_crossings: 0,
            drift_per_period: Vec::new(),
        });
    };

    let mut drift = vec![0.0f64; opts.max_periods];
    let mut maintained: Option<f64> = None;
    let mut crossings = 0;
    let mut prev: Option<(f64, f64)> = None;
    let total = opts.max_periods * per;
    for s in 0..=total {
        let t = s as f64 * period / per as f64;
        let x = traj.eval(t);
        let nominal = eval_series(coeffs, basis, t);
        let d = position_gap(&x, &nominal);
        let k = (s / per).min(opts.max_periods.saturating_sub(1));
        if let Some(slot) = drift.get_mut(k) {
            *slot = slot.max(d);
        }
        if maintained.is_none() && d > opts.drift_threshold {
            maintained = Some(t / period);
        }
        if let (Some((pt, py)), Some((p_nom, dir))) = (prev, nominal_crossing.as_ref()) {
            if py != 0.0 && py.signum() != x[1].signum() && (x[1] - py).signum() == *dir {
                let tc = bisect(|tt| traj.eval(tt)[1], pt, t);
                if position_gap(&traj.eval(tc), p_nom) <= opts.section_radius {
                    crossings += 1;
                }
            }
        }
        prev = Some((t, x[1]));
    }
    Ok(OrbitKeepingReport {
        periods_maintained: maintained.unwrap_or(opts.max_periods as f64),
        section_crossings: crossings,
        drift_per_period: drift,
    })
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{crtbp, libration_point_x, CrtbpParams, LibrationPoint};

    #[test]
    fn jacobi_at_libration_point() {
        let mu = 0.0121505856;
        let x = libration_point_x(mu, LibrationPoint::L2).unwrap();
        let s = [x, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(
            jacobi_constant(&s, mu).unwrap(),
            2.0 * effective_potential(&s[..3], mu)
        );
    }

    #[test]
    fn jacobi_velocity_scaling() {
        let mu = 0.0121505856;
        let s = [1.1, 0.05, 0.02, 0.01, -0.03, 0.02];
        let fast = [s[0], s[1], s[2], 2.0 * s[3], 2.0 * s[4], 2.0 * s[5]];
        let v2 = s[3] * s[3] + s[4] * s[4] + s[5] * s[5];
        let drop = jacobi_constant(&s, mu).unwrap() - jacobi_constant(&fast, mu).unwrap();
        assert!((drop - 3.0 * v2).abs() < 1e-15);
    }

    #[test]
    fn jacobi_variation_vanishes_on_an_equilibrium() {
        let p = CrtbpParams::earth_moon_l2();
        let basis = HarmonicBasis::new(2, 1.5).unwrap();
        let mut coeffs = FourierCoeffs::zeros(6, 2);
        coeffs.component_mut(0)[0] = p.x_point;
        assert_eq!(jacobi_variation(&coeffs, &basis, p.mu, 64).unwrap(), 0.0);
        coeffs.component_mut(3)[1] = 0.1;
        assert!(jacobi_variation(&coeffs, &basis, p.mu, 64).unwrap() > 1e-3);
    }

    #[test]
    fn jacobi_singular_at_primary() {
        let mu = 0.25;
        assert!(matches!(
            jacobi_constant(&[1.0 - mu, 0.0, 0.0, 0.0, 0.0, 0.0], mu),
            Err(HbError::Singularity(_))
        ));
    }

    #[test]
    fn equilibrium_never_drifts() {
        let p = CrtbpParams::earth_moon_l2();
        let sys = crtbp(&p);
        let basis = HarmonicBasis::new(3, 1.0).unwrap();
        let mut coeffs = FourierCoeffs::zeros(6, 3);
        coeffs.component_mut(0)[0] = p.x_point;
        let opts = OrbitKeepingOptions {
            max_periods: 2,
            ..Default::default()
        };
        let r = orbit_keeping(&sys, &coeffs, &basis, &opts).unwrap();
        assert_eq!(r.periods_maintained, 2.0);
        assert_eq!(r.section_crossings, 0);
        assert!(
            r.drift_per_period.iter().all(|d| *d < 1e-3),
            "{:?}",
            r.drift_per_period
        );
    }
}
