use super::newton::{newton_solve, NewtonOptions};
use super::sweep::SweepSeed;
use crate::assembly::ResidualSystem;
use crate::error::{HbError, Result};
use crate::spectral::{
    eval_series, peak_amplitudes, project_samples, FourierCoeffs, HarmonicBasis,
};
use crate::systems::{CrtbpParams, SystemDef};
use serde::{Deserialize, Serialize};

/// Small-amplitude oscillation frequencies about a collinear libration point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModes {
    /// `c₂ = (1−μ)/r₁³ + μ/r₂³` at the point.
    pub c2: f64,
    pub in_plane_omega: f64,
    pub vertical_omega: f64,
    /// Real eigenvalue of the saddle pair.
    pub saddle_rate: f64,
    /// Ratio of y to x amplitude in the in-plane mode.
    pub kappa: f64,
}

pub fn crtbp_linear_modes(p: &CrtbpParams) -> LinearModes {
    let x = p.x_point;
    let c2 = (1.0 - p.mu) / (x + p.mu).abs().powi(3) + p.mu / (x - 1.0 + p.mu).abs().powi(3);
    let uxx = 1.0 + 2.0 * c2;
    let uyy = 1.0 - c2;
    // λ⁴ + (4 − Uxx − Uyy)λ² + Uxx·Uyy = 0
    let b = 4.0 - uxx - uyy;
    let disc = (b * b - 4.0 * uxx * uyy).sqrt();
    let s_neg = 0.5 * (-b - disc);
    let s_pos = 0.5 * (-b + disc);
    let w = (-s_neg).sqrt();
    LinearModes {
        c2,
        in_plane_omega: w,
        vertical_omega: c2.sqrt(),
        saddle_rate: s_pos.sqrt(),
        kappa: (w * w + uxx) / (2.0 * w),
    }
}

/// Fourier coefficients of the lifted state of `sys` along the physical orbit
/// `physical` (coordinates `0..sys.physical_dim()`).
pub fn lift_coefficients(
    sys: &SystemDef,
    physical: &FourierCoeffs,
    basis: &HarmonicBasis,
) -> Result<FourierCoeffs> {
    if physical.dim() == sys.dim() {
        return Ok(physical.clone());
    }
    if physical.dim() != sys.physical_dim() {
        return Err(HbError::InvalidInput(format!(
            "physical coefficients have dimension {}, expected {}",
            physical.dim(),
            sys.physical_dim()
        )));
    }
    let count = 1024.max(8 * basis.size());
    let samples: Vec<Vec<f64>> = (0..count)
        .map(|i| {
            let t = i as f64 * basis.period() / count as f64;
            sys.lift_state(&eval_series(physical, basis, t))
        })
        .collect();
    if samples.iter().flatten().any(|v| !v.is_finite()) {
        return Err(HbError::NonFinite(
            "lifted orbit passes through a singularity".into(),
        ));
    }
    Ok(project_samples(&samples, basis.order()))
}

/// First-harmonic orbit `x = x_L − a_x cos ωt`, `y = κ a_x sin ωt`,
/// `z = a_z cos ωt` with consistent velocities.
fn first_harmonic_orbit(
    x_point: f64,
    omega: f64,
    ax: f64,
    ay: f64,
    az: f64,
    order: usize,
) -> FourierCoeffs {
    let mut c = FourierCoeffs::zeros(6, order);
    c.component_mut(0)[0] = x_point;
    c.component_mut(0)[1] = -ax;
    c.component_mut(1)[2] = ay;
    c.component_mut(2)[1] = az;
    // velocities of cos → −ω sin, sin → ω cos
    c.component_mut(3)[2] = omega * ax;
    c.component_mut(4)[1] = omega * ay;
    c.component_mut(5)[2] = -omega * az;
    c
}

fn finish(sys: &SystemDef, phys: FourierCoeffs, omega: f64, anchor: usize) -> Result<SweepSeed> {
    let basis = HarmonicBasis::new(phys.order(), omega)?;
    Ok(SweepSeed::new(omega, lift_coefficients(sys, &phys, &basis)?).with_anchor(anchor))
}

/// Linearised planar Lyapunov orbit of x-amplitude `ax` at frequency `omega`.
pub fn planar_lyapunov_seed(
    sys: &SystemDef,
    p: &CrtbpParams,
    omega: f64,
    ax: f64,
    order: usize,
) -> Result<SweepSeed> {
    let m = crtbp_linear_modes(p);
    finish(
        sys,
        first_harmonic_orbit(p.x_point, omega, ax, m.kappa * ax, 0.0, order),
        omega,
        1,
    )
}

/// Linearised vertical oscillation of z-amplitude `az`, anchored on z.
pub fn vertical_lyapunov_seed(
    sys: &SystemDef,
    p: &CrtbpParams,
    omega: f64,
    az: f64,
    order: usize,
) -> Result<SweepSeed> {
    finish(
        sys,
        first_harmonic_orbit(p.x_point, omega, 0.0, 0.0, az, order),
        omega,
        2,
    )
}

/// Coupled in-plane and vertical first-harmonic guess at frequency `omega`.
pub fn halo_seed(
    sys: &SystemDef,
    p: &CrtbpParams,
    omega: f64,
    ax: f64,
    az: f64,
    order: usize,
) -> Result<SweepSeed> {
    let kappa = crtbp_linear_modes(p).kappa;
    finish(
        sys,
        first_harmonic_orbit(p.x_point, omega, ax, kappa * ax, az, order),
        omega,
        1,
    )
}

/// Clockwise circle about the smaller primary whose radius makes the
/// two-body rate relative to that primary consistent with `omega`.
pub fn dro_seed(sys: &SystemDef, p: &CrtbpParams, omega: f64, order: usize) -> Result<SweepSeed> {
    if omega <= 1.0 {
        return Err(HbError::InvalidInput("retrograde seed needs ω > 1".into()));
    }
    let rho = (p.mu / (omega - 1.0).powi(2)).cbrt();
    let mut c = FourierCoeffs::zeros(6, order);
    c.component_mut(0)[0] = 1.0 - p.mu;
    c.component_mut(0)[1] = rho;
    c.component_mut(1)[2] = -rho;
    c.component_mut(3)[2] = -omega * rho;
    c.component_mut(4)[1] = -omega * rho;
    finish(sys, c, omega, 1)
}

/// Orbit families about the collinear point, plus retrograde orbits about
/// the smaller primary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrtbpFamily {
    PlanarLyapunov,
    VerticalLyapunov,
    Halo,
    Dro,
}

/// First-harmonic guess for `family` at `omega`. `amplitude` is the x
/// amplitude for planar orbits and the z amplitude for vertical and halo
/// orbits (halo x amplitude is three quarters of it); DROs ignore it.
pub fn family_seed(
    sys: &SystemDef,
    p: &CrtbpParams,
    family: CrtbpFamily,
    omega: f64,
    amplitude: f64,
    order: usize,
) -> Result<SweepSeed> {
    match family {
        CrtbpFamily::PlanarLyapunov => planar_lyapunov_seed(sys, p, omega, amplitude, order),
        CrtbpFamily::VerticalLyapunov => vertical_lyapunov_seed(sys, p, omega, amplitude, order),
        CrtbpFamily::Halo => halo_seed(sys, p, omega, 0.75 * amplitude, amplitude, order),
        CrtbpFamily::Dro => dro_seed(sys, p, omega, order),
    }
}

/// Tries each amplitude of the ladder in turn and returns the first seed
/// whose Newton solution converges with some physical amplitude of at least
/// `min_amplitude`. Guesses that are too small tend to fall onto the
/// equilibrium, which the amplitude floor rejects.
pub fn ramp_seed<F>(
    template: &ResidualSystem,
    amplitudes: &[f64],
    newton: &NewtonOptions,
    min_amplitude: f64,
    build: F,
) -> Result<Option<SweepSeed>>
where
    F: Fn(f64) -> Result<SweepSeed>,
{
    for &a in amplitudes {
        let seed = build(a)?;
        let res = template
            .with_omega(seed.omega)?
            .with_anchor(seed.anchor.or(template.anchor()));
        let Ok(rep) = newton_solve(&res, &seed.coeffs, newton) else {
            continue;
        };
        if !rep.converged {
            continue;
        }
        let peak = peak_amplitudes(&rep.coeffs, res.basis(), 1024)
            .into_iter()
            .take(template.system().physical_dim())
            .fold(0.0, f64::max);
        if peak >= min_amplitude {
            return Ok(Some(SweepSeed {
                omega: seed.omega,
                coeffs: rep.coeffs,
                anchor: res.anchor(),
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{build_time_domain_residual, MethodConfig, MethodMode};
    use crate::spectral::eval_series_derivative;
    use crate::systems::{crtbp, crtbp_recast};

    #[test]
    fn earth_moon_l2_modes() {
        let m = crtbp_linear_modes(&CrtbpParams::earth_moon_l2());
        assert!(
            (m.in_plane_omega - 1.8626).abs() < 1e-3,
            "{}",
            m.in_plane_omega
        );
        assert!(
            (m.vertical_omega - 1.7860).abs() < 1e-3,
            "{}",
            m.vertical_omega
        );
        assert!(m.saddle_rate > 2.0);
    }

    #[test]
    fn linear_in_plane_mode_satisfies_variational_equations() {
        let p = CrtbpParams::earth_moon_l2();
        let m = crtbp_linear_modes(&p);
        let sys = crtbp(&p);
        let amp = 1e-7;
        let seed = planar_lyapunov_seed(&sys, &p, m.in_plane_omega, amp, 1).unwrap();
        let basis = HarmonicBasis::new(1, seed.omega).unwrap();
        for t in [0.0, 0.7, 2.1] {
            let x = eval_series(&seed.coeffs, &basis, t);
            let dx = eval_series_derivative(&seed.coeffs, &basis, t);
            let f = sys.eval_vec(&x, t, seed.omega);
            let defect = dx
                .iter()
                .zip(&f)
                .fold(0.0f64, |a, (u, v)| a.max((u - v).abs()));
            assert!(defect < 1e-3 * amp, "{defect}");
        }
        assert!((m.kappa - 2.91).abs() < 0.02, "{}", m.kappa);
    }

    #[test]
    fn lifted_seed_is_consistent() {
        let p = CrtbpParams::earth_moon_l2();
        let sys = crtbp_recast(&p);
        let seed = dro_seed(&sys, &p, 3.0, 8).unwrap();
        assert_eq!(seed.coeffs.dim(), 8);
        let basis = HarmonicBasis::new(8, 3.0).unwrap();
        let x = eval_series(&seed.coeffs, &basis, 0.4);
        let r2 = ((x[0] - 1.0 + p.mu).powi(2) + x[1].powi(2) + x[2].powi(2)).sqrt();
        assert!((x[7] * r2 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn ramp_skips_guesses_that_fall_onto_the_equilibrium() {
        let p = CrtbpParams::earth_moon_l2();
        let sys = crtbp_recast(&p);
        let template =
            build_time_domain_residual(&sys, &MethodConfig::new(MethodMode::Rhb, 6, 1.83)).unwrap();
        let build = |a: f64| family_seed(&sys, &p, CrtbpFamily::PlanarLyapunov, 1.83, a, 6);
        let tiny = ramp_seed(&template, &[1e-4], &NewtonOptions::default(), 1e-3, build).unwrap();
        assert!(tiny.is_none());
        let seed = ramp_seed(
            &template,
            &[1e-4, 0.04],
            &NewtonOptions::default(),
            1e-3,
            build,
        )
        .unwrap()
        .expect("ladder reaches the orbit");
        assert_eq!(seed.anchor, Some(1));
        let basis = HarmonicBasis::new(6, 1.83).unwrap();
        let x_min = (0..1024)
            .map(|i| eval_series(&seed.coeffs, &basis, i as f64 * basis.period() / 1024.0)[0])
            .fold(f64::INFINITY, f64::min);
        // shooting oracle: the symmetric planar orbit with period 2π/1.83
        // crosses y = 0 at x = x_L − 0.0421 on its Earth side
        assert!(
            (p.x_point - x_min - 0.0421).abs() < 2e-3,
            "{}",
            p.x_point - x_min
        );
    }
}
