use super::{propagate, Trajectory};
use crate::error::Result;
use crate::spectral::{
    eval_series, eval_series_derivative, project_samples, FourierCoeffs, HarmonicBasis,
};
use crate::systems::SystemDef;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub tol: f64,
    pub samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            samples: 1024,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicityMetrics {
    /// `‖x(T) − x(0)‖ / max(1, ‖x(0)‖)` after propagating the series' initial state.
    pub period_return_error: f64,
    /// RMS over samples and components of `ẋ_series − f(x_series, t)`.
    pub defect_rms: f64,
    /// RMS of `f(x_series, t)` with the same normalisation, or 1 if that is zero.
    pub field_scale: f64,
    /// Largest componentwise gap between the series and a reference trajectory.
    pub max_state_error_vs_reference: Option<f64>,
}

impl PeriodicityMetrics {
    pub fn failed() -> Self {
        Self {
            period_return_error: f64::INFINITY,
            defect_rms: f64::INFINITY,
            field_scale: 1.0,
            max_state_error_vs_reference: None,
        }
    }

    pub fn relative_defect(&self) -> f64 {
        self.defect_rms / self.field_scale
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn verify_periodicity(
    sys: &SystemDef,
    coeffs: &FourierCoeffs,
    basis: &HarmonicBasis,
) -> PeriodicityMetrics {
    verify_periodicity_with(sys, coeffs, basis, &VerifyOptions::default(), None)
}

/// Metrics of `coeffs` as a periodic orbit of `sys`. When `reference` is
/// given, the series is also compared with it over one period.
pub fn verify_periodicity_with(
    sys: &SystemDef,
    coeffs: &FourierCoeffs,
    basis: &HarmonicBasis,
    opts: &VerifyOptions,
    reference: Option<&Trajectory>,
) -> PeriodicityMetrics {
    if coeffs.as_slice().iter().any(|v| !v.is_finite()) || coeffs.dim() != sys.dim() {
        return PeriodicityMetrics::failed();
    }
    let omega = basis.omega();
    let period = basis.period();
    let samples = opts.samples.max(1);
    let dim = sys.dim();
    let mut defect_sq = 0.0;
    let mut field_sq = 0.0;
    let mut gap: Option<f64> = reference.map(|_| 0.0);
    let mut f = vec![0.0; dim];
    for s in 0..samples {
        let t = s as f64 * period / samples as f64;
        let x = eval_series(coeffs, basis, t);
        let dx = eval_series_derivative(coeffs, basis, t);
        sys.eval(&x, t, omega, &mut f);
        for k in 0..dim {
            defect_sq += (dx[k] - f[k]).powi(2);
            field_sq += f[k] * f[k];
        }
        if let (Some(g), Some(r)) = (gap.as_mut(), reference) {
            let xr = r.eval(r.t_start() + t);
            for k in 0..dim {
                *g = g.max((x[k] - xr[k]).abs());
            }
        }
    }
    let count = (samples * dim) as f64;
    let defect_rms = (defect_sq / count).sqrt();
    let field_scale = match (field_sq / count).sqrt() {
        v if v > 0.0 && v.is_finite() => v,
        _ => 1.0,
    };
    let x0 = eval_series(coeffs, basis, 0.0);
    let period_return_error = match propagate(sys, &x0, (0.0, period), opts.tol, omega) {
        Ok(tr) => {
            let diff: Vec<f64> = tr
                .final_state()
                .iter()
                .zip(&x0)
                .map(|(a, b)| a - b)
                .collect();
            norm(&diff) / norm(&x0).max(1.0)
        }
        Err(_) => f64::INFINITY,
    };
    PeriodicityMetrics {
        period_return_error,
        defect_rms: if defect_rms.is_finite() {
            defect_rms
        } else {
            f64::INFINITY
        },
        field_scale,
        max_state_error_vs_reference: gap,
    }
}

/// Integrates from `x0` for `settle_periods` periods of `basis`, then projects
/// one further period onto harmonics up to `basis.order()`.
pub fn settle_and_project(
    sys: &SystemDef,
    x0: &[f64],
    basis: &HarmonicBasis,
    settle_periods: usize,
    tol: f64,
) -> Result<FourierCoeffs> {
    let period = basis.period();
    let omega = basis.omega();
    let t_settle = settle_periods as f64 * period;
    let start = if settle_periods > 0 {
        propagate(sys, x0, (0.0, t_settle), tol, omega)?
            .final_state()
            .to_vec()
    } else {
        x0.to_vec()
    };
    let tr = propagate(sys, &start, (t_settle, t_settle + period), tol, omega)?;
    let count = 1024.max(4 * basis.size());
    let samples: Vec<Vec<f64>> = (0..count)
        .map(|i| tr.eval(t_settle + i as f64 * period / count as f64))
        .collect();
    Ok(project_samples(&samples, basis.order()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{build_time_domain_residual, MethodConfig, MethodMode};
    use crate::systems::{duffing_system, linear_oscillator, DuffingParams};

    #[test]
    fn exact_linear_solution_passes() {
        // ẍ + cẋ + kx = F sin ωt has steady state a cos + b sin.
        let (c, k, f, w) = (0.2, 1.5, 0.8, 1.3);
        let sys = linear_oscillator(c, k, f);
        let det = (k - w * w).powi(2) + (c * w).powi(2);
        let a = -f * c * w / det;
        let b = f * (k - w * w) / det;
        let basis = HarmonicBasis::new(2, w).unwrap();
        let mut coeffs = FourierCoeffs::zeros(2, 2);
        coeffs.component_mut(0)[1] = a;
        coeffs.component_mut(0)[2] = b;
        coeffs.component_mut(1)[1] = w * b;
        coeffs.component_mut(1)[2] = -w * a;
        let x0 = eval_series(&coeffs, &basis, 0.0);
        let reference = propagate(&sys, &x0, (0.0, basis.period()), 1e-13, w).unwrap();
        let m = verify_periodicity_with(
            &sys,
            &coeffs,
            &basis,
            &VerifyOptions::default(),
            Some(&reference),
        );
        assert!(m.period_return_error < 1e-10);
        assert!(m.defect_rms < 1e-10);
        assert!(m.max_state_error_vs_reference.unwrap() < 1e-10);
    }

    #[test]
    fn random_coefficients_fail() {
        let sys = duffing_system(&DuffingParams::default()).unwrap();
        let basis = HarmonicBasis::new(3, 2.0).unwrap();
        let data = (0..14)
            .map(|i| ((i * 37 % 11) as f64 - 5.0) / 5.0)
            .collect();
        let coeffs = FourierCoeffs::from_vec(2, 3, data).unwrap();
        let m = verify_periodicity(&sys, &coeffs, &basis);
        assert!(m.relative_defect() > 1e-1);
    }

    #[test]
    fn settled_projection_is_near_a_root() {
        let sys = duffing_system(&DuffingParams::default()).unwrap();
        let basis = HarmonicBasis::new(8, 2.0).unwrap();
        let coeffs = settle_and_project(&sys, &[0.0, 0.0], &basis, 120, 1e-12).unwrap();
        let res =
            build_time_domain_residual(&sys, &MethodConfig::new(MethodMode::Rhb, 8, 2.0)).unwrap();
        let r = res.residual(&res.reduce(&coeffs)).unwrap();
        assert!(r.iter().fold(0.0f64, |a, v| a.max(v.abs())) < 1e-6);
    }
}
