use crate::assembly::{jacobian, ResidualSystem};
use crate::error::{HbError, Result};
use crate::integrate::{verify_periodicity_with, PeriodicityMetrics, VerifyOptions};
use crate::spectral::{inf_norm, FourierCoeffs};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Convergence threshold on the residual ∞-norm.
    pub tol: f64,
    pub max_iter: usize,
    /// Backtracking halvings tried before giving up on an iteration.
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100,
            max_halvings: 20,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Physical,
    NonPhysical,
    Unverified,
}

/// Acceptance thresholds for the time-integration check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalityCriteria {
    /// Bound on the relative period-return error.
    pub period_return: f64,
    /// Bound on `defect_rms / field_scale`.
    pub relative_defect: f64,
    pub verify: VerifyOptions,
}

impl Default for PhysicalityCriteria {
    fn default() -> Self {
        Self {
            period_return: 1e-3,
            relative_defect: 1e-2,
            verify: VerifyOptions::default(),
        }
    }
}

impl PhysicalityCriteria {
    pub fn judge(&self, m: &PeriodicityMetrics) -> Classification {
        if m.period_return_error < self.period_return && m.relative_defect() < self.relative_defect
        {
            Classification::Physical
        } else {
            Classification::NonPhysical
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub converged: bool,
    pub coeffs: FourierCoeffs,
    /// Residual ∞-norm at the initial point and after every accepted step.
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    pub verification: Option<PeriodicityMetrics>,
    pub classification: Classification,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        self.residual_history
            .last()
            .copied()
            .unwrap_or(f64::INFINITY)
    }

    /// Runs the integration check and records the verdict.
    pub fn classify(&mut self, res: &ResidualSystem, criteria: &PhysicalityCriteria) {
        let m = verify_periodicity_with(
            res.system(),
            &self.coeffs,
            res.basis(),
            &criteria.verify,
            None,
        );
        self.classification = criteria.judge(&m);
        self.verification = Some(m);
    }
}

/// Newton step `δ` with `J δ ≈ r`: LU when square, SVD least squares otherwise
/// or when LU meets a singular matrix.
fn newton_step(jac: DMatrix<f64>, r: &[f64]) -> Option<DVector<f64>> {
    let rhs = DVector::from_column_slice(r);
    if jac.nrows() == jac.ncols() {
        if let Some(d) = jac.clone().lu().solve(&rhs) {
            if d.iter().all(|v| v.is_finite()) {
                return Some(d);
            }
        }
    }
    let scale = jac.amax().max(f64::MIN_POSITIVE);
    let svd = jac.svd(true, true);
    let d = svd.solve(&rhs, 1e-14 * scale).ok()?;
    d.iter().all(|v| v.is_finite()).then_some(d)
}

/// Damped Newton on `res` from `x0`. Each iteration halves the step until the
/// residual ∞-norm decreases; failure to decrease ends the run unconverged.
pub fn newton_solve(
    res: &ResidualSystem,
    x0: &FourierCoeffs,
    opt: &NewtonOptions,
) -> Result<SolveReport> {
    if opt.tol <= 0.0 {
        return Err(HbError::InvalidInput(
            "Newton tolerance must be positive".into(),
        ));
    }
    if x0.dim() != res.system().dim() {
        return Err(HbError::InvalidInput(format!(
            "initial coefficients have dimension {}, system has {}",
            x0.dim(),
            res.system().dim()
        )));
    }
    let mut x = res.reduce(x0);
    let mut r = res.residual(&x)?;
    let mut norm = inf_norm(&r);
    let mut history = vec![norm];
    let mut iterations = 0;
    let mut converged = norm <= opt.tol;
    while !converged && iterations < opt.max_iter {
        let Ok(jac) = jacobian(res, &x) else { break };
        let Some(delta) = newton_step(jac, &r) else {
            break;
        };
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opt.max_halvings {
            let trial: Vec<f64> = x
                .iter()
                .zip(delta.iter())
                .map(|(a, d)| a - lambda * d)
                .collect();
            if let Ok(rt) = res.residual(&trial) {
                let nt = inf_norm(&rt);
                if nt < norm {
                    accepted = Some((trial, rt, nt));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((xn, rn, nn)) = accepted else { break };
        x = xn;
        r = rn;
        norm = nn;
        history.push(norm);
        iterations += 1;
        converged = norm <= opt.tol;
    }
    Ok(SolveReport {
        converged,
        coeffs: res.expand(&x),
        residual_history: history,
        iterations,
        verification: None,
        classification: Classification::Unverified,
    })
}
