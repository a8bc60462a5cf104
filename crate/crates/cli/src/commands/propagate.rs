//! `propagate`: integrate from a solved orbit (or a given state) and, for
//! CRTBP orbits, measure how long the trajectory keeps to the orbit.

use super::solve;
use crate::model;
use crate::output;
use crate::{CliError, Context, Outcome};
use rhb::integrate::{
    jacobi_constant, orbit_keeping, propagate, OrbitKeepingOptions, OrbitKeepingReport,
};
use rhb::spectral::eval_series;
use serde::Serialize;

#[derive(Serialize)]
struct PropagateSummary {
    omega: f64,
    period: f64,
    initial_state: Vec<f64>,
    final_state: Vec<f64>,
    /// Relative gap between the state after one period and the initial state.
    period_return_error: f64,
    /// Largest relative change of the Jacobi constant over the samples.
    jacobi_drift: Option<f64>,
    orbit_keeping: Option<OrbitKeepingReport>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn run(ctx: &Context) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    let pc = cfg.propagate.as_ref().expect("resolved");
    let solved = solve::solve(ctx)?;
    let model = &solved.model;
    let basis = *solved.residual.basis();
    let (x0, orbit) = match (&pc.state, &solved.report) {
        (Some(s), _) => (model::full_state(model, s)?, None),
        (None, Some(rep)) if rep.converged => {
            let phys = model.sys.physical_dim();
            let x = eval_series(&rep.coeffs, &basis, 0.0);
            (model.sys.lift_state(&x[..phys]), Some(rep))
        }
        (None, _) => {
            return Ok(Outcome {
                files: Vec::new(),
                failure: Some("the orbit to propagate did not converge".into()),
            })
        }
    };
    let omega = basis.omega();
    let period = basis.period();
    let span = pc.periods as f64 * period;
    let traj =
        propagate(&model.sys, &x0, (0.0, span), pc.tol, omega).map_err(model::numerical_error)?;
    let samples = pc.periods * pc.samples_per_period.max(1);

    let mut text = output::header(ctx.command, &ctx.config_text);
    let mut body = Vec::new();
    traj.write_csv(&mut body, &model.names, Some(samples))?;
    text.push_str(&String::from_utf8(body).map_err(|e| CliError::Internal(e.to_string()))?);
    let csv_path = ctx.out_dir.join("trajectory.csv");
    std::fs::write(&csv_path, text)?;

    let one = traj.eval(period.min(span));
    let gap: Vec<f64> = one.iter().zip(&x0).map(|(a, b)| a - b).collect();
    let jacobi_drift = match &model.crtbp {
        Some(p) => {
            let c0 = jacobi_constant(&x0[..6], p.mu).map_err(model::numerical_error)?;
            let mut worst = 0.0f64;
            for k in 0..=samples {
                let x = traj.eval(span * k as f64 / samples as f64);
                if let Ok(c) = jacobi_constant(&x[..6], p.mu) {
                    worst = worst.max((c - c0).abs() / c0.abs());
                }
            }
            Some(worst)
        }
        None => None,
    };
    let keeping = match (&model.crtbp, orbit) {
        (Some(_), Some(rep)) => {
            let opts = OrbitKeepingOptions {
                max_periods: pc.periods,
                drift_threshold: pc.drift_threshold,
                section_radius: pc.section_radius,
                tol: pc.tol,
                ..OrbitKeepingOptions::default()
            };
            Some(
                orbit_keeping(&model.sys, &rep.coeffs, &basis, &opts)
                    .map_err(model::numerical_error)?,
            )
        }
        _ => None,
    };
    let summary = PropagateSummary {
        omega,
        period,
        period_return_error: norm(&gap) / norm(&x0).max(1.0),
        initial_state: x0,
        final_state: traj.final_state().to_vec(),
        jacobi_drift,
        orbit_keeping: keeping,
    };
    let json = output::write_json(
        &ctx.out_dir.join("propagate.json"),
        ctx.command,
        &ctx.config_text,
        &summary,
    )?;
    Ok(Outcome {
        files: vec![csv_path, json],
        failure: None,
    })
}
