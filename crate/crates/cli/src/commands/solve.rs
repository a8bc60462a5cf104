//! `solve`: one Newton solve, verified by integration.

use crate::model::{self, Model};
use crate::output::{self, Cell};
use crate::{CliError, Context, Outcome};
use rhb::assembly::{aliasing_norms, ResidualSystem};
use rhb::integrate::{jacobi_variation, PeriodicityMetrics};
use rhb::solvers::{newton_solve, Classification, SolveReport};
use serde::Serialize;

#[derive(Serialize)]
pub struct AliasingDiagnostics {
    pub nodes: Option<usize>,
    /// Smallest alias-free collocation count `(φ+1)N + 1`, for polynomial fields.
    pub alias_free_nodes: Option<usize>,
    pub alias_free: Option<bool>,
    /// `‖E_A ĥ′‖∞` per component at the solution.
    pub component_norms: Vec<f64>,
}

#[derive(Serialize)]
pub struct SolveSummary {
    pub system: String,
    pub mode: String,
    pub order: usize,
    pub omega: f64,
    pub anchor: Option<usize>,
    pub converged: bool,
    pub iterations: usize,
    pub final_residual: f64,
    pub residual_history: Vec<f64>,
    pub classification: Classification,
    pub verification: Option<PeriodicityMetrics>,
    pub aliasing: AliasingDiagnostics,
    pub jacobi_variation: Option<f64>,
}

/// Result of the shared solve pipeline used by `solve` and `propagate`.
pub struct Solved {
    pub model: Model,
    pub residual: ResidualSystem,
    pub report: Option<SolveReport>,
}

pub fn solve(ctx: &Context) -> Result<Solved, CliError> {
    let cfg = &ctx.config;
    let method = cfg.method.as_ref().expect("validated");
    let omega = method.omega.expect("validated");
    let model = model::build_model(cfg.system.as_ref().expect("validated"), omega)?;
    let template = model::template(&model, method, omega)?;
    let seed = model::starting_point(&model, &template, cfg.initial.as_ref(), omega, &cfg.solver)?;
    let Some(seed) = seed else {
        return Ok(Solved {
            model,
            residual: template,
            report: None,
        });
    };
    let anchor = seed.anchor.or(template.anchor());
    let res = template.with_anchor(anchor);
    let mut rep = newton_solve(&res, &seed.coeffs, &model::newton_options(&cfg.solver))
        .map_err(model::numerical_error)?;
    if rep.converged {
        rep.classify(&res, &model::criteria(&cfg.solver));
    }
    Ok(Solved {
        model,
        residual: res,
        report: Some(rep),
    })
}

fn diagnostics(res: &ResidualSystem, rep: &SolveReport) -> Result<AliasingDiagnostics, CliError> {
    let nodes = res.node_count();
    let threshold = res
        .system()
        .degree_phi()
        .map(|phi| (phi as usize + 1) * res.basis().order() + 1);
    Ok(AliasingDiagnostics {
        nodes,
        alias_free_nodes: threshold,
        alias_free: threshold.zip(nodes).map(|(t, m)| m >= t),
        component_norms: aliasing_norms(res, &rep.coeffs).map_err(model::numerical_error)?,
    })
}

pub fn run(ctx: &Context) -> Result<Outcome, CliError> {
    let Solved {
        model,
        residual,
        report,
    } = solve(ctx)?;
    let Some(rep) = report else {
        return Ok(Outcome {
            files: Vec::new(),
            failure: Some("no rung of the amplitude ladder converged".into()),
        });
    };
    let method = ctx.config.method.as_ref().expect("validated");
    let jacobi = match &model.crtbp {
        Some(p) if rep.converged => Some(
            jacobi_variation(&rep.coeffs, residual.basis(), p.mu, 1024)
                .map_err(model::numerical_error)?,
        ),
        _ => None,
    };
    let summary = SolveSummary {
        system: model.sys.name().to_string(),
        mode: format!("{:?}", method.mode).to_lowercase(),
        order: method.order,
        omega: residual.basis().omega(),
        anchor: residual.anchor(),
        converged: rep.converged,
        iterations: rep.iterations,
        final_residual: rep.final_residual(),
        residual_history: rep.residual_history.clone(),
        classification: rep.classification,
        verification: rep.verification,
        aliasing: diagnostics(&residual, &rep)?,
        jacobi_variation: jacobi,
    };
    let files = write_solution(ctx, &model, &rep, &summary)?;
    Ok(Outcome {
        files,
        failure: (!rep.converged)
            .then(|| format!("Newton stopped at residual {:e}", rep.final_residual())),
    })
}

pub fn write_solution(
    ctx: &Context,
    model: &Model,
    rep: &SolveReport,
    summary: &SolveSummary,
) -> Result<Vec<std::path::PathBuf>, CliError> {
    let report = output::write_json(
        &ctx.out_dir.join("report.json"),
        ctx.command,
        &ctx.config_text,
        summary,
    )?;
    let order = rep.coeffs.order();
    let mut columns = vec!["term".to_string()];
    columns.extend(model.names.iter().cloned());
    let rows: Vec<Vec<Cell>> = output::term_names(order)
        .into_iter()
        .enumerate()
        .map(|(j, t)| {
            let mut row = vec![Cell::Text(t)];
            row.extend((0..rep.coeffs.dim()).map(|k| Cell::Real(rep.coeffs.component(k)[j])));
            row
        })
        .collect();
    let coeffs = output::write_csv(
        &ctx.out_dir.join("coefficients.csv"),
        ctx.command,
        &ctx.config_text,
        &columns,
        &rows,
    )?;
    Ok(vec![report, coeffs])
}
