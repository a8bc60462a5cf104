//! `montecarlo`: multistart Newton, clustering and physicality statistics.

use crate::model;
use crate::output::{self, Cell};
use crate::{CliError, Context, Outcome};
use rhb::solvers::{multistart, Classification};
use serde::Serialize;

#[derive(Serialize)]
struct MonteCarloSummary {
    trials: usize,
    converged_trials: usize,
    clusters: usize,
    physical: usize,
    non_physical: usize,
    unverified: usize,
}

pub fn run(ctx: &Context) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    let method = cfg.method.as_ref().expect("validated");
    let mc = cfg.montecarlo.as_ref().expect("validated");
    let omega = method.omega.expect("validated");
    let model = model::build_model(cfg.system.as_ref().expect("validated"), omega)?;
    let template = model::template(&model, method, omega)?;
    let report = multistart(
        &template,
        &mc.bounds,
        mc.trials,
        mc.seed,
        &model::newton_options(&cfg.solver),
        &model::criteria(&cfg.solver),
    )
    .map_err(model::config_error)?;

    let mut columns: Vec<String> = [
        "cluster_id",
        "classification",
        "hit_count",
        "first_trial",
        "final_residual",
        "period_return_error",
        "relative_defect",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    columns.extend(output::coefficient_columns(
        &model.names,
        template.basis().order(),
    ));
    let rows: Vec<Vec<Cell>> = report
        .clusters
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let r = &c.representative;
            let m = r.verification;
            let mut row = vec![
                Cell::Int(i),
                Cell::Text(class_name(r.classification).into()),
                Cell::Int(c.hits),
                Cell::Int(c.first_trial),
                Cell::Real(r.final_residual()),
                Cell::Real(m.map_or(f64::NAN, |m| m.period_return_error)),
                Cell::Real(m.map_or(f64::NAN, |m| m.relative_defect())),
            ];
            row.extend(output::coefficient_cells(&r.coeffs));
            row
        })
        .collect();
    let csv = output::write_csv(
        &ctx.out_dir.join("clusters.csv"),
        ctx.command,
        &ctx.config_text,
        &columns,
        &rows,
    )?;
    let summary = MonteCarloSummary {
        trials: report.trials,
        converged_trials: report.converged_trials,
        clusters: report.clusters.len(),
        physical: report.count(Classification::Physical),
        non_physical: report.count(Classification::NonPhysical),
        unverified: report.count(Classification::Unverified),
    };
    let json = output::write_json(
        &ctx.out_dir.join("montecarlo.json"),
        ctx.command,
        &ctx.config_text,
        &summary,
    )?;
    Ok(Outcome {
        files: vec![csv, json],
        failure: (report.converged_trials == 0).then(|| "no trial converged".to_string()),
    })
}

pub fn class_name(c: Classification) -> &'static str {
    match c {
        Classification::Physical => "physical",
        Classification::NonPhysical => "non_physical",
        Classification::Unverified => "unverified",
    }
}
