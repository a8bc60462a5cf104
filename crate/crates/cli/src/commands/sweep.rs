//! `sweep`: natural-parameter continuation in ω from configured seeds.

use crate::model;
use crate::output::{self, Cell};
use crate::{CliError, Context, Outcome};
use rhb::solvers::{frequency_sweep, Intersection, SweepOptions};
use serde::Serialize;

#[derive(Serialize)]
struct BranchSummary {
    id: usize,
    /// Index of the configured seed the branch grew from.
    seed: usize,
    anchor: Option<usize>,
    points: usize,
    omega_min: f64,
    omega_max: f64,
    file: String,
}

#[derive(Serialize)]
struct SweepSummary {
    branches: Vec<BranchSummary>,
    intersections: Vec<Intersection>,
    /// Indices of seeds whose amplitude ladder never converged.
    failed_seeds: Vec<usize>,
}

pub fn run(ctx: &Context) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    let method = cfg.method.as_ref().expect("validated");
    let sw = cfg.sweep.as_ref().expect("validated");
    let model = model::build_model(cfg.system.as_ref().expect("validated"), sw.omega_min)?;
    let template = model::template(&model, method, sw.omega_min)?;
    let mut seeds = Vec::new();
    let mut configured = Vec::new();
    let mut failed_seeds = Vec::new();
    for (i, g) in sw.seeds.iter().enumerate() {
        let omega = g.omega.expect("validated");
        match model::starting_point(&model, &template, Some(g), omega, &cfg.solver)? {
            Some(s) => {
                seeds.push(s);
                configured.push(i);
            }
            None => failed_seeds.push(i),
        }
    }
    let opts = SweepOptions {
        newton: model::newton_options(&cfg.solver),
        max_halvings: sw.max_halvings,
        coincidence: sw.coincidence,
        max_jump: sw.max_jump,
        min_amplitude: sw.min_amplitude,
        ..SweepOptions::default()
    };
    let result = if seeds.is_empty() {
        None
    } else {
        Some(
            frequency_sweep(
                &template,
                (sw.omega_min, sw.omega_max),
                sw.step,
                &seeds,
                &opts,
            )
            .map_err(model::numerical_error)?,
        )
    };
    let branches = result.as_ref().map_or(&[][..], |r| &r.branches[..]);

    let amp = model.amplitude_coordinates();
    let mut columns = vec!["branch_id".to_string(), "omega".to_string()];
    columns.extend(model.names[..amp].iter().map(|n| format!("amplitude_{n}")));
    columns.push("coeff_file".into());
    let mut rows = Vec::new();
    let mut files = Vec::new();
    let mut summaries = Vec::new();
    let order = template.basis().order();
    let mut coeff_columns = vec!["omega".to_string()];
    coeff_columns.extend(output::coefficient_columns(&model.names, order));
    for b in branches {
        let file = format!("branch_{:03}.csv", b.id);
        let mut coeff_rows = Vec::new();
        for p in &b.points {
            let mut row = vec![Cell::Int(b.id), Cell::Real(p.omega)];
            row.extend(p.amplitude[..amp].iter().map(|&a| Cell::Real(a)));
            row.push(Cell::Text(file.clone()));
            rows.push(row);
            let mut c = vec![Cell::Real(p.omega)];
            c.extend(output::coefficient_cells(&p.coeffs));
            coeff_rows.push(c);
        }
        files.push(output::write_csv(
            &ctx.out_dir.join(&file),
            ctx.command,
            &ctx.config_text,
            &coeff_columns,
            &coeff_rows,
        )?);
        summaries.push(BranchSummary {
            id: b.id,
            seed: configured[b.seed],
            anchor: b.anchor,
            points: b.points.len(),
            omega_min: b.points.first().map_or(f64::NAN, |p| p.omega),
            omega_max: b.points.last().map_or(f64::NAN, |p| p.omega),
            file,
        });
    }
    files.insert(
        0,
        output::write_csv(
            &ctx.out_dir.join("branches.csv"),
            ctx.command,
            &ctx.config_text,
            &columns,
            &rows,
        )?,
    );
    let summary = SweepSummary {
        branches: summaries,
        intersections: result
            .as_ref()
            .map_or_else(Vec::new, |r| r.intersections.clone()),
        failed_seeds,
    };
    files.push(output::write_json(
        &ctx.out_dir.join("sweep.json"),
        ctx.command,
        &ctx.config_text,
        &summary,
    )?);
    Ok(Outcome {
        files,
        failure: branches
            .is_empty()
            .then(|| "no seed produced a branch".to_string()),
    })
}
