//! `aliasing`: the numeric aliasing matrix against its closed form over a range of `M`.

use crate::output::{self, Cell};
use crate::{CliError, Context, Outcome};
use rhb::spectral::{
    build_grid, build_operators, matrix_inf_norm, predict_alias_entries, HarmonicBasis,
};

/// Entrywise agreement required between the closed form and `E⁺E₁`.
const MATCH_TOL: f64 = 1e-10;

pub fn run(ctx: &Context) -> Result<Outcome, CliError> {
    let a = ctx.config.aliasing.as_ref().expect("validated");
    let (lo, hi) = ctx.config.aliasing_range();
    let basis = HarmonicBasis::new(a.order, 1.0).map_err(crate::model::config_error)?;
    let mut rows = Vec::new();
    let mut mismatches = Vec::new();
    for m in lo..=hi {
        let grid = build_grid(&basis, m).map_err(crate::model::config_error)?;
        let ops = build_operators(&basis, &grid, a.degree).map_err(crate::model::config_error)?;
        let numeric = &ops.e_alias;
        let norm = if numeric.is_empty() {
            0.0
        } else {
            matrix_inf_norm(numeric)
        };
        let numeric_nonzeros = numeric.iter().filter(|v| v.abs() > MATCH_TOL).count();
        let (predicted, matches) = if a.degree < 2 {
            (0, numeric.is_empty() || norm < MATCH_TOL)
        } else {
            let p =
                predict_alias_entries(a.order, a.degree, m).map_err(crate::model::config_error)?;
            let gap = matrix_inf_norm(&(p.to_dense() - numeric));
            (p.nonzeros(), gap < MATCH_TOL)
        };
        if !matches {
            mismatches.push(m);
        }
        rows.push(vec![
            Cell::Int(m),
            Cell::Real(norm),
            Cell::Int(predicted),
            Cell::Int(numeric_nonzeros),
            Cell::Flag(matches),
        ]);
    }
    let columns: Vec<String> = [
        "M",
        "norm_inf",
        "predicted_nonzeros",
        "numeric_nonzeros",
        "match",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let csv = output::write_csv(
        &ctx.out_dir.join("aliasing.csv"),
        ctx.command,
        &ctx.config_text,
        &columns,
        &rows,
    )?;
    Ok(Outcome {
        files: vec![csv],
        failure: (!mismatches.is_empty())
            .then(|| format!("closed form disagrees at M = {mismatches:?}")),
    })
}
