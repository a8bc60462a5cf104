//! `identity-check`: random cases of the projection identity `E⁺f̃ = ĥ + E_A ĥ′`.
//!
//! Each case draws an order `N`, a scalar series and a scalar polynomial of
//! the requested degree (with a forced term half of the time), then checks
//! the decomposition at a random `M ≥ 2N+1` and the identity itself at the
//! alias-free count `(φ+1)N + 1`.

use crate::model::config_error;
use crate::output::{self, Cell};
use crate::{CliError, Context, Outcome};
use rand::Rng;
use rhb::poly::{Forcing, Polynomial};
use rhb::solvers::trial_rng;
use rhb::spectral::{conditional_identity_gap, FourierCoeffs, HarmonicBasis};

fn random_case(
    rng: &mut impl Rng,
    degree: u32,
    max_order: usize,
) -> (usize, FourierCoeffs, Polynomial) {
    let order = rng.random_range(1..=max_order);
    let data: Vec<f64> = (0..2 * order + 1)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let series = FourierCoeffs::from_vec(1, order, data).expect("sized above");
    let mut p = Polynomial::zero(1);
    for k in 0..degree {
        p = p.with(rng.random_range(-1.0..1.0), &[(0, k)]);
    }
    let lead: f64 = rng.random_range(0.5..1.5);
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    p = p.with(sign * lead, &[(0, degree)]);
    if degree >= 2 && rng.random_bool(0.5) {
        p = p.with_forcing(
            rng.random_range(-1.0..1.0),
            &[(0, degree - 1)],
            Forcing::Sin,
        );
    }
    (order, series, p)
}

pub fn run(ctx: &Context) -> Result<Outcome, CliError> {
    let id = ctx.config.identity.as_ref().expect("resolved");
    let mut rows = Vec::new();
    let mut failures = 0;
    for (d, &degree) in id.degrees.iter().enumerate() {
        for case in 0..id.cases {
            let mut rng = trial_rng(id.seed, d * id.cases + case);
            let (order, series, poly) = random_case(&mut rng, degree, id.max_order);
            let phi = poly.degree() as usize;
            let threshold = (phi + 1) * order + 1;
            let random_m = rng.random_range(2 * order + 1..=threshold + id.extra_nodes);
            let basis =
                HarmonicBasis::new(order, rng.random_range(0.5..3.0)).map_err(config_error)?;
            for m in [random_m, threshold] {
                let g =
                    conditional_identity_gap(&series, &poly, &basis, m).map_err(config_error)?;
                let tol = 1e-10 * (1.0 + g.exact_norm);
                let alias_free = m > (phi + 1) * order;
                let pass = g.decomposition_error <= tol && (!alias_free || g.gap <= tol);
                failures += usize::from(!pass);
                rows.push(vec![
                    Cell::Int(degree as usize),
                    Cell::Int(case),
                    Cell::Int(order),
                    Cell::Int(m),
                    Cell::Real(g.gap),
                    Cell::Real(g.decomposition_error),
                    Cell::Real(g.alias_term),
                    Cell::Real(tol),
                    Cell::Flag(alias_free),
                    Cell::Flag(pass),
                ]);
            }
        }
    }
    let columns: Vec<String> = [
        "degree",
        "case",
        "N",
        "M",
        "gap",
        "decomposition_error",
        "alias_term",
        "tolerance",
        "alias_free",
        "pass",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let csv = output::write_csv(
        &ctx.out_dir.join("identity.csv"),
        ctx.command,
        &ctx.config_text,
        &columns,
        &rows,
    )?;
    Ok(Outcome {
        files: vec![csv],
        failure: (failures > 0).then(|| format!("{failures} checks exceeded the tolerance")),
    })
}
