//! Turning configuration sections into systems, residuals and starting points.

use crate::config::{GuessConfig, MethodSection, SolverSection, SystemConfig};
use crate::CliError;
use rhb::assembly::{build_time_domain_residual, MethodConfig, ResidualSystem};
use rhb::integrate::{settle_and_project, VerifyOptions};
use rhb::solvers::{
    family_seed, lift_coefficients, ramp_seed, NewtonOptions, PhysicalityCriteria, SweepSeed,
};
use rhb::spectral::{FourierCoeffs, HarmonicBasis};
use rhb::systems::{
    crtbp, crtbp_recast, duffing_system, linear_oscillator, linear_system, rayleigh_plesset,
    rayleigh_plesset_recast, CrtbpParams, DuffingParams, RayleighPlessetParams, SystemDef,
};
use rhb::HbError;

pub struct Model {
    pub sys: SystemDef,
    /// Column names of the state components.
    pub names: Vec<String>,
    pub crtbp: Option<CrtbpParams>,
}

impl Model {
    /// Coordinates reported as branch amplitudes: positions for CRTBP, the
    /// first coordinate otherwise.
    pub fn amplitude_coordinates(&self) -> usize {
        if self.crtbp.is_some() {
            3
        } else {
            1
        }
    }
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

pub fn config_error(e: HbError) -> CliError {
    CliError::Config(e.to_string())
}

pub fn numerical_error(e: HbError) -> CliError {
    CliError::Numerical(e.to_string())
}

pub fn build_model(cfg: &SystemConfig, omega: f64) -> Result<Model, CliError> {
    Ok(match cfg {
        SystemConfig::Linear(c) => Model {
            sys: linear_system(c.lambda),
            names: names(&["x"]),
            crtbp: None,
        },
        SystemConfig::LinearOscillator(c) => Model {
            sys: linear_oscillator(c.c, c.k, c.force),
            names: names(&["x", "v"]),
            crtbp: None,
        },
        SystemConfig::Duffing(c) => {
            let p = DuffingParams {
                c: c.c,
                k: c.k,
                terms: c.terms.clone(),
                force: c.force,
                omega,
            };
            Model {
                sys: duffing_system(&p).map_err(config_error)?,
                names: names(&["x", "v"]),
                crtbp: None,
            }
        }
        SystemConfig::RayleighPlesset(c) => {
            let p = RayleighPlessetParams {
                a: c.a,
                b: c.b,
                c: c.c,
                d: c.d,
                e: c.e,
                omega,
            };
            if c.recast {
                Model {
                    sys: rayleigh_plesset_recast(&p),
                    names: names(&["r", "v", "u"]),
                    crtbp: None,
                }
            } else {
                Model {
                    sys: rayleigh_plesset(&p),
                    names: names(&["r", "v"]),
                    crtbp: None,
                }
            }
        }
        SystemConfig::Crtbp(c) => {
            let p = CrtbpParams::new(c.mu, c.point).map_err(config_error)?;
            let (sys, list): (SystemDef, &[&str]) = if c.recast {
                (
                    crtbp_recast(&p),
                    &["x", "y", "z", "vx", "vy", "vz", "u1", "u2"],
                )
            } else {
                (crtbp(&p), &["x", "y", "z", "vx", "vy", "vz"])
            };
            Model {
                sys,
                names: names(list),
                crtbp: Some(p),
            }
        }
    })
}

pub fn method_config(m: &MethodSection, omega: f64) -> MethodConfig {
    match m.nodes {
        Some(nodes) => MethodConfig::custom(m.order, omega, nodes),
        None => MethodConfig::new(m.mode, m.order, omega),
    }
}

pub fn template(model: &Model, m: &MethodSection, omega: f64) -> Result<ResidualSystem, CliError> {
    build_time_domain_residual(&model.sys, &method_config(m, omega)).map_err(config_error)
}

pub fn newton_options(s: &SolverSection) -> NewtonOptions {
    NewtonOptions {
        tol: s.tol,
        max_iter: s.max_iter,
        max_halvings: s.max_halvings,
    }
}

pub fn criteria(s: &SolverSection) -> PhysicalityCriteria {
    PhysicalityCriteria {
        period_return: s.period_return,
        relative_defect: s.relative_defect,
        verify: VerifyOptions {
            tol: s.verify_tol,
            ..VerifyOptions::default()
        },
    }
}

/// Full state from either a full or a physical state vector.
pub fn full_state(model: &Model, state: &[f64]) -> Result<Vec<f64>, CliError> {
    let sys = &model.sys;
    if state.len() == sys.dim() {
        Ok(state.to_vec())
    } else if state.len() == sys.physical_dim() {
        Ok(sys.lift_state(state))
    } else {
        Err(CliError::Config(format!(
            "state has {} entries; expected {} or {}",
            state.len(),
            sys.physical_dim(),
            sys.dim()
        )))
    }
}

/// Starting point at `omega` described by `guess`, or the zero series. A
/// family ladder is already solved when it returns; `Ok(None)` means no
/// rung of the ladder converged.
pub fn starting_point(
    model: &Model,
    template: &ResidualSystem,
    guess: Option<&GuessConfig>,
    omega: f64,
    solver: &SolverSection,
) -> Result<Option<SweepSeed>, CliError> {
    let sys = &model.sys;
    let order = template.basis().order();
    let basis = HarmonicBasis::new(order, omega).map_err(config_error)?;
    let Some(g) = guess else {
        return Ok(Some(SweepSeed::new(
            omega,
            FourierCoeffs::zeros(sys.dim(), order),
        )));
    };
    if let Some(c) = &g.coefficients {
        let size = 2 * order + 1;
        let dim = if c.len() == sys.dim() * size {
            sys.dim()
        } else if c.len() == sys.physical_dim() * size {
            sys.physical_dim()
        } else {
            return Err(CliError::Config(format!(
                "`coefficients` has {} entries; expected {} or {} for N = {order}",
                c.len(),
                sys.physical_dim() * size,
                sys.dim() * size
            )));
        };
        let coeffs = FourierCoeffs::from_vec(dim, order, c.clone()).map_err(config_error)?;
        let full = lift_coefficients(sys, &coeffs, &basis).map_err(config_error)?;
        return Ok(Some(SweepSeed::new(omega, full)));
    }
    if let Some(state) = &g.state {
        let x0 = full_state(model, state)?;
        let coeffs = settle_and_project(sys, &x0, &basis, g.settle_periods, solver.verify_tol)
            .map_err(numerical_error)?;
        return Ok(Some(SweepSeed::new(omega, coeffs)));
    }
    if let (Some(family), Some(amps)) = (g.family, &g.amplitudes) {
        let p = model
            .crtbp
            .as_ref()
            .ok_or_else(|| CliError::Config("`family` needs the crtbp system".into()))?;
        let at = template.with_omega(omega).map_err(config_error)?;
        return ramp_seed(&at, amps, &newton_options(solver), g.min_amplitude, |a| {
            family_seed(sys, p, family, omega, a, order)
        })
        .map_err(numerical_error);
    }
    Ok(Some(SweepSeed::new(
        omega,
        FourierCoeffs::zeros(sys.dim(), order),
    )))
}
