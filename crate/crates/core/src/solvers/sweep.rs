use super::multistart::coefficient_distance;
use super::newton::{newton_solve, NewtonOptions};
use crate::assembly::ResidualSystem;
use crate::error::{HbError, Result};
use crate::spectral::{peak_amplitudes, FourierCoeffs};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepSeed {
    pub omega: f64,
    pub coeffs: FourierCoeffs,
    /// Phase-anchor coordinate for this seed's branch, overriding the template's.
    pub anchor: Option<usize>,
}

impl SweepSeed {
    pub fn new(omega: f64, coeffs: FourierCoeffs) -> Self {
        Self {
            omega,
            coeffs,
            anchor: None,
        }
    }

    pub fn with_anchor(mut self, coordinate: usize) -> Self {
        self.anchor = Some(coordinate);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub newton: NewtonOptions,
    /// Step halvings allowed before a branch end is declared.
    pub max_halvings: usize,
    pub amplitude_samples: usize,
    /// Relative coefficient distance under which two points coincide.
    pub coincidence: f64,
    /// Largest relative coefficient change accepted between neighbouring points.
    pub max_jump: f64,
    /// A branch ends where every physical amplitude falls below this value,
    /// e.g. when an orbit family shrinks onto an equilibrium. Zero disables it.
    pub min_amplitude: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            newton: NewtonOptions::default(),
            max_halvings: 4,
            amplitude_samples: 1024,
            coincidence: 1e-6,
            max_jump: 0.25,
            min_amplitude: 0.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BranchPoint {
    pub omega: f64,
    pub coeffs: FourierCoeffs,
    /// Peak deviation from the mean of each physical coordinate.
    pub amplitude: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Branch {
    pub id: usize,
    pub seed: usize,
    pub anchor: Option<usize>,
    /// Points on the global ω grid, in increasing ω.
    pub points: Vec<BranchPoint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub branch: usize,
    pub other: usize,
    pub omega: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepResult {
    pub branches: Vec<Branch>,
    pub intersections: Vec<Intersection>,
}

struct Work {
    seed: usize,
    anchor: Option<usize>,
    points: BTreeMap<usize, (Vec<f64>, FourierCoeffs)>,
}

struct Grid {
    lo: f64,
    step: f64,
    last: usize,
}

impl Grid {
    fn omega(&self, k: usize) -> f64 {
        self.lo + k as f64 * self.step
    }
}

/// Natural-parameter continuation in ω. Every seed is first solved at its own
/// frequency, carried to the nearest point of the global grid `lo + k·step`,
/// then continued upward and downward with the previous solution as
/// predictor. A branch ends when a step still fails after
/// `max_halvings` halvings, or when it lands on a point of an earlier branch
/// (recorded as an intersection). Branches whose first grid point repeats an
/// earlier branch are dropped.
pub fn frequency_sweep(
    template: &ResidualSystem,
    omega_range: (f64, f64),
    step: f64,
    seeds: &[SweepSeed],
    opts: &SweepOptions,
) -> Result<SweepResult> {
    let (lo, hi) = omega_range;
    if !(lo < hi) || !(step > 0.0) || lo <= 0.0 {
        return Err(HbError::InvalidInput(format!(
            "sweep needs 0 < lo < hi and step > 0, got [{lo}, {hi}] step {step}"
        )));
    }
    let grid = Grid {
        lo,
        step,
        last: ((hi - lo) / step + 1e-9).floor() as usize,
    };
    let mut done: Vec<Work> = Vec::new();
    let mut intersections: Vec<(usize, usize, f64)> = Vec::new();

    for (seed_idx, seed) in seeds.iter().enumerate() {
        let anchor = seed.anchor.or(template.anchor());
        let res = template.clone().with_anchor(anchor);
        let mut work = Work {
            seed: seed_idx,
            anchor,
            points: BTreeMap::new(),
        };
        let Some(start) = solve_at(&res, seed.omega, &seed.coeffs, opts) else {
            done.push(work);
            continue;
        };
        let k0 = (((seed.omega - lo) / step).round().max(0.0) as usize).min(grid.last);
        let Some(first) = march(&res, (seed.omega, start), grid.omega(k0), opts)
            .filter(|x| !collapsed(&res, grid.omega(k0), x, opts))
        else {
            done.push(work);
            continue;
        };
        if find_match(&done, k0, &first, opts.coincidence).is_some() {
            continue;
        }
        let me = done.len();
        work.points.insert(k0, (first.clone(), res.expand(&first)));
        for dir in [1i64, -1] {
            let mut prev = (grid.omega(k0), first.clone());
            let mut k = k0 as i64 + dir;
            while k >= 0 && k as usize <= grid.last {
                let ku = k as usize;
                let Some(x) = march(&res, prev.clone(), grid.omega(ku), opts) else {
                    break;
                };
                if collapsed(&res, grid.omega(ku), &x, opts) {
                    break;
                }
                if let Some(other) = find_match(&done, ku, &x, opts.coincidence) {
                    intersections.push((me, other, grid.omega(ku)));
                    work.points.insert(ku, (x.clone(), res.expand(&x)));
                    break;
                }
                work.points.insert(ku, (x.clone(), res.expand(&x)));
                prev = (grid.omega(ku), x);
                k += dir;
            }
        }
        done.push(work);
    }

    let basis = *template.basis();
    let physical = template.system().physical_dim();
    let branches = done
        .into_iter()
        .enumerate()
        .map(|(id, w)| Branch {
            id,
            seed: w.seed,
            anchor: w.anchor,
            points: w
                .points
                .into_iter()
                .map(|(k, (_, coeffs))| {
                    let omega = grid.omega(k);
                    let b = basis
                        .with_omega(omega)
                        .expect("grid frequencies are positive");
                    let mut amplitude = peak_amplitudes(&coeffs, &b, opts.amplitude_samples);
                    amplitude.truncate(physical);
                    BranchPoint {
                        omega,
                        coeffs,
                        amplitude,
                    }
                })
                .collect(),
        })
        .collect();
    Ok(SweepResult {
        branches,
        intersections: intersections
            .into_iter()
            .map(|(branch, other, omega)| Intersection {
                branch,
                other,
                omega,
            })
            .collect(),
    })
}

fn collapsed(res: &ResidualSystem, omega: f64, x: &[f64], opts: &SweepOptions) -> bool {
    if opts.min_amplitude <= 0.0 {
        return false;
    }
    let Ok(basis) = res.basis().with_omega(omega) else {
        return true;
    };
    let physical = res.system().physical_dim();
    peak_amplitudes(&res.expand(x), &basis, opts.amplitude_samples)
        .iter()
        .take(physical)
        .all(|&a| a < opts.min_amplitude)
}

fn find_match(done: &[Work], k: usize, x: &[f64], tol: f64) -> Option<usize> {
    done.iter().position(|w| {
        w.points
            .get(&k)
            .is_some_and(|(y, _)| y.len() == x.len() && coefficient_distance(x, y) < tol)
    })
}

fn solve_at(
    res: &ResidualSystem,
    omega: f64,
    guess: &FourierCoeffs,
    opts: &SweepOptions,
) -> Option<Vec<f64>> {
    let r = res.with_omega(omega).ok()?;
    let rep = newton_solve(&r, guess, &opts.newton).ok()?;
    rep.converged.then(|| r.reduce(&rep.coeffs))
}

/// Continues a solution from `from.0` to `target`, halving the step on failure.
fn march(
    res: &ResidualSystem,
    from: (f64, Vec<f64>),
    target: f64,
    opts: &SweepOptions,
) -> Option<Vec<f64>> {
    let (mut omega, mut x) = from;
    let mut h = target - omega;
    let mut halvings = 0;
    while omega != target {
        let next = if (target - omega).abs() <= h.abs() * (1.0 + 1e-12) {
            target
        } else {
            omega + h
        };
        let guess = res.expand(&x);
        match solve_at(res, next, &guess, opts) {
            Some(y) if coefficient_distance(&x, &y) <= opts.max_jump => {
                omega = next;
                x = y;
            }
            _ => {
                halvings += 1;
                if halvings > opts.max_halvings {
                    return None;
                }
                h *= 0.5;
            }
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{build_time_domain_residual, MethodConfig, MethodMode};
    use crate::solvers::{multistart, PhysicalityCriteria};
    use crate::systems::{duffing_system, linear_oscillator, DuffingParams};

    #[test]
    fn linear_oscillator_matches_transfer_function() {
        let (c, k, f) = (0.1, 1.0, 1.0);
        let sys = linear_oscillator(c, k, f);
        let res =
            build_time_domain_residual(&sys, &MethodConfig::new(MethodMode::Rhb, 2, 0.5)).unwrap();
        let seed = SweepSeed::new(0.5, FourierCoeffs::zeros(2, 2));
        let out =
            frequency_sweep(&res, (0.5, 1.5), 0.05, &[seed], &SweepOptions::default()).unwrap();
        assert_eq!(out.branches.len(), 1);
        let pts = &out.branches[0].points;
        assert_eq!(pts.len(), 21);
        for p in pts {
            let w = p.omega;
            let gain = f / ((k - w * w).powi(2) + (c * w).powi(2)).sqrt();
            assert!((p.amplitude[0] - gain).abs() < 1e-8, "ω={w}");
        }
        assert!(pts.windows(2).all(|w| w[0].omega < w[1].omega));
    }

    #[test]
    fn duplicate_seed_is_dropped() {
        let sys = linear_oscillator(0.1, 1.0, 1.0);
        let res =
            build_time_domain_residual(&sys, &MethodConfig::new(MethodMode::Rhb, 1, 0.5)).unwrap();
        let seeds = vec![
            SweepSeed::new(0.5, FourierCoeffs::zeros(2, 1)),
            SweepSeed::new(0.8, FourierCoeffs::zeros(2, 1)),
        ];
        let out = frequency_sweep(&res, (0.5, 1.0), 0.1, &seeds, &SweepOptions::default()).unwrap();
        assert_eq!(out.branches.len(), 1);
    }

    #[test]
    fn duffing_fold_has_three_coexisting_points() {
        let sys = duffing_system(&DuffingParams::default()).unwrap();
        let res =
            build_time_domain_residual(&sys, &MethodConfig::new(MethodMode::Rhb, 3, 2.0)).unwrap();
        let found = multistart(
            &res,
            &[(-5.0, 5.0)],
            200,
            5,
            &NewtonOptions::default(),
            &PhysicalityCriteria::default(),
        )
        .unwrap();
        let seeds: Vec<SweepSeed> = found
            .clusters
            .iter()
            .map(|c| SweepSeed::new(2.0, c.representative.coeffs.clone()))
            .collect();
        let out =
            frequency_sweep(&res, (1.5, 3.0), 0.02, &seeds, &SweepOptions::default()).unwrap();
        let at_two = out
            .branches
            .iter()
            .filter(|b| b.points.iter().any(|p| (p.omega - 2.0).abs() < 1e-9))
            .count();
        assert_eq!(at_two, found.clusters.len());
        assert_eq!(at_two, 3);
        // The low-amplitude branch spans the whole range; the others end at folds.
        assert!(out.branches.iter().any(|b| b.points.len() < 76));
    }
}
