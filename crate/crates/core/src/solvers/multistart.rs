use super::newton::{
    newton_solve, Classification, NewtonOptions, PhysicalityCriteria, SolveReport,
};
use crate::assembly::ResidualSystem;
use crate::error::{HbError, Result};
use crate::spectral::{inf_norm, project_samples, FourierCoeffs};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionCluster {
    pub representative: SolveReport,
    /// Trial index that produced the representative (the lowest in the cluster).
    pub first_trial: usize,
    pub hits: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MultistartReport {
    pub trials: usize,
    pub converged_trials: usize,
    pub clusters: Vec<SolutionCluster>,
}

impl MultistartReport {
    pub fn count(&self, class: Classification) -> usize {
        self.clusters
            .iter()
            .filter(|c| c.representative.classification == class)
            .count()
    }
}

/// Relative ∞-norm distance between two coefficient vectors.
pub fn coefficient_distance(a: &[f64], b: &[f64]) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    diff / inf_norm(a).max(inf_norm(b)).max(1.0)
}

pub const CLUSTER_THRESHOLD: f64 = 1e-6;

/// Per-trial generator: the master seed selects the key, the trial index the stream.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Number of collocation states drawn per component for a random start: the
/// grid of `res`, or `(φ+1)N+1` nodes for the frequency-domain formulation.
pub fn start_node_count(res: &ResidualSystem) -> usize {
    res.node_count().unwrap_or_else(|| {
        let phi = res.system().degree_phi().unwrap_or(1) as usize;
        (phi + 1) * res.basis().order() + 1
    })
}

/// Newton from `trials` random starts followed by clustering and
/// classification of the distinct roots. A start draws every collocation
/// state `x_k(t_i)` uniformly from `bounds` (one interval for all, one per
/// state component, or one per component and node) and projects the samples
/// onto the harmonic basis.
pub fn multistart(
    res: &ResidualSystem,
    bounds: &[(f64, f64)],
    trials: usize,
    seed: u64,
    newton: &NewtonOptions,
    criteria: &PhysicalityCriteria,
) -> Result<MultistartReport> {
    let dim = res.system().dim();
    let nodes = start_node_count(res);
    if trials == 0 {
        return Err(HbError::InvalidInput(
            "at least one trial is required".into(),
        ));
    }
    let bound_index = |k: usize, i: usize| match bounds.len() {
        1 => Some(0),
        l if l == dim => Some(k),
        l if l == dim * nodes => Some(k * nodes + i),
        _ => None,
    };
    if bound_index(0, 0).is_none() {
        return Err(HbError::InvalidInput(format!(
            "expected 1, {dim} or {} bounds, got {}",
            dim * nodes,
            bounds.len()
        )));
    }
    if bounds.iter().any(|(lo, hi)| !(lo < hi)) {
        return Err(HbError::InvalidInput("every bound needs lo < hi".into()));
    }
    let outcomes: Vec<Option<SolveReport>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let mut states = vec![vec![0.0; dim]; nodes];
            for k in 0..dim {
                for (i, state) in states.iter_mut().enumerate() {
                    let (lo, hi) = bounds[bound_index(k, i).unwrap_or(0)];
                    state[k] = rng.random_range(lo..hi);
                }
            }
            let x0 = project_samples(&states, res.basis().order());
            newton_solve(res, &x0, newton).ok().filter(|r| r.converged)
        })
        .collect();

    let mut clusters: Vec<SolutionCluster> = Vec::new();
    let mut converged_trials = 0;
    for (trial, outcome) in outcomes.into_iter().enumerate() {
        let Some(report) = outcome else { continue };
        converged_trials += 1;
        let hit = clusters.iter_mut().find(|c| {
            coefficient_distance(c.representative.coeffs.as_slice(), report.coeffs.as_slice())
                < CLUSTER_THRESHOLD
        });
        match hit {
            Some(c) => c.hits += 1,
            None => clusters.push(SolutionCluster {
                representative: report,
                first_trial: trial,
                hits: 1,
            }),
        }
    }
    clusters
        .par_iter_mut()
        .for_each(|c| c.representative.classify(res, criteria));
    clusters.sort_by(|a, b| compare_coeffs(&a.representative.coeffs, &b.representative.coeffs));
    Ok(MultistartReport {
        trials,
        converged_trials,
        clusters,
    })
}

fn compare_coeffs(a: &FourierCoeffs, b: &FourierCoeffs) -> Ordering {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{build_time_domain_residual, MethodConfig, MethodMode};
    use crate::systems::{duffing_system, linear_system, DuffingParams};

    #[test]
    fn linear_system_has_one_cluster() {
        let res = build_time_domain_residual(
            &linear_system(-1.0),
            &MethodConfig::new(MethodMode::Rhb, 2, 1.0),
        )
        .unwrap();
        let rep = multistart(
            &res,
            &[(-5.0, 5.0)],
            50,
            7,
            &NewtonOptions::default(),
            &PhysicalityCriteria::default(),
        )
        .unwrap();
        assert_eq!(rep.converged_trials, 50);
        assert_eq!(rep.clusters.len(), 1);
        assert_eq!(rep.clusters[0].hits, 50);
        assert_eq!(rep.clusters[0].first_trial, 0);
    }

    #[test]
    fn trial_streams_are_independent_of_order() {
        let a: f64 = trial_rng(3, 9).random();
        let _: f64 = trial_rng(3, 2).random();
        let b: f64 = trial_rng(3, 9).random();
        assert_eq!(a, b);
        let c: f64 = trial_rng(3, 10).random();
        assert_ne!(a, c);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let sys = duffing_system(&DuffingParams::default()).unwrap();
        let res =
            build_time_domain_residual(&sys, &MethodConfig::new(MethodMode::Hdhb, 2, 2.0)).unwrap();
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                multistart(
                    &res,
                    &[(-3.0, 3.0)],
                    40,
                    11,
                    &NewtonOptions::default(),
                    &PhysicalityCriteria::default(),
                )
                .unwrap()
            })
        };
        let (a, b) = (run(1), run(4));
        assert_eq!(a.clusters.len(), b.clusters.len());
        for (x, y) in a.clusters.iter().zip(&b.clusters) {
            assert_eq!(x.representative.coeffs, y.representative.coeffs);
            assert_eq!(x.hits, y.hits);
        }
    }

    #[test]
    fn representatives_are_fixed_points_of_newton() {
        let sys = duffing_system(&DuffingParams::default()).unwrap();
        let res =
            build_time_domain_residual(&sys, &MethodConfig::new(MethodMode::Rhb, 3, 2.0)).unwrap();
        let rep = multistart(
            &res,
            &[(-5.0, 5.0)],
            60,
            1,
            &NewtonOptions::default(),
            &PhysicalityCriteria::default(),
        )
        .unwrap();
        assert!(!rep.clusters.is_empty());
        for c in &rep.clusters {
            let again =
                newton_solve(&res, &c.representative.coeffs, &NewtonOptions::default()).unwrap();
            assert!(again.converged);
            assert!(
                coefficient_distance(again.coeffs.as_slice(), c.representative.coeffs.as_slice())
                    < 1e-9
            );
        }
    }
}
