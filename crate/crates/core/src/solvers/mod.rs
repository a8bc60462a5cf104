//! Root finding and exploration: damped Newton, multistart with clustering,
//! natural-parameter frequency sweeps, and initial guesses.

mod multistart;
mod newton;
mod seeds;
mod sweep;

pub use multistart::{
    coefficient_distance, multistart, start_node_count, trial_rng, MultistartReport,
    SolutionCluster, CLUSTER_THRESHOLD,
};
pub use newton::{newton_solve, Classification, NewtonOptions, PhysicalityCriteria, SolveReport};
pub use seeds::{
    crtbp_linear_modes, dro_seed, family_seed, halo_seed, lift_coefficients, planar_lyapunov_seed,
    ramp_seed, vertical_lyapunov_seed, CrtbpFamily, LinearModes,
};
pub use sweep::{
    frequency_sweep, Branch, BranchPoint, Intersection, SweepOptions, SweepResult, SweepSeed,
};
