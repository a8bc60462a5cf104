use proptest::prelude::*;
use rhb::assembly::{build_time_domain_residual, MethodConfig, MethodMode};
use rhb::integrate::{orbit_keeping, settle_and_project, verify_periodicity, OrbitKeepingOptions};
use rhb::solvers::{
    family_seed, multistart, newton_solve, ramp_seed, Classification, CrtbpFamily, NewtonOptions,
    PhysicalityCriteria,
};
use rhb::spectral::{FourierCoeffs, HarmonicBasis};
use rhb::systems::{crtbp_recast, duffing_system, CrtbpParams, DuffingParams};

fn duffing() -> rhb::systems::SystemDef {
    duffing_system(&DuffingParams::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn damped_newton_history_never_increases(
        order in 1usize..=5,
        start in prop::collection::vec(-3.0f64..3.0, 22),
        mode in prop::sample::select(vec![MethodMode::Rhb, MethodMode::Hdhb]),
    ) {
        let res = build_time_domain_residual(&duffing(), &MethodConfig::new(mode, order, 2.0)).unwrap();
        let x0 = res.expand(&start.iter().cycle().take(res.unknown_count()).copied().collect::<Vec<_>>());
        let rep = newton_solve(&res, &x0, &NewtonOptions::default()).unwrap();
        prop_assert!(rep.residual_history.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(rep.residual_history.len(), rep.iterations + 1);
    }
}

#[test]
fn extra_nodes_past_the_threshold_change_nothing() {
    let sys = duffing();
    let order = 3;
    let basis = HarmonicBasis::new(order, 2.0).unwrap();
    let seed = settle_and_project(&sys, &[0.1, 0.0], &basis, 200, 1e-12).unwrap();
    let solve = |m: usize| {
        let res = build_time_domain_residual(&sys, &MethodConfig::custom(order, 2.0, m)).unwrap();
        let rep = newton_solve(&res, &seed, &NewtonOptions::default()).unwrap();
        assert!(rep.converged, "M={m}");
        rep.coeffs
    };
    let reference = solve(4 * order + 1);
    for m in 4 * order + 2..=4 * order + 12 {
        let c = solve(m);
        let gap = c
            .as_slice()
            .iter()
            .zip(reference.as_slice())
            .fold(0.0f64, |g, (a, b)| g.max((a - b).abs()));
        assert!(gap < 1e-9, "M={m}: {gap}");
    }
}

#[test]
fn defect_falls_along_an_order_ladder() {
    let sys = duffing();
    let mut last = f64::INFINITY;
    let mut coeffs: Option<FourierCoeffs> = None;
    for order in [3usize, 6, 12] {
        let res = build_time_domain_residual(&sys, &MethodConfig::new(MethodMode::Rhb, order, 2.0))
            .unwrap();
        let start = match &coeffs {
            Some(c) => c.clone(),
            None => settle_and_project(&sys, &[0.1, 0.0], res.basis(), 200, 1e-12).unwrap(),
        };
        let rep = newton_solve(&res, &start, &NewtonOptions::default()).unwrap();
        assert!(rep.converged);
        let defect = verify_periodicity(&sys, &rep.coeffs, res.basis()).defect_rms;
        assert!(defect < last, "N={order}: {defect} after {last}");
        last = defect;
        coeffs = Some(rep.coeffs);
    }
}

#[test]
fn physical_clusters_pass_the_integration_check_and_resolve_to_themselves() {
    let res = build_time_domain_residual(&duffing(), &MethodConfig::new(MethodMode::Rhb, 3, 2.0))
        .unwrap();
    let criteria = PhysicalityCriteria::default();
    let out = multistart(
        &res,
        &[(-5.0, 5.0)],
        150,
        11,
        &NewtonOptions::default(),
        &criteria,
    )
    .unwrap();
    assert!(!out.clusters.is_empty());
    for c in &out.clusters {
        let rep = &c.representative;
        if rep.classification == Classification::Physical {
            let m = rep.verification.as_ref().unwrap();
            assert!(m.period_return_error < criteria.period_return);
            assert!(m.relative_defect() < criteria.relative_defect);
        }
        let again = newton_solve(&res, &rep.coeffs, &NewtonOptions::default()).unwrap();
        assert!(again.converged);
        let gap = again
            .coeffs
            .as_slice()
            .iter()
            .zip(rep.coeffs.as_slice())
            .fold(0.0f64, |g, (a, b)| g.max((a - b).abs()));
        assert!(gap < 1e-10, "{gap}");
    }
}

#[test]
fn perturbing_an_unstable_orbit_shortens_orbit_keeping() {
    let p = CrtbpParams::earth_moon_l2();
    let sys = crtbp_recast(&p);
    let order = 20;
    let omega = 1.83;
    let template =
        build_time_domain_residual(&sys, &MethodConfig::new(MethodMode::Rhb, order, omega))
            .unwrap();
    let seed = ramp_seed(
        &template,
        &[0.02, 0.04],
        &NewtonOptions::default(),
        1e-3,
        |a| family_seed(&sys, &p, CrtbpFamily::PlanarLyapunov, omega, a, order),
    )
    .unwrap()
    .expect("planar orbit found");
    let basis = HarmonicBasis::new(order, omega).unwrap();
    let opts = OrbitKeepingOptions {
        max_periods: 30,
        ..OrbitKeepingOptions::default()
    };
    let nominal = orbit_keeping(&sys, &seed.coeffs, &basis, &opts).unwrap();
    let mut shifted = seed.coeffs.clone();
    shifted.component_mut(0)[0] += 1e-6;
    let perturbed = orbit_keeping(&sys, &shifted, &basis, &opts).unwrap();
    assert!(
        perturbed.periods_maintained < nominal.periods_maintained,
        "{} vs {}",
        perturbed.periods_maintained,
        nominal.periods_maintained
    );
}
