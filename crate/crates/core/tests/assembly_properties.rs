use nalgebra::DVector;
use proptest::prelude::*;
use rhb::assembly::{
    build_hb_residual, build_time_domain_residual, Formulation, MethodConfig, MethodMode,
};
use rhb::integrate::settle_and_project;
use rhb::spectral::{eval_series, eval_series_derivative, HarmonicBasis};
use rhb::systems::{
    crtbp_recast, duffing_system, rayleigh_plesset_recast, CrtbpParams, DuffingParams,
    RayleighPlessetParams, SystemDef,
};

fn polynomial_system(which: usize, a: f64, b: f64) -> SystemDef {
    match which {
        0 => duffing_system(&DuffingParams::single(
            a.abs(),
            1.0 + b,
            1.0 + a,
            3,
            1.0,
            2.0,
        ))
        .unwrap(),
        1 => duffing_system(&DuffingParams::single(0.05, 1.0, b, 5, a.abs(), 1.0)).unwrap(),
        2 => duffing_system(&DuffingParams {
            terms: vec![(a, 2), (b, 3)],
            ..DuffingParams::default()
        })
        .unwrap(),
        3 => rayleigh_plesset_recast(&RayleighPlessetParams {
            a: a.abs(),
            ..RayleighPlessetParams::default()
        }),
        _ => crtbp_recast(&CrtbpParams::earth_moon_l2()),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn time_and_frequency_residuals_agree_past_the_threshold(
        which in 0usize..5,
        order in 1usize..=4,
        extra in 1usize..=6,
        a in -1.0f64..1.0,
        b in -1.0f64..1.0,
        seed in prop::collection::vec(-1.0f64..1.0, 8 * 9),
        omega in 0.5f64..3.0,
    ) {
        let sys = polynomial_system(which, a, b);
        let phi = sys.degree_phi().unwrap() as usize;
        let m = (phi + 1) * order + extra;
        let basis = HarmonicBasis::new(order, omega).unwrap();
        let td = build_time_domain_residual(&sys, &MethodConfig::custom(order, omega, m)).unwrap();
        let fd = build_hb_residual(&sys, &basis).unwrap();
        let u: Vec<f64> = seed.iter().cycle().take(td.unknown_count()).map(|v| 0.5 * v).collect();
        let r1 = td.residual(&u).unwrap();
        let r2 = fd.residual(&u).unwrap();
        prop_assert_eq!(r1.len(), r2.len());
        let scale = r2.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        for (x, y) in r1.iter().zip(&r2) {
            prop_assert!((x - y).abs() <= 1e-10 * scale, "{} vs {}", x, y);
        }
    }

    #[test]
    fn hdhb_residual_is_the_nodal_defect(
        order in 1usize..=6,
        seed in prop::collection::vec(-1.5f64..1.5, 26),
        omega in 0.5f64..3.0,
    ) {
        let sys = duffing_system(&DuffingParams::default()).unwrap();
        let res = build_time_domain_residual(&sys, &MethodConfig::new(MethodMode::Hdhb, order, omega)).unwrap();
        let Formulation::TimeDomain(ops) = res.formulation().clone() else { unreachable!() };
        let size = 2 * order + 1;
        let u: Vec<f64> = seed.iter().cycle().take(res.unknown_count()).copied().collect();
        let c = res.expand(&u);
        let r = res.residual(&u).unwrap();
        let b = res.basis();
        for k in 0..2 {
            let nodal = &ops.e * DVector::from_column_slice(&r[k * size..(k + 1) * size]);
            for i in 0..size {
                let t = i as f64 * b.period() / size as f64;
                let x = eval_series(&c, b, t);
                let defect = eval_series_derivative(&c, b, t)[k] - sys.eval_vec(&x, t, omega)[k];
                prop_assert!((nodal[i] - defect).abs() < 1e-10 * (1.0 + defect.abs()));
            }
        }
    }
}

#[test]
fn residual_of_the_true_orbit_shrinks_with_order() {
    let sys = duffing_system(&DuffingParams::default()).unwrap();
    let mut last = f64::INFINITY;
    for order in [2usize, 4, 8, 16] {
        let res = build_time_domain_residual(&sys, &MethodConfig::new(MethodMode::Rhb, order, 2.0))
            .unwrap();
        let truth = settle_and_project(&sys, &[0.1, 0.0], res.basis(), 200, 1e-13).unwrap();
        let norm = res
            .residual(&res.reduce(&truth))
            .unwrap()
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(
            norm <= last || norm < 1e-11,
            "N={order}: {norm} after {last}"
        );
        last = norm;
    }
    assert!(last < 1e-9, "{last}");
}
