use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rhb::systems::{
    crtbp, crtbp_recast, duffing_system, linear_oscillator, rayleigh_plesset,
    rayleigh_plesset_recast, CrtbpParams, DuffingParams, LibrationPoint, RayleighPlessetParams,
    SystemDef,
};

fn finite_degree_systems() -> Vec<SystemDef> {
    let cubic = DuffingParams::default();
    let quintic = DuffingParams::single(0.05, 1.0, 0.3, 5, 0.5, 1.5);
    let mixed = DuffingParams {
        terms: vec![(1.0, 3), (0.2, 5)],
        ..DuffingParams::default()
    };
    vec![
        duffing_system(&cubic).unwrap(),
        duffing_system(&quintic).unwrap(),
        duffing_system(&mixed).unwrap(),
        linear_oscillator(0.1, 1.0, 1.0),
        rayleigh_plesset_recast(&RayleighPlessetParams::default()),
        crtbp_recast(&CrtbpParams::earth_moon_l2()),
        crtbp_recast(&CrtbpParams::new(0.3, LibrationPoint::L1).unwrap()),
    ]
}

/// Largest least-squares residual, relative to the data, when each component
/// of `s ↦ f(s·x, t)` is fitted by a polynomial of degree `fit` in `s`.
fn scaling_fit_residual(sys: &SystemDef, x: &[f64], t: f64, fit: usize) -> f64 {
    let samples = 2 * fit + 5;
    let s: Vec<f64> = (0..samples)
        .map(|i| 1.5 * (std::f64::consts::PI * (i as f64 + 0.5) / samples as f64).cos())
        .collect();
    let vander = DMatrix::from_fn(samples, fit + 1, |i, j| s[i].powi(j as i32));
    let svd = vander.clone().svd(true, true);
    let mut worst = 0.0f64;
    for k in 0..sys.dim() {
        let y = DVector::from_fn(samples, |i, _| {
            let scaled: Vec<f64> = x.iter().map(|v| v * s[i]).collect();
            sys.eval_vec(&scaled, t, 1.0)[k]
        });
        let c = svd.solve(&y, 1e-14).unwrap();
        let r = &vander * c - &y;
        worst = worst.max(r.amax() / y.amax().max(1.0));
    }
    worst
}

#[test]
fn degree_audit_confirms_declared_degree() {
    let x = [0.9, -0.7, 1.1, 0.4, -1.2, 0.8, 1.3, -0.6];
    for sys in finite_degree_systems() {
        let phi = sys.degree_phi().unwrap() as usize;
        let state = &x[..sys.dim()];
        let fits = scaling_fit_residual(&sys, state, 0.37, phi);
        assert!(
            fits < 1e-10,
            "{}: degree {phi} fit leaves {fits}",
            sys.name()
        );
        let short = scaling_fit_residual(&sys, state, 0.37, phi - 1);
        assert!(
            short > 1e-6,
            "{}: degree {} already fits ({short})",
            sys.name(),
            phi - 1
        );
    }
}

#[test]
fn non_polynomial_originals_report_no_degree() {
    assert!(crtbp(&CrtbpParams::earth_moon_l2()).degree_phi().is_none());
    assert!(rayleigh_plesset(&RayleighPlessetParams::default())
        .degree_phi()
        .is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn recast_crtbp_agrees_on_the_consistency_manifold(
        pos in prop::array::uniform3(-1.5f64..1.5),
        vel in prop::array::uniform3(-1.0f64..1.0),
    ) {
        let p = CrtbpParams::earth_moon_l2();
        let r1 = ((pos[0] + p.mu).powi(2) + pos[1].powi(2) + pos[2].powi(2)).sqrt();
        let r2 = ((pos[0] - 1.0 + p.mu).powi(2) + pos[1].powi(2) + pos[2].powi(2)).sqrt();
        prop_assume!(r1 > 0.05 && r2 > 0.05);
        let direct = crtbp(&p);
        let recast = crtbp_recast(&p);
        let state: Vec<f64> = pos.iter().chain(&vel).copied().collect();
        let f = direct.eval_vec(&state, 0.0, 1.0);
        let g = recast.eval_vec(&recast.lift_state(&state), 0.0, 1.0);
        for k in 0..6 {
            prop_assert!((f[k] - g[k]).abs() <= 1e-12 * f[k].abs().max(1.0), "component {k}: {} vs {}", f[k], g[k]);
        }
    }

    #[test]
    fn recast_rayleigh_plesset_agrees_on_the_consistency_manifold(
        r in 0.2f64..4.0, v in -3.0f64..3.0, t in 0.0f64..30.0,
    ) {
        let p = RayleighPlessetParams::default();
        let direct = rayleigh_plesset(&p);
        let recast = rayleigh_plesset_recast(&p);
        let f = direct.eval_vec(&[r, v], t, p.omega);
        let g = recast.eval_vec(&recast.lift_state(&[r, v]), t, p.omega);
        prop_assert_eq!(f[0], g[0]);
        prop_assert!((f[1] - g[1]).abs() <= 1e-12 * f[1].abs().max(1.0));
    }

    #[test]
    fn jacobi_constant_is_conserved_by_the_field(
        pos in prop::array::uniform3(-1.5f64..1.5),
        vel in prop::array::uniform3(-1.0f64..1.0),
    ) {
        let p = CrtbpParams::earth_moon_l2();
        let state: Vec<f64> = pos.iter().chain(&vel).copied().collect();
        let r1 = ((pos[0] + p.mu).powi(2) + pos[1].powi(2) + pos[2].powi(2)).sqrt();
        let r2 = ((pos[0] - 1.0 + p.mu).powi(2) + pos[1].powi(2) + pos[2].powi(2)).sqrt();
        prop_assume!(r1 > 0.05 && r2 > 0.05);
        let f = crtbp(&p).eval_vec(&state, 0.0, 1.0);
        // C = 2U − |v|², so dC/dt = 2 ∇U·v − 2 v·v̇ with ∇U written out here
        let (x, y, z) = (pos[0], pos[1], pos[2]);
        let (a, b) = ((1.0 - p.mu) / r1.powi(3), p.mu / r2.powi(3));
        let grad = [
            x - a * (x + p.mu) - b * (x - 1.0 + p.mu),
            y - a * y - b * y,
            -a * z - b * z,
        ];
        let rate: f64 = (0..3).map(|k| 2.0 * grad[k] * vel[k] - 2.0 * vel[k] * f[3 + k]).sum();
        let scale: f64 = (0..3).map(|k| (grad[k] * vel[k]).abs() + (vel[k] * f[3 + k]).abs()).sum();
        prop_assert!(rate.abs() <= 1e-12 * scale.max(1.0), "rate {rate}");
    }
}
