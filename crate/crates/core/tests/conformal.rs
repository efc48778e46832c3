use std::sync::Arc;

use approx::assert_relative_eq;
use dlab_core::conformal::{
    apriori_sup, back_propagated_profile, cauchy_increments, check_integrability,
    extrapolate_to_zero, monotone_quantity, pc_equation_residual, pc_exponent, pc_inverse,
    pc_transform, scaling_exponent, scaling_residual, scattering_state, PCFrame,
};
use dlab_core::integrator::{evolve, Coefficient, EvolutionSpec, Trajectory};
use dlab_core::lattice::{make_lattice, Field, Lattice};
use dlab_core::operators::{free_propagate, NonlinearContext};
use dlab_core::regime::{int, ratio, ModelParams};
use dlab_core::{Complex64, Error};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn noise(lat: &Lattice, seed: u64) -> Field {
    let mut rng = StdRng::seed_from_u64(seed);
    let values = (0..lat.len())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    Field::new(lat.clone(), values).unwrap()
}

fn inls() -> ModelParams {
    ModelParams::inls(1, ratio(1, 4), int(3))
}

#[test]
fn unit_time_frame_is_a_pure_phase() {
    let lat = make_lattice(1, 12.0, 64, true).unwrap();
    let u = noise(&lat, 1);
    let frame = PCFrame::new(1.0, &lat).unwrap();
    assert_eq!(frame.target(), &lat);
    let v = pc_transform(&u, &frame).unwrap();
    let expect = Field::from_fn(&lat, |x| {
        Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4 + x[0] * x[0] / 4.0)
    })
    .zip_map(&u, |phase, z| phase * z.conj())
    .unwrap();
    assert!(v.distance(&expect).unwrap() <= 1e-13 * u.norm());
}

#[test]
fn transform_rejects_the_wrong_lattice() {
    let lat = make_lattice(2, 8.0, 16, true).unwrap();
    let frame = PCFrame::new(0.5, &lat).unwrap();
    assert!(matches!(
        pc_transform(&Field::zeros(frame.target()), &frame),
        Err(Error::FrameMismatch)
    ));
    assert!(matches!(
        pc_inverse(&Field::zeros(&lat), &frame),
        Err(Error::FrameMismatch)
    ));
    assert!(PCFrame::new(0.0, &lat).is_err());
}

#[test]
fn integrability_condition() {
    assert!(check_integrability(&inls()).is_ok());
    assert_relative_eq!(pc_exponent(&inls()), -0.75);
    // q = 3/2 gives ρ = 1/4 + 1/4 − 2 = −3/2 ≤ −1.
    assert!(check_integrability(&ModelParams::inls(1, ratio(1, 4), ratio(3, 2))).is_err());
    // Hartree: ρ = N(q−1)+2b−α−2.
    let p = ModelParams::inlh(2, int(1), ratio(1, 4), int(2));
    assert_relative_eq!(pc_exponent(&p), -0.5);
}

fn free_v_run(sigma: f64, spacing: f64) -> (Trajectory, ModelParams) {
    let p = inls();
    let lat = make_lattice(1, 60.0, 1024, true).unwrap();
    let ctx = Arc::new(NonlinearContext::linear(&p, &lat).unwrap());
    let spec = EvolutionSpec::new(ctx, 0.5, 0.6, spacing)
        .with_coefficient(Coefficient::PowerLaw(pc_exponent(&p)))
        .with_snapshot_interval(spacing)
        .with_stats_stride(0);
    (
        evolve(&spec, &Field::gaussian(&lat, sigma, 1.0, 0.0)).unwrap(),
        p,
    )
}

#[test]
fn transformed_residual_reduces_to_free_residual() {
    let (tr, p) = free_v_run(2.0, 1e-3);
    assert!(pc_equation_residual(&tr, &p).unwrap() <= 1e-6);
}

#[test]
fn transformed_residual_is_second_order_in_spacing() {
    let (coarse, p) = free_v_run(1.0, 2e-2);
    let (fine, _) = free_v_run(1.0, 1e-2);
    let ratio =
        pc_equation_residual(&coarse, &p).unwrap() / pc_equation_residual(&fine, &p).unwrap();
    assert!((3.6..=4.4).contains(&ratio), "{ratio}");
}

#[test]
fn transformed_residual_of_a_direct_run_matches_a_native_run() {
    // v(τ) = pc_transform(u(1/τ)) at τ ∈ {0.49, 0.5, 0.51}, each from a u-run on
    // the lattice of extent L_v/τ, against a native v-run through the same times.
    let p = inls();
    let (lv, n, amp) = (40.0, 1024, 0.3);
    let taus = [0.49, 0.5, 0.51];
    let lat_v = make_lattice(1, lv, n, true).unwrap();
    let from_u: Vec<(f64, Field)> = taus
        .iter()
        .map(|&tau| {
            let lat_u = make_lattice(1, lv / tau, n, true).unwrap();
            let ctx = Arc::new(NonlinearContext::new(&p, &lat_u).unwrap());
            let spec = EvolutionSpec::new(ctx, 1.0, 1.0 / tau, 1e-3).with_stats_stride(0);
            let u = evolve(&spec, &Field::gaussian(&lat_u, 1.0, amp, 0.0)).unwrap();
            let v = pc_transform(u.final_state(), &PCFrame::new(tau, &lat_u).unwrap()).unwrap();
            (tau, v)
        })
        .collect();
    let ctx_v = Arc::new(NonlinearContext::new(&p, &lat_v).unwrap());
    let spec = EvolutionSpec::new(ctx_v, taus[0], taus[2], 1e-4)
        .with_coefficient(Coefficient::PowerLaw(pc_exponent(&p)))
        .with_snapshots(vec![taus[1]])
        .with_stats_stride(0);
    let native = evolve(&spec, &from_u[0].1).unwrap();
    let transformed = Trajectory {
        spec,
        snapshots: from_u,
        stats: Vec::new(),
    };
    let r_native = pc_equation_residual(&native, &p).unwrap();
    let r_transformed = pc_equation_residual(&transformed, &p).unwrap();
    assert!(
        r_transformed <= 10.0 * r_native && r_native <= 10.0 * r_transformed,
        "{r_transformed:e} vs {r_native:e}"
    );
}

#[test]
fn monotone_quantity_along_a_native_run() {
    let p = inls();
    let lat = make_lattice(1, 40.0, 2048, true).unwrap();
    let ctx = Arc::new(NonlinearContext::new(&p, &lat).unwrap());
    assert_eq!(
        monotone_quantity(&Field::zeros(&lat), 0.5, &ctx).unwrap(),
        0.0
    );
    let spec = EvolutionSpec::new(ctx.clone(), 0.1, 1.0, 2e-4)
        .with_coefficient(Coefficient::PowerLaw(pc_exponent(&p)))
        .with_snapshot_interval(0.05)
        .with_stats_stride(0);
    let tr = evolve(&spec, &Field::gaussian(&lat, 1.0, 1.0, 0.0)).unwrap();
    let seq: Vec<f64> = tr
        .snapshots
        .iter()
        .map(|(t, v)| monotone_quantity(v, *t, &ctx).unwrap())
        .collect();
    let scale = seq.iter().cloned().fold(0.0, f64::max);
    assert!(
        seq.windows(2).all(|w| w[1] >= w[0] - 1e-4 * scale),
        "{seq:?}"
    );
    let sup = apriori_sup(&tr);
    assert!(sup.is_finite() && sup > 0.0);
}

#[test]
fn profiles_of_free_runs_are_constant() {
    let lat = make_lattice(1, 40.0, 512, true).unwrap();
    let ctx = Arc::new(NonlinearContext::linear(&inls(), &lat).unwrap());
    let u0 = Field::gaussian(&lat, 1.0, 1.0, 0.2);
    let spec = EvolutionSpec::new(ctx, 0.0, 4.0, 0.1)
        .with_snapshots(vec![1.0, 2.0])
        .with_stats_stride(0);
    let tr = evolve(&spec, &u0).unwrap();
    assert_eq!(back_propagated_profile(&u0, 0.0), u0);
    for (t, u) in &tr.snapshots {
        assert!(back_propagated_profile(u, *t).distance(&u0).unwrap() <= 1e-12);
    }
    for d in cauchy_increments(&tr, &[1.0, 2.0, 4.0]).unwrap() {
        assert!(d <= 1e-12);
    }
    let est = scattering_state(&tr).unwrap();
    assert!(est.state.distance(&u0).unwrap() <= 1e-12);
    assert!(matches!(
        cauchy_increments(&tr, &[1.0, 3.0]),
        Err(Error::MissingSnapshot(_))
    ));
    assert!(cauchy_increments(&tr, &[2.0, 1.0]).is_err());
}

fn scattering_run(amp: f64, t1: f64, q: i64) -> Trajectory {
    let lat = make_lattice(1, 400.0, 4096, true).unwrap();
    let ctx =
        Arc::new(NonlinearContext::new(&ModelParams::inls(1, ratio(1, 4), int(q)), &lat).unwrap());
    let spec = EvolutionSpec::new(ctx, 0.0, t1, 5e-3)
        .with_snapshots(vec![t1 / 4.0, t1 / 2.0])
        .with_stats_stride(0);
    evolve(&spec, &Field::gaussian(&lat, 1.0, amp, 0.0)).unwrap()
}

#[test]
fn scattering_state_departs_at_order_q() {
    let gap = |amp: f64| {
        let tr = scattering_run(amp, 4.0, 3);
        scattering_state(&tr)
            .unwrap()
            .state
            .distance(tr.initial())
            .unwrap()
    };
    let ratio = gap(0.1) / gap(0.05);
    assert!((ratio - 8.0).abs() < 0.4, "{ratio}");
}

#[test]
fn doubling_the_horizon_moves_the_state_less_than_the_last_increment() {
    let short = scattering_run(1.0, 8.0, 3);
    let long = scattering_run(1.0, 16.0, 3);
    let a = scattering_state(&short).unwrap();
    let b = scattering_state(&long).unwrap();
    assert!(a.error_proxy > 0.0);
    assert!(b.state.distance(&a.state).unwrap() <= a.error_proxy);
}

#[test]
fn richardson_extrapolation_is_exact_for_linear_data() {
    let lat = make_lattice(1, 10.0, 32, true).unwrap();
    let a = noise(&lat, 1);
    let b = noise(&lat, 2);
    let at = |tau: f64| a.zip_map(&b, |x, y| x + y * tau).unwrap();
    let (est, unc) = extrapolate_to_zero(&at(0.1), &at(0.05)).unwrap();
    assert!(est.distance(&a).unwrap() <= 1e-14);
    assert_relative_eq!(unc, 0.05 * b.norm(), max_relative = 1e-12);
}

#[test]
fn scaling_exponents_are_exact() {
    assert_eq!(scaling_exponent(&inls()), ratio(7, 8));
    assert_eq!(
        scaling_exponent(&ModelParams::inlh(2, int(1), ratio(1, 4), int(2))),
        ratio(5, 4)
    );
}

#[test]
fn scaling_symmetry_both_models() {
    let lat = make_lattice(1, 30.0, 256, true).unwrap();
    let u0 = Field::gaussian(&lat, 1.0, 1.5, 0.1);
    for kappa in [2.0, 1.7] {
        let r = scaling_residual(&inls(), &u0, kappa, 0.3, 1e-3).unwrap();
        assert!(
            r.relative_error <= 1e-8,
            "INLS κ={kappa}: {}",
            r.relative_error
        );
    }
    let lat = make_lattice(2, 12.0, 32, true).unwrap();
    let u0 = Field::gaussian(&lat, 1.0, 2.0, 0.0);
    let p = ModelParams::inlh(2, int(1), ratio(1, 4), int(2));
    let r = scaling_residual(&p, &u0, 1.5, 0.2, 2e-3).unwrap();
    assert!(r.relative_error <= 1e-8, "INLH: {}", r.relative_error);
    assert_relative_eq!(r.exponent, 1.25);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn transform_is_an_isometry_with_an_exact_inverse(
        dim in 1usize..=3,
        t in 0.05f64..5.0,
        seed in any::<u64>(),
    ) {
        let lat = make_lattice(dim, 9.0, 8, true).unwrap();
        let u = noise(&lat, seed);
        let frame = PCFrame::new(t, &lat).unwrap();
        let v = pc_transform(&u, &frame).unwrap();
        prop_assert!((v.norm_sq() / u.norm_sq() - 1.0).abs() <= 1e-12);
        let back = pc_inverse(&v, &frame).unwrap();
        prop_assert!(back.distance(&u).unwrap() <= 1e-12 * u.norm());
    }

    #[test]
    fn profile_preserves_mass(t in -10.0f64..10.0, seed in any::<u64>()) {
        let lat = make_lattice(2, 9.0, 16, true).unwrap();
        let u = noise(&lat, seed);
        let psi = back_propagated_profile(&u, t);
        prop_assert!((psi.norm_sq() / u.norm_sq() - 1.0).abs() <= 1e-12);
        prop_assert!(free_propagate(&psi, t).distance(&u).unwrap() <= 1e-12 * u.norm());
    }
}
