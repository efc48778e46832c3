use std::f64::consts::PI;

use approx::assert_relative_eq;
use dlab_core::lattice::{
    ball_mask, forward_transform, gaussian_min_extent, inverse_transform, make_lattice,
    read_snapshot, riesz_multiplier, safe_horizon, weight_field, Field, Lattice,
};
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

#[test]
fn round_trip_and_parseval_on_noise() {
    for (dim, n) in [(1, 256), (2, 32), (3, 16)] {
        let lat = make_lattice(dim, 7.5, n, true).unwrap();
        let f = noise(&lat, 11 + dim as u64);
        let spec = forward_transform(&f);
        let back = inverse_transform(&spec);
        assert!(back.distance(&f).unwrap() <= 1e-12 * f.norm());
        assert_relative_eq!(spec.norm_sq(), f.norm_sq(), max_relative = 1e-12);
    }
}

#[test]
fn gaussian_mass_matches_closed_form() {
    // ∫e^{−x²}dx = √π in 1D, π in 2D.
    let lat = make_lattice(1, 40.0, 1024, true).unwrap();
    assert_relative_eq!(
        Field::gaussian(&lat, 1.0, 1.0, 0.0).norm_sq(),
        PI.sqrt(),
        max_relative = 1e-13
    );
    let lat = make_lattice(2, 20.0, 128, false).unwrap();
    assert_relative_eq!(
        Field::gaussian(&lat, 1.0, 1.0, 0.0).norm_sq(),
        PI,
        max_relative = 1e-12
    );
}

#[test]
fn zero_mode_is_the_integral() {
    let lat = make_lattice(2, 12.0, 64, true).unwrap();
    let f = noise(&lat, 5);
    let total: Complex64 = f.values().iter().sum::<Complex64>() * lat.cell_volume();
    let dc = forward_transform(&f).values()[0];
    assert!((dc - total).norm() <= 1e-12 * total.norm().max(1.0));
}

#[test]
fn gaussian_spectrum_is_a_gaussian() {
    // F[e^{−x²/2}](k) = √(2π) e^{−k²/2}, phase-free because of the h^N·e^{−ik·x_j} convention.
    let lat = make_lattice(1, 40.0, 512, true).unwrap();
    let spec = forward_transform(&Field::gaussian(&lat, 1.0, 1.0, 0.0));
    for (m, k) in lat.wavenumbers(0).into_iter().enumerate() {
        let expect = (2.0 * PI).sqrt() * (-0.5 * k * k).exp();
        assert!((spec.values()[m] - expect).norm() < 1e-12, "k = {k}");
    }
}

#[test]
fn weight_field_symmetry_and_singularity() {
    let lat = make_lattice(1, 10.0, 64, true).unwrap();
    let w = weight_field(&lat, 0.5).unwrap();
    let v = w.values();
    for j in 0..64 {
        assert_relative_eq!(v[j], v[63 - j], max_relative = 1e-14);
    }
    let peak = v.iter().cloned().fold(0.0, f64::max);
    let h = lat.spacing(0);
    assert_relative_eq!(peak, (0.5 * h).powf(-0.5), max_relative = 1e-14);
    assert!(matches!(
        weight_field(&make_lattice(1, 10.0, 64, false).unwrap(), 0.5),
        Err(Error::OriginOnGrid(_))
    ));
    assert!(weight_field(&make_lattice(1, 10.0, 64, false).unwrap(), 0.0).is_ok());
}

#[test]
fn weighted_gaussian_quadrature_within_one_percent() {
    // ∫|x|^{−1/2}e^{−x²}dx = Γ(1/4); the midpoint error near the singularity is O(h^{1/2}).
    let lat = make_lattice(1, 12.0, 65536, true).unwrap();
    let w = weight_field(&lat, 0.5).unwrap();
    let g = Field::gaussian(&lat, 1.0 / 2f64.sqrt(), 1.0, 0.0);
    let integral: f64 = g
        .values()
        .iter()
        .zip(w.values())
        .map(|(z, wv)| z.re * wv)
        .sum::<f64>()
        * lat.cell_volume();
    let gamma_quarter = statrs::function::gamma::gamma(0.25);
    assert!(
        (integral / gamma_quarter - 1.0).abs() < 1e-2,
        "{integral} vs {gamma_quarter}"
    );
}

#[test]
fn riesz_multiplier_is_radial_and_zero_mode_free() {
    let lat = make_lattice(2, 2.0 * PI, 16, true).unwrap();
    let m = riesz_multiplier(&lat, 1.0).unwrap();
    let k = lat.wavenumbers(0);
    let at = |i: usize, j: usize| m.values()[i * 16 + j].re;
    assert_eq!(at(0, 0), 0.0);
    assert_relative_eq!(at(0, 1), 1.0);
    assert_relative_eq!(at(3, 4), 1.0 / 5.0, max_relative = 1e-14);
    assert_relative_eq!(at(4, 3), at(3, 4));
    assert_relative_eq!(
        at(15, 1),
        (k[15] * k[15] + 1.0).powf(-0.5),
        max_relative = 1e-14
    );
    assert!(matches!(
        riesz_multiplier(&lat, 2.0),
        Err(Error::BadOrder { .. })
    ));
}

#[test]
fn ball_mask_counts_cells() {
    let lat = make_lattice(2, 8.0, 8, true).unwrap();
    let count: f64 = ball_mask(&lat, 1.0).values().iter().sum();
    // Centres at ±0.5 only: 4 cells with |x| = √0.5.
    assert_eq!(count, 4.0);
}

#[test]
fn safe_horizon_shrinks_with_momentum() {
    let lat = make_lattice(1, 40.0, 512, true).unwrap();
    let still = safe_horizon(&Field::gaussian(&lat, 1.0, 1.0, 0.0), 1e-10);
    let chirped = safe_horizon(&Field::gaussian(&lat, 1.0, 1.0, 0.5), 1e-10);
    assert!(still > 0.0 && chirped < still);
    let small = make_lattice(1, 10.0, 128, true).unwrap();
    assert!(safe_horizon(&Field::gaussian(&small, 1.0, 1.0, 0.0), 1e-10) < still);
}

#[test]
fn gaussian_min_extent_holds_the_mass() {
    // At the stated extent the mass within 10h of the boundary is below 1e−10.
    let (sigma, t) = (1.0, 2.0);
    let h = 0.1;
    let extent = gaussian_min_extent(sigma, t, h);
    let width2 = sigma * sigma + 4.0 * t * t / (sigma * sigma);
    let edge = 0.5 * extent - 10.0 * h;
    // |u(t)|² ∝ e^{−x²/width²}: tail fraction = erfc(edge/width).
    let tail = statrs::function::erf::erfc(edge / width2.sqrt());
    assert!(tail < 1e-9, "{tail}");
}

#[test]
fn snapshot_rejects_garbage() {
    assert!(matches!(
        read_snapshot(&b"NOPE\x01\x00"[..]),
        Err(Error::Format(_))
    ));
    let lat = make_lattice(1, 4.0, 4, true).unwrap();
    let mut buf = Vec::new();
    dlab_core::lattice::write_snapshot(&Field::zeros(&lat), &mut buf).unwrap();
    buf.truncate(buf.len() - 1);
    assert!(matches!(read_snapshot(&buf[..]), Err(Error::Io(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn snapshot_round_trip_is_bitwise(
        dim in 1usize..=3,
        half in 2usize..6,
        extent in 0.5f64..50.0,
        offset in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let lat = make_lattice(dim, extent, 2 * half, offset).unwrap();
        let f = noise(&lat, seed);
        let mut buf = Vec::new();
        dlab_core::lattice::write_snapshot(&f, &mut buf).unwrap();
        prop_assert_eq!(buf.len(), 4 + 2 + 1 + 12 * dim + 1 + 16 * lat.len());
        let g = read_snapshot(&buf[..]).unwrap();
        prop_assert_eq!(g.lattice(), f.lattice());
        for (a, b) in f.values().iter().zip(g.values()) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn parseval_holds_for_random_boxes(
        n in prop::sample::select(vec![4usize, 8, 12, 30, 64]),
        extent in 0.1f64..100.0,
        seed in any::<u64>(),
    ) {
        let lat = make_lattice(1, extent, n, true).unwrap();
        let f = noise(&lat, seed);
        let s = forward_transform(&f);
        prop_assert!((s.norm_sq() - f.norm_sq()).abs() <= 1e-12 * f.norm_sq());
        prop_assert!(inverse_transform(&s).distance(&f).unwrap() <= 1e-12 * f.norm());
    }

    #[test]
    fn multiplier_commutes_with_reflection(seed in any::<u64>()) {
        // Radial multipliers commute with x ↦ −x; on an offset lattice index j ↦ n−1−j.
        let lat = make_lattice(2, 9.0, 16, true).unwrap();
        let f = noise(&lat, seed);
        let reflect = |g: &Field| {
            let v: Vec<Complex64> = g.values().iter().rev().cloned().collect();
            Field::new(lat.clone(), v).unwrap()
        };
        let m = riesz_multiplier(&lat, 0.7).unwrap();
        let a = reflect(&m.apply(&f).unwrap());
        let b = m.apply(&reflect(&f)).unwrap();
        prop_assert!(a.distance(&b).unwrap() <= 1e-12 * a.norm().max(1e-300));
    }
}
