use std::f64::consts::PI;

use airy_lab::norms::{airy_l6, l2_norm, spacetime_norm, strichartz_functional, SpaceTimeField, StrichartzExponents};
use airy_lab::spectral::{apply_symmetry, Field, GridSpec, SymmetryParams};
use airy_lab::synth::{normalized_gaussian, random_band_limited};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Reference value of the symmetric functional for the unit Gaussian on
/// `(4096, 1024, 1025, 8)`, computed once on `(16384, 1024, 4097, 8)`.
const GAUSSIAN_REFERENCE: f64 = 0.734022266;

#[test]
fn gaussian_l2_closed_form() {
    let g = GridSpec::new(1024, 80.0, 3, 1.0, 0.5).unwrap();
    for w in [0.5, 1.0, 3.0] {
        let u = Field::from_real_fn(g, |x| (-0.5 * x * x / (w * w)).exp()).unwrap();
        // int e^{-x^2 / w^2} dx = w sqrt(pi)
        let exact = (w * PI.sqrt()).sqrt();
        assert!((l2_norm(&u) - exact).abs() < 1e-10 * exact);
    }
}

#[test]
fn separable_product_factorizes() {
    let g = GridSpec::new(512, 40.0, 201, 2.0, 0.5).unwrap();
    let f = |t: f64| Complex64::new(1.0 + t * t, 0.5 * t);
    let h = |x: f64| Complex64::from_polar((-x * x / 3.0).exp(), 0.3 * x);
    let u = SpaceTimeField::from_fn(g, |t, x| f(t) * h(x)).unwrap();

    let times = g.times();
    let dt = times[1] - times[0];
    let ft: f64 = times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let w = if i == 0 || i + 1 == times.len() { 0.5 } else { 1.0 };
            w * dt * f(t).norm().powi(6)
        })
        .sum();
    let hx: f64 = g.positions().iter().map(|&x| g.dx() * h(x).norm().powi(6)).sum();
    let expected = (ft * hx).powf(1.0 / 6.0);
    let got = spacetime_norm(&u, 6.0, 6.0).unwrap();
    assert!((got - expected).abs() < 1e-8 * expected);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spacetime_norm_is_homogeneous(re in -3.0f64..3.0, im in -3.0f64..3.0, q in 1.0f64..12.0, r in 1.0f64..12.0) {
        let g = GridSpec::new(64, 10.0, 17, 1.0, 0.5).unwrap();
        let u = SpaceTimeField::from_fn(g, |t, x| Complex64::new((-(x - t) * (x - t)).exp(), x.sin() * 0.1)).unwrap();
        let c = Complex64::new(re, im);
        let a = spacetime_norm(&u.scaled(c), q, r).unwrap();
        let b = c.norm() * spacetime_norm(&u, q, r).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
    }
}

/// `g_{0,0,h} u` evaluated on the grid whose box, step and time window follow
/// the scaling `x -> h x`, `t -> h^3 t`.
#[test]
fn symmetric_functional_is_scale_invariant() {
    let base = GridSpec::new(2048, 256.0, 257, 2.0, 0.5).unwrap();
    let reference = airy_l6(&normalized_gaussian(base, 1.0).unwrap()).unwrap().value;
    for (h, n) in [(0.5, 1024), (2.0, 4096)] {
        let g = GridSpec::new(n, 256.0 * h, 257, 2.0 * h * h * h, 0.5).unwrap();
        let p = SymmetryParams::new(h, 0.0, 0.0, 0.0, 0.0).unwrap();
        let v = apply_symmetry(&normalized_gaussian(g, 1.0).unwrap(), &p).unwrap();
        assert!(v.is_clean());
        let value = airy_l6(&v.value).unwrap().value;
        assert!((value - reference).abs() < 0.01 * reference, "h = {h}: {value} vs {reference}");
    }
}

#[test]
fn doubling_time_nodes_is_converged() {
    let g = GridSpec::new(1024, 256.0, 257, 4.0, 0.5).unwrap();
    let fine = g.with_time_window(513, 4.0).unwrap();
    let a = airy_l6(&normalized_gaussian(g, 1.0).unwrap()).unwrap().value;
    let b = airy_l6(&normalized_gaussian(fine, 1.0).unwrap()).unwrap().value;
    assert!((a - b).abs() < 1e-3 * b);
}

#[test]
fn gaussian_matches_refined_reference() {
    let g = GridSpec::new(4096, 1024.0, 1025, 8.0, 0.5).unwrap();
    let value = airy_l6(&normalized_gaussian(g, 1.0).unwrap()).unwrap().value;
    assert!((value - GAUSSIAN_REFERENCE).abs() < 1e-4 * GAUSSIAN_REFERENCE, "{value}");
}

#[test]
fn random_fields_stay_inside_the_gaussian_envelope() {
    let g = GridSpec::new(256, 64.0, 65, 1.0, 0.5).unwrap();
    let e = StrichartzExponents::symmetric();
    let gaussian_max = [0.25, 0.5, 1.0, 2.0, 4.0]
        .iter()
        .map(|&w| strichartz_functional(&normalized_gaussian(g, w).unwrap(), &e).unwrap().value)
        .fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..200 {
        let f = random_band_limited(g, 4.0, &mut rng).unwrap();
        let v = strichartz_functional(&f, &e).unwrap().value;
        assert!(v <= 1.5 * gaussian_max, "{v} vs {gaussian_max}");
    }
}

#[test]
fn zero_field_has_zero_norms() {
    let g = GridSpec::new(64, 10.0, 9, 1.0, 0.5).unwrap();
    let z = Field::zeros(g);
    assert_eq!(l2_norm(&z), 0.0);
    assert_eq!(airy_l6(&z).unwrap().value, 0.0);
}
