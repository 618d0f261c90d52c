use std::collections::HashMap;
use std::f64::consts::PI;

use airy_lab::refined::{
    best_cell_interval, brute_force_cell_interval, concentration_functional, max_multiplicity, modulation_check,
    refined_ratio, restriction_decay_check, restriction_finiteness_check, whitney_pair_containing, whitney_pairs,
    DyadicInterval, WhitneyPair, DEFAULT_P,
};
use airy_lab::spectral::{apply_symmetry, Field, GridSpec, SymmetryParams};
use airy_lab::synth::{normalized_gaussian, random_packets, PacketBank};
use airy_lab::LabError;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn magnitudes(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // heavy-tailed so the winner is not always the whole line
    (0..n).map(|_| rng.random::<f64>().powi(6)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn search_matches_brute_force(seed in any::<u64>(), n in 16usize..400, p in 1.05f64..1.95) {
        let m = magnitudes(seed, n);
        let fast = best_cell_interval(&m, 0.1, p).unwrap();
        let slow = brute_force_cell_interval(&m, 0.1, p).unwrap();
        prop_assert!((fast.value - slow.value).abs() <= 1e-10 * slow.value);
    }

    #[test]
    fn enlarging_the_spectrum_never_lowers_the_value(seed in any::<u64>(), n in 16usize..400) {
        let m = magnitudes(seed, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let bigger: Vec<f64> = m.iter().map(|v| v * (1.0 + rng.random::<f64>())).collect();
        let a = best_cell_interval(&m, 0.1, DEFAULT_P).unwrap().value;
        let b = best_cell_interval(&bigger, 0.1, DEFAULT_P).unwrap().value;
        prop_assert!(b >= a);
    }
}

#[test]
fn field_search_matches_brute_force_on_a_full_grid() {
    let g = GridSpec::new(4096, 400.0, 3, 1.0, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u = random_packets(g, &PacketBank::default(), &mut rng).unwrap();
    let s = u.to_spectral();
    let c = concentration_functional(&u, DEFAULT_P).unwrap();
    let slow = brute_force_cell_interval(&s.sorted_magnitudes(), g.dk(), DEFAULT_P).unwrap();
    assert!((c.value - slow.value).abs() <= 1e-10 * slow.value);
}

#[test]
fn far_apart_bumps_behave_like_one() {
    // cells of width 1/16; the bumps cover [dk/2, 1 + dk/2) and 100 cells further
    let g = GridSpec::new(4096, 2.0 * PI * 16.0, 3, 1.0, 0.5).unwrap();
    let dk = g.dk();
    let bump = |k: f64, from: i64| {
        let i = (k / dk).round() as i64;
        (from..from + 16).contains(&i)
    };
    let f = Field::from_density(g, |k| {
        if bump(k, 1) || bump(k, 1601) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::default()
        }
    })
    .unwrap();
    let c = concentration_functional(&f, DEFAULT_P).unwrap();
    assert!((c.value - 1.0).abs() < 1e-10);
    assert!((c.length() - 1.0).abs() < 1e-12);
    let first = (c.lo - 0.5 * dk).abs() < 1e-9;
    let second = (c.lo - 1600.5 * dk).abs() < 1e-9;
    assert!(first || second, "{c:?}");
    let slow = brute_force_cell_interval(&f.to_spectral().sorted_magnitudes(), dk, DEFAULT_P).unwrap();
    assert!((c.value - slow.value).abs() < 1e-10);
}

#[test]
fn refined_ratio_ignores_the_phase() {
    let g = GridSpec::new(512, 64.0, 65, 1.0, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u = random_packets(g, &PacketBank::default(), &mut rng).unwrap();
    let a = refined_ratio(&u, DEFAULT_P).unwrap().value.ratio;
    let b = refined_ratio(&u.scaled(Complex64::from_polar(1.0, 2.1)), DEFAULT_P).unwrap().value.ratio;
    assert!((a - b).abs() < 1e-12 * a);
}

#[test]
fn refined_ratio_is_scale_invariant() {
    let base = GridSpec::new(2048, 256.0, 257, 2.0, 0.5).unwrap();
    let reference = refined_ratio(&normalized_gaussian(base, 1.0).unwrap(), DEFAULT_P).unwrap().value.ratio;
    for (h, n) in [(0.5, 1024), (2.0, 4096)] {
        let g = GridSpec::new(n, 256.0 * h, 257, 2.0 * h * h * h, 0.5).unwrap();
        let p = SymmetryParams::new(h, 0.0, 0.0, 0.0, 0.0).unwrap();
        let v = apply_symmetry(&normalized_gaussian(g, 1.0).unwrap(), &p).unwrap().value;
        let r = refined_ratio(&v, DEFAULT_P).unwrap().value.ratio;
        assert!((r - reference).abs() < 0.02 * reference, "h = {h}: {r} vs {reference}");
    }
}

#[test]
fn modulation_shifts_the_multiplier() {
    let g = GridSpec::new(512, 64.0, 129, 1.0, 0.5).unwrap();
    let u = normalized_gaussian(g, 1.5).unwrap();
    for m in [3i64, -5, 12] {
        let c = modulation_check(&u, m as f64 * g.dk()).unwrap();
        assert!(c.identity_error < 1e-10, "{c:?}");
    }
}

fn bank_maximum(seed: u64) -> f64 {
    let g = GridSpec::new(512, 64.0, 129, 1.0, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..200)
        .map(|_| {
            let u = random_packets(g, &PacketBank::default(), &mut rng).unwrap();
            refined_ratio(&u, DEFAULT_P).unwrap().value.ratio
        })
        .fold(0.0, f64::max)
}

#[test]
fn refined_ratio_maximum_is_stable_across_banks() {
    let a = bank_maximum(1);
    let b = bank_maximum(2);
    assert!(a.is_finite() && b.is_finite());
    assert!((a - b).abs() < 0.25 * a.max(b), "{a} vs {b}");
}

fn three_scale_pairs() -> (DyadicInterval, i32, Vec<WhitneyPair>) {
    let region = DyadicInterval::new(0, 0);
    let min_scale = -5;
    let pairs = whitney_pairs(&region, min_scale).unwrap();
    let scales: std::collections::BTreeSet<i32> = pairs.iter().map(|p| p.interval.scale).collect();
    assert_eq!(scales.len(), 3);
    (region, min_scale, pairs)
}

#[test]
fn whitney_pairs_respect_the_distance_window() {
    let (_, _, pairs) = three_scale_pairs();
    for p in &pairs {
        let len = p.interval.length();
        assert_eq!(p.partner.length(), len);
        let d = p.interval.distance(&p.partner);
        assert!(d >= 4.0 * len && d <= 10.0 * len, "{p:?}");
    }
}

/// Partners of an interior interval counted straight from the definition:
/// same-scale intervals at distance at least 4|I| whose parents are closer
/// than 4 times the parent length.
#[test]
fn multiplicity_matches_a_direct_count() {
    let (_, _, pairs) = three_scale_pairs();
    let len = 1.0;
    let me = (40.0, 41.0);
    let mut direct = 0;
    for j in 0..80 {
        let other = (j as f64, j as f64 + 1.0);
        let gap = (other.0 - me.1).max(me.0 - other.1).max(0.0);
        let parent = |a: f64| ((a / 2.0).floor() * 2.0, (a / 2.0).floor() * 2.0 + 2.0);
        let (pa, pb) = (parent(me.0), parent(other.0));
        let parent_gap = (pb.0 - pa.1).max(pa.0 - pb.1).max(0.0);
        if gap >= 4.0 * len && parent_gap < 8.0 * len {
            direct += 1;
        }
    }
    assert_eq!(direct, 9);
    assert_eq!(max_multiplicity(&pairs), direct);
    let mut counts: HashMap<DyadicInterval, usize> = HashMap::new();
    for p in &pairs {
        *counts.entry(p.interval).or_default() += 1;
    }
    assert!(counts.values().all(|&c| c <= direct));
}

#[test]
fn random_separated_points_are_covered_exactly_once() {
    let (region, min_scale, pairs) = three_scale_pairs();
    let separation = 2f64.powi(min_scale + 4);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut tested = 0;
    while tested < 10_000 {
        let (a, b): (f64, f64) = (rng.random(), rng.random());
        if (a - b).abs() <= separation {
            continue;
        }
        tested += 1;
        let covering: Vec<_> = pairs.iter().filter(|p| p.contains(a, b)).collect();
        assert_eq!(covering.len(), 1, "({a}, {b})");
        let located = whitney_pair_containing(&region, min_scale, a, b).unwrap();
        assert_eq!(located.as_ref(), Some(covering[0]));
    }
}

#[test]
fn whitney_pairs_are_disjoint() {
    let (_, _, pairs) = three_scale_pairs();
    for (i, p) in pairs.iter().enumerate() {
        for q in &pairs[i + 1..] {
            let (fine, coarse) = if p.interval.scale <= q.interval.scale { (p, q) } else { (q, p) };
            let overlaps = fine.interval.is_within(&coarse.interval) && fine.partner.is_within(&coarse.partner);
            assert!(!overlaps, "{p:?} and {q:?}");
        }
    }
}

#[test]
fn whitney_rejects_non_dyadic_regions() {
    assert!(matches!(DyadicInterval::from_bounds(0.0, 3.0), Err(LabError::InvalidInput(_))));
}

fn unit_indicator(g: GridSpec) -> Field {
    Field::from_density(g, |k| if k.abs() <= 1.0 { Complex64::new(1.0, 0.0) } else { Complex64::default() }).unwrap()
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn restriction_decay_follows_the_predicted_rate() {
    let g = GridSpec::new(1024, 2048.0, 2001, 0.1, 0.5).unwrap();
    let f = unit_indicator(g);
    let q = 4.0;
    let xis = [20.0, 40.0, 80.0, 160.0];
    let ratios: Vec<f64> = xis.iter().map(|&xi| restriction_decay_check(&f, 1.0, xi, q).unwrap().value).collect();
    let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(hi < 1.3 * lo, "{ratios:?}");
    // ratio = norm * xi^{1/q} / peak, with peak fixed
    let points: Vec<(f64, f64)> = xis
        .iter()
        .zip(&ratios)
        .map(|(xi, r)| (xi.ln(), (r / xi.powf(1.0 / q)).ln()))
        .collect();
    assert!((slope(&points) + 1.0 / q).abs() < 0.1, "{}", slope(&points));
}

#[test]
fn restriction_checks_edge_cases() {
    let g = GridSpec::new(1024, 2048.0, 201, 0.1, 0.5).unwrap();
    assert_eq!(restriction_decay_check(&Field::zeros(g), 1.0, 20.0, 4.0).unwrap().value, 0.0);
    let f = unit_indicator(g);
    assert!(matches!(restriction_decay_check(&f, 1.0, 20.0, 6.0), Err(LabError::InvalidExponent(_))));
    assert!(matches!(restriction_decay_check(&f, 0.5, 20.0, 4.0), Err(LabError::InvalidInput(_))));
    let v = restriction_finiteness_check(&f, 1.0, 5.0).unwrap().value;
    assert!(v.is_finite() && v > 0.0);
}
