//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//! Runs without the libtest harness so the lines always show.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use airy_lab::bubbles::{captured_fraction, extract_bubbles, extract_bubbles_real, group_indices, Bubble, ExtractionConfig};
use airy_lab::extremal::{
    dichotomy_report, embedding_experiment, embedding_field, maximize, schrodinger_baseline, AscentOptions, FieldMode,
    Problem,
};
use airy_lab::norms::{airy_l6, check_admissible, inner_product, l2_norm, strichartz_functional, StrichartzExponents};
use airy_lab::refined::{
    best_cell_interval, brute_force_cell_interval, refined_ratio, whitney_pair_containing, whitney_pairs,
    DyadicInterval, DEFAULT_P,
};
use airy_lab::separation::{profile_inner_product, Profile};
use airy_lab::spectral::{airy_propagate, Field, GridSpec, SymmetryParams};
use airy_lab::synth::{normalize, normalized_gaussian, random_packets, PacketBank, WavePacket};
use airy_lab::LabError;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn within(elapsed: Duration, limit: f64) -> bool {
    elapsed.as_secs_f64() < limit
}

fn multiplier_exactness() -> Verdict {
    let start = Instant::now();
    let g = GridSpec::new(512, 2.0 * std::f64::consts::PI * 16.0, 3, 1.0, 0.5).unwrap();
    let mut worst = 0.0f64;
    for m in [1i64, 7, 40, -25] {
        let k = m as f64 * g.dk();
        let mode = Field::from_fn(g, |x| Complex64::from_polar(1.0, k * x)).unwrap();
        for t in [0.3, -1.7, 5.0] {
            let got = airy_propagate(&mode, t).unwrap().value;
            let exact = Field::from_fn(g, |x| Complex64::from_polar(1.0, t * k * k * k + k * x)).unwrap();
            worst = worst.max(l2_norm(&got.try_sub(&exact).unwrap()) / l2_norm(&exact));
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst < 1e-12 && within(elapsed, 1.0),
        format!("max relative error {worst:.2e} (< 1e-12), {:.3} s (< 1 s)", elapsed.as_secs_f64()),
    )
}

fn admissibility() -> Verdict {
    let symmetric = StrichartzExponents::new(1.0 / 6.0, 6.0, 6.0).unwrap();
    let zero = StrichartzExponents::new(0.0, 6.0, 6.0).unwrap();
    let g = GridSpec::new(64, 20.0, 9, 1.0, 0.5).unwrap();
    let u = normalized_gaussian(g, 1.0).unwrap();
    let rejected = matches!(strichartz_functional(&u, &zero), Err(LabError::Inadmissible { .. }));
    // the defect is exactly representable for both triples
    let pass = check_admissible(&symmetric)
        && !check_admissible(&zero)
        && rejected
        && symmetric.scaling_defect() == 0.0
        && zero.scaling_defect() != 0.0;
    verdict(
        pass,
        format!(
            "(1/6,6,6) admissible: {}, (0,6,6) admissible: {}, rejected by the functional: {rejected}, \
             -alpha + 3/q + 1/r - 1/2 = {} and {}",
            check_admissible(&symmetric),
            check_admissible(&zero),
            symmetric.scaling_defect(),
            zero.scaling_defect()
        ),
    )
}

fn whitney_combinatorics() -> Verdict {
    let start = Instant::now();
    let region = DyadicInterval::new(0, 0);
    let min_scale = -5;
    let pairs = whitney_pairs(&region, min_scale).unwrap();
    let scales: std::collections::BTreeSet<i32> = pairs.iter().map(|p| p.interval.scale).collect();
    let window_violations = pairs
        .iter()
        .filter(|p| {
            let (len, d) = (p.interval.length(), p.interval.distance(&p.partner));
            !(4.0 * len <= d && d <= 10.0 * len)
        })
        .count();
    let mut rng = ChaCha8Rng::seed_from_u64(2718);
    let separation = 2f64.powi(min_scale + 4);
    let (mut drawn, mut failures) = (0, 0);
    while drawn < 10_000 {
        let (a, b) = (rng.random::<f64>(), rng.random::<f64>());
        if (a - b).abs() <= separation {
            continue;
        }
        drawn += 1;
        let covering: Vec<_> = pairs.iter().filter(|p| p.contains(a, b)).collect();
        let direct = whitney_pair_containing(&region, min_scale, a, b).unwrap();
        if covering.len() != 1 || direct.as_ref() != Some(covering[0]) {
            failures += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        scales.len() == 3 && window_violations == 0 && failures == 0 && within(elapsed, 5.0),
        format!(
            "{} pairs on {} scales, {window_violations} outside 4|I| <= dist <= 10|I|, \
             {failures} of 10000 points not covered exactly once, {:.2} s (< 5 s)",
            pairs.len(),
            scales.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn concentration_brute_force() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst = 0.0f64;
    for n in [64usize, 512, 4096] {
        for _ in 0..3 {
            let m: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powi(6)).collect();
            let p = rng.random_range(1.1..1.9);
            let fast = best_cell_interval(&m, 0.25, p).unwrap();
            let slow = brute_force_cell_interval(&m, 0.25, p).unwrap();
            worst = worst.max((fast.value - slow.value).abs() / slow.value);
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst < 1e-10 && within(elapsed, 30.0),
        format!("max relative gap {worst:.2e} (< 1e-10) on n <= 4096, {:.2} s (< 30 s)", elapsed.as_secs_f64()),
    )
}

fn extraction_recovery() -> Verdict {
    let start = Instant::now();
    let g = GridSpec::new(16384, 384.0, 201, 0.01, 0.5).unwrap();
    let packets = [
        WavePacket::normalized(0.0, 0.25, 0.0),
        WavePacket::normalized(0.0, 2.0, 60.0),
        WavePacket::normalized(0.0, 16.0, -55.0),
    ];
    let parts: Vec<Field> = packets.iter().map(|p| p.field(g).unwrap()).collect();
    let sum = parts[1..].iter().fold(parts[0].clone(), |a, f| a.try_add(f).unwrap());
    let u = normalize(&sum).unwrap();
    let cfg = ExtractionConfig::with_delta(0.2 * airy_l6(&u).unwrap().value);
    let r = extract_bubbles(&u, &cfg).unwrap();
    let groups = group_indices(&r.pieces, &cfg);
    let captures: Vec<f64> = parts
        .iter()
        .map(|p| {
            groups
                .iter()
                .map(|grp| {
                    let members: Vec<&Bubble> = grp.iter().map(|&i| &r.pieces[i]).collect();
                    captured_fraction(p, &members)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let elapsed = start.elapsed();
    let worst = captures.iter().copied().fold(1.0, f64::min);
    verdict(
        groups.len() == 3 && worst >= 0.85 && r.parseval_defect < 1e-10 && within(elapsed, 120.0),
        format!(
            "{} pieces ({} raw), captures {:?} (>= 0.85), Parseval defect {:.1e} (< 1e-10), {:.2} s (< 2 min)",
            groups.len(),
            r.pieces.len(),
            captures.iter().map(|c| (c * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
            r.parseval_defect,
            elapsed.as_secs_f64()
        ),
    )
}

fn real_symmetry() -> Verdict {
    let g = GridSpec::new(1024, 128.0, 129, 2.0, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (mut asymmetric, mut worst_rec, mut pieces) = (0usize, 0.0f64, 0usize);
    for _ in 0..3 {
        let u = normalize(&random_packets(g, &PacketBank::default(), &mut rng).unwrap().real_part()).unwrap();
        let r = extract_bubbles_real(&u, &ExtractionConfig::with_delta(0.05)).unwrap();
        for b in &r.pieces {
            pieces += 1;
            let c = b.spectrum.coefficients();
            for j in 0..g.n_points() {
                let m = g.mode_number(j);
                if -m >= g.min_mode() && c[g.slot_of_mode(-m)] != c[j].conj() {
                    asymmetric += 1;
                }
            }
            if b.physical().samples().iter().any(|z| z.im != 0.0) {
                asymmetric += 1;
            }
        }
        let back = r.reconstruction().unwrap();
        worst_rec = worst_rec.max(l2_norm(&back.try_sub(&u).unwrap()));
    }
    verdict(
        pieces > 0 && asymmetric == 0 && worst_rec < 1e-10,
        format!(
            "{pieces} pieces, {asymmetric} coefficient pairs off exact conjugate symmetry, \
             reconstruction error {worst_rec:.1e} (< 1e-10)"
        ),
    )
}

fn gradient_check() -> Verdict {
    let g = GridSpec::new(256, 40.0, 65, 1.0, 0.5).unwrap();
    let p = Problem::airy(FieldMode::Complex);
    let bank = PacketBank {
        spread: 5.0,
        max_frequency: 2.0,
        ..PacketBank::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let eps = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let u = random_packets(g, &bank, &mut rng).unwrap();
        let v = random_packets(g, &bank, &mut rng).unwrap();
        let grad = p.power_with_gradient(&u).unwrap().value.gradient;
        let analytic = inner_product(&grad, &v).unwrap().re;
        let plus = p.power(&u.try_axpy(Complex64::new(eps, 0.0), &v).unwrap()).unwrap().value;
        let minus = p.power(&u.try_axpy(Complex64::new(-eps, 0.0), &v).unwrap()).unwrap().value;
        worst = worst.max(((plus - minus) / (2.0 * eps) - analytic).abs() / analytic.abs());
    }
    verdict(worst < 1e-5, format!("max relative error {worst:.2e} over 20 pairs (< 1e-5)"))
}

fn embedding_limit() -> Verdict {
    let start = Instant::now();
    let g = GridSpec::new(65536, 2048.0, 257, 8.0, 0.5).unwrap();
    let u0 = normalized_gaussian(g, 1.0).unwrap();
    let table = embedding_experiment(&u0, &[4.0, 8.0, 16.0, 32.0], FieldMode::Complex).unwrap();
    let errors: Vec<f64> = table.rows.iter().map(|r| r.error.unwrap() / table.limit).collect();
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    let last = *errors.last().unwrap();
    let real = embedding_field(&u0, 32.0, FieldMode::Real).unwrap().value;
    let fraction = l2_norm(&real).powi(2) / l2_norm(&u0).powi(2);
    let elapsed = start.elapsed();
    verdict(
        monotone && last < 0.02 && (0.48..=0.52).contains(&fraction) && within(elapsed, 600.0),
        format!(
            "relative errors {:?} (decreasing, last < 2%), limit {:.5}, real mass fraction {fraction:.4} \
             (in [0.48, 0.52]), {:.1} s (< 10 min)",
            errors.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>(),
            table.limit,
            elapsed.as_secs_f64()
        ),
    )
}

fn sharp_constant_bound() -> Verdict {
    let ascent_grid = GridSpec::new(256, 64.0, 865, 8.0, 0.5).unwrap();
    let base_grid = GridSpec::new(4096, 1024.0, 865, 8.0, 0.5).unwrap();
    let base = schrodinger_baseline(base_grid).unwrap().value;
    let mut lines = Vec::new();
    let mut pass = true;
    for mode in [FieldMode::Complex, FieldMode::Real] {
        let opts = AscentOptions {
            frequency_cap: Some(3.0),
            ..AscentOptions::new(Problem::airy(mode))
        };
        let trace = maximize(&normalized_gaussian(ascent_grid, 1.0).unwrap(), &opts).unwrap();
        let report = dichotomy_report(&trace, &base).unwrap();
        pass &= report.bound_holds;
        lines.push(format!(
            "{mode:?}: S_airy {:.4} vs factor*S_schr {:.4}, {:?}",
            report.s_airy, report.embedded_value, report.verdict
        ));
    }
    verdict(pass, format!("S_schr {:.4}; {}", base.s_schr_estimate, lines.join("; ")))
}

fn decoupling_trends() -> Verdict {
    let g = GridSpec::new(8192, 4096.0, 3, 1.0, 0.5).unwrap();
    let bank = PacketBank {
        count: 3,
        spread: 30.0,
        min_width: 2.0,
        max_width: 20.0,
        max_frequency: 0.5,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut pass = true;
    let mut finals = Vec::new();
    for _ in 0..5 {
        let phi = random_packets(g, &bank, &mut rng).unwrap();
        let a = Profile::new(SymmetryParams::identity(), phi.clone());
        let mut last = f64::INFINITY;
        for s in [10.0, 100.0, 1000.0] {
            let b = Profile::new(SymmetryParams::new(1.0, 0.0, s, 0.0, 0.0).unwrap(), phi.clone());
            let ip = profile_inner_product(&a, &b).unwrap().value.norm();
            // differences below the rounding floor of the inner product do not count
            pass &= ip <= last + 1e-15;
            last = ip;
        }
        pass &= last < 1e-2;
        finals.push(last);
    }

    let g = GridSpec::new(1 << 17, 16384.0, 3, 1.0, 0.5).unwrap();
    let phi = normalized_gaussian(g, 1.0).unwrap();
    let a = Profile::new(SymmetryParams::new(1.0, 3.0, 0.0, 0.0, 0.0).unwrap(), phi.clone());
    let mut time_sweep = Vec::new();
    for dt in [1.0, 10.0, 100.0] {
        let b = Profile::new(SymmetryParams::new(1.0, 3.0, 0.0, dt, 0.0).unwrap(), phi.clone());
        time_sweep.push(profile_inner_product(&a, &b).unwrap().value.norm());
    }
    pass &= time_sweep.windows(2).all(|w| w[1] <= w[0]) && time_sweep[2] < 1e-2;
    verdict(
        pass,
        format!(
            "translation sweep x10: overlaps at 1000 up to {:.1e}; time sweep {:?} (< 1e-2 at the end)",
            finals.iter().copied().fold(0.0, f64::max),
            time_sweep.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>()
        ),
    )
}

fn refined_stability() -> Verdict {
    let g = GridSpec::new(512, 64.0, 129, 1.0, 0.5).unwrap();
    let bank_max = |seed: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..200)
            .map(|_| {
                let u = random_packets(g, &PacketBank::default(), &mut rng).unwrap();
                refined_ratio(&u, DEFAULT_P).unwrap().value.ratio
            })
            .fold(0.0, f64::max)
    };
    let (a, b) = (bank_max(1), bank_max(2));
    let gap = (a - b).abs() / a.max(b);
    verdict(gap < 0.25, format!("bank maxima {a:.4} and {b:.4}, relative gap {gap:.3} (< 0.25)"))
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("multiplier exactness", multiplier_exactness),
        ("admissibility predicate", admissibility),
        ("Whitney combinatorics", whitney_combinatorics),
        ("concentration brute-force equivalence", concentration_brute_force),
        ("extraction recovery", extraction_recovery),
        ("real-variant symmetry", real_symmetry),
        ("gradient check", gradient_check),
        ("embedding limit", embedding_limit),
        ("one-sided sharp-constant bound", sharp_constant_bound),
        ("decoupling trends", decoupling_trends),
        ("refined-ratio stability", refined_stability),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        if !v.pass {
            failed += 1;
        }
        println!(
            "AC{:<2} {} {name}: {} [{:.1} s]",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
