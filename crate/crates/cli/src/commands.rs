//! One function per subcommand. Each returns its artifacts without touching
//! the disk.

use std::fs::File;
use std::io::BufReader;

use airy_lab::bubbles::{extract_bubbles, extract_bubbles_real, group_indices, ExtractionConfig, Termination};
use airy_lab::extremal::{
    dichotomy_report, embedding_experiment, gaussian_fit, max_admissible_modulation, maximize, schrodinger_baseline,
    AscentOptions, Classification, FieldMode, GaussianFit, Problem, Stop,
};
use airy_lab::norms::{airy_l6, l2_norm, strichartz_functional, StrichartzExponents};
use airy_lab::refined::{
    concentration_functional, max_multiplicity, refined_ratio, whitney_pair_containing, whitney_pairs, DyadicInterval,
    IntervalValue, RefinedRatio,
};
use airy_lab::separation::{pairwise_table, to_csv, Profile};
use airy_lab::spectral::io::{encode_field, read_field};
use airy_lab::spectral::{apply_symmetry, propagate, Field, GridSpec, Warning};
use airy_lab::synth::{normalize, normalized_gaussian, random_band_limited, random_packets, superpose, PacketBank, WavePacket};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ExperimentConfig, Flow, ProfileSpec};
use crate::output::Artifacts;
use crate::{CliError, Command};

type Outcome = Result<Artifacts, CliError>;

#[derive(Serialize)]
struct RunRecord<'a> {
    command: &'a str,
    seed: u64,
    grid: GridSpec,
    files: Vec<&'a str>,
}

pub fn execute(command: Command, cfg: &ExperimentConfig, seed: u64) -> Outcome {
    let grid = cfg.grid.spec()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = match command {
        Command::Propagate => run_propagate(cfg, grid, &mut rng),
        Command::Norm => run_norm(cfg, grid, &mut rng),
        Command::Concentrate => run_concentrate(cfg, grid, &mut rng),
        Command::WhitneyCheck => run_whitney(cfg, &mut rng),
        Command::Extract => run_extract(cfg, grid, &mut rng),
        Command::Separation => run_separation(cfg, grid),
        Command::Maximize => run_maximize(cfg, grid, &mut rng),
        Command::Baseline => run_baseline(grid),
        Command::Embed => run_embed(cfg, grid, &mut rng),
        Command::Dichotomy => run_dichotomy(cfg, grid, &mut rng),
        Command::Synth => run_synth(cfg, grid, &mut rng),
    }?;
    let record = RunRecord {
        command: command.name(),
        seed,
        grid,
        files: out.names().collect(),
    };
    let text = serde_json::to_string_pretty(&record).expect("plain record") + "\n";
    out.add_text("run.json", text);
    Ok(out)
}

/// The field named by `[input]`, a unit Gaussian by default.
fn input_field(cfg: &ExperimentConfig, grid: GridSpec, rng: &mut ChaCha8Rng) -> Result<Field, CliError> {
    let input = &cfg.input;
    let field = if let Some(path) = &input.file {
        let path = cfg.resolve(path);
        let file =
            File::open(&path).map_err(|e| CliError::Usage(format!("cannot open field file {}: {e}", path.display())))?;
        read_field(BufReader::new(file))?.into_field_like(&grid)?
    } else if let Some(w) = input.gaussian_width {
        normalized_gaussian(grid, w)?
    } else if let Some(packets) = &input.packets {
        let packets: Vec<WavePacket> =
            packets.iter().map(|p| WavePacket::normalized(p.center, p.width, p.frequency)).collect();
        normalize(&superpose(grid, &packets)?)?
    } else if let Some(count) = input.random_packets {
        random_packets(grid, &PacketBank { count, ..PacketBank::default() }, rng)?
    } else {
        normalized_gaussian(grid, 1.0)?
    };
    Ok(if input.real { field.real_part() } else { field })
}

fn gaussian_profile(grid: GridSpec, width: f64, spec: &ProfileSpec) -> Result<Field, CliError> {
    let base = normalized_gaussian(grid, width)?;
    let moved = apply_symmetry(&base, &spec.params()?)?;
    Ok(moved.value.scaled_real(spec.amplitude))
}

#[derive(Serialize)]
struct PropagateSummary {
    flow: Flow,
    time: f64,
    l2_before: f64,
    l2_after: f64,
    warnings: Vec<Warning>,
}

fn run_propagate(cfg: &ExperimentConfig, grid: GridSpec, rng: &mut ChaCha8Rng) -> Outcome {
    let u = input_field(cfg, grid, rng)?;
    let c = &cfg.propagate;
    let v = propagate(&u, c.time, c.flow.evolution())?;
    let mut out = Artifacts::default();
    out.add("field.bin", encode_field(&v.value));
    out.add_json(
        "propagate.json",
        &PropagateSummary {
            flow: c.flow,
            time: c.time,
            l2_before: l2_norm(&u),
            l2_after: l2_norm(&v.value),
            warnings: v.warnings,
        },
    );
    Ok(out)
}

#[derive(Serialize)]
struct NormSummary {
    exponents: StrichartzExponents,
    value: f64,
    l2: f64,
    warnings: Vec<Warning>,
}

fn run_norm(cfg: &ExperimentConfig, grid: GridSpec, rng: &mut ChaCha8Rng) -> Outcome {
    let u = input_field(cfg, grid, rng)?;
    let c = &cfg.norm;
    let exponents = StrichartzExponents::new(c.alpha, c.q, c.r)?;
    let v = strichartz_functional(&u, &exponents)?;
    let mut out = Artifacts::default();
    out.add_json(
        "norm.json",
        &NormSummary {
            exponents,
            value: v.value,
            l2: l2_norm(&u),
            warnings: v.warnings,
        },
    );
    Ok(out)
}

#[derive(Serialize)]
struct ConcentrateSummary {
    p: f64,
    interval: IntervalValue,
    refined: RefinedRatio,
    warnings: Vec<Warning>,
}

fn run_concentrate(cfg: &ExperimentConfig, grid: GridSpec, rng: &mut ChaCha8Rng) -> Outcome {
    let u = input_field(cfg, grid, rng)?;
    let p = cfg.concentrate.p;
    let interval = concentration_functional(&u, p)?;
    let refined = refined_ratio(&u, p)?;
    let mut out = Artifacts::default();
    out.add_json(
        "concentrate.json",
        &ConcentrateSummary {
            p,
            interval,
            refined: refined.value,
            warnings: refined.warnings,
        },
    );
    Ok(out)
}

#[derive(Serialize)]
struct WhitneySummary {
    region: DyadicInterval,
    min_scale: i32,
    pairs: usize,
    max_multiplicity: usize,
    /// Pairs violating `4 |I| <= dist <= 10 |I|`.
    distance_violations: usize,
    samples: usize,
    /// Separated samples not covered by exactly one pair, or covered by a
    /// pair other than the direct lookup.
    coverage_failures: usize,
}

fn run_whitney(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Outcome {
    let c = &cfg.whitney;
    let region = DyadicInterval::new(c.scale, c.index);
    let pairs = whitney_pairs(&region, c.min_scale)?;
    let mut csv = String::from("scale,index,partner_index,lo,hi,partner_lo,partner_hi,distance\n");
    let mut distance_violations = 0;
    for p in &pairs {
        let (len, dist) = (p.interval.length(), p.interval.distance(&p.partner));
        if !(4.0 * len <= dist && dist <= 10.0 * len) {
            distance_violations += 1;
        }
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            p.interval.scale,
            p.interval.index,
            p.partner.index,
            p.interval.lo(),
            p.interval.hi(),
            p.partner.lo(),
            p.partner.hi(),
            dist
        ));
    }
    // points more than five finest cells apart sit in cells with index gap >= 5
    let separation = 6.0 * 2f64.powi(c.min_scale);
    if separation >= region.length() {
        return Err(airy_lab::LabError::InvalidParameter(format!(
            "min_scale {} leaves no separated pairs inside the region",
            c.min_scale
        ))
        .into());
    }
    let mut coverage_failures = 0;
    let mut drawn = 0;
    while drawn < c.samples {
        let xi = rng.random_range(region.lo()..region.hi());
        let xi_prime = rng.random_range(region.lo()..region.hi());
        if (xi - xi_prime).abs() <= separation {
            continue;
        }
        drawn += 1;
        let covering: Vec<_> = pairs.iter().filter(|p| p.contains(xi, xi_prime)).collect();
        let direct = whitney_pair_containing(&region, c.min_scale, xi, xi_prime)?;
        if covering.len() != 1 || direct.as_ref() != Some(covering[0]) {
            coverage_failures += 1;
        }
    }
    let mut out = Artifacts::default();
    out.add_text("whitney.csv", csv);
    out.add_json(
        "whitney.json",
        &WhitneySummary {
            region,
            min_scale: c.min_scale,
            pairs: pairs.len(),
            max_multiplicity: max_multiplicity(&pairs),
            distance_violations,
            samples: c.samples,
            coverage_failures,
        },
    );
    Ok(out)
}

#[derive(Serialize)]
struct ExtractSummary {
    delta: f64,
    real: bool,
    pieces: usize,
    /// Pieces grouped by scale and frequency proximity; one group per bubble.
    groups: Vec<Vec<usize>>,
    iterations: usize,
    termination: Termination,
    parseval_defect: f64,
    strichartz_of_remainder: f64,
    warnings: Vec<Warning>,
}

fn run_extract(cfg: &ExperimentConfig, grid: GridSpec, rng: &mut ChaCha8Rng) -> Outcome {
    let u = input_field(cfg, grid, rng)?;
    let c = &cfg.extract;
    let delta = match c.delta {
        Some(d) => d,
        None => c.delta_fraction * airy_l6(&u)?.value,
    };
    let ecfg = ExtractionConfig {
        p: c.p,
        c_thresh: c.c_thresh,
        max_pieces: c.max_pieces,
        ..ExtractionConfig::with_delta(delta)
    };
    let report = if c.real {
        extract_bubbles_real(&u, &ecfg)?
    } else {
        extract_bubbles(&u, &ecfg)?
    };
    let mut out = Artifacts::default();
    out.add_text("extract.jsonl", report.to_jsonl());
    out.add("remainder.bin", encode_field(&report.remainder));
    out.add_json(
        "extract.json",
        &ExtractSummary {
            delta,
            real: c.real,
            pieces: report.pieces.len(),
            groups: group_indices(&report.pieces, &ecfg),
            iterations: report.iterations,
            termination: report.termination,
            parseval_defect: report.parseval_defect,
            strichartz_of_remainder: report.strichartz_of_remainder,
            warnings: report.warnings.clone(),
        },
    );
    Ok(out)
}

fn run_separation(cfg: &ExperimentConfig, grid: GridSpec) -> Outcome {
    let c = &cfg.separation;
    if c.profiles.len() < 2 {
        return Err(CliError::Usage("[separation] needs at least two profiles".into()));
    }
    let base = normalized_gaussian(grid, c.profile_width)?;
    let profiles = c
        .profiles
        .iter()
        .map(|s| Ok(Profile::new(s.params()?, base.scaled_real(s.amplitude))))
        .collect::<Result<Vec<_>, CliError>>()?;
    let rows = pairwise_table(&profiles, c.tolerance, c.fold_mirrors)?;
    let mut out = Artifacts::default();
    out.add_text("separation.csv", to_csv(&rows.value));
    out.add_json("separation_warnings.json", &rows.warnings);
    Ok(out)
}

#[derive(Serialize)]
struct MaximizeSummary {
    problem: Problem,
    classification: Classification,
    stop: Stop,
    best_objective: f64,
    accepted_steps: usize,
    renormalized: bool,
    gaussian_fit: Option<GaussianFit>,
    warnings: Vec<Warning>,
}

fn ascent_start(u: Field, mode: FieldMode) -> Field {
    match mode {
        FieldMode::Complex => u,
        FieldMode::Real => u.real_part(),
    }
}

fn run_maximize(cfg: &ExperimentConfig, grid: GridSpec, rng: &mut ChaCha8Rng) -> Outcome {
    let c = &cfg.maximize;
    let problem = match c.flow {
        Flow::Airy => Problem::airy(c.mode),
        Flow::Schrodinger => Problem::schrodinger(c.mode),
    };
    let opts = AscentOptions {
        max_iterations: c.max_iterations,
        frequency_cap: c.frequency_cap,
        ..AscentOptions::new(problem)
    };
    let init = ascent_start(input_field(cfg, grid, rng)?, c.mode);
    let trace = maximize(&init, &opts)?;
    let fit = match c.flow {
        Flow::Schrodinger => Some(gaussian_fit(&trace.final_field)?),
        Flow::Airy => None,
    };
    let mut out = Artifacts::default();
    out.add_text("trace.jsonl", trace.to_jsonl());
    out.add("maximizer.bin", encode_field(&trace.final_field));
    out.add_json(
        "maximize.json",
        &MaximizeSummary {
            problem,
            classification: trace.classification,
            stop: trace.stop,
            best_objective: trace.best_objective(),
            accepted_steps: trace.accepted_steps(),
            renormalized: trace.renormalized,
            gaussian_fit: fit,
            warnings: trace.warnings.clone(),
        },
    );
    Ok(out)
}

#[derive(Serialize)]
struct BaselineSummary {
    s_schr_estimate: f64,
    width: f64,
    warnings: Vec<Warning>,
}

fn run_baseline(grid: GridSpec) -> Outcome {
    let base = schrodinger_baseline(grid)?;
    let mut out = Artifacts::default();
    out.add("baseline.bin", encode_field(&base.value.gaussian_profile));
    out.add_json(
        "baseline.json",
        &BaselineSummary {
            s_schr_estimate: base.value.s_schr_estimate,
            width: base.value.width,
            warnings: base.warnings,
        },
    );
    Ok(out)
}

#[derive(Serialize)]
struct EmbedSummary {
    mode: FieldMode,
    schrodinger_ratio: f64,
    limit: f64,
    max_admissible_n: f64,
    warnings: Vec<Warning>,
}

fn run_embed(cfg: &ExperimentConfig, grid: GridSpec, rng: &mut ChaCha8Rng) -> Outcome {
    let u0 = input_field(cfg, grid, rng)?;
    let c = &cfg.embed;
    let table = embedding_experiment(&u0, &c.n_list, c.mode)?;
    let mut out = Artifacts::default();
    out.add_text("embed.csv", table.to_csv());
    out.add_json(
        "embed.json",
        &EmbedSummary {
            mode: c.mode,
            schrodinger_ratio: table.schrodinger_ratio,
            limit: table.limit,
            max_admissible_n: max_admissible_modulation(&u0),
            warnings: table.warnings.clone(),
        },
    );
    Ok(out)
}

fn run_dichotomy(cfg: &ExperimentConfig, grid: GridSpec, rng: &mut ChaCha8Rng) -> Outcome {
    let c = &cfg.dichotomy;
    let opts = AscentOptions {
        max_iterations: c.max_iterations,
        frequency_cap: c.frequency_cap,
        ..AscentOptions::new(Problem::airy(c.mode))
    };
    let init = ascent_start(input_field(cfg, grid, rng)?, c.mode);
    let trace = maximize(&init, &opts)?;
    let base_grid = GridSpec::new(
        c.baseline_n_points.unwrap_or(grid.n_points()),
        c.baseline_domain_length.unwrap_or(grid.domain_length()),
        grid.t_count(),
        grid.t_span(),
        grid.band_fraction(),
    )?;
    let base = schrodinger_baseline(base_grid)?;
    let report = dichotomy_report(&trace, &base.value)?;
    let mut out = Artifacts::default();
    out.add_text("trace.jsonl", trace.to_jsonl());
    out.add_json("dichotomy.json", &report);
    out.add_text("dichotomy.txt", report.to_string());
    Ok(out)
}

#[derive(Serialize)]
struct SynthSummary<'a> {
    bubbles: &'a [ProfileSpec],
    profile_width: f64,
    noise_fraction: f64,
    l2: f64,
    warnings: Vec<Warning>,
}

fn run_synth(cfg: &ExperimentConfig, grid: GridSpec, rng: &mut ChaCha8Rng) -> Outcome {
    let c = &cfg.synth;
    if c.bubbles.is_empty() {
        return Err(CliError::Usage("[synth] needs at least one bubble".into()));
    }
    let mut sum = Field::zeros(grid);
    for b in &c.bubbles {
        sum = sum.try_add(&gaussian_profile(grid, c.profile_width, b)?)?;
    }
    if c.noise_fraction > 0.0 {
        let cutoff = c.noise_cutoff.unwrap_or(grid.band_limit());
        let noise = random_band_limited(grid, cutoff, rng)?;
        let scale = c.noise_fraction * l2_norm(&sum) / l2_norm(&noise);
        sum = sum.try_axpy(num_complex::Complex64::new(scale, 0.0), &noise)?;
    }
    let field = if c.normalize { normalize(&sum)? } else { sum };
    let check = airy_lab::spectral::forward_fourier(&field);
    let warnings = airy_lab::spectral::aliasing_warning(&check).into_iter().collect();
    let mut out = Artifacts::default();
    out.add("synth.bin", encode_field(&field));
    out.add_json(
        "synth.json",
        &SynthSummary {
            bubbles: &c.bubbles,
            profile_width: c.profile_width,
            noise_fraction: c.noise_fraction,
            l2: l2_norm(&field),
            warnings,
        },
    );
    Ok(out)
}
