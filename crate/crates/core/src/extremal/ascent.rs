//! Projected gradient ascent on the unit L2 sphere with Armijo backtracking.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{FieldMode, Problem};
use crate::error::{LabError, Result};
use crate::norms::{inner_product, l2_norm, PowerFunctional};
use crate::spectral::{Field, SpectralField, Warning};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AscentOptions {
    pub problem: Problem,
    pub max_iterations: usize,
    /// Stop when the relative objective gain over `gain_window` accepted
    /// steps drops below this.
    pub gain_tolerance: f64,
    pub gain_window: usize,
    /// Stop when the tangential gradient is this small relative to the full one.
    pub stationarity_tolerance: f64,
    /// First trial step, measured as an L2 displacement.
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub backtrack: f64,
    /// Armijo constant.
    pub sufficient_increase: f64,
    /// Escape is declared when the centroid drifts monotonically by more than
    /// this fraction of the band over the last third of the iterates.
    pub escape_fraction: f64,
    /// When set, the ascent lives on fields with spectrum in `|k| <= cap`:
    /// the initial field and every gradient are truncated there.
    pub frequency_cap: Option<f64>,
}

impl AscentOptions {
    pub fn new(problem: Problem) -> Self {
        Self {
            problem,
            max_iterations: 200,
            gain_tolerance: 1e-8,
            gain_window: 20,
            stationarity_tolerance: 1e-9,
            initial_step: 0.05,
            max_step: 0.5,
            min_step: 1e-12,
            backtrack: 0.5,
            sufficient_increase: 1e-4,
            escape_fraction: 0.25,
            frequency_cap: None,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.gain_tolerance >= 0.0
            && self.stationarity_tolerance >= 0.0
            && self.min_step > 0.0
            && self.initial_step >= self.min_step
            && self.max_step >= self.initial_step
            && self.backtrack > 0.0
            && self.backtrack < 1.0
            && self.sufficient_increase > 0.0
            && self.sufficient_increase < 1.0
            && self.escape_fraction > 0.0
            && self.gain_window > 0
            && self.frequency_cap.is_none_or(|c| c > 0.0);
        if !ok {
            return Err(LabError::InvalidConfig(format!("inconsistent ascent options {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Iterate {
    pub iter: usize,
    /// The ratio `|| A u ||_6` at the (normalized) iterate.
    pub objective: f64,
    /// Accepted L2 step; zero for the initial point.
    pub step: f64,
    /// Spectral centroid; `|k|`-weighted in real mode.
    pub centroid: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stop {
    Converged,
    Stationary,
    /// No step down to `min_step` gives sufficient increase.
    Stalled,
    Budget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Attained,
    EscapingModulation,
    Budget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximizerTrace {
    pub problem: Problem,
    pub iterates: Vec<Iterate>,
    pub final_field: Field,
    pub classification: Classification,
    pub stop: Stop,
    /// Whether the initial field had to be normalized.
    pub renormalized: bool,
    pub warnings: Vec<Warning>,
}

impl MaximizerTrace {
    pub fn accepted_steps(&self) -> usize {
        self.iterates.len().saturating_sub(1)
    }

    pub fn best_objective(&self) -> f64 {
        self.iterates.iter().map(|i| i.objective).fold(0.0, f64::max)
    }

    /// One `{iter, objective, step, centroid}` object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for it in &self.iterates {
            let _ = writeln!(out, "{}", serde_json::to_string(it).expect("plain record"));
        }
        out
    }
}

fn centroid(u: &Field, mode: FieldMode) -> f64 {
    let s = u.to_spectral();
    match mode {
        FieldMode::Complex => s.centroid(),
        FieldMode::Real => s.abs_centroid(),
    }
}

fn push_warnings(all: &mut Vec<Warning>, new: Vec<Warning>) {
    for w in new {
        if !all.contains(&w) {
            all.push(w);
        }
    }
}

/// Monotone centroid drift over the last third of the iterates, larger than
/// `fraction` of the band.
fn is_escaping(iterates: &[Iterate], band: f64, fraction: f64) -> bool {
    let k = iterates.len();
    let tail = k / 3;
    if tail < 2 {
        return false;
    }
    let c: Vec<f64> = iterates[k - 1 - tail..].iter().map(|i| i.centroid).collect();
    let up = c.windows(2).all(|w| w[1] >= w[0]);
    let down = c.windows(2).all(|w| w[1] <= w[0]);
    (up || down) && (c[c.len() - 1] - c[0]).abs() > fraction * band
}

/// Zeroes every coefficient with `|k| > cap`.
fn truncate(f: &Field, cap: f64) -> Field {
    let s = f.to_spectral();
    let grid = *s.grid();
    let coefficients = s
        .coefficients()
        .iter()
        .enumerate()
        .map(|(j, c)| if grid.frequency(j).abs() <= cap { *c } else { Complex64::default() })
        .collect();
    SpectralField::new(grid, coefficients).expect("same grid").to_field()
}

/// Maximizes the problem's ratio on the unit sphere, starting from `init`.
pub fn maximize(init: &Field, opts: &AscentOptions) -> Result<MaximizerTrace> {
    opts.validate()?;
    let problem = opts.problem;
    let norm = l2_norm(init);
    if norm == 0.0 {
        return Err(LabError::DegenerateInput("cannot start the ascent at the zero field".into()));
    }
    let start = match opts.frequency_cap {
        Some(cap) => truncate(init, cap),
        None => init.clone(),
    };
    let norm = l2_norm(&start);
    if norm == 0.0 {
        return Err(LabError::DegenerateInput("no initial mass below the frequency cap".into()));
    }
    let renormalized = (norm - 1.0).abs() > 1e-12;
    let mut u = if renormalized { start.scaled_real(norm.recip()) } else { start };
    let cap = |g: Field| match opts.frequency_cap {
        Some(c) => truncate(&g, c),
        None => g,
    };
    let band = u.grid().band_limit();

    let mut warnings = Vec::new();
    let first = problem.power_with_gradient(&u)?;
    push_warnings(&mut warnings, first.warnings);
    let PowerFunctional { value: mut j, gradient: g } = first.value;
    let mut g = cap(g);
    let mut iterates = vec![Iterate {
        iter: 0,
        objective: j.powf(1.0 / 6.0),
        step: 0.0,
        centroid: centroid(&u, problem.mode),
    }];
    let mut step = opts.initial_step;
    let mut stop = Stop::Budget;

    for iter in 1..=opts.max_iterations {
        let radial = inner_product(&g, &u)?.re;
        let tangent = g.try_axpy(Complex64::new(-radial, 0.0), &u)?;
        let t_norm = l2_norm(&tangent);
        if t_norm <= opts.stationarity_tolerance * l2_norm(&g) {
            stop = Stop::Stationary;
            break;
        }
        let direction = tangent.scaled_real(t_norm.recip());

        let mut tau = step.min(opts.max_step);
        let accepted = loop {
            let trial = u.try_axpy(Complex64::new(tau, 0.0), &direction)?;
            let trial = trial.scaled_real(l2_norm(&trial).recip());
            let eval = problem.power_with_gradient(&trial)?;
            if eval.value.value >= j + opts.sufficient_increase * tau * t_norm {
                push_warnings(&mut warnings, eval.warnings);
                break Some((trial, eval.value));
            }
            tau *= opts.backtrack;
            if tau < opts.min_step {
                break None;
            }
        };
        let Some((trial, eval)) = accepted else {
            stop = Stop::Stalled;
            break;
        };
        u = trial;
        j = eval.value;
        g = cap(eval.gradient);
        iterates.push(Iterate {
            iter,
            objective: j.powf(1.0 / 6.0),
            step: tau,
            centroid: centroid(&u, problem.mode),
        });
        step = (2.0 * tau).min(opts.max_step);

        let n = iterates.len();
        if n > opts.gain_window {
            let now = iterates[n - 1].objective;
            let then = iterates[n - 1 - opts.gain_window].objective;
            if (now - then) / now < opts.gain_tolerance {
                stop = Stop::Converged;
                break;
            }
        }
    }

    let classification = if is_escaping(&iterates, band, opts.escape_fraction) {
        Classification::EscapingModulation
    } else if stop == Stop::Budget {
        Classification::Budget
    } else {
        Classification::Attained
    };
    Ok(MaximizerTrace {
        problem,
        iterates,
        final_field: u,
        classification,
        stop,
        renormalized,
        warnings,
    })
}
