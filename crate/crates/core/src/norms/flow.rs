//! Streaming evaluation of `A_t u = F^{-1}[ |k + s|^alpha e^{i t P(k + s)} u^ ]`
//! over the time nodes of a grid.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{abs_pow, spatial_norm, temporal_norm, SpaceTimeField};
use crate::error::{LabError, Result};
use crate::spectral::{
    aliasing_warning, forward_fourier, forward_in_place, fractional_symbol, inverse_in_place, plans, Checked,
    Evolution, Field, GridSpec, Warning, BOUNDARY_EDGE, TRUNCATION_TOLERANCE,
};

/// Linear space-time operator `u -> (t -> A_t u)`.
///
/// With `shift = s` the symbol is evaluated at `k + s`, which represents the
/// flow of the modulated datum `e^{isx} u` without resolving the carrier.
/// When `comoving` is set the affine part `P(s) + P'(s) k` of the phase is
/// removed; this only multiplies each slice by a unimodular constant and
/// translates it, so translation-invariant norms are unchanged, while the
/// packet no longer races around the periodic box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowOperator {
    pub evolution: Evolution,
    pub alpha: f64,
    pub shift: f64,
    pub comoving: bool,
}

/// `J(u) = sum_t w_t dx sum_x |A_t u|^p` and its L2 gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerFunctional {
    pub value: f64,
    /// `p sum_t w_t A_t^*( |A_t u|^{p-2} A_t u )`, so that
    /// `dJ(u)[v] = Re <gradient, v>`.
    pub gradient: Field,
}

struct Prepared {
    coefficients: Vec<Complex64>,
    weights: Vec<f64>,
    phases: Vec<f64>,
    warnings: Vec<Warning>,
}

impl FlowOperator {
    pub fn new(evolution: Evolution, alpha: f64) -> Self {
        Self {
            evolution,
            alpha,
            shift: 0.0,
            comoving: false,
        }
    }

    pub fn airy(alpha: f64) -> Self {
        Self::new(Evolution::Airy, alpha)
    }

    pub fn schrodinger(alpha: f64) -> Self {
        Self::new(Evolution::Schrodinger, alpha)
    }

    /// Evaluates the symbol at `k + shift` in the comoving frame.
    pub fn with_shift(self, shift: f64) -> Self {
        Self {
            shift,
            comoving: true,
            ..self
        }
    }

    pub fn weight(&self, k: f64) -> f64 {
        fractional_symbol(k + self.shift, self.alpha)
    }

    pub fn phase(&self, k: f64) -> f64 {
        let s = self.shift;
        let full = self.evolution.phase(k + s);
        if !self.comoving {
            return full;
        }
        match self.evolution {
            // (k + s)^3 - s^3 - 3 s^2 k
            Evolution::Airy => k * k * (k + 3.0 * s),
            Evolution::Schrodinger => k * k,
        }
    }

    fn prepare(&self, f: &Field) -> Result<Prepared> {
        if !(self.alpha.is_finite() && self.shift.is_finite()) {
            return Err(LabError::InvalidParameter("operator parameters must be finite".into()));
        }
        let grid = f.grid();
        let spectrum = forward_fourier(f);
        let freqs = grid.frequencies();
        if self.alpha < 0.0 {
            let total = spectrum.energy();
            let singular: f64 = spectrum
                .coefficients()
                .iter()
                .zip(&freqs)
                .filter(|(_, k)| (*k + self.shift).abs() < 1e-12 * grid.dk())
                .map(|(c, _)| c.norm_sqr())
                .sum();
            let dc_fraction = if total > 0.0 { singular / total } else { 0.0 };
            if dc_fraction > 1e-12 {
                return Err(LabError::SingularMultiplier {
                    alpha: self.alpha,
                    dc_fraction,
                });
            }
        }
        let warnings = aliasing_warning(&spectrum).into_iter().collect();
        Ok(Prepared {
            weights: freqs.iter().map(|k| self.weight(*k)).collect(),
            phases: freqs.iter().map(|k| self.phase(*k)).collect(),
            coefficients: spectrum.into_coefficients(),
            warnings,
        })
    }

    /// Runs `visit(time index, samples of A_t u)` on every time node in
    /// parallel and collects the results in time order. Returns the results
    /// and the worst boundary fraction seen together with its time.
    fn stream<T: Send>(
        &self,
        grid: &GridSpec,
        prep: &Prepared,
        visit: impl Fn(usize, &[Complex64]) -> T + Sync,
    ) -> (Vec<T>, (f64, f64)) {
        let n = grid.n_points();
        let p = plans(n);
        let times = grid.times();
        let out: Vec<(T, f64)> = (0..grid.t_count())
            .into_par_iter()
            .map_init(
                || (vec![Complex64::default(); n], vec![Complex64::default(); p.scratch_len()]),
                |(buf, scratch), i| {
                    fill_slice(buf, prep, times[i]);
                    inverse_in_place(buf, &p, scratch);
                    let boundary = boundary_fraction(buf, BOUNDARY_EDGE);
                    (visit(i, buf), boundary)
                },
            )
            .collect();
        let mut worst = (0.0, 0.0);
        let mut values = Vec::with_capacity(out.len());
        for (i, (v, b)) in out.into_iter().enumerate() {
            if b > worst.0 {
                worst = (b, times[i]);
            }
            values.push(v);
        }
        (values, worst)
    }

    /// `A_t u` at one time.
    pub fn apply(&self, f: &Field, t: f64) -> Result<Field> {
        let prep = self.prepare(f)?;
        let grid = *f.grid();
        let mut buf = vec![Complex64::default(); grid.n_points()];
        fill_slice(&mut buf, &prep, t);
        let p = plans(grid.n_points());
        let mut scratch = vec![Complex64::default(); p.scratch_len()];
        inverse_in_place(&mut buf, &p, &mut scratch);
        Field::new(grid, buf)
    }

    /// Materializes every slice. Memory is `t_count * n_points` samples.
    pub fn space_time(&self, f: &Field) -> Result<Checked<SpaceTimeField>> {
        let grid = *f.grid();
        let prep = self.prepare(f)?;
        let (slices, worst) = self.stream(&grid, &prep, |_, s| s.to_vec());
        let slices = slices
            .into_iter()
            .map(|s| Field::new(grid, s))
            .collect::<Result<Vec<_>>>()?;
        let value = SpaceTimeField::new(grid, slices)?;
        Ok(finish(value, prep.warnings, worst))
    }

    /// `|| A_t u ||_{L^r_x}` at every time node.
    pub fn slice_norms(&self, f: &Field, r: f64) -> Result<Checked<Vec<f64>>> {
        super::check_exponent(r, "r")?;
        let grid = *f.grid();
        let prep = self.prepare(f)?;
        let dx = grid.dx();
        let (norms, worst) = self.stream(&grid, &prep, |_, s| spatial_norm(s, dx, r));
        Ok(finish(norms, prep.warnings, worst))
    }

    /// `|| A_t u ||_{L^q_t L^r_x}`.
    pub fn mixed_norm(&self, f: &Field, q: f64, r: f64) -> Result<Checked<f64>> {
        super::check_exponent(q, "q")?;
        let weights = f.grid().time_weights();
        Ok(self.slice_norms(f, r)?.map(|n| temporal_norm(&n, &weights, q)))
    }

    /// `sum_t w_t dx sum_x |A_t u|^p`.
    pub fn power(&self, f: &Field, p: f64) -> Result<Checked<f64>> {
        super::check_exponent(p, "p")?;
        let grid = *f.grid();
        let prep = self.prepare(f)?;
        let w = grid.time_weights();
        let dx = grid.dx();
        let (terms, worst) = self.stream(&grid, &prep, |i, s| {
            w[i] * dx * s.iter().map(|z| abs_pow(*z, p)).sum::<f64>()
        });
        Ok(finish(terms.iter().sum(), prep.warnings, worst))
    }

    /// [`power`](Self::power) together with its gradient.
    pub fn power_with_gradient(&self, f: &Field, p: f64) -> Result<Checked<PowerFunctional>> {
        if p.is_nan() || p < 2.0 {
            return Err(LabError::InvalidExponent(format!("power functional needs p >= 2, got {p}")));
        }
        let grid = *f.grid();
        let n = grid.n_points();
        let prep = self.prepare(f)?;
        let plan = plans(n);
        let times = grid.times();
        let w = grid.time_weights();
        let dx = grid.dx();

        // fixed chunks summed in order keep the result independent of the thread count
        let chunk = grid.t_count().div_ceil(64);
        let partials: Vec<(f64, Vec<Complex64>, f64, f64)> = (0..grid.t_count().div_ceil(chunk))
            .into_par_iter()
            .map(|c| {
                let mut buf = vec![Complex64::default(); n];
                let mut scratch = vec![Complex64::default(); plan.scratch_len()];
                let mut acc = vec![Complex64::default(); n];
                let (mut value, mut wb, mut wt) = (0.0, 0.0f64, 0.0f64);
                for i in c * chunk..((c + 1) * chunk).min(grid.t_count()) {
                    fill_slice(&mut buf, &prep, times[i]);
                    inverse_in_place(&mut buf, &plan, &mut scratch);
                    let b = boundary_fraction(&buf, BOUNDARY_EDGE);
                    if b > wb {
                        wb = b;
                        wt = times[i];
                    }
                    let mut sum = 0.0;
                    for z in buf.iter_mut() {
                        let s = z.norm_sqr();
                        let pw = if p == 6.0 { s * s } else { s.powf(0.5 * p - 1.0) };
                        sum += pw * s;
                        *z *= pw;
                    }
                    value += w[i] * dx * sum;
                    forward_in_place(&mut buf, &plan, &mut scratch);
                    let t = times[i];
                    for (j, a) in acc.iter_mut().enumerate() {
                        let sym = Complex64::from_polar(prep.weights[j], -t * prep.phases[j]);
                        *a += buf[j] * sym * (p * w[i]);
                    }
                }
                (value, acc, wb, wt)
            })
            .collect();
        let mut value = 0.0;
        let mut acc = vec![Complex64::default(); n];
        let (mut worst_b, mut worst_t) = (0.0, 0.0);
        for (v, part, wb, wt) in partials {
            value += v;
            for (a, x) in acc.iter_mut().zip(&part) {
                *a += x;
            }
            if wb > worst_b {
                worst_b = wb;
                worst_t = wt;
            }
        }
        let mut scratch = vec![Complex64::default(); plan.scratch_len()];
        inverse_in_place(&mut acc, &plan, &mut scratch);
        let gradient = Field::new(grid, acc)?;
        Ok(finish(PowerFunctional { value, gradient }, prep.warnings, (worst_b, worst_t)))
    }
}

fn fill_slice(buf: &mut [Complex64], prep: &Prepared, t: f64) {
    for (j, b) in buf.iter_mut().enumerate() {
        *b = prep.coefficients[j] * Complex64::from_polar(prep.weights[j], t * prep.phases[j]);
    }
}

fn boundary_fraction(samples: &[Complex64], edge: f64) -> f64 {
    let total: f64 = samples.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let n = samples.len();
    let width = ((edge * n as f64).ceil() as usize).clamp(1, n / 2);
    let outer: f64 = samples[..width]
        .iter()
        .chain(&samples[n - width..])
        .map(|z| z.norm_sqr())
        .sum();
    outer / total
}

fn finish<T>(value: T, mut warnings: Vec<Warning>, worst: (f64, f64)) -> Checked<T> {
    if worst.0 > TRUNCATION_TOLERANCE {
        warnings.push(Warning::Truncation {
            boundary_fraction: worst.0,
            time: worst.1,
        });
    }
    Checked { value, warnings }
}
