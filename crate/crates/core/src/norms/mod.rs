//! L2 and mixed space-time Lebesgue norms and the Airy Strichartz functional.
//!
//! Space-time quantities are computed by streaming over time slices; the
//! full `(t, x)` array is only built when a [`SpaceTimeField`] is requested.

mod flow;

pub use flow::{FlowOperator, PowerFunctional};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::spectral::{Checked, Field, GridSpec};

/// `(alpha, q, r)` for `|| D^alpha e^{-t d^3} u ||_{L^q_t L^r_x}`.
/// `q` and `r` may be `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrichartzExponents {
    pub alpha: f64,
    pub q: f64,
    pub r: f64,
}

const ADMISSIBLE_TOL: f64 = 1e-12;

impl StrichartzExponents {
    pub fn new(alpha: f64, q: f64, r: f64) -> Result<Self> {
        let e = Self { alpha, q, r };
        e.validate()?;
        Ok(e)
    }

    /// `(1/6, 6, 6)`.
    pub fn symmetric() -> Self {
        Self {
            alpha: 1.0 / 6.0,
            q: 6.0,
            r: 6.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_exponent(self.q, "q")?;
        check_exponent(self.r, "r")?;
        if !self.alpha.is_finite() {
            return Err(LabError::InvalidExponent(format!("alpha = {} is not finite", self.alpha)));
        }
        Ok(())
    }

    /// `-alpha + 3/q + 1/r - 1/2`; zero on the admissible line.
    pub fn scaling_defect(&self) -> f64 {
        -self.alpha + 3.0 / self.q + 1.0 / self.r - 0.5
    }
}

fn check_exponent(p: f64, name: &str) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(LabError::InvalidExponent(format!("{name} = {p} must be at least 1")));
    }
    Ok(())
}

/// `-alpha + 3/q + 1/r = 1/2` and `-1/2 <= alpha <= 1/q`.
pub fn check_admissible(e: &StrichartzExponents) -> bool {
    e.validate().is_ok()
        && e.scaling_defect().abs() <= ADMISSIBLE_TOL
        && e.alpha >= -0.5 - ADMISSIBLE_TOL
        && e.alpha <= 1.0 / e.q + ADMISSIBLE_TOL
}

/// `sqrt(dx * sum |u|^2)`.
pub fn l2_norm(f: &Field) -> f64 {
    f.mass().sqrt()
}

/// `<f, g> = int f conj(g) dx`.
pub fn inner_product(f: &Field, g: &Field) -> Result<Complex64> {
    if !f.grid().same_space(g.grid()) {
        return Err(LabError::GridMismatch("inner product of fields on different grids".into()));
    }
    let s: Complex64 = f.samples().iter().zip(g.samples()).map(|(a, b)| a * b.conj()).sum();
    Ok(s * f.grid().dx())
}

/// `|z|^p`, avoiding `powf` for the common even exponents.
#[inline]
pub(crate) fn abs_pow(z: Complex64, p: f64) -> f64 {
    let s = z.norm_sqr();
    if p == 2.0 {
        s
    } else if p == 4.0 {
        s * s
    } else if p == 6.0 {
        s * s * s
    } else {
        s.powf(0.5 * p)
    }
}

/// `(dx * sum |u|^r)^{1/r}`, or `max |u|` for `r = inf`.
pub(crate) fn spatial_norm(samples: &[Complex64], dx: f64, r: f64) -> f64 {
    if r.is_infinite() {
        samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    } else {
        (dx * samples.iter().map(|z| abs_pow(*z, r)).sum::<f64>()).powf(r.recip())
    }
}

/// Trapezoid `(sum_t w_t a_t^q)^{1/q}`, or `max a_t` for `q = inf`.
pub(crate) fn temporal_norm(slice_norms: &[f64], weights: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        slice_norms.iter().copied().fold(0.0, f64::max)
    } else {
        slice_norms
            .iter()
            .zip(weights)
            .map(|(a, w)| w * a.powf(q))
            .sum::<f64>()
            .powf(q.recip())
    }
}

/// Samples of a function of `(t, x)`, one slice per time node of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    grid: GridSpec,
    slices: Vec<Field>,
}

impl SpaceTimeField {
    pub fn new(grid: GridSpec, slices: Vec<Field>) -> Result<Self> {
        if slices.len() != grid.t_count() {
            return Err(LabError::InvalidInput(format!(
                "{} slices for {} time nodes",
                slices.len(),
                grid.t_count()
            )));
        }
        if slices.iter().any(|s| s.grid() != &grid) {
            return Err(LabError::GridMismatch("slice grid differs from the space-time grid".into()));
        }
        Ok(Self { grid, slices })
    }

    /// Samples `f(t, x)` at every node.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        let slices = grid
            .times()
            .into_iter()
            .map(|t| Field::from_fn(grid, |x| f(t, x)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, slices)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn slices(&self) -> &[Field] {
        &self.slices
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid,
            slices: self.slices.iter().map(|s| s.scaled(c)).collect(),
        }
    }
}

/// `|| U ||_{L^q_t L^r_x}`: spatial Riemann sum inside, trapezoid in time
/// outside. Infinite exponents use the sample maximum, a lower bound for the
/// true supremum.
pub fn spacetime_norm(u: &SpaceTimeField, q: f64, r: f64) -> Result<f64> {
    check_exponent(q, "q")?;
    check_exponent(r, "r")?;
    let dx = u.grid.dx();
    let inner: Vec<f64> = u.slices.iter().map(|s| spatial_norm(s.samples(), dx, r)).collect();
    Ok(temporal_norm(&inner, &u.grid.time_weights(), q))
}

/// `|| D^alpha e^{-t d^3} f ||_{L^q_t L^r_x}` over the time window of the
/// field's grid. Rejects inadmissible exponents.
pub fn strichartz_functional(f: &Field, e: &StrichartzExponents) -> Result<Checked<f64>> {
    e.validate()?;
    if !check_admissible(e) {
        return Err(LabError::Inadmissible {
            alpha: e.alpha,
            q: e.q,
            r: e.r,
        });
    }
    FlowOperator::airy(e.alpha).mixed_norm(f, e.q, e.r)
}

/// `|| D^{1/6} e^{-t d^3} f ||_{L^6_{t,x}}`.
pub fn airy_l6(f: &Field) -> Result<Checked<f64>> {
    strichartz_functional(f, &StrichartzExponents::symmetric())
}
