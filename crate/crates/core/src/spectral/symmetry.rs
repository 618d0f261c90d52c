//! The symmetry group: phase, translation, L2 rescaling, modulation and Airy
//! time shifts.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{density_scale, Field, SpectralField};
use super::{
    airy_propagate, dtft_equispaced, forward_fourier, inverse_fourier, truncation_warning, Checked,
    Warning, ALIASING_TOLERANCE, TRUNCATION_TOLERANCE,
};
use crate::error::{LabError, Result};

/// `(h, xi, x0, t0, theta)`.
///
/// Acting on a profile `phi` this produces
/// `e^{t0 d^3} [ e^{i theta} h^{-1/2} e^{i (x - x0) xi} phi((x - x0) / h) ]`,
/// whose transform is
/// `e^{i theta} h^{1/2} e^{-i x0 eta} e^{-i t0 eta^3} phi^(h (eta - xi))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryParams {
    pub h: f64,
    pub xi: f64,
    pub x0: f64,
    pub t0: f64,
    pub theta: f64,
}

impl SymmetryParams {
    pub fn new(h: f64, xi: f64, x0: f64, t0: f64, theta: f64) -> Result<Self> {
        let p = Self { h, xi, x0, t0, theta };
        p.validate()?;
        Ok(p)
    }

    pub fn identity() -> Self {
        Self {
            h: 1.0,
            xi: 0.0,
            x0: 0.0,
            t0: 0.0,
            theta: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(LabError::InvalidParameter(format!("scale h must be positive, got {}", self.h)));
        }
        for (name, v) in [("xi", self.xi), ("x0", self.x0), ("t0", self.t0), ("theta", self.theta)] {
            if !v.is_finite() {
                return Err(LabError::InvalidParameter(format!("{name} = {v} is not finite")));
            }
        }
        Ok(())
    }

    /// The phase with `theta` reduced to `[0, 2 pi)`.
    pub fn normalized(&self) -> Self {
        Self {
            theta: self.theta.rem_euclid(2.0 * PI),
            ..*self
        }
    }
}

/// Fraction of the spectral mass of `spectrum` that the frequency map
/// `k -> k / h + xi` sends outside the usable band.
pub(crate) fn mapped_outside_fraction(spectrum: &SpectralField, h: f64, xi: f64) -> f64 {
    let grid = spectrum.grid();
    let total = spectrum.energy();
    if total == 0.0 {
        return 0.0;
    }
    let band = grid.band_limit();
    let outside: f64 = spectrum
        .coefficients()
        .iter()
        .enumerate()
        .filter(|(j, _)| (grid.frequency(*j) / h + xi).abs() > band)
        .map(|(_, c)| c.norm_sqr())
        .sum();
    outside / total
}

/// Lattice shift `xi / dk` when it is an integer, else `None`.
fn lattice_shift(xi: f64, dk: f64) -> Option<i64> {
    let s = xi / dk;
    let r = s.round();
    ((s - r).abs() <= 1e-9 * r.abs().max(1.0)).then_some(r as i64)
}

/// Evaluates `g` applied to `f`, including the time shift, without ever
/// leaving frequency space.
pub fn apply_symmetry(f: &Field, g: &SymmetryParams) -> Result<Checked<Field>> {
    g.validate()?;
    let grid = *f.grid();
    let n = grid.n_points();
    let dk = grid.dk();
    let spectrum = forward_fourier(f);
    let mut warnings = Vec::new();
    let outside = mapped_outside_fraction(&spectrum, g.h, g.xi);
    if outside > ALIASING_TOLERANCE {
        warnings.push(Warning::Aliasing {
            outside_fraction: outside,
        });
    }

    let outer = |eta: f64| Complex64::from_polar(1.0, g.theta - g.x0 * eta - g.t0 * eta * eta * eta);
    let mut out = vec![Complex64::default(); n];
    let min_mode = grid.min_mode();
    let max_mode = min_mode + n as i64 - 1;

    match lattice_shift(g.xi, dk).filter(|_| g.h == 1.0) {
        Some(s) => {
            // phi^(eta - xi) sits on the lattice: a pure index shift.
            let carry = Complex64::from_polar(1.0, s as f64 * dk * grid.x_min());
            for m in min_mode..=max_mode {
                let src = m - s;
                if src < min_mode || src > max_mode {
                    continue;
                }
                let eta = m as f64 * dk;
                out[grid.slot_of_mode(m)] =
                    spectrum.coefficients()[grid.slot_of_mode(src)] * carry * outer(eta);
            }
        }
        None => {
            // phi^ at the off-lattice points h (eta_i - xi), eta_i ascending.
            let scale = density_scale(&grid);
            let omega0 = g.h * (min_mode as f64 * dk - g.xi);
            let values = dtft_equispaced(f.samples(), grid.x_min(), grid.dx(), omega0, g.h * dk, n);
            let nyquist = grid.nyquist();
            let pre = grid.dx() / (2.0 * PI).sqrt() * g.h.sqrt();
            for (i, v) in values.into_iter().enumerate() {
                let omega = omega0 + i as f64 * g.h * dk;
                if omega.abs() > nyquist * (1.0 + 1e-12) {
                    continue;
                }
                let eta = (min_mode + i as i64) as f64 * dk;
                let density = v * pre * outer(eta);
                out[grid.sorted_slot(i)] = density * Complex64::from_polar(1.0 / scale, eta * grid.x_min());
            }
        }
    }
    let value = inverse_fourier(&SpectralField::from_parts_unchecked(grid, out));
    warnings.extend(truncation_warning(&value, g.t0, TRUNCATION_TOLERANCE));
    Ok(Checked { value, warnings })
}

/// `e^{i kappa x} f(x)`.
pub fn modulate(f: &Field, kappa: f64) -> Result<Checked<Field>> {
    apply_symmetry(
        f,
        &SymmetryParams {
            xi: kappa,
            ..SymmetryParams::identity()
        },
    )
}

/// `h^{-1/2} f(x / h)`.
pub fn rescale(f: &Field, h: f64) -> Result<Checked<Field>> {
    apply_symmetry(
        f,
        &SymmetryParams {
            h,
            ..SymmetryParams::identity()
        },
    )
}

/// `f(x - x0)`.
pub fn translate(f: &Field, x0: f64) -> Result<Checked<Field>> {
    apply_symmetry(
        f,
        &SymmetryParams {
            x0,
            ..SymmetryParams::identity()
        },
    )
}

/// `e^{i theta} f`.
pub fn phase_rotate(f: &Field, theta: f64) -> Field {
    f.scaled(Complex64::from_polar(1.0, theta))
}

/// `e^{t0 d^3} f`, i.e. the Airy flow run for time `-t0`.
pub fn time_shift(f: &Field, t0: f64) -> Result<Checked<Field>> {
    airy_propagate(f, -t0)
}
