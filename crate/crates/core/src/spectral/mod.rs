//! Grids, unitary Fourier transforms, the Airy and Schrödinger propagators,
//! fractional multipliers and the mass-preserving symmetry group.
//!
//! Conventions: the discrete transform is unitary (`sum |c|^2 = sum |u|^2`)
//! and the continuum transform used for densities is
//! `u^(k) = (2 pi)^{-1/2} int e^{-ixk} u(x) dx`. The Airy flow
//! `e^{-t d^3}` acts as the multiplier `e^{i t k^3}`, the Schrödinger flow
//! `e^{-i t d^2}` as `e^{i t k^2}`. Every identity checked by this crate is a
//! ratio of norms and does not depend on where the `2 pi` is placed.

mod fft;
mod field;
mod grid;
pub mod io;
mod symmetry;

pub use field::{density_scale, Field, SpectralField};
pub use grid::{GridSpec, DEFAULT_BAND_FRACTION};
pub use symmetry::{apply_symmetry, modulate, phase_rotate, rescale, time_shift, translate, SymmetryParams};
pub(crate) use symmetry::mapped_outside_fraction;

pub(crate) use fft::{dtft_equispaced, forward_in_place, inverse_in_place, plans};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Relative spectral mass outside the usable band that triggers an aliasing warning.
pub const ALIASING_TOLERANCE: f64 = 1e-8;
/// Boundary-adjacent mass fraction that triggers a truncation warning after propagation.
pub const TRUNCATION_TOLERANCE: f64 = 1e-6;
/// Boundary-adjacent mass fraction tolerated at `t = 0`.
pub const INITIAL_BOUNDARY_TOLERANCE: f64 = 1e-8;
/// Width of the boundary zone on each side, as a fraction of the box.
pub const BOUNDARY_EDGE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// Spectral mass outside the usable band.
    Aliasing { outside_fraction: f64 },
    /// Mass close to the edge of the periodic box at time `time`.
    Truncation { boundary_fraction: f64, time: f64 },
}

/// A value together with the numerical warnings raised while computing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Checked<T> {
    pub value: T,
    pub warnings: Vec<Warning>,
}

impl<T> Checked<T> {
    pub fn clean(value: T) -> Self {
        Self {
            value,
            warnings: Vec::new(),
        }
    }

    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty()
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Checked<U> {
        Checked {
            value: f(self.value),
            warnings: self.warnings,
        }
    }

    pub fn has_aliasing(&self) -> bool {
        self.warnings.iter().any(|w| matches!(w, Warning::Aliasing { .. }))
    }

    pub fn has_truncation(&self) -> bool {
        self.warnings.iter().any(|w| matches!(w, Warning::Truncation { .. }))
    }
}

/// Dispersion relation of a linear flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evolution {
    /// `e^{-t d_x^3}`, phase `t k^3`.
    Airy,
    /// `e^{-i t d_x^2}`, phase `t k^2`.
    Schrodinger,
}

impl Evolution {
    pub fn phase(self, k: f64) -> f64 {
        match self {
            Evolution::Airy => k * k * k,
            Evolution::Schrodinger => k * k,
        }
    }
}

pub fn forward_fourier(f: &Field) -> SpectralField {
    SpectralField::from_parts_unchecked(*f.grid(), fft::forward(f.samples()))
}

pub fn inverse_fourier(s: &SpectralField) -> Field {
    Field::from_parts_unchecked(*s.grid(), fft::inverse(s.coefficients()))
}

pub fn aliasing_warning(spectrum: &SpectralField) -> Option<Warning> {
    let outside = spectrum.out_of_band_fraction();
    (outside > ALIASING_TOLERANCE).then_some(Warning::Aliasing {
        outside_fraction: outside,
    })
}

pub(crate) fn truncation_warning(f: &Field, time: f64, tolerance: f64) -> Option<Warning> {
    let frac = f.boundary_fraction(BOUNDARY_EDGE);
    (frac > tolerance).then_some(Warning::Truncation {
        boundary_fraction: frac,
        time,
    })
}

/// Warnings about the initial datum: spectral mass outside the band and mass
/// near the box edge.
pub fn input_warnings(f: &Field) -> Vec<Warning> {
    let spectrum = forward_fourier(f);
    aliasing_warning(&spectrum)
        .into_iter()
        .chain(truncation_warning(f, 0.0, INITIAL_BOUNDARY_TOLERANCE))
        .collect()
}

/// Applies the flow of `evolution` for time `t`.
pub fn propagate(f: &Field, t: f64, evolution: Evolution) -> Result<Checked<Field>> {
    if !t.is_finite() {
        return Err(LabError::InvalidParameter(format!("propagation time {t} is not finite")));
    }
    let spectrum = forward_fourier(f);
    let mut warnings: Vec<Warning> = aliasing_warning(&spectrum).into_iter().collect();
    let grid = *f.grid();
    let coefficients = spectrum
        .coefficients()
        .iter()
        .enumerate()
        .map(|(j, c)| c * Complex64::from_polar(1.0, t * evolution.phase(grid.frequency(j))))
        .collect();
    let out = inverse_fourier(&SpectralField::from_parts_unchecked(grid, coefficients));
    warnings.extend(truncation_warning(&out, t, TRUNCATION_TOLERANCE));
    Ok(Checked { value: out, warnings })
}

/// `e^{-t d_x^3} f`.
pub fn airy_propagate(f: &Field, t: f64) -> Result<Checked<Field>> {
    propagate(f, t, Evolution::Airy)
}

/// `e^{-i t d_x^2} f`.
pub fn schrodinger_propagate(f: &Field, t: f64) -> Result<Checked<Field>> {
    propagate(f, t, Evolution::Schrodinger)
}

/// `|k|^alpha`, with the continuous value 0 at `k = 0` for `alpha > 0`.
pub fn fractional_symbol(k: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        1.0
    } else if k == 0.0 {
        0.0
    } else {
        k.abs().powf(alpha)
    }
}

/// `D^alpha f`, the multiplier `|k|^alpha`.
pub fn fractional_derivative(f: &Field, alpha: f64) -> Result<Field> {
    if !alpha.is_finite() {
        return Err(LabError::InvalidParameter(format!("alpha {alpha} is not finite")));
    }
    let spectrum = forward_fourier(f);
    if alpha < 0.0 {
        let total = spectrum.energy();
        let dc = spectrum.coefficients()[0].norm_sqr();
        let dc_fraction = if total > 0.0 { dc / total } else { 0.0 };
        if dc_fraction > 1e-12 {
            return Err(LabError::SingularMultiplier { alpha, dc_fraction });
        }
    }
    let grid = *f.grid();
    let coefficients = spectrum
        .coefficients()
        .iter()
        .enumerate()
        .map(|(j, c)| c * fractional_symbol(grid.frequency(j), alpha))
        .collect();
    Ok(inverse_fourier(&SpectralField::from_parts_unchecked(grid, coefficients)))
}
