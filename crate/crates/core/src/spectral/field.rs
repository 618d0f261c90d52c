use std::f64::consts::PI;

use num_complex::Complex64;

use super::grid::GridSpec;
use crate::error::{LabError, Result};

/// Physical-space samples `u(x_m)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    samples: Vec<Complex64>,
}

/// Unitary DFT coefficients of a [`Field`], in FFT slot order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coefficients: Vec<Complex64>,
}

fn check_samples(grid: &GridSpec, values: &[Complex64], what: &str) -> Result<()> {
    if values.len() != grid.n_points() {
        return Err(LabError::InvalidInput(format!(
            "{what} has length {} but the grid has {} points",
            values.len(),
            grid.n_points()
        )));
    }
    if let Some(i) = values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(LabError::InvalidInput(format!("{what} entry {i} is not finite")));
    }
    Ok(())
}

impl Field {
    pub fn new(grid: GridSpec, samples: Vec<Complex64>) -> Result<Self> {
        check_samples(&grid, &samples, "field")?;
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            samples: vec![Complex64::default(); grid.n_points()],
        }
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let samples = grid.positions().into_iter().map(f).collect();
        Self::new(grid, samples)
    }

    pub fn from_real_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// Builds the field whose continuum Fourier transform (unitary
    /// convention) takes the value `density(k)` at every lattice frequency.
    pub fn from_density(grid: GridSpec, density: impl Fn(f64) -> Complex64) -> Result<Self> {
        let coefficients = (0..grid.n_points())
            .map(|j| {
                let k = grid.frequency(j);
                density(k) * Complex64::from_polar(1.0 / density_scale(&grid), k * grid.x_min())
            })
            .collect();
        Ok(SpectralField::new(grid, coefficients)?.to_field())
    }

    pub(crate) fn from_parts_unchecked(grid: GridSpec, samples: Vec<Complex64>) -> Self {
        debug_assert_eq!(samples.len(), grid.n_points());
        Self { grid, samples }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn to_spectral(&self) -> SpectralField {
        super::forward_fourier(self)
    }

    /// Squared L2 norm, `dx * sum |u|^2`.
    pub fn mass(&self) -> f64 {
        self.grid.dx() * self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn scaled(&self, c: Complex64) -> Field {
        Self::from_parts_unchecked(self.grid, self.samples.iter().map(|z| z * c).collect())
    }

    pub fn scaled_real(&self, c: f64) -> Field {
        self.scaled(Complex64::new(c, 0.0))
    }

    pub fn try_add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + c * other`.
    pub fn try_axpy(&self, c: Complex64, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + c * b)
    }

    fn zip_with(&self, other: &Field, op: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Field> {
        if !self.grid.same_space(&other.grid) {
            return Err(LabError::GridMismatch(
                "fields live on different spatial grids".into(),
            ));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| op(*a, *b))
            .collect();
        Ok(Self::from_parts_unchecked(self.grid, samples))
    }

    /// Largest `|Im u| / max |u|`; zero for the zero field.
    pub fn imaginary_fraction(&self) -> f64 {
        let peak = self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        self.samples.iter().map(|z| z.im.abs()).fold(0.0, f64::max) / peak
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.imaginary_fraction() <= tol
    }

    pub fn real_part(&self) -> Field {
        Self::from_parts_unchecked(
            self.grid,
            self.samples.iter().map(|z| Complex64::new(z.re, 0.0)).collect(),
        )
    }

    /// Same samples, reinterpreted on a grid that differs only in its time
    /// window or band fraction.
    pub fn on_grid(&self, grid: GridSpec) -> Result<Field> {
        if !self.grid.same_space(&grid) {
            return Err(LabError::GridMismatch(
                "target grid has a different spatial lattice".into(),
            ));
        }
        Ok(Self::from_parts_unchecked(grid, self.samples.clone()))
    }

    /// Fraction of the mass lying in the outer `edge` fraction of the box on
    /// either side.
    pub fn boundary_fraction(&self, edge: f64) -> f64 {
        let total: f64 = self.samples.iter().map(|z| z.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let n = self.samples.len();
        let width = ((edge * n as f64).ceil() as usize).clamp(1, n / 2);
        let outer: f64 = self.samples[..width]
            .iter()
            .chain(&self.samples[n - width..])
            .map(|z| z.norm_sqr())
            .sum();
        outer / total
    }
}

/// Ratio between the continuum transform `u^(k_j)` and the unitary DFT
/// coefficient (up to the phase `exp(-i k_j x_min)`).
pub fn density_scale(grid: &GridSpec) -> f64 {
    (grid.dx() * grid.domain_length() / (2.0 * PI)).sqrt()
}

impl SpectralField {
    pub fn new(grid: GridSpec, coefficients: Vec<Complex64>) -> Result<Self> {
        check_samples(&grid, &coefficients, "spectrum")?;
        Ok(Self { grid, coefficients })
    }

    pub(crate) fn from_parts_unchecked(grid: GridSpec, coefficients: Vec<Complex64>) -> Self {
        Self { grid, coefficients }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<Complex64> {
        self.coefficients
    }

    pub fn to_field(&self) -> Field {
        super::inverse_fourier(self)
    }

    /// Sum of `|c_j|^2`; equals the field's squared L2 norm divided by `dx`.
    pub fn energy(&self) -> f64 {
        self.coefficients.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Continuum Fourier transform sampled at the lattice frequencies
    /// (unitary convention, so `sum |u^|^2 dk` is the squared L2 norm).
    pub fn density(&self) -> Vec<Complex64> {
        let s = density_scale(&self.grid);
        let x0 = self.grid.x_min();
        self.coefficients
            .iter()
            .enumerate()
            .map(|(j, c)| c * Complex64::from_polar(s, -self.grid.frequency(j) * x0))
            .collect()
    }

    /// `|u^(k)|` listed in ascending frequency order.
    pub fn sorted_magnitudes(&self) -> Vec<f64> {
        let s = density_scale(&self.grid);
        (0..self.grid.n_points())
            .map(|i| self.coefficients[self.grid.sorted_slot(i)].norm() * s)
            .collect()
    }

    /// Fraction of the energy carried by lattice frequencies outside the
    /// usable band.
    pub fn out_of_band_fraction(&self) -> f64 {
        let total = self.energy();
        if total == 0.0 {
            return 0.0;
        }
        let outside: f64 = self
            .coefficients
            .iter()
            .enumerate()
            .filter(|(j, _)| !self.grid.in_band(self.grid.frequency(*j)))
            .map(|(_, c)| c.norm_sqr())
            .sum();
        outside / total
    }

    /// Energy-weighted mean frequency.
    pub fn centroid(&self) -> f64 {
        self.weighted_mean(|k| k)
    }

    /// Energy-weighted mean of `|k|`; the meaningful centroid for real fields.
    pub fn abs_centroid(&self) -> f64 {
        self.weighted_mean(f64::abs)
    }

    fn weighted_mean(&self, f: impl Fn(f64) -> f64) -> f64 {
        let total = self.energy();
        if total == 0.0 {
            return 0.0;
        }
        self.coefficients
            .iter()
            .enumerate()
            .map(|(j, c)| f(self.grid.frequency(j)) * c.norm_sqr())
            .sum::<f64>()
            / total
    }
}
