use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Discretization of the periodic box, its frequency lattice and the time window.
///
/// Space is the periodic interval `[-L/2, L/2)` sampled at `n_points` nodes.
/// Time is `t_count` uniform nodes on `[-t_span, t_span]`, integrated with the
/// trapezoid rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n_points: usize,
    domain_length: f64,
    t_count: usize,
    t_span: f64,
    band_fraction: f64,
}

pub const DEFAULT_BAND_FRACTION: f64 = 0.5;

impl GridSpec {
    pub fn new(
        n_points: usize,
        domain_length: f64,
        t_count: usize,
        t_span: f64,
        band_fraction: f64,
    ) -> Result<Self> {
        if n_points < 2 {
            return Err(LabError::InvalidParameter(format!(
                "n_points must be at least 2, got {n_points}"
            )));
        }
        if !(domain_length.is_finite() && domain_length > 0.0) {
            return Err(LabError::InvalidParameter(format!(
                "domain_length must be positive, got {domain_length}"
            )));
        }
        if t_count < 2 {
            return Err(LabError::InvalidParameter(format!(
                "t_count must be at least 2, got {t_count}"
            )));
        }
        if !(t_span.is_finite() && t_span > 0.0) {
            return Err(LabError::InvalidParameter(format!(
                "t_span must be positive, got {t_span}"
            )));
        }
        if !(band_fraction > 0.0 && band_fraction <= 1.0) {
            return Err(LabError::InvalidParameter(format!(
                "band_fraction must lie in (0, 1], got {band_fraction}"
            )));
        }
        Ok(Self {
            n_points,
            domain_length,
            t_count,
            t_span,
            band_fraction,
        })
    }

    /// Grid with the default band fraction.
    pub fn with_defaults(n_points: usize, domain_length: f64, t_count: usize, t_span: f64) -> Result<Self> {
        Self::new(n_points, domain_length, t_count, t_span, DEFAULT_BAND_FRACTION)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn domain_length(&self) -> f64 {
        self.domain_length
    }

    pub fn t_count(&self) -> usize {
        self.t_count
    }

    pub fn t_span(&self) -> f64 {
        self.t_span
    }

    pub fn band_fraction(&self) -> f64 {
        self.band_fraction
    }

    pub fn with_time_window(&self, t_count: usize, t_span: f64) -> Result<Self> {
        Self::new(self.n_points, self.domain_length, t_count, t_span, self.band_fraction)
    }

    pub fn with_band_fraction(&self, band_fraction: f64) -> Result<Self> {
        Self::new(self.n_points, self.domain_length, self.t_count, self.t_span, band_fraction)
    }

    pub fn dx(&self) -> f64 {
        self.domain_length / self.n_points as f64
    }

    pub fn dk(&self) -> f64 {
        2.0 * PI / self.domain_length
    }

    pub fn x_min(&self) -> f64 {
        -0.5 * self.domain_length
    }

    pub fn position(&self, m: usize) -> f64 {
        self.x_min() + m as f64 * self.dx()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|m| self.position(m)).collect()
    }

    /// Signed mode number of FFT slot `j`.
    pub fn mode_number(&self, j: usize) -> i64 {
        let n = self.n_points;
        if j < n.div_ceil(2) {
            j as i64
        } else {
            j as i64 - n as i64
        }
    }

    /// FFT slot holding signed mode `m`.
    pub fn slot_of_mode(&self, m: i64) -> usize {
        m.rem_euclid(self.n_points as i64) as usize
    }

    /// Smallest signed mode number (the Nyquist mode for even grids).
    pub fn min_mode(&self) -> i64 {
        -((self.n_points / 2) as i64)
    }

    /// Frequency of FFT slot `j`, in radians per unit length.
    pub fn frequency(&self, j: usize) -> f64 {
        self.mode_number(j) as f64 * self.dk()
    }

    /// Frequencies in FFT slot order.
    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.frequency(j)).collect()
    }

    /// FFT slot of the `i`-th frequency in ascending order.
    pub fn sorted_slot(&self, i: usize) -> usize {
        self.slot_of_mode(self.min_mode() + i as i64)
    }

    /// Half-width of the usable band, `band_fraction * pi * n / L`.
    pub fn band_limit(&self) -> f64 {
        self.band_fraction * PI * self.n_points as f64 / self.domain_length
    }

    pub fn nyquist(&self) -> f64 {
        PI / self.dx()
    }

    pub fn in_band(&self, k: f64) -> bool {
        k.abs() <= self.band_limit()
    }

    pub fn dt(&self) -> f64 {
        2.0 * self.t_span / (self.t_count - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i + 1 == self.t_count {
            self.t_span
        } else {
            -self.t_span + i as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.t_count).map(|i| self.time(i)).collect()
    }

    /// Trapezoid weights on the time nodes.
    pub fn time_weights(&self) -> Vec<f64> {
        let dt = self.dt();
        (0..self.t_count)
            .map(|i| if i == 0 || i + 1 == self.t_count { 0.5 * dt } else { dt })
            .collect()
    }

    /// Whether two grids share the same spatial lattice.
    pub fn same_space(&self, other: &GridSpec) -> bool {
        self.n_points == other.n_points && self.domain_length == other.domain_length
    }

    /// Whether two grids share the same time quadrature.
    pub fn same_time_window(&self, other: &GridSpec) -> bool {
        self.t_count == other.t_count && self.t_span == other.t_span
    }
}
