//! Test signals: Gaussian wave packets with closed-form transforms and
//! random band-limited fields.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::spectral::{Field, GridSpec, SpectralField};

/// `amplitude * exp(-(x - center)^2 / (2 width^2)) * exp(i frequency x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePacket {
    pub center: f64,
    pub width: f64,
    pub frequency: f64,
    pub amplitude: Complex64,
}

impl WavePacket {
    /// Packet with unit L2 norm.
    pub fn normalized(center: f64, width: f64, frequency: f64) -> Self {
        Self {
            center,
            width,
            frequency,
            amplitude: Complex64::new((PI * width * width).powf(-0.25), 0.0),
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let y = (x - self.center) / self.width;
        self.amplitude * Complex64::from_polar((-0.5 * y * y).exp(), self.frequency * x)
    }

    /// Continuum transform `(2 pi)^{-1/2} int e^{-ixk} u(x) dx`.
    pub fn transform(&self, k: f64) -> Complex64 {
        let d = k - self.frequency;
        self.amplitude * self.width * Complex64::from_polar((-0.5 * self.width * self.width * d * d).exp(), -d * self.center)
    }

    pub fn mass(&self) -> f64 {
        self.amplitude.norm_sqr() * self.width * PI.sqrt()
    }

    pub fn field(&self, grid: GridSpec) -> Result<Field> {
        Field::from_fn(grid, |x| self.eval(x))
    }
}

/// Unit-mass centred Gaussian `exp(-x^2 / (2 width^2))`.
pub fn normalized_gaussian(grid: GridSpec, width: f64) -> Result<Field> {
    WavePacket::normalized(0.0, width, 0.0).field(grid)
}

/// Sum of packets sampled on `grid`.
pub fn superpose(grid: GridSpec, packets: &[WavePacket]) -> Result<Field> {
    Field::from_fn(grid, |x| packets.iter().map(|p| p.eval(x)).sum())
}

pub fn normalize(f: &Field) -> Result<Field> {
    let m = f.mass();
    if m == 0.0 {
        return Err(LabError::DegenerateInput("cannot normalize the zero field".into()));
    }
    Ok(f.scaled_real(m.sqrt().recip()))
}

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// Unit-mass field with independent Gaussian coefficients on every lattice
/// frequency `|k| <= cutoff` and nothing else. Periodic, so it fills the box.
pub fn random_band_limited<R: Rng + ?Sized>(grid: GridSpec, cutoff: f64, rng: &mut R) -> Result<Field> {
    let coefficients = (0..grid.n_points())
        .map(|j| {
            if grid.frequency(j).abs() <= cutoff {
                gaussian_complex(rng)
            } else {
                Complex64::default()
            }
        })
        .collect();
    normalize(&SpectralField::new(grid, coefficients)?.to_field())
}

/// Recipe for [`random_packets`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketBank {
    /// Number of packets per field.
    pub count: usize,
    /// Packet centres are uniform in `[-spread, spread]`.
    pub spread: f64,
    /// Widths are log-uniform in this range.
    pub min_width: f64,
    pub max_width: f64,
    /// Carrier frequencies are uniform in `[-max_frequency, max_frequency]`.
    pub max_frequency: f64,
}

impl Default for PacketBank {
    fn default() -> Self {
        Self {
            count: 3,
            spread: 4.0,
            min_width: 0.5,
            max_width: 2.0,
            max_frequency: 2.0,
        }
    }
}

impl PacketBank {
    pub fn sample_packets<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<WavePacket> {
        let (lo, hi) = (self.min_width.ln(), self.max_width.ln());
        (0..self.count.max(1))
            .map(|_| {
                let width = if hi > lo { rng.random_range(lo..hi).exp() } else { self.min_width };
                let center = if self.spread > 0.0 {
                    rng.random_range(-self.spread..=self.spread)
                } else {
                    0.0
                };
                let frequency = if self.max_frequency > 0.0 {
                    rng.random_range(-self.max_frequency..=self.max_frequency)
                } else {
                    0.0
                };
                WavePacket {
                    center,
                    width,
                    frequency,
                    amplitude: gaussian_complex(rng),
                }
            })
            .collect()
    }
}

/// Unit-mass, spatially localized, effectively band-limited random field:
/// a sum of Gaussian packets drawn from `bank`.
pub fn random_packets<R: Rng + ?Sized>(grid: GridSpec, bank: &PacketBank, rng: &mut R) -> Result<Field> {
    normalize(&superpose(grid, &bank.sample_packets(rng))?)
}
