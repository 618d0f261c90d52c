//! Distance from a field to the Gaussian orbit of the Schrödinger flow: the
//! field is moved to its focus time, where a chirped Gaussian becomes a plain
//! one, and compared with the best centred Gaussian there.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::norms::{inner_product, l2_norm};
use crate::separation::{focus_time, position_moments};
use crate::spectral::{schrodinger_propagate, Evolution, Field};
use crate::synth::WavePacket;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub center: f64,
    pub width: f64,
    pub frequency: f64,
    pub focus_time: f64,
    /// `min || v / ||v|| - c G ||` over complex `c`, with `v` the field at
    /// its focus time.
    pub distance: f64,
}

fn overlap(v: &Field, center: f64, width: f64, frequency: f64) -> Result<f64> {
    let g = WavePacket::normalized(center, width, frequency).field(*v.grid())?;
    Ok(inner_product(v, &g)?.norm() / l2_norm(&g))
}

/// Best Gaussian in the Schrödinger orbit of `u`, and the distance to it.
pub fn gaussian_fit(u: &Field) -> Result<GaussianFit> {
    let t = focus_time(u, Evolution::Schrodinger)?;
    let v = schrodinger_propagate(u, t)?.value;
    let v = v.scaled_real(l2_norm(&v).recip());
    let (center, var) = position_moments(&v);
    let frequency = v.to_spectral().centroid();

    // golden section on log width around the moment estimate
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let guess = (2.0 * var).sqrt().ln();
    let (mut lo, mut hi) = (guess - 0.7, guess + 0.7);
    let score = |s: f64| overlap(&v, center, s.exp(), frequency);
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let (mut fc, mut fd) = (score(c)?, score(d)?);
    while hi - lo > 1e-6 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = score(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = score(d)?;
        }
    }
    let width = (0.5 * (lo + hi)).exp();
    let best = overlap(&v, center, width, frequency)?;
    Ok(GaussianFit {
        center,
        width,
        frequency,
        focus_time: t,
        distance: (1.0 - best * best).max(0.0).sqrt(),
    })
}
