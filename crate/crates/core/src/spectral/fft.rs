//! FFT plan cache, unitary transforms and a Bluestein evaluator for
//! non-lattice frequencies.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub(crate) struct Plans {
    pub forward: Arc<dyn Fft<f64>>,
    pub inverse: Arc<dyn Fft<f64>>,
}

impl Plans {
    pub fn scratch_len(&self) -> usize {
        self.forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len())
    }
}

pub(crate) fn plans(n: usize) -> Plans {
    static CACHE: OnceLock<Mutex<HashMap<usize, Plans>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Plans {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            }
        })
        .clone()
}

/// In-place unitary forward DFT: `c_j = n^{-1/2} sum_m u_m e^{-2 pi i jm/n}`.
pub(crate) fn forward_in_place(buf: &mut [Complex64], plans: &Plans, scratch: &mut [Complex64]) {
    plans.forward.process_with_scratch(buf, scratch);
    let s = 1.0 / (buf.len() as f64).sqrt();
    buf.iter_mut().for_each(|z| *z *= s);
}

/// In-place unitary inverse DFT.
pub(crate) fn inverse_in_place(buf: &mut [Complex64], plans: &Plans, scratch: &mut [Complex64]) {
    plans.inverse.process_with_scratch(buf, scratch);
    let s = 1.0 / (buf.len() as f64).sqrt();
    buf.iter_mut().for_each(|z| *z *= s);
}

pub(crate) fn forward(samples: &[Complex64]) -> Vec<Complex64> {
    let p = plans(samples.len());
    let mut buf = samples.to_vec();
    let mut scratch = vec![Complex64::default(); p.scratch_len()];
    forward_in_place(&mut buf, &p, &mut scratch);
    buf
}

pub(crate) fn inverse(coefficients: &[Complex64]) -> Vec<Complex64> {
    let p = plans(coefficients.len());
    let mut buf = coefficients.to_vec();
    let mut scratch = vec![Complex64::default(); p.scratch_len()];
    inverse_in_place(&mut buf, &p, &mut scratch);
    buf
}

/// Evaluates `sum_m u_m exp(-i w_j x_m)` at `count` equispaced frequencies
/// `w_j = omega0 + j * domega`, where `x_m = x_min + m * dx`.
///
/// Uses the chirp-z (Bluestein) factorization, so the cost is
/// `O((n + count) log(n + count))`.
pub(crate) fn dtft_equispaced(
    samples: &[Complex64],
    x_min: f64,
    dx: f64,
    omega0: f64,
    domega: f64,
    count: usize,
) -> Vec<Complex64> {
    let n = samples.len();
    if n == 0 || count == 0 {
        return vec![Complex64::default(); count];
    }
    let theta = domega * dx;
    // jm = (j^2 + m^2 - (j - m)^2) / 2
    let chirp = |l: i64| Complex64::from_polar(1.0, -0.5 * theta * (l as f64) * (l as f64));
    let size = (n + count - 1).next_power_of_two();
    let p = plans(size);
    let mut scratch = vec![Complex64::default(); p.scratch_len()];

    let mut a = vec![Complex64::default(); size];
    for (m, u) in samples.iter().enumerate() {
        let pre = Complex64::from_polar(1.0, -omega0 * m as f64 * dx);
        a[m] = u * pre * chirp(m as i64);
    }
    let mut b = vec![Complex64::default(); size];
    for l in 0..count {
        b[l] = chirp(l as i64).conj();
    }
    for l in 1..n {
        b[size - l] = chirp(l as i64).conj();
    }
    p.forward.process_with_scratch(&mut a, &mut scratch);
    p.forward.process_with_scratch(&mut b, &mut scratch);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    p.inverse.process_with_scratch(&mut a, &mut scratch);
    let norm = 1.0 / size as f64;
    (0..count)
        .map(|j| {
            let w = omega0 + j as f64 * domega;
            a[j] * norm * chirp(j as i64) * Complex64::from_polar(1.0, -w * x_min)
        })
        .collect()
}
