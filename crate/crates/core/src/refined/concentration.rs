//! `sup_tau |tau|^{1/2 - 1/p} || u^ ||_{L^p(tau)}` over unions of lattice cells.
//!
//! Cell `i` is `[k_i - dk/2, k_i + dk/2)` and carries the constant `|u^(k_i)|`,
//! so on an interval of `m` consecutive cells the functional is
//! `(m dk)^{1/2 - 1/p} (dk S)^{1/p}` with `S` the sum of `|u^|^p`.
//!
//! The search is exact over all cell intervals. A dyadic sweep supplies a
//! lower bound; then every group of intervals with length in `[2^m, 2^{m+1})`
//! starting in one aligned block of size `2^{m+1}` is bounded above by
//! `(2^m dk)^{beta} dk S(block and its right neighbour)` and only scanned
//! when that bound can beat the incumbent.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// A frequency interval and the functional value on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalValue {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

impl IntervalValue {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn radius(&self) -> f64 {
        0.5 * self.length()
    }
}

/// Winning run of cells `first..=last` (indices into the magnitude slice).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellInterval {
    pub first: usize,
    pub last: usize,
    pub value: f64,
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(LabError::InvalidExponent(format!("concentration exponent p = {p} must exceed 1")));
    }
    Ok(())
}

/// Candidate ordering: larger `value_p`, then smaller `first`, then smaller `last`.
#[derive(Clone, Copy)]
struct Cand {
    value_p: f64,
    first: usize,
    last: usize,
}

fn better(a: Cand, b: Cand) -> Cand {
    if a.value_p > b.value_p
        || (a.value_p == b.value_p && (a.first, a.last) < (b.first, b.last))
    {
        a
    } else {
        b
    }
}

/// Exact maximizer over runs of cells. `magnitudes[i]` is `|u^|` on cell `i`.
pub fn best_cell_interval(magnitudes: &[f64], dk: f64, p: f64) -> Result<CellInterval> {
    check_p(p)?;
    let n = magnitudes.len();
    if n == 0 {
        return Err(LabError::InvalidInput("no cells to search".into()));
    }
    if magnitudes.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
        return Err(LabError::InvalidInput("magnitudes must be finite and non-negative".into()));
    }
    let beta = 0.5 * p - 1.0;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for m in magnitudes {
        acc += m.powf(p);
        prefix.push(acc);
    }
    let sum = |a: usize, b: usize| prefix[b + 1] - prefix[a];
    let len_factor = |cells: usize| (cells as f64 * dk).powf(beta) * dk;
    let eval = |first: usize, last: usize| Cand {
        value_p: len_factor(last - first + 1) * sum(first, last),
        first,
        last,
    };

    // dyadic sweep
    let mut best = Cand {
        value_p: f64::NEG_INFINITY,
        first: 0,
        last: 0,
    };
    let mut size = 1usize;
    loop {
        for start in (0..n).step_by(size) {
            best = better(eval(start, (start + size - 1).min(n - 1)), best);
        }
        if size >= n {
            break;
        }
        size *= 2;
    }

    // exhaustive search in blocks whose bound beats the incumbent
    let mut m = 0u32;
    while (1usize << m) <= n {
        let short = 1usize << m;
        let block = short * 2;
        let long = (block - 1).min(n);
        let bound_factor = len_factor(short);
        let incumbent = best.value_p;
        let level_best = (0..n.div_ceil(block))
            .into_par_iter()
            .filter_map(|b| {
                let start = b * block;
                let end = (start + 2 * block - 1).min(n - 1);
                if bound_factor * sum(start, end) < incumbent {
                    return None;
                }
                let mut local: Option<Cand> = None;
                for first in start..(start + block).min(n) {
                    for cells in short..=long {
                        let last = first + cells - 1;
                        if last >= n {
                            break;
                        }
                        let c = eval(first, last);
                        local = Some(match local {
                            Some(l) => better(c, l),
                            None => c,
                        });
                    }
                }
                local
            })
            .reduce_with(better);
        if let Some(c) = level_best {
            best = better(c, best);
        }
        m += 1;
    }
    Ok(CellInterval {
        first: best.first,
        last: best.last,
        value: best.value_p.max(0.0).powf(p.recip()),
    })
}

/// Straightforward `O(n^2)` reference search with the same tie-breaking.
pub fn brute_force_cell_interval(magnitudes: &[f64], dk: f64, p: f64) -> Result<CellInterval> {
    check_p(p)?;
    let beta = 0.5 * p - 1.0;
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    for first in 0..magnitudes.len() {
        let mut s = 0.0;
        for (last, m) in magnitudes.iter().enumerate().skip(first) {
            s += m.powf(p);
            let v = ((last - first + 1) as f64 * dk).powf(beta) * dk * s;
            if v > best.0 {
                best = (v, first, last);
            }
        }
    }
    Ok(CellInterval {
        first: best.1,
        last: best.2,
        value: best.0.max(0.0).powf(p.recip()),
    })
}
