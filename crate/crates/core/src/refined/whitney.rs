//! Dyadic intervals and the Whitney pairing of the off-diagonal frequency
//! plane, in exact integer arithmetic.
//!
//! `I = 2^j [k, k+1)`. Two intervals of the same scale form a pair when
//! `dist(I, I') >= 4|I|`, i.e. `|k - k'| >= 5`, while their parents do not,
//! i.e. `|floor(k/2) - floor(k'/2)| <= 4`. Every pair then has
//! `dist <= 8|I|`, and each point `(xi, xi')` with `xi != xi'` lies in
//! exactly one pair at the unique scale where the index gap first reaches 5.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Pairs are enumerated at most this many scales below the region.
pub const MAX_ENUMERATION_DEPTH: i32 = 20;
/// `min_scale` may lie at most this many scales below the region.
pub const MAX_SCALE_DEPTH: i32 = 40;

const GAP_MIN: i64 = 5;
const PARENT_GAP_MAX: i64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicInterval {
    pub scale: i32,
    pub index: i64,
}

impl DyadicInterval {
    pub fn new(scale: i32, index: i64) -> Self {
        Self { scale, index }
    }

    /// The dyadic interval `[lo, hi)`; fails unless the length is a power of
    /// two and `lo` is a multiple of it.
    pub fn from_bounds(lo: f64, hi: f64) -> Result<Self> {
        let len = hi - lo;
        if !(lo.is_finite() && hi.is_finite() && len > 0.0) {
            return Err(LabError::InvalidInput(format!("[{lo}, {hi}) is not an interval")));
        }
        let scale = len.log2().round() as i32;
        if (2f64.powi(scale) - len).abs() > 1e-12 * len {
            return Err(LabError::InvalidInput(format!("length {len} is not a power of two")));
        }
        let k = lo / 2f64.powi(scale);
        if (k - k.round()).abs() > 1e-9 {
            return Err(LabError::InvalidInput(format!(
                "[{lo}, {hi}) is not aligned to its length"
            )));
        }
        Ok(Self::new(scale, k.round() as i64))
    }

    /// The interval of scale `scale` containing `x`.
    pub fn containing(x: f64, scale: i32) -> Self {
        Self::new(scale, (x / 2f64.powi(scale)).floor() as i64)
    }

    pub fn length(&self) -> f64 {
        2f64.powi(self.scale)
    }

    pub fn lo(&self) -> f64 {
        self.index as f64 * self.length()
    }

    pub fn hi(&self) -> f64 {
        (self.index + 1) as f64 * self.length()
    }

    pub fn contains(&self, x: f64) -> bool {
        Self::containing(x, self.scale).index == self.index
    }

    pub fn parent(&self) -> Self {
        Self::new(self.scale + 1, self.index.div_euclid(2))
    }

    /// Whether `self` is contained in `other`.
    pub fn is_within(&self, other: &DyadicInterval) -> bool {
        self.scale <= other.scale && (self.index >> (other.scale - self.scale)) == other.index
    }

    /// Gap between two intervals, zero if they touch or overlap.
    pub fn distance(&self, other: &DyadicInterval) -> f64 {
        (self.lo() - other.hi()).max(other.lo() - self.hi()).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WhitneyPair {
    pub interval: DyadicInterval,
    pub partner: DyadicInterval,
}

impl WhitneyPair {
    pub fn contains(&self, xi: f64, xi_prime: f64) -> bool {
        self.interval.contains(xi) && self.partner.contains(xi_prime)
    }
}

fn is_pair(k: i64, kp: i64) -> bool {
    (k - kp).abs() >= GAP_MIN && (k.div_euclid(2) - kp.div_euclid(2)).abs() <= PARENT_GAP_MAX
}

fn check_depth(region: &DyadicInterval, min_scale: i32, cap: i32) -> Result<()> {
    if min_scale < region.scale - cap {
        return Err(LabError::InvalidParameter(format!(
            "min_scale {min_scale} lies more than {cap} scales below the region scale {}",
            region.scale
        )));
    }
    Ok(())
}

/// All maximal pairs with both intervals inside `region` and scale at least
/// `min_scale`, both orders included, coarse scales first.
pub fn whitney_pairs(region: &DyadicInterval, min_scale: i32) -> Result<Vec<WhitneyPair>> {
    check_depth(region, min_scale, MAX_SCALE_DEPTH)?;
    check_depth(region, min_scale, MAX_ENUMERATION_DEPTH)?;
    let mut out = Vec::new();
    for scale in (min_scale..region.scale).rev() {
        let count = 1i64 << (region.scale - scale);
        let first = region.index * count;
        for k in first..first + count {
            let lo = (k - 2 * PARENT_GAP_MAX - 1).max(first);
            let hi = (k + 2 * PARENT_GAP_MAX + 1).min(first + count - 1);
            for kp in lo..=hi {
                if is_pair(k, kp) {
                    out.push(WhitneyPair {
                        interval: DyadicInterval::new(scale, k),
                        partner: DyadicInterval::new(scale, kp),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// The pair containing `(xi, xi_prime)`, found without enumeration. `None`
/// when a point lies outside the region, the points coincide, or the pair
/// would be finer than `min_scale`.
pub fn whitney_pair_containing(
    region: &DyadicInterval,
    min_scale: i32,
    xi: f64,
    xi_prime: f64,
) -> Result<Option<WhitneyPair>> {
    check_depth(region, min_scale, MAX_SCALE_DEPTH)?;
    if !(region.contains(xi) && region.contains(xi_prime)) || xi == xi_prime {
        return Ok(None);
    }
    for scale in (min_scale..region.scale).rev() {
        let a = DyadicInterval::containing(xi, scale);
        let b = DyadicInterval::containing(xi_prime, scale);
        if (a.index - b.index).abs() >= GAP_MIN {
            return Ok(Some(WhitneyPair {
                interval: a,
                partner: b,
            }));
        }
    }
    Ok(None)
}

/// Largest number of partners of a single interval.
pub fn max_multiplicity(pairs: &[WhitneyPair]) -> usize {
    let mut counts = std::collections::HashMap::new();
    for p in pairs {
        *counts.entry(p.interval).or_insert(0usize) += 1;
    }
    counts.into_values().max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_bounds() {
        let d = DyadicInterval::from_bounds(0.75, 1.0).unwrap();
        assert_eq!(d, DyadicInterval::new(-2, 3));
        assert!(DyadicInterval::from_bounds(0.5, 1.25).is_err());
        assert!(DyadicInterval::from_bounds(0.25, 0.75).is_err());
        assert!(DyadicInterval::new(-3, 5).is_within(&DyadicInterval::new(-1, 1)));
        assert!(!DyadicInterval::new(-3, 5).is_within(&DyadicInterval::new(-1, 0)));
        assert_eq!(DyadicInterval::new(0, -1).parent(), DyadicInterval::new(1, -1));
    }

    #[test]
    fn pairs_at_coarse_scales() {
        let region = DyadicInterval::new(0, 0);
        // four intervals per side at most two scales down: no gap reaches 5
        assert!(whitney_pairs(&region, -2).unwrap().is_empty());
        let pairs = whitney_pairs(&region, -3).unwrap();
        assert!(!pairs.is_empty());
        for p in &pairs {
            let d = p.interval.distance(&p.partner);
            assert!(d >= 4.0 * p.interval.length() && d <= 10.0 * p.interval.length());
        }
    }

    #[test]
    fn depth_guards() {
        let region = DyadicInterval::new(0, 0);
        assert!(whitney_pairs(&region, -41).is_err());
        assert!(whitney_pairs(&region, -21).is_err());
        assert!(whitney_pair_containing(&region, -40, 0.1, 0.9).unwrap().is_some());
    }

    #[test]
    fn point_location_agrees_with_membership() {
        let region = DyadicInterval::new(0, 0);
        let pairs = whitney_pairs(&region, -6).unwrap();
        let (a, b) = (0.03, 0.71);
        let found = whitney_pair_containing(&region, -6, a, b).unwrap().unwrap();
        let hits: Vec<_> = pairs.iter().filter(|p| p.contains(a, b)).collect();
        assert_eq!(hits, vec![&found]);
    }
}
