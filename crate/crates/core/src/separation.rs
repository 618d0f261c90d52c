//! Orthogonality scores for symmetry parameters and numerical decoupling
//! diagnostics for the corresponding profiles.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::norms::{inner_product, FlowOperator};
use crate::spectral::{apply_symmetry, propagate, Checked, Evolution, Field, SymmetryParams, Warning};

/// Relative tolerance below which two `(h, xi)` pairs count as equal.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Different scale or frequency: `h_a/h_b + h_b/h_a + h_a |xi_a - xi_b|`.
    ScaleFreq,
    /// Shared `(h, xi)`: `|dt|/h^3 + 3|dt xi|/h^2 + |x_a - x_b + 3(t_a - t_b) xi^2|/h`.
    SpaceTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationScore {
    pub branch: Branch,
    pub value: f64,
}

/// A profile `phi` placed by the symmetry `params`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub params: SymmetryParams,
    pub field: Field,
}

impl Profile {
    pub fn new(params: SymmetryParams, field: Field) -> Self {
        Self { params, field }
    }

    /// `apply_symmetry(field, params)`.
    pub fn realize(&self) -> Result<Checked<Field>> {
        apply_symmetry(&self.field, &self.params)
    }
}

pub fn separation_score(a: &SymmetryParams, b: &SymmetryParams, tol: f64) -> Result<SeparationScore> {
    a.validate()?;
    b.validate()?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(LabError::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    let dxi = (a.xi - b.xi).abs();
    if (a.h - b.h).abs() / a.h > tol || a.h * dxi > tol {
        return Ok(SeparationScore {
            branch: Branch::ScaleFreq,
            value: a.h / b.h + b.h / a.h + a.h * dxi,
        });
    }
    let (h, xi) = (a.h, a.xi);
    let dt = b.t0 - a.t0;
    let value = dt.abs() / h.powi(3)
        + 3.0 * (dt * xi).abs() / (h * h)
        + (a.x0 - b.x0 + 3.0 * (a.t0 - b.t0) * xi * xi).abs() / h;
    Ok(SeparationScore {
        branch: Branch::SpaceTime,
        value,
    })
}

/// Score for real profiles, where `b` also stands for its mirror image at
/// `-xi_b`. An image sharing `(h, xi)` with `a` decides the branch; within a
/// branch the smaller score wins.
pub fn separation_score_real(a: &SymmetryParams, b: &SymmetryParams, tol: f64) -> Result<SeparationScore> {
    let direct = separation_score(a, b, tol)?;
    let mirror = separation_score(a, &SymmetryParams { xi: -b.xi, ..*b }, tol)?;
    let pick_mirror = match (direct.branch, mirror.branch) {
        (Branch::ScaleFreq, Branch::SpaceTime) => true,
        (Branch::SpaceTime, Branch::ScaleFreq) => false,
        _ => mirror.value < direct.value,
    };
    Ok(if pick_mirror { mirror } else { direct })
}

/// `<apply_symmetry(phi_a, a), apply_symmetry(phi_b, b)>` on the grid.
pub fn profile_inner_product(a: &Profile, b: &Profile) -> Result<Checked<Complex64>> {
    let fa = a.realize()?;
    let fb = b.realize()?;
    let value = inner_product(&fa.value, &fb.value)?;
    let mut warnings = fa.warnings;
    warnings.extend(fb.warnings);
    Ok(Checked { value, warnings })
}

/// `| J(sum_j u_j) - sum_j J(u_j) |` with `J(u) = || D^{1/6} e^{-t d^3} u ||_6^6`
/// and `u_j` the realized profiles. Because each `u_j` carries its own time
/// shift, `e^{-t d^3} u_j` is the profile evolved by `t - t_j`.
pub fn l6_additivity_defect(profiles: &[Profile]) -> Result<Checked<f64>> {
    if profiles.len() < 2 {
        return Err(LabError::InvalidInput("the additivity defect needs at least two profiles".into()));
    }
    let op = FlowOperator::airy(1.0 / 6.0);
    let mut warnings = Vec::new();
    let mut separate = 0.0;
    let mut sum: Option<Field> = None;
    for p in profiles {
        let u = p.realize()?;
        warnings.extend(u.warnings);
        let j = op.power(&u.value, 6.0)?;
        warnings.extend(j.warnings);
        separate += j.value;
        sum = Some(match sum {
            None => u.value,
            Some(s) => s.try_add(&u.value)?,
        });
    }
    let joint = op.power(sum.as_ref().expect("at least two profiles"), 6.0)?;
    warnings.extend(joint.warnings);
    dedup(&mut warnings);
    Ok(Checked {
        value: (joint.value - separate).abs(),
        warnings,
    })
}

fn dedup(warnings: &mut Vec<Warning>) {
    let mut seen: Vec<Warning> = Vec::new();
    warnings.retain(|w| {
        if seen.contains(w) {
            false
        } else {
            seen.push(w.clone());
            true
        }
    });
}

/// Mean and variance of `|u|^2 dx`.
pub(crate) fn position_moments(u: &Field) -> (f64, f64) {
    let xs = u.grid().positions();
    let w: Vec<f64> = u.samples().iter().map(|z| z.norm_sqr()).collect();
    let total: f64 = w.iter().sum();
    let mean = xs.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / total;
    let var = xs.iter().zip(&w).map(|(x, w)| (x - mean).powi(2) * w).sum::<f64>() / total;
    (mean, var)
}

/// Time `t` at which `propagate(u, t, evolution)` is narrowest.
///
/// Under a flow whose phase depends on `k` only, positions move as
/// `x + t P'(k)`, so the position variance is an exact quadratic in `t` and
/// three evaluations fix it. Periodic wrap-around is ignored.
pub fn focus_time(u: &Field, evolution: Evolution) -> Result<f64> {
    if u.mass() == 0.0 {
        return Err(LabError::DegenerateInput("the zero field has no focus".into()));
    }
    let s = u.to_spectral();
    let grid = *s.grid();
    let total = s.energy();
    let speed = |k: f64| match evolution {
        Evolution::Airy => 3.0 * k * k,
        Evolution::Schrodinger => 2.0 * k,
    };
    let mean_v = s.coefficients().iter().enumerate().map(|(j, c)| speed(grid.frequency(j)) * c.norm_sqr()).sum::<f64>() / total;
    let var_v = s
        .coefficients()
        .iter()
        .enumerate()
        .map(|(j, c)| (speed(grid.frequency(j)) - mean_v).powi(2) * c.norm_sqr())
        .sum::<f64>()
        / total;
    let (_, v0) = position_moments(u);
    if var_v == 0.0 {
        return Ok(0.0);
    }
    let tau = 0.5 * (v0 / var_v).sqrt();
    let (_, vp) = position_moments(&propagate(u, tau, evolution)?.value);
    let (_, vm) = position_moments(&propagate(u, -tau, evolution)?.value);
    let a = (vp + vm - 2.0 * v0) / (2.0 * tau * tau);
    let b = (vp - vm) / (2.0 * tau);
    Ok(if a > 0.0 { -b / (2.0 * a) } else { 0.0 })
}

/// Position and time estimates for one extracted piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PieceLocation {
    /// Airy time shift `t0` such that the piece is narrowest after undoing it.
    pub t0: f64,
    /// Centroid of `|piece|^2` at that time.
    pub x0: f64,
    /// Spectral centroid.
    pub xi: f64,
}

/// Finite-data stand-in for the space and time parameters of a piece: the
/// Airy focus time and the centroid there.
pub fn locate_piece(piece: &Field) -> Result<PieceLocation> {
    let t0 = focus_time(piece, Evolution::Airy)?;
    let focused = propagate(piece, t0, Evolution::Airy)?.value;
    let (x0, _) = position_moments(&focused);
    Ok(PieceLocation {
        t0,
        x0,
        xi: piece.to_spectral().centroid(),
    })
}

/// One line of the pairwise table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub first: usize,
    pub second: usize,
    pub branch: Branch,
    pub score: f64,
    pub inner_product: f64,
    pub l6_defect: f64,
}

/// Scores, overlaps and pairwise defects for every pair of profiles. With
/// `fold_mirrors` the score treats each profile as standing for its mirror
/// image too, as appropriate for real data.
pub fn pairwise_table(profiles: &[Profile], tol: f64, fold_mirrors: bool) -> Result<Checked<Vec<PairRecord>>> {
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for i in 0..profiles.len() {
        for j in i + 1..profiles.len() {
            let (a, b) = (&profiles[i], &profiles[j]);
            let score = if fold_mirrors {
                separation_score_real(&a.params, &b.params, tol)?
            } else {
                separation_score(&a.params, &b.params, tol)?
            };
            let ip = profile_inner_product(a, b)?;
            let defect = l6_additivity_defect(&[a.clone(), b.clone()])?;
            warnings.extend(ip.warnings);
            warnings.extend(defect.warnings);
            rows.push(PairRecord {
                first: i,
                second: j,
                branch: score.branch,
                score: score.value,
                inner_product: ip.value.norm(),
                l6_defect: defect.value,
            });
        }
    }
    dedup(&mut warnings);
    Ok(Checked { value: rows, warnings })
}

/// CSV with header `pair,branch,score,inner_product,l6_defect`.
pub fn to_csv(rows: &[PairRecord]) -> String {
    let mut out = String::from("pair,branch,score,inner_product,l6_defect\n");
    for r in rows {
        let branch = match r.branch {
            Branch::ScaleFreq => "scale_freq",
            Branch::SpaceTime => "space_time",
        };
        let _ = writeln!(
            out,
            "{}-{},{},{:.12e},{:.12e},{:.12e}",
            r.first, r.second, branch, r.score, r.inner_product, r.l6_defect
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;
    use crate::synth::normalized_gaussian;

    fn params(h: f64, xi: f64, x0: f64, t0: f64) -> SymmetryParams {
        SymmetryParams::new(h, xi, x0, t0, 0.0).unwrap()
    }

    #[test]
    fn score_examples() {
        let id = SymmetryParams::identity();
        let s = separation_score(&id, &id, DEFAULT_TOLERANCE).unwrap();
        assert_eq!((s.branch, s.value), (Branch::SpaceTime, 0.0));

        let s = separation_score(&params(1.0, 0.0, 0.0, 0.0), &params(4.0, 0.0, 0.0, 0.0), 1e-9).unwrap();
        assert_eq!(s.branch, Branch::ScaleFreq);
        assert!((s.value - 4.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_scale_and_tolerance() {
        let bad = SymmetryParams {
            h: 0.0,
            ..SymmetryParams::identity()
        };
        let id = SymmetryParams::identity();
        assert!(matches!(separation_score(&bad, &id, 1e-9), Err(LabError::InvalidParameter(_))));
        assert!(matches!(separation_score(&id, &id, 0.0), Err(LabError::InvalidParameter(_))));
    }

    #[test]
    fn mirror_folding_picks_the_closer_image() {
        let a = params(1.0, 5.0, 0.0, 0.0);
        let b = params(1.0, -5.0, 0.0, 0.0);
        assert_eq!(separation_score(&a, &b, 1e-9).unwrap().branch, Branch::ScaleFreq);
        let s = separation_score_real(&a, &b, 1e-9).unwrap();
        assert_eq!((s.branch, s.value), (Branch::SpaceTime, 0.0));
    }

    #[test]
    fn overlap_of_a_profile_with_itself() {
        let g = GridSpec::new(512, 64.0, 33, 1.0, 0.5).unwrap();
        let p = Profile::new(params(1.5, 1.0, 2.0, 0.1), normalized_gaussian(g, 1.0).unwrap());
        let ip = profile_inner_product(&p, &p).unwrap();
        assert!((ip.value - 1.0).norm() < 1e-10);
    }

    #[test]
    fn duplicated_profile_is_fully_coherent() {
        let g = GridSpec::new(256, 48.0, 33, 0.5, 0.5).unwrap();
        let p = Profile::new(SymmetryParams::identity(), normalized_gaussian(g, 1.0).unwrap());
        let single = FlowOperator::airy(1.0 / 6.0).power(&p.field, 6.0).unwrap().value;
        let d = l6_additivity_defect(&[p.clone(), p]).unwrap().value;
        assert!((d - 62.0 * single).abs() < 1e-10 * d);
    }

    #[test]
    fn locates_a_placed_packet() {
        let g = GridSpec::new(4096, 512.0, 3, 1.0, 0.5).unwrap();
        let phi = normalized_gaussian(g, 1.0).unwrap();
        let placed = apply_symmetry(&phi, &params(2.0, 1.5, 30.0, 4.0)).unwrap().value;
        let loc = locate_piece(&placed).unwrap();
        assert!((loc.t0 - 4.0).abs() < 1e-4, "{loc:?}");
        assert!((loc.x0 - 30.0).abs() < 1e-3, "{loc:?}");
        assert!((loc.xi - 1.5).abs() < 1e-9, "{loc:?}");
    }

    #[test]
    fn csv_layout() {
        let rows = vec![PairRecord {
            first: 0,
            second: 2,
            branch: Branch::ScaleFreq,
            score: 4.25,
            inner_product: 0.5,
            l6_defect: 0.0,
        }];
        let csv = to_csv(&rows);
        let line = csv.lines().nth(1).unwrap();
        assert!(line.starts_with("0-2,scale_freq,4.25"));
    }
}
