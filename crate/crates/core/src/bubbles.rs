//! Greedy profile extraction: repeatedly carve the most concentrated
//! frequency interval out of the residual until its Strichartz norm drops
//! below `delta`, then regroup pieces whose scales and frequencies are not
//! separated.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::norms::airy_l6;
use crate::refined::{best_cell_interval, IntervalValue, DEFAULT_P};
use crate::spectral::{density_scale, forward_fourier, Field, GridSpec, SpectralField, SymmetryParams, Warning};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractionConfig {
    /// Stop once the residual's `L^6` Strichartz norm is at most this.
    pub delta: f64,
    /// Exponent of the concentration functional.
    pub p: f64,
    /// Cells with `|u^| > c_thresh delta^{-6} rho^{-1/2}` are left in the residual.
    pub c_thresh: f64,
    pub max_pieces: usize,
    /// Pieces `j < k` belong together when
    /// `rho_j/rho_k + rho_k/rho_j <= scale_ratio_max` and
    /// `|xi_j - xi_k| / rho_j <= freq_offset_max`.
    pub scale_ratio_max: f64,
    pub freq_offset_max: f64,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            delta: 0.05,
            p: DEFAULT_P,
            c_thresh: 4.0,
            max_pieces: 64,
            scale_ratio_max: 10.0,
            freq_offset_max: 4.0,
        }
    }
}

impl ExtractionConfig {
    pub fn with_delta(delta: f64) -> Self {
        Self {
            delta,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(LabError::InvalidConfig(what));
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return bad(format!("p must exceed 1, got {}", self.p));
        }
        if !(self.c_thresh > 0.0) {
            return bad(format!("c_thresh must be positive, got {}", self.c_thresh));
        }
        if self.max_pieces == 0 {
            return bad("max_pieces must be at least 1".into());
        }
        if !(self.scale_ratio_max > 0.0 && self.freq_offset_max >= 0.0) {
            return bad("grouping thresholds must be positive".into());
        }
        Ok(())
    }

    /// `c_thresh delta^{-6}`.
    pub fn c_delta(&self) -> f64 {
        self.c_thresh * self.delta.powi(-6)
    }
}

/// One carved piece.
#[derive(Debug, Clone, PartialEq)]
pub struct Bubble {
    /// `h = 1 / rho`, `xi` = centre of the carving interval; the space and
    /// time parameters are not extracted and stay zero.
    pub params: SymmetryParams,
    pub rho: f64,
    /// Carving interval (for real extraction, its positive-frequency copy)
    /// with the concentration value of the residual on it.
    pub support: IntervalValue,
    /// Unitary coefficients of the physical piece. For real extraction this
    /// holds both `tau` and `-tau` and is exactly conjugate symmetric.
    pub spectrum: SpectralField,
    /// `v` for complex extraction, `f^+` for real extraction.
    pub profile: Field,
    pub mass: f64,
    pub cells: usize,
    pub real: bool,
}

impl Bubble {
    /// The piece in physical space: `v`, or `2 Re f^+`.
    pub fn physical(&self) -> Field {
        if self.real {
            self.profile.real_part().scaled_real(2.0)
        } else {
            self.profile.clone()
        }
    }

    /// `max_xi sqrt(rho) |v^(rho xi + xi0)|`; bounded by `c_thresh delta^{-6}`.
    pub fn renormalized_peak(&self) -> f64 {
        let s = density_scale(self.spectrum.grid());
        let peak = self.spectrum.coefficients().iter().map(|c| c.norm()).fold(0.0, f64::max);
        self.rho.sqrt() * peak * s
    }

    /// Slots carrying nonzero coefficients.
    pub fn support_slots(&self) -> Vec<usize> {
        self.spectrum
            .coefficients()
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != Complex64::default())
            .map(|(j, _)| j)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Residual norm at most `delta`.
    Converged,
    /// `max_pieces` reached first.
    Budget,
    /// The winning interval had nothing left to carve.
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionReport {
    pub pieces: Vec<Bubble>,
    pub remainder: Field,
    /// `| ||u||^2 - (sum ||piece||^2 + ||remainder||^2) |`.
    pub parseval_defect: f64,
    pub strichartz_of_remainder: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub warnings: Vec<Warning>,
}

#[derive(Serialize)]
struct PieceRecord {
    record: &'static str,
    index: usize,
    rho: f64,
    xi0: f64,
    support_lo: f64,
    support_hi: f64,
    concentration: f64,
    l2_mass: f64,
    cells: usize,
}

#[derive(Serialize)]
struct RemainderRecord {
    record: &'static str,
    l2_mass: f64,
    strichartz: f64,
    parseval_defect: f64,
    iterations: usize,
    termination: Termination,
    pieces: usize,
}

impl ExtractionReport {
    /// Reconstruction `sum pieces + remainder`.
    pub fn reconstruction(&self) -> Result<Field> {
        self.pieces
            .iter()
            .try_fold(self.remainder.clone(), |acc, b| acc.try_add(&b.physical()))
    }

    /// One JSON object per piece followed by one for the remainder.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (i, b) in self.pieces.iter().enumerate() {
            let rec = PieceRecord {
                record: "piece",
                index: i,
                rho: b.rho,
                xi0: b.params.xi,
                support_lo: b.support.lo,
                support_hi: b.support.hi,
                concentration: b.support.value,
                l2_mass: b.mass,
                cells: b.cells,
            };
            out.push_str(&serde_json::to_string(&rec).expect("plain record"));
            out.push('\n');
        }
        let rec = RemainderRecord {
            record: "remainder",
            l2_mass: self.remainder.mass(),
            strichartz: self.strichartz_of_remainder,
            parseval_defect: self.parseval_defect,
            iterations: self.iterations,
            termination: self.termination,
            pieces: self.pieces.len(),
        };
        out.push_str(&serde_json::to_string(&rec).expect("plain record"));
        out.push('\n');
        out
    }
}

struct Carver<'a> {
    cfg: &'a ExtractionConfig,
    grid: GridSpec,
    residual: Vec<Complex64>,
    carved: Vec<bool>,
    warnings: Vec<Warning>,
}

impl Carver<'_> {
    fn residual_field(&self, real: bool) -> Field {
        let f = SpectralField::from_parts_unchecked(self.grid, self.residual.clone()).to_field();
        if real {
            f.real_part()
        } else {
            f
        }
    }

    fn residual_norm(&mut self, real: bool) -> Result<f64> {
        let s = airy_l6(&self.residual_field(real))?;
        for w in s.warnings {
            if !self.warnings.contains(&w) {
                self.warnings.push(w);
            }
        }
        Ok(s.value)
    }

    fn threshold(&self, rho: f64) -> f64 {
        self.cfg.c_delta() * rho.powf(-0.5)
    }
}

fn run<F>(u: &Field, cfg: &ExtractionConfig, real: bool, mut step: F) -> Result<ExtractionReport>
where
    F: FnMut(&mut Carver) -> Result<Option<Bubble>>,
{
    cfg.validate()?;
    let total = u.mass();
    if total > 1.0 + 1e-9 {
        return Err(LabError::InvalidInput(format!(
            "extraction expects ||u||^2 <= 1, got {total}; normalize first"
        )));
    }
    let grid = *u.grid();
    let mut carver = Carver {
        cfg,
        grid,
        residual: forward_fourier(u).into_coefficients(),
        carved: vec![false; grid.n_points()],
        warnings: Vec::new(),
    };
    let mut pieces = Vec::new();
    let mut iterations = 0;
    let (termination, norm) = loop {
        let norm = carver.residual_norm(real)?;
        if norm <= cfg.delta {
            break (Termination::Converged, norm);
        }
        if pieces.len() >= cfg.max_pieces {
            break (Termination::Budget, norm);
        }
        iterations += 1;
        match step(&mut carver)? {
            Some(b) => pieces.push(b),
            None => break (Termination::Stalled, norm),
        }
    };
    let remainder = carver.residual_field(real);
    let parseval_defect = (total - pieces.iter().map(|b: &Bubble| b.mass).sum::<f64>() - remainder.mass()).abs();
    Ok(ExtractionReport {
        pieces,
        remainder,
        parseval_defect,
        strichartz_of_remainder: norm,
        iterations,
        termination,
        warnings: carver.warnings,
    })
}

fn sorted_magnitudes(grid: &GridSpec, coef: &[Complex64]) -> Vec<f64> {
    let s = density_scale(grid);
    (0..grid.n_points()).map(|i| coef[grid.sorted_slot(i)].norm() * s).collect()
}

/// Complex extraction of frequency scales and centres.
pub fn extract_bubbles(u: &Field, cfg: &ExtractionConfig) -> Result<ExtractionReport> {
    run(u, cfg, false, |c| {
        let grid = c.grid;
        let dk = grid.dk();
        let mags = sorted_magnitudes(&grid, &c.residual);
        let win = best_cell_interval(&mags, dk, cfg.p)?;
        let k = |i: usize| (grid.min_mode() + i as i64) as f64 * dk;
        let support = IntervalValue {
            lo: k(win.first) - 0.5 * dk,
            hi: k(win.last) + 0.5 * dk,
            value: win.value,
        };
        let rho = support.radius();
        let thr = c.threshold(rho);
        let mut piece = vec![Complex64::default(); grid.n_points()];
        let mut cells = 0;
        for i in win.first..=win.last {
            let slot = grid.sorted_slot(i);
            if !c.carved[slot] && mags[i] <= thr && c.residual[slot] != Complex64::default() {
                piece[slot] = c.residual[slot];
                c.residual[slot] = Complex64::default();
                c.carved[slot] = true;
                cells += 1;
            }
        }
        if cells == 0 {
            return Ok(None);
        }
        Ok(Some(make_bubble(grid, piece, support, rho, support.center(), cells, false)))
    })
}

/// Real extraction: carving intervals live in `[0, inf)`, each is applied
/// together with its mirror image, and a winner touching the zero cell
/// becomes a symmetric low band centred at 0.
pub fn extract_bubbles_real(u: &Field, cfg: &ExtractionConfig) -> Result<ExtractionReport> {
    let total = u.mass();
    let imag: f64 = u.samples().iter().map(|z| z.im * z.im).sum::<f64>() * u.grid().dx();
    if imag > 1e-12 * total.max(f64::MIN_POSITIVE) && imag > 0.0 {
        return Err(LabError::InvalidInput(format!(
            "real extraction needs a real field; imaginary mass fraction {:.3e}",
            imag / total
        )));
    }
    let u = u.real_part();
    run(&u, cfg, true, |c| {
        let grid = c.grid;
        let n = grid.n_points();
        let dk = grid.dk();
        // modes 0 ..= top; the Nyquist mode of even grids is never carved
        let top = ((n - 1) / 2) as i64;
        let s = density_scale(&grid);
        let mags: Vec<f64> = (0..=top).map(|m| c.residual[grid.slot_of_mode(m)].norm() * s).collect();
        let win = best_cell_interval(&mags, dk, cfg.p)?;
        let (first, last) = (win.first as i64, win.last as i64);
        let (support, center, rho) = if first == 0 {
            let hi = (last as f64 + 0.5) * dk;
            (
                IntervalValue {
                    lo: -0.5 * dk,
                    hi,
                    value: win.value,
                },
                0.0,
                hi,
            )
        } else {
            let iv = IntervalValue {
                lo: (first as f64 - 0.5) * dk,
                hi: (last as f64 + 0.5) * dk,
                value: win.value,
            };
            (iv, iv.center(), iv.radius())
        };
        let thr = c.threshold(rho);
        let mut piece = vec![Complex64::default(); n];
        let mut cells = 0;
        for m in first..=last {
            let slot = grid.slot_of_mode(m);
            if c.carved[slot] || mags[m as usize] > thr || c.residual[slot] == Complex64::default() {
                continue;
            }
            let mirror = grid.slot_of_mode(-m);
            if m == 0 {
                piece[slot] = Complex64::new(c.residual[slot].re, 0.0);
            } else {
                piece[slot] = c.residual[slot];
                piece[mirror] = c.residual[slot].conj();
            }
            c.residual[slot] = Complex64::default();
            c.residual[mirror] = Complex64::default();
            c.carved[slot] = true;
            c.carved[mirror] = true;
            cells += 1;
        }
        if cells == 0 {
            return Ok(None);
        }
        Ok(Some(make_bubble(grid, piece, support, rho, center, cells, true)))
    })
}

fn make_bubble(
    grid: GridSpec,
    piece: Vec<Complex64>,
    support: IntervalValue,
    rho: f64,
    center: f64,
    cells: usize,
    real: bool,
) -> Bubble {
    let spectrum = SpectralField::from_parts_unchecked(grid, piece);
    let mass = spectrum.energy() * grid.dx();
    let profile = if real {
        // f^+: positive modes, half of the zero mode
        let half: Vec<Complex64> = spectrum
            .coefficients()
            .iter()
            .enumerate()
            .map(|(j, c)| match grid.mode_number(j) {
                0 => c * 0.5,
                m if m > 0 => *c,
                _ => Complex64::default(),
            })
            .collect();
        SpectralField::from_parts_unchecked(grid, half).to_field()
    } else {
        spectrum.to_field()
    };
    Bubble {
        params: SymmetryParams {
            h: 1.0 / rho,
            xi: center,
            ..SymmetryParams::identity()
        },
        rho,
        support,
        spectrum,
        profile,
        mass,
        cells,
        real,
    }
}

/// Index groups of mutually non-orthogonal pieces, in first-appearance order.
pub fn group_indices(pieces: &[Bubble], cfg: &ExtractionConfig) -> Vec<Vec<usize>> {
    let n = pieces.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for j in 0..n {
        for k in j + 1..n {
            let (a, b) = (&pieces[j], &pieces[k]);
            let scale = a.rho / b.rho + b.rho / a.rho;
            let offset = (a.params.xi - b.params.xi).abs() / a.rho;
            if scale <= cfg.scale_ratio_max && offset <= cfg.freq_offset_max {
                let (rj, rk) = (find(&mut parent, j), find(&mut parent, k));
                if rj != rk {
                    parent[rj.max(rk)] = rj.min(rk);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot_of_root = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot_of_root[r] == usize::MAX {
            slot_of_root[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot_of_root[r]].push(i);
    }
    groups
}

pub fn group_by_scale_orthogonality(pieces: &[Bubble], cfg: &ExtractionConfig) -> Vec<Vec<Bubble>> {
    group_indices(pieces, cfg)
        .into_iter()
        .map(|g| g.into_iter().map(|i| pieces[i].clone()).collect())
        .collect()
}

/// Fraction of the spectral mass of `target` lying on the cells carved by
/// `pieces`.
pub fn captured_fraction(target: &Field, pieces: &[&Bubble]) -> f64 {
    let s = forward_fourier(target);
    let total = s.energy();
    if total == 0.0 {
        return 0.0;
    }
    let mut mask = vec![false; s.coefficients().len()];
    for b in pieces {
        for j in b.support_slots() {
            mask[j] = true;
        }
    }
    s.coefficients()
        .iter()
        .zip(&mask)
        .filter(|(_, m)| **m)
        .map(|(c, _)| c.norm_sqr())
        .sum::<f64>()
        / total
}
