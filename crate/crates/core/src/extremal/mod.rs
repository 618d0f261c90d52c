//! The sharp-constant problem: the Strichartz ratio as an objective on the
//! L2 sphere, projected ascent, the Schrödinger baseline, the embedding of
//! Schrödinger into Airy at high frequency, and the dichotomy report.

mod ascent;
mod embedding;
mod fit;

pub use ascent::{maximize, AscentOptions, Classification, Iterate, MaximizerTrace, Stop};
pub use embedding::{
    dichotomy_report, embedding_experiment, embedding_field, gaussian_schrodinger_ratio, max_admissible_modulation,
    schrodinger_baseline, BaselineResult, DichotomyReport, EmbeddingRow, EmbeddingTable, Verdict, BOUND_TOLERANCE,
};
pub use fit::{gaussian_fit, GaussianFit};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::norms::{airy_l6, l2_norm, FlowOperator, PowerFunctional};
use crate::spectral::{Checked, Field};

/// Tolerance on the imaginary part for fields treated as real.
pub const REAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldMode {
    Complex,
    Real,
}

/// A ratio `|| A u ||_{L^6_{t,x}} / || u ||_2` to be maximized, with `A`
/// either `D^{1/6} e^{-t d^3}` or `e^{-i t d^2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub operator: FlowOperator,
    pub mode: FieldMode,
}

impl Problem {
    pub fn airy(mode: FieldMode) -> Self {
        Self {
            operator: FlowOperator::airy(1.0 / 6.0),
            mode,
        }
    }

    pub fn schrodinger(mode: FieldMode) -> Self {
        Self {
            operator: FlowOperator::schrodinger(0.0),
            mode,
        }
    }

    fn check(&self, u: &Field) -> Result<f64> {
        let norm = l2_norm(u);
        if norm == 0.0 {
            return Err(LabError::DegenerateInput("the ratio is undefined at the zero field".into()));
        }
        if self.mode == FieldMode::Real && !u.is_real(REAL_TOLERANCE) {
            return Err(LabError::InvalidInput(format!(
                "real mode needs a real field, imaginary fraction {:e}",
                u.imaginary_fraction()
            )));
        }
        Ok(norm)
    }

    pub fn ratio(&self, u: &Field) -> Result<Checked<f64>> {
        let norm = self.check(u)?;
        Ok(self.operator.mixed_norm(u, 6.0, 6.0)?.map(|v| v / norm))
    }

    /// `J(u) = || A u ||_6^6`.
    pub fn power(&self, u: &Field) -> Result<Checked<f64>> {
        self.check(u)?;
        self.operator.power(u, 6.0)
    }

    /// `J(u)` and its gradient; in real mode the gradient is restricted to
    /// real directions.
    pub fn power_with_gradient(&self, u: &Field) -> Result<Checked<PowerFunctional>> {
        self.check(u)?;
        let mut out = self.operator.power_with_gradient(u, 6.0)?;
        if self.mode == FieldMode::Real {
            out.value.gradient = out.value.gradient.real_part();
        }
        Ok(out)
    }
}

/// `|| D^{1/6} e^{-t d^3} u ||_{L^6_{t,x}} / || u ||_2`.
pub fn objective(u: &Field) -> Result<Checked<f64>> {
    let norm = l2_norm(u);
    if norm == 0.0 {
        return Err(LabError::DegenerateInput("the ratio is undefined at the zero field".into()));
    }
    Ok(airy_l6(u)?.map(|v| v / norm))
}

/// `6 A^*( |A u|^4 A u )` with `A = D^{1/6} e^{-t d^3}`, the gradient of
/// `J(u) = || A u ||_6^6`: `dJ(u)[v] = Re <gradient, v>`.
pub fn gradient(u: &Field) -> Result<Field> {
    Ok(Problem::airy(FieldMode::Complex).power_with_gradient(u)?.value.gradient)
}
