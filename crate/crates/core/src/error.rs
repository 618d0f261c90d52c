use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),
    #[error("inadmissible Strichartz exponents (alpha={alpha}, q={q}, r={r})")]
    Inadmissible { alpha: f64, q: f64, r: f64 },
    #[error("singular multiplier: |xi|^{alpha} applied to a field with DC fraction {dc_fraction:e}")]
    SingularMultiplier { alpha: f64, dc_fraction: f64 },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("modulation N={requested} aliases; largest admissible N is {max_admissible:.6}")]
    ModulationAliased { requested: f64, max_admissible: f64 },
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
