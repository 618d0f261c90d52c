//! Experiment configuration, read from TOML.
//!
//! A config holds a `[grid]` table, an optional top-level `seed`, an optional
//! `[input]` table naming the field to work on, and one table per subcommand.
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use airy_lab::extremal::FieldMode;
use airy_lab::refined::DEFAULT_P;
use airy_lab::separation::DEFAULT_TOLERANCE;
use airy_lab::spectral::{Evolution, GridSpec, SymmetryParams, DEFAULT_BAND_FRACTION};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub grid: GridConfig,
    #[serde(default)]
    pub input: InputConfig,
    #[serde(default)]
    pub propagate: PropagateConfig,
    #[serde(default)]
    pub norm: NormConfig,
    #[serde(default)]
    pub concentrate: ConcentrateConfig,
    #[serde(default)]
    pub whitney: WhitneyConfig,
    #[serde(default)]
    pub extract: ExtractConfig,
    #[serde(default)]
    pub separation: SeparationConfig,
    #[serde(default)]
    pub maximize: MaximizeConfig,
    #[serde(default)]
    pub embed: EmbedConfig,
    #[serde(default)]
    pub dichotomy: DichotomyConfig,
    #[serde(default)]
    pub synth: SynthConfig,
    /// Directory relative paths are resolved against; set from the config's location.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_points: usize,
    pub domain_length: f64,
    #[serde(default = "default_t_count")]
    pub t_count: usize,
    #[serde(default = "default_t_span")]
    pub t_span: f64,
    #[serde(default = "default_band_fraction")]
    pub band_fraction: f64,
}

fn default_t_count() -> usize {
    129
}

fn default_t_span() -> f64 {
    1.0
}

fn default_band_fraction() -> f64 {
    DEFAULT_BAND_FRACTION
}

impl GridConfig {
    pub fn spec(&self) -> airy_lab::Result<GridSpec> {
        GridSpec::new(self.n_points, self.domain_length, self.t_count, self.t_span, self.band_fraction)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketSpec {
    pub center: f64,
    pub width: f64,
    #[serde(default)]
    pub frequency: f64,
}

/// Where the working field comes from; at most one source may be given and
/// a unit Gaussian is used when none is.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub file: Option<PathBuf>,
    pub gaussian_width: Option<f64>,
    pub packets: Option<Vec<PacketSpec>>,
    /// Number of random packets drawn with the run's seed.
    pub random_packets: Option<usize>,
    /// Keep only the real part.
    #[serde(default)]
    pub real: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flow {
    Airy,
    Schrodinger,
}

impl Flow {
    pub fn evolution(self) -> Evolution {
        match self {
            Flow::Airy => Evolution::Airy,
            Flow::Schrodinger => Evolution::Schrodinger,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagateConfig {
    pub flow: Flow,
    pub time: f64,
}

impl Default for PropagateConfig {
    fn default() -> Self {
        Self {
            flow: Flow::Airy,
            time: 1.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormConfig {
    pub alpha: f64,
    pub q: f64,
    pub r: f64,
}

impl Default for NormConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0 / 6.0,
            q: 6.0,
            r: 6.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConcentrateConfig {
    pub p: f64,
}

impl Default for ConcentrateConfig {
    fn default() -> Self {
        Self { p: DEFAULT_P }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WhitneyConfig {
    pub scale: i32,
    pub index: i64,
    pub min_scale: i32,
    /// Random separated pairs checked for unique coverage.
    pub samples: usize,
}

impl Default for WhitneyConfig {
    fn default() -> Self {
        Self {
            scale: 0,
            index: 0,
            min_scale: -3,
            samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtractConfig {
    /// Absolute threshold; overrides `delta_fraction`.
    pub delta: Option<f64>,
    /// Threshold as a fraction of the input's Strichartz norm.
    pub delta_fraction: f64,
    pub p: f64,
    pub c_thresh: f64,
    pub max_pieces: usize,
    pub real: bool,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        let base = airy_lab::bubbles::ExtractionConfig::default();
        Self {
            delta: None,
            delta_fraction: 0.2,
            p: base.p,
            c_thresh: base.c_thresh,
            max_pieces: base.max_pieces,
            real: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeparationConfig {
    pub profiles: Vec<ProfileSpec>,
    /// Width of the Gaussian profile every parameter tuple is applied to.
    pub profile_width: f64,
    pub tolerance: f64,
    pub fold_mirrors: bool,
}

impl Default for SeparationConfig {
    fn default() -> Self {
        Self {
            profiles: Vec::new(),
            profile_width: 1.0,
            tolerance: DEFAULT_TOLERANCE,
            fold_mirrors: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaximizeConfig {
    pub flow: Flow,
    pub mode: FieldMode,
    pub max_iterations: usize,
    pub frequency_cap: Option<f64>,
}

impl Default for MaximizeConfig {
    fn default() -> Self {
        Self {
            flow: Flow::Airy,
            mode: FieldMode::Complex,
            max_iterations: 200,
            frequency_cap: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmbedConfig {
    pub n_list: Vec<f64>,
    pub mode: FieldMode,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        Self {
            n_list: vec![2.0, 4.0, 8.0],
            mode: FieldMode::Complex,
        }
    }
}

/// The ascent runs on `[grid]`, the baseline on a box of its own with the
/// same time window and band.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DichotomyConfig {
    pub mode: FieldMode,
    pub max_iterations: usize,
    pub frequency_cap: Option<f64>,
    pub baseline_n_points: Option<usize>,
    pub baseline_domain_length: Option<f64>,
}

impl Default for DichotomyConfig {
    fn default() -> Self {
        Self {
            mode: FieldMode::Complex,
            max_iterations: 200,
            frequency_cap: None,
            baseline_n_points: None,
            baseline_domain_length: None,
        }
    }
}

/// Symmetry parameters applied to a Gaussian profile, with an amplitude.
/// Omitted parameters take their identity values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileSpec {
    pub h: f64,
    pub xi: f64,
    pub x0: f64,
    pub t0: f64,
    pub theta: f64,
    pub amplitude: f64,
}

impl Default for ProfileSpec {
    fn default() -> Self {
        Self {
            h: 1.0,
            xi: 0.0,
            x0: 0.0,
            t0: 0.0,
            theta: 0.0,
            amplitude: 1.0,
        }
    }
}

impl ProfileSpec {
    pub fn params(&self) -> airy_lab::Result<SymmetryParams> {
        SymmetryParams::new(self.h, self.xi, self.x0, self.t0, self.theta)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub bubbles: Vec<ProfileSpec>,
    pub profile_width: f64,
    /// L2 norm of the added noise relative to the planted sum.
    pub noise_fraction: f64,
    /// Frequency cutoff of the noise; the usable band when unset.
    pub noise_cutoff: Option<f64>,
    /// Rescale the output to unit mass.
    pub normalize: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            bubbles: Vec::new(),
            profile_width: 1.0,
            noise_fraction: 0.0,
            noise_cutoff: None,
            normalize: true,
        }
    }
}

impl ExperimentConfig {
    /// Reads and validates a config file. An empty file or a file without
    /// any settings is a usage error.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let table: toml::Table = text.parse().map_err(|e| CliError::Usage(format!("malformed config: {e}")))?;
        if table.is_empty() {
            return Err(CliError::Usage("config is empty".into()));
        }
        let mut cfg: ExperimentConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Usage(format!("invalid config: {e}")))?;
        cfg.base_dir = base_dir.to_path_buf();
        let sources = [
            cfg.input.file.is_some(),
            cfg.input.gaussian_width.is_some(),
            cfg.input.packets.is_some(),
            cfg.input.random_packets.is_some(),
        ];
        if sources.iter().filter(|&&s| s).count() > 1 {
            return Err(CliError::Usage("[input] takes at most one field source".into()));
        }
        Ok(cfg)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }
}
