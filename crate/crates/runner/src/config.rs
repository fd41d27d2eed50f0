//! Versioned experiment configuration.

use std::path::{Path, PathBuf};

use dyadic_lab::compactness::KernelSpec;
use dyadic_lab::{Exponent, Grid, Lattice};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{RunError, RunResult};

pub const CONFIG_VERSION: u32 = 1;

/// Names accepted in `experiment.kind`.
pub const EXPERIMENT_KINDS: [&str; 10] =
    ["weights", "maximal", "sparse", "norm", "rescale", "rdf", "selfimprove", "lrplan", "probe-compactness", "acceptance"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub dim: u32,
    pub levels: u32,
}

impl GridParams {
    pub fn grid(&self) -> RunResult<Grid> {
        Grid::new(self.dim, self.levels).map_err(|e| RunError::field("grid", e.to_string()))
    }
}

impl Default for GridParams {
    fn default() -> Self {
        Self { dim: 1, levels: 8 }
    }
}

/// Where a weight comes from. Random kinds draw from the run's seeded sampler.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightSource {
    Ones,
    /// Cellwise `exp(N(0, σ))`.
    LogNormal { sigma: f64 },
    /// `|x - center|^alpha`.
    Power { alpha: f64, center: [f64; 2] },
    File { path: PathBuf },
}

/// Where a test function comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSource {
    /// Cellwise `N(0, 1)`.
    Signed,
    /// Cellwise `|N(0, 1)|`.
    Nonnegative,
    LogNormal { sigma: f64 },
    Constant { value: f64 },
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpaceConfig {
    /// `L^p_w` with constant exponent.
    Weighted {
        p: Exponent,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weight: Option<WeightSource>,
    },
    /// `L^{p(·)}_w` with a cellwise exponent field.
    Variable {
        p: FunctionSource,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weight: Option<WeightSource>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SymbolSource {
    Bump { center: [f64; 2], width: f64 },
    Jump,
    Log,
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    Weights {
        weight: WeightSource,
        p: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        s: Option<f64>,
    },
    Maximal {
        f: FunctionSource,
        /// When present, an operator norm lower bound on this space is added.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        space: Option<SpaceConfig>,
    },
    Sparse {
        f: FunctionSource,
        a: f64,
    },
    Norm {
        space: SpaceConfig,
        f: FunctionSource,
    },
    Rescale {
        space: SpaceConfig,
        r: Exponent,
        s: Exponent,
        /// Optional function whose norm is evaluated in the rescaled space.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        f: Option<FunctionSource>,
    },
    Rdf {
        f: FunctionSource,
        space: SpaceConfig,
        r: f64,
        depth: usize,
        /// Bound fed to the iteration; defaults to Buckley's bound when the
        /// space is weighted Lebesgue, else twice the empirical lower bound.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bound: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c_d: Option<f64>,
    },
    Selfimprove {
        bound: String,
        r_star: Exponent,
        c_d: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        s0: Option<Exponent>,
    },
    Lrplan {
        r: [Exponent; 2],
        s: [Exponent; 2],
        p1: Exponent,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<String>,
    },
    ProbeCompactness {
        kernel: KernelSpec,
        symbol: SymbolSource,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weight: Option<WeightSource>,
        depths: Vec<u32>,
        tails: Vec<usize>,
    },
    Acceptance,
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Weights { .. } => "weights",
            Experiment::Maximal { .. } => "maximal",
            Experiment::Sparse { .. } => "sparse",
            Experiment::Norm { .. } => "norm",
            Experiment::Rescale { .. } => "rescale",
            Experiment::Rdf { .. } => "rdf",
            Experiment::Selfimprove { .. } => "selfimprove",
            Experiment::Lrplan { .. } => "lrplan",
            Experiment::ProbeCompactness { .. } => "probe-compactness",
            Experiment::Acceptance => "acceptance",
        }
    }
}

/// Tolerances for the invariants checked after a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Absolute slack for pointwise inequalities.
    pub pointwise: f64,
    /// Relative slack for norm identities.
    pub relative: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { pointwise: 1e-12, relative: 1e-8 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub seed: u64,
    #[serde(default)]
    pub grid: GridParams,
    #[serde(default)]
    pub lattice: Lattice,
    pub experiment: Experiment,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputPaths,
}

impl ExperimentConfig {
    pub fn new(seed: u64, grid: GridParams, lattice: Lattice, experiment: Experiment) -> Self {
        Self { version: CONFIG_VERSION, seed, grid, lattice, experiment, tolerances: Tolerances::default(), output: OutputPaths::default() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Parses and validates; an unknown `experiment.kind` is reported by name.
    pub fn from_json(text: &str) -> RunResult<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| RunError::Parse(e.to_string()))?;
        if let Some(kind) = value.pointer("/experiment/kind").and_then(|k| k.as_str()) {
            if !EXPERIMENT_KINDS.contains(&kind) {
                return Err(RunError::UnknownExperiment(kind.to_string()));
            }
        }
        let config: Self = serde_json::from_value(value).map_err(|e| RunError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> RunResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::Io(path.display().to_string(), e.to_string()))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> RunResult<()> {
        if self.version != CONFIG_VERSION {
            return Err(RunError::field("version", format!("{} is not supported, expected {CONFIG_VERSION}", self.version)));
        }
        self.grid.grid()?;
        let t = &self.tolerances;
        if !(t.pointwise >= 0.0 && t.relative >= 0.0) {
            return Err(RunError::field("tolerances", "must be nonnegative"));
        }
        Ok(())
    }

    /// Hex SHA-256 of the compact JSON serialization.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}
