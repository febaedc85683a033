//! JSON run configuration.
//!
//! ```json
//! {
//!   "model": "flood-overflow",
//!   "inputs": [{ "name": "Q", "family": "truncated_gumbel", "mu": 1013, "beta": 558, "lo": 500, "hi": 3000 }],
//!   "n_sobol": 100000,
//!   "n_dgsm": 10000,
//!   "replicates": 20,
//!   "seed": 0,
//!   "sampler": "monte-carlo",
//!   "dgsm_sampler": "sobol-sequence",
//!   "gradient": { "method": "forward-fd", "relative_step": 1e-4, "absolute_floor": 1e-8 },
//!   "constant_policy": "prefer-sharp",
//!   "outputs": { "dir": "results", "formats": ["csv", "json"] }
//! }
//! ```
//!
//! `model` is a built-in name, an object `{"builtin": ..., ...}` with
//! parameters, or `{"command": ..., "workdir": ...}` for an external program.
//! Omitted truncation bounds are infinite.

use std::path::{Path, PathBuf};

use dgsm_core::analysis::AnalysisOptions;
use dgsm_core::models::{FloodCost, FloodOverflow, Interaction, Linear, Morris, DEFAULT_COEFF_SEED};
use dgsm_core::{ConstantPolicy, Generator, GradientMethod, InputSpace, Marginal, Model};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::external::ExternalModel;

pub const BUILTIN_MODELS: [&str; 5] = ["linear", "interaction", "morris", "flood-overflow", "flood-cost"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub inputs: Vec<InputSpec>,
    #[serde(default = "defaults::n")]
    pub n_sobol: usize,
    #[serde(default = "defaults::n")]
    pub n_dgsm: usize,
    #[serde(default = "defaults::replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sampler: Generator,
    #[serde(default = "defaults::dgsm_sampler")]
    pub dgsm_sampler: Generator,
    /// Digital shift of Sobol' pick-freeze designs; default: on when replicating.
    #[serde(default)]
    pub sobol_shift: Option<bool>,
    #[serde(default)]
    pub gradient: GradientMethod,
    #[serde(default)]
    pub constant_policy: ConstantPolicy,
    #[serde(default)]
    pub outputs: OutputSpec,
}

mod defaults {
    use dgsm_core::Generator;

    pub fn n() -> usize {
        10_000
    }

    pub fn replicates() -> usize {
        20
    }

    pub fn dgsm_sampler() -> Generator {
        Generator::SobolSequence
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSpec {
    Name(String),
    Builtin {
        builtin: String,
        #[serde(default)]
        coefficients: Option<Vec<f64>>,
        #[serde(default)]
        coeff_seed: Option<u64>,
        #[serde(default)]
        offset: Option<f64>,
    },
    External {
        command: String,
        #[serde(default)]
        workdir: Option<PathBuf>,
        #[serde(default)]
        name: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSpec {
    pub name: String,
    #[serde(flatten)]
    pub marginal: MarginalSpec,
}

/// A marginal law as written in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum MarginalSpec {
    Uniform { a: f64, b: f64 },
    Normal { mu: f64, sigma: f64 },
    TruncatedNormal { mu: f64, sigma: f64, lo: Option<f64>, hi: Option<f64> },
    Exponential { lambda: f64 },
    Beta { alpha: f64, beta: f64 },
    Gamma { alpha: f64, beta: f64 },
    Gumbel { mu: f64, beta: f64 },
    TruncatedGumbel { mu: f64, beta: f64, lo: Option<f64>, hi: Option<f64> },
    Weibull { k: f64, lambda: f64 },
    Triangular { a: f64, c: f64, b: f64 },
}

impl MarginalSpec {
    pub fn to_marginal(self) -> Result<Marginal> {
        let lo = |v: Option<f64>| v.unwrap_or(f64::NEG_INFINITY);
        let hi = |v: Option<f64>| v.unwrap_or(f64::INFINITY);
        let m = match self {
            MarginalSpec::Uniform { a, b } => Marginal::Uniform { a, b },
            MarginalSpec::Normal { mu, sigma } => Marginal::Normal { mu, sigma },
            MarginalSpec::TruncatedNormal { mu, sigma, lo: l, hi: h } => {
                Marginal::TruncatedNormal { mu, sigma, lo: lo(l), hi: hi(h) }
            }
            MarginalSpec::Exponential { lambda } => Marginal::Exponential { lambda },
            MarginalSpec::Beta { alpha, beta } => Marginal::Beta { alpha, beta },
            MarginalSpec::Gamma { alpha, beta } => Marginal::Gamma { alpha, beta },
            MarginalSpec::Gumbel { mu, beta } => Marginal::Gumbel { mu, beta },
            MarginalSpec::TruncatedGumbel { mu, beta, lo: l, hi: h } => {
                Marginal::TruncatedGumbel { mu, beta, lo: lo(l), hi: hi(h) }
            }
            MarginalSpec::Weibull { k, lambda } => Marginal::Weibull { k, lambda },
            MarginalSpec::Triangular { a, c, b } => Marginal::Triangular { a, c, b },
        };
        Ok(m.validated()?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory for `report.csv` / `report.json`; standard output if absent.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub formats: Vec<Format>,
}

pub type DynModel = Box<dyn Model + Send + Sync>;

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| LabError::Read { path: path.to_owned(), source })?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|source| LabError::Parse { path: path.to_owned(), source })?;
        // relative paths are taken relative to the configuration file
        let base = path.parent().unwrap_or(Path::new("."));
        if let ModelSpec::External { workdir, .. } = &mut cfg.model {
            let dir = workdir.take().unwrap_or_default();
            *workdir = Some(if dir.is_absolute() { dir } else { base.join(dir) });
        }
        if let Some(dir) = &mut cfg.outputs.dir {
            if dir.is_relative() {
                *dir = base.join(&*dir);
            }
        }
        Ok(cfg)
    }

    pub fn input_space(&self) -> Result<InputSpace> {
        let inputs = self
            .inputs
            .iter()
            .map(|i| {
                i.marginal
                    .to_marginal()
                    .map(|m| (i.name.clone(), m))
                    .map_err(|e| LabError::Config(format!("input {}: {e}", i.name)))
            })
            .collect::<Result<Vec<_>>>()?;
        if inputs.is_empty() {
            return Err(LabError::Config("no inputs configured".into()));
        }
        Ok(InputSpace::new(inputs)?)
    }

    pub fn build_model(&self) -> Result<DynModel> {
        let d = self.inputs.len();
        let model: DynModel = match &self.model {
            ModelSpec::Name(name) => builtin(name, None, None, None, d)?,
            ModelSpec::Builtin { builtin: name, coefficients, coeff_seed, offset } => {
                builtin(name, coefficients.clone(), *coeff_seed, *offset, d)?
            }
            ModelSpec::External { command, workdir, name } => {
                let workdir = workdir.clone().unwrap_or_else(|| PathBuf::from("."));
                let mut m = ExternalModel::new(command, workdir, d);
                if let Some(n) = name {
                    m = m.with_name(n);
                }
                Box::new(m)
            }
        };
        if model.dimension() != d {
            return Err(LabError::Config(format!(
                "model {} takes {} inputs but {d} are configured",
                model.name(),
                model.dimension()
            )));
        }
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sobol < 2 {
            return Err(LabError::Config(format!("n_sobol must be at least 2, got {}", self.n_sobol)));
        }
        if self.n_dgsm < 1 || self.replicates < 1 {
            return Err(LabError::Config("n_dgsm and replicates must be at least 1".into()));
        }
        Ok(())
    }

    pub fn analysis_options(&self) -> AnalysisOptions {
        AnalysisOptions {
            n_sobol: self.n_sobol,
            n_dgsm: self.n_dgsm,
            replicates: self.replicates,
            seed: self.seed,
            sampler: self.sampler,
            dgsm_sampler: self.dgsm_sampler,
            gradient: self.gradient,
            policy: self.constant_policy,
            sobol_shift: self.sobol_shift,
            ..AnalysisOptions::default()
        }
    }
}

fn builtin(
    name: &str,
    coefficients: Option<Vec<f64>>,
    coeff_seed: Option<u64>,
    offset: Option<f64>,
    d: usize,
) -> Result<DynModel> {
    Ok(match name {
        "linear" => Box::new(Linear::new(coefficients.unwrap_or_else(|| vec![1.0; d]))),
        "interaction" => Box::new(Interaction),
        "morris" => {
            let seed = coeff_seed.unwrap_or(DEFAULT_COEFF_SEED);
            Box::new(match offset {
                Some(o) => Morris::with_offset(seed, o),
                None => Morris::new(seed),
            })
        }
        "flood-overflow" => Box::new(FloodOverflow),
        "flood-cost" => Box::new(FloodCost),
        other => {
            return Err(LabError::Config(format!(
                "unknown model {other:?}; built-in models: {}",
                BUILTIN_MODELS.join(", ")
            )))
        }
    })
}
