//! Scenario configuration: one TOML file per scenario, typed keys, a
//! model-specific `[params]` table.

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use bubblelab_core::olg::UtilitySpec;
use bubblelab_core::paths::PathSpec;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    /// Output basename; defaults to the config file stem.
    pub name: Option<String>,
    pub model: ModelTag,
    pub horizon: usize,
    #[serde(default)]
    pub solver: SolverOptions,
    pub params: toml::Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelTag {
    Textbook,
    TwoSector,
    Ces,
    Wilson,
    Crra,
    OlgGeneric,
    Diamond,
    BewleyInvest,
    BewleyPref,
}

impl ModelTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Textbook => "textbook",
            Self::TwoSector => "two_sector",
            Self::Ces => "ces",
            Self::Wilson => "wilson",
            Self::Crra => "crra",
            Self::OlgGeneric => "olg_generic",
            Self::Diamond => "diamond",
            Self::BewleyInvest => "bewley_invest",
            Self::BewleyPref => "bewley_pref",
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Terminal conditions in a sweep.
    pub terminals: usize,
    /// Detrended agreement tolerance over the first half of the horizon.
    pub agree_tol: f64,
    /// Relative bracket tolerance for shooting.
    pub shoot_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            terminals: 3,
            agree_tol: 1e-6,
            shoot_tol: 1e-18,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathCfg {
    Geometric { level: f64, ratio: f64 },
    Explicit { values: Vec<f64>, tail_ratio: f64 },
}

impl PathCfg {
    pub fn build(&self) -> Result<PathSpec<f64>> {
        Ok(match self {
            Self::Geometric { level, ratio } => PathSpec::geometric(*level, *ratio)?,
            Self::Explicit { values, tail_ratio } => {
                PathSpec::explicit(values.clone(), *tail_ratio)?
            }
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum UtilityCfg {
    Crra { beta: f64, gamma: f64 },
    Linear { beta: f64 },
    CobbDouglasLog { beta: f64 },
}

impl UtilityCfg {
    pub fn build(&self) -> UtilitySpec<f64> {
        match *self {
            Self::Crra { beta, gamma } => UtilitySpec::Crra { beta, gamma },
            Self::Linear { beta } => UtilitySpec::Linear { beta },
            Self::CobbDouglasLog { beta } => UtilitySpec::CobbDouglasLog { beta },
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TextbookParams {
    pub beta: f64,
    pub a0: f64,
    pub a_growth: f64,
    pub d0: f64,
    pub d_growth: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoSectorCfg {
    pub alpha: f64,
    pub beta: f64,
    pub g1: f64,
    pub g2: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CesParams {
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub g_k: f64,
    pub g_l: f64,
    pub k0: f64,
    pub l0: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WilsonParams {
    pub beta: f64,
    pub a0: f64,
    pub g: f64,
    pub d0: f64,
    pub g_d: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrraParams {
    pub beta: f64,
    pub gamma: f64,
    pub g: f64,
    /// Long-run old-to-young endowment ratio; the old endowment is
    /// `w * a0 * g^t`.
    pub w: f64,
    pub a0: f64,
    /// Constant dividend level.
    pub d: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OlgGenericParams {
    pub utility: UtilityCfg,
    pub a: PathCfg,
    pub b: PathCfg,
    pub d: PathCfg,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiamondParams {
    pub a_tfp: f64,
    pub alpha: f64,
    pub delta: f64,
    pub beta: f64,
    pub k0: f64,
    pub d0: f64,
    pub g_d: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BewleyInvestParams {
    pub beta: f64,
    pub z: Vec<f64>,
    pub pi: Vec<Vec<f64>>,
    pub v0: Vec<f64>,
    pub d0: f64,
    pub g_d: f64,
    /// Persistence pre-transform `tau I + (1 - tau) Pi`.
    #[serde(default)]
    pub tau: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BewleyPrefParams {
    pub beta: f64,
    pub gamma: f64,
    /// `[theta, probability]` pairs.
    pub atoms: Vec<[f64; 2]>,
    pub a0: f64,
    pub g_a: f64,
    pub d0: f64,
    pub g_d: f64,
}

pub fn load(text: &str) -> Result<ScenarioFile> {
    toml::from_str(text).context("config does not match the scenario schema")
}

/// Deserializes the `[params]` table into the model's typed parameters.
pub fn params<T: serde::de::DeserializeOwned>(scenario: &ScenarioFile) -> Result<T> {
    scenario
        .params
        .clone()
        .try_into()
        .with_context(|| format!("invalid [params] for model {}", scenario.model.as_str()))
}

/// Overrides a scalar key inside `[params]` of a raw config document.
pub fn override_param(doc: &mut toml::Table, key: &str, value: f64) -> Result<()> {
    let params = doc
        .get_mut("params")
        .and_then(|v| v.as_table_mut())
        .context("config has no [params] table")?;
    match params.get(key) {
        Some(toml::Value::Float(_)) | Some(toml::Value::Integer(_)) => {
            params.insert(key.to_string(), toml::Value::Float(value));
            Ok(())
        }
        Some(_) => bail!("parameter {key} is not a scalar"),
        None => bail!("parameter {key} is not declared in [params]"),
    }
}
