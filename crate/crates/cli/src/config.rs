//! Run configuration: a JSON file whose sections are either preset names or inline values.

use std::path::{Path, PathBuf};

use kouexp::{presets, Contract, ExpSum, GompertzMakeham, KouParams};
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Gbm,
    Kou,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A preset name or the value spelled out.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Named<T> {
    Preset(String),
    Inline(T),
}

/// Contract economics without the equity model.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractTerms {
    #[serde(rename = "F0")]
    pub f0: f64,
    #[serde(rename = "G0")]
    pub g0: f64,
    pub r: f64,
    pub m: f64,
    pub m_d: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum ExpSumSource {
    Fit {
        #[serde(default = "default_terms")]
        terms: usize,
        #[serde(default = "default_horizon")]
        horizon: f64,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    File {
        path: PathBuf,
    },
}

fn default_terms() -> usize {
    presets::FIT_TERMS
}

fn default_horizon() -> f64 {
    presets::FIT_HORIZON
}

fn default_samples() -> usize {
    presets::FIT_SAMPLES
}

impl Default for ExpSumSource {
    fn default() -> Self {
        Self::Fit { terms: default_terms(), horizon: default_horizon(), samples: default_samples() }
    }
}

/// The file layout; every section is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<Model>,
    pub equity: Option<Named<KouParams>>,
    pub contract: Option<Named<ContractTerms>>,
    pub mortality: Option<Named<GompertzMakeham>>,
    pub expsum: Option<ExpSumSource>,
    pub output: Option<Format>,
    pub digits: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Schema(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| Failure::Schema(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }
}

/// Everything a command needs, with presets and defaults applied.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub model: Model,
    pub equity: KouParams,
    pub terms: ContractTerms,
    pub mortality: GompertzMakeham,
    pub expsum: ExpSumSource,
    pub format: Option<Format>,
    pub digits: Option<usize>,
}

fn schema(e: impl std::fmt::Display) -> Failure {
    Failure::Schema(e.to_string())
}

impl Resolved {
    pub fn new(cfg: RunConfig) -> Result<Self, Failure> {
        let model = cfg.model.unwrap_or(Model::Kou);
        let mut equity = match cfg.equity {
            None if model == Model::Gbm => presets::gbm(),
            None => presets::kou_table1(),
            Some(Named::Preset(name)) => presets::equity(&name).map_err(schema)?,
            Some(Named::Inline(k)) => k,
        };
        if model == Model::Gbm {
            equity.lambda = 0.0;
        }
        equity.validate().map_err(schema)?;
        let terms = match cfg.contract {
            None => default_terms_preset(),
            Some(Named::Preset(name)) if name == "contract-default" => default_terms_preset(),
            Some(Named::Preset(name)) => return Err(schema(format!("unknown contract preset {name:?}"))),
            Some(Named::Inline(t)) => t,
        };
        let mortality = match cfg.mortality {
            None => presets::mortality_65(),
            Some(Named::Preset(name)) if name == "mortality-65" => presets::mortality_65(),
            Some(Named::Preset(name)) => return Err(schema(format!("unknown mortality preset {name:?}"))),
            Some(Named::Inline(gm)) => gm,
        };
        mortality.validate().map_err(schema)?;
        let resolved = Self {
            model,
            equity,
            terms,
            mortality,
            expsum: cfg.expsum.unwrap_or_default(),
            format: cfg.output,
            digits: cfg.digits,
        };
        resolved.contract(equity).validate().map_err(schema)?;
        Ok(resolved)
    }

    pub fn contract(&self, equity: KouParams) -> Contract {
        let t = self.terms;
        Contract { f0: t.f0, g0: t.g0, r: t.r, m: t.m, m_d: t.m_d, equity }
    }

    /// The lifetime exponential sum, fitted or read from file.
    pub fn lifetimes(&self) -> Result<ExpSum, Failure> {
        match &self.expsum {
            ExpSumSource::Fit { terms, horizon, samples } => {
                kouexp::mortality::fit_exponential_sum(&self.mortality, *terms, *horizon, *samples)
                    .map_err(|e| Failure::numerical("mortality::fit_exponential_sum", e))
            }
            ExpSumSource::File { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Schema(format!("cannot read {}: {e}", path.display())))?;
                ExpSum::from_json(&text).map_err(|e| Failure::Schema(format!("{}: {e}", path.display())))
            }
        }
    }
}

fn default_terms_preset() -> ContractTerms {
    let c = presets::contract_default(presets::gbm());
    ContractTerms { f0: c.f0, g0: c.g0, r: c.r, m: c.m, m_d: c.m_d }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_accept_presets_and_values() {
        let cfg = RunConfig::parse(
            r#"{"model": "kou", "equity": "set-B", "contract": {"F0": 1, "G0": 1, "r": 0.02, "m": 0.01, "m_d": 0.004},
                "mortality": "mortality-65", "expsum": {"source": "fit", "terms": 12}, "output": "json", "digits": 8}"#,
        )
        .unwrap();
        let r = Resolved::new(cfg).unwrap();
        assert_eq!(r.equity, presets::set_b());
        assert_eq!(r.terms.m_d, 0.004);
        assert_eq!(r.expsum, ExpSumSource::Fit { terms: 12, horizon: 100.0, samples: 2048 });
        assert_eq!((r.format, r.digits), (Some(Format::Json), Some(8)));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse(r#"{"modle": "kou"}"#).is_err());
        assert!(RunConfig::parse(r#"{"expsum": {"source": "fit", "term": 12}}"#).is_err());
        assert!(RunConfig::parse(r#"{"expsum": {"source": "web"}}"#).is_err());
        assert!(RunConfig::parse(r#"{"contract": {"F0": 1, "G0": 1, "r": 0.02, "m": 0.01, "md": 0.1}}"#).is_err());
        assert!(RunConfig::parse(r#"{"output": "xml"}"#).is_err());
    }

    #[test]
    fn gbm_model_drops_jumps() {
        let r = Resolved::new(RunConfig::parse(r#"{"model": "gbm", "equity": "set-A"}"#).unwrap()).unwrap();
        assert_eq!(r.equity.lambda, 0.0);
        assert!(Resolved::new(RunConfig::parse(r#"{"equity": "set-Z"}"#).unwrap()).is_err());
    }
}
