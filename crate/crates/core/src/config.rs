//! The single declarative configuration shared by every pipeline stage.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::PairExpansion;
use crate::error::{Error, Result};
use crate::eval::EvalConfig;
use crate::losskernel::LossConfig;
use crate::markup::Markers;
use crate::taggers::{OracleConfig, TaggerKind};
use crate::textcore::{LanguageProfile, ProfileSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NerConfig {
    /// Entity list, one per line.
    pub gazetteer: Option<PathBuf>,
    /// Token-tagging service; takes precedence over the gazetteer.
    pub service_url: Option<String>,
    pub max_in_flight: usize,
}

impl Default for NerConfig {
    fn default() -> Self {
        Self {
            gazetteer: None,
            service_url: None,
            max_in_flight: 8,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AutoConfig {
    /// Served Auto Tagger; without one the pass-through tagger is used.
    pub service_url: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Train share of the split.
    pub split_fraction: f64,
    pub tagger: TaggerKind,
    /// Language code for records that omit `lang`, and for gazetteer tokenization.
    pub lang: Option<String>,
    pub pair_expansion: PairExpansion,
    pub markers: Markers,
    /// Stopword file per language code, replacing the built-in list.
    pub stopwords: BTreeMap<String, PathBuf>,
    pub oracle: OracleConfig,
    pub ner: NerConfig,
    pub auto: AutoConfig,
    pub loss: LossConfig,
    pub eval: EvalConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 13,
            split_fraction: 0.8,
            tagger: TaggerKind::None,
            lang: None,
            pair_expansion: PairExpansion::AllReferences,
            markers: Markers::default(),
            stopwords: BTreeMap::new(),
            oracle: OracleConfig::default(),
            ner: NerConfig::default(),
            auto: AutoConfig::default(),
            loss: LossConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a TOML config, or the `config` object of a `manifest.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_json = path.extension().is_some_and(|e| e == "json");
        if !is_json {
            return Self::from_toml(&text);
        }
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let inner = value.get("config").cloned().unwrap_or(value);
        let cfg: Self = serde_json::from_value(inner)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::Config(format!(
                "split_fraction must be in (0, 1), got {}",
                self.split_fraction
            )));
        }
        self.oracle.validate().map_err(Error::Config)?;
        self.loss.validate()?;
        self.markers.validate()?;
        if self.eval.n == 0 {
            return Err(Error::Config("eval.n must be positive".into()));
        }
        if self.lang.as_deref().is_some_and(|l| l.trim().is_empty()) {
            return Err(Error::Config("lang must be non-empty when set".into()));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Language profiles with configured stopword files applied.
    pub fn profiles(&self) -> Result<ProfileSet> {
        let mut set = ProfileSet::default();
        for (code, path) in &self.stopwords {
            set.insert(LanguageProfile::for_code(code)?.with_stopword_file(path)?);
        }
        Ok(set)
    }

    pub fn default_lang(&self) -> &str {
        self.lang.as_deref().unwrap_or("en")
    }
}
