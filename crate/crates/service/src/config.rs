//! TOML engine configuration. Keys use the CLI flag names, so
//! `--max-rejects 4` and `max-rejects = 4` mean the same thing.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use taxotrace::recommender::{PredictorWeights, RecommenderSettings};
use taxotrace::textproc::Lang;

use crate::error::CliError;

pub const DEFAULT_LISTEN: &str = "127.0.0.1:8080";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TaxonomyFormat {
    Csv,
    Ttl,
}

impl TaxonomyFormat {
    /// `.ttl` means Turtle, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("ttl") => TaxonomyFormat::Ttl,
            _ => TaxonomyFormat::Csv,
        }
    }
}

/// Raw configuration as read from a file or assembled from flags. Every
/// field is optional so layers can be merged.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub taxonomy: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<TaxonomyFormat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id_namespace: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub docs: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lang: Option<Lang>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stopwords: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noun_lexicon: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_rejects: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top_k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub store: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub listen: Option<String>,
}

impl ConfigFile {
    /// Reads `path`; relative paths inside are taken relative to its
    /// directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: ConfigFile = toml::from_str(&text)
            .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.taxonomy.as_mut().map(rebase);
        cfg.stopwords.as_mut().map(rebase);
        cfg.noun_lexicon.as_mut().map(rebase);
        cfg.store.as_mut().map(rebase);
        cfg.docs.iter_mut().for_each(rebase);
        Ok(cfg)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merge(self, over: ConfigFile) -> ConfigFile {
        ConfigFile {
            taxonomy: over.taxonomy.or(self.taxonomy),
            format: over.format.or(self.format),
            id_namespace: over.id_namespace.or(self.id_namespace),
            docs: if over.docs.is_empty() { self.docs } else { over.docs },
            lang: over.lang.or(self.lang),
            stopwords: over.stopwords.or(self.stopwords),
            noun_lexicon: over.noun_lexicon.or(self.noun_lexicon),
            weights: over.weights.or(self.weights),
            threshold: over.threshold.or(self.threshold),
            max_rejects: over.max_rejects.or(self.max_rejects),
            top_k: over.top_k.or(self.top_k),
            store: over.store.or(self.store),
            listen: over.listen.or(self.listen),
        }
    }
}

/// Validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub taxonomy: Option<PathBuf>,
    pub format: TaxonomyFormat,
    pub id_namespace: Option<String>,
    pub docs: Vec<PathBuf>,
    pub lang: Lang,
    pub stopwords: Option<PathBuf>,
    pub noun_lexicon: Option<PathBuf>,
    pub weights: PredictorWeights,
    pub settings: RecommenderSettings,
    pub store: Option<PathBuf>,
    pub listen: String,
    /// File that `PUT /api/settings` writes back to.
    pub config_path: Option<PathBuf>,
}

fn must_exist(path: &Path, what: &str) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::usage(format!("{what} {} does not exist", path.display())))
    }
}

impl EngineConfig {
    pub fn resolve(raw: ConfigFile, config_path: Option<PathBuf>) -> Result<Self, CliError> {
        if let Some(p) = &raw.taxonomy {
            must_exist(p, "taxonomy")?;
        }
        for p in &raw.docs {
            must_exist(p, "document")?;
        }
        if let Some(p) = &raw.stopwords {
            must_exist(p, "stopword list")?;
        }
        if let Some(p) = &raw.noun_lexicon {
            must_exist(p, "noun lexicon")?;
        }
        if let Some(dir) = raw.store.as_ref().and_then(|p| p.parent()) {
            if !dir.as_os_str().is_empty() {
                must_exist(dir, "store directory")?;
            }
        }
        let weights = match &raw.weights {
            Some(w) => w.parse().map_err(|e| CliError::usage(format!("weights: {e}")))?,
            None => PredictorWeights::default(),
        };
        let d = RecommenderSettings::default();
        let settings = RecommenderSettings::new(
            raw.threshold.unwrap_or(d.threshold()),
            raw.max_rejects.unwrap_or(d.max_rejects()),
            raw.top_k.unwrap_or(d.top_k()),
        )
        .map_err(|e| CliError::usage(e.to_string()))?;
        let format = raw
            .format
            .or_else(|| raw.taxonomy.as_deref().map(TaxonomyFormat::from_path))
            .unwrap_or(TaxonomyFormat::Csv);
        Ok(EngineConfig {
            taxonomy: raw.taxonomy,
            format,
            id_namespace: raw.id_namespace,
            docs: raw.docs,
            lang: raw.lang.unwrap_or(Lang::En),
            stopwords: raw.stopwords,
            noun_lexicon: raw.noun_lexicon,
            weights,
            settings,
            store: raw.store,
            listen: raw.listen.unwrap_or_else(|| DEFAULT_LISTEN.to_string()),
            config_path,
        })
    }
}

/// Rewrites the settings keys of the config file at `path`, keeping every
/// other key as written.
pub fn save_settings(path: &Path, settings: &RecommenderSettings) -> Result<(), CliError> {
    let mut table: toml::Table = match fs::read_to_string(path) {
        Ok(text) => toml::from_str(&text)
            .map_err(|e| CliError::invalid(format!("config {}: {e}", path.display())))?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => toml::Table::new(),
        Err(e) => return Err(CliError::invalid(format!("config {}: {e}", path.display()))),
    };
    table.insert("threshold".into(), toml::Value::Float(settings.threshold()));
    table.insert("max-rejects".into(), toml::Value::Integer(settings.max_rejects().into()));
    table.insert(
        "top-k".into(),
        toml::Value::Integer(i64::try_from(settings.top_k()).unwrap_or(i64::MAX)),
    );
    let text = toml::to_string_pretty(&table)
        .map_err(|e| CliError::invalid(format!("config {}: {e}", path.display())))?;
    fs::write(path, text).map_err(|e| CliError::invalid(format!("config {}: {e}", path.display())))
}
