//! Loading a taxonomy, documents and decision store from an [`EngineConfig`].

use std::fs;
use std::path::Path;
use std::sync::Arc;

use taxotrace::recommender::{ConceptIndex, RecommenderSettings};
use taxotrace::taxonomy::{
    parse_taxonomy_csv, parse_taxonomy_turtle, Imported, Taxonomy, TaxonomyError, TurtleOptions,
};
use taxotrace::textproc::{import_json, import_plaintext, load_word_list, Corpus, LangConfig, TraceUnit};
use taxotrace::tracestore::TraceStore;

use crate::config::{EngineConfig, TaxonomyFormat};
use crate::error::CliError;

/// Everything the CLI commands and the HTTP API operate on.
pub struct Engine {
    pub taxonomy: Arc<Taxonomy>,
    pub corpus: Arc<Corpus>,
    pub index: ConceptIndex,
    pub store: TraceStore,
    pub settings: RecommenderSettings,
    pub warnings: Vec<String>,
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))
}

pub fn taxonomy_error(path: &Path, e: TaxonomyError) -> CliError {
    match e {
        TaxonomyError::Invalid(report) => {
            CliError::invalid(format!("{}: taxonomy failed validation\n{report}", path.display()))
        }
        other => CliError::invalid(format!("{}: {other}", path.display())),
    }
}

pub fn load_taxonomy(cfg: &EngineConfig) -> Result<Imported, CliError> {
    let path = cfg
        .taxonomy
        .as_deref()
        .ok_or_else(|| CliError::usage("no taxonomy given (use --taxonomy or the config file)"))?;
    let bytes = read(path)?;
    let name = path.display().to_string();
    let parsed = match cfg.format {
        TaxonomyFormat::Csv => parse_taxonomy_csv(&bytes, &name),
        TaxonomyFormat::Ttl => {
            let mut opts = TurtleOptions::new(cfg.lang.tag());
            if let Some(ns) = &cfg.id_namespace {
                opts = opts.with_id_namespace(ns.clone());
            }
            parse_taxonomy_turtle(&bytes, &name, &opts)
        }
    };
    parsed.map_err(|e| taxonomy_error(path, e))
}

/// `.json` files go through the JSON importer, everything else is plain
/// text with one unit per line and the file stem as document id.
pub fn load_units(path: &Path) -> Result<Vec<TraceUnit>, CliError> {
    let bytes = read(path)?;
    let is_json = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let units = if is_json {
        import_json(&bytes)
    } else {
        let doc_id = path.file_stem().and_then(|s| s.to_str()).unwrap_or("doc");
        import_plaintext(&bytes, doc_id)
    };
    units.map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

pub fn load_corpus(cfg: &EngineConfig) -> Result<Corpus, CliError> {
    let mut corpus = Corpus::default();
    for path in &cfg.docs {
        corpus
            .extend(load_units(path)?)
            .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    }
    Ok(corpus)
}

pub fn lang_config(cfg: &EngineConfig) -> Result<LangConfig, CliError> {
    let mut lc = LangConfig::new(cfg.lang);
    let words = |p: &Path| {
        load_word_list(p).map_err(|e| CliError::invalid(format!("cannot read {}: {e}", p.display())))
    };
    if let Some(p) = &cfg.stopwords {
        lc = lc.with_stopwords(words(p)?);
    }
    if let Some(p) = &cfg.noun_lexicon {
        lc = lc.with_noun_lexicon(words(p)?);
    }
    Ok(lc)
}

impl Engine {
    pub fn load(cfg: &EngineConfig) -> Result<Self, CliError> {
        let imported = load_taxonomy(cfg)?;
        let mut warnings: Vec<String> = imported.warnings.iter().map(|w| format!("warning: {w}")).collect();
        let taxonomy = Arc::new(imported.taxonomy);
        let corpus = Arc::new(load_corpus(cfg)?);
        let index = ConceptIndex::build(&taxonomy, lang_config(cfg)?, cfg.weights);
        warnings.extend(index.warnings().iter().map(|w| format!("warning: {w}")));
        let store = match &cfg.store {
            Some(path) => TraceStore::open(taxonomy.clone(), corpus.clone(), path)
                .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?,
            None => TraceStore::in_memory(taxonomy.clone(), corpus.clone()),
        };
        Ok(Engine {
            taxonomy,
            corpus,
            index,
            store,
            settings: cfg.settings,
            warnings,
        })
    }
}
