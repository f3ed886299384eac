#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;
use std::sync::Arc;

use taxotrace::recommender::{ConceptIndex, PredictorWeights};
use taxotrace::taxonomy::{parse_taxonomy_csv, parse_taxonomy_turtle, Taxonomy, TurtleOptions};
use taxotrace::textproc::{import_json, Corpus, Lang, LangConfig, TraceUnit};

pub const NAMESPACE: &str = "http://example.org/coclass/";

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn read(name: &str) -> Vec<u8> {
    std::fs::read(fixture_path(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

pub fn toy_taxonomy() -> Taxonomy {
    parse_taxonomy_csv(&read("toy.csv"), "toy.csv").unwrap().taxonomy
}

pub fn toy_turtle() -> Taxonomy {
    let opts = TurtleOptions::new("en").with_id_namespace(NAMESPACE);
    parse_taxonomy_turtle(&read("toy.ttl"), "toy.ttl", &opts).unwrap().taxonomy
}

pub fn toy_units() -> Vec<TraceUnit> {
    import_json(&read("requirements.json")).unwrap()
}

pub fn toy_corpus() -> Corpus {
    Corpus::new(toy_units()).unwrap()
}

pub fn toy_index() -> ConceptIndex {
    ConceptIndex::build(&toy_taxonomy(), LangConfig::new(Lang::En), PredictorWeights::default())
}

pub fn shared() -> (Arc<Taxonomy>, Arc<Corpus>) {
    (Arc::new(toy_taxonomy()), Arc::new(toy_corpus()))
}
