//! Taxonomic trace links: requirements linked to the concepts of a
//! hierarchical domain taxonomy, by hand or from ranked suggestions.

pub mod evaluation;
pub mod recommender;
pub mod taxonomy;
pub mod textproc;
pub mod tracestore;
