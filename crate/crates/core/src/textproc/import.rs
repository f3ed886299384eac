use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

/// One requirement: the source side of a taxonomic trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceUnit {
    pub unit_id: String,
    pub doc_id: String,
    pub seq: usize,
    pub text: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ImportError {
    #[error("invalid UTF-8 at byte offset {offset}")]
    Encoding { offset: usize },
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Format(String),
    #[error("element {index}: {message}")]
    Schema { index: usize, message: String },
    #[error("duplicate unit id `{0}`")]
    DuplicateId(String),
    #[error("duplicate position {seq} in document `{doc_id}`")]
    DuplicatePosition { doc_id: String, seq: usize },
    #[error("unit `{0}` has empty text")]
    EmptyText(String),
}

fn utf8(bytes: &[u8]) -> Result<&str, ImportError> {
    std::str::from_utf8(bytes).map_err(|e| ImportError::Encoding {
        offset: e.valid_up_to(),
    })
}

/// One unit per non-blank line, trimmed. `seq` counts units, so blank lines
/// do not leave gaps.
pub fn import_plaintext(bytes: &[u8], doc_id: &str) -> Result<Vec<TraceUnit>, ImportError> {
    let text = utf8(bytes)?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(seq, line)| TraceUnit {
            unit_id: format!("{doc_id}#{seq}"),
            doc_id: doc_id.to_string(),
            seq,
            text: line.to_string(),
        })
        .collect())
}

pub const DEFAULT_JSON_DOC_ID: &str = "imported";

/// Accepts either a bare array of `{"id", "text"}` objects or a wrapper
/// object `{"doc_id": ..., "units": [...]}`.
pub fn import_json(bytes: &[u8]) -> Result<Vec<TraceUnit>, ImportError> {
    let text = utf8(bytes)?;
    let value: Value = serde_json::from_str(text).map_err(|e| ImportError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let (doc_id, items) = match value {
        Value::Array(items) => (DEFAULT_JSON_DOC_ID.to_string(), items),
        Value::Object(mut map) => {
            let doc_id = match map.remove("doc_id") {
                None | Some(Value::Null) => DEFAULT_JSON_DOC_ID.to_string(),
                Some(Value::String(s)) => s,
                Some(_) => return Err(ImportError::Format("`doc_id` must be a string".into())),
            };
            match map.remove("units") {
                Some(Value::Array(items)) => (doc_id, items),
                _ => {
                    return Err(ImportError::Format(
                        "expected an array of units or an object with a `units` array".into(),
                    ))
                }
            }
        }
        _ => {
            return Err(ImportError::Format(
                "expected an array of units or an object with a `units` array".into(),
            ))
        }
    };

    let mut seen = HashSet::new();
    let mut units = Vec::with_capacity(items.len());
    for (index, item) in items.into_iter().enumerate() {
        let field = |name: &str| -> Result<String, ImportError> {
            match item.get(name) {
                Some(Value::String(s)) => Ok(s.clone()),
                Some(_) => Err(ImportError::Schema {
                    index,
                    message: format!("field `{name}` must be a string"),
                }),
                None => Err(ImportError::Schema {
                    index,
                    message: format!("missing field `{name}`"),
                }),
            }
        };
        if !item.is_object() {
            return Err(ImportError::Schema {
                index,
                message: "expected an object".into(),
            });
        }
        let id = field("id")?;
        let text = field("text")?;
        if text.trim().is_empty() {
            return Err(ImportError::Schema {
                index,
                message: "field `text` is empty".into(),
            });
        }
        if !seen.insert(id.clone()) {
            return Err(ImportError::DuplicateId(id));
        }
        units.push(TraceUnit {
            unit_id: id,
            doc_id: doc_id.clone(),
            seq: index,
            text,
        });
    }
    Ok(units)
}

/// Units from one or more documents, unique by id and by position.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    units: Vec<TraceUnit>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(units: Vec<TraceUnit>) -> Result<Self, ImportError> {
        let mut corpus = Corpus::default();
        corpus.extend(units)?;
        Ok(corpus)
    }

    /// Adds units; on error the corpus is left unchanged.
    pub fn extend(&mut self, units: Vec<TraceUnit>) -> Result<(), ImportError> {
        let mut ids: HashSet<&str> = self.by_id.keys().map(String::as_str).collect();
        let mut positions: HashSet<(&str, usize)> =
            self.units.iter().map(|u| (u.doc_id.as_str(), u.seq)).collect();
        for u in &units {
            if u.text.trim().is_empty() {
                return Err(ImportError::EmptyText(u.unit_id.clone()));
            }
            if !ids.insert(&u.unit_id) {
                return Err(ImportError::DuplicateId(u.unit_id.clone()));
            }
            if !positions.insert((&u.doc_id, u.seq)) {
                return Err(ImportError::DuplicatePosition {
                    doc_id: u.doc_id.clone(),
                    seq: u.seq,
                });
            }
        }
        for u in units {
            self.by_id.insert(u.unit_id.clone(), self.units.len());
            self.units.push(u);
        }
        Ok(())
    }

    pub fn get(&self, unit_id: &str) -> Option<&TraceUnit> {
        self.by_id.get(unit_id).map(|&i| &self.units[i])
    }

    pub fn contains(&self, unit_id: &str) -> bool {
        self.by_id.contains_key(unit_id)
    }

    /// Units in import order.
    pub fn units(&self) -> &[TraceUnit] {
        &self.units
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }
}
