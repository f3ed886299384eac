//! Trace decisions as an append-only event log with derived link state.
//!
//! Every mutation is one [`DecisionEvent`]. The active link set and the
//! reject counts are a pure fold over the log, so a store reopened from its
//! JSONL file is identical to the one that wrote it.

mod links_io;

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::recommender::RejectCounts;
use crate::taxonomy::Taxonomy;
use crate::textproc::Corpus;

pub use self::links_io::{LinkFormat, LinkRecord, EXPORT_COLUMNS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Manual,
    Recommended,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Manual => "manual",
            Provenance::Recommended => "recommended",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Provenance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "manual" => Ok(Provenance::Manual),
            "recommended" => Ok(Provenance::Recommended),
            other => Err(format!("unknown provenance `{other}`")),
        }
    }
}

/// A confirmed link from a trace unit to a taxonomy concept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceLink {
    pub unit_id: String,
    pub concept_id: String,
    pub provenance: Provenance,
    /// Confidence at decision time, 0 for manual links.
    pub confidence: f64,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Accept,
    Reject,
    Unlink,
    Manual,
}

/// One line of the decision log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionEvent {
    pub event: EventKind,
    pub unit_id: String,
    pub concept_id: String,
    pub confidence: f64,
    pub ts: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Accept,
    Reject,
}

impl FromStr for Decision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "accept" => Ok(Decision::Accept),
            "reject" => Ok(Decision::Reject),
            other => Err(format!("unknown decision `{other}` (expected accept or reject)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportProblem {
    pub line: usize,
    pub message: String,
}

/// Every problem found in a rejected link import.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ImportReport {
    pub problems: Vec<ImportProblem>,
}

impl ImportReport {
    pub fn lines(&self) -> Vec<usize> {
        self.problems.iter().map(|p| p.line).collect()
    }

    fn push(&mut self, line: usize, message: impl Into<String>) {
        self.problems.push(ImportProblem {
            line,
            message: message.into(),
        });
    }
}

impl fmt::Display for ImportReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bad record(s)", self.problems.len())?;
        for p in &self.problems {
            write!(f, "\n  line {}: {}", p.line, p.message)?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("unknown unit `{0}`")]
    UnknownUnit(String),
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
    #[error("no active link between `{unit_id}` and `{concept_id}`")]
    NotLinked { unit_id: String, concept_id: String },
    #[error("conflict: {0}")]
    Conflict(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("decision log line {line}: {message}")]
    Log { line: usize, message: String },
    #[error("link import rejected: {0}")]
    Import(ImportReport),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl StoreError {
    pub fn is_not_found(&self) -> bool {
        matches!(
            self,
            StoreError::UnknownUnit(_) | StoreError::UnknownConcept(_) | StoreError::NotLinked { .. }
        )
    }
}

pub type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

type Pair = (String, String);

/// Derived state: what replay must reproduce.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StoreState {
    pub links: BTreeMap<Pair, TraceLink>,
    pub rejects: BTreeMap<Pair, u32>,
}

pub struct TraceStore {
    taxonomy: Arc<Taxonomy>,
    corpus: Arc<Corpus>,
    state: StoreState,
    log: Vec<DecisionEvent>,
    sink: Option<File>,
    clock: Clock,
}

impl fmt::Debug for TraceStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TraceStore")
            .field("links", &self.state.links.len())
            .field("rejects", &self.state.rejects.len())
            .field("events", &self.log.len())
            .field("persistent", &self.sink.is_some())
            .finish()
    }
}

fn pair(unit_id: &str, concept_id: &str) -> Pair {
    (unit_id.to_string(), concept_id.to_string())
}

impl TraceStore {
    /// Empty store without a backing file.
    pub fn in_memory(taxonomy: Arc<Taxonomy>, corpus: Arc<Corpus>) -> Self {
        TraceStore {
            taxonomy,
            corpus,
            state: StoreState::default(),
            log: Vec::new(),
            sink: None,
            clock: Arc::new(Utc::now),
        }
    }

    /// Replays the log at `path` (if it exists) and appends new events to it.
    pub fn open(
        taxonomy: Arc<Taxonomy>,
        corpus: Arc<Corpus>,
        path: impl AsRef<Path>,
    ) -> Result<Self, StoreError> {
        let path = path.as_ref();
        let mut store = Self::in_memory(taxonomy, corpus);
        if path.exists() {
            let reader = BufReader::new(File::open(path)?);
            let mut events = Vec::new();
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let event: DecisionEvent =
                    serde_json::from_str(&line).map_err(|e| StoreError::Log {
                        line: i + 1,
                        message: e.to_string(),
                    })?;
                events.push((i + 1, event));
            }
            for (line, event) in events {
                store.apply(event).map_err(|e| StoreError::Log {
                    line,
                    message: e.to_string(),
                })?;
            }
        }
        store.sink = Some(OpenOptions::new().create(true).append(true).open(path)?);
        Ok(store)
    }

    /// Rebuilds an in-memory store from events.
    pub fn replay(
        taxonomy: Arc<Taxonomy>,
        corpus: Arc<Corpus>,
        events: impl IntoIterator<Item = DecisionEvent>,
    ) -> Result<Self, StoreError> {
        let mut store = Self::in_memory(taxonomy, corpus);
        for (i, event) in events.into_iter().enumerate() {
            store.apply(event).map_err(|e| StoreError::Log {
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(store)
    }

    pub fn with_clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }

    pub fn taxonomy(&self) -> &Arc<Taxonomy> {
        &self.taxonomy
    }

    pub fn corpus(&self) -> &Arc<Corpus> {
        &self.corpus
    }

    pub fn state(&self) -> &StoreState {
        &self.state
    }

    pub fn events(&self) -> &[DecisionEvent] {
        &self.log
    }

    /// Active links sorted by (unit_id, concept_id).
    pub fn links(&self) -> impl Iterator<Item = &TraceLink> {
        self.state.links.values()
    }

    pub fn links_for_unit<'a>(&'a self, unit_id: &'a str) -> impl Iterator<Item = &'a TraceLink> {
        self.state.links.values().filter(move |l| l.unit_id == unit_id)
    }

    pub fn link(&self, unit_id: &str, concept_id: &str) -> Option<&TraceLink> {
        self.state.links.get(&pair(unit_id, concept_id))
    }

    pub fn reject_count(&self, unit_id: &str, concept_id: &str) -> u32 {
        self.state
            .rejects
            .get(&pair(unit_id, concept_id))
            .copied()
            .unwrap_or(0)
    }

    fn now(&self) -> DateTime<Utc> {
        (self.clock)().trunc_subsecs(3)
    }

    /// Accept links the pair with provenance `recommended` (a no-op on the
    /// link set if it is already linked). Reject bumps the reject count.
    pub fn record_decision(
        &mut self,
        unit_id: &str,
        concept_id: &str,
        decision: Decision,
        confidence: f64,
    ) -> Result<(), StoreError> {
        let event = DecisionEvent {
            event: match decision {
                Decision::Accept => EventKind::Accept,
                Decision::Reject => EventKind::Reject,
            },
            unit_id: unit_id.to_string(),
            concept_id: concept_id.to_string(),
            confidence,
            ts: self.now(),
        };
        self.commit(vec![event])
    }

    /// Links the pair with provenance `manual`, regardless of its reject count.
    pub fn create_manual_link(
        &mut self,
        unit_id: &str,
        concept_id: &str,
    ) -> Result<TraceLink, StoreError> {
        let event = DecisionEvent {
            event: EventKind::Manual,
            unit_id: unit_id.to_string(),
            concept_id: concept_id.to_string(),
            confidence: 0.0,
            ts: self.now(),
        };
        self.commit(vec![event])?;
        Ok(self.state.links[&pair(unit_id, concept_id)].clone())
    }

    pub fn unlink(&mut self, unit_id: &str, concept_id: &str) -> Result<TraceLink, StoreError> {
        let removed = self
            .link(unit_id, concept_id)
            .cloned()
            .ok_or_else(|| StoreError::NotLinked {
                unit_id: unit_id.to_string(),
                concept_id: concept_id.to_string(),
            })?;
        let event = DecisionEvent {
            event: EventKind::Unlink,
            unit_id: unit_id.to_string(),
            concept_id: concept_id.to_string(),
            confidence: 0.0,
            ts: self.now(),
        };
        self.commit(vec![event])?;
        Ok(removed)
    }

    /// Serialized active links. See [`LinkFormat`].
    pub fn export_links(&self, format: LinkFormat) -> Vec<u8> {
        links_io::export(self, format)
    }

    /// Adds every link in `bytes` or none. Returns the number imported.
    pub fn import_links(&mut self, bytes: &[u8], format: LinkFormat) -> Result<usize, StoreError> {
        let events = links_io::parse_import(self, bytes, format)?;
        let n = events.len();
        self.commit(events)?;
        Ok(n)
    }

    /// Validates the events against a scratch copy of the state, persists
    /// them, then applies them.
    fn commit(&mut self, events: Vec<DecisionEvent>) -> Result<(), StoreError> {
        let mut scratch = self.state.clone();
        for e in &events {
            self.validate(e, &scratch)?;
            Self::fold(&mut scratch, e);
        }
        if let Some(sink) = self.sink.as_mut() {
            let mut buf = Vec::new();
            for e in &events {
                serde_json::to_writer(&mut buf, e).map_err(io::Error::other)?;
                buf.push(b'\n');
            }
            sink.write_all(&buf)?;
            sink.flush()?;
        }
        self.state = scratch;
        self.log.extend(events);
        Ok(())
    }

    fn apply(&mut self, event: DecisionEvent) -> Result<(), StoreError> {
        self.validate(&event, &self.state)?;
        Self::fold(&mut self.state, &event);
        self.log.push(event);
        Ok(())
    }

    fn validate(&self, e: &DecisionEvent, state: &StoreState) -> Result<(), StoreError> {
        if !self.corpus.contains(&e.unit_id) {
            return Err(StoreError::UnknownUnit(e.unit_id.clone()));
        }
        if !self.taxonomy.contains(&e.concept_id) {
            return Err(StoreError::UnknownConcept(e.concept_id.clone()));
        }
        if !e.confidence.is_finite() || !(0.0..=1.0).contains(&e.confidence) {
            return Err(StoreError::InvalidArgument(format!(
                "confidence {} is outside [0, 1]",
                e.confidence
            )));
        }
        let linked = state.links.contains_key(&pair(&e.unit_id, &e.concept_id));
        match e.event {
            EventKind::Accept if e.confidence <= 0.0 => Err(StoreError::InvalidArgument(
                "accepted suggestions need a confidence in (0, 1]".into(),
            )),
            EventKind::Reject if linked => Err(StoreError::Conflict(format!(
                "`{}` is linked to `{}`; unlink it before rejecting",
                e.unit_id, e.concept_id
            ))),
            EventKind::Manual if linked => Err(StoreError::Conflict(format!(
                "`{}` is already linked to `{}`",
                e.unit_id, e.concept_id
            ))),
            EventKind::Manual if e.confidence != 0.0 => Err(StoreError::InvalidArgument(
                "manual links carry confidence 0".into(),
            )),
            EventKind::Unlink if !linked => Err(StoreError::NotLinked {
                unit_id: e.unit_id.clone(),
                concept_id: e.concept_id.clone(),
            }),
            _ => Ok(()),
        }
    }

    fn fold(state: &mut StoreState, e: &DecisionEvent) {
        let key = pair(&e.unit_id, &e.concept_id);
        match e.event {
            EventKind::Accept | EventKind::Manual => {
                state.links.entry(key).or_insert_with(|| TraceLink {
                    unit_id: e.unit_id.clone(),
                    concept_id: e.concept_id.clone(),
                    provenance: if e.event == EventKind::Accept {
                        Provenance::Recommended
                    } else {
                        Provenance::Manual
                    },
                    confidence: e.confidence,
                    created_at: e.ts,
                });
            }
            EventKind::Reject => *state.rejects.entry(key).or_insert(0) += 1,
            EventKind::Unlink => {
                state.links.remove(&key);
            }
        }
    }
}

impl RejectCounts for TraceStore {
    fn reject_count(&self, unit_id: &str, concept_id: &str) -> u32 {
        TraceStore::reject_count(self, unit_id, concept_id)
    }
}

impl RejectCounts for StoreState {
    fn reject_count(&self, unit_id: &str, concept_id: &str) -> u32 {
        self.rejects.reject_count(unit_id, concept_id)
    }
}
