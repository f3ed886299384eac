use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use super::{DecisionEvent, EventKind, ImportReport, Provenance, StoreError, TraceStore};

pub const EXPORT_COLUMNS: [&str; 7] = [
    "unit_id",
    "concept_id",
    "code",
    "label",
    "provenance",
    "confidence",
    "created_at",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkFormat {
    Csv,
    Jsonl,
}

impl FromStr for LinkFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(LinkFormat::Csv),
            "jsonl" => Ok(LinkFormat::Jsonl),
            other => Err(format!("unknown link format `{other}` (expected csv or jsonl)")),
        }
    }
}

impl fmt::Display for LinkFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinkFormat::Csv => "csv",
            LinkFormat::Jsonl => "jsonl",
        })
    }
}

/// One exported link. `code` and `label` are copied from the taxonomy for
/// readers and ignored on import.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkRecord {
    pub unit_id: String,
    pub concept_id: String,
    #[serde(default)]
    pub code: Option<String>,
    #[serde(default)]
    pub label: Option<String>,
    pub provenance: Provenance,
    pub confidence: f64,
    pub created_at: String,
}

fn timestamp(ts: &DateTime<Utc>) -> String {
    ts.to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn records(store: &TraceStore) -> impl Iterator<Item = LinkRecord> + '_ {
    store.links().map(|l| {
        let concept = store.taxonomy().get(&l.concept_id);
        LinkRecord {
            unit_id: l.unit_id.clone(),
            concept_id: l.concept_id.clone(),
            code: concept.and_then(|c| c.code.clone()),
            label: concept.map(|c| c.pref_label.clone()),
            provenance: l.provenance,
            confidence: l.confidence,
            created_at: timestamp(&l.created_at),
        }
    })
}

pub(super) fn export(store: &TraceStore, format: LinkFormat) -> Vec<u8> {
    match format {
        LinkFormat::Csv => {
            let mut w = ::csv::WriterBuilder::new()
                .terminator(::csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            w.write_record(EXPORT_COLUMNS).expect("write to Vec");
            for r in records(store) {
                w.write_record([
                    r.unit_id.as_str(),
                    &r.concept_id,
                    r.code.as_deref().unwrap_or(""),
                    r.label.as_deref().unwrap_or(""),
                    r.provenance.as_str(),
                    &r.confidence.to_string(),
                    &r.created_at,
                ])
                .expect("write to Vec");
            }
            w.into_inner().expect("flush to Vec")
        }
        LinkFormat::Jsonl => {
            let mut out = Vec::new();
            for r in records(store) {
                serde_json::to_writer(&mut out, &r).expect("serialize link record");
                out.push(b'\n');
            }
            out
        }
    }
}

/// (line, record) pairs, or the problems found while parsing.
fn parse_records(bytes: &[u8], format: LinkFormat, report: &mut ImportReport) -> Vec<(usize, LinkRecord)> {
    let mut out = Vec::new();
    match format {
        LinkFormat::Csv => {
            let mut reader = ::csv::ReaderBuilder::new()
                .flexible(true)
                .from_reader(bytes);
            let header = match reader.headers() {
                Ok(h) => h.clone(),
                Err(e) => {
                    report.push(1, format!("unreadable header: {e}"));
                    return out;
                }
            };
            let col = |name: &str| header.iter().position(|h| h.trim() == name);
            let required = ["unit_id", "concept_id", "provenance", "confidence", "created_at"];
            let missing: Vec<_> = required.iter().filter(|c| col(c).is_none()).collect();
            if !missing.is_empty() {
                report.push(1, format!("missing column(s) {missing:?}"));
                return out;
            }
            let idx = |name: &str| col(name).unwrap();
            for row in reader.records() {
                let row = match row {
                    Ok(r) => r,
                    Err(e) => {
                        let line = e.position().map_or(0, |p| p.line() as usize);
                        report.push(line, format!("malformed row: {e}"));
                        continue;
                    }
                };
                let line = row.position().map_or(0, |p| p.line() as usize);
                if row.len() != header.len() {
                    report.push(
                        line,
                        format!("expected {} fields, found {}", header.len(), row.len()),
                    );
                    continue;
                }
                let get = |name: &str| row.get(idx(name)).unwrap_or("").trim().to_string();
                let opt = |name: &str| col(name).map(|_| get(name)).filter(|s| !s.is_empty());
                let provenance = match get("provenance").parse::<Provenance>() {
                    Ok(p) => p,
                    Err(e) => {
                        report.push(line, e);
                        continue;
                    }
                };
                let confidence = match get("confidence").parse::<f64>() {
                    Ok(c) => c,
                    Err(_) => {
                        report.push(line, format!("bad confidence `{}`", get("confidence")));
                        continue;
                    }
                };
                out.push((
                    line,
                    LinkRecord {
                        unit_id: get("unit_id"),
                        concept_id: get("concept_id"),
                        code: opt("code"),
                        label: opt("label"),
                        provenance,
                        confidence,
                        created_at: get("created_at"),
                    },
                ));
            }
        }
        LinkFormat::Jsonl => {
            let text = match std::str::from_utf8(bytes) {
                Ok(t) => t,
                Err(e) => {
                    let line = 1 + bytes[..e.valid_up_to()].iter().filter(|b| **b == b'\n').count();
                    report.push(line, "invalid UTF-8");
                    return out;
                }
            };
            for (i, l) in text.lines().enumerate() {
                if l.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<LinkRecord>(l) {
                    Ok(r) => out.push((i + 1, r)),
                    Err(e) => report.push(i + 1, format!("malformed record: {e}")),
                }
            }
        }
    }
    out
}

/// Turns an import file into events, or a report of every bad line.
pub(super) fn parse_import(
    store: &TraceStore,
    bytes: &[u8],
    format: LinkFormat,
) -> Result<Vec<DecisionEvent>, StoreError> {
    let mut report = ImportReport::default();
    let parsed = parse_records(bytes, format, &mut report);
    let mut seen = HashSet::new();
    let mut events = Vec::new();
    for (line, r) in parsed {
        if !store.corpus().contains(&r.unit_id) {
            report.push(line, format!("unknown unit `{}`", r.unit_id));
            continue;
        }
        if !store.taxonomy().contains(&r.concept_id) {
            report.push(line, format!("unknown concept `{}`", r.concept_id));
            continue;
        }
        if !seen.insert((r.unit_id.clone(), r.concept_id.clone())) {
            report.push(
                line,
                format!("duplicate pair ({}, {}) in file", r.unit_id, r.concept_id),
            );
            continue;
        }
        if store.link(&r.unit_id, &r.concept_id).is_some() {
            report.push(
                line,
                format!("pair ({}, {}) is already linked", r.unit_id, r.concept_id),
            );
            continue;
        }
        let ts = match DateTime::parse_from_rfc3339(&r.created_at) {
            Ok(t) => t.with_timezone(&Utc),
            Err(e) => {
                report.push(line, format!("bad created_at `{}`: {e}", r.created_at));
                continue;
            }
        };
        let ok_confidence = match r.provenance {
            Provenance::Recommended => r.confidence > 0.0 && r.confidence <= 1.0,
            Provenance::Manual => r.confidence == 0.0,
        };
        if !ok_confidence {
            report.push(
                line,
                format!("confidence {} is not valid for a {} link", r.confidence, r.provenance),
            );
            continue;
        }
        events.push(DecisionEvent {
            event: match r.provenance {
                Provenance::Recommended => EventKind::Accept,
                Provenance::Manual => EventKind::Manual,
            },
            unit_id: r.unit_id,
            concept_id: r.concept_id,
            confidence: r.confidence,
            ts,
        });
    }
    report.problems.sort_by_key(|p| p.line);
    if report.problems.is_empty() {
        Ok(events)
    } else {
        Err(StoreError::Import(report))
    }
}
