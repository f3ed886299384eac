//! Precision, recall and ranking quality of recommender output against a
//! gold set of trace links.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::recommender::{select, ConceptIndex, NoRejects, RecommenderSettings, Suggestion};
use crate::taxonomy::Taxonomy;
use crate::textproc::{Corpus, TraceUnit};

pub type Pair = (String, String);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("gold set line {line}: {message}")]
    Gold { line: usize, message: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Human-confirmed (unit_id, concept_id) pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GoldSet {
    pairs: BTreeSet<Pair>,
    source: String,
}

impl GoldSet {
    /// Fails on duplicate pairs.
    pub fn new(pairs: impl IntoIterator<Item = Pair>, source: &str) -> Result<Self, EvalError> {
        let mut set = BTreeSet::new();
        for (i, p) in pairs.into_iter().enumerate() {
            if !set.insert(p.clone()) {
                return Err(EvalError::Gold {
                    line: i + 1,
                    message: format!("duplicate pair ({}, {})", p.0, p.1),
                });
            }
        }
        Ok(GoldSet {
            pairs: set,
            source: source.to_string(),
        })
    }

    /// CSV with a `unit_id,concept_id` header. Line numbers in errors are
    /// 1-based and count the header.
    pub fn from_csv(bytes: &[u8], source: &str) -> Result<Self, EvalError> {
        let mut reader = ::csv::ReaderBuilder::new().from_reader(bytes);
        let header = reader.headers().map_err(|e| EvalError::Gold {
            line: 1,
            message: e.to_string(),
        })?;
        let names: Vec<&str> = header.iter().map(str::trim).collect();
        if names != ["unit_id", "concept_id"] {
            return Err(EvalError::Gold {
                line: 1,
                message: format!("expected header `unit_id,concept_id`, found `{}`", names.join(",")),
            });
        }
        let mut pairs = BTreeSet::new();
        for row in reader.records() {
            let row = row.map_err(|e| EvalError::Gold {
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let line = row.position().map_or(0, |p| p.line() as usize);
            let unit = row[0].trim();
            let concept = row[1].trim();
            if unit.is_empty() || concept.is_empty() {
                return Err(EvalError::Gold {
                    line,
                    message: "empty id".into(),
                });
            }
            if !pairs.insert((unit.to_string(), concept.to_string())) {
                return Err(EvalError::Gold {
                    line,
                    message: format!("duplicate pair ({unit}, {concept})"),
                });
            }
        }
        Ok(GoldSet {
            pairs,
            source: source.to_string(),
        })
    }

    /// Checks that every pair names a known unit and concept.
    pub fn validate(&self, taxonomy: &Taxonomy, corpus: &Corpus) -> Result<(), EvalError> {
        for (u, c) in &self.pairs {
            if !corpus.contains(u) {
                return Err(EvalError::InvalidArgument(format!("gold set names unknown unit `{u}`")));
            }
            if !taxonomy.contains(c) {
                return Err(EvalError::InvalidArgument(format!(
                    "gold set names unknown concept `{c}`"
                )));
            }
        }
        Ok(())
    }

    pub fn pairs(&self) -> &BTreeSet<Pair> {
        &self.pairs
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, unit_id: &str, concept_id: &str) -> bool {
        self.pairs.contains(&(unit_id.to_string(), concept_id.to_string()))
    }

    /// Gold concepts per unit.
    pub fn by_unit(&self) -> BTreeMap<&str, BTreeSet<&str>> {
        let mut out: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for (u, c) in &self.pairs {
            out.entry(u.as_str()).or_default().insert(c.as_str());
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrecisionRecall {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// Set-based scores. Precision is 1 for an empty proposal and recall is 1
/// for an empty gold set.
pub fn precision_recall(proposed: &BTreeSet<Pair>, gold: &GoldSet) -> PrecisionRecall {
    let hits = proposed.iter().filter(|p| gold.pairs.contains(*p)).count() as f64;
    let precision = if proposed.is_empty() {
        1.0
    } else {
        hits / proposed.len() as f64
    };
    let recall = if gold.is_empty() {
        1.0
    } else {
        hits / gold.len() as f64
    };
    PrecisionRecall {
        precision,
        recall,
        f1: f1(precision, recall),
    }
}

/// Mean of precision@r over the ranks r that hold a gold item, divided by
/// `|gold|`. Repeated entries in `ranked` count once.
pub fn average_precision<S: AsRef<str>>(ranked: &[S], gold: &BTreeSet<&str>) -> f64 {
    if gold.is_empty() {
        return 0.0;
    }
    let mut seen = HashSet::new();
    let mut rank = 0usize;
    let mut hits = 0usize;
    let mut sum = 0.0;
    for c in ranked {
        let c = c.as_ref();
        if !seen.insert(c) {
            continue;
        }
        rank += 1;
        if gold.contains(c) {
            hits += 1;
            sum += hits as f64 / rank as f64;
        }
    }
    sum / gold.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub proposed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    /// Scores at the configured settings (threshold and top_k).
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Mean average precision over units with at least one gold link.
    pub map: f64,
    pub curve: Vec<CurvePoint>,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        writeln!(s, "precision {:.4}  recall {:.4}  f1 {:.4}  map {:.4}", self.precision, self.recall, self.f1, self.map)
            .unwrap();
        if !self.curve.is_empty() {
            writeln!(s).unwrap();
            writeln!(s, "{:>9}  {:>9}  {:>9}  {:>9}  {:>8}", "threshold", "precision", "recall", "f1", "proposed").unwrap();
            for p in &self.curve {
                writeln!(
                    s,
                    "{:>9.3}  {:>9.4}  {:>9.4}  {:>9.4}  {:>8}",
                    p.threshold, p.precision, p.recall, p.f1, p.proposed
                )
                .unwrap();
            }
        }
        s
    }
}

fn pairs_of(suggestions: &[Suggestion]) -> impl Iterator<Item = Pair> + '_ {
    suggestions
        .iter()
        .map(|s| (s.unit_id.clone(), s.concept_id.clone()))
}

/// Scores `units` at every threshold with no top-k cut and no rejects.
///
/// Top-level precision, recall and f1 use `settings` unchanged (without
/// rejects); MAP comes from the full rankings.
pub fn threshold_sweep(
    index: &ConceptIndex,
    units: &[TraceUnit],
    gold: &GoldSet,
    settings: &RecommenderSettings,
    thresholds: &[f64],
) -> Result<MetricsReport, EvalError> {
    if let Some(bad) = thresholds.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(EvalError::InvalidArgument(format!("threshold {bad} is outside [0, 1]")));
    }
    if thresholds.windows(2).any(|w| w[1] <= w[0]) {
        return Err(EvalError::InvalidArgument(
            "thresholds must be strictly increasing".into(),
        ));
    }

    let rankings: BTreeMap<&str, Vec<Suggestion>> = units
        .iter()
        .map(|u| (u.unit_id.as_str(), index.rank(&index.analyze(u))))
        .collect();

    let proposed_at = |s: &RecommenderSettings| -> BTreeSet<Pair> {
        rankings
            .values()
            .flat_map(|r| pairs_of(&select(r.clone(), s, &NoRejects)).collect::<Vec<_>>())
            .collect()
    };

    let mut curve = Vec::with_capacity(thresholds.len());
    for &t in thresholds {
        let s = RecommenderSettings::new(t, settings.max_rejects(), usize::MAX)
            .map_err(|e| EvalError::InvalidArgument(e.to_string()))?;
        let proposed = proposed_at(&s);
        let pr = precision_recall(&proposed, gold);
        curve.push(CurvePoint {
            threshold: t,
            precision: pr.precision,
            recall: pr.recall,
            f1: pr.f1,
            proposed: proposed.len(),
        });
    }

    let top = precision_recall(&proposed_at(settings), gold);

    let gold_by_unit = gold.by_unit();
    let aps: Vec<f64> = gold_by_unit
        .iter()
        .map(|(unit, concepts)| {
            let ranked: Vec<&str> = rankings
                .get(unit)
                .map(|r| r.iter().map(|s| s.concept_id.as_str()).collect())
                .unwrap_or_default();
            average_precision(&ranked, concepts)
        })
        .collect();
    let map = if aps.is_empty() {
        0.0
    } else {
        aps.iter().sum::<f64>() / aps.len() as f64
    };

    Ok(MetricsReport {
        precision: top.precision,
        recall: top.recall,
        f1: top.f1,
        map,
        curve,
    })
}
