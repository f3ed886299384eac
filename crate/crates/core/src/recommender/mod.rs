//! Concept suggestions for trace units.
//!
//! Four lexical predictors (exact label match, stem containment, trigram
//! similarity, TF-IDF cosine) are combined by a convex weight vector into a
//! confidence. [`ConceptIndex::recommend`] applies the confidence threshold
//! and reject-based suppression before truncating to `top_k`.

mod index;
mod predictors;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::index::{
    concept_document_tokens, idf, term_frequencies, ConceptIndex, TermVector, NOUN_TF_FACTOR,
};
pub use self::predictors::{
    dice, score_exact_label, score_stem_overlap, score_trigram, AnalyzedUnit, ConceptProfile,
    Evidence, EvidenceKind, LabelProfile, Scored,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecommenderError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown concept `{0}`")]
    NotFound(String),
}

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Convex combination weights for (exact, stem, trigram, tfidf).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredictorWeights([f64; 4]);

impl PredictorWeights {
    pub const DEFAULT: [f64; 4] = [0.4, 0.2, 0.2, 0.2];

    pub fn new(w: [f64; 4]) -> Result<Self, RecommenderError> {
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(RecommenderError::InvalidArgument(format!(
                "weights must be finite and non-negative, got {w:?}"
            )));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(RecommenderError::InvalidArgument(format!(
                "weights must sum to 1, got {sum}"
            )));
        }
        Ok(PredictorWeights(w))
    }

    pub fn as_array(&self) -> [f64; 4] {
        self.0
    }
}

impl Default for PredictorWeights {
    fn default() -> Self {
        PredictorWeights(Self::DEFAULT)
    }
}

impl std::str::FromStr for PredictorWeights {
    type Err = RecommenderError;

    /// Parses `w1,w2,w3,w4`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| RecommenderError::InvalidArgument(format!("bad weight list `{s}`: {e}")))?;
        let w: [f64; 4] = parts.try_into().map_err(|p: Vec<f64>| {
            RecommenderError::InvalidArgument(format!("expected 4 weights, got {}", p.len()))
        })?;
        PredictorWeights::new(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictorScores {
    pub exact: f64,
    pub stem: f64,
    pub trigram: f64,
    pub tfidf: f64,
}

impl PredictorScores {
    pub fn as_array(&self) -> [f64; 4] {
        [self.exact, self.stem, self.trigram, self.tfidf]
    }
}

impl From<[f64; 4]> for PredictorScores {
    fn from([exact, stem, trigram, tfidf]: [f64; 4]) -> Self {
        PredictorScores {
            exact,
            stem,
            trigram,
            tfidf,
        }
    }
}

/// `Σ wᵢ·sᵢ`. Every score must lie in [0, 1].
pub fn combine_scores(
    scores: &PredictorScores,
    weights: &PredictorWeights,
) -> Result<f64, RecommenderError> {
    let s = scores.as_array();
    if let Some(bad) = s.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(RecommenderError::InvalidArgument(format!(
            "predictor score {bad} is outside [0, 1]"
        )));
    }
    let sum: f64 = s.iter().zip(weights.0).map(|(s, w)| s * w).sum();
    Ok(sum.clamp(0.0, 1.0))
}

/// Display settings for suggestions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSettings")]
pub struct RecommenderSettings {
    threshold: f64,
    max_rejects: u32,
    top_k: usize,
}

#[derive(Deserialize)]
struct RawSettings {
    threshold: f64,
    max_rejects: u32,
    top_k: usize,
}

impl TryFrom<RawSettings> for RecommenderSettings {
    type Error = RecommenderError;

    fn try_from(r: RawSettings) -> Result<Self, Self::Error> {
        RecommenderSettings::new(r.threshold, r.max_rejects, r.top_k)
    }
}

impl RecommenderSettings {
    pub const DEFAULT_THRESHOLD: f64 = 0.5;
    pub const DEFAULT_MAX_REJECTS: u32 = 3;
    pub const DEFAULT_TOP_K: usize = 5;

    pub fn new(threshold: f64, max_rejects: u32, top_k: usize) -> Result<Self, RecommenderError> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(RecommenderError::InvalidArgument(format!(
                "threshold {threshold} is outside [0, 1]"
            )));
        }
        if max_rejects < 1 {
            return Err(RecommenderError::InvalidArgument(
                "max_rejects must be at least 1".into(),
            ));
        }
        if top_k < 1 {
            return Err(RecommenderError::InvalidArgument(
                "top_k must be at least 1".into(),
            ));
        }
        Ok(RecommenderSettings {
            threshold,
            max_rejects,
            top_k,
        })
    }

    /// No truncation, no threshold.
    pub fn unbounded(max_rejects: u32) -> Self {
        RecommenderSettings {
            threshold: 0.0,
            max_rejects: max_rejects.max(1),
            top_k: usize::MAX,
        }
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn max_rejects(&self) -> u32 {
        self.max_rejects
    }

    pub fn top_k(&self) -> usize {
        self.top_k
    }

    pub fn with_threshold(self, threshold: f64) -> Result<Self, RecommenderError> {
        Self::new(threshold, self.max_rejects, self.top_k)
    }

    pub fn with_top_k(self, top_k: usize) -> Result<Self, RecommenderError> {
        Self::new(self.threshold, self.max_rejects, top_k)
    }
}

impl Default for RecommenderSettings {
    fn default() -> Self {
        RecommenderSettings {
            threshold: Self::DEFAULT_THRESHOLD,
            max_rejects: Self::DEFAULT_MAX_REJECTS,
            top_k: Self::DEFAULT_TOP_K,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub unit_id: String,
    pub concept_id: String,
    pub confidence: f64,
    pub scores: PredictorScores,
    pub evidence: Vec<Evidence>,
}

/// Source of reject counts per (unit, concept) pair.
pub trait RejectCounts {
    fn reject_count(&self, unit_id: &str, concept_id: &str) -> u32;
}

/// No pair has ever been rejected.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoRejects;

impl RejectCounts for NoRejects {
    fn reject_count(&self, _: &str, _: &str) -> u32 {
        0
    }
}

impl RejectCounts for HashMap<(String, String), u32> {
    fn reject_count(&self, unit_id: &str, concept_id: &str) -> u32 {
        self.get(&(unit_id.to_string(), concept_id.to_string()))
            .copied()
            .unwrap_or(0)
    }
}

impl RejectCounts for BTreeMap<(String, String), u32> {
    fn reject_count(&self, unit_id: &str, concept_id: &str) -> u32 {
        self.get(&(unit_id.to_string(), concept_id.to_string()))
            .copied()
            .unwrap_or(0)
    }
}

/// Filters and orders already scored candidates: drops confidence below the
/// threshold and suppressed pairs, sorts by confidence descending then
/// concept id, keeps `top_k`.
pub fn select<R>(
    mut candidates: Vec<Suggestion>,
    settings: &RecommenderSettings,
    rejects: &R,
) -> Vec<Suggestion>
where
    R: RejectCounts + ?Sized,
{
    candidates.retain(|s| {
        s.confidence >= settings.threshold
            && rejects.reject_count(&s.unit_id, &s.concept_id) < settings.max_rejects
    });
    candidates.sort_by(|a, b| {
        b.confidence
            .total_cmp(&a.confidence)
            .then_with(|| a.concept_id.cmp(&b.concept_id))
    });
    candidates.truncate(settings.top_k);
    candidates
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::{Concept, SourceFormat, SourceMeta, Taxonomy};
    use crate::textproc::{Lang, LangConfig, TraceUnit};

    fn candidate(concept: &str, confidence: f64) -> Suggestion {
        Suggestion {
            unit_id: "u".into(),
            concept_id: concept.into(),
            confidence,
            scores: [confidence; 4].into(),
            evidence: vec![],
        }
    }

    fn ids(s: &[Suggestion]) -> Vec<&str> {
        s.iter().map(|s| s.concept_id.as_str()).collect()
    }

    #[test]
    fn combine_is_a_dot_product() {
        let w = PredictorWeights::new([0.4, 0.2, 0.2, 0.2]).unwrap();
        assert_eq!(combine_scores(&[1.0, 0.0, 0.0, 0.0].into(), &w).unwrap(), 0.4);
        assert_eq!(combine_scores(&[0.0; 4].into(), &w).unwrap(), 0.0);
        for w in [[0.4, 0.2, 0.2, 0.2], [0.1, 0.3, 0.3, 0.3], [0.0, 0.0, 1.0, 0.0]] {
            let w = PredictorWeights::new(w).unwrap();
            assert!((combine_scores(&[1.0; 4].into(), &w).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(combine_scores(&[1.2, 0.0, 0.0, 0.0].into(), &w).is_err());
        assert!(combine_scores(&[f64::NAN, 0.0, 0.0, 0.0].into(), &w).is_err());
    }

    #[test]
    fn weights_validation() {
        assert!(PredictorWeights::new([0.5, 0.5, 0.5, 0.0]).is_err());
        assert!(PredictorWeights::new([1.2, -0.2, 0.0, 0.0]).is_err());
        assert!(PredictorWeights::new([f64::NAN, 0.0, 0.0, 1.0]).is_err());
        assert_eq!(
            "0.4, 0.2,0.2,0.2".parse::<PredictorWeights>().unwrap(),
            PredictorWeights::default()
        );
        assert!("0.5,0.5".parse::<PredictorWeights>().is_err());
        assert!("a,b,c,d".parse::<PredictorWeights>().is_err());
    }

    #[test]
    fn settings_validation() {
        assert!(RecommenderSettings::new(1.1, 3, 5).is_err());
        assert!(RecommenderSettings::new(-0.1, 3, 5).is_err());
        assert!(RecommenderSettings::new(0.5, 0, 5).is_err());
        assert!(RecommenderSettings::new(0.5, 3, 0).is_err());
        let s: Result<RecommenderSettings, _> =
            serde_json::from_str(r#"{"threshold":2.0,"max_rejects":3,"top_k":5}"#);
        assert!(s.is_err());
        let d = RecommenderSettings::default();
        assert_eq!((d.threshold(), d.max_rejects(), d.top_k()), (0.5, 3, 5));
    }

    #[test]
    fn threshold_rule() {
        let s = RecommenderSettings::new(0.5, 3, 10).unwrap();
        let out = select(vec![candidate("A", 0.9), candidate("B", 0.4)], &s, &NoRejects);
        assert_eq!(ids(&out), ["A"]);
    }

    #[test]
    fn suppression_rule() {
        let s = RecommenderSettings::new(0.0, 3, 10).unwrap();
        let mut rejects = HashMap::new();
        rejects.insert(("u".to_string(), "A".to_string()), 3);
        assert!(select(vec![candidate("A", 0.9)], &s, &rejects).is_empty());
        rejects.insert(("u".to_string(), "A".to_string()), 2);
        assert_eq!(select(vec![candidate("A", 0.9)], &s, &rejects).len(), 1);
    }

    #[test]
    fn tie_break_and_truncation() {
        let s = RecommenderSettings::new(0.0, 3, 10).unwrap();
        let out = select(vec![candidate("B", 0.7), candidate("A", 0.7)], &s, &NoRejects);
        assert_eq!(ids(&out), ["A", "B"]);
        let s = s.with_top_k(1).unwrap();
        let out = select(vec![candidate("B", 0.7), candidate("C", 0.8), candidate("A", 0.7)], &s, &NoRejects);
        assert_eq!(ids(&out), ["C"]);
    }

    fn three_concepts() -> ConceptIndex {
        let concepts = vec![
            Concept::new("c1", "pump station"),
            Concept::new("c2", "valve"),
            Concept::new("c3", "pump"),
        ];
        let t = Taxonomy::from_concepts(concepts, SourceMeta::new(SourceFormat::Memory, "t"))
            .unwrap()
            .taxonomy;
        ConceptIndex::build(&t, LangConfig::new(Lang::En), PredictorWeights::default())
    }

    #[test]
    fn tfidf_three_document_ranking() {
        let idx = three_concepts();
        let u = AnalyzedUnit::from_text("u", "the pump", idx.cfg());
        let c1 = idx.score_tfidf_cosine(&u, "c1").unwrap();
        let c2 = idx.score_tfidf_cosine(&u, "c2").unwrap();
        let c3 = idx.score_tfidf_cosine(&u, "c3").unwrap();
        assert!((c3 - 1.0).abs() < 1e-12);
        // hand computation: idf(pump) = ln(4/3)+1, idf(station) = ln(2)+1,
        // both terms noun-like (tf 2), unit vector = (1, 0)
        let ip = (4.0f64 / 3.0).ln() + 1.0;
        let is = 2.0f64.ln() + 1.0;
        let expected = ip / (ip * ip + is * is).sqrt();
        assert!((c1 - expected).abs() < 1e-12, "{c1} vs {expected}");
        assert!(c1 > 0.0 && c1 < c3);
        assert_eq!(c2, 0.0);
    }

    #[test]
    fn tfidf_degenerate_units() {
        let idx = three_concepts();
        let u = AnalyzedUnit::from_text("u", "the road is long", idx.cfg());
        for c in ["c1", "c2", "c3"] {
            assert_eq!(idx.score_tfidf_cosine(&u, c).unwrap(), 0.0);
        }
        let u = AnalyzedUnit::from_text("u", "", idx.cfg());
        assert_eq!(idx.score_tfidf_cosine(&u, "c1").unwrap(), 0.0);
    }

    #[test]
    fn tfidf_identity_on_full_document() {
        let concept = Concept::new("p", "Pump")
            .with_alt_labels(["pumping unit"])
            .with_definition("A machine that lifts water to a higher level.");
        let other = Concept::new("v", "Valve").with_definition("A device that regulates water flow.");
        let t = Taxonomy::from_concepts(vec![concept, other], SourceMeta::new(SourceFormat::Memory, "t"))
            .unwrap()
            .taxonomy;
        let idx = ConceptIndex::build(&t, LangConfig::new(Lang::En), PredictorWeights::default());
        let text = "Pump pumping unit A machine that lifts water to a higher level.";
        let u = AnalyzedUnit::from_text("u", text, idx.cfg());
        assert!((idx.score_tfidf_cosine(&u, "p").unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn recommend_end_to_end() {
        let idx = three_concepts();
        let unit = TraceUnit {
            unit_id: "u1".into(),
            doc_id: "d".into(),
            seq: 0,
            text: "Install the pump station".into(),
        };
        let out = idx.recommend(&unit, &RecommenderSettings::new(0.5, 3, 5).unwrap(), &NoRejects);
        assert_eq!(ids(&out), ["c1", "c3"]);
        for s in &out {
            let expect: f64 = s.scores.as_array().iter().zip(idx.weights().as_array()).map(|(s, w)| s * w).sum();
            assert!((s.confidence - expect).abs() < 1e-9);
        }
        let mut rejects = BTreeMap::new();
        rejects.insert(("u1".to_string(), "c1".to_string()), 3);
        let out = idx.recommend(&unit, &RecommenderSettings::new(0.5, 3, 5).unwrap(), &rejects);
        assert_eq!(ids(&out), ["c3"]);
    }
}
