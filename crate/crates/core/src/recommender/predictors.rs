//! The four lexical predictors that feed the confidence score.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::taxonomy::Concept;
use crate::textproc::{tokenize, LangConfig, Token, TraceUnit};

/// A trace unit after tokenization.
#[derive(Debug, Clone)]
pub struct AnalyzedUnit {
    pub unit_id: String,
    pub text: String,
    pub tokens: Vec<Token>,
    /// Parallel to `tokens`: false for stopwords.
    content: Vec<bool>,
    stems: HashSet<String>,
}

impl AnalyzedUnit {
    pub fn new(unit: &TraceUnit, cfg: &LangConfig) -> Self {
        Self::from_text(&unit.unit_id, &unit.text, cfg)
    }

    pub fn from_text(unit_id: &str, text: &str, cfg: &LangConfig) -> Self {
        let tokens = tokenize(text, cfg);
        let content: Vec<bool> = tokens.iter().map(|t| !cfg.is_stopword(t)).collect();
        let stems = tokens
            .iter()
            .zip(&content)
            .filter(|(_, keep)| **keep)
            .map(|(t, _)| t.stem.clone())
            .collect();
        AnalyzedUnit {
            unit_id: unit_id.to_string(),
            text: text.to_string(),
            tokens,
            content,
            stems,
        }
    }

    /// Tokens that are not stopwords.
    pub fn content_tokens(&self) -> impl Iterator<Item = &Token> {
        self.tokens.iter().zip(&self.content).filter(|(_, k)| **k).map(|(t, _)| t)
    }
}

#[derive(Debug, Clone)]
pub struct LabelProfile {
    pub text: String,
    pub tokens: Vec<Token>,
    /// Stems of the non-stopword tokens.
    pub stems: BTreeSet<String>,
}

/// Tokenized labels of one concept.
#[derive(Debug, Clone)]
pub struct ConceptProfile {
    pub id: String,
    pub labels: Vec<LabelProfile>,
}

impl ConceptProfile {
    pub fn new(concept: &Concept, cfg: &LangConfig) -> Self {
        let labels = concept
            .labels()
            .map(|label| {
                let tokens = tokenize(label, cfg);
                let stems = tokens
                    .iter()
                    .filter(|t| !cfg.is_stopword(t))
                    .map(|t| t.stem.clone())
                    .collect();
                LabelProfile {
                    text: label.to_string(),
                    tokens,
                    stems,
                }
            })
            .collect();
        ConceptProfile {
            id: concept.id.clone(),
            labels,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvidenceKind {
    ExactLabel,
    StemOverlap,
    Trigram,
}

/// A span of the unit text (character offsets, end exclusive) that supports
/// a suggestion, with the label it matched.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Evidence {
    pub start: usize,
    pub end: usize,
    pub kind: EvidenceKind,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub score: f64,
    pub evidence: Vec<Evidence>,
}

impl Scored {
    fn zero() -> Self {
        Scored {
            score: 0.0,
            evidence: Vec::new(),
        }
    }
}

/// 1 when the normalized tokens of some label occur contiguously, in order,
/// in the unit. Evidence holds the first occurrence for every matching label.
pub fn score_exact_label(unit: &AnalyzedUnit, concept: &ConceptProfile) -> Scored {
    let mut out = Scored::zero();
    for label in &concept.labels {
        let n = label.tokens.len();
        if n == 0 || n > unit.tokens.len() {
            continue;
        }
        let hit = unit.tokens.windows(n).position(|w| {
            w.iter()
                .zip(&label.tokens)
                .all(|(u, l)| u.normalized == l.normalized)
        });
        if let Some(i) = hit {
            out.score = 1.0;
            out.evidence.push(Evidence {
                start: unit.tokens[i].start,
                end: unit.tokens[i + n - 1].end,
                kind: EvidenceKind::ExactLabel,
                label: label.text.clone(),
            });
        }
    }
    out
}

/// Best containment of a label's stem set in the unit's stem set.
pub fn score_stem_overlap(unit: &AnalyzedUnit, concept: &ConceptProfile) -> Scored {
    let mut best: Option<(f64, &LabelProfile)> = None;
    for label in &concept.labels {
        if label.stems.is_empty() {
            continue;
        }
        let shared = label.stems.iter().filter(|s| unit.stems.contains(*s)).count();
        let score = shared as f64 / label.stems.len() as f64;
        if best.is_none_or(|(b, _)| score > b) {
            best = Some((score, label));
        }
    }
    match best {
        Some((score, label)) if score > 0.0 => Scored {
            score,
            evidence: unit
                .content_tokens()
                .filter(|t| label.stems.contains(&t.stem))
                .map(|t| Evidence {
                    start: t.start,
                    end: t.end,
                    kind: EvidenceKind::StemOverlap,
                    label: label.text.clone(),
                })
                .collect(),
        },
        _ => Scored::zero(),
    }
}

/// Best character-trigram Dice coefficient between a noun-like unit token
/// and any label token.
pub fn score_trigram(unit: &AnalyzedUnit, concept: &ConceptProfile) -> Scored {
    let mut best: Option<(f64, &Token, &LabelProfile)> = None;
    for u in unit.tokens.iter().filter(|t| t.noun_like) {
        for label in &concept.labels {
            for l in &label.tokens {
                let score = dice(&u.normalized, &l.normalized);
                if best.is_none_or(|(b, _, _)| score > b) {
                    best = Some((score, u, label));
                }
            }
        }
    }
    match best {
        Some((score, token, label)) if score > 0.0 => Scored {
            score,
            evidence: vec![Evidence {
                start: token.start,
                end: token.end,
                kind: EvidenceKind::Trigram,
                label: label.text.clone(),
            }],
        },
        _ => Scored::zero(),
    }
}

fn trigrams(s: &str) -> HashSet<[char; 3]> {
    let chars: Vec<char> = s.chars().collect();
    chars.windows(3).map(|w| [w[0], w[1], w[2]]).collect()
}

/// Dice coefficient over unpadded character trigram sets. Tokens shorter
/// than three characters only match themselves.
pub fn dice(a: &str, b: &str) -> f64 {
    if a.chars().count() < 3 || b.chars().count() < 3 {
        return if a == b { 1.0 } else { 0.0 };
    }
    let ta = trigrams(a);
    let tb = trigrams(b);
    let shared = ta.intersection(&tb).count();
    2.0 * shared as f64 / (ta.len() + tb.len()) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textproc::{char_slice, Lang};

    fn cfg() -> LangConfig {
        LangConfig::new(Lang::En)
    }

    fn unit(text: &str) -> AnalyzedUnit {
        AnalyzedUnit::from_text("u", text, &cfg())
    }

    fn concept(label: &str, alts: &[&str]) -> ConceptProfile {
        ConceptProfile::new(
            &Concept::new("c", label).with_alt_labels(alts.iter().copied()),
            &cfg(),
        )
    }

    #[test]
    fn exact_label_contiguous_match() {
        let u = unit("Install the pump station near the road");
        let s = score_exact_label(&u, &concept("pump station", &[]));
        assert_eq!(s.score, 1.0);
        let ev = &s.evidence[0];
        assert_eq!((ev.start, ev.end), (u.tokens[2].start, u.tokens[3].end));
        assert_eq!(char_slice(&u.text, ev.start, ev.end), "pump station");

        assert_eq!(score_exact_label(&u, &concept("valve", &[])).score, 0.0);
        assert_eq!(score_exact_label(&unit("station pump"), &concept("pump station", &[])).score, 0.0);
    }

    #[test]
    fn exact_label_uses_alt_labels_and_ignores_case() {
        let s = score_exact_label(&unit("Mount a CHECK-valve."), &concept("Non-return valve", &["check valve"]));
        assert_eq!(s.score, 1.0);
        assert_eq!(s.evidence[0].label, "check valve");
    }

    #[test]
    fn stem_containment() {
        let c = concept("pump station", &[]);
        assert_eq!(score_stem_overlap(&unit("install pump station"), &c).score, 1.0);
        assert_eq!(score_stem_overlap(&unit("pump"), &c).score, 0.5);
        assert_eq!(score_stem_overlap(&unit("Install pumps"), &concept("pump", &[])).score, 1.0);
        assert_eq!(score_stem_overlap(&unit("pump"), &concept("the", &[])).score, 0.0);
        // best label wins
        let s = score_stem_overlap(&unit("the valve"), &concept("pump station", &["valve"]));
        assert_eq!(s.score, 1.0);
        assert_eq!(s.evidence.len(), 1);
    }

    #[test]
    fn dice_values() {
        assert!((dice("pump", "pumps") - 0.8).abs() < 1e-12);
        assert_eq!(dice("valve", "valve"), 1.0);
        assert_eq!(dice("ab", "ab"), 1.0);
        assert_eq!(dice("ab", "ba"), 0.0);
        assert_eq!(dice("ab", "abc"), 0.0);
        assert_eq!(dice("abc", "xyz"), 0.0);
    }

    #[test]
    fn trigram_uses_noun_like_unit_tokens_only() {
        let c = concept("Pumps", &[]);
        let s = score_trigram(&unit("the pump"), &c);
        assert!((s.score - 0.8).abs() < 1e-12);
        assert_eq!(s.evidence[0].start, 4);
        // "the" is a stopword and never compared
        assert_eq!(score_trigram(&unit("the"), &concept("the", &[])).score, 0.0);
    }
}
