use std::collections::{BTreeMap, HashMap};

use crate::taxonomy::{Concept, Taxonomy};
use crate::textproc::{tokenize, LangConfig, Token, TraceUnit};

use super::predictors::{
    score_exact_label, score_stem_overlap, score_trigram, AnalyzedUnit, ConceptProfile,
};
use super::{
    combine_scores, select, PredictorScores, PredictorWeights, RecommenderError,
    RecommenderSettings, RejectCounts, Suggestion,
};

/// Sparse term vector keyed by stem.
pub type TermVector = BTreeMap<String, f64>;

/// Noun-like tokens count twice toward term frequency.
pub const NOUN_TF_FACTOR: f64 = 2.0;

#[derive(Debug, Clone)]
struct IndexedConcept {
    profile: ConceptProfile,
    vector: TermVector,
}

/// TF-IDF vectors and label profiles for every concept of a taxonomy.
#[derive(Debug, Clone)]
pub struct ConceptIndex {
    cfg: LangConfig,
    weights: PredictorWeights,
    concepts: Vec<IndexedConcept>,
    positions: HashMap<String, usize>,
    df: BTreeMap<String, usize>,
    warnings: Vec<String>,
}

/// Raw term frequencies of the non-stopword tokens, noun-like tokens
/// weighted by [`NOUN_TF_FACTOR`].
pub fn term_frequencies<'a>(
    tokens: impl IntoIterator<Item = &'a Token>,
    cfg: &LangConfig,
) -> BTreeMap<String, f64> {
    let mut tf = BTreeMap::new();
    for t in tokens {
        if cfg.is_stopword(t) {
            continue;
        }
        let w = if t.noun_like { NOUN_TF_FACTOR } else { 1.0 };
        *tf.entry(t.stem.clone()).or_insert(0.0) += w;
    }
    tf
}

/// Tokens of the concept document: preferred label, alternative labels,
/// definition.
pub fn concept_document_tokens(concept: &Concept, cfg: &LangConfig) -> Vec<Token> {
    concept
        .labels()
        .chain(concept.definition.as_deref())
        .flat_map(|text| tokenize(text, cfg))
        .collect()
}

/// `ln((n + 1) / (df + 1)) + 1`, always positive.
pub fn idf(n: usize, df: usize) -> f64 {
    ((n as f64 + 1.0) / (df as f64 + 1.0)).ln() + 1.0
}

fn normalize(mut v: TermVector) -> TermVector {
    let norm = v.values().map(|w| w * w).sum::<f64>().sqrt();
    if norm > 0.0 {
        for w in v.values_mut() {
            *w /= norm;
        }
    }
    v
}

/// Dot product of two L2-normalized vectors, clamped to [0, 1].
fn cosine(a: &TermVector, b: &TermVector) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: f64 = small
        .iter()
        .filter_map(|(t, w)| large.get(t).map(|v| w * v))
        .sum();
    dot.clamp(0.0, 1.0)
}

impl ConceptIndex {
    pub fn build(taxonomy: &Taxonomy, cfg: LangConfig, weights: PredictorWeights) -> Self {
        let mut warnings = Vec::new();
        let docs: Vec<(ConceptProfile, BTreeMap<String, f64>)> = taxonomy
            .concepts()
            .map(|c| {
                let tokens = concept_document_tokens(c, &cfg);
                (ConceptProfile::new(c, &cfg), term_frequencies(&tokens, &cfg))
            })
            .collect();

        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for (_, tf) in &docs {
            for term in tf.keys() {
                *df.entry(term.clone()).or_insert(0) += 1;
            }
        }

        let n = docs.len();
        let mut concepts = Vec::with_capacity(n);
        let mut positions = HashMap::with_capacity(n);
        for (profile, tf) in docs {
            if tf.is_empty() {
                warnings.push(format!(
                    "concept `{}` has no index terms after stopword filtering",
                    profile.id
                ));
            }
            let vector = normalize(
                tf.into_iter()
                    .map(|(term, f)| {
                        let w = f * idf(n, df[&term]);
                        (term, w)
                    })
                    .collect(),
            );
            positions.insert(profile.id.clone(), concepts.len());
            concepts.push(IndexedConcept { profile, vector });
        }

        ConceptIndex {
            cfg,
            weights,
            concepts,
            positions,
            df,
            warnings,
        }
    }

    pub fn cfg(&self) -> &LangConfig {
        &self.cfg
    }

    pub fn weights(&self) -> PredictorWeights {
        self.weights
    }

    pub fn concept_count(&self) -> usize {
        self.concepts.len()
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.df.get(term).copied().unwrap_or(0)
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn vector(&self, concept_id: &str) -> Option<&TermVector> {
        self.positions.get(concept_id).map(|&i| &self.concepts[i].vector)
    }

    pub fn profile(&self, concept_id: &str) -> Option<&ConceptProfile> {
        self.positions.get(concept_id).map(|&i| &self.concepts[i].profile)
    }

    pub fn analyze(&self, unit: &TraceUnit) -> AnalyzedUnit {
        AnalyzedUnit::new(unit, &self.cfg)
    }

    /// Unit vector weighted with this index's document frequencies. Terms
    /// unseen in the index get `df = 0`.
    pub fn unit_vector(&self, unit: &AnalyzedUnit) -> TermVector {
        let n = self.concepts.len();
        normalize(
            term_frequencies(&unit.tokens, &self.cfg)
                .into_iter()
                .map(|(term, f)| {
                    let w = f * idf(n, self.document_frequency(&term));
                    (term, w)
                })
                .collect(),
        )
    }

    pub fn score_tfidf_cosine(
        &self,
        unit: &AnalyzedUnit,
        concept_id: &str,
    ) -> Result<f64, RecommenderError> {
        let concept = self
            .vector(concept_id)
            .ok_or_else(|| RecommenderError::NotFound(concept_id.to_string()))?;
        Ok(cosine(&self.unit_vector(unit), concept))
    }

    fn suggest(&self, unit: &AnalyzedUnit, unit_vector: &TermVector, entry: &IndexedConcept) -> Suggestion {
        let exact = score_exact_label(unit, &entry.profile);
        let stem = score_stem_overlap(unit, &entry.profile);
        let trigram = score_trigram(unit, &entry.profile);
        let scores = PredictorScores {
            exact: exact.score,
            stem: stem.score,
            trigram: trigram.score,
            tfidf: cosine(unit_vector, &entry.vector),
        };
        // all four predictors are bounded to [0, 1] by construction
        let confidence = combine_scores(&scores, &self.weights).unwrap_or(0.0);
        let mut evidence: Vec<_> = exact
            .evidence
            .into_iter()
            .chain(stem.evidence)
            .chain(trigram.evidence)
            .collect();
        evidence.sort();
        evidence.dedup();
        Suggestion {
            unit_id: unit.unit_id.clone(),
            concept_id: entry.profile.id.clone(),
            confidence,
            scores,
            evidence,
        }
    }

    /// Scores one (unit, concept) pair.
    pub fn score(&self, unit: &AnalyzedUnit, concept_id: &str) -> Result<Suggestion, RecommenderError> {
        let &i = self
            .positions
            .get(concept_id)
            .ok_or_else(|| RecommenderError::NotFound(concept_id.to_string()))?;
        Ok(self.suggest(unit, &self.unit_vector(unit), &self.concepts[i]))
    }

    /// Every concept scored and ranked: confidence descending, ties by
    /// concept id ascending. No filtering.
    pub fn rank(&self, unit: &AnalyzedUnit) -> Vec<Suggestion> {
        let uv = self.unit_vector(unit);
        let mut all: Vec<Suggestion> = self.concepts.iter().map(|e| self.suggest(unit, &uv, e)).collect();
        all.sort_by(|a, b| {
            b.confidence
                .total_cmp(&a.confidence)
                .then_with(|| a.concept_id.cmp(&b.concept_id))
        });
        all
    }

    /// Ranked suggestions above `settings.threshold`, without pairs rejected
    /// `settings.max_rejects` times or more, truncated to `settings.top_k`.
    pub fn recommend<R>(
        &self,
        unit: &TraceUnit,
        settings: &RecommenderSettings,
        rejects: &R,
    ) -> Vec<Suggestion>
    where
        R: RejectCounts + ?Sized,
    {
        select(self.rank(&self.analyze(unit)), settings, rejects)
    }
}
