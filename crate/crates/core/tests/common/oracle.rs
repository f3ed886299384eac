//! Dense brute-force TF-IDF cosine, written without the index types.

use std::collections::{BTreeMap, BTreeSet};

use taxotrace::taxonomy::Taxonomy;
use taxotrace::textproc::{tokenize, LangConfig};

pub fn weighted_terms(parts: &[&str], cfg: &LangConfig) -> Vec<(String, f64)> {
    parts
        .iter()
        .flat_map(|t| tokenize(t, cfg))
        .filter(|t| !cfg.is_stopword(t))
        .map(|t| (t.stem.clone(), if t.noun_like { 2.0 } else { 1.0 }))
        .collect()
}

pub struct DenseOracle {
    vocab: Vec<String>,
    idf: Vec<f64>,
    n: f64,
    pub docs: Vec<(String, Vec<f64>)>,
}

impl DenseOracle {
    pub fn build(tax: &Taxonomy, cfg: &LangConfig) -> Self {
        let raw: Vec<(String, Vec<(String, f64)>)> = tax
            .concepts()
            .map(|c| {
                let mut parts = vec![c.pref_label.as_str()];
                parts.extend(c.alt_labels.iter().map(String::as_str));
                if let Some(d) = &c.definition {
                    parts.push(d);
                }
                (c.id.clone(), weighted_terms(&parts, cfg))
            })
            .collect();
        let vocab: Vec<String> = raw
            .iter()
            .flat_map(|(_, ts)| ts.iter().map(|(t, _)| t.clone()))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let n = raw.len() as f64;
        let idf: Vec<f64> = vocab
            .iter()
            .map(|term| {
                let df = raw.iter().filter(|(_, ts)| ts.iter().any(|(t, _)| t == term)).count() as f64;
                ((n + 1.0) / (df + 1.0)).ln() + 1.0
            })
            .collect();
        let docs = raw
            .into_iter()
            .map(|(id, ts)| (id, dense(&vocab, &idf, &ts)))
            .collect();
        DenseOracle { vocab, idf, n, docs }
    }

    /// Cosine of `text` against every concept, in concept id order.
    pub fn cosines(&self, text: &str, cfg: &LangConfig) -> Vec<(String, f64)> {
        let terms = weighted_terms(&[text], cfg);
        let uv = dense(&self.vocab, &self.idf, &terms);
        // terms outside the taxonomy vocabulary have df = 0
        let mut unseen: BTreeMap<&str, f64> = BTreeMap::new();
        for (t, f) in &terms {
            if !self.vocab.contains(t) {
                *unseen.entry(t).or_default() += f;
            }
        }
        let w0 = (self.n + 1.0).ln() + 1.0;
        let unseen_norm2: f64 = unseen.values().map(|f| (f * w0).powi(2)).sum();
        let nu = (uv.iter().map(|x| x * x).sum::<f64>() + unseen_norm2).sqrt();
        self.docs
            .iter()
            .map(|(id, dv)| {
                let dot: f64 = uv.iter().zip(dv).map(|(x, y)| x * y).sum();
                let nd = dv.iter().map(|x| x * x).sum::<f64>().sqrt();
                let c = if nu == 0.0 || nd == 0.0 { 0.0 } else { dot / (nu * nd) };
                (id.clone(), c)
            })
            .collect()
    }
}

fn dense(vocab: &[String], idf: &[f64], terms: &[(String, f64)]) -> Vec<f64> {
    vocab
        .iter()
        .zip(idf)
        .map(|(v, w)| terms.iter().filter(|(t, _)| t == v).map(|(_, f)| f).sum::<f64>() * w)
        .collect()
}
