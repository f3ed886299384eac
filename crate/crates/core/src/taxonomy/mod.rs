//! Hierarchical taxonomies: the concept model, validation, and queries.
//!
//! A [`Taxonomy`] can only be obtained through validation, so every value of
//! the type is a forest with unique ids, non-empty preferred labels, and
//! parents that resolve inside the same taxonomy.

mod csv_io;
mod turtle;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::csv_io::{parse_taxonomy_csv, to_canonical_csv, CSV_COLUMNS};
pub use self::turtle::{parse_taxonomy_turtle, TurtleOptions, SKOS_NS};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub id: String,
    /// Short notation such as a classification code.
    pub code: Option<String>,
    pub pref_label: String,
    /// Synonyms, sorted, without duplicates and without the preferred label.
    pub alt_labels: Vec<String>,
    pub definition: Option<String>,
    pub parent: Option<String>,
}

impl Concept {
    pub fn new(id: impl Into<String>, pref_label: impl Into<String>) -> Self {
        Concept {
            id: id.into(),
            code: None,
            pref_label: pref_label.into(),
            alt_labels: Vec::new(),
            definition: None,
            parent: None,
        }
    }

    pub fn with_parent(mut self, parent: impl Into<String>) -> Self {
        self.parent = Some(parent.into());
        self
    }

    pub fn with_code(mut self, code: impl Into<String>) -> Self {
        self.code = Some(code.into());
        self
    }

    pub fn with_alt_labels<I, S>(mut self, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.alt_labels = labels.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_definition(mut self, definition: impl Into<String>) -> Self {
        self.definition = Some(definition.into());
        self
    }

    /// Preferred label followed by the alternative labels.
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.pref_label.as_str()).chain(self.alt_labels.iter().map(String::as_str))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceFormat {
    Csv,
    Turtle,
    Memory,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceMeta {
    pub format: SourceFormat,
    pub name: String,
}

impl SourceMeta {
    pub fn new(format: SourceFormat, name: impl Into<String>) -> Self {
        SourceMeta {
            format,
            name: name.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IssueKind {
    Cycle,
    DanglingParent,
    DuplicateId,
    EmptyLabel,
    PolyHierarchy,
    // warnings
    UnsupportedPredicate,
    DuplicateLabel,
    IgnoredValue,
    IgnoredSubject,
}

impl fmt::Display for IssueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            IssueKind::Cycle => "cycle",
            IssueKind::DanglingParent => "dangling-parent",
            IssueKind::DuplicateId => "duplicate-id",
            IssueKind::EmptyLabel => "empty-label",
            IssueKind::PolyHierarchy => "poly-hierarchy",
            IssueKind::UnsupportedPredicate => "unsupported-predicate",
            IssueKind::DuplicateLabel => "duplicate-label",
            IssueKind::IgnoredValue => "ignored-value",
            IssueKind::IgnoredSubject => "ignored-subject",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub kind: IssueKind,
    /// The offending concept id. For cycles, the smallest id on the cycle.
    pub id: String,
    pub message: String,
}

impl Issue {
    pub fn new(kind: IssueKind, id: impl Into<String>, message: impl Into<String>) -> Self {
        Issue {
            kind,
            id: id.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]: {}", self.kind, self.id, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn has_error(&self, kind: IssueKind, id: &str) -> bool {
        self.errors.iter().any(|e| e.kind == kind && e.id == id)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        write!(
            f,
            "{} errors, {} warnings",
            self.errors.len(),
            self.warnings.len()
        )
    }
}

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("taxonomy failed validation: {} error(s)", .0.errors.len())]
    Invalid(ValidationReport),
    #[error("invalid UTF-8 at byte offset {offset}")]
    Encoding { offset: usize },
    #[error("CSV header is missing column `{0}`")]
    MissingColumn(String),
    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("Turtle syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown concept `{0}`")]
    NotFound(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// A validated taxonomy together with the non-fatal warnings produced while
/// importing it.
#[derive(Debug, Clone)]
pub struct Imported {
    pub taxonomy: Taxonomy,
    pub warnings: Vec<Issue>,
}

impl Imported {
    pub fn report(&self) -> ValidationReport {
        ValidationReport {
            errors: Vec::new(),
            warnings: self.warnings.clone(),
        }
    }
}

/// Immutable, validated forest of concepts.
///
/// Equality compares concepts and roots only; the source metadata is not
/// part of a taxonomy's identity.
#[derive(Debug, Clone, Serialize)]
pub struct Taxonomy {
    concepts: BTreeMap<String, Concept>,
    roots: Vec<String>,
    depth: usize,
    source: SourceMeta,
}

impl PartialEq for Taxonomy {
    fn eq(&self, other: &Self) -> bool {
        self.concepts == other.concepts && self.roots == other.roots
    }
}

impl Taxonomy {
    /// Validates `concepts` and builds a taxonomy from them.
    pub fn from_concepts(
        concepts: Vec<Concept>,
        source: SourceMeta,
    ) -> Result<Imported, TaxonomyError> {
        let mut builder = TaxonomyBuilder::default();
        for c in concepts {
            builder.push(c);
        }
        builder.build(source)
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Concept> {
        self.concepts.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.concepts.contains_key(id)
    }

    /// Concepts in ascending id order.
    pub fn concepts(&self) -> impl ExactSizeIterator<Item = &Concept> {
        self.concepts.values()
    }

    pub fn roots(&self) -> &[String] {
        &self.roots
    }

    /// Number of concepts on the longest root-to-leaf chain.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn source(&self) -> &SourceMeta {
        &self.source
    }

    pub fn children<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Concept> + 'a {
        self.concepts
            .values()
            .filter(move |c| c.parent.as_deref() == Some(id))
    }

    /// Parent chain from the immediate parent up to the root.
    pub fn ancestors(&self, id: &str) -> Result<Vec<&Concept>, TaxonomyError> {
        let mut current = self
            .concepts
            .get(id)
            .ok_or_else(|| TaxonomyError::NotFound(id.to_string()))?;
        let mut chain = Vec::new();
        while let Some(parent) = current.parent.as_deref() {
            // parents always resolve in a validated taxonomy
            current = &self.concepts[parent];
            chain.push(current);
        }
        Ok(chain)
    }

    /// Case-insensitive label and code search.
    ///
    /// Each concept is reported once with its best match kind. Results are
    /// ordered by match kind, then preferred label, then id.
    pub fn search_concepts(
        &self,
        query: &str,
        limit: usize,
    ) -> Result<Vec<SearchHit<'_>>, TaxonomyError> {
        let q = query.trim().to_lowercase();
        if q.is_empty() {
            return Err(TaxonomyError::InvalidArgument(
                "search query is empty".into(),
            ));
        }
        if limit == 0 {
            return Err(TaxonomyError::InvalidArgument(
                "limit must be positive".into(),
            ));
        }

        let mut hits: Vec<SearchHit<'_>> = self
            .concepts
            .values()
            .filter_map(|c| match_kind(c, &q).map(|kind| SearchHit { concept: c, kind }))
            .collect();
        hits.sort_by(|a, b| {
            a.kind
                .cmp(&b.kind)
                .then_with(|| a.concept.pref_label.cmp(&b.concept.pref_label))
                .then_with(|| a.concept.id.cmp(&b.concept.id))
        });
        hits.truncate(limit);
        Ok(hits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchKind {
    ExactLabel,
    Prefix,
    Substring,
    AltLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchHit<'a> {
    pub concept: &'a Concept,
    pub kind: MatchKind,
}

fn match_kind(concept: &Concept, q: &str) -> Option<MatchKind> {
    let label = concept.pref_label.to_lowercase();
    let code = concept.code.as_deref().map(str::to_lowercase);
    let code = code.as_deref();

    if label == q || code == Some(q) {
        Some(MatchKind::ExactLabel)
    } else if label.starts_with(q) || code.is_some_and(|c| c.starts_with(q)) {
        Some(MatchKind::Prefix)
    } else if label.contains(q) {
        Some(MatchKind::Substring)
    } else if concept
        .alt_labels
        .iter()
        .any(|a| a.to_lowercase().contains(q))
    {
        Some(MatchKind::AltLabel)
    } else {
        None
    }
}

/// Collects concepts and issues found by a parser before validation.
#[derive(Debug, Default)]
pub(crate) struct TaxonomyBuilder {
    concepts: Vec<Concept>,
    errors: Vec<Issue>,
    warnings: Vec<Issue>,
}

impl TaxonomyBuilder {
    pub(crate) fn push(&mut self, concept: Concept) {
        self.concepts.push(concept);
    }

    pub(crate) fn error(&mut self, issue: Issue) {
        self.errors.push(issue);
    }

    pub(crate) fn warn(&mut self, issue: Issue) {
        self.warnings.push(issue);
    }

    pub(crate) fn build(self, source: SourceMeta) -> Result<Imported, TaxonomyError> {
        let TaxonomyBuilder {
            concepts: raw,
            mut errors,
            mut warnings,
        } = self;

        let mut concepts: BTreeMap<String, Concept> = BTreeMap::new();
        for mut c in raw {
            if concepts.contains_key(&c.id) {
                errors.push(Issue::new(
                    IssueKind::DuplicateId,
                    &c.id,
                    format!("id `{}` is defined more than once", c.id),
                ));
                continue;
            }
            c.pref_label = c.pref_label.trim().to_string();
            if c.pref_label.is_empty() {
                errors.push(Issue::new(
                    IssueKind::EmptyLabel,
                    &c.id,
                    "preferred label is empty",
                ));
            }
            c.code = c.code.map(|s| s.trim().to_string()).filter(|s| !s.is_empty());
            c.definition = c
                .definition
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty());
            c.parent = c.parent.map(|s| s.trim().to_string()).filter(|s| !s.is_empty());
            c.alt_labels = normalize_alt_labels(&c.id, &c.pref_label, c.alt_labels, &mut warnings);
            concepts.insert(c.id.clone(), c);
        }

        for c in concepts.values() {
            if let Some(p) = &c.parent {
                if !concepts.contains_key(p) {
                    errors.push(Issue::new(
                        IssueKind::DanglingParent,
                        &c.id,
                        format!("parent `{p}` does not exist"),
                    ));
                }
            }
        }

        errors.extend(find_cycles(&concepts));

        if !errors.is_empty() {
            return Err(TaxonomyError::Invalid(ValidationReport { errors, warnings }));
        }

        let roots: Vec<String> = concepts
            .values()
            .filter(|c| c.parent.is_none())
            .map(|c| c.id.clone())
            .collect();
        let depth = concepts
            .keys()
            .map(|id| chain_len(&concepts, id))
            .max()
            .unwrap_or(0);

        Ok(Imported {
            taxonomy: Taxonomy {
                concepts,
                roots,
                depth,
                source,
            },
            warnings,
        })
    }
}

fn normalize_alt_labels(
    id: &str,
    pref: &str,
    labels: Vec<String>,
    warnings: &mut Vec<Issue>,
) -> Vec<String> {
    let mut seen: HashSet<String> = HashSet::new();
    seen.insert(pref.to_lowercase());
    let mut out = Vec::new();
    for label in labels {
        let label = label.trim();
        if label.is_empty() {
            continue;
        }
        if !seen.insert(label.to_lowercase()) {
            warnings.push(Issue::new(
                IssueKind::DuplicateLabel,
                id,
                format!("alternative label `{label}` duplicates another label"),
            ));
            continue;
        }
        out.push(label.to_string());
    }
    out.sort();
    out
}

fn chain_len(concepts: &BTreeMap<String, Concept>, id: &str) -> usize {
    let mut n = 1;
    let mut cur = id;
    while let Some(p) = concepts.get(cur).and_then(|c| c.parent.as_deref()) {
        n += 1;
        cur = p;
    }
    n
}

/// Reports each parent cycle once, naming its members in ascending order.
fn find_cycles(concepts: &BTreeMap<String, Concept>) -> Vec<Issue> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Fresh,
        OnPath,
        Done,
    }

    let mut marks: BTreeMap<&str, Mark> = concepts.keys().map(|k| (k.as_str(), Mark::Fresh)).collect();
    let mut issues = Vec::new();

    for start in concepts.keys() {
        if marks[start.as_str()] != Mark::Fresh {
            continue;
        }
        let mut path: Vec<&str> = Vec::new();
        let mut cur = Some(start.as_str());
        while let Some(id) = cur {
            match marks.get(id).copied() {
                // dangling parents are reported separately
                None | Some(Mark::Done) => break,
                Some(Mark::OnPath) => {
                    let pos = path.iter().position(|p| *p == id).unwrap_or(0);
                    let members: BTreeSet<&str> = path[pos..].iter().copied().collect();
                    let first = *members.iter().next().unwrap_or(&id);
                    let listed: Vec<&str> = members.iter().copied().collect();
                    issues.push(Issue::new(
                        IssueKind::Cycle,
                        first,
                        format!("parent cycle through {{{}}}", listed.join(", ")),
                    ));
                    break;
                }
                Some(Mark::Fresh) => {
                    marks.insert(id, Mark::OnPath);
                    path.push(id);
                    cur = concepts[id].parent.as_deref();
                }
            }
        }
        for id in path {
            marks.insert(id, Mark::Done);
        }
    }
    issues
}
