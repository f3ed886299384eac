//! Reader for the SKOS subset of Turtle.
//!
//! Supported syntax: `@prefix`/`PREFIX` and `@base`/`BASE` directives,
//! IRI and prefixed-name subjects, predicate lists (`;`), object lists (`,`),
//! the `a` keyword, and literals with language tags or datatypes. Blank nodes
//! and collections are rejected with a syntax error.
//!
//! Supported predicates map onto [`Concept`] fields. Every other predicate
//! produces an `unsupported-predicate` warning and the triple is skipped.

use std::collections::HashMap;

use super::{
    Concept, Imported, Issue, IssueKind, SourceFormat, SourceMeta, TaxonomyBuilder, TaxonomyError,
};

pub const SKOS_NS: &str = "http://www.w3.org/2004/02/skos/core#";
const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TurtleOptions {
    /// Preferred language tag for labels and definitions.
    pub language: String,
    /// When set, subject IRIs in this namespace are shortened to their local
    /// part to form concept ids.
    pub id_namespace: Option<String>,
}

impl Default for TurtleOptions {
    fn default() -> Self {
        TurtleOptions {
            language: "en".to_string(),
            id_namespace: None,
        }
    }
}

impl TurtleOptions {
    pub fn new(language: impl Into<String>) -> Self {
        TurtleOptions {
            language: language.into(),
            id_namespace: None,
        }
    }

    pub fn with_id_namespace(mut self, ns: impl Into<String>) -> Self {
        self.id_namespace = Some(ns.into());
        self
    }

    fn concept_id(&self, iri: &str) -> String {
        match &self.id_namespace {
            Some(ns) => match iri.strip_prefix(ns.as_str()) {
                Some(local) if !local.is_empty() => local.to_string(),
                _ => iri.to_string(),
            },
            None => iri.to_string(),
        }
    }
}

/// Parses SKOS concepts from Turtle.
///
/// Label selection per subject: the first `skos:prefLabel` in the configured
/// language, else the first untagged one, else the first seen. Preferred
/// labels in other languages become alternative labels. Definitions follow
/// the same preference and the rest are dropped.
pub fn parse_taxonomy_turtle(
    bytes: &[u8],
    source_name: &str,
    options: &TurtleOptions,
) -> Result<Imported, TaxonomyError> {
    let text = std::str::from_utf8(bytes).map_err(|e| TaxonomyError::Encoding {
        offset: e.valid_up_to(),
    })?;
    let tokens = Lexer::new(text).tokenize()?;
    let triples = Parser::new(tokens).parse()?;
    build_concepts(triples, source_name, options)
}

#[derive(Debug, Clone, PartialEq)]
enum Term {
    Iri(String),
    Literal { value: String, lang: Option<String> },
}

#[derive(Debug)]
struct Triple {
    subject: String,
    predicate: String,
    object: Term,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Iri(String),
    PName(String, String),
    Str(String),
    LangTag(String),
    Caret2,
    Dot,
    Semi,
    Comma,
    A,
    AtPrefix,
    AtBase,
    Prefix,
    Base,
    Bare(String),
}

struct Spanned {
    tok: Tok,
    line: usize,
}

fn syntax(line: usize, message: impl Into<String>) -> TaxonomyError {
    TaxonomyError::Syntax {
        line,
        message: message.into(),
    }
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Lexer {
    fn new(text: &str) -> Self {
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        Lexer {
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
        }
    }

    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
        }
        Some(c)
    }

    fn tokenize(mut self) -> Result<Vec<Spanned>, TaxonomyError> {
        let mut out = Vec::new();
        while let Some(c) = self.peek(0) {
            if c.is_whitespace() {
                self.bump();
                continue;
            }
            if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
                continue;
            }
            let line = self.line;
            let tok = match c {
                '<' => self.iri()?,
                '"' | '\'' => self.string()?,
                '@' => {
                    self.bump();
                    let word = self.take_while(|c| c.is_ascii_alphanumeric() || c == '-');
                    match word.as_str() {
                        "prefix" => Tok::AtPrefix,
                        "base" => Tok::AtBase,
                        "" => return Err(syntax(line, "expected a directive or language tag after `@`")),
                        _ => Tok::LangTag(word),
                    }
                }
                '^' => {
                    self.bump();
                    if self.bump() != Some('^') {
                        return Err(syntax(line, "expected `^^`"));
                    }
                    Tok::Caret2
                }
                '.' if !self.peek(1).is_some_and(|c| c.is_ascii_digit()) => {
                    self.bump();
                    Tok::Dot
                }
                ';' => {
                    self.bump();
                    Tok::Semi
                }
                ',' => {
                    self.bump();
                    Tok::Comma
                }
                '[' | '(' => return Err(syntax(line, "blank nodes and collections are not supported")),
                '_' if self.peek(1) == Some(':') => {
                    return Err(syntax(line, "blank nodes are not supported"))
                }
                c if c.is_ascii_digit() || c == '+' || c == '-' || c == '.' => self.number(),
                _ => self.name(line)?,
            };
            out.push(Spanned { tok, line });
        }
        Ok(out)
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek(0) {
            if !f(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    fn iri(&mut self) -> Result<Tok, TaxonomyError> {
        let line = self.line;
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                Some('>') => return Ok(Tok::Iri(s)),
                Some(c) if c.is_whitespace() => {
                    return Err(syntax(line, "whitespace inside IRI"));
                }
                Some(c) => s.push(c),
                None => return Err(syntax(line, "unterminated IRI")),
            }
        }
    }

    fn string(&mut self) -> Result<Tok, TaxonomyError> {
        let line = self.line;
        let quote = self.bump().unwrap_or('"');
        let long = self.peek(0) == Some(quote) && self.peek(1) == Some(quote);
        if long {
            self.bump();
            self.bump();
        }
        let mut s = String::new();
        loop {
            let Some(c) = self.bump() else {
                return Err(syntax(line, "unterminated string literal"));
            };
            match c {
                c if c == quote && !long => return Ok(Tok::Str(s)),
                c if c == quote && self.peek(0) == Some(quote) && self.peek(1) == Some(quote) => {
                    self.bump();
                    self.bump();
                    return Ok(Tok::Str(s));
                }
                '\n' | '\r' if !long => {
                    return Err(syntax(line, "newline in short string literal"));
                }
                '\\' => s.push(self.escape()?),
                c => s.push(c),
            }
        }
    }

    fn escape(&mut self) -> Result<char, TaxonomyError> {
        let line = self.line;
        let c = self.bump().ok_or_else(|| syntax(line, "dangling escape"))?;
        Ok(match c {
            't' => '\t',
            'b' => '\u{8}',
            'n' => '\n',
            'r' => '\r',
            'f' => '\u{c}',
            '"' | '\'' | '\\' => c,
            'u' | 'U' => {
                let n = if c == 'u' { 4 } else { 8 };
                let hex: String = (0..n).filter_map(|_| self.bump()).collect();
                u32::from_str_radix(&hex, 16)
                    .ok()
                    .and_then(char::from_u32)
                    .ok_or_else(|| syntax(line, format!("invalid unicode escape `\\{c}{hex}`")))?
            }
            other => return Err(syntax(line, format!("invalid escape `\\{other}`"))),
        })
    }

    fn number(&mut self) -> Tok {
        let mut s = String::new();
        while let Some(c) = self.peek(0) {
            let accept = c.is_ascii_digit()
                || ((c == '+' || c == '-') && (s.is_empty() || s.ends_with(['e', 'E'])))
                || ((c == 'e' || c == 'E') && !s.is_empty())
                || (c == '.' && self.peek(1).is_some_and(|d| d.is_ascii_digit()));
            if !accept {
                break;
            }
            s.push(c);
            self.bump();
        }
        Tok::Bare(s)
    }

    fn name(&mut self, line: usize) -> Result<Tok, TaxonomyError> {
        let prefix = self.take_while(|c| c.is_alphanumeric() || c == '_' || c == '-' || c == '.');
        if self.peek(0) != Some(':') {
            return match prefix.as_str() {
                "a" => Ok(Tok::A),
                "true" | "false" => Ok(Tok::Bare(prefix)),
                p if p.eq_ignore_ascii_case("prefix") => Ok(Tok::Prefix),
                p if p.eq_ignore_ascii_case("base") => Ok(Tok::Base),
                "" => Err(syntax(
                    line,
                    format!("unexpected character `{}`", self.peek(0).unwrap_or(' ')),
                )),
                p => Err(syntax(line, format!("unexpected word `{p}`"))),
            };
        }
        self.bump();
        let mut local = String::new();
        while let Some(c) = self.peek(0) {
            if c == '\\' {
                self.bump();
                match self.bump() {
                    Some(e) => local.push(e),
                    None => return Err(syntax(line, "dangling escape in prefixed name")),
                }
            } else if c.is_alphanumeric() || matches!(c, '_' | '-' | ':' | '.' | '%') {
                local.push(c);
                self.bump();
            } else {
                break;
            }
        }
        // a trailing dot terminates the statement
        while local.ends_with('.') {
            local.pop();
            self.pos -= 1;
        }
        Ok(Tok::PName(prefix, local))
    }
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    prefixes: HashMap<String, String>,
    base: Option<String>,
}

impl Parser {
    fn new(tokens: Vec<Spanned>) -> Self {
        Parser {
            tokens,
            pos: 0,
            prefixes: HashMap::new(),
            base: None,
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|s| &s.tok)
    }

    fn line(&self) -> usize {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map(|s| s.line)
            .unwrap_or(1)
    }

    fn next(&mut self) -> Result<(Tok, usize), TaxonomyError> {
        let line = self.line();
        let s = self
            .tokens
            .get(self.pos)
            .ok_or_else(|| syntax(line, "unexpected end of input"))?;
        self.pos += 1;
        Ok((s.tok.clone(), s.line))
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), TaxonomyError> {
        let (tok, line) = self.next()?;
        if tok == want {
            Ok(())
        } else {
            Err(syntax(line, format!("expected {what}, found {tok:?}")))
        }
    }

    fn parse(mut self) -> Result<Vec<Triple>, TaxonomyError> {
        let mut triples = Vec::new();
        while let Some(tok) = self.peek() {
            match tok {
                Tok::AtPrefix | Tok::Prefix => {
                    let at = *tok == Tok::AtPrefix;
                    self.pos += 1;
                    self.prefix_directive()?;
                    if at {
                        self.expect(Tok::Dot, "`.` after @prefix")?;
                    }
                }
                Tok::AtBase | Tok::Base => {
                    let at = *tok == Tok::AtBase;
                    self.pos += 1;
                    let (tok, line) = self.next()?;
                    let Tok::Iri(iri) = tok else {
                        return Err(syntax(line, "expected IRI after base directive"));
                    };
                    self.base = Some(iri);
                    if at {
                        self.expect(Tok::Dot, "`.` after @base")?;
                    }
                }
                _ => self.statement(&mut triples)?,
            }
        }
        Ok(triples)
    }

    fn prefix_directive(&mut self) -> Result<(), TaxonomyError> {
        let (tok, line) = self.next()?;
        let Tok::PName(prefix, local) = tok else {
            return Err(syntax(line, "expected `prefix:` in prefix directive"));
        };
        if !local.is_empty() {
            return Err(syntax(line, "prefix name must end with `:`"));
        }
        let (tok, line) = self.next()?;
        let Tok::Iri(iri) = tok else {
            return Err(syntax(line, "expected IRI in prefix directive"));
        };
        let iri = self.resolve(iri);
        if prefix == "skos" && iri != SKOS_NS {
            return Err(syntax(
                line,
                format!("prefix `skos:` must be bound to <{SKOS_NS}>, not <{iri}>"),
            ));
        }
        self.prefixes.insert(prefix, iri);
        Ok(())
    }

    fn resolve(&self, iri: String) -> String {
        match &self.base {
            Some(base) if !iri.contains(':') => format!("{base}{iri}"),
            _ => iri,
        }
    }

    fn iri_term(&mut self, tok: Tok, line: usize) -> Result<Option<String>, TaxonomyError> {
        Ok(match tok {
            Tok::Iri(iri) => Some(self.resolve(iri)),
            Tok::PName(prefix, local) => {
                let ns = self
                    .prefixes
                    .get(&prefix)
                    .ok_or_else(|| syntax(line, format!("undeclared prefix `{prefix}:`")))?;
                Some(format!("{ns}{local}"))
            }
            _ => None,
        })
    }

    fn statement(&mut self, triples: &mut Vec<Triple>) -> Result<(), TaxonomyError> {
        let (tok, line) = self.next()?;
        let subject = self
            .iri_term(tok, line)?
            .ok_or_else(|| syntax(line, "subject must be an IRI"))?;

        loop {
            let (tok, line) = self.next()?;
            let predicate = match tok {
                Tok::A => RDF_TYPE.to_string(),
                other => self
                    .iri_term(other, line)?
                    .ok_or_else(|| syntax(line, "predicate must be an IRI"))?,
            };
            loop {
                let object = self.object()?;
                triples.push(Triple {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                });
                if self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            if self.peek() == Some(&Tok::Semi) {
                while self.peek() == Some(&Tok::Semi) {
                    self.pos += 1;
                }
                if self.peek() == Some(&Tok::Dot) {
                    break;
                }
            } else {
                break;
            }
        }
        self.expect(Tok::Dot, "`.` at end of statement")
    }

    fn object(&mut self) -> Result<Term, TaxonomyError> {
        let (tok, line) = self.next()?;
        match tok {
            Tok::Str(value) => {
                let lang = match self.peek() {
                    Some(Tok::LangTag(tag)) => {
                        let tag = tag.clone();
                        self.pos += 1;
                        Some(tag)
                    }
                    Some(Tok::Caret2) => {
                        self.pos += 1;
                        let (tok, line) = self.next()?;
                        self.iri_term(tok, line)?
                            .ok_or_else(|| syntax(line, "expected datatype IRI after `^^`"))?;
                        None
                    }
                    _ => None,
                };
                Ok(Term::Literal { value, lang })
            }
            Tok::Bare(value) => Ok(Term::Literal { value, lang: None }),
            other => self
                .iri_term(other.clone(), line)?
                .map(Term::Iri)
                .ok_or_else(|| syntax(line, format!("unexpected {other:?} in object position"))),
        }
    }
}

#[derive(Default)]
struct Subject {
    types: Vec<String>,
    pref: Vec<(String, Option<String>)>,
    alt: Vec<String>,
    definitions: Vec<(String, Option<String>)>,
    notations: Vec<String>,
    broader: Vec<String>,
}

fn build_concepts(
    triples: Vec<Triple>,
    source_name: &str,
    options: &TurtleOptions,
) -> Result<Imported, TaxonomyError> {
    let mut builder = TaxonomyBuilder::default();
    let mut order: Vec<String> = Vec::new();
    let mut subjects: HashMap<String, Subject> = HashMap::new();

    let skos = |local: &str| format!("{SKOS_NS}{local}");
    let (pref, alt, def, notation, broader) = (
        skos("prefLabel"),
        skos("altLabel"),
        skos("definition"),
        skos("notation"),
        skos("broader"),
    );

    for t in triples {
        let id = options.concept_id(&t.subject);
        let entry = subjects.entry(t.subject.clone()).or_insert_with(|| {
            order.push(t.subject.clone());
            Subject::default()
        });
        let p = t.predicate.as_str();
        let supported = [pref.as_str(), alt.as_str(), def.as_str(), notation.as_str(), broader.as_str()];
        match t.object {
            Term::Iri(ty) if p == RDF_TYPE => entry.types.push(ty),
            Term::Literal { value, lang } if p == pref => entry.pref.push((value, lang)),
            Term::Literal { value, .. } if p == alt => entry.alt.push(value),
            Term::Literal { value, lang } if p == def => entry.definitions.push((value, lang)),
            Term::Literal { value, .. } if p == notation => entry.notations.push(value),
            Term::Iri(parent) if p == broader => entry.broader.push(parent),
            _ if p == RDF_TYPE || supported.contains(&p) => builder.warn(Issue::new(
                IssueKind::IgnoredValue,
                &id,
                format!("unexpected object kind for <{p}>; triple skipped"),
            )),
            _ => builder.warn(Issue::new(
                IssueKind::UnsupportedPredicate,
                &id,
                format!("predicate <{p}> is not supported; triple skipped"),
            )),
        }
    }

    for iri in order {
        let s = subjects.remove(&iri).unwrap_or_default();
        let id = options.concept_id(&iri);
        if !s.types.is_empty() && !s.types.iter().any(|t| *t == skos("Concept")) {
            builder.warn(Issue::new(
                IssueKind::IgnoredSubject,
                &id,
                format!("subject typed as <{}> is not a skos:Concept", s.types[0]),
            ));
            continue;
        }

        let chosen = pick_language(&s.pref, &options.language);
        let pref_label = chosen.map(|i| s.pref[i].0.clone()).unwrap_or_default();
        let mut alt_labels: Vec<String> = s
            .pref
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != chosen)
            .map(|(_, (v, _))| v.clone())
            .collect();
        alt_labels.extend(s.alt);

        let definition = pick_language(&s.definitions, &options.language).map(|i| s.definitions[i].0.clone());

        if s.notations.len() > 1 {
            builder.warn(Issue::new(
                IssueKind::IgnoredValue,
                &id,
                "more than one skos:notation; keeping the first",
            ));
        }
        if s.broader.len() > 1 {
            builder.error(Issue::new(
                IssueKind::PolyHierarchy,
                &id,
                format!("{} skos:broader values; only one parent is supported", s.broader.len()),
            ));
        }

        builder.push(Concept {
            id,
            code: s.notations.into_iter().next(),
            pref_label,
            alt_labels,
            definition,
            parent: s.broader.first().map(|b| options.concept_id(b)),
        });
    }

    builder.build(SourceMeta::new(SourceFormat::Turtle, source_name))
}

/// Index of the preferred value: first in `language` (primary subtag match),
/// else first untagged, else first seen.
fn pick_language(values: &[(String, Option<String>)], language: &str) -> Option<usize> {
    let primary = |tag: &str| tag.split('-').next().unwrap_or("").to_ascii_lowercase();
    let want = primary(language);
    values
        .iter()
        .position(|(_, l)| l.as_deref().is_some_and(|l| primary(l) == want))
        .or_else(|| values.iter().position(|(_, l)| l.is_none()))
        .or(if values.is_empty() { None } else { Some(0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::ValidationReport;

    const PREFIXES: &str = "@prefix skos: <http://www.w3.org/2004/02/skos/core#> .\n@prefix ex: <http://example.org/> .\n";

    fn parse(body: &str, options: &TurtleOptions) -> Result<Imported, TaxonomyError> {
        parse_taxonomy_turtle(format!("{PREFIXES}{body}").as_bytes(), "test.ttl", options)
    }

    fn report(r: Result<Imported, TaxonomyError>) -> ValidationReport {
        match r {
            Err(TaxonomyError::Invalid(report)) => report,
            other => panic!("expected a validation report, got {other:?}"),
        }
    }

    #[test]
    fn broader_maps_to_parent() {
        let t = parse(
            "ex:A skos:prefLabel \"Pumping\" .\nex:B skos:prefLabel \"Pump\" ; skos:broader ex:A .\n",
            &TurtleOptions::default(),
        )
        .unwrap()
        .taxonomy;
        assert_eq!(t.roots(), ["http://example.org/A"]);
        assert_eq!(
            t.get("http://example.org/B").unwrap().parent.as_deref(),
            Some("http://example.org/A")
        );
    }

    #[test]
    fn configured_language_wins() {
        let body = "ex:P skos:prefLabel \"Pump\"@en, \"Pump\"@sv .\n";
        let t = parse(body, &TurtleOptions::new("sv")).unwrap().taxonomy;
        let p = t.get("http://example.org/P").unwrap();
        assert_eq!(p.pref_label, "Pump");
        // same text in the other language is not a distinct synonym
        assert!(p.alt_labels.is_empty());

        let body = "ex:P skos:prefLabel \"Valve\"@en, \"Ventil\"@sv ; skos:definition \"A valve\"@en, \"En ventil\"@sv .\n";
        let sv = parse(body, &TurtleOptions::new("sv")).unwrap().taxonomy;
        let p = sv.get("http://example.org/P").unwrap();
        assert_eq!(p.pref_label, "Ventil");
        assert_eq!(p.alt_labels, ["Valve"]);
        assert_eq!(p.definition.as_deref(), Some("En ventil"));
    }

    #[test]
    fn untagged_then_first_seen_fallback() {
        let body = "ex:P skos:prefLabel \"Pumpe\"@de, \"Pump\" .\nex:Q skos:prefLabel \"Ventil\"@de, \"Vanne\"@fr .\n";
        let t = parse(body, &TurtleOptions::new("sv")).unwrap().taxonomy;
        assert_eq!(t.get("http://example.org/P").unwrap().pref_label, "Pump");
        assert_eq!(t.get("http://example.org/Q").unwrap().pref_label, "Ventil");
    }

    #[test]
    fn en_gb_matches_en() {
        let body = "ex:P skos:prefLabel \"Pump\"@sv, \"Pump unit\"@en-GB .\n";
        let t = parse(body, &TurtleOptions::new("en")).unwrap().taxonomy;
        assert_eq!(t.get("http://example.org/P").unwrap().pref_label, "Pump unit");
    }

    #[test]
    fn unsupported_predicate_is_a_warning() {
        let body = "ex:A skos:prefLabel \"A\" ; skos:related ex:B .\nex:B skos:prefLabel \"B\" .\n";
        let imported = parse(body, &TurtleOptions::default()).unwrap();
        assert_eq!(imported.taxonomy.len(), 2);
        assert_eq!(imported.warnings.len(), 1);
        assert_eq!(imported.warnings[0].kind, IssueKind::UnsupportedPredicate);
        assert_eq!(imported.warnings[0].id, "http://example.org/A");
    }

    #[test]
    fn multiple_broader_is_an_error() {
        let body = "ex:A skos:prefLabel \"A\" .\nex:B skos:prefLabel \"B\" .\nex:C skos:prefLabel \"C\" ; skos:broader ex:A, ex:B .\n";
        let r = report(parse(body, &TurtleOptions::default()));
        assert!(r.has_error(IssueKind::PolyHierarchy, "http://example.org/C"));
    }

    #[test]
    fn id_namespace_shortens_ids() {
        let body = "ex:A skos:prefLabel \"A\" ; skos:notation \"AA\"^^ex:code .\nex:B skos:prefLabel \"B\" ; skos:broader ex:A .\n";
        let options = TurtleOptions::default().with_id_namespace("http://example.org/");
        let t = parse(body, &options).unwrap().taxonomy;
        assert_eq!(t.get("B").unwrap().parent.as_deref(), Some("A"));
        assert_eq!(t.get("A").unwrap().code.as_deref(), Some("AA"));
    }

    #[test]
    fn type_declarations_and_schemes() {
        let body = "ex:S a skos:ConceptScheme .\nex:A a skos:Concept ; skos:prefLabel \"A\" .\n";
        let imported = parse(body, &TurtleOptions::default()).unwrap();
        assert_eq!(imported.taxonomy.len(), 1);
        assert_eq!(imported.warnings[0].kind, IssueKind::IgnoredSubject);
    }

    #[test]
    fn syntax_features() {
        let body = r#"
# comment with <not an iri>
PREFIX dc: <http://purl.org/dc/terms/>
@base <http://example.org/> .
<A> skos:prefLabel """Long
label"""@en ;
    skos:altLabel 'single', "esc\"aped\u00e5" ;
    skos:notation 12 ;
    dc:title "ignored" ;
    .
"#;
        let imported = parse(body, &TurtleOptions::default()).unwrap();
        let a = imported.taxonomy.get("http://example.org/A").unwrap();
        assert_eq!(a.pref_label, "Long\nlabel");
        assert_eq!(a.alt_labels, ["esc\"aped\u{e5}", "single"]);
        assert_eq!(a.code.as_deref(), Some("12"));
        assert_eq!(imported.warnings.len(), 1);
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = parse("ex:A skos:prefLabel \"A\" .\nex:B skos:prefLabel \"B\"\n", &TurtleOptions::default())
            .unwrap_err();
        assert!(matches!(err, TaxonomyError::Syntax { line: 4, .. }), "{err:?}");

        let err = parse("\n\nex:A skos:prefLabel [ ] .\n", &TurtleOptions::default()).unwrap_err();
        assert!(matches!(err, TaxonomyError::Syntax { line: 5, .. }), "{err:?}");

        let err = parse("nope:A skos:prefLabel \"A\" .\n", &TurtleOptions::default()).unwrap_err();
        assert!(matches!(err, TaxonomyError::Syntax { line: 3, ref message } if message.contains("nope")));

        let err = parse("ex:A skos:prefLabel \"A .\n", &TurtleOptions::default()).unwrap_err();
        assert!(matches!(err, TaxonomyError::Syntax { .. }));
    }

    #[test]
    fn skos_prefix_must_be_the_core_namespace() {
        let ttl = "@prefix skos: <http://example.org/skos#> .\n";
        let err = parse_taxonomy_turtle(ttl.as_bytes(), "x", &TurtleOptions::default()).unwrap_err();
        assert!(matches!(err, TaxonomyError::Syntax { line: 1, .. }));
    }

    #[test]
    fn missing_label_and_dangling_broader() {
        let r = report(parse("ex:A skos:broader ex:Z .\n", &TurtleOptions::default()));
        assert!(r.has_error(IssueKind::EmptyLabel, "http://example.org/A"));
        assert!(r.has_error(IssueKind::DanglingParent, "http://example.org/A"));
    }
}
