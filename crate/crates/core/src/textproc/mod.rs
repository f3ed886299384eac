//! Requirement ingestion and the shared tokenization pipeline.

mod import;
mod stopwords;

use std::collections::BTreeSet;
use std::fmt;
use std::io;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use self::import::{import_json, import_plaintext, Corpus, ImportError, TraceUnit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lang {
    En,
    Sv,
}

impl Lang {
    pub fn tag(self) -> &'static str {
        match self {
            Lang::En => "en",
            Lang::Sv => "sv",
        }
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Lang {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "en" => Ok(Lang::En),
            "sv" => Ok(Lang::Sv),
            other => Err(format!("unsupported language `{other}` (expected en or sv)")),
        }
    }
}

/// Built-in suffix-stripping rule tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StemRules {
    En,
    Sv,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LangConfig {
    lang: Lang,
    stopwords: BTreeSet<String>,
    rules: StemRules,
    noun_lexicon: Option<BTreeSet<String>>,
}

impl LangConfig {
    /// Built-in stopwords and rule table for `lang`, no noun lexicon.
    pub fn new(lang: Lang) -> Self {
        let words = match lang {
            Lang::En => stopwords::EN,
            Lang::Sv => stopwords::SV,
        };
        LangConfig {
            lang,
            stopwords: words.iter().map(|w| w.to_string()).collect(),
            rules: match lang {
                Lang::En => StemRules::En,
                Lang::Sv => StemRules::Sv,
            },
            noun_lexicon: None,
        }
    }

    /// Replaces the stopword set. Entries are trimmed and lowercased.
    pub fn with_stopwords<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.stopwords = clean_words(words);
        self
    }

    /// Restricts noun detection to the given stems.
    pub fn with_noun_lexicon<I, S>(mut self, stems: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.noun_lexicon = Some(clean_words(stems));
        self
    }

    pub fn lang(&self) -> Lang {
        self.lang
    }

    pub fn rules(&self) -> StemRules {
        self.rules
    }

    pub fn stopwords(&self) -> &BTreeSet<String> {
        &self.stopwords
    }

    pub fn noun_lexicon(&self) -> Option<&BTreeSet<String>> {
        self.noun_lexicon.as_ref()
    }

    pub fn is_stopword(&self, token: &Token) -> bool {
        self.stopwords.contains(&token.normalized) || self.stopwords.contains(&token.stem)
    }
}

fn clean_words<I, S>(words: I) -> BTreeSet<String>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    words
        .into_iter()
        .map(|w| w.as_ref().trim().to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

/// Reads a word list: UTF-8, one entry per line. Blank lines and lines
/// starting with `#` are skipped.
pub fn load_word_list(path: impl AsRef<Path>) -> io::Result<Vec<String>> {
    let text = std::fs::read_to_string(path)?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub normalized: String,
    pub stem: String,
    /// Character offset of the first char, inclusive.
    pub start: usize,
    /// Character offset past the last char.
    pub end: usize,
    pub noun_like: bool,
}

/// Splits `text` into alphanumeric runs.
///
/// Every non-alphanumeric character separates tokens, so hyphenated words
/// yield two tokens. Offsets count characters, not bytes.
pub fn tokenize(text: &str, cfg: &LangConfig) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut run: Option<(usize, usize)> = None; // (byte start, char start)
    let mut chars = 0usize;

    let mut flush = |run: &mut Option<(usize, usize)>, byte_end: usize, char_end: usize| {
        if let Some((b, c)) = run.take() {
            if let Some(t) = make_token(&text[b..byte_end], c, char_end, cfg) {
                tokens.push(t);
            }
        }
    };

    for (byte, ch) in text.char_indices() {
        if ch.is_alphanumeric() {
            if run.is_none() {
                run = Some((byte, chars));
            }
        } else {
            flush(&mut run, byte, chars);
        }
        chars += 1;
    }
    flush(&mut run, text.len(), chars);
    tokens
}

fn make_token(surface: &str, start: usize, end: usize, cfg: &LangConfig) -> Option<Token> {
    let normalized = surface
        .to_lowercase()
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_string();
    if normalized.is_empty() {
        return None;
    }
    let stem = stem(&normalized, cfg);
    let mut token = Token {
        surface: surface.to_string(),
        normalized,
        stem,
        start,
        end,
        noun_like: false,
    };
    token.noun_like = noun_like(&token, cfg);
    Some(token)
}

const EN_SUFFIXES: [(&str, &str); 3] = [("ies", "y"), ("es", ""), ("s", "")];
const SV_SUFFIXES: [&str; 10] = ["arna", "erna", "orna", "ar", "er", "or", "en", "et", "n", "t"];
const SV_MIN_REMAINDER: usize = 3;

/// Strips at most one suffix, trying the longest rule first. The result is
/// never empty.
pub fn stem(normalized: &str, cfg: &LangConfig) -> String {
    match cfg.rules {
        StemRules::En => {
            if normalized.ends_with("ss") {
                return normalized.to_string();
            }
            for (suffix, replacement) in EN_SUFFIXES {
                if let Some(rest) = normalized.strip_suffix(suffix) {
                    let out = format!("{rest}{replacement}");
                    if !out.is_empty() {
                        return out;
                    }
                }
            }
            normalized.to_string()
        }
        StemRules::Sv => {
            for suffix in SV_SUFFIXES {
                if let Some(rest) = normalized.strip_suffix(suffix) {
                    if rest.chars().count() >= SV_MIN_REMAINDER {
                        return rest.to_string();
                    }
                }
            }
            normalized.to_string()
        }
    }
}

/// Heuristic noun test: not a stopword, and either in the noun lexicon or
/// (without a lexicon) at least three characters long.
pub fn noun_like(token: &Token, cfg: &LangConfig) -> bool {
    if cfg.is_stopword(token) {
        return false;
    }
    match &cfg.noun_lexicon {
        Some(lexicon) => lexicon.contains(&token.stem),
        None => token.normalized.chars().count() >= 3,
    }
}

/// Substring of `text` by character offsets.
pub fn char_slice(text: &str, start: usize, end: usize) -> &str {
    let mut indices = text.char_indices().map(|(i, _)| i).chain(std::iter::once(text.len()));
    let from = indices.nth(start).unwrap_or(text.len());
    let to = if end > start {
        indices.nth(end - start - 1).unwrap_or(text.len())
    } else {
        from
    };
    &text[from..to]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn en() -> LangConfig {
        LangConfig::new(Lang::En)
    }

    fn sv() -> LangConfig {
        LangConfig::new(Lang::Sv)
    }

    fn normalized(text: &str, cfg: &LangConfig) -> Vec<String> {
        tokenize(text, cfg).into_iter().map(|t| t.normalized).collect()
    }

    #[test]
    fn hyphen_and_punctuation_split() {
        assert_eq!(
            normalized("Install the pump-station.", &en()),
            ["install", "the", "pump", "station"]
        );
        assert!(tokenize("", &en()).is_empty());
        assert!(tokenize(" ,.;-- ", &en()).is_empty());
    }

    #[test]
    fn swedish_offsets() {
        let tokens = tokenize("Pumpar, ventiler", &sv());
        let got: Vec<_> = tokens.iter().map(|t| (t.normalized.as_str(), t.start, t.end)).collect();
        assert_eq!(got, [("pumpar", 0, 6), ("ventiler", 8, 16)]);
    }

    #[test]
    fn offsets_count_chars_not_bytes() {
        let text = "Säker åtkomst till brunnen";
        let tokens = tokenize(text, &sv());
        assert_eq!((tokens[1].start, tokens[1].end), (6, 13));
        for t in &tokens {
            assert_eq!(char_slice(text, t.start, t.end), t.surface);
        }
    }

    #[test]
    fn english_stems() {
        let cfg = en();
        assert_eq!(stem("pumps", &cfg), "pump");
        assert_eq!(stem("glass", &cfg), "glass");
        assert_eq!(stem("batteries", &cfg), "battery");
        assert_eq!(stem("boxes", &cfg), "box");
        assert_eq!(stem("s", &cfg), "s");
        assert_eq!(stem("es", &cfg), "e");
        assert_eq!(stem("ies", &cfg), "y");
    }

    #[test]
    fn swedish_stems() {
        let cfg = sv();
        // "arna" is the longest matching suffix and leaves "pump"
        assert_eq!(stem("pumparna", &cfg), "pump");
        assert_eq!(stem("ventiler", &cfg), "ventil");
        assert_eq!(stem("brunnen", &cfg), "brunn");
        // "ar" would leave only two characters, "r" is not a rule
        assert_eq!(stem("bar", &cfg), "bar");
        // "en" would leave "vt", so the shorter "n" rule applies
        assert_eq!(stem("vten", &cfg), "vte");
    }

    #[test]
    fn noun_heuristics() {
        let cfg = en();
        let tok = |w: &str, cfg: &LangConfig| tokenize(w, cfg).remove(0);
        assert!(!tok("the", &cfg).noun_like);
        assert!(tok("pump", &cfg).noun_like);
        assert!(!tok("ab", &cfg).noun_like);
        let lex = en().with_noun_lexicon(["valve"]);
        assert!(!tok("pump", &lex).noun_like);
        assert!(tok("valve", &lex).noun_like);
        assert_eq!(stem("valves", &cfg), "valv");
        assert!(noun_like(&tok("pump", &cfg), &cfg));
    }

    #[test]
    fn custom_stopwords_are_lowercased() {
        let cfg = en().with_stopwords(["  Pump ", ""]);
        assert_eq!(cfg.stopwords().iter().collect::<Vec<_>>(), ["pump"]);
        assert!(!tokenize("pumps", &cfg)[0].noun_like);
    }

    #[test]
    fn lang_parsing() {
        assert_eq!("SV".parse::<Lang>(), Ok(Lang::Sv));
        assert!("de".parse::<Lang>().is_err());
    }

    #[test]
    fn word_list_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stop.txt");
        std::fs::write(&path, "# comment\nthe\n\n And \n").unwrap();
        assert_eq!(load_word_list(&path).unwrap(), ["the", "And"]);
    }
}
