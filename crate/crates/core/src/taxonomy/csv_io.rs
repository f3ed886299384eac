use super::{Concept, SourceFormat, SourceMeta, Imported, Taxonomy, TaxonomyBuilder, TaxonomyError};

pub const CSV_COLUMNS: [&str; 6] = ["id", "code", "parent_id", "pref_label", "alt_labels", "definition"];

const ALT_SEPARATOR: char = '|';

/// Parses a taxonomy from CSV with the columns in [`CSV_COLUMNS`].
///
/// Columns are located by header name. An empty `parent_id` marks a root and
/// `alt_labels` holds `|`-separated synonyms.
pub fn parse_taxonomy_csv(bytes: &[u8], source_name: &str) -> Result<Imported, TaxonomyError> {
    let text = std::str::from_utf8(bytes).map_err(|e| TaxonomyError::Encoding {
        offset: e.valid_up_to(),
    })?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);

    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(csv_error)?.clone();
    let mut cols = [0usize; 6];
    for (slot, name) in cols.iter_mut().zip(CSV_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| TaxonomyError::MissingColumn(name.to_string()))?;
    }
    let [id, code, parent, label, alts, definition] = cols;

    let mut builder = TaxonomyBuilder::default();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let field = |i: usize| record.get(i).unwrap_or("").trim();
        let optional = |i: usize| Some(field(i).to_string()).filter(|s| !s.is_empty());
        builder.push(Concept {
            id: field(id).to_string(),
            code: optional(code),
            pref_label: field(label).to_string(),
            alt_labels: field(alts)
                .split(ALT_SEPARATOR)
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect(),
            definition: optional(definition),
            parent: optional(parent),
        });
    }
    builder.build(SourceMeta::new(SourceFormat::Csv, source_name))
}

/// Serializes to canonical CSV: header first, rows sorted by id, alternative
/// labels sorted.
///
/// Alternative labels containing `|` cannot be represented and would be split
/// on re-import.
pub fn to_canonical_csv(taxonomy: &Taxonomy) -> String {
    let mut writer = ::csv::WriterBuilder::new()
        .terminator(::csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    // writing into a Vec cannot fail
    writer.write_record(CSV_COLUMNS).expect("in-memory write");
    for c in taxonomy.concepts() {
        let mut alts = c.alt_labels.clone();
        alts.sort();
        let alts = alts.join("|");
        writer
            .write_record([
                c.id.as_str(),
                c.code.as_deref().unwrap_or(""),
                c.parent.as_deref().unwrap_or(""),
                c.pref_label.as_str(),
                alts.as_str(),
                c.definition.as_deref().unwrap_or(""),
            ])
            .expect("in-memory write");
    }
    let bytes = writer.into_inner().expect("in-memory flush");
    String::from_utf8(bytes).expect("fields are UTF-8")
}

fn csv_error(e: ::csv::Error) -> TaxonomyError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    TaxonomyError::Csv {
        line,
        message: e.to_string(),
    }
}
