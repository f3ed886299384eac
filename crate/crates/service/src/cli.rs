use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use taxotrace::evaluation::{threshold_sweep, GoldSet};
use taxotrace::recommender::{PredictorWeights, Suggestion};
use taxotrace::taxonomy::to_canonical_csv;
use taxotrace::textproc::Lang;
use taxotrace::tracestore::LinkFormat;

use crate::api;
use crate::config::{ConfigFile, EngineConfig, TaxonomyFormat};
use crate::engine::{self, Engine};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "taxotrace", version, about = "Link requirements to taxonomy concepts")]
pub struct Cli {
    #[command(flatten)]
    pub opts: CommonOpts,
    #[command(subcommand)]
    pub command: Command,
}

fn parse_threshold(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&t) {
        Ok(t)
    } else {
        Err(format!("{t} is outside [0, 1]"))
    }
}

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        Ok(_) => Err("must be at least 1".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_weights(s: &str) -> Result<String, String> {
    s.parse::<PredictorWeights>().map_err(|e| e.to_string())?;
    Ok(s.to_string())
}

#[derive(Debug, Default, Args)]
pub struct CommonOpts {
    /// TOML config file; flags override its values
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "PATH")]
    pub taxonomy: Option<PathBuf>,
    /// Taxonomy format; guessed from the extension when omitted
    #[arg(long, global = true, value_enum)]
    pub format: Option<TaxonomyFormat>,
    /// IRI prefix stripped from Turtle subjects to form concept ids
    #[arg(long, global = true, value_name = "IRI")]
    pub id_namespace: Option<String>,
    /// Requirement documents (.json or plain text), repeatable
    #[arg(long, global = true, value_name = "PATH", value_delimiter = ',')]
    pub docs: Vec<PathBuf>,
    #[arg(long, global = true, value_name = "en|sv")]
    pub lang: Option<Lang>,
    #[arg(long, global = true, value_name = "PATH")]
    pub stopwords: Option<PathBuf>,
    #[arg(long, global = true, value_name = "PATH")]
    pub noun_lexicon: Option<PathBuf>,
    /// Predictor weights: exact, stem, trigram, tfidf
    #[arg(long, global = true, value_name = "W1,W2,W3,W4", value_parser = parse_weights)]
    pub weights: Option<String>,
    #[arg(long, global = true, value_parser = parse_threshold)]
    pub threshold: Option<f64>,
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub max_rejects: Option<u32>,
    #[arg(long, global = true, value_parser = parse_positive)]
    pub top_k: Option<usize>,
    /// Decision log (JSONL)
    #[arg(long, global = true, value_name = "PATH")]
    pub store: Option<PathBuf>,
    #[arg(long, global = true, value_name = "HOST:PORT")]
    pub listen: Option<String>,
    /// Write the command's main output here instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a taxonomy; --out writes canonical CSV
    ImportTaxonomy,
    /// Parse requirement documents; --out writes the units as JSON
    ImportDocs,
    /// Suggest concepts for units
    Recommend {
        /// Only these units (default: all)
        #[arg(long = "unit", value_name = "ID")]
        units: Vec<String>,
    },
    /// Score suggestions against a gold set over a threshold sweep
    Evaluate {
        #[arg(long, value_name = "PATH")]
        gold: PathBuf,
        #[arg(long, value_delimiter = ',', value_parser = parse_threshold, default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1")]
        thresholds: Vec<f64>,
    },
    /// Write the active links of the decision log
    ExportLinks {
        #[arg(long, default_value = "csv", value_parser = parse_link_format)]
        link_format: LinkFormat,
    },
    /// Serve the HTTP API
    Serve,
    /// Check the taxonomy, documents, decision log and optional gold set
    Validate {
        #[arg(long, value_name = "PATH")]
        gold: Option<PathBuf>,
    },
}

fn parse_link_format(s: &str) -> Result<LinkFormat, String> {
    s.parse()
}

impl CommonOpts {
    fn as_config(&self) -> ConfigFile {
        ConfigFile {
            taxonomy: self.taxonomy.clone(),
            format: self.format,
            id_namespace: self.id_namespace.clone(),
            docs: self.docs.clone(),
            lang: self.lang,
            stopwords: self.stopwords.clone(),
            noun_lexicon: self.noun_lexicon.clone(),
            weights: self.weights.clone(),
            threshold: self.threshold,
            max_rejects: self.max_rejects,
            top_k: self.top_k,
            store: self.store.clone(),
            listen: self.listen.clone(),
        }
    }

    pub fn resolve(&self) -> Result<EngineConfig, CliError> {
        let file = match &self.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        EngineConfig::resolve(file.merge(self.as_config()), self.config.clone())
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::invalid(format!("write failed: {e}"))
}

/// Writes to `--out` when given, else to `out`.
fn emit(path: Option<&Path>, out: &mut dyn Write, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::invalid(format!("cannot write {}: {e}", p.display()))),
        None => out.write_all(bytes).map_err(io_err),
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let cfg = cli.opts.resolve()?;
    let out_path = cli.opts.out.as_deref();
    match &cli.command {
        Command::ImportTaxonomy => {
            let imported = engine::load_taxonomy(&cfg)?;
            for w in &imported.warnings {
                writeln!(err, "warning: {w}").map_err(io_err)?;
            }
            let tax = &imported.taxonomy;
            if let Some(p) = out_path {
                emit(Some(p), out, to_canonical_csv(tax).as_bytes())?;
            }
            writeln!(
                out,
                "{} concepts, {} roots, depth {}, {} warnings",
                tax.len(),
                tax.roots().len(),
                tax.depth(),
                imported.warnings.len()
            )
            .map_err(io_err)
        }
        Command::ImportDocs => {
            if cfg.docs.is_empty() {
                return Err(CliError::usage("no documents given (use --docs)"));
            }
            let corpus = engine::load_corpus(&cfg)?;
            if let Some(p) = out_path {
                let json = serde_json::to_vec_pretty(corpus.units()).expect("units serialize");
                emit(Some(p), out, &json)?;
            }
            for path in &cfg.docs {
                writeln!(out, "{}: ok", path.display()).map_err(io_err)?;
            }
            writeln!(out, "{} units", corpus.len()).map_err(io_err)
        }
        Command::Recommend { units } => {
            let engine = Engine::load(&cfg)?;
            report_warnings(&engine, err)?;
            recommend(&engine, units, out_path, out)
        }
        Command::Evaluate { gold, thresholds } => {
            let engine = Engine::load(&cfg)?;
            report_warnings(&engine, err)?;
            let bytes = fs::read(gold).map_err(|e| CliError::invalid(format!("cannot read {}: {e}", gold.display())))?;
            let gold_set = GoldSet::from_csv(&bytes, &gold.display().to_string())
                .map_err(|e| CliError::invalid(format!("{}: {e}", gold.display())))?;
            gold_set
                .validate(&engine.taxonomy, &engine.corpus)
                .map_err(|e| CliError::invalid(format!("{}: {e}", gold.display())))?;
            let report = threshold_sweep(&engine.index, engine.corpus.units(), &gold_set, &engine.settings, thresholds)
                .map_err(|e| CliError::usage(e.to_string()))?;
            if let Some(p) = out_path {
                emit(Some(p), out, report.to_json().as_bytes())?;
            }
            out.write_all(report.to_table().as_bytes()).map_err(io_err)
        }
        Command::ExportLinks { link_format } => {
            if cfg.store.is_none() {
                return Err(CliError::usage("no decision log given (use --store)"));
            }
            let engine = Engine::load(&cfg)?;
            emit(out_path, out, &engine.store.export_links(*link_format))
        }
        Command::Serve => {
            let engine = Engine::load(&cfg)?;
            report_warnings(&engine, err)?;
            serve(engine, &cfg, err)
        }
        Command::Validate { gold } => {
            let engine = Engine::load(&cfg)?;
            report_warnings(&engine, err)?;
            writeln!(
                out,
                "taxonomy: {} concepts, depth {}",
                engine.taxonomy.len(),
                engine.taxonomy.depth()
            )
            .map_err(io_err)?;
            writeln!(out, "documents: {} units", engine.corpus.len()).map_err(io_err)?;
            writeln!(
                out,
                "decisions: {} events, {} active links",
                engine.store.events().len(),
                engine.store.links().count()
            )
            .map_err(io_err)?;
            if let Some(g) = gold {
                let bytes = fs::read(g).map_err(|e| CliError::invalid(format!("cannot read {}: {e}", g.display())))?;
                let set = GoldSet::from_csv(&bytes, &g.display().to_string())
                    .map_err(|e| CliError::invalid(format!("{}: {e}", g.display())))?;
                set.validate(&engine.taxonomy, &engine.corpus)
                    .map_err(|e| CliError::invalid(format!("{}: {e}", g.display())))?;
                writeln!(out, "gold: {} pairs", set.len()).map_err(io_err)?;
            }
            writeln!(out, "ok").map_err(io_err)
        }
    }
}

fn report_warnings(engine: &Engine, err: &mut dyn Write) -> Result<(), CliError> {
    for w in &engine.warnings {
        writeln!(err, "{w}").map_err(io_err)?;
    }
    Ok(())
}

fn recommend(engine: &Engine, only: &[String], out_path: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    for id in only {
        if !engine.corpus.contains(id) {
            return Err(CliError::invalid(format!("unknown unit `{id}`")));
        }
    }
    let selected: Vec<_> = engine
        .corpus
        .units()
        .iter()
        .filter(|u| only.is_empty() || only.contains(&u.unit_id))
        .collect();
    let results: Vec<(String, Vec<Suggestion>)> = selected
        .iter()
        .map(|u| (u.unit_id.clone(), engine.index.recommend(u, &engine.settings, &engine.store)))
        .collect();

    if let Some(p) = out_path {
        let json: Vec<_> = results
            .iter()
            .map(|(id, s)| serde_json::json!({ "unit_id": id, "suggestions": s }))
            .collect();
        return emit(Some(p), out, &serde_json::to_vec_pretty(&json).expect("suggestions serialize"));
    }
    for (unit, (id, suggestions)) in selected.iter().zip(&results) {
        writeln!(out, "{id}  {}", unit.text).map_err(io_err)?;
        if suggestions.is_empty() {
            writeln!(out, "    (no suggestions)").map_err(io_err)?;
        }
        for s in suggestions {
            let c = engine.taxonomy.get(&s.concept_id);
            writeln!(
                out,
                "    {:.3}  {:<8} {:<6} {}",
                s.confidence,
                s.concept_id,
                c.and_then(|c| c.code.as_deref()).unwrap_or(""),
                c.map(|c| c.pref_label.as_str()).unwrap_or("")
            )
            .map_err(io_err)?;
        }
    }
    Ok(())
}

fn serve(engine: Engine, cfg: &EngineConfig, err: &mut dyn Write) -> Result<(), CliError> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::invalid(format!("runtime: {e}")))?;
    let app = api::router(api::AppState::new(engine, cfg.config_path.clone()));
    let listen = cfg.listen.clone();
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&listen)
            .await
            .map_err(|e| CliError::usage(format!("cannot listen on {listen}: {e}")))?;
        let addr = listener.local_addr().map(|a| a.to_string()).unwrap_or(listen);
        let _ = writeln!(err, "listening on http://{addr}");
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError::invalid(format!("server error: {e}")))
    })
}
