//! Acceptance checks. One PASS/FAIL line per criterion; exits non-zero if
//! any criterion fails.

mod common;

use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use common::oracle::DenseOracle;
use taxotrace::evaluation::{average_precision, precision_recall, threshold_sweep, GoldSet};
use taxotrace::recommender::{select, AnalyzedUnit, ConceptIndex, NoRejects, RecommenderSettings};
use taxotrace::taxonomy::{parse_taxonomy_csv, to_canonical_csv};
use taxotrace::textproc::TraceUnit;
use taxotrace::tracestore::{Decision, LinkFormat, TraceStore};

const COSINE_TOLERANCE: f64 = 1e-9;
const METRIC_TOLERANCE: f64 = 1e-9;
const TIME_BUDGET: Duration = Duration::from_secs(1);
const MONOTONICITY_CASES: u32 = 1000;
const SUPPRESSION_CASES: u32 = 300;
const EXACT_LABEL_FLOOR: f64 = 0.4;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    if ok {
        Ok(detail.into())
    } else {
        Err(detail.into())
    }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let tax = common::toy_taxonomy();
    let index = common::toy_index();
    let oracle = DenseOracle::build(&tax, index.cfg());
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for u in common::toy_units() {
        let analyzed = AnalyzedUnit::new(&u, index.cfg());
        for (cid, expected) in oracle.cosines(&u.text, index.cfg()) {
            let got = index.score_tfidf_cosine(&analyzed, &cid).map_err(|e| e.to_string())?;
            worst = worst.max((got - expected).abs());
            pairs += 1;
        }
    }
    let elapsed = start.elapsed();
    check(
        worst <= COSINE_TOLERANCE && elapsed < TIME_BUDGET && pairs == 220,
        format!("{pairs} pairs, max |diff| {worst:.2e}, {} ms", elapsed.as_millis()),
    )
}

const WORDS: &[&str] = &[
    "the", "pump", "pumps", "station", "valve", "control", "cabinet", "pipe", "joints", "manhole",
    "culvert", "inlet", "drainage", "ditch", "road", "surface", "asphalt", "layer", "markings",
    "barrier", "guard", "rail", "lighting", "column", "luminaire", "shall", "be", "near", "bridge",
];

fn sentence() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), 1..16).prop_map(|w| w.join(" "))
}

fn unit(id: &str, text: String) -> TraceUnit {
    TraceUnit {
        unit_id: id.into(),
        doc_id: "generated".into(),
        seq: 0,
        text,
    }
}

fn threshold_monotonicity() -> Outcome {
    let index = common::toy_index();
    let mut runner = TestRunner::new(Config {
        cases: MONOTONICITY_CASES,
        failure_persistence: None,
        ..Config::default()
    });
    let cases = Cell::new(0u32);
    let strategy = (sentence(), 0.0f64..=1.0, 0.0f64..=1.0, 1usize..25);
    let result = runner.run(&strategy, |(text, a, b, k)| {
        cases.set(cases.get() + 1);
        let (t1, t2) = if a <= b { (a, b) } else { (b, a) };
        let u = unit("u", text);
        let at = |t: f64| -> BTreeSet<String> {
            let s = RecommenderSettings::new(t, 3, k).unwrap();
            index.recommend(&u, &s, &NoRejects).into_iter().map(|s| s.concept_id).collect()
        };
        let (low, high) = (at(t1), at(t2));
        if high.is_subset(&low) {
            Ok(())
        } else {
            Err(TestCaseError::fail(format!("t1={t1} t2={t2} k={k}: {high:?} not within {low:?}")))
        }
    });
    match result {
        Ok(()) => check(cases.get() >= MONOTONICITY_CASES, format!("{} cases, 0 violations", cases.get())),
        Err(e) => Err(format!("violation: {e}")),
    }
}

#[derive(Debug, Clone)]
enum Step {
    Accept(usize, usize),
    Reject(usize, usize),
    Unlink(usize, usize),
}

fn suppression() -> Outcome {
    let (tax, corpus) = common::shared();
    let index = ConceptIndex::build(&tax, common::toy_index().cfg().clone(), Default::default());
    let n_units = corpus.len();
    let n_concepts = tax.len();
    // rankings do not depend on rejects; select applies suppression on top
    let rankings: Vec<_> = corpus.units().iter().map(|u| index.rank(&index.analyze(u))).collect();
    let spot_check = corpus.units()[0].clone();
    let step = prop_oneof![
        3 => (0..n_units, 0..n_concepts).prop_map(|(u, c)| Step::Reject(u, c % 6)),
        1 => (0..n_units, 0..n_concepts).prop_map(|(u, c)| Step::Accept(u, c % 6)),
        1 => (0..n_units, 0..n_concepts).prop_map(|(u, c)| Step::Unlink(u, c % 6)),
    ];
    let strategy = (prop::collection::vec(step, 0..80), 1u32..5, 0.0f64..0.5);
    let mut runner = TestRunner::new(Config {
        cases: SUPPRESSION_CASES,
        failure_persistence: None,
        ..Config::default()
    });
    let suppressed_pairs = Cell::new(0usize);
    let manual_links = Cell::new(0usize);
    let result = runner.run(&strategy, |(steps, max_rejects, threshold)| {
        let mut store = TraceStore::in_memory(tax.clone(), corpus.clone());
        let units = corpus.units();
        let concepts: Vec<String> = tax.concepts().map(|c| c.id.clone()).collect();
        let settings = RecommenderSettings::new(threshold, max_rejects, usize::MAX).unwrap();
        for s in &steps {
            let touched = match *s {
                Step::Accept(u, _) | Step::Reject(u, _) | Step::Unlink(u, _) => u,
            };
            let _ = match *s {
                Step::Accept(u, c) => store.record_decision(&units[u].unit_id, &concepts[c], Decision::Accept, 0.5),
                Step::Reject(u, c) => store.record_decision(&units[u].unit_id, &concepts[c], Decision::Reject, 0.5),
                Step::Unlink(u, c) => store.unlink(&units[u].unit_id, &concepts[c]).map(|_| ()),
            };
            // only the touched unit's suggestions can change
            for sug in select(rankings[touched].clone(), &settings, &store) {
                if store.reject_count(&sug.unit_id, &sug.concept_id) >= max_rejects {
                    return Err(TestCaseError::fail(format!(
                        "({}, {}) shown after {} rejects",
                        sug.unit_id,
                        sug.concept_id,
                        store.reject_count(&sug.unit_id, &sug.concept_id)
                    )));
                }
            }
        }
        let direct = index.recommend(&spot_check, &settings, &store);
        if direct != select(rankings[0].clone(), &settings, &store) {
            return Err(TestCaseError::fail("recommend and select disagree"));
        }
        let suppressed: Vec<(String, String)> = store
            .state()
            .rejects
            .iter()
            .filter(|(_, n)| **n >= max_rejects)
            .map(|(p, _)| p.clone())
            .collect();
        suppressed_pairs.set(suppressed_pairs.get() + suppressed.len());
        for (u, c) in suppressed {
            if store.link(&u, &c).is_none() {
                store
                    .create_manual_link(&u, &c)
                    .map_err(|e| TestCaseError::fail(format!("manual link ({u}, {c}) failed: {e}")))?;
                manual_links.set(manual_links.get() + 1);
            }
        }
        Ok(())
    });
    match result {
        Ok(()) => check(
            suppressed_pairs.get() > 0 && manual_links.get() > 0,
            format!(
                "{SUPPRESSION_CASES} sequences, 0 violations, {} suppressed pairs, {} manual links created",
                suppressed_pairs.get(),
                manual_links.get()
            ),
        ),
        Err(e) => Err(e.to_string()),
    }
}

fn contains_verbatim(text: &str, label: &str) -> bool {
    let text = text.to_lowercase();
    let label = label.to_lowercase();
    text.match_indices(&label).any(|(i, _)| {
        let before = text[..i].chars().next_back();
        let after = text[i + label.len()..].chars().next();
        !before.is_some_and(char::is_alphanumeric) && !after.is_some_and(char::is_alphanumeric)
    })
}

fn fixture_end_to_end() -> Outcome {
    let start = Instant::now();
    let tax = common::toy_taxonomy();
    let index = common::toy_index();
    let units = common::toy_units();
    let gold = GoldSet::from_csv(&common::read("gold.csv"), "gold.csv").map_err(|e| e.to_string())?;
    gold.validate(&tax, &common::toy_corpus()).map_err(|e| e.to_string())?;

    let levels = tax.depth();
    let settings = RecommenderSettings::new(EXACT_LABEL_FLOOR, 3, usize::MAX).unwrap();
    let mut verbatim = 0;
    let mut missed = Vec::new();
    for u in &units {
        let scored: BTreeMap<String, f64> = index
            .rank(&index.analyze(u))
            .into_iter()
            .map(|s| (s.concept_id, s.confidence))
            .collect();
        for c in tax.concepts() {
            if c.labels().any(|l| contains_verbatim(&u.text, l)) {
                verbatim += 1;
                if scored[&c.id] < EXACT_LABEL_FLOOR {
                    missed.push(format!("{}:{}={:.3}", u.unit_id, c.id, scored[&c.id]));
                }
            }
        }
    }

    let exact_gold = GoldSet::new(
        gold.pairs()
            .iter()
            .filter(|(u, c)| {
                let text = &units.iter().find(|x| &x.unit_id == u).unwrap().text;
                tax.get(c).unwrap().labels().any(|l| contains_verbatim(text, l))
            })
            .cloned(),
        "exact",
    )
    .map_err(|e| e.to_string())?;
    let report = threshold_sweep(&index, &units, &exact_gold, &settings, &[EXACT_LABEL_FLOOR])
        .map_err(|e| e.to_string())?;
    let recall = report.curve[0].recall;
    let elapsed = start.elapsed();

    check(
        tax.len() >= 20 && levels == 3 && units.len() == 10 && missed.is_empty() && recall == 1.0 && elapsed < TIME_BUDGET,
        format!(
            "{} concepts, {levels} levels, {} units, {verbatim} verbatim pairs, missed {missed:?}, exact-subset recall {recall:.3} ({} gold pairs), {} ms",
            tax.len(),
            units.len(),
            exact_gold.len(),
            elapsed.as_millis()
        ),
    )
}

fn metric_fixtures() -> Outcome {
    let ap = average_precision(&["c1", "c2", "c3"], &BTreeSet::from(["c1", "c3"]));
    let proposed = BTreeSet::from([
        ("u1".to_string(), "c1".to_string()),
        ("u1".to_string(), "c2".to_string()),
    ]);
    let gold = GoldSet::new([("u1".to_string(), "c1".to_string())], "fixture").unwrap();
    let pr = precision_recall(&proposed, &gold);
    let ok = (ap - 0.833333).abs() <= 1e-6
        && (ap - 5.0 / 6.0).abs() <= METRIC_TOLERANCE
        && (pr.precision - 0.5).abs() <= METRIC_TOLERANCE
        && (pr.recall - 1.0).abs() <= METRIC_TOLERANCE
        && (pr.f1 - 2.0 / 3.0).abs() <= METRIC_TOLERANCE;
    check(
        ok,
        format!("AP {ap:.9}, P {:.4}, R {:.4}, F1 {:.9}", pr.precision, pr.recall, pr.f1),
    )
}

fn round_trips() -> Outcome {
    let tax = common::toy_taxonomy();
    let canonical = to_canonical_csv(&tax);
    let back = parse_taxonomy_csv(canonical.as_bytes(), "canonical").map_err(|e| e.to_string())?.taxonomy;
    let taxonomy_ok = back == tax && to_canonical_csv(&back) == canonical;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let log = dir.path().join("decisions.jsonl");
    let (t, c) = common::shared();
    let mut store = TraceStore::open(t.clone(), c.clone(), &log).map_err(|e| e.to_string())?;
    let d = |s: &mut TraceStore, u: &str, k: &str, dec, conf| s.record_decision(u, k, dec, conf).map_err(|e| e.to_string());
    d(&mut store, "R01", "T11", Decision::Accept, 0.91)?;
    d(&mut store, "R01", "T111", Decision::Accept, 0.733)?;
    d(&mut store, "R02", "T1", Decision::Reject, 0.21)?;
    d(&mut store, "R02", "T1", Decision::Reject, 0.21)?;
    d(&mut store, "R03", "T12", Decision::Accept, 1.0 / 3.0)?;
    store.create_manual_link("R09", "T32").map_err(|e| e.to_string())?;
    store.create_manual_link("R05", "T21").map_err(|e| e.to_string())?;
    store.unlink("R01", "T111").map_err(|e| e.to_string())?;

    let mut links_ok = true;
    for format in [LinkFormat::Csv, LinkFormat::Jsonl] {
        let first = store.export_links(format);
        let mut fresh = TraceStore::in_memory(t.clone(), c.clone());
        fresh.import_links(&first, format).map_err(|e| e.to_string())?;
        links_ok &= fresh.export_links(format) == first;
    }

    let state = store.state().clone();
    drop(store);
    let reopened = TraceStore::open(t, c, &log).map_err(|e| e.to_string())?;
    let replay_ok = reopened.state() == &state && reopened.reject_count("R02", "T1") == 2;

    check(
        taxonomy_ok && links_ok && replay_ok,
        format!("taxonomy csv {taxonomy_ok}, link export {links_ok}, log replay {replay_ok}"),
    )
}

fn turtle_twin() -> Outcome {
    let csv = common::toy_taxonomy();
    let ttl = common::toy_turtle();
    let sv_labels = ttl.concepts().filter(|c| !c.alt_labels.is_empty()).count();
    check(
        ttl == csv && ttl.depth() == 3,
        format!("{} concepts, depth {}, {sv_labels} with Swedish labels", ttl.len(), ttl.depth()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("oracle equivalence", oracle_equivalence),
        ("threshold monotonicity", threshold_monotonicity),
        ("suppression", suppression),
        ("fixture end-to-end", fixture_end_to_end),
        ("metric fixtures", metric_fixtures),
        ("round trips", round_trips),
        ("turtle subset", turtle_twin),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
