//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#[path = "common/synthetic.rs"]
mod synthetic;

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Deserialize;

use mcqlint::batch::{self, Mode};
use mcqlint::corpus::{self, Dataset, GoldLabels};
use mcqlint::criteria::FlagSet;
use mcqlint::detectors::{DatasetContext, Linter};
use mcqlint::evalharness::{self, predictions_from_reports};
use mcqlint::lingmetrics::{self, MetricsConfig, TextScope, TrigramModel};
use mcqlint::llmgate::{Gate, GateSettings, StubBackend, StubRecord};
use mcqlint::report::{EvalReport, Format, LintReport, MetricsReport, Provenance, SCHEMA_VERSION};
use mcqlint::textkit::TextKit;
use mcqlint::{CriterionId, DetectorConfig, Mcq};

type Check = std::result::Result<String, String>;
type NamedCheck = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(started: Instant, limit: Duration) -> std::result::Result<(), String> {
    let took = started.elapsed();
    ensure(took < limit, || format!("took {took:.2?}, limit {limit:?}"))
}

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

#[derive(Debug, Deserialize)]
struct StubLine {
    purpose: String,
    response: String,
}

#[derive(Debug, Deserialize)]
struct Fixture {
    id: String,
    criterion: String,
    case: String,
    expect: bool,
    domain: String,
    stem: String,
    options: Vec<String>,
    key: usize,
    stub: Vec<StubLine>,
}

impl Fixture {
    fn mcq(&self) -> Mcq {
        Mcq::new(&self.id, &self.domain, &self.stem, self.options.clone(), self.key).unwrap()
    }

    fn criterion(&self) -> CriterionId {
        CriterionId::ALL
            .into_iter()
            .find(|c| c.key() == self.criterion)
            .unwrap_or_else(|| panic!("{}: unknown criterion {}", self.id, self.criterion))
    }

    fn gate(&self) -> Gate {
        Gate::stub(StubBackend::from_records(self.stub.iter().map(|s| StubRecord {
            question_id: self.id.clone(),
            purpose: s.purpose.clone(),
            response: s.response.clone(),
        })))
    }
}

fn compliance_fixtures() -> Vec<Fixture> {
    let text = std::fs::read_to_string(fixtures_dir().join("compliance.jsonl")).unwrap();
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn proton() -> Mcq {
    Mcq::new(
        "q1",
        "chemistry",
        "What is protons?",
        vec![
            "positively charged particles".into(),
            "sum the number of protons and neutrons".into(),
            "negatively charged subatomic particles".into(),
            "he discovered the charge of electron".into(),
        ],
        0,
    )
    .unwrap()
}

fn oracle_stub(qs: &[Mcq]) -> Gate {
    let letters = ["A", "B", "C", "D", "E"];
    Gate::stub(StubBackend::from_records(qs.iter().map(|q| StubRecord {
        question_id: q.id.clone(),
        purpose: "answer".into(),
        response: letters[q.key].into(),
    })))
}

fn proton_golden() -> Check {
    let started = Instant::now();
    let q = proton();
    let gate = oracle_stub(std::slice::from_ref(&q));
    let kit = TextKit::bundled();
    let r = mcqlint::detectors::run_all(&q, &DetectorConfig::default(), kit, &gate);
    let got: Vec<CriterionId> = r.flags().flagged().collect();
    let want = [
        CriterionId::ImplausibleDistractors,
        CriterionId::LogicalCues,
        CriterionId::GrammaticalCues,
    ];
    ensure(got == want, || format!("flagged {got:?}"))?;
    ensure(!r.acceptable, || "reported acceptable".into())?;
    let cfg = MetricsConfig {
        scope: TextScope::StemAndOptions,
        answerability: true,
    };
    let m = lingmetrics::compute(&q, kit, TrigramModel::bundled(), &gate, &cfg).map_err(|e| e.to_string())?;
    ensure(m.diversity == 1.0, || format!("diversity {}", m.diversity))?;
    ensure(m.grammar_errors == 1, || format!("grammar_errors {}", m.grammar_errors))?;
    ensure(m.bloom_level == 0, || format!("bloom_level {}", m.bloom_level))?;
    ensure(m.answerability == Some(1), || format!("answerability {:?}", m.answerability))?;
    within(started, Duration::from_secs(1))?;
    Ok(format!("3 flags, diversity 1.0, grammar 1, bloom 0, answerability 1 in {:.0?}", started.elapsed()))
}

fn compliance() -> Check {
    let started = Instant::now();
    let fixtures = compliance_fixtures();
    let mut per: BTreeMap<&str, usize> = BTreeMap::new();
    for f in &fixtures {
        *per.entry(f.criterion.as_str()).or_default() += 1;
    }
    let thin: Vec<&str> = CriterionId::ALL
        .iter()
        .map(|c| c.key())
        .filter(|k| per.get(k).copied().unwrap_or(0) < 3)
        .collect();
    ensure(thin.is_empty(), || format!("fewer than 3 fixtures for {thin:?}"))?;
    for c in CriterionId::ALL {
        let cases: Vec<&str> = fixtures.iter().filter(|f| f.criterion == c.key()).map(|f| f.case.as_str()).collect();
        for kind in ["positive", "negative", "boundary"] {
            ensure(cases.contains(&kind), || format!("{} has no {kind} fixture", c.key()))?;
        }
    }

    let kit = TextKit::bundled();
    let ds = Dataset::new(fixtures.iter().map(Fixture::mcq).collect());
    let ctx = DatasetContext::from_dataset(kit, &ds);
    let cfg = DetectorConfig::default();
    let mut wrong = Vec::new();
    for f in &fixtures {
        let gate = f.gate();
        let l = Linter {
            cfg: &cfg,
            kit,
            gate: &gate,
            context: &ctx,
        };
        let got = l.run_one(f.criterion(), &f.mcq());
        if got.flagged != f.expect || got.error.is_some() {
            wrong.push(f.id.clone());
        }
    }
    ensure(wrong.is_empty(), || format!("misclassified {wrong:?}"))?;
    within(started, Duration::from_secs(5))?;
    Ok(format!("{} fixtures over 19 criteria, 0 misclassified", fixtures.len()))
}

fn random_flags(rng: &mut StdRng, density: f64) -> FlagSet {
    let mut f = FlagSet::default();
    for c in CriterionId::ALL {
        f.set(c, rng.random_bool(density));
    }
    f
}

fn harness_algebra() -> Check {
    let started = Instant::now();
    let ds = synthetic::dataset(40, 7);
    let mut rng = StdRng::seed_from_u64(11);
    let gold: Vec<GoldLabels> = ds
        .questions
        .iter()
        .map(|q| GoldLabels {
            question_id: q.id.clone(),
            flags: random_flags(&mut rng, 0.2),
        })
        .collect();
    let with_gold = corpus::join(ds, gold.clone()).map_err(|e| e.to_string())?;
    let s = evalharness::evaluate(&with_gold, &gold).map_err(|e| e.to_string())?.overall;
    ensure(
        s.overall_accuracy == 1.0 && s.exact_match_ratio == 1.0 && s.hamming_loss == 0.0,
        || "identity is not perfect".into(),
    )?;
    ensure(
        s.per_criterion.iter().all(|c| c.f1.is_none_or(|f| f == 1.0)) && s.micro_f1 == Some(1.0),
        || "identity F1 below 1".into(),
    )?;

    for _ in 0..1000 {
        let n = rng.random_range(1..60);
        let density = rng.random_range(0.0..0.6);
        let rows: Vec<(FlagSet, FlagSet)> = (0..n)
            .map(|_| (random_flags(&mut rng, density), random_flags(&mut rng, density)))
            .collect();
        let s = evalharness::score(&rows);
        let cells = n * CriterionId::COUNT;
        let mismatched: usize = rows
            .iter()
            .map(|(g, p)| CriterionId::ALL.iter().filter(|&&c| g.get(c) != p.get(c)).count())
            .sum();
        ensure(s.hamming_loss == mismatched as f64 / cells as f64, || "hamming is not mismatches / cells".into())?;
        ensure(
            s.overall_accuracy == (cells - mismatched) as f64 / cells as f64,
            || "accuracy is not matches / cells".into(),
        )?;
        ensure((s.hamming_loss - (1.0 - s.overall_accuracy)).abs() <= f64::EPSILON, || {
            format!("hamming {} vs 1 - accuracy {}", s.hamming_loss, 1.0 - s.overall_accuracy)
        })?;
        for c in &s.per_criterion {
            ensure(s.exact_match_ratio <= c.accuracy(), || format!("EMR above accuracy of {}", c.criterion))?;
        }
        let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
        for (g, p) in &rows {
            for c in CriterionId::ALL {
                match (g.get(c), p.get(c)) {
                    (true, true) => tp += 1,
                    (false, true) => fp += 1,
                    (true, false) => fn_ += 1,
                    _ => {}
                }
            }
        }
        let pooled = (2 * tp + fp + fn_ > 0).then(|| 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64);
        let ok = match (s.micro_f1, pooled) {
            (Some(a), Some(b)) => (a - b).abs() < 1e-12,
            (None, None) => true,
            _ => false,
        };
        ensure(ok, || format!("micro F1 {:?} vs pooled {pooled:?}", s.micro_f1))?;
    }
    within(started, Duration::from_secs(10))?;
    Ok("identity perfect; 1000 random grids satisfy the identities".into())
}

fn permutation() -> Check {
    let fixtures = compliance_fixtures();
    let kit = TextKit::bundled();
    let ds = Dataset::new(fixtures.iter().map(Fixture::mcq).collect());
    let ctx = DatasetContext::from_dataset(kit, &ds);
    let cfg = DetectorConfig::default();
    let mut rng = StdRng::seed_from_u64(2024);
    let gates: HashMap<&str, Gate> = fixtures.iter().map(|f| (f.id.as_str(), f.gate())).collect();
    let base: Vec<FlagSet> = fixtures
        .iter()
        .map(|f| {
            let l = Linter { cfg: &cfg, kit, gate: &gates[f.id.as_str()], context: &ctx };
            l.run(&f.mcq()).flags()
        })
        .collect();
    for trial in 0..500 {
        let i = trial % fixtures.len();
        let f = &fixtures[i];
        let (m, order) = synthetic::shuffled(&f.mcq(), &mut rng);
        let l = Linter { cfg: &cfg, kit, gate: &gates[f.id.as_str()], context: &ctx };
        let flags = l.run(&m).flags();
        for c in CriterionId::ALL {
            if c != CriterionId::LostSequence && flags.get(c) != base[i].get(c) {
                return Err(format!("{} changed {} under order {order:?}", f.id, c.key()));
            }
        }
    }

    let gate = Gate::disabled();
    let l = Linter { cfg: &cfg, kit, gate: &gate, context: &ctx };
    let seq = |opts: &[&str]| {
        let m = Mcq::new("seq", "general", "How many years did it take?", opts.iter().map(|s| s.to_string()).collect(), 0).unwrap();
        l.run_one(CriterionId::LostSequence, &m).flagged
    };
    let sorted = [["1", "5", "10", "25"], ["1990", "1995", "2001", "2010"], ["2 %", "4 %", "8 %", "16 %"]];
    for s in sorted {
        ensure(!seq(&s), || format!("sorted {s:?} flagged"))?;
        let mut rev = s;
        rev.reverse();
        ensure(!seq(&rev), || format!("descending {rev:?} flagged"))?;
        let shuffled = [s[1], s[0], s[3], s[2]];
        ensure(seq(&shuffled), || format!("shuffled {shuffled:?} not flagged"))?;
    }
    Ok("500 shuffles stable outside lost_sequence; sorted vs shuffled sequences behave".into())
}

fn stub_records(qs: &[Mcq]) -> Vec<StubRecord> {
    qs.iter()
        .enumerate()
        .filter(|(i, _)| i % 3 == 0)
        .map(|(_, q)| StubRecord {
            question_id: q.id.clone(),
            purpose: "verify".into(),
            response: "Yes".into(),
        })
        .collect()
}

fn pipeline_artifacts(mode: Mode) -> std::result::Result<[String; 3], String> {
    let ds = synthetic::dataset(100, 42);
    let kit = TextKit::bundled();
    let gate = Gate::new(
        Box::new(StubBackend::from_records(stub_records(&ds.questions))),
        GateSettings::default(),
    )
    .map_err(|e| e.to_string())?;
    let cfg = DetectorConfig::default();
    let reports = batch::lint(mode, &ds, &cfg, kit, &gate);
    let prov = Provenance::new(&cfg, gate.backend_id(), gate.model(), false);
    let lint = LintReport::new(prov.clone(), reports.clone());
    let mcfg = MetricsConfig {
        scope: TextScope::StemAndOptions,
        answerability: true,
    };
    let scorer = TrigramModel::bundled();
    let metrics = batch::metrics(mode, &ds.questions, kit, scorer, &gate, &mcfg).map_err(|e| e.to_string())?;
    let counts: Vec<usize> = reports.iter().map(|r| r.flaw_count).collect();
    let groups = lingmetrics::group_summaries(&ds.questions, &counts, &metrics).map_err(|e| e.to_string())?;
    let mr = MetricsReport {
        schema_version: SCHEMA_VERSION.into(),
        provenance: prov.clone(),
        metrics_config: mcfg,
        scorer: "trigram".into(),
        band_source: Some("predictions".into()),
        questions: metrics,
        groups: Some(groups),
    };
    let preds = predictions_from_reports(&reports);
    let mut rng = StdRng::seed_from_u64(5);
    let gold: Vec<GoldLabels> = ds
        .questions
        .iter()
        .map(|q| GoldLabels { question_id: q.id.clone(), flags: random_flags(&mut rng, 0.15) })
        .collect();
    let with_gold = corpus::join(ds, gold).map_err(|e| e.to_string())?;
    let er = EvalReport {
        schema_version: SCHEMA_VERSION.into(),
        provenance: prov,
        predictions: "lint".into(),
        summary: evalharness::evaluate(&with_gold, &preds).map_err(|e| e.to_string())?,
    };
    let r = |x: mcqlint::Result<String>| x.map_err(|e| e.to_string());
    Ok([
        r(lint.render(Format::Json))? + &r(lint.render(Format::Csv))?,
        r(mr.render(Format::Json))? + &r(mr.render(Format::Csv))?,
        r(er.render(Format::Json))? + &r(er.render(Format::Table))?,
    ])
}

fn determinism() -> Check {
    let a = pipeline_artifacts(Mode::Parallel)?;
    let b = pipeline_artifacts(Mode::Parallel)?;
    let c = pipeline_artifacts(Mode::Sequential)?;
    for (i, name) in ["lint", "metrics", "evaluate"].iter().enumerate() {
        ensure(a[i] == b[i], || format!("{name} differs between runs"))?;
        ensure(a[i] == c[i], || format!("{name} differs between parallel and sequential"))?;
    }
    Ok(format!(
        "100 questions; lint {} B, metrics {} B, evaluate {} B identical across runs and modes",
        a[0].len(),
        a[1].len(),
        a[2].len()
    ))
}

fn frugality() -> Check {
    let clean = [
        ("Which organ pumps blood through the body?", ["heart", "stomach", "skin", "bone"]),
        ("Which planet is closest to the sun?", ["Mercury", "Venus", "Earth", "Mars"]),
        ("Which element has the chemical symbol Fe?", ["iron", "sulfur", "carbon", "neon"]),
        ("Which city was the capital of the Roman Empire?", ["Rome", "Athens", "Cairo", "Sparta"]),
        ("Which data structure uses first in, first out order?", ["queue", "tree", "graph", "hash table"]),
        ("Which instrument measures air pressure?", ["barometer", "thermometer", "ruler", "clock"]),
    ];

    let qs: Vec<Mcq> = clean
        .iter()
        .enumerate()
        .map(|(i, (s, o))| Mcq::new(format!("c{i}"), "general", *s, o.iter().map(|x| x.to_string()).collect(), 0).unwrap())
        .collect();
    let ds = Dataset::new(qs);
    let gate = Gate::new(Box::new(StubBackend::default()), GateSettings::default()).map_err(|e| e.to_string())?;
    let reports = batch::lint(Mode::Parallel, &ds, &DetectorConfig::default(), TextKit::bundled(), &gate);
    let consulted = reports.iter().flat_map(|r| &r.findings).filter(|f| f.llm_consulted).count();
    let t = gate.traffic();
    ensure(t.requests == 0 && t.backend_calls == 0 && consulted == 0, || {
        format!("{} requests, {} backend calls, {consulted} findings consulted", t.requests, t.backend_calls)
    })?;
    Ok(format!("{} candidate-free questions, 0 gate requests", ds.questions.len()))
}

fn throughput() -> Check {
    let ds = synthetic::dataset(1000, 99);
    let kit = TextKit::bundled();
    let mut cfg = DetectorConfig::default();
    for c in CriterionId::ALL {
        if c.tier() == mcqlint::Tier::LlmVerified {
            cfg.enabled.insert(c, false);
        }
    }
    let gate = Gate::disabled();
    let started = Instant::now();
    let reports = batch::lint(Mode::Parallel, &ds, &cfg, kit, &gate);
    let extra: Vec<(f64, usize, u8)> = batch::map_ordered(Mode::Parallel, &ds.questions, |q| {
        (
            lingmetrics::distinct3(q, TextScope::StemAndOptions),
            lingmetrics::grammar_errors(kit, q, TextScope::StemAndOptions),
            lingmetrics::bloom_level(kit, q),
        )
    });
    let took = started.elapsed();
    ensure(reports.len() == 1000 && extra.len() == 1000, || "missing results".into())?;
    within(started, Duration::from_secs(10))?;
    Ok(format!("1000 questions in {took:.2?}"))
}

/// Released data: `$MCQLINT_RELEASED_DATA/{questions.jsonl,gold.csv,cache/}`,
/// with the recorded model name in `$MCQLINT_RELEASED_MODEL`.
fn released_data() -> std::result::Result<Option<String>, String> {
    let Some(dir) = std::env::var_os("MCQLINT_RELEASED_DATA").map(PathBuf::from) else {
        return Ok(None);
    };
    let (q, g, cache) = (dir.join("questions.jsonl"), dir.join("gold.csv"), dir.join("cache"));
    if !(q.is_file() && g.is_file() && cache.is_dir()) {
        return Ok(None);
    }
    let ds = corpus::load(&q, Some(&g)).map_err(|e| e.to_string())?;
    let settings = GateSettings { cache_dir: Some(cache), ..GateSettings::default() };
    let model = std::env::var("MCQLINT_RELEASED_MODEL").map_err(|_| "MCQLINT_RELEASED_MODEL names the recorded model".to_string())?;
    let http_settings = mcqlint::llmgate::HttpSettings { model, ..Default::default() };
    let http = mcqlint::llmgate::HttpBackend::with_token(http_settings, settings.temperature, "cache-only".into())
        .map_err(|e| e.to_string())?;
    let gate = Gate::new(Box::new(http), settings).map_err(|e| e.to_string())?;
    let reports = batch::lint(Mode::Parallel, &ds, &DetectorConfig::default(), TextKit::bundled(), &gate);
    let s = evalharness::evaluate(&ds, &predictions_from_reports(&reports)).map_err(|e| e.to_string())?.overall;
    let (m, h) = (s.match_rate * 100.0, s.hamming_loss * 100.0);
    ensure((m - 75.3).abs() <= 5.0 && (h - 5.9).abs() <= 2.0, || format!("match {m:.1}%, hamming {h:.1}%"))?;
    Ok(Some(format!("match {m:.1}%, hamming {h:.1}%")))
}

fn main() {
    let checks: [NamedCheck; 7] = [
        ("example question golden check", proton_golden),
        ("criterion compliance suite", compliance),
        ("harness identity and algebra", harness_algebra),
        ("option permutation invariance", permutation),
        ("pipeline determinism", determinism),
        ("LLM frugality", frugality),
        ("tier 1+2 throughput", throughput),
    ];
    let mut failed = 0;
    for (name, f) in checks {
        match f() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    match released_data() {
        Ok(Some(detail)) => println!("PASS  released-data integration: {detail}"),
        Ok(None) => println!("SKIP  released-data integration: MCQLINT_RELEASED_DATA not set or incomplete"),
        Err(why) => {
            failed += 1;
            println!("FAIL  released-data integration: {why}");
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
