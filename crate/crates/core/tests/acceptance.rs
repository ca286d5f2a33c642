//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Run with `cargo test -p courseqa-core --test acceptance -- --nocapture`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use courseqa_core::app::{parse_suite, run_entries, Expect, Pipeline, Status};
use courseqa_core::engine::{brute_force_evaluate, evaluate, ResultSet};
use courseqa_core::fuzz;
use courseqa_core::intent::{decompose, Connective, DecomposedIntent, QueryIntent};
use courseqa_core::kb::{
    apply_inference, graph_from_records, load_corpus, CourseRecord, Graph, Property, Term, Triple,
};
use courseqa_core::query::{build_query, compact, serialize, BuildOptions, Select};

const STANDARD_SIZE: usize = 57;
const STANDARD_BUDGET: Duration = Duration::from_secs(5);
const NEGATIVE_MIN: usize = 20;
const FUZZ_CASES: u64 = 100;
const FUZZ_BUDGET: Duration = Duration::from_secs(60);
const LAW_CASES: u64 = 50;
const LATENCY_COURSES: usize = 1_000;
const LATENCY_MEDIAN_MS: f64 = 100.0;
const NESTED_QUESTION: &str = "Ai đã có viết sách \"Toan\" và sách \"Van\"?";

fn data(path: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(path)
}

fn read(path: &str) -> String {
    std::fs::read_to_string(data(path)).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn demo() -> Graph {
    load_corpus(data("demo_corpus.jsonl"))
        .expect("demo corpus")
        .graph
}

fn rows(r: &ResultSet) -> BTreeSet<String> {
    r.rows().expect("row result").iter().cloned().collect()
}

fn compile(d: &DecomposedIntent) -> Select {
    build_query(d, &BuildOptions::default()).expect("intent compiles")
}

fn run(q: &Select, g: &Graph) -> ResultSet {
    evaluate(q, g).expect("evaluates")
}

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn standard_suite() -> Outcome {
    let entries = parse_suite(&read("suites/standard.jsonl")).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let result = run_entries(&entries, &demo(), &Pipeline::seed());
    let wall = start.elapsed();
    let failed: Vec<String> = result
        .outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| format!("#{} {:?}: {}", o.index, o.question, o.reasons.join("; ")))
        .collect();
    let line = format!(
        "{} in {:.1} ms",
        result.summary(),
        wall.as_secs_f64() * 1000.0
    );
    if result.total != STANDARD_SIZE {
        return Err(format!(
            "expected {STANDARD_SIZE} questions, found {}",
            result.total
        ));
    }
    if !failed.is_empty() {
        return Err(format!("{line}; failures: {}", failed.join(" | ")));
    }
    if wall >= STANDARD_BUDGET {
        return Err(format!("{line}; over {STANDARD_BUDGET:?}"));
    }
    Ok(line)
}

fn rule_coverage() -> Outcome {
    let entries = parse_suite(&read("suites/standard.jsonl")).map_err(|e| e.to_string())?;
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for e in &entries {
        for x in &e.expect {
            if let Expect::Rule(id) = x {
                *seen.entry(id.clone()).or_default() += 1;
            }
        }
    }
    let grammar = Pipeline::seed().grammar;
    let mut problems = Vec::new();
    for rule in &grammar.rules {
        match seen.remove(&rule.id) {
            Some(1) => {}
            Some(n) => problems.push(format!("{} expected {n} times", rule.id)),
            None => problems.push(format!("{} never expected", rule.id)),
        }
    }
    for id in seen.keys() {
        problems.push(format!("{id} is not a grammar rule"));
    }
    if problems.is_empty() {
        Ok(format!("{} rules, each expected once", grammar.rules.len()))
    } else {
        Err(problems.join("; "))
    }
}

fn negative_suite() -> Outcome {
    let entries = parse_suite(&read("suites/negative.jsonl")).map_err(|e| e.to_string())?;
    if entries.len() < NEGATIVE_MIN {
        return Err(format!(
            "only {} questions, need {NEGATIVE_MIN}",
            entries.len()
        ));
    }
    if let Some(e) = entries.iter().find(|e| e.expect != [Expect::NoParse]) {
        return Err(format!("{:?} does not expect no_parse", e.question));
    }
    let graph = demo();
    let pipeline = Pipeline::seed();
    let parsed: Vec<&str> = entries
        .iter()
        .filter(|e| pipeline.answer(&e.question, &graph).status != Status::NoParse)
        .map(|e| e.question.as_str())
        .collect();
    if parsed.is_empty() {
        Ok(format!("{}/{} rejected", entries.len(), entries.len()))
    } else {
        Err(format!("analyzed: {parsed:?}"))
    }
}

/// Three authors, three courses; only Nguyen wrote both Toan and Van.
fn three_by_three() -> Graph {
    let rec = |id: &str, name: &str, authors: &[&str]| CourseRecord {
        id: id.into(),
        name: name.into(),
        authors: authors.iter().map(|a| (*a).into()).collect(),
        ..Default::default()
    };
    graph_from_records(&[
        rec("1", "Toan", &["Nguyen", "Tran"]),
        rec("2", "Van", &["Nguyen", "Le"]),
        rec("3", "Ly", &["Tran", "Le"]),
    ])
}

fn nested_golden() -> Outcome {
    let graph = demo();
    let report = Pipeline::seed().answer(NESTED_QUESTION, &graph);
    let text = report.generated_query.ok_or("no query generated")?;
    let golden = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/nested_and.sparql"),
    )
    .map_err(|e| e.to_string())?;
    if compact(&text) != compact(&golden) {
        return Err(format!("query differs from golden:\n{text}"));
    }
    let q = courseqa_core::query::read(&text).map_err(|e| e.to_string())?;
    let small = three_by_three();
    let got = run(&q, &small);
    let oracle = brute_force_evaluate(&q, &small).map_err(|e| e.to_string())?;
    let want = ResultSet::Rows(vec!["Nguyen".into()]);
    if got != want || oracle != want {
        return Err(format!(
            "evaluate {got:?}, oracle {oracle:?}, want {want:?}"
        ));
    }
    Ok("golden matches; answers [Nguyen] on 3x3 graph, oracle agrees".into())
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    let mut largest = 0;
    let mut nonempty = 0;
    for seed in 0..FUZZ_CASES {
        let c = fuzz::case(seed);
        largest = largest.max(c.graph.len());
        let fast = evaluate(&c.query, &c.graph);
        let slow = brute_force_evaluate(&c.query, &c.graph);
        if fast.as_ref().is_ok_and(|r| !r.is_empty()) {
            nonempty += 1;
        }
        if fast != slow {
            mismatches.push(format!("seed {seed}: {fast:?} vs {slow:?}"));
        }
    }
    let wall = start.elapsed();
    if !mismatches.is_empty() {
        return Err(format!(
            "{} mismatches: {}",
            mismatches.len(),
            mismatches.join(" | ")
        ));
    }
    if largest > fuzz::MAX_FUZZ_TRIPLES {
        return Err(format!(
            "graph of {largest} triples exceeds {}",
            fuzz::MAX_FUZZ_TRIPLES
        ));
    }
    if wall >= FUZZ_BUDGET {
        return Err(format!("took {wall:?}"));
    }
    Ok(format!(
        "{FUZZ_CASES} cases ({nonempty} non-empty), 0 mismatches, largest graph {largest} triples, {:.1} ms",
        wall.as_secs_f64() * 1000.0
    ))
}

/// Whole-query result against the intersection or union of per-value results.
fn law(connective: Connective, seed: u64) -> Result<(), String> {
    let mut rng = fuzz::rng(seed);
    let graph = fuzz::random_graph(&mut rng);
    let intent: QueryIntent = fuzz::random_multi_intent(&mut rng, connective);
    let d = decompose(&intent);
    let whole = rows(&run(&compile(&d), &graph));
    let parts: Vec<BTreeSet<String>> = d
        .intents()
        .iter()
        .map(|i| {
            rows(&run(
                &compile(&DecomposedIntent::Chain(vec![i.clone()])),
                &graph,
            ))
        })
        .collect();
    let combined = parts
        .iter()
        .skip(1)
        .fold(parts[0].clone(), |acc, p| match connective {
            Connective::And => acc.intersection(p).cloned().collect(),
            Connective::Or => acc.union(p).cloned().collect(),
        });
    if whole == combined {
        Ok(())
    } else {
        Err(format!("seed {seed} {d}: {whole:?} vs {combined:?}"))
    }
}

fn algebraic_laws() -> Outcome {
    let mut failures = Vec::new();
    for (connective, offset) in [(Connective::And, 10_000), (Connective::Or, 20_000)] {
        for seed in 0..LAW_CASES {
            if let Err(e) = law(connective, offset + seed) {
                failures.push(e);
            }
        }
    }
    if failures.is_empty() {
        Ok(format!(
            "{LAW_CASES} And cases, {LAW_CASES} Or cases, all equal"
        ))
    } else {
        Err(failures.join(" | "))
    }
}

fn inference_closure() -> Outcome {
    let graph = demo();
    let mut missing = 0;
    let mut checked = 0;
    for t in graph.triples() {
        let Some(inv) = t.property.inverse() else {
            continue;
        };
        if !matches!(t.property, Property::Write | Property::Publish) {
            continue;
        }
        checked += 1;
        let Term::Entity(object) = t.object else {
            missing += 1;
            continue;
        };
        let back = Triple {
            subject: object,
            property: inv,
            object: Term::Entity(t.subject),
        };
        if !graph.contains(&back) {
            missing += 1;
        }
    }
    if checked == 0 {
        return Err("no write/publish triples in corpus".into());
    }
    if missing > 0 {
        return Err(format!("{missing} of {checked} inverse triples missing"));
    }
    let again = apply_inference(&graph);
    if again.canonical() != graph.canonical() {
        return Err("second inference pass changed the graph".into());
    }
    let mut copy = graph.clone();
    let added = copy.apply_inference();
    if added != 0 {
        return Err(format!("second pass added {added} triples"));
    }
    Ok(format!(
        "{checked} write/publish triples closed; second pass adds 0"
    ))
}

/// The demo records repeated under fresh ids until there are enough courses.
fn synthetic_records(n: usize) -> Vec<CourseRecord> {
    let base: Vec<CourseRecord> = read("demo_corpus.jsonl")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).expect("demo record"))
        .collect();
    (0..n)
        .map(|i| {
            let mut r = base[i % base.len()].clone();
            r.id = format!("syn{i}");
            if i >= base.len() {
                r.name = format!("{} {}", r.name, i / base.len());
            }
            r
        })
        .collect()
}

fn latency() -> Outcome {
    let graph = graph_from_records(&synthetic_records(LATENCY_COURSES));
    let courses = graph.count_class(courseqa_core::kb::Class::Course);
    if courses != LATENCY_COURSES {
        return Err(format!("synthetic corpus has {courses} courses"));
    }
    let entries = parse_suite(&read("suites/standard.jsonl")).map_err(|e| e.to_string())?;
    let pipeline = Pipeline::seed();
    let mut times: Vec<f64> = Vec::new();
    for e in &entries {
        let r = pipeline.answer(&e.question, &graph);
        if r.status == Status::Error || r.status == Status::NoParse {
            return Err(format!("{:?} failed: {:?}", e.question, r.failure));
        }
        times.push(r.elapsed_ms);
    }
    times.sort_by(f64::total_cmp);
    let median = times[times.len() / 2];
    let max = times[times.len() - 1];
    let line = format!(
        "median {median:.3} ms, max {max:.3} ms over {} questions, {courses} courses",
        times.len()
    );
    if median < LATENCY_MEDIAN_MS {
        Ok(line)
    } else {
        Err(line)
    }
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("standard suite 57/57 under 5 s", standard_suite),
        ("rule coverage exactly once", rule_coverage),
        ("negative suite all no_parse", negative_suite),
        ("nested And golden and 3x3 evaluation", nested_golden),
        ("oracle equivalence on 100 fuzz cases", oracle_equivalence),
        ("And/Or algebraic laws", algebraic_laws),
        ("inference closure and fixpoint", inference_closure),
        ("median latency under 100 ms at 1,000 courses", latency),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                println!("FAIL {name}: {detail}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn golden_text_round_trips() {
    let text = serialize(&compile(&decompose(
        &QueryIntent::new(courseqa_core::intent::Target::Author).with_multi(
            courseqa_core::intent::Slot::Title,
            Connective::And,
            &["Toan", "Van"],
        ),
    )));
    let again = serialize(&courseqa_core::query::read(&text).unwrap());
    assert_eq!(text, again);
}
