//! Question answering end to end, and batch suites.

mod suite;

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

pub use suite::{
    parse_suite, run_entries, run_suite, run_suite_str, CaseOutcome, Expect, SuiteEntry,
    SuiteError, SuiteResult,
};

use crate::engine::{evaluate, ResultSet};
use crate::intent::{build_intent, decompose, TargetTable};
use crate::kb::Graph;
use crate::lexicon::{normalize, segment, Lexicon};
use crate::parser::{parse, Grammar};
use crate::query::{build_query, serialize, BuildOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "ok")]
    Ok,
    #[serde(rename = "no_parse")]
    NoParse,
    #[serde(rename = "empty")]
    EmptyResult,
    /// A stage after parsing failed; indicates a defect, not bad input.
    #[serde(rename = "error")]
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::NoParse => "no_parse",
            Status::EmptyResult => "empty",
            Status::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    /// Token index where analysis stopped.
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnswerReport {
    pub status: Status,
    pub rule_id: Option<String>,
    pub parse_tree: Option<String>,
    pub intent: Option<String>,
    pub generated_query: Option<String>,
    pub answers: Option<ResultSet>,
    pub failure: Option<Failure>,
    pub elapsed_ms: f64,
}

impl AnswerReport {
    fn blank(status: Status) -> Self {
        AnswerReport {
            status,
            rule_id: None,
            parse_tree: None,
            intent: None,
            generated_query: None,
            answers: None,
            failure: None,
            elapsed_ms: 0.0,
        }
    }

    /// Plain-text rendering: status, rule, query, answers, time.
    pub fn render(&self, explain: bool) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "status: {}", self.status.as_str());
        if let Some(f) = &self.failure {
            let _ = writeln!(out, "failure: token {}: {}", f.position, f.message);
        }
        if let Some(rule) = &self.rule_id {
            let _ = writeln!(out, "rule: {rule}");
        }
        if explain {
            if let Some(tree) = &self.parse_tree {
                let _ = writeln!(out, "parse tree:");
                for line in tree.lines() {
                    let _ = writeln!(out, "  {line}");
                }
            }
            if let Some(intent) = &self.intent {
                let _ = writeln!(out, "intent: {intent}");
            }
        }
        if let Some(q) = &self.generated_query {
            let _ = writeln!(out, "query:");
            for line in q.lines() {
                let _ = writeln!(out, "  {line}");
            }
        }
        match &self.answers {
            Some(ResultSet::Rows(rows)) => {
                let _ = writeln!(out, "answers ({}):", rows.len());
                for r in rows {
                    let _ = writeln!(out, "  - {r}");
                }
            }
            Some(ResultSet::Count { count }) => {
                let _ = writeln!(out, "answers: count = {count}");
            }
            None => {}
        }
        let _ = writeln!(out, "time: {:.3} ms", self.elapsed_ms);
        out
    }
}

/// Everything needed to answer questions, apart from the graph.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub lexicon: Lexicon,
    pub grammar: Grammar,
    pub targets: TargetTable,
    pub options: BuildOptions,
}

impl Default for Pipeline {
    fn default() -> Self {
        Pipeline::seed()
    }
}

impl Pipeline {
    /// The bundled lexicon, grammar and target table.
    pub fn seed() -> Self {
        Pipeline {
            lexicon: Lexicon::seed(),
            grammar: Grammar::seed(),
            targets: TargetTable::seed(),
            options: BuildOptions::default(),
        }
    }

    pub fn with_options(mut self, options: BuildOptions) -> Self {
        self.options = options;
        self
    }

    /// Runs every stage; failures are reported through the status.
    pub fn answer(&self, question: &str, graph: &Graph) -> AnswerReport {
        let start = Instant::now();
        let mut report = self.run(question, graph);
        report.elapsed_ms = start.elapsed().as_secs_f64() * 1000.0;
        report
    }

    fn run(&self, question: &str, graph: &Graph) -> AnswerReport {
        if normalize(question).is_empty() {
            let mut r = AnswerReport::blank(Status::NoParse);
            r.failure = Some(Failure {
                position: 0,
                message: "empty question".into(),
            });
            return r;
        }
        let tokens = segment(question, &self.lexicon);
        let tree = match parse(&tokens, &self.grammar) {
            Ok(t) => t,
            Err(e) => {
                let mut r = AnswerReport::blank(Status::NoParse);
                let near = tokens
                    .get(e.furthest)
                    .map(|t| format!("near {:?}", t.surface))
                    .unwrap_or_else(|| "at end of question".into());
                r.failure = Some(Failure {
                    position: e.furthest,
                    message: format!("question is not analyzed: no rule matches ({near})"),
                });
                return r;
            }
        };
        let mut report = AnswerReport::blank(Status::Error);
        report.rule_id = Some(tree.rule_id.clone());
        report.parse_tree = Some(tree.render());

        let intent = match build_intent(&tree, &self.targets) {
            Ok(i) => i,
            Err(e) => {
                report.status = Status::NoParse;
                let position = match e {
                    crate::intent::IntentError::MixedConnective { position } => position,
                    _ => 0,
                };
                report.failure = Some(Failure {
                    position,
                    message: e.to_string(),
                });
                return report;
            }
        };
        let decomposed = decompose(&intent);
        report.intent = Some(decomposed.to_string());
        let query = match build_query(&decomposed, &self.options) {
            Ok(q) => q,
            Err(e) => {
                report.failure = Some(Failure {
                    position: 0,
                    message: e.to_string(),
                });
                return report;
            }
        };
        report.generated_query = Some(serialize(&query));
        match evaluate(&query, graph) {
            Ok(result) => {
                report.status = if result.is_empty() {
                    Status::EmptyResult
                } else {
                    Status::Ok
                };
                report.answers = Some(result);
            }
            Err(e) => {
                report.failure = Some(Failure {
                    position: 0,
                    message: e.to_string(),
                });
            }
        }
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{load_corpus_str, DEMO_CORPUS};

    fn demo() -> Graph {
        load_corpus_str(DEMO_CORPUS).graph
    }

    #[test]
    fn answers_the_basic_question() {
        let r = Pipeline::seed().answer("Ai đã viết sách Toan?", &demo());
        assert_eq!(r.status, Status::Ok);
        assert_eq!(r.rule_id.as_deref(), Some("Q1.1a"));
        assert_eq!(
            r.answers,
            Some(ResultSet::Rows(vec!["Nguyễn Văn An".into()]))
        );
        assert!(r
            .generated_query
            .unwrap()
            .starts_with("SELECT DISTINCT ?authorname"));
    }

    #[test]
    fn greeting_is_not_analyzed() {
        let r = Pipeline::seed().answer("xin chào", &demo());
        assert_eq!(r.status, Status::NoParse);
        assert!(r.answers.is_none());
        assert!(r.failure.is_some());
    }

    #[test]
    fn unknown_title_gives_empty_result() {
        let r = Pipeline::seed().answer("Ai đã viết sách KhongTonTai?", &demo());
        assert_eq!(r.status, Status::EmptyResult);
        assert_eq!(r.answers, Some(ResultSet::Rows(vec![])));
    }

    #[test]
    fn empty_question_is_no_parse() {
        let r = Pipeline::seed().answer("   ", &demo());
        assert_eq!(r.status, Status::NoParse);
    }

    #[test]
    fn render_has_fixed_section_order() {
        let r = Pipeline::seed().answer("Ai đã viết sách Toan?", &demo());
        let text = r.render(false);
        let pos = |s: &str| text.find(s).unwrap();
        assert!(pos("status:") < pos("rule:"));
        assert!(pos("rule:") < pos("query:"));
        assert!(pos("query:") < pos("answers"));
        assert!(pos("answers") < pos("time:"));
    }
}
