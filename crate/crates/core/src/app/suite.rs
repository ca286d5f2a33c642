//! Question suites: JSON Lines of `{question, expect}` run through a pipeline.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Pipeline, Status};
use crate::engine::ResultSet;
use crate::kb::Graph;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Expect {
    /// Parses with this rule id.
    Rule(String),
    /// Answers equal this set.
    Answers(Vec<String>),
    Count(u64),
    Nonempty,
    NoParse,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteEntry {
    pub question: String,
    pub expect: Vec<Expect>,
}

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("cannot read suite {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("suite entry {entry}: {message}")]
    Format { entry: usize, message: String },
}

#[derive(Deserialize)]
struct RawExpect {
    kind: String,
    #[serde(default)]
    value: Option<serde_json::Value>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawExpects {
    One(RawExpect),
    Many(Vec<RawExpect>),
}

#[derive(Deserialize)]
struct RawEntry {
    question: String,
    expect: RawExpects,
}

fn convert(raw: RawExpect) -> Result<Expect, String> {
    let value = raw.value;
    let need = |what: &str| format!("expectation {:?} needs a {what} value", raw.kind);
    match raw.kind.as_str() {
        "rule" => match value {
            Some(serde_json::Value::String(s)) => Ok(Expect::Rule(s)),
            _ => Err(need("string")),
        },
        "answers" => {
            let list: Vec<String> = value
                .map(serde_json::from_value)
                .transpose()
                .map_err(|_| need("string list"))?
                .ok_or_else(|| need("string list"))?;
            Ok(Expect::Answers(list))
        }
        "count" => value
            .and_then(|v| v.as_u64())
            .map(Expect::Count)
            .ok_or_else(|| need("non-negative integer")),
        "nonempty" => Ok(Expect::Nonempty),
        "no_parse" => Ok(Expect::NoParse),
        other => Err(format!("unknown expectation kind {other:?}")),
    }
}

/// Parses suite text; entries are numbered by line, from 1.
pub fn parse_suite(text: &str) -> Result<Vec<SuiteEntry>, SuiteError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let entry = i + 1;
        if line.trim().is_empty() || line.trim_start().starts_with("//") {
            continue;
        }
        let fail = |message: String| SuiteError::Format { entry, message };
        let raw: RawEntry = serde_json::from_str(line).map_err(|e| fail(e.to_string()))?;
        let raws = match raw.expect {
            RawExpects::One(e) => vec![e],
            RawExpects::Many(v) => v,
        };
        let expect = raws
            .into_iter()
            .map(convert)
            .collect::<Result<Vec<_>, _>>()
            .map_err(fail)?;
        out.push(SuiteEntry {
            question: raw.question,
            expect,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseOutcome {
    pub index: usize,
    pub question: String,
    pub passed: bool,
    pub reasons: Vec<String>,
    pub rule_id: Option<String>,
    pub status: Status,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub outcomes: Vec<CaseOutcome>,
    pub passed: usize,
    pub total: usize,
    pub total_ms: f64,
    pub average_ms: f64,
}

impl SuiteResult {
    /// "passed/total (percent%)".
    pub fn summary(&self) -> String {
        let pct = if self.total == 0 {
            100.0
        } else {
            100.0 * self.passed as f64 / self.total as f64
        };
        format!(
            "Percent test passed: {}/{} ({pct:.2}%); total {:.1} ms, average {:.3} ms per question",
            self.passed, self.total, self.total_ms, self.average_ms
        )
    }
}

fn check(expect: &Expect, report: &super::AnswerReport) -> Option<String> {
    match expect {
        Expect::Rule(id) => (report.rule_id.as_deref() != Some(id.as_str()))
            .then(|| format!("expected rule {id}, got {:?}", report.rule_id)),
        Expect::Answers(want) => {
            let want: BTreeSet<&str> = want.iter().map(String::as_str).collect();
            match &report.answers {
                Some(ResultSet::Rows(rows)) => {
                    let got: BTreeSet<&str> = rows.iter().map(String::as_str).collect();
                    (got != want).then(|| format!("expected answers {want:?}, got {got:?}"))
                }
                other => Some(format!("expected answers {want:?}, got {other:?}")),
            }
        }
        Expect::Count(n) => match &report.answers {
            Some(ResultSet::Count { count }) if count == n => None,
            other => Some(format!("expected count {n}, got {other:?}")),
        },
        Expect::Nonempty => (report.status != Status::Ok)
            .then(|| format!("expected answers, got status {}", report.status.as_str())),
        Expect::NoParse => (report.status != Status::NoParse)
            .then(|| format!("expected no parse, got status {}", report.status.as_str())),
    }
}

/// Runs parsed entries.
pub fn run_entries(entries: &[SuiteEntry], graph: &Graph, pipeline: &Pipeline) -> SuiteResult {
    let outcomes: Vec<CaseOutcome> = entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let report = pipeline.answer(&e.question, graph);
            let mut reasons: Vec<String> =
                e.expect.iter().filter_map(|x| check(x, &report)).collect();
            if report.status == Status::Error {
                reasons.push(format!("pipeline error: {:?}", report.failure));
            }
            CaseOutcome {
                index: i + 1,
                question: e.question.clone(),
                passed: reasons.is_empty(),
                reasons,
                rule_id: report.rule_id.clone(),
                status: report.status,
                elapsed_ms: report.elapsed_ms,
            }
        })
        .collect();
    let passed = outcomes.iter().filter(|o| o.passed).count();
    let total = outcomes.len();
    let total_ms: f64 = outcomes.iter().map(|o| o.elapsed_ms).sum();
    SuiteResult {
        passed,
        total,
        total_ms,
        average_ms: if total == 0 {
            0.0
        } else {
            total_ms / total as f64
        },
        outcomes,
    }
}

pub fn run_suite_str(
    text: &str,
    graph: &Graph,
    pipeline: &Pipeline,
) -> Result<SuiteResult, SuiteError> {
    Ok(run_entries(&parse_suite(text)?, graph, pipeline))
}

pub fn run_suite(
    path: impl AsRef<Path>,
    graph: &Graph,
    pipeline: &Pipeline,
) -> Result<SuiteResult, SuiteError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| SuiteError::Io {
        path: path.display().to_string(),
        source,
    })?;
    run_suite_str(&text, graph, pipeline)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_and_list_expectations() {
        let text = concat!(
            r#"{"question":"a?","expect":{"kind":"no_parse"}}"#,
            "\n",
            r#"{"question":"b?","expect":[{"kind":"rule","value":"Q1.1a"},{"kind":"answers","value":["x"]},{"kind":"count","value":3},{"kind":"nonempty"}]}"#,
        );
        let entries = parse_suite(text).unwrap();
        assert_eq!(entries[0].expect, vec![Expect::NoParse]);
        assert_eq!(
            entries[1].expect,
            vec![
                Expect::Rule("Q1.1a".into()),
                Expect::Answers(vec!["x".into()]),
                Expect::Count(3),
                Expect::Nonempty
            ]
        );
    }

    #[test]
    fn unknown_kind_reports_entry() {
        let text = concat!(
            r#"{"question":"a?","expect":{"kind":"no_parse"}}"#,
            "\n",
            r#"{"question":"b?","expect":{"kind":"maybe"}}"#,
        );
        match parse_suite(text) {
            Err(SuiteError::Format { entry, message }) => {
                assert_eq!(entry, 2);
                assert!(message.contains("maybe"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn average_is_total_over_count() {
        let entries =
            parse_suite(r#"{"question":"xin chào","expect":{"kind":"no_parse"}}"#).unwrap();
        let r = run_entries(&entries, &Graph::new(), &Pipeline::seed());
        assert_eq!((r.passed, r.total), (1, 1));
        assert!((r.average_ms - r.total_ms).abs() < 1e-9);
    }
}
