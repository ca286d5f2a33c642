//! Mapping course records to triples and loading JSON Lines corpora.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::graph::{EntityKey, Graph, Term, Triple, Violation};
use super::schema::{Class, Property};

const KNOWN_FIELDS: &[&str] = &[
    "id",
    "name",
    "language",
    "summary",
    "authors",
    "copyright_holders",
    "maintainers",
    "keywords",
    "version",
    "affiliations",
    "publisher",
    "year",
    "subject",
    "place",
    "price",
];

/// One course as described by its metadata page.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CourseRecord {
    pub id: String,
    pub name: String,
    pub language: String,
    pub summary: String,
    pub authors: Vec<String>,
    pub copyright_holders: Vec<String>,
    pub maintainers: Vec<String>,
    pub keywords: Vec<String>,
    pub version: String,
    pub affiliations: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub publisher: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub year: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub place: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub price: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatementObject {
    Entity(EntityKey),
    Literal(String),
}

/// A triple whose entities are named by key rather than graph id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub subject: EntityKey,
    pub property: Property,
    pub object: StatementObject,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("record {index} ({id}): {reason}")]
pub struct IngestError {
    /// 1-based line number in the corpus file.
    pub index: usize,
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn is_year(value: &str) -> bool {
    (3..=4).contains(&value.len()) && value.bytes().all(|b| b.is_ascii_digit())
}

fn present(value: &Option<String>) -> Option<&str> {
    value.as_deref().map(str::trim).filter(|v| !v.is_empty())
}

/// Statements describing one record. Content statements precede any use of
/// their entity.
pub fn record_to_triples(record: &CourseRecord) -> Result<Vec<Statement>, String> {
    let name = record.name.trim();
    if name.is_empty() {
        return Err("name is empty".into());
    }
    if record.id.trim().is_empty() {
        return Err("id is empty".into());
    }
    if let Some(year) = present(&record.year) {
        if !is_year(year) {
            return Err(format!("invalid year {year:?}"));
        }
    }

    let course = EntityKey::with_id(Class::Course, record.id.trim());
    let mut out = Vec::new();
    let content = |key: &EntityKey, text: &str| Statement {
        subject: key.clone(),
        property: Property::Content,
        object: StatementObject::Literal(text.to_owned()),
    };
    let link = |s: &EntityKey, p: Property, o: &EntityKey| Statement {
        subject: s.clone(),
        property: p,
        object: StatementObject::Entity(o.clone()),
    };

    out.push(content(&course, name));
    for author in record
        .authors
        .iter()
        .map(|a| a.trim())
        .filter(|a| !a.is_empty())
    {
        let key = EntityKey::named(Class::Author, author);
        out.push(content(&key, author));
        out.push(link(&key, Property::Write, &course));
    }
    let publisher = present(&record.publisher).map(|p| (EntityKey::named(Class::Publisher, p), p));
    if let Some((key, text)) = &publisher {
        out.push(content(key, text));
        out.push(link(&course, Property::IsPublishedBy, key));
    }
    if let Some(year) = present(&record.year) {
        let key = EntityKey::named(Class::Year, year);
        out.push(content(&key, year));
        out.push(link(&course, Property::IsWrittenIn, &key));
    }
    if let Some(subject) = present(&record.subject) {
        let key = EntityKey::named(Class::Subject, subject);
        out.push(content(&key, subject));
        out.push(link(&course, Property::HasSubject, &key));
    }
    if let Some(place) = present(&record.place) {
        let key = EntityKey::named(Class::Place, place);
        out.push(content(&key, place));
        out.push(link(&course, Property::PublishedAt, &key));
        if let Some((pkey, _)) = &publisher {
            out.push(link(pkey, Property::LocatedAt, &key));
        }
    }
    if let Some(price) = present(&record.price) {
        let key = EntityKey::named(Class::Price, price);
        out.push(content(&key, price));
        out.push(link(&course, Property::HasPrice, &key));
    }
    Ok(out)
}

/// Adds statements to the graph; content equal to an existing one is a no-op.
pub fn insert_statements(graph: &mut Graph, statements: &[Statement]) -> Vec<Violation> {
    let mut violations = Vec::new();
    for st in statements {
        let subject = graph.intern(st.subject.clone());
        match &st.object {
            StatementObject::Literal(text) if st.property == Property::Content => {
                graph.set_content(subject, text);
            }
            other => {
                let object = match other {
                    StatementObject::Entity(key) => Term::Entity(graph.intern(key.clone())),
                    StatementObject::Literal(text) => graph.literal(text),
                };
                let triple = Triple {
                    subject,
                    property: st.property,
                    object,
                };
                if let Err(error) = graph.insert(triple) {
                    violations.push(Violation::Schema { triple, error });
                }
            }
        }
    }
    violations
}

/// Result of loading a corpus: the graph plus everything worth reporting.
#[derive(Debug, Clone, Default)]
pub struct LoadReport {
    pub graph: Graph,
    pub records: usize,
    pub errors: Vec<IngestError>,
    pub warnings: Vec<String>,
    pub violations: Vec<Violation>,
    pub inferred: usize,
}

/// Parses JSON Lines text into a graph. Bad records are reported and skipped.
pub fn load_corpus_str(text: &str) -> LoadReport {
    let mut report = LoadReport::default();
    for (i, line) in text.lines().enumerate() {
        let index = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(e) => {
                report.errors.push(IngestError {
                    index,
                    id: String::new(),
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let id = value
            .get("id")
            .and_then(|v| v.as_str())
            .unwrap_or_default()
            .to_owned();
        if let Some(obj) = value.as_object() {
            for field in obj.keys().filter(|k| !KNOWN_FIELDS.contains(&k.as_str())) {
                let msg = format!("record {index} ({id}): unknown field {field:?} ignored");
                log::warn!("{msg}");
                report.warnings.push(msg);
            }
        }
        let record: CourseRecord = match serde_json::from_value(value) {
            Ok(r) => r,
            Err(e) => {
                report.errors.push(IngestError {
                    index,
                    id,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        match record_to_triples(&record) {
            Ok(statements) => {
                let v = insert_statements(&mut report.graph, &statements);
                report.violations.extend(v);
                report.records += 1;
            }
            Err(reason) => report.errors.push(IngestError { index, id, reason }),
        }
    }
    report.inferred = report.graph.apply_inference();
    let found = report.graph.check_consistency();
    for v in found {
        if !report.violations.contains(&v) {
            report.violations.push(v);
        }
    }
    report
}

/// Reads and loads a corpus file.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<LoadReport, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(load_corpus_str(&text))
}

/// Builds a graph straight from records, skipping invalid ones.
pub fn graph_from_records(records: &[CourseRecord]) -> Graph {
    let mut g = Graph::new();
    for r in records {
        if let Ok(st) = record_to_triples(r) {
            insert_statements(&mut g, &st);
        }
    }
    g.apply_inference();
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, name: &str, authors: &[&str]) -> CourseRecord {
        CourseRecord {
            id: id.into(),
            name: name.into(),
            authors: authors.iter().map(|a| (*a).into()).collect(),
            ..Default::default()
        }
    }

    #[test]
    fn record_with_year_maps_to_expected_statements() {
        let mut r = rec("c1", "Toan", &["Nguyen Van A"]);
        r.year = Some("2009".into());
        let st = record_to_triples(&r).unwrap();
        let course = EntityKey::with_id(Class::Course, "c1");
        let author = EntityKey::named(Class::Author, "Nguyen Van A");
        let year = EntityKey::named(Class::Year, "2009");
        let lit = |s: &str| StatementObject::Literal(s.into());
        let want = vec![
            Statement {
                subject: course.clone(),
                property: Property::Content,
                object: lit("Toan"),
            },
            Statement {
                subject: author.clone(),
                property: Property::Content,
                object: lit("Nguyen Van A"),
            },
            Statement {
                subject: author,
                property: Property::Write,
                object: StatementObject::Entity(course.clone()),
            },
            Statement {
                subject: year.clone(),
                property: Property::Content,
                object: lit("2009"),
            },
            Statement {
                subject: course,
                property: Property::IsWrittenIn,
                object: StatementObject::Entity(year),
            },
        ];
        assert_eq!(st, want);
    }

    #[test]
    fn minimal_record_has_only_course_and_author_statements() {
        let st = record_to_triples(&rec("c1", "Toan", &["A"])).unwrap();
        assert_eq!(st.len(), 3);
    }

    #[test]
    fn shared_author_is_one_entity() {
        let g = graph_from_records(&[rec("c1", "Toan", &["A"]), rec("c2", "Van", &["a"])]);
        assert_eq!(g.count_class(Class::Author), 1);
        assert_eq!(g.count_class(Class::Course), 2);
    }

    #[test]
    fn bad_year_is_reported_and_others_load() {
        let text = concat!(
            r#"{"id":"a","name":"Toan","authors":["A"],"year":"2009"}"#,
            "\n",
            r#"{"id":"b","name":"Van","authors":["B"],"year":"20x9"}"#,
            "\n",
            r#"{"id":"c","name":"Ly","authors":["C"],"colour":"red"}"#,
            "\n"
        );
        let report = load_corpus_str(text);
        assert_eq!(report.records, 2);
        assert_eq!(report.errors.len(), 1);
        assert_eq!(report.errors[0].index, 2);
        assert_eq!(report.errors[0].id, "b");
        assert_eq!(report.warnings.len(), 1);
        assert!(report.violations.is_empty());
    }

    #[test]
    fn empty_corpus_gives_empty_graph() {
        let report = load_corpus_str("");
        assert!(report.graph.is_empty());
        assert!(report.errors.is_empty());
    }
}
