//! Query text: printing in the listing layout and reading it back.

use thiserror::Error;

use super::ast::{
    Filter, GroupPattern, PatternElement, Projection, Select, TriplePattern, COUNT_ALIAS,
};
use super::pattern::{LiteralPattern, PatternError};
use crate::kb::{Class, Property};

const INDENT: &str = "    ";

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

fn triple_text(t: &TriplePattern) -> String {
    format!(
        "?{} {}:{} ?{}",
        t.subject,
        t.class.prefix(),
        t.property,
        t.object
    )
}

fn filter_text(f: &Filter) -> String {
    let flags = if f.case_insensitive { ", \"i\"" } else { "" };
    format!(
        "FILTER regex(?{} , {}{flags})",
        f.var,
        quote(&f.pattern.to_regex())
    )
}

fn select_lines(s: &Select, depth: usize, out: &mut Vec<String>) {
    let pad = INDENT.repeat(depth);
    match &s.projection {
        Projection::Var(v) => out.push(format!("{pad}SELECT DISTINCT ?{v}")),
        Projection::CountDistinct(v) => out.push(format!(
            "{pad}SELECT (COUNT(DISTINCT ?{v}) AS ?{COUNT_ALIAS})"
        )),
    }
    out.push(format!("{pad}FROM <{}>", s.dataset));
    out.push(format!("{pad}WHERE {{"));
    body_lines(&s.pattern, depth + 1, out);
    out.push(format!("{pad}}}"));
}

fn body_lines(g: &GroupPattern, depth: usize, out: &mut Vec<String>) {
    let pad = INDENT.repeat(depth);
    let els = &g.elements;
    let mut i = 0;
    while i < els.len() {
        match &els[i] {
            PatternElement::Triple(t) => match els.get(i + 1) {
                Some(PatternElement::Filter(f)) if f.var == t.object => {
                    out.push(format!("{pad}{{{}", triple_text(t)));
                    out.push(format!("{pad}{}.", filter_text(f)));
                    out.push(format!("{pad}}}"));
                    i += 1;
                }
                _ => out.push(format!("{pad}{{{}}}", triple_text(t))),
            },
            PatternElement::Filter(f) => out.push(format!("{pad}{{{}}}", filter_text(f))),
            PatternElement::SubSelect(s) => {
                out.push(format!("{pad}{{"));
                select_lines(s, depth, out);
                out.push(format!("{pad}}}"));
            }
            PatternElement::Union(l, r) => {
                out.push(format!("{pad}{{"));
                out.push(format!("{pad}{{"));
                body_lines(l, depth + 1, out);
                out.push(format!("{pad}}}"));
                out.push(format!("{pad}UNION"));
                out.push(format!("{pad}{{"));
                body_lines(r, depth + 1, out);
                out.push(format!("{pad}}}"));
                out.push(format!("{pad}}}"));
            }
        }
        i += 1;
        if i < els.len() {
            if let Some(last) = out.last_mut() {
                last.push('.');
            }
        }
    }
}

/// Deterministic text of a query, one element per line.
pub fn serialize(query: &Select) -> String {
    let mut lines = Vec::new();
    select_lines(query, 0, &mut lines);
    let mut text = lines.join("\n");
    text.push('\n');
    text
}

/// Removes whitespace outside string literals, for layout-insensitive comparison.
pub fn compact(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_string = false;
    let mut escaped = false;
    for c in text.chars() {
        if in_string {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
        } else if c == '"' {
            in_string = true;
            out.push(c);
        } else if !c.is_whitespace() {
            out.push(c);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReadError {
    #[error("at byte {at}: expected {expected}, found {found}")]
    Unexpected {
        at: usize,
        expected: String,
        found: String,
    },
    #[error("at byte {at}: unknown property {name}")]
    UnknownProperty { at: usize, name: String },
    #[error("at byte {at}: {source}")]
    Pattern {
        at: usize,
        #[source]
        source: PatternError,
    },
    #[error("unterminated string at byte {0}")]
    UnterminatedString(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Var(String),
    Iri(String),
    Str(String),
    Sym(char),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => w.clone(),
            Tok::Var(v) => format!("?{v}"),
            Tok::Iri(i) => format!("<{i}>"),
            Tok::Str(s) => quote(s),
            Tok::Sym(c) => c.to_string(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ReadError> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    let word_char = |c: char| c.is_alphanumeric() || c == '_' || c == ':';
    while let Some(&(at, c)) = it.peek() {
        if c.is_whitespace() {
            it.next();
        } else if c == '"' {
            it.next();
            let mut s = String::new();
            loop {
                match it.next() {
                    None => return Err(ReadError::UnterminatedString(at)),
                    Some((_, '\\')) => match it.next() {
                        Some((_, e)) => s.push(e),
                        None => return Err(ReadError::UnterminatedString(at)),
                    },
                    Some((_, '"')) => break,
                    Some((_, ch)) => s.push(ch),
                }
            }
            out.push((at, Tok::Str(s)));
        } else if c == '<' {
            it.next();
            let mut s = String::new();
            for (_, ch) in it.by_ref() {
                if ch == '>' {
                    break;
                }
                s.push(ch);
            }
            out.push((at, Tok::Iri(s)));
        } else if c == '?' {
            it.next();
            let mut s = String::new();
            while let Some(&(_, ch)) = it.peek() {
                if !(ch.is_alphanumeric() || ch == '_') {
                    break;
                }
                s.push(ch);
                it.next();
            }
            out.push((at, Tok::Var(s)));
        } else if word_char(c) {
            let mut s = String::new();
            while let Some(&(_, ch)) = it.peek() {
                if !word_char(ch) {
                    break;
                }
                s.push(ch);
                it.next();
            }
            out.push((at, Tok::Word(s)));
        } else {
            it.next();
            out.push((at, Tok::Sym(c)));
        }
    }
    Ok(out)
}

struct Reader {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Reader {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn at(&self) -> usize {
        self.toks.get(self.pos).map(|(a, _)| *a).unwrap_or(self.end)
    }

    fn fail<T>(&self, expected: &str) -> Result<T, ReadError> {
        Err(ReadError::Unexpected {
            at: self.at(),
            expected: expected.to_owned(),
            found: self
                .peek()
                .map(Tok::describe)
                .unwrap_or_else(|| "end of input".into()),
        })
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn sym(&mut self, c: char) -> Result<(), ReadError> {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(&format!("'{c}'"))
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        let hit = self.peek() == Some(&Tok::Sym(c));
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn word(&mut self, w: &str) -> Result<(), ReadError> {
        match self.peek() {
            Some(Tok::Word(x)) if x == w => {
                self.pos += 1;
                Ok(())
            }
            _ => self.fail(w),
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(x)) if x == w)
    }

    fn var(&mut self) -> Result<String, ReadError> {
        match self.peek() {
            Some(Tok::Var(v)) => {
                let v = v.clone();
                self.pos += 1;
                Ok(v)
            }
            _ => self.fail("variable"),
        }
    }

    fn select(&mut self) -> Result<Select, ReadError> {
        self.word("SELECT")?;
        let projection = if self.eat_sym('(') {
            self.word("COUNT")?;
            self.sym('(')?;
            self.word("DISTINCT")?;
            let v = self.var()?;
            self.sym(')')?;
            self.word("AS")?;
            let alias = self.var()?;
            if alias != COUNT_ALIAS {
                self.pos -= 1;
                return self.fail(&format!("?{COUNT_ALIAS}"));
            }
            self.sym(')')?;
            Projection::CountDistinct(v)
        } else {
            self.word("DISTINCT")?;
            Projection::Var(self.var()?)
        };
        self.word("FROM")?;
        let dataset = match self.next() {
            Some(Tok::Iri(i)) => i,
            _ => {
                self.pos -= 1;
                return self.fail("dataset IRI");
            }
        };
        self.word("WHERE")?;
        let pattern = self.group()?;
        Ok(Select {
            projection,
            dataset,
            pattern,
        })
    }

    /// `{ element (. element)* }`
    fn group(&mut self) -> Result<GroupPattern, ReadError> {
        self.sym('{')?;
        let mut elements = Vec::new();
        while !self.eat_sym('}') {
            self.element(&mut elements)?;
            if !self.eat_sym('.') && self.peek() != Some(&Tok::Sym('}')) {
                return self.fail("'.' or '}'");
            }
        }
        Ok(GroupPattern::new(elements))
    }

    fn filter(&mut self) -> Result<Filter, ReadError> {
        self.word("FILTER")?;
        self.word("regex")?;
        self.sym('(')?;
        let var = self.var()?;
        self.sym(',')?;
        let at = self.at();
        let Some(Tok::Str(regex)) = self.next() else {
            self.pos -= 1;
            return self.fail("pattern string");
        };
        let pattern =
            LiteralPattern::parse(&regex).map_err(|source| ReadError::Pattern { at, source })?;
        let case_insensitive = if self.eat_sym(',') {
            match self.next() {
                Some(Tok::Str(f)) if f == "i" => true,
                Some(Tok::Str(f)) if f.is_empty() => false,
                _ => {
                    self.pos -= 1;
                    return self.fail("flag \"i\"");
                }
            }
        } else {
            false
        };
        self.sym(')')?;
        Ok(Filter {
            var,
            pattern,
            case_insensitive,
        })
    }

    fn element(&mut self, out: &mut Vec<PatternElement>) -> Result<(), ReadError> {
        self.sym('{')?;
        match self.peek() {
            Some(Tok::Var(_)) => {
                let subject = self.var()?;
                let at = self.at();
                let Some(Tok::Word(prop)) = self.next() else {
                    self.pos -= 1;
                    return self.fail("prefix:property");
                };
                let unknown = || ReadError::UnknownProperty {
                    at,
                    name: prop.clone(),
                };
                let (prefix, name) = prop.split_once(':').ok_or_else(unknown)?;
                let class = Class::from_prefix(prefix).ok_or_else(unknown)?;
                let property = Property::parse(name).ok_or_else(unknown)?;
                let object = self.var()?;
                out.push(PatternElement::Triple(TriplePattern {
                    subject,
                    class,
                    property,
                    object,
                }));
                if self.is_word("FILTER") {
                    out.push(PatternElement::Filter(self.filter()?));
                    self.eat_sym('.');
                }
                self.sym('}')
            }
            Some(Tok::Word(w)) if w == "FILTER" => {
                out.push(PatternElement::Filter(self.filter()?));
                self.eat_sym('.');
                self.sym('}')
            }
            Some(Tok::Word(w)) if w == "SELECT" => {
                out.push(PatternElement::SubSelect(Box::new(self.select()?)));
                self.sym('}')
            }
            Some(Tok::Sym('{')) => {
                let left = self.group()?;
                self.word("UNION")?;
                let right = self.group()?;
                out.push(PatternElement::Union(left, right));
                self.sym('}')
            }
            _ => self.fail("triple, FILTER, SELECT or union"),
        }
    }
}

/// Parses text produced by [`serialize`].
pub fn read(text: &str) -> Result<Select, ReadError> {
    let mut r = Reader {
        toks: tokenize(text)?,
        pos: 0,
        end: text.len(),
    };
    let q = r.select()?;
    if r.peek().is_some() {
        return r.fail("end of input");
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intent::{decompose, Connective, QueryIntent, Slot, Target};
    use crate::query::{build_query, BuildOptions};

    fn q(intent: QueryIntent) -> Select {
        build_query(&decompose(&intent), &BuildOptions::default()).unwrap()
    }

    #[test]
    fn author_query_text() {
        let text = serialize(&q(
            QueryIntent::new(Target::Author).with(Slot::Title, "Toan")
        ));
        let want = "SELECT DISTINCT ?authorname
FROM <http://localhost/owl_test/vocw_full.owl>
WHERE {
    {?author cs_author:content ?authorname}.
    {?author cs_author:write ?course}.
    {?course cs_name:content ?coursename
    FILTER regex(?coursename , \"^Toan$\", \"i\").
    }
}
";
        assert_eq!(text, want);
    }

    #[test]
    fn count_query_starts_with_count() {
        let text = serialize(&q(QueryIntent::new(Target::CountBooks)));
        assert!(text.starts_with("SELECT (COUNT(DISTINCT ?course) AS ?count)"));
        assert_eq!(
            read(&text).unwrap(),
            q(QueryIntent::new(Target::CountBooks))
        );
    }

    #[test]
    fn nested_query_has_one_inner_select_per_extra_conjunct() {
        let intent = QueryIntent::new(Target::Author).with_multi(
            Slot::Title,
            Connective::And,
            &["A", "B", "C"],
        );
        let text = serialize(&q(intent));
        assert_eq!(text.matches("SELECT DISTINCT").count(), 3);
    }

    #[test]
    fn round_trips_unions_escapes_and_nesting() {
        let cases = [
            QueryIntent::new(Target::Publisher).with_multi(
                Slot::Title,
                Connective::Or,
                &["A\"b", "C++", "x\\y"],
            ),
            QueryIntent::new(Target::YearOfPublishing)
                .with_multi(Slot::Title, Connective::And, &["A", "B"])
                .with(Slot::Publisher, "P"),
            QueryIntent::new(Target::Subject)
                .with(Slot::Title, "T")
                .verifying("S"),
        ];
        for intent in cases {
            let ast = q(intent);
            let text = serialize(&ast);
            let back = read(&text).unwrap();
            assert_eq!(back, ast, "{text}");
            assert_eq!(serialize(&back), text);
        }
    }

    #[test]
    fn compact_keeps_string_spaces() {
        assert_eq!(compact("a  b \"x y\" c\n"), "ab\"x y\"c");
        assert_eq!(compact(r#""a\" b" c"#), r#""a\" b"c"#);
    }

    #[test]
    fn reader_rejects_raw_regex_and_unknown_properties() {
        let bad = "SELECT DISTINCT ?x FROM <d> WHERE { {?a cs_name:content ?x FILTER regex(?x , \"^.*$\", \"i\").} }";
        assert!(matches!(read(bad), Err(ReadError::Pattern { .. })));
        let bad = "SELECT DISTINCT ?x FROM <d> WHERE { {?a cs_name:likes ?x} }";
        assert!(matches!(read(bad), Err(ReadError::UnknownProperty { .. })));
    }
}
