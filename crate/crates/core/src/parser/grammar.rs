//! Reader for the EBNF question grammar.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::lexicon::{Category, LiteralKind};

const SEED_GRAMMAR: &str = include_str!("../../data/grammar.ebnf");

/// Punctuation terminals. `Stop` is the `[.]` separator, which also accepts a comma.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PunctClass {
    Question,
    Comma,
    Stop,
}

impl PunctClass {
    pub fn as_str(self) -> &'static str {
        match self {
            PunctClass::Question => "?",
            PunctClass::Comma => ",",
            PunctClass::Stop => ".",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    Terminal(Category),
    Literal(LiteralKind),
    Punct(PunctClass),
    /// Index into [`Grammar::phrases`].
    Phrase(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Element {
    Symbol(Symbol),
    Optional(Vec<Element>),
    Repeat(Vec<Element>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Author,
    Publisher,
    Subject,
    BookListing,
    Place,
    Price,
    Count,
}

impl Family {
    fn of_rule(id: &str) -> Option<Family> {
        let n = id.strip_prefix('Q')?.split('.').next()?;
        Some(match n {
            "1" => Family::Author,
            "2" => Family::Publisher,
            "3" => Family::Subject,
            "4" => Family::BookListing,
            "5" => Family::Place,
            "6" => Family::Price,
            "7" => Family::Count,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrammarRule {
    pub id: String,
    pub family: Family,
    pub body: Vec<Element>,
}

/// A named sub-phrase with one or more alternatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phrase {
    pub name: String,
    pub alternatives: Vec<Vec<Element>>,
}

#[derive(Debug, Clone)]
pub struct Grammar {
    pub rules: Vec<GrammarRule>,
    pub phrases: Vec<Phrase>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GrammarError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown symbol `{name}`")]
    UnknownSymbol { line: usize, name: String },
    #[error("line {line}: `{name}` defined twice")]
    Duplicate { line: usize, name: String },
    #[error("phrase `{0}` can match the empty sequence")]
    NullablePhrase(String),
}

impl Grammar {
    /// The question grammar shipped with the crate.
    pub fn seed() -> Self {
        SEED_GRAMMAR.parse().expect("bundled grammar is valid")
    }

    pub fn rule(&self, id: &str) -> Option<&GrammarRule> {
        self.rules.iter().find(|r| r.id == id)
    }

    pub fn symbol_name(&self, symbol: Symbol) -> &str {
        match symbol {
            Symbol::Terminal(c) => c.as_str(),
            Symbol::Literal(k) => k.as_str(),
            Symbol::Punct(p) => p.as_str(),
            Symbol::Phrase(i) => &self.phrases[i].name,
        }
    }

    /// Renders a rule body back into EBNF notation.
    pub fn display_body(&self, body: &[Element]) -> String {
        body.iter()
            .map(|e| match e {
                Element::Symbol(Symbol::Punct(p)) => format!("\"{}\"", p.as_str()),
                Element::Symbol(Symbol::Literal(k)) => k.as_str().to_owned(),
                Element::Symbol(s) => format!("<{}>", self.symbol_name(*s)),
                Element::Optional(inner) => format!("[{}]", self.display_body(inner)),
                Element::Repeat(inner) => format!("{{ {} }}", self.display_body(inner)),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Lexeme {
    Name(String),
    Punct(PunctClass),
    Open(char),
    Close(char),
    Bar,
}

fn lex_body(body: &str, line: usize) -> Result<Vec<Lexeme>, GrammarError> {
    let err = |message: String| GrammarError::Syntax { line, message };
    let chars: Vec<char> = body.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '[' | '{' => {
                out.push(Lexeme::Open(c));
                i += 1;
            }
            ']' | '}' => {
                out.push(Lexeme::Close(c));
                i += 1;
            }
            '|' => {
                out.push(Lexeme::Bar);
                i += 1;
            }
            '<' => {
                let close = (i + 1..chars.len())
                    .find(|&j| chars[j] == '>')
                    .ok_or_else(|| err("unterminated `<`".into()))?;
                out.push(Lexeme::Name(chars[i + 1..close].iter().collect()));
                i = close + 1;
            }
            '"' | '“' | '”' => {
                let close = (i + 1..chars.len())
                    .find(|&j| matches!(chars[j], '"' | '”' | '“'))
                    .ok_or_else(|| err("unterminated quote".into()))?;
                let inner: String = chars[i + 1..close].iter().collect();
                out.push(Lexeme::Punct(punct(&inner).ok_or_else(|| {
                    err(format!("unsupported quoted terminal `{inner}`"))
                })?));
                i = close + 1;
            }
            '?' | ',' | '.' => {
                out.push(Lexeme::Punct(punct(&c.to_string()).unwrap()));
                i += 1;
            }
            c if c.is_alphanumeric() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Lexeme::Name(chars[start..i].iter().collect()));
            }
            other => return Err(err(format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

fn punct(s: &str) -> Option<PunctClass> {
    match s {
        "?" => Some(PunctClass::Question),
        "," => Some(PunctClass::Comma),
        "." => Some(PunctClass::Stop),
        _ => None,
    }
}

/// Symbols before name resolution.
#[derive(Debug, Clone)]
enum RawElement {
    Name(String),
    Punct(PunctClass),
    Optional(Vec<RawElement>),
    Repeat(Vec<RawElement>),
}

struct BodyParser<'a> {
    lexemes: &'a [Lexeme],
    pos: usize,
    line: usize,
}

impl BodyParser<'_> {
    fn alternatives(&mut self) -> Result<Vec<Vec<RawElement>>, GrammarError> {
        let mut alts = vec![self.sequence()?];
        while self.lexemes.get(self.pos) == Some(&Lexeme::Bar) {
            self.pos += 1;
            alts.push(self.sequence()?);
        }
        if self.pos != self.lexemes.len() {
            return Err(GrammarError::Syntax {
                line: self.line,
                message: format!("unexpected {:?}", self.lexemes[self.pos]),
            });
        }
        Ok(alts)
    }

    fn sequence(&mut self) -> Result<Vec<RawElement>, GrammarError> {
        let mut seq = Vec::new();
        while let Some(lx) = self.lexemes.get(self.pos) {
            match lx {
                Lexeme::Name(n) => seq.push(RawElement::Name(n.clone())),
                Lexeme::Punct(p) => seq.push(RawElement::Punct(*p)),
                Lexeme::Open(open) => {
                    let open = *open;
                    self.pos += 1;
                    let inner = self.sequence()?;
                    let close = if open == '[' { ']' } else { '}' };
                    if self.lexemes.get(self.pos) != Some(&Lexeme::Close(close)) {
                        return Err(GrammarError::Syntax {
                            line: self.line,
                            message: format!("expected `{close}`"),
                        });
                    }
                    seq.push(if open == '[' {
                        RawElement::Optional(inner)
                    } else {
                        RawElement::Repeat(inner)
                    });
                }
                Lexeme::Close(_) | Lexeme::Bar => break,
            }
            self.pos += 1;
        }
        Ok(seq)
    }
}

fn is_rule_name(name: &str) -> bool {
    Family::of_rule(name).is_some()
}

struct RawDef {
    line: usize,
    name: String,
    alternatives: Vec<Vec<RawElement>>,
}

impl FromStr for Grammar {
    type Err = GrammarError;

    fn from_str(source: &str) -> Result<Self, GrammarError> {
        let mut defs = Vec::new();
        for (i, raw) in source.lines().enumerate() {
            let line = i + 1;
            let text = raw.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let (head, body) = text
                .split_once("::=")
                .or_else(|| text.split_once('='))
                .ok_or_else(|| GrammarError::Syntax {
                    line,
                    message: "missing `=`".into(),
                })?;
            let name = head
                .trim()
                .strip_prefix('<')
                .and_then(|h| h.strip_suffix('>'))
                .ok_or_else(|| GrammarError::Syntax {
                    line,
                    message: "definition head must be `<name>`".into(),
                })?
                .to_owned();
            let lexemes = lex_body(body, line)?;
            let alternatives = BodyParser {
                lexemes: &lexemes,
                pos: 0,
                line,
            }
            .alternatives()?;
            if is_rule_name(&name) && alternatives.len() != 1 {
                return Err(GrammarError::Syntax {
                    line,
                    message: "question rules take a single sequence".into(),
                });
            }
            defs.push(RawDef {
                line,
                name,
                alternatives,
            });
        }

        let mut seen = HashSet::new();
        for d in &defs {
            if !seen.insert(d.name.clone()) {
                return Err(GrammarError::Duplicate {
                    line: d.line,
                    name: d.name.clone(),
                });
            }
        }

        let phrase_index: HashMap<String, usize> = defs
            .iter()
            .filter(|d| !is_rule_name(&d.name))
            .enumerate()
            .map(|(i, d)| (d.name.clone(), i))
            .collect();

        let resolve = |seq: &[RawElement], line: usize| -> Result<Vec<Element>, GrammarError> {
            fn go(
                seq: &[RawElement],
                line: usize,
                phrases: &HashMap<String, usize>,
            ) -> Result<Vec<Element>, GrammarError> {
                seq.iter()
                    .map(|e| {
                        Ok(match e {
                            RawElement::Punct(p) => Element::Symbol(Symbol::Punct(*p)),
                            RawElement::Optional(inner) => {
                                Element::Optional(go(inner, line, phrases)?)
                            }
                            RawElement::Repeat(inner) => Element::Repeat(go(inner, line, phrases)?),
                            RawElement::Name(n) => {
                                Element::Symbol(if let Some(&i) = phrases.get(n) {
                                    Symbol::Phrase(i)
                                } else if let Ok(c) = Category::from_str(n) {
                                    Symbol::Terminal(c)
                                } else if let Some(k) = LiteralKind::parse(n) {
                                    Symbol::Literal(k)
                                } else {
                                    return Err(GrammarError::UnknownSymbol {
                                        line,
                                        name: n.clone(),
                                    });
                                })
                            }
                        })
                    })
                    .collect()
            }
            go(seq, line, &phrase_index)
        };

        let mut rules = Vec::new();
        let mut phrases = Vec::new();
        for d in &defs {
            let alternatives = d
                .alternatives
                .iter()
                .map(|alt| resolve(alt, d.line))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(family) = Family::of_rule(&d.name) {
                rules.push(GrammarRule {
                    id: d.name.clone(),
                    family,
                    body: alternatives.into_iter().next().unwrap_or_default(),
                });
            } else {
                phrases.push(Phrase {
                    name: d.name.clone(),
                    alternatives,
                });
            }
        }

        let grammar = Grammar { rules, phrases };
        for p in &grammar.phrases {
            if p.alternatives.iter().any(|alt| grammar.nullable(alt)) {
                return Err(GrammarError::NullablePhrase(p.name.clone()));
            }
        }
        Ok(grammar)
    }
}

impl Grammar {
    fn nullable(&self, seq: &[Element]) -> bool {
        seq.iter().all(|e| match e {
            Element::Optional(_) | Element::Repeat(_) => true,
            Element::Symbol(Symbol::Phrase(i)) => self.phrases[*i]
                .alternatives
                .iter()
                .any(|a| self.nullable(a)),
            Element::Symbol(_) => false,
        })
    }
}

impl fmt::Display for GrammarRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.id)
    }
}
