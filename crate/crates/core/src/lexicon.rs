//! Text normalization and lexicon-driven segmentation of questions.
//!
//! Questions are segmented left to right. At each word the longest lexicon
//! entry wins; 3–4 digit numbers become years; double-quoted spans become
//! literals verbatim; any other run of unknown words becomes one candidate
//! literal whose kind (title, person, ...) is decided by the parser.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

const SEED_LEXICON: &str = include_str!("../data/lexicon.tsv");

macro_rules! categories {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// A terminal category of the question grammar.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Category {
            $($variant),*
        }

        impl Category {
            pub const ALL: &'static [Category] = &[$(Category::$variant),*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(Category::$variant => $name),*
                }
            }
        }

        impl FromStr for Category {
            type Err = ();

            fn from_str(s: &str) -> Result<Self, ()> {
                match s {
                    $($name => Ok(Category::$variant),)*
                    _ => Err(()),
                }
            }
        }
    };
}

categories! {
    WhatAuthor => "what_author",
    WhatPublisher => "what_publisher",
    WhatTime => "what_time",
    WhatSubject => "what_subject",
    WhatPlace => "what_place",
    WhatPrice => "what_price",
    HowMany => "how_many",
    Vperfect => "vperfect",
    Vpassive => "vpassive",
    Agent => "agent",
    Conjunction => "conjunction",
    Possessive => "possessive",
    PrepTime => "prep_time",
    YearWord => "year_word",
    IsOf => "is_of",
    VerbWrite => "verb_write",
    VerbPublish => "verb_publish",
    VerbBe => "verb_be",
    VerbHave => "verb_have",
    VerbLocate => "verb_locate",
    VerbBuy => "verb_buy",
    VerbCost => "verb_cost",
    BookType => "book_type",
    Plural => "plural",
    InElib => "in_elib",
    Creator => "creator",
    Price => "price",
    Field => "field",
    AuthorWord => "author_word",
    PublisherWord => "publisher_word",
    SubjectWord => "subject_word",
    Interrogative1 => "interrogative1",
    Interrogative2 => "interrogative2",
    Interrogative3 => "interrogative3",
    Interrogative4 => "interrogative4",
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Set of categories a single surface form belongs to.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CategorySet(u64);

impl CategorySet {
    pub fn single(category: Category) -> Self {
        CategorySet(1 << category as u64)
    }

    pub fn insert(&mut self, category: Category) -> bool {
        let bit = 1 << category as u64;
        let fresh = self.0 & bit == 0;
        self.0 |= bit;
        fresh
    }

    pub fn contains(self, category: Category) -> bool {
        self.0 & (1 << category as u64) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Category> {
        Category::ALL
            .iter()
            .copied()
            .filter(move |c| self.contains(*c))
    }
}

impl fmt::Display for CategorySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.iter().map(Category::as_str).collect();
        f.write_str(&names.join("|"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub surface: String,
    pub category: Category,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LexiconError {
    #[error("line {line}: expected `category<TAB>surface`, found {fields} field(s)")]
    Malformed { line: usize, fields: usize },
    #[error("line {line}: unknown category `{name}`")]
    UnknownCategory { line: usize, name: String },
    #[error("line {line}: empty surface form")]
    EmptySurface { line: usize },
    #[error("line {line}: duplicate entry `{surface}` for {category}")]
    Duplicate {
        line: usize,
        surface: String,
        category: Category,
    },
}

/// Editable vocabulary mapping surface forms to grammar categories.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
    // first word -> (words, categories), longest first
    index: HashMap<String, Vec<(Vec<String>, CategorySet)>>,
}

impl Lexicon {
    /// The vocabulary shipped with the crate.
    pub fn seed() -> Self {
        load_lexicon(SEED_LEXICON).expect("bundled lexicon is valid")
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Categories of an exact (normalized) surface form.
    pub fn lookup(&self, surface: &str) -> CategorySet {
        let words: Vec<&str> = surface.split(' ').collect();
        self.index
            .get(words[0])
            .and_then(|cands| {
                cands
                    .iter()
                    .find(|(w, _)| w.iter().map(String::as_str).eq(words.iter().copied()))
            })
            .map(|(_, set)| *set)
            .unwrap_or_default()
    }

    /// Longest entry matching the start of `words`: (word count, categories).
    fn longest_match(&self, words: &[&str]) -> Option<(usize, CategorySet)> {
        let cands = self.index.get(*words.first()?)?;
        cands.iter().find_map(|(entry, set)| {
            let n = entry.len();
            (n <= words.len() && entry.iter().zip(words).all(|(a, b)| a == b)).then_some((n, *set))
        })
    }

    fn add(&mut self, surface: String, category: Category) -> bool {
        let words: Vec<String> = surface.split(' ').map(str::to_owned).collect();
        let bucket = self.index.entry(words[0].clone()).or_default();
        let fresh = match bucket.iter_mut().find(|(w, _)| *w == words) {
            Some((_, set)) => set.insert(category),
            None => {
                bucket.push((words, CategorySet::single(category)));
                bucket.sort_by_key(|b| std::cmp::Reverse(b.0.len()));
                true
            }
        };
        if fresh {
            self.entries.push(LexiconEntry { surface, category });
        }
        fresh
    }
}

/// Parses lexicon text: one `category<TAB>surface` per line, `#` comments.
pub fn load_lexicon(source: &str) -> Result<Lexicon, LexiconError> {
    let mut lexicon = Lexicon::default();
    for (i, raw) in source.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 2 {
            return Err(LexiconError::Malformed {
                line,
                fields: fields.len(),
            });
        }
        let name = fields[0].trim();
        let category = Category::from_str(name).map_err(|_| LexiconError::UnknownCategory {
            line,
            name: name.to_owned(),
        })?;
        let surface = normalize(fields[1]);
        if surface.is_empty() {
            return Err(LexiconError::EmptySurface { line });
        }
        if !lexicon.add(surface.clone(), category) {
            return Err(LexiconError::Duplicate {
                line,
                surface,
                category,
            });
        }
    }
    Ok(lexicon)
}

/// NFC, whitespace collapsed and trimmed, case preserved.
pub fn canonicalize(text: &str) -> String {
    let nfc: String = text.nfc().collect();
    nfc.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// NFC, lowercase, whitespace collapsed and trimmed. Idempotent.
pub fn normalize(text: &str) -> String {
    // lowercasing can produce decomposed sequences, so normalize again
    canonicalize(text).to_lowercase().nfc().collect()
}

/// Kind of a literal slot filled from the question text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LiteralKind {
    Title,
    Person,
    PublisherName,
    SubjectName,
    PlaceName,
    Year,
}

impl LiteralKind {
    pub const ALL: [LiteralKind; 6] = [
        LiteralKind::Title,
        LiteralKind::Person,
        LiteralKind::PublisherName,
        LiteralKind::SubjectName,
        LiteralKind::PlaceName,
        LiteralKind::Year,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LiteralKind::Title => "TITLE",
            LiteralKind::Person => "PERSON",
            LiteralKind::PublisherName => "PUBLISHER_NAME",
            LiteralKind::SubjectName => "SUBJECT_NAME",
            LiteralKind::PlaceName => "PLACE_NAME",
            LiteralKind::Year => "YEAR",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    /// A lexicon word or multi-word expression.
    Word(CategorySet),
    /// Unknown material or a quoted span; its kind is fixed by the parser.
    Literal {
        quoted: bool,
    },
    Year,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Text as written (NFC, quotes stripped).
    pub surface: String,
    pub normalized: String,
    /// Character offsets `[start, end)` into the canonicalized question.
    pub span: (usize, usize),
}

impl Token {
    pub fn is_punct(&self, c: char) -> bool {
        self.kind == TokenKind::Punct && self.surface.chars().eq(std::iter::once(c))
    }

    pub fn categories(&self) -> CategorySet {
        match self.kind {
            TokenKind::Word(set) => set,
            _ => CategorySet::default(),
        }
    }

    /// Short label used in diagnostics.
    pub fn label(&self) -> String {
        match &self.kind {
            TokenKind::Word(set) => set.to_string(),
            TokenKind::Literal { .. } => "LITERAL".to_owned(),
            TokenKind::Year => "YEAR".to_owned(),
            TokenKind::Punct => "PUNCT".to_owned(),
        }
    }
}

#[derive(Debug)]
enum Piece {
    Word { start: usize, end: usize },
    Quoted { start: usize, end: usize },
    Punct { at: usize },
}

const OPEN_QUOTES: &[char] = &['"', '“'];
const CLOSE_QUOTES: &[char] = &['"', '”'];

fn is_hard_punct(c: char) -> bool {
    matches!(c, '?' | '!' | ';')
}

fn is_soft_punct(c: char) -> bool {
    matches!(c, ',' | '.' | ':')
}

fn split_pieces(chars: &[char]) -> Vec<Piece> {
    let mut pieces = Vec::new();
    let mut i = 0;
    let boundary = |j: usize| {
        j >= chars.len()
            || chars[j].is_whitespace()
            || is_hard_punct(chars[j])
            || OPEN_QUOTES.contains(&chars[j])
            || CLOSE_QUOTES.contains(&chars[j])
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if OPEN_QUOTES.contains(&c) {
            match (i + 1..chars.len()).find(|&j| CLOSE_QUOTES.contains(&chars[j])) {
                Some(close) => {
                    let (mut s, mut e) = (i + 1, close);
                    while s < e && chars[s].is_whitespace() {
                        s += 1;
                    }
                    while e > s && chars[e - 1].is_whitespace() {
                        e -= 1;
                    }
                    if s < e {
                        pieces.push(Piece::Quoted { start: s, end: e });
                    }
                    i = close + 1;
                }
                // a stray quote is dropped
                None => i += 1,
            }
        } else if CLOSE_QUOTES.contains(&c) {
            i += 1;
        } else if is_hard_punct(c) || (is_soft_punct(c) && boundary(i + 1)) {
            pieces.push(Piece::Punct { at: i });
            i += 1;
        } else {
            let start = i;
            while i < chars.len() && !boundary(i) && !(is_soft_punct(chars[i]) && boundary(i + 1)) {
                i += 1;
            }
            pieces.push(Piece::Word { start, end: i });
        }
    }
    pieces
}

fn is_year(word: &str) -> bool {
    (3..=4).contains(&word.len()) && word.bytes().all(|b| b.is_ascii_digit())
}

/// Splits a question into grammar tokens.
pub fn segment(question: &str, lexicon: &Lexicon) -> Vec<Token> {
    let text = canonicalize(question);
    let chars: Vec<char> = text.chars().collect();
    let slice = |s: usize, e: usize| chars[s..e].iter().collect::<String>();
    let pieces = split_pieces(&chars);

    let make = |kind: TokenKind, start: usize, end: usize| {
        let surface = slice(start, end);
        let normalized = normalize(&surface);
        Token {
            kind,
            surface,
            normalized,
            span: (start, end),
        }
    };

    let mut tokens = Vec::new();
    let mut i = 0;
    while i < pieces.len() {
        match pieces[i] {
            Piece::Punct { at } => {
                tokens.push(make(TokenKind::Punct, at, at + 1));
                i += 1;
            }
            Piece::Quoted { start, end } => {
                tokens.push(make(TokenKind::Literal { quoted: true }, start, end));
                i += 1;
            }
            Piece::Word { start, .. } => {
                // consecutive words from i, normalized for lookup
                let run: Vec<(usize, usize)> = pieces[i..]
                    .iter()
                    .map_while(|p| match *p {
                        Piece::Word { start, end } => Some((start, end)),
                        _ => None,
                    })
                    .collect();
                let words: Vec<String> =
                    run.iter().map(|&(s, e)| normalize(&slice(s, e))).collect();
                let refs: Vec<&str> = words.iter().map(String::as_str).collect();

                if let Some((n, set)) = lexicon.longest_match(&refs) {
                    tokens.push(make(TokenKind::Word(set), start, run[n - 1].1));
                    i += n;
                } else if is_year(refs[0]) {
                    tokens.push(make(TokenKind::Year, start, run[0].1));
                    i += 1;
                } else {
                    let mut n = 1;
                    while n < refs.len()
                        && !is_year(refs[n])
                        && lexicon.longest_match(&refs[n..]).is_none()
                    {
                        n += 1;
                    }
                    tokens.push(make(
                        TokenKind::Literal { quoted: false },
                        start,
                        run[n - 1].1,
                    ));
                    i += n;
                }
            }
        }
    }
    tokens
}
