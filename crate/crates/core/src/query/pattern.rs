use thiserror::Error;

use crate::lexicon::{canonicalize, normalize};

const META: &[char] = &[
    '\\', '.', '+', '*', '?', '(', ')', '|', '[', ']', '{', '}', '^', '$',
];

/// The regex subset generated for filters: an escaped literal, optionally
/// anchored at either end. Arbitrary regexes are not representable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LiteralPattern {
    pub text: String,
    pub anchored_start: bool,
    pub anchored_end: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("unescaped metacharacter {ch:?} at {at}")]
    Metacharacter { ch: char, at: usize },
    #[error("dangling escape at end of pattern")]
    DanglingEscape,
}

impl LiteralPattern {
    pub fn exact(text: &str) -> Self {
        LiteralPattern {
            text: text.to_owned(),
            anchored_start: true,
            anchored_end: true,
        }
    }

    pub fn substring(text: &str) -> Self {
        LiteralPattern {
            text: text.to_owned(),
            anchored_start: false,
            anchored_end: false,
        }
    }

    pub fn to_regex(&self) -> String {
        let mut out = String::with_capacity(self.text.len() + 2);
        if self.anchored_start {
            out.push('^');
        }
        for c in self.text.chars() {
            if META.contains(&c) {
                out.push('\\');
            }
            out.push(c);
        }
        if self.anchored_end {
            out.push('$');
        }
        out
    }

    /// Reads back a pattern produced by [`LiteralPattern::to_regex`].
    pub fn parse(regex: &str) -> Result<Self, PatternError> {
        let chars: Vec<char> = regex.chars().collect();
        let mut text = String::new();
        let mut anchored_start = false;
        let mut anchored_end = false;
        let mut i = 0;
        while i < chars.len() {
            match chars[i] {
                '\\' => {
                    let c = *chars.get(i + 1).ok_or(PatternError::DanglingEscape)?;
                    text.push(c);
                    i += 2;
                }
                '^' if i == 0 => {
                    anchored_start = true;
                    i += 1;
                }
                '$' if i + 1 == chars.len() => {
                    anchored_end = true;
                    i += 1;
                }
                c if META.contains(&c) => return Err(PatternError::Metacharacter { ch: c, at: i }),
                c => {
                    text.push(c);
                    i += 1;
                }
            }
        }
        Ok(LiteralPattern {
            text,
            anchored_start,
            anchored_end,
        })
    }

    /// Matches after NFC; case is folded only when `case_insensitive`.
    pub fn matches(&self, value: &str, case_insensitive: bool) -> bool {
        let fold = |s: &str| {
            if case_insensitive {
                normalize(s)
            } else {
                canonicalize(s)
            }
        };
        let (needle, hay) = (fold(&self.text), fold(value));
        match (self.anchored_start, self.anchored_end) {
            (true, true) => hay == needle,
            (true, false) => hay.starts_with(&needle),
            (false, true) => hay.ends_with(&needle),
            (false, false) => hay.contains(&needle),
        }
    }
}

/// Anchored, escaped pattern matching exactly `value`.
pub fn escape_literal(value: &str) -> String {
    LiteralPattern::exact(value).to_regex()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escape_examples() {
        assert_eq!(escape_literal("Toan"), "^Toan$");
        assert_eq!(escape_literal("C++ (nâng cao)"), r"^C\+\+ \(nâng cao\)$");
        assert_eq!(escape_literal(""), "^$");
    }

    #[test]
    fn parse_inverts_to_regex() {
        for p in [
            LiteralPattern::exact("C++ (nâng cao)"),
            LiteralPattern::substring("a.b$"),
            LiteralPattern::exact("^$"),
            LiteralPattern::exact(""),
        ] {
            assert_eq!(LiteralPattern::parse(&p.to_regex()).unwrap(), p);
        }
    }

    #[test]
    fn raw_regex_is_rejected() {
        assert!(matches!(
            LiteralPattern::parse("^a.*$"),
            Err(PatternError::Metacharacter { ch: '.', at: 2 })
        ));
    }

    #[test]
    fn case_folds_but_diacritics_matter() {
        let p = LiteralPattern::exact("Toán");
        assert!(p.matches("TOÁN", true));
        assert!(!p.matches("TOÁN", false));
        assert!(!p.matches("Toan", true));
        assert!(!p.matches("Toán cao cấp", true));
        assert!(LiteralPattern::substring("toán").matches("Toán cao cấp", true));
    }
}
