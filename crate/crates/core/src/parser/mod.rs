//! Recursive-descent matching of token sequences against the question rules.
//!
//! Rules are tried in file order and the first one that consumes every
//! token wins. Inside a rule, optional and repeated groups are matched
//! greedily and backtracked on failure; nothing is shared across rules.

pub mod grammar;

use std::fmt::Write as _;

use thiserror::Error;

pub use grammar::{
    Element, Family, Grammar, GrammarError, GrammarRule, Phrase, PunctClass, Symbol,
};

use crate::lexicon::{LiteralKind, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseNode {
    Branch {
        label: String,
        children: Vec<ParseNode>,
    },
    Leaf {
        label: String,
        index: usize,
        token: Token,
    },
}

impl ParseNode {
    pub fn label(&self) -> &str {
        match self {
            ParseNode::Branch { label, .. } | ParseNode::Leaf { label, .. } => label,
        }
    }

    fn leaves<'a>(&'a self, out: &mut Vec<&'a ParseNode>) {
        match self {
            ParseNode::Leaf { .. } => out.push(self),
            ParseNode::Branch { children, .. } => children.iter().for_each(|c| c.leaves(out)),
        }
    }

    fn count(&self) -> usize {
        match self {
            ParseNode::Leaf { .. } => 1,
            ParseNode::Branch { children, .. } => {
                1 + children.iter().map(Self::count).sum::<usize>()
            }
        }
    }
}

/// Concrete syntax tree for one matched rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseTree {
    pub rule_id: String,
    pub children: Vec<ParseNode>,
    /// Decisions taken while matching, in derivation order: 1/0 for an
    /// optional group or one more repetition, the alternative index for a phrase.
    pub choices: Vec<usize>,
}

impl ParseTree {
    pub fn leaves(&self) -> Vec<&ParseNode> {
        let mut out = Vec::new();
        self.children.iter().for_each(|c| c.leaves(&mut out));
        out
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(ParseNode::count).sum::<usize>()
    }

    /// Indented rendering, one node per line.
    pub fn render(&self) -> String {
        fn go(node: &ParseNode, depth: usize, out: &mut String) {
            let pad = "  ".repeat(depth);
            match node {
                ParseNode::Leaf { label, token, .. } => {
                    let _ = writeln!(out, "{pad}{label} \"{}\"", token.surface);
                }
                ParseNode::Branch { label, children } => {
                    let _ = writeln!(out, "{pad}{label}");
                    children.iter().for_each(|c| go(c, depth + 1, out));
                }
            }
        }
        let mut out = format!("{}\n", self.rule_id);
        self.children.iter().for_each(|c| go(c, 1, &mut out));
        out
    }
}

pub fn render_tree(tree: &ParseTree) -> String {
    tree.render()
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("question does not match any rule (furthest failure at token {furthest})")]
pub struct NoParse {
    /// Index of the furthest token any rule failed to match.
    pub furthest: usize,
}

#[derive(Debug, Clone)]
enum Event {
    Choice(usize),
    Open(usize),
    Close,
    Leaf(Symbol, usize),
}

type Cont<'m, 'a> = dyn FnMut(&mut Matcher<'a>, usize) -> bool + 'm;

struct Matcher<'a> {
    grammar: &'a Grammar,
    tokens: &'a [Token],
    trail: Vec<Event>,
    furthest: usize,
}

fn symbol_matches(symbol: Symbol, token: &Token) -> bool {
    match symbol {
        Symbol::Terminal(c) => token.categories().contains(c),
        Symbol::Literal(LiteralKind::Year) => token.kind == TokenKind::Year,
        Symbol::Literal(_) => matches!(token.kind, TokenKind::Literal { .. }),
        Symbol::Punct(PunctClass::Question) => token.is_punct('?'),
        Symbol::Punct(PunctClass::Comma) => token.is_punct(','),
        Symbol::Punct(PunctClass::Stop) => token.is_punct('.') || token.is_punct(','),
        Symbol::Phrase(_) => false,
    }
}

impl<'a> Matcher<'a> {
    fn seq(&mut self, elems: &'a [Element], pos: usize, k: &mut Cont<'_, 'a>) -> bool {
        match elems.split_first() {
            None => k(self, pos),
            Some((head, rest)) => {
                self.elem(head, pos, &mut |m: &mut Matcher<'a>, p| m.seq(rest, p, k))
            }
        }
    }

    fn elem(&mut self, elem: &'a Element, pos: usize, k: &mut Cont<'_, 'a>) -> bool {
        match elem {
            Element::Symbol(s) => self.symbol(*s, pos, k),
            Element::Optional(inner) => {
                let mark = self.trail.len();
                self.trail.push(Event::Choice(1));
                if self.seq(inner, pos, k) {
                    return true;
                }
                self.trail.truncate(mark);
                self.trail.push(Event::Choice(0));
                if k(self, pos) {
                    return true;
                }
                self.trail.truncate(mark);
                false
            }
            Element::Repeat(inner) => self.repeat(inner, pos, k),
        }
    }

    fn repeat(&mut self, inner: &'a [Element], pos: usize, k: &mut Cont<'_, 'a>) -> bool {
        let mark = self.trail.len();
        self.trail.push(Event::Choice(1));
        // each iteration must consume input
        if self.seq(inner, pos, &mut |m: &mut Matcher<'a>, p| {
            p > pos && m.repeat(inner, p, k)
        }) {
            return true;
        }
        self.trail.truncate(mark);
        self.trail.push(Event::Choice(0));
        if k(self, pos) {
            return true;
        }
        self.trail.truncate(mark);
        false
    }

    fn symbol(&mut self, symbol: Symbol, pos: usize, k: &mut Cont<'_, 'a>) -> bool {
        if let Symbol::Phrase(ix) = symbol {
            let grammar = self.grammar;
            for (alt_ix, alt) in grammar.phrases[ix].alternatives.iter().enumerate() {
                let mark = self.trail.len();
                self.trail.push(Event::Choice(alt_ix));
                self.trail.push(Event::Open(ix));
                let done = self.seq(alt, pos, &mut |m: &mut Matcher<'a>, p| {
                    m.trail.push(Event::Close);
                    if k(m, p) {
                        return true;
                    }
                    m.trail.pop();
                    false
                });
                if done {
                    return true;
                }
                self.trail.truncate(mark);
            }
            return false;
        }
        match self.tokens.get(pos) {
            Some(tok) if symbol_matches(symbol, tok) => {
                self.trail.push(Event::Leaf(symbol, pos));
                if k(self, pos + 1) {
                    return true;
                }
                self.trail.pop();
                false
            }
            _ => {
                self.furthest = self.furthest.max(pos);
                false
            }
        }
    }

    fn build(&self, rule_id: &str) -> ParseTree {
        let mut stack: Vec<(String, Vec<ParseNode>)> = vec![(rule_id.to_owned(), Vec::new())];
        let mut choices = Vec::new();
        for ev in &self.trail {
            match ev {
                Event::Choice(c) => choices.push(*c),
                Event::Open(ix) => stack.push((self.grammar.phrases[*ix].name.clone(), Vec::new())),
                Event::Close => {
                    let (label, children) = stack.pop().expect("balanced trail");
                    stack
                        .last_mut()
                        .expect("root stays on the stack")
                        .1
                        .push(ParseNode::Branch { label, children });
                }
                Event::Leaf(sym, index) => {
                    let label = self.grammar.symbol_name(*sym).to_owned();
                    stack.last_mut().expect("root").1.push(ParseNode::Leaf {
                        label,
                        index: *index,
                        token: self.tokens[*index].clone(),
                    });
                }
            }
        }
        let (_, children) = stack.pop().expect("root");
        ParseTree {
            rule_id: rule_id.to_owned(),
            children,
            choices,
        }
    }
}

/// Matches `tokens` against the grammar rules in order.
pub fn parse(tokens: &[Token], grammar: &Grammar) -> Result<ParseTree, NoParse> {
    let mut furthest = 0;
    for rule in &grammar.rules {
        let mut m = Matcher {
            grammar,
            tokens,
            trail: Vec::new(),
            furthest: 0,
        };
        let len = tokens.len();
        let matched = m.seq(&rule.body, 0, &mut |m: &mut Matcher<'_>, p| {
            if p == len {
                true
            } else {
                m.furthest = m.furthest.max(p);
                false
            }
        });
        if matched {
            return Ok(m.build(&rule.id));
        }
        furthest = furthest.max(m.furthest);
    }
    Err(NoParse { furthest })
}

/// Replays the recorded choices against the rule body and checks that the
/// derived terminal sequence is exactly the tree's leaves, in order, covering
/// every token.
pub fn verify_derivation(tree: &ParseTree, grammar: &Grammar, tokens: &[Token]) -> bool {
    fn derive(
        grammar: &Grammar,
        elems: &[Element],
        choices: &mut std::slice::Iter<'_, usize>,
        out: &mut Vec<Symbol>,
    ) -> Option<()> {
        for e in elems {
            match e {
                Element::Symbol(Symbol::Phrase(ix)) => {
                    let alt = grammar.phrases[*ix].alternatives.get(*choices.next()?)?;
                    derive(grammar, alt, choices, out)?;
                }
                Element::Symbol(s) => out.push(*s),
                Element::Optional(inner) => match choices.next()? {
                    1 => derive(grammar, inner, choices, out)?,
                    0 => {}
                    _ => return None,
                },
                Element::Repeat(inner) => loop {
                    match choices.next()? {
                        1 => derive(grammar, inner, choices, out)?,
                        0 => break,
                        _ => return None,
                    }
                },
            }
        }
        Some(())
    }

    let Some(rule) = grammar.rule(&tree.rule_id) else {
        return false;
    };
    let mut symbols = Vec::new();
    let mut choices = tree.choices.iter();
    if derive(grammar, &rule.body, &mut choices, &mut symbols).is_none() || choices.next().is_some()
    {
        return false;
    }
    let leaves = tree.leaves();
    symbols.len() == tokens.len()
        && leaves.len() == tokens.len()
        && symbols
            .iter()
            .zip(&leaves)
            .enumerate()
            .all(|(i, (sym, leaf))| match leaf {
                ParseNode::Leaf {
                    label,
                    index,
                    token,
                } => {
                    *index == i
                        && token == &tokens[i]
                        && label == grammar.symbol_name(*sym)
                        && symbol_matches(*sym, token)
                }
                ParseNode::Branch { .. } => false,
            })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{segment, Lexicon};

    fn parse_q(q: &str) -> (Result<ParseTree, NoParse>, Vec<Token>) {
        let toks = segment(q, &Lexicon::seed());
        (parse(&toks, &Grammar::seed()), toks)
    }

    #[test]
    fn basic_author_question() {
        let (tree, toks) = parse_q("Ai đã viết sách Toan?");
        let tree = tree.unwrap();
        assert_eq!(tree.rule_id, "Q1.1a");
        let book = tree.children.iter().find(|n| n.label() == "book").unwrap();
        let ParseNode::Branch { children, .. } = book else {
            panic!()
        };
        assert_eq!(children[0].label(), "book_type");
        assert_eq!(children[1].label(), "TITLE");
        assert!(!tree.children.iter().any(|n| n.label() == "time_phrase"));
        assert!(verify_derivation(&tree, &Grammar::seed(), &toks));
    }

    #[test]
    fn publisher_question_with_year() {
        let (tree, _) = parse_q("Nhà xuất bản nào đã phát hành cuốn B trong năm 2008?");
        let tree = tree.unwrap();
        assert_eq!(tree.rule_id, "Q2.1a");
        let years: Vec<_> = tree
            .leaves()
            .into_iter()
            .filter(|l| l.label() == "YEAR")
            .collect();
        assert_eq!(years.len(), 1);
    }

    #[test]
    fn bare_title_is_rejected_at_index_2() {
        let (res, _) = parse_q("sách Toan?");
        assert_eq!(res.unwrap_err(), NoParse { furthest: 2 });
    }

    #[test]
    fn render_starts_with_rule_and_has_one_line_per_node() {
        let (tree, _) = parse_q("Ai đã viết sách Toan?");
        let tree = tree.unwrap();
        let text = render_tree(&tree);
        assert_eq!(text.lines().next(), Some("Q1.1a"));
        assert_eq!(text.lines().count(), tree.node_count());
        assert_eq!(text, render_tree(&tree));
    }

    #[test]
    fn count_question_renders_its_parts() {
        let (tree, _) = parse_q("Có bao nhiêu sách trong thư viện?");
        let tree = tree.unwrap();
        assert_eq!(tree.rule_id, "Q7.1");
        let top: Vec<_> = tree.children.iter().map(ParseNode::label).collect();
        assert_eq!(top, ["how_many", "book", "in_elib", "?"]);
        let text = tree.render();
        for part in [
            "  how_many \"Có bao nhiêu\"",
            "  book",
            "    book_type \"sách\"",
            "  in_elib \"trong thư viện\"",
        ] {
            assert!(
                text.lines().any(|l| l == part),
                "{part:?} missing in\n{text}"
            );
        }
    }

    #[test]
    fn conjunction_repeats_book() {
        let (tree, toks) = parse_q("Ai đã có viết sách \"Toan\" và sách \"Van\"?");
        let tree = tree.unwrap();
        assert_eq!(tree.rule_id, "Q1.1a");
        let books = tree.children.iter().filter(|n| n.label() == "book").count();
        assert_eq!(books, 2);
        assert!(verify_derivation(&tree, &Grammar::seed(), &toks));
    }

    #[test]
    fn tampered_choices_fail_verification() {
        let (tree, toks) = parse_q("Ai đã viết sách Toan?");
        let mut tree = tree.unwrap();
        tree.choices[0] ^= 1;
        assert!(!verify_derivation(&tree, &Grammar::seed(), &toks));
    }

    #[test]
    fn missing_question_mark_is_rejected() {
        let (res, toks) = parse_q("Ai đã viết sách Toan");
        assert_eq!(res.unwrap_err().furthest, toks.len());
    }
}
