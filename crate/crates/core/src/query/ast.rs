use std::collections::BTreeSet;

use thiserror::Error;

use super::pattern::LiteralPattern;
use crate::kb::{Class, Property};

/// Default dataset label printed in FROM clauses.
pub const DEFAULT_DATASET: &str = "http://localhost/owl_test/vocw_full.owl";

/// Alias of the count projection.
pub const COUNT_ALIAS: &str = "count";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    Var(String),
    CountDistinct(String),
}

impl Projection {
    pub fn var(&self) -> &str {
        match self {
            Projection::Var(v) | Projection::CountDistinct(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Select {
    pub projection: Projection,
    pub dataset: String,
    pub pattern: GroupPattern,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroupPattern {
    pub elements: Vec<PatternElement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternElement {
    Triple(TriplePattern),
    Filter(Filter),
    Union(GroupPattern, GroupPattern),
    SubSelect(Box<Select>),
}

/// `?subject class:property ?object`; the class constrains the subject.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: String,
    pub class: Class,
    pub property: Property,
    pub object: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filter {
    pub var: String,
    pub pattern: LiteralPattern,
    pub case_insensitive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AstError {
    #[error("projection variable ?{0} is not bound in WHERE")]
    UnboundProjection(String),
    #[error("filter variable ?{0} is not bound by a triple pattern of its group")]
    UnboundFilter(String),
    #[error("nested select projects ?{0}, which the enclosing group does not bind")]
    DanglingJoin(String),
}

impl GroupPattern {
    pub fn new(elements: Vec<PatternElement>) -> Self {
        GroupPattern { elements }
    }

    /// Variables of this group's own triple patterns.
    pub fn triple_vars(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        for e in &self.elements {
            if let PatternElement::Triple(t) = e {
                out.insert(t.subject.as_str());
                out.insert(t.object.as_str());
            }
        }
        out
    }

    /// Variables any solution of this group may bind.
    pub fn bound_vars(&self) -> BTreeSet<&str> {
        let mut out = self.triple_vars();
        for e in &self.elements {
            match e {
                PatternElement::Union(l, r) => {
                    out.extend(l.bound_vars());
                    out.extend(r.bound_vars());
                }
                PatternElement::SubSelect(s) => {
                    out.insert(s.projection.var());
                }
                PatternElement::Triple(_) | PatternElement::Filter(_) => {}
            }
        }
        out
    }

    fn check(&self) -> Result<(), AstError> {
        let own = self.triple_vars();
        for e in &self.elements {
            match e {
                PatternElement::Filter(f) if !own.contains(f.var.as_str()) => {
                    return Err(AstError::UnboundFilter(f.var.clone()))
                }
                PatternElement::Union(l, r) => {
                    l.check()?;
                    r.check()?;
                }
                PatternElement::SubSelect(s) => {
                    if !own.contains(s.projection.var()) {
                        return Err(AstError::DanglingJoin(s.projection.var().to_owned()));
                    }
                    s.check()?;
                }
                _ => {}
            }
        }
        Ok(())
    }
}

impl Select {
    /// Structural well-formedness.
    pub fn check(&self) -> Result<(), AstError> {
        let var = self.projection.var();
        if !self.pattern.bound_vars().contains(var) {
            return Err(AstError::UnboundProjection(var.to_owned()));
        }
        self.pattern.check()
    }

    /// 1 for a flat query, plus one per level of nested select.
    pub fn depth(&self) -> usize {
        fn group_depth(g: &GroupPattern) -> usize {
            g.elements
                .iter()
                .map(|e| match e {
                    PatternElement::SubSelect(s) => s.depth(),
                    PatternElement::Union(l, r) => group_depth(l).max(group_depth(r)),
                    _ => 0,
                })
                .max()
                .unwrap_or(0)
        }
        1 + group_depth(&self.pattern)
    }

    /// Number of leaves of the top-level union tree (1 when there is none).
    pub fn union_branches(&self) -> usize {
        fn count(g: &GroupPattern) -> usize {
            match g.elements.as_slice() {
                [PatternElement::Union(l, r)] => count(l) + count(r),
                _ => 1,
            }
        }
        count(&self.pattern)
    }

    /// All filters anywhere in the query.
    pub fn filters(&self) -> Vec<&Filter> {
        fn walk<'a>(g: &'a GroupPattern, out: &mut Vec<&'a Filter>) {
            for e in &g.elements {
                match e {
                    PatternElement::Filter(f) => out.push(f),
                    PatternElement::Union(l, r) => {
                        walk(l, out);
                        walk(r, out);
                    }
                    PatternElement::SubSelect(s) => walk(&s.pattern, out),
                    PatternElement::Triple(_) => {}
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.pattern, &mut out);
        out
    }
}
