//! Query evaluation over a graph snapshot, plus a brute-force oracle.

mod oracle;

use std::cell::RefCell;
use std::collections::{HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

pub use oracle::{brute_force_evaluate, MAX_ORACLE_TRIPLES, MAX_ORACLE_VARS};

use crate::kb::{Graph, Term};
use crate::query::{Filter, GroupPattern, PatternElement, Projection, Select, TriplePattern};

/// Query result: distinct sorted values, or a count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum ResultSet {
    Rows(Vec<String>),
    Count { count: u64 },
}

impl ResultSet {
    pub fn is_empty(&self) -> bool {
        match self {
            ResultSet::Rows(r) => r.is_empty(),
            ResultSet::Count { count } => *count == 0,
        }
    }

    pub fn rows(&self) -> Option<&[String]> {
        match self {
            ResultSet::Rows(r) => Some(r),
            ResultSet::Count { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("projection variable ?{0} is never bound")]
    UnboundProjection(String),
    #[error("oracle limits exceeded: {0}")]
    GuardExceeded(String),
}

/// Sort key of result values.
pub(crate) fn canonical_order(rows: &mut Vec<String>) {
    rows.sort_by_cached_key(|r| (r.nfc().collect::<String>(), r.clone()));
    rows.dedup();
}

/// Projects solutions onto the selected variable.
pub(crate) fn project(
    graph: &Graph,
    projection: &Projection,
    values: impl Iterator<Item = Term>,
) -> ResultSet {
    match projection {
        Projection::Var(_) => {
            let mut rows: Vec<String> = values.map(|t| graph.display(t)).collect();
            canonical_order(&mut rows);
            ResultSet::Rows(rows)
        }
        Projection::CountDistinct(_) => {
            let distinct: HashSet<Term> = values.collect();
            ResultSet::Count {
                count: distinct.len() as u64,
            }
        }
    }
}

type Row = Vec<Option<Term>>;

struct Vars {
    index: HashMap<String, usize>,
}

impl Vars {
    fn collect(select: &Select) -> Self {
        fn walk(g: &GroupPattern, v: &mut Vars) {
            for e in &g.elements {
                match e {
                    PatternElement::Triple(t) => {
                        v.add(&t.subject);
                        v.add(&t.object);
                    }
                    PatternElement::Filter(f) => v.add(&f.var),
                    PatternElement::Union(l, r) => {
                        walk(l, v);
                        walk(r, v);
                    }
                    PatternElement::SubSelect(s) => {
                        v.add(s.projection.var());
                        walk(&s.pattern, v);
                    }
                }
            }
        }
        let mut v = Vars {
            index: HashMap::new(),
        };
        v.add(select.projection.var());
        walk(&select.pattern, &mut v);
        v
    }

    fn add(&mut self, name: &str) {
        let n = self.index.len();
        self.index.entry(name.to_owned()).or_insert(n);
    }

    fn get(&self, name: &str) -> usize {
        self.index[name]
    }

    fn len(&self) -> usize {
        self.index.len()
    }
}

struct Eval<'g> {
    graph: &'g Graph,
    vars: Vars,
    /// Filter verdicts keyed by filter address and term.
    verdicts: RefCell<HashMap<(usize, Term), bool>>,
}

fn join(left: &[Row], right: &[Row]) -> Vec<Row> {
    let mut out = Vec::new();
    for l in left {
        for r in right {
            let compatible = l
                .iter()
                .zip(r)
                .all(|(a, b)| a.is_none() || b.is_none() || a == b);
            if compatible {
                out.push(l.iter().zip(r).map(|(a, b)| a.or(*b)).collect());
            }
        }
    }
    out
}

impl Eval<'_> {
    fn accepts(&self, f: &Filter, term: Term) -> bool {
        let key = (f as *const Filter as usize, term);
        if let Some(v) = self.verdicts.borrow().get(&key) {
            return *v;
        }
        let v = self
            .graph
            .text(term)
            .is_some_and(|s| f.pattern.matches(s, f.case_insensitive));
        self.verdicts.borrow_mut().insert(key, v);
        v
    }

    fn filter_keeps(&self, f: &Filter, row: &Row) -> bool {
        row[self.vars.get(&f.var)].is_some_and(|t| self.accepts(f, t))
    }

    /// Extends `row` by every match of `t`, dropping values rejected by `checks`.
    fn extend(
        &self,
        t: &TriplePattern,
        checks: &[(usize, &Filter)],
        row: &Row,
        out: &mut Vec<Row>,
    ) {
        let (si, oi) = (self.vars.get(&t.subject), self.vars.get(&t.object));
        let g = self.graph;
        let mut push = |s: Term, o: Term| {
            let Term::Entity(e) = s else { return };
            if g.class_of(e) != t.class {
                return;
            }
            // subject and object may be the same variable
            if si == oi && s != o {
                return;
            }
            let ok = checks.iter().all(|(i, f)| {
                let v = if *i == si { s } else { o };
                self.accepts(f, v)
            });
            if !ok {
                return;
            }
            let mut next = row.clone();
            next[si] = Some(s);
            next[oi] = Some(o);
            out.push(next);
        };
        match (row[si], row[oi]) {
            (Some(Term::Entity(s)), Some(o)) => {
                if g.objects(t.property, s).contains(&o) {
                    push(Term::Entity(s), o);
                }
            }
            (Some(Term::Literal(_)), _) => {}
            (Some(Term::Entity(s)), None) => {
                for &o in g.objects(t.property, s) {
                    push(Term::Entity(s), o);
                }
            }
            (None, Some(o)) => {
                for &s in g.subjects(t.property, o) {
                    push(Term::Entity(s), o);
                }
            }
            (None, None) => {
                for &(s, o) in g.pairs(t.property) {
                    push(Term::Entity(s), o);
                }
            }
        }
    }

    /// Triples are joined connected-first, so the order differs from the
    /// written one; the solutions do not.
    fn group(&self, g: &GroupPattern) -> Vec<Row> {
        let mut pending: Vec<&TriplePattern> = Vec::new();
        let mut filters: Vec<&Filter> = Vec::new();
        for e in &g.elements {
            match e {
                PatternElement::Triple(t) => pending.push(t),
                PatternElement::Filter(f) => filters.push(f),
                PatternElement::Union(..) | PatternElement::SubSelect(_) => {}
            }
        }
        let mut rows: Vec<Row> = vec![vec![None; self.vars.len()]];
        let mut bound: HashSet<usize> = HashSet::new();
        while !pending.is_empty() && !rows.is_empty() {
            let score = |t: &TriplePattern| {
                let (s, o) = (self.vars.get(&t.subject), self.vars.get(&t.object));
                let filtered = filters.iter().any(|f| f.var == t.object);
                (
                    usize::from(bound.contains(&s)) + usize::from(bound.contains(&o)),
                    filtered,
                )
            };
            let mut best = 0;
            for (i, t) in pending.iter().enumerate().skip(1) {
                if score(t) > score(pending[best]) {
                    best = i;
                }
            }
            let t = pending.remove(best);
            let (si, oi) = (self.vars.get(&t.subject), self.vars.get(&t.object));
            let checks: Vec<(usize, &Filter)> = filters
                .iter()
                .map(|f| (self.vars.get(&f.var), *f))
                .filter(|(i, _)| (*i == si || *i == oi) && !bound.contains(i))
                .collect();
            let mut next = Vec::new();
            for r in &rows {
                self.extend(t, &checks, r, &mut next);
            }
            rows = next;
            bound.insert(si);
            bound.insert(oi);
        }
        for e in &g.elements {
            match e {
                PatternElement::Union(l, r) => {
                    let mut both = self.group(l);
                    both.extend(self.group(r));
                    rows = join(&rows, &both);
                }
                PatternElement::SubSelect(s) => {
                    let inner = self.subselect(s);
                    rows = join(&rows, &inner);
                }
                PatternElement::Triple(_) | PatternElement::Filter(_) => {}
            }
        }
        rows.retain(|r| filters.iter().all(|f| self.filter_keeps(f, r)));
        rows
    }

    fn subselect(&self, s: &Select) -> Vec<Row> {
        let i = self.vars.get(s.projection.var());
        let mut seen = HashSet::new();
        self.group(&s.pattern)
            .into_iter()
            .filter_map(|r| r[i])
            .filter(|t| seen.insert(*t))
            .map(|t| {
                let mut row = vec![None; self.vars.len()];
                row[i] = Some(t);
                row
            })
            .collect()
    }
}

/// Evaluates a query against the graph.
///
/// Within a group, triple patterns are joined in a connected order and filters
/// are applied as soon as their variable is bound.
pub fn evaluate(query: &Select, graph: &Graph) -> Result<ResultSet, EvalError> {
    let var = query.projection.var();
    if !query.pattern.bound_vars().contains(var) {
        return Err(EvalError::UnboundProjection(var.to_owned()));
    }
    let ev = Eval {
        graph,
        vars: Vars::collect(query),
        verdicts: RefCell::new(HashMap::new()),
    };
    let i = ev.vars.get(var);
    let rows = ev.group(&query.pattern);
    Ok(project(
        graph,
        &query.projection,
        rows.iter().filter_map(|r| r[i]),
    ))
}
