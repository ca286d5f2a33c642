//! Exhaustive evaluation used to cross-check [`super::evaluate`].
//!
//! Each group enumerates every assignment of its triple variables to graph
//! terms, pruning as soon as a fully assigned pattern fails. Filters use the
//! `regex` crate rather than the evaluator's literal matcher.

use std::collections::{BTreeMap, HashSet};

use regex::Regex;
use unicode_normalization::UnicodeNormalization;

use super::{project, EvalError, ResultSet};
use crate::kb::{EntityId, Graph, Property, Term};
use crate::query::{Filter, GroupPattern, PatternElement, Select, TriplePattern};

pub const MAX_ORACLE_TRIPLES: usize = 500;
pub const MAX_ORACLE_VARS: usize = 8;

type Solution = BTreeMap<String, Term>;

struct Oracle<'g> {
    graph: &'g Graph,
    facts: HashSet<(EntityId, Property, Term)>,
    terms: Vec<Term>,
}

fn merge(a: &Solution, b: &Solution) -> Option<Solution> {
    let mut out = a.clone();
    for (k, v) in b {
        match out.get(k) {
            Some(x) if x != v => return None,
            _ => {
                out.insert(k.clone(), *v);
            }
        }
    }
    Some(out)
}

fn join(a: &[Solution], b: &[Solution]) -> Vec<Solution> {
    a.iter()
        .flat_map(|x| b.iter().filter_map(move |y| merge(x, y)))
        .collect()
}

impl Oracle<'_> {
    fn holds(&self, t: &TriplePattern, s: Term, o: Term) -> bool {
        match s {
            Term::Entity(e) => {
                self.graph.class_of(e) == t.class && self.facts.contains(&(e, t.property, o))
            }
            Term::Literal(_) => false,
        }
    }

    fn filter_holds(&self, f: &Filter, sol: &Solution) -> Result<bool, EvalError> {
        let Some(text) = sol.get(&f.var).and_then(|t| self.graph.text(*t)) else {
            return Ok(false);
        };
        let pattern: String = f.pattern.to_regex().nfc().collect();
        let source = if f.case_insensitive {
            format!("(?i){pattern}")
        } else {
            pattern
        };
        let re = Regex::new(&source)
            .map_err(|e| EvalError::GuardExceeded(format!("bad pattern: {e}")))?;
        Ok(re.is_match(&text.nfc().collect::<String>()))
    }

    fn assign(
        &self,
        vars: &[&str],
        triples: &[&TriplePattern],
        sol: &mut Solution,
        out: &mut Vec<Solution>,
    ) {
        let Some((var, rest)) = vars.split_first() else {
            out.push(sol.clone());
            return;
        };
        for &term in &self.terms {
            sol.insert((*var).to_owned(), term);
            let ok = triples
                .iter()
                .filter(|t| t.subject == *var || t.object == *var)
                .all(|t| match (sol.get(&t.subject), sol.get(&t.object)) {
                    (Some(s), Some(o)) => self.holds(t, *s, *o),
                    _ => true,
                });
            if ok {
                self.assign(rest, triples, sol, out);
            }
            sol.remove(*var);
        }
    }

    fn group(&self, g: &GroupPattern) -> Result<Vec<Solution>, EvalError> {
        let triples: Vec<&TriplePattern> = g
            .elements
            .iter()
            .filter_map(|e| match e {
                PatternElement::Triple(t) => Some(t),
                _ => None,
            })
            .collect();
        let mut vars: Vec<&str> = Vec::new();
        for t in &triples {
            for v in [t.subject.as_str(), t.object.as_str()] {
                if !vars.contains(&v) {
                    vars.push(v);
                }
            }
        }
        if vars.len() > MAX_ORACLE_VARS {
            return Err(EvalError::GuardExceeded(format!(
                "{} variables in one group (limit {MAX_ORACLE_VARS})",
                vars.len()
            )));
        }
        let mut sols = Vec::new();
        self.assign(&vars, &triples, &mut Solution::new(), &mut sols);

        for e in &g.elements {
            match e {
                PatternElement::Union(l, r) => {
                    let mut both = self.group(l)?;
                    both.extend(self.group(r)?);
                    sols = join(&sols, &both);
                }
                PatternElement::SubSelect(s) => {
                    let var = s.projection.var();
                    let inner: HashSet<Term> = self
                        .group(&s.pattern)?
                        .into_iter()
                        .filter_map(|sol| sol.get(var).copied())
                        .collect();
                    let inner: Vec<Solution> = inner
                        .into_iter()
                        .map(|t| Solution::from([(var.to_owned(), t)]))
                        .collect();
                    sols = join(&sols, &inner);
                }
                PatternElement::Triple(_) | PatternElement::Filter(_) => {}
            }
        }

        let filters: Vec<&Filter> = g
            .elements
            .iter()
            .filter_map(|e| match e {
                PatternElement::Filter(f) => Some(f),
                _ => None,
            })
            .collect();
        let mut kept = Vec::new();
        for sol in sols {
            let mut ok = true;
            for f in &filters {
                if !self.filter_holds(f, &sol)? {
                    ok = false;
                    break;
                }
            }
            if ok {
                kept.push(sol);
            }
        }
        Ok(kept)
    }
}

/// Reference evaluation by exhaustive enumeration; only for small inputs.
pub fn brute_force_evaluate(query: &Select, graph: &Graph) -> Result<ResultSet, EvalError> {
    if graph.len() > MAX_ORACLE_TRIPLES {
        return Err(EvalError::GuardExceeded(format!(
            "{} triples (limit {MAX_ORACLE_TRIPLES})",
            graph.len()
        )));
    }
    let oracle = Oracle {
        graph,
        facts: graph
            .triples()
            .iter()
            .map(|t| (t.subject, t.property, t.object))
            .collect(),
        terms: graph.terms(),
    };
    let sols = oracle.group(&query.pattern)?;
    let var = query.projection.var();
    Ok(project(
        graph,
        &query.projection,
        sols.iter().filter_map(|s| s.get(var).copied()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::evaluate;
    use crate::intent::{decompose, Connective, QueryIntent, Slot, Target};
    use crate::kb::{Class, Graph, Triple};
    use crate::query::{build_query, BuildOptions};

    #[test]
    fn agrees_with_evaluator_on_nested_example() {
        let mut g = Graph::new();
        let a = g.entity(Class::Author, "Nguyen");
        let b = g.entity(Class::Author, "Tran");
        let toan = g.course("1", "Toan");
        let van = g.course("2", "Van");
        for (s, o) in [(a, toan), (a, van), (b, toan)] {
            g.insert(Triple {
                subject: s,
                property: Property::Write,
                object: Term::Entity(o),
            })
            .unwrap();
        }
        g.apply_inference();
        for c in [Connective::And, Connective::Or] {
            let i = QueryIntent::new(Target::Author).with_multi(Slot::Title, c, &["Toan", "Van"]);
            let q = build_query(&decompose(&i), &BuildOptions::default()).unwrap();
            assert_eq!(brute_force_evaluate(&q, &g), evaluate(&q, &g));
        }
    }

    #[test]
    fn guard_rejects_large_graphs() {
        let mut g = Graph::new();
        for i in 0..=MAX_ORACLE_TRIPLES {
            g.course(&i.to_string(), &format!("c{i}"));
        }
        assert_eq!(g.len(), MAX_ORACLE_TRIPLES + 1);
        let q = build_query(
            &decompose(&QueryIntent::new(Target::BookList)),
            &BuildOptions::default(),
        )
        .unwrap();
        assert!(matches!(
            brute_force_evaluate(&q, &g),
            Err(EvalError::GuardExceeded(_))
        ));
    }
}
