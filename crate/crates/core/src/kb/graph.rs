//! Indexed triple store with interned entities and literals.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use super::schema::{Class, Property, Range};
use crate::lexicon::{canonicalize, normalize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LiteralId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Entity(EntityId),
    Literal(LiteralId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: EntityId,
    pub property: Property,
    pub object: Term,
}

/// Identity of an entity independent of its id in any particular graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityKey {
    pub class: Class,
    pub key: String,
}

impl EntityKey {
    /// Keyed by normalized content.
    pub fn named(class: Class, content: &str) -> Self {
        EntityKey {
            class,
            key: normalize(content),
        }
    }

    /// Keyed by an external identifier (course record ids).
    pub fn with_id(class: Class, id: &str) -> Self {
        EntityKey {
            class,
            key: format!("#{id}"),
        }
    }
}

impl fmt::Display for EntityKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.class, self.key)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConsistencyError {
    #[error("{property}: subject is {found}, domain is {expected}")]
    Domain {
        property: Property,
        expected: Class,
        found: Class,
    },
    #[error("{property}: object is {found}, range is {expected}")]
    Range {
        property: Property,
        expected: String,
        found: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Schema {
        triple: Triple,
        error: ConsistencyError,
    },
    MissingContent {
        entity: EntityId,
        key: EntityKey,
    },
    MultipleContent {
        entity: EntityId,
        key: EntityKey,
        count: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Schema { error, .. } => write!(f, "{error}"),
            Violation::MissingContent { key, .. } => write!(f, "{key} has no content"),
            Violation::MultipleContent { key, count, .. } => {
                write!(f, "{key} has {count} content literals")
            }
        }
    }
}

/// Counts exposed by the stats endpoint and the `load` verb.
#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize)]
pub struct GraphStats {
    pub entities: usize,
    pub literals: usize,
    pub triples: usize,
    pub courses: usize,
    pub authors: usize,
    pub publishers: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Graph {
    classes: Vec<Class>,
    keys: Vec<EntityKey>,
    by_key: HashMap<EntityKey, EntityId>,
    literals: Vec<String>,
    literal_ids: HashMap<String, LiteralId>,
    triples: Vec<Triple>,
    present: HashSet<Triple>,
    by_property: HashMap<Property, Vec<(EntityId, Term)>>,
    by_subject: HashMap<(Property, EntityId), Vec<Term>>,
    by_object: HashMap<(Property, Term), Vec<EntityId>>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Entity for `key`, created without content if absent.
    pub fn intern(&mut self, key: EntityKey) -> EntityId {
        if let Some(id) = self.by_key.get(&key) {
            return *id;
        }
        let id = EntityId(self.classes.len() as u32);
        self.classes.push(key.class);
        self.keys.push(key.clone());
        self.by_key.insert(key, id);
        id
    }

    /// Entity keyed by its content, with the content literal attached.
    pub fn entity(&mut self, class: Class, content: &str) -> EntityId {
        let id = self.intern(EntityKey::named(class, content));
        self.set_content(id, content);
        id
    }

    /// Course keyed by record id, with its name attached.
    pub fn course(&mut self, id: &str, name: &str) -> EntityId {
        let e = self.intern(EntityKey::with_id(Class::Course, id));
        self.set_content(e, name);
        e
    }

    /// Adds a content literal unless one equal under normalization exists.
    pub fn set_content(&mut self, entity: EntityId, content: &str) {
        let wanted = normalize(content);
        let same = self
            .objects(Property::Content, entity)
            .iter()
            .any(|t| self.text(*t).is_some_and(|s| normalize(s) == wanted));
        if !same {
            let lit = self.literal(content);
            self.insert_unchecked(Triple {
                subject: entity,
                property: Property::Content,
                object: lit,
            });
        }
    }

    pub fn literal(&mut self, text: &str) -> Term {
        let text = canonicalize(text);
        if let Some(id) = self.literal_ids.get(&text) {
            return Term::Literal(*id);
        }
        let id = LiteralId(self.literals.len() as u32);
        self.literals.push(text.clone());
        self.literal_ids.insert(text, id);
        Term::Literal(id)
    }

    pub fn lookup(&self, key: &EntityKey) -> Option<EntityId> {
        self.by_key.get(key).copied()
    }

    pub fn class_of(&self, entity: EntityId) -> Class {
        self.classes[entity.0 as usize]
    }

    pub fn key_of(&self, entity: EntityId) -> &EntityKey {
        &self.keys[entity.0 as usize]
    }

    /// Literal text, or `None` for entity terms.
    pub fn text(&self, term: Term) -> Option<&str> {
        match term {
            Term::Literal(id) => Some(&self.literals[id.0 as usize]),
            Term::Entity(_) => None,
        }
    }

    /// First content literal of an entity.
    pub fn content_of(&self, entity: EntityId) -> Option<&str> {
        self.objects(Property::Content, entity)
            .first()
            .and_then(|t| self.text(*t))
    }

    /// Human-readable form of any term.
    pub fn display(&self, term: Term) -> String {
        match term {
            Term::Literal(_) => self.text(term).unwrap_or_default().to_owned(),
            Term::Entity(e) => self
                .content_of(e)
                .map(str::to_owned)
                .unwrap_or_else(|| self.key_of(e).to_string()),
        }
    }

    pub fn check(&self, triple: &Triple) -> Result<(), ConsistencyError> {
        let found = self.class_of(triple.subject);
        if let Some(expected) = triple.property.domain() {
            if found != expected {
                return Err(ConsistencyError::Domain {
                    property: triple.property,
                    expected,
                    found,
                });
            }
        }
        let ok = match (triple.property.range(), triple.object) {
            (Range::Literal, Term::Literal(_)) => true,
            (Range::Class(c), Term::Entity(e)) => self.class_of(e) == c,
            _ => false,
        };
        if !ok {
            let expected = match triple.property.range() {
                Range::Literal => "Literal".to_owned(),
                Range::Class(c) => c.to_string(),
            };
            let found = match triple.object {
                Term::Literal(_) => "Literal".to_owned(),
                Term::Entity(e) => self.class_of(e).to_string(),
            };
            return Err(ConsistencyError::Range {
                property: triple.property,
                expected,
                found,
            });
        }
        Ok(())
    }

    /// Inserts a schema-respecting triple; returns whether it was new.
    pub fn insert(&mut self, triple: Triple) -> Result<bool, ConsistencyError> {
        self.check(&triple)?;
        Ok(self.insert_unchecked(triple))
    }

    /// Inserts without schema checks.
    pub fn insert_unchecked(&mut self, triple: Triple) -> bool {
        if !self.present.insert(triple) {
            return false;
        }
        self.triples.push(triple);
        let Triple {
            subject,
            property,
            object,
        } = triple;
        self.by_property
            .entry(property)
            .or_default()
            .push((subject, object));
        self.by_subject
            .entry((property, subject))
            .or_default()
            .push(object);
        self.by_object
            .entry((property, object))
            .or_default()
            .push(subject);
        true
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.present.contains(triple)
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn entity_count(&self) -> usize {
        self.classes.len()
    }

    pub fn entities(&self) -> impl Iterator<Item = EntityId> + '_ {
        (0..self.classes.len() as u32).map(EntityId)
    }

    pub fn count_class(&self, class: Class) -> usize {
        self.classes.iter().filter(|c| **c == class).count()
    }

    /// Every distinct term appearing in some triple, in first-seen order.
    pub fn terms(&self) -> Vec<Term> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for t in &self.triples {
            for term in [Term::Entity(t.subject), t.object] {
                if seen.insert(term) {
                    out.push(term);
                }
            }
        }
        out
    }

    pub fn objects(&self, property: Property, subject: EntityId) -> &[Term] {
        self.by_subject
            .get(&(property, subject))
            .map(Vec::as_slice)
            .unwrap_or_default()
    }

    pub fn subjects(&self, property: Property, object: Term) -> &[EntityId] {
        self.by_object
            .get(&(property, object))
            .map(Vec::as_slice)
            .unwrap_or_default()
    }

    pub fn pairs(&self, property: Property) -> &[(EntityId, Term)] {
        self.by_property
            .get(&property)
            .map(Vec::as_slice)
            .unwrap_or_default()
    }

    /// Materializes both directions of every inverse pair; returns the
    /// number of triples added.
    pub fn apply_inference(&mut self) -> usize {
        let mut added = 0;
        for (p, q) in Property::INVERSE_PAIRS {
            for (from, to) in [(p, q), (q, p)] {
                let derived: Vec<Triple> = self
                    .pairs(from)
                    .iter()
                    .filter_map(|&(s, o)| match o {
                        Term::Entity(e) => Some(Triple {
                            subject: e,
                            property: to,
                            object: Term::Entity(s),
                        }),
                        Term::Literal(_) => None,
                    })
                    .collect();
                added += derived
                    .into_iter()
                    .filter(|t| self.insert_unchecked(*t))
                    .count();
            }
        }
        added
    }

    /// All schema violations and content-cardinality problems.
    pub fn check_consistency(&self) -> Vec<Violation> {
        let mut out: Vec<Violation> = self
            .triples
            .iter()
            .filter_map(|t| {
                self.check(t)
                    .err()
                    .map(|error| Violation::Schema { triple: *t, error })
            })
            .collect();
        for e in self.entities() {
            let count = self.objects(Property::Content, e).len();
            let key = self.key_of(e).clone();
            match count {
                0 => out.push(Violation::MissingContent { entity: e, key }),
                1 => {}
                _ => out.push(Violation::MultipleContent {
                    entity: e,
                    key,
                    count,
                }),
            }
        }
        out
    }

    /// Triples rendered with entity keys, comparable across graphs.
    pub fn canonical(&self) -> BTreeSet<(String, &'static str, String)> {
        self.triples
            .iter()
            .map(|t| {
                let object = match t.object {
                    Term::Entity(e) => self.key_of(e).to_string(),
                    Term::Literal(_) => format!("{:?}", self.display(t.object)),
                };
                (
                    self.key_of(t.subject).to_string(),
                    t.property.as_str(),
                    object,
                )
            })
            .collect()
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats {
            entities: self.entity_count(),
            literals: self.literals.len(),
            triples: self.len(),
            courses: self.count_class(Class::Course),
            authors: self.count_class(Class::Author),
            publishers: self.count_class(Class::Publisher),
        }
    }
}

/// Functional form of [`Graph::apply_inference`].
pub fn apply_inference(graph: &Graph) -> Graph {
    let mut g = graph.clone();
    g.apply_inference();
    g
}
