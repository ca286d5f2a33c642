use thiserror::Error;

use super::ast::{
    Filter, GroupPattern, PatternElement, Projection, Select, TriplePattern, DEFAULT_DATASET,
};
use super::pattern::LiteralPattern;
use crate::intent::{DecomposedIntent, QueryIntent, Slot, SlotValue, Target};
use crate::kb::{Class, Property};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildOptions {
    pub dataset: String,
    /// Unanchored filters instead of exact matches.
    pub substring_match: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            dataset: DEFAULT_DATASET.to_owned(),
            substring_match: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("target {0} cannot be compiled")]
    UnsupportedTarget(Target),
    #[error("slot {} is still multi-valued", .0.as_str())]
    MultiValued(Slot),
    #[error("nothing to compile")]
    Empty,
}

/// Entity variable, name variable and class of a slot.
fn slot_vars(slot: Slot) -> (&'static str, &'static str, Class) {
    match slot {
        Slot::Title => ("course", "coursename", Class::Course),
        Slot::Author => ("author", "authorname", Class::Author),
        Slot::Publisher => ("publisher", "publishername", Class::Publisher),
        Slot::Year => ("year", "yearname", Class::Year),
        Slot::Subject => ("subject", "subjectname", Class::Subject),
        Slot::Place => ("place", "placename", Class::Place),
    }
}

/// Variable projected for a target; for counts, the counted variable.
pub fn projection_var(target: Target) -> &'static str {
    match target {
        Target::Author => "authorname",
        Target::Publisher => "publishername",
        Target::YearOfWriting | Target::YearOfPublishing => "yearname",
        Target::Subject => "subjectname",
        Target::BookList => "coursename",
        Target::PlaceOfPublication | Target::PlaceOfPublisher => "placename",
        Target::Price => "pricename",
        Target::CountBooks => "course",
    }
}

struct Group {
    elements: Vec<PatternElement>,
    substring: bool,
}

impl Group {
    fn triple(&mut self, subject: &str, class: Class, property: Property, object: &str) {
        let t = TriplePattern {
            subject: subject.to_owned(),
            class,
            property,
            object: object.to_owned(),
        };
        if !self.elements.contains(&PatternElement::Triple(t.clone())) {
            self.elements.push(PatternElement::Triple(t));
        }
    }

    fn content(&mut self, var: &str, class: Class, name: &str) {
        self.triple(var, class, Property::Content, name);
    }

    /// Filter placed right after the content triple binding `var`.
    fn filter(&mut self, var: &str, value: &str) {
        let pattern = if self.substring {
            LiteralPattern::substring(value)
        } else {
            LiteralPattern::exact(value)
        };
        let filter = PatternElement::Filter(Filter {
            var: var.to_owned(),
            pattern,
            case_insensitive: true,
        });
        let at = self
            .elements
            .iter()
            .position(|e| matches!(e, PatternElement::Triple(t) if t.object == var && t.property == Property::Content));
        match at {
            Some(i) => {
                let mut j = i + 1;
                while matches!(self.elements.get(j), Some(PatternElement::Filter(f)) if f.var == var)
                {
                    j += 1;
                }
                self.elements.insert(j, filter);
            }
            None => self.elements.push(filter),
        }
    }
}

fn target_patterns(g: &mut Group, target: Target) {
    match target {
        Target::Author => {
            g.content("author", Class::Author, "authorname");
            g.triple("author", Class::Author, Property::Write, "course");
        }
        Target::Publisher => {
            g.content("publisher", Class::Publisher, "publishername");
            g.triple("publisher", Class::Publisher, Property::Publish, "course");
        }
        Target::YearOfWriting => {
            g.content("year", Class::Year, "yearname");
            g.triple("course", Class::Course, Property::IsWrittenIn, "year");
        }
        Target::YearOfPublishing => {
            g.content("year", Class::Year, "yearname");
            g.triple("course", Class::Course, Property::IsWrittenIn, "year");
            g.triple("publisher", Class::Publisher, Property::Publish, "course");
        }
        Target::Subject => {
            g.content("subject", Class::Subject, "subjectname");
            g.triple("course", Class::Course, Property::HasSubject, "subject");
        }
        Target::BookList | Target::CountBooks => {
            g.content("course", Class::Course, "coursename");
        }
        Target::PlaceOfPublication => {
            g.content("place", Class::Place, "placename");
            g.triple("course", Class::Course, Property::PublishedAt, "place");
        }
        Target::PlaceOfPublisher => {
            g.content("place", Class::Place, "placename");
            g.triple("publisher", Class::Publisher, Property::LocatedAt, "place");
        }
        Target::Price => {
            g.content("price", Class::Price, "pricename");
            g.triple("course", Class::Course, Property::HasPrice, "price");
        }
    }
}

const SLOT_ORDER: [Slot; 6] = [
    Slot::Author,
    Slot::Publisher,
    Slot::Year,
    Slot::Subject,
    Slot::Place,
    Slot::Title,
];

/// Group pattern for one single-valued intent.
pub fn build_group(
    intent: &QueryIntent,
    options: &BuildOptions,
) -> Result<GroupPattern, BuildError> {
    let mut g = Group {
        elements: Vec::new(),
        substring: options.substring_match,
    };
    target_patterns(&mut g, intent.target);
    if let Some(value) = &intent.verify {
        let slot = intent
            .target
            .own_slot()
            .ok_or(BuildError::UnsupportedTarget(intent.target))?;
        g.filter(slot_vars(slot).1, value);
    }
    let others = intent.slots.keys().any(|s| *s != Slot::Publisher);
    for slot in SLOT_ORDER {
        let Some(value) = intent.slots.get(&slot) else {
            continue;
        };
        let SlotValue::Single(value) = value else {
            return Err(BuildError::MultiValued(slot));
        };
        let (entity, name, class) = slot_vars(slot);
        g.content(entity, class, name);
        g.filter(name, value);
        match slot {
            Slot::Title => {}
            Slot::Author => g.triple("author", class, Property::Write, "course"),
            Slot::Publisher => {
                // a publisher's own location needs no course
                if intent.target != Target::PlaceOfPublisher || others {
                    g.triple("publisher", class, Property::Publish, "course");
                }
            }
            Slot::Year => g.triple("course", Class::Course, Property::IsWrittenIn, "year"),
            Slot::Subject => g.triple("course", Class::Course, Property::HasSubject, "subject"),
            Slot::Place => g.triple("course", Class::Course, Property::PublishedAt, "place"),
        }
    }
    Ok(GroupPattern::new(g.elements))
}

fn projection(target: Target, inner: bool) -> Projection {
    let var = projection_var(target).to_owned();
    if target == Target::CountBooks && !inner {
        Projection::CountDistinct(var)
    } else {
        Projection::Var(var)
    }
}

fn chain(
    intents: &[QueryIntent],
    inner: bool,
    options: &BuildOptions,
) -> Result<Select, BuildError> {
    let (first, rest) = intents.split_first().ok_or(BuildError::Empty)?;
    let mut pattern = build_group(first, options)?;
    if !rest.is_empty() {
        let nested = chain(rest, true, options)?;
        pattern
            .elements
            .push(PatternElement::SubSelect(Box::new(nested)));
    }
    Ok(Select {
        projection: projection(first.target, inner),
        dataset: options.dataset.clone(),
        pattern,
    })
}

/// Compiles a decomposed intent: chains nest, unions become left-nested UNIONs.
pub fn build_query(d: &DecomposedIntent, options: &BuildOptions) -> Result<Select, BuildError> {
    match d {
        DecomposedIntent::Chain(intents) => chain(intents, false, options),
        DecomposedIntent::Union(intents) => {
            let first = intents.first().ok_or(BuildError::Empty)?;
            let mut groups = intents.iter().map(|i| build_group(i, options));
            let mut acc = groups.next().ok_or(BuildError::Empty)??;
            for g in groups {
                let union = PatternElement::Union(acc, g?);
                acc = GroupPattern::new(vec![union]);
            }
            Ok(Select {
                projection: projection(first.target, false),
                dataset: options.dataset.clone(),
                pattern: acc,
            })
        }
    }
}
