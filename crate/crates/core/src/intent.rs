//! Lowering of parse trees to query intents and conjunction decomposition.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::lexicon::{normalize, Category, LiteralKind};
use crate::parser::{Grammar, ParseNode, ParseTree};

const SEED_TARGETS: &str = include_str!("../data/targets.tsv");

/// What a question asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    Author,
    Publisher,
    YearOfWriting,
    YearOfPublishing,
    Subject,
    BookList,
    PlaceOfPublication,
    PlaceOfPublisher,
    Price,
    CountBooks,
}

impl Target {
    pub const ALL: [Target; 10] = [
        Target::Author,
        Target::Publisher,
        Target::YearOfWriting,
        Target::YearOfPublishing,
        Target::Subject,
        Target::BookList,
        Target::PlaceOfPublication,
        Target::PlaceOfPublisher,
        Target::Price,
        Target::CountBooks,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Target::Author => "Author",
            Target::Publisher => "Publisher",
            Target::YearOfWriting => "YearOfWriting",
            Target::YearOfPublishing => "YearOfPublishing",
            Target::Subject => "Subject",
            Target::BookList => "BookList",
            Target::PlaceOfPublication => "PlaceOfPublication",
            Target::PlaceOfPublisher => "PlaceOfPublisher",
            Target::Price => "Price",
            Target::CountBooks => "CountBooks",
        }
    }

    /// The slot this target asks about, which therefore cannot be a constraint.
    pub fn own_slot(self) -> Option<Slot> {
        match self {
            Target::Author => Some(Slot::Author),
            Target::Publisher => Some(Slot::Publisher),
            Target::YearOfWriting | Target::YearOfPublishing => Some(Slot::Year),
            Target::Subject => Some(Slot::Subject),
            Target::BookList => Some(Slot::Title),
            Target::PlaceOfPublication | Target::PlaceOfPublisher => Some(Slot::Place),
            Target::Price | Target::CountBooks => None,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Target::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| s.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Title,
    Author,
    Publisher,
    Year,
    Subject,
    Place,
}

impl Slot {
    pub const ALL: [Slot; 6] = [
        Slot::Title,
        Slot::Author,
        Slot::Publisher,
        Slot::Year,
        Slot::Subject,
        Slot::Place,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Slot::Title => "title",
            Slot::Author => "author",
            Slot::Publisher => "publisher",
            Slot::Year => "year",
            Slot::Subject => "subject",
            Slot::Place => "place",
        }
    }

    fn of_literal(kind: LiteralKind) -> Slot {
        match kind {
            LiteralKind::Title => Slot::Title,
            LiteralKind::Person => Slot::Author,
            LiteralKind::PublisherName => Slot::Publisher,
            LiteralKind::Year => Slot::Year,
            LiteralKind::SubjectName => Slot::Subject,
            LiteralKind::PlaceName => Slot::Place,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Connective {
    And,
    Or,
}

impl Connective {
    /// Connective signalled by a conjunction word.
    pub fn of_word(normalized: &str) -> Connective {
        match normalized {
            "hoặc" | "hay" => Connective::Or,
            _ => Connective::And,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlotValue {
    Single(String),
    Multi {
        connective: Connective,
        values: Vec<String>,
    },
}

impl SlotValue {
    pub fn is_multi(&self) -> bool {
        matches!(self, SlotValue::Multi { .. })
    }

    pub fn values(&self) -> &[String] {
        match self {
            SlotValue::Single(v) => std::slice::from_ref(v),
            SlotValue::Multi { values, .. } => values,
        }
    }

    pub fn single(&self) -> Option<&str> {
        match self {
            SlotValue::Single(v) => Some(v),
            SlotValue::Multi { .. } => None,
        }
    }
}

/// Target plus constraint slots of one question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryIntent {
    pub target: Target,
    /// For yes/no questions, the value of the target being checked.
    pub verify: Option<String>,
    pub slots: BTreeMap<Slot, SlotValue>,
}

impl QueryIntent {
    pub fn new(target: Target) -> Self {
        QueryIntent {
            target,
            verify: None,
            slots: BTreeMap::new(),
        }
    }

    pub fn with(mut self, slot: Slot, value: &str) -> Self {
        self.slots.insert(slot, SlotValue::Single(value.to_owned()));
        self
    }

    pub fn with_multi(mut self, slot: Slot, connective: Connective, values: &[&str]) -> Self {
        let values = values.iter().map(|v| (*v).to_owned()).collect();
        self.slots
            .insert(slot, SlotValue::Multi { connective, values });
        self
    }

    pub fn verifying(mut self, value: &str) -> Self {
        self.verify = Some(value.to_owned());
        self
    }

    pub fn validate(&self) -> Result<(), IntentError> {
        if let Some(own) = self.target.own_slot() {
            if self.slots.contains_key(&own) {
                return Err(IntentError::SlotConflict {
                    slot: own,
                    detail: format!("{} is the question target", own.as_str()),
                });
            }
        }
        let multi: Vec<Slot> = self
            .slots
            .iter()
            .filter(|(_, v)| v.is_multi())
            .map(|(s, _)| *s)
            .collect();
        if multi.len() > 1 {
            return Err(IntentError::MultipleMultiSlots(multi));
        }
        for (slot, value) in &self.slots {
            if let SlotValue::Multi { values, .. } = value {
                let mut seen: Vec<String> = values.iter().map(|v| normalize(v)).collect();
                seen.sort();
                seen.dedup();
                if values.len() < 2 || seen.len() != values.len() {
                    return Err(IntentError::SlotConflict {
                        slot: *slot,
                        detail: "multi-valued slot needs at least two distinct values".into(),
                    });
                }
            }
        }
        Ok(())
    }
}

fn quote(value: &str) -> String {
    format!("\"{}\"", value.replace('\\', "\\\\").replace('"', "\\\""))
}

impl fmt::Display for QueryIntent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.target)?;
        if let Some(v) = &self.verify {
            write!(f, "={}", quote(v))?;
        }
        f.write_str("{")?;
        for (i, (slot, value)) in self.slots.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}=", slot.as_str())?;
            match value {
                SlotValue::Single(v) => f.write_str(&quote(v))?,
                SlotValue::Multi { connective, values } => {
                    let word = match connective {
                        Connective::And => "and",
                        Connective::Or => "or",
                    };
                    let list: Vec<String> = values.iter().map(|v| quote(v)).collect();
                    write!(f, "{word}[{}]", list.join(", "))?;
                }
            }
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntentError {
    #[error("mixed \"and\" and \"or\" connectives at token {position}")]
    MixedConnective { position: usize },
    #[error("more than one multi-valued slot: {0:?}")]
    MultipleMultiSlots(Vec<Slot>),
    #[error("conflicting values for slot {}: {detail}", slot.as_str())]
    SlotConflict { slot: Slot, detail: String },
    #[error("no target is defined for rule {0}")]
    UnknownRule(String),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TargetTableError {
    #[error("line {line}: expected `rule<TAB>target[<TAB>verify]`")]
    Malformed { line: usize },
    #[error("line {line}: unknown target {name}")]
    UnknownTarget { line: usize, name: String },
    #[error("line {line}: duplicate rule {rule}")]
    Duplicate { line: usize, rule: String },
    #[error("rule {0} has no target")]
    Missing(String),
}

/// Rule id to question target, checked in next to the grammar.
#[derive(Debug, Clone, Default)]
pub struct TargetTable {
    map: HashMap<String, (Target, bool)>,
}

impl TargetTable {
    pub fn seed() -> Self {
        SEED_TARGETS.parse().expect("bundled target table is valid")
    }

    pub fn get(&self, rule: &str) -> Option<(Target, bool)> {
        self.map.get(rule).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Every rule of `grammar` must have an entry.
    pub fn check_covers(&self, grammar: &Grammar) -> Result<(), TargetTableError> {
        match grammar.rules.iter().find(|r| !self.map.contains_key(&r.id)) {
            Some(r) => Err(TargetTableError::Missing(r.id.clone())),
            None => Ok(()),
        }
    }
}

impl FromStr for TargetTable {
    type Err = TargetTableError;

    fn from_str(source: &str) -> Result<Self, Self::Err> {
        let mut map = HashMap::new();
        for (i, raw) in source.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = raw.split('\t').map(str::trim).collect();
            let verify = match fields.as_slice() {
                [_, _] => false,
                [_, _, "verify"] => true,
                _ => return Err(TargetTableError::Malformed { line }),
            };
            let target = fields[1]
                .parse()
                .map_err(|name| TargetTableError::UnknownTarget { line, name })?;
            if map.insert(fields[0].to_owned(), (target, verify)).is_some() {
                return Err(TargetTableError::Duplicate {
                    line,
                    rule: fields[0].to_owned(),
                });
            }
        }
        Ok(TargetTable { map })
    }
}

fn collect_leaves<'a>(nodes: &'a [ParseNode], out: &mut Vec<&'a ParseNode>) {
    for n in nodes {
        match n {
            ParseNode::Leaf { .. } => out.push(n),
            ParseNode::Branch { children, .. } => collect_leaves(children, out),
        }
    }
}

/// Lowers a parse tree to its intent.
pub fn build_intent(tree: &ParseTree, targets: &TargetTable) -> Result<QueryIntent, IntentError> {
    let (target, verify) = targets
        .get(&tree.rule_id)
        .ok_or_else(|| IntentError::UnknownRule(tree.rule_id.clone()))?;
    let own = target.own_slot();

    let mut leaves = Vec::new();
    collect_leaves(&tree.children, &mut leaves);

    let mut values: BTreeMap<Slot, Vec<String>> = BTreeMap::new();
    let mut connective: Option<Connective> = None;
    for leaf in leaves {
        let ParseNode::Leaf {
            label,
            index,
            token,
        } = leaf
        else {
            continue;
        };
        if label == Category::Conjunction.as_str() {
            let c = Connective::of_word(&token.normalized);
            match connective {
                Some(prev) if prev != c => {
                    return Err(IntentError::MixedConnective { position: *index })
                }
                _ => connective = Some(c),
            }
            continue;
        }
        if let Some(kind) = LiteralKind::parse(label) {
            let slot = Slot::of_literal(kind);
            let list = values.entry(slot).or_default();
            if !list.iter().any(|v| normalize(v) == token.normalized) {
                list.push(token.surface.clone());
            }
        }
    }

    let mut intent = QueryIntent::new(target);
    if verify {
        let slot = own.ok_or_else(|| IntentError::UnknownRule(tree.rule_id.clone()))?;
        let mut checked = values.remove(&slot).unwrap_or_default();
        if checked.len() != 1 {
            return Err(IntentError::SlotConflict {
                slot,
                detail: format!("expected one value to check, found {}", checked.len()),
            });
        }
        intent.verify = checked.pop();
    }
    for (slot, mut list) in values {
        if Some(slot) == own {
            return Err(IntentError::SlotConflict {
                slot,
                detail: format!("{} is the question target", slot.as_str()),
            });
        }
        let value = if list.len() == 1 {
            SlotValue::Single(list.pop().expect("one value"))
        } else if slot == Slot::Title {
            SlotValue::Multi {
                connective: connective.unwrap_or(Connective::And),
                values: list,
            }
        } else {
            return Err(IntentError::SlotConflict {
                slot,
                detail: format!("{} distinct values", list.len()),
            });
        };
        intent.slots.insert(slot, value);
    }
    intent.validate()?;
    Ok(intent)
}

/// Single-valued intents derived from one intent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecomposedIntent {
    /// Every intent must hold (joined by nesting). A plain question is a chain of one.
    Chain(Vec<QueryIntent>),
    /// Any intent may hold.
    Union(Vec<QueryIntent>),
}

impl DecomposedIntent {
    pub fn intents(&self) -> &[QueryIntent] {
        match self {
            DecomposedIntent::Chain(v) | DecomposedIntent::Union(v) => v,
        }
    }
}

impl fmt::Display for DecomposedIntent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (word, parts) = match self {
            DecomposedIntent::Chain(v) if v.len() == 1 => return write!(f, "{}", v[0]),
            DecomposedIntent::Chain(v) => ("and", v),
            DecomposedIntent::Union(v) => ("or", v),
        };
        let inner: Vec<String> = parts.iter().map(ToString::to_string).collect();
        write!(f, "{word}({})", inner.join("; "))
    }
}

/// Splits the multi-valued slot, if any, into one intent per value.
pub fn decompose(intent: &QueryIntent) -> DecomposedIntent {
    let multi = intent.slots.iter().find_map(|(slot, v)| match v {
        SlotValue::Multi { connective, values } => Some((*slot, *connective, values.clone())),
        SlotValue::Single(_) => None,
    });
    let Some((slot, connective, values)) = multi else {
        return DecomposedIntent::Chain(vec![intent.clone()]);
    };
    let parts = values
        .into_iter()
        .map(|v| {
            let mut part = intent.clone();
            part.slots.insert(slot, SlotValue::Single(v));
            part
        })
        .collect();
    match connective {
        Connective::And => DecomposedIntent::Chain(parts),
        Connective::Or => DecomposedIntent::Union(parts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{segment, Lexicon};
    use crate::parser::parse;

    fn intent_of(q: &str) -> Result<QueryIntent, IntentError> {
        let tokens = segment(q, &Lexicon::seed());
        let tree = parse(&tokens, &Grammar::seed()).expect("parses");
        build_intent(&tree, &TargetTable::seed())
    }

    #[test]
    fn table_covers_every_rule() {
        let table = TargetTable::seed();
        assert_eq!(table.len(), 57);
        table.check_covers(&Grammar::seed()).unwrap();
    }

    #[test]
    fn single_title_author_question() {
        assert_eq!(
            intent_of("Ai đã viết sách Toan?").unwrap(),
            QueryIntent::new(Target::Author).with(Slot::Title, "Toan")
        );
    }

    #[test]
    fn conjunction_of_titles_with_year() {
        let got = intent_of("Ai đã có viết sách \"Toan\" và sách \"Van\" trong năm 2009?").unwrap();
        let want = QueryIntent::new(Target::Author)
            .with_multi(Slot::Title, Connective::And, &["Toan", "Van"])
            .with(Slot::Year, "2009");
        assert_eq!(got, want);
    }

    #[test]
    fn year_of_writing_question() {
        let got = intent_of("Sách B được tác giả A viết vào năm nào?").unwrap();
        let want = QueryIntent::new(Target::YearOfWriting)
            .with(Slot::Title, "B")
            .with(Slot::Author, "A");
        assert_eq!(got, want);
    }

    #[test]
    fn mixed_connectives_are_rejected() {
        let err = intent_of("Ai đã viết sách \"A\" và sách \"B\" hoặc sách \"C\"?").unwrap_err();
        assert!(matches!(err, IntentError::MixedConnective { .. }));
    }

    #[test]
    fn repeated_title_collapses_to_single() {
        let got = intent_of("Ai đã viết sách \"Toan\" và sách \"toan\"?").unwrap();
        assert_eq!(got.slots[&Slot::Title], SlotValue::Single("Toan".into()));
    }

    #[test]
    fn verify_rule_records_checked_value() {
        let got = intent_of("Tác giả Lê Minh Châu có phải là người viết sách Lập trình C không?")
            .unwrap();
        assert_eq!(got.target, Target::Author);
        assert_eq!(got.verify.as_deref(), Some("Lê Minh Châu"));
        assert!(!got.slots.contains_key(&Slot::Author));
    }

    #[test]
    fn decompose_and_or_single() {
        let and = QueryIntent::new(Target::Author).with_multi(
            Slot::Title,
            Connective::And,
            &["Toan", "Van"],
        );
        assert_eq!(
            decompose(&and),
            DecomposedIntent::Chain(vec![
                QueryIntent::new(Target::Author).with(Slot::Title, "Toan"),
                QueryIntent::new(Target::Author).with(Slot::Title, "Van"),
            ])
        );
        let single = QueryIntent::new(Target::Author).with(Slot::Title, "Toan");
        assert_eq!(
            decompose(&single),
            DecomposedIntent::Chain(vec![single.clone()])
        );
        let or = QueryIntent::new(Target::Author).with_multi(
            Slot::Title,
            Connective::Or,
            &["Toan", "Van"],
        );
        match decompose(&or) {
            DecomposedIntent::Union(parts) => assert_eq!(parts.len(), 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rendering_is_single_line() {
        let and = QueryIntent::new(Target::Author)
            .with_multi(Slot::Title, Connective::And, &["Toan", "Van"])
            .with(Slot::Year, "2009");
        assert_eq!(
            and.to_string(),
            r#"Author{title=and["Toan", "Van"], year="2009"}"#
        );
        assert_eq!(
            decompose(&and).to_string(),
            r#"and(Author{title="Toan", year="2009"}; Author{title="Van", year="2009"})"#
        );
        let v = QueryIntent::new(Target::Subject)
            .with(Slot::Title, "Toan")
            .verifying("Toán học");
        assert_eq!(v.to_string(), r#"Subject="Toán học"{title="Toan"}"#);
    }

    #[test]
    fn validate_rejects_two_multi_slots_and_target_slot() {
        let bad = QueryIntent::new(Target::Price)
            .with_multi(Slot::Title, Connective::And, &["a", "b"])
            .with_multi(Slot::Author, Connective::Or, &["c", "d"]);
        assert!(matches!(
            bad.validate(),
            Err(IntentError::MultipleMultiSlots(_))
        ));
        let clash = QueryIntent::new(Target::Author).with(Slot::Author, "x");
        assert!(matches!(
            clash.validate(),
            Err(IntentError::SlotConflict { .. })
        ));
    }
}
