//! Seeded generators of small graphs and intents for differential testing.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::intent::{
    decompose, Connective, DecomposedIntent, QueryIntent, Slot, SlotValue, Target,
};
use crate::kb::{graph_from_records, CourseRecord, Graph};
use crate::query::{build_group, build_query, BuildOptions, Select};

/// Largest generated graph, in triples.
pub const MAX_FUZZ_TRIPLES: usize = 200;

const TITLES: &[&str] = &["Toan", "Van", "Ly", "Hóa", "Sinh", "Sử", "Địa", "Tin"];
const AUTHORS: &[&str] = &["Nguyễn", "Trần", "Lê", "Phạm", "Hoàng"];
const PUBLISHERS: &[&str] = &["Giáo Dục", "ĐHQG", "KHKT"];
const YEARS: &[&str] = &["2008", "2009", "2010"];
const SUBJECTS: &[&str] = &["Toán học", "Văn học", "Tin học"];
const PLACES: &[&str] = &["Hà Nội", "HCM"];
const PRICES: &[&str] = &["10000", "20000"];

fn pool(slot: Slot) -> &'static [&'static str] {
    match slot {
        Slot::Title => TITLES,
        Slot::Author => AUTHORS,
        Slot::Publisher => PUBLISHERS,
        Slot::Year => YEARS,
        Slot::Subject => SUBJECTS,
        Slot::Place => PLACES,
    }
}

fn maybe(rng: &mut ChaCha8Rng, p: f64, values: &[&str]) -> Option<String> {
    rng.random_bool(p)
        .then(|| (*values.choose(rng).expect("non-empty pool")).to_owned())
}

pub fn random_record(rng: &mut ChaCha8Rng, id: usize) -> CourseRecord {
    let n_authors = rng.random_range(1..=2);
    let authors = AUTHORS
        .choose_multiple(rng, n_authors)
        .map(|a| (*a).to_owned())
        .collect();
    CourseRecord {
        id: format!("r{id}"),
        name: (*TITLES.choose(rng).expect("titles")).to_owned(),
        authors,
        publisher: maybe(rng, 0.8, PUBLISHERS),
        year: maybe(rng, 0.8, YEARS),
        subject: maybe(rng, 0.7, SUBJECTS),
        place: maybe(rng, 0.6, PLACES),
        price: maybe(rng, 0.5, PRICES),
        ..Default::default()
    }
}

/// A graph of at most [`MAX_FUZZ_TRIPLES`] triples built from random records.
pub fn random_graph(rng: &mut ChaCha8Rng) -> Graph {
    let wanted = rng.random_range(1..=14);
    let mut records: Vec<CourseRecord> = Vec::new();
    let mut graph = Graph::new();
    for id in 0..wanted {
        records.push(random_record(rng, id));
        let g = graph_from_records(&records);
        if g.len() > MAX_FUZZ_TRIPLES {
            records.pop();
            break;
        }
        graph = g;
    }
    graph
}

/// A value from the slot's pool, sometimes recased or absent from any graph.
fn value(rng: &mut ChaCha8Rng, slot: Slot) -> String {
    if rng.random_bool(0.1) {
        return "Không có".to_owned();
    }
    let v = *pool(slot).choose(rng).expect("pool");
    if rng.random_bool(0.2) {
        v.to_uppercase()
    } else {
        v.to_owned()
    }
}

fn group_vars(intent: &QueryIntent) -> usize {
    let single = match decompose(intent) {
        DecomposedIntent::Chain(v) | DecomposedIntent::Union(v) => {
            v.into_iter().next().expect("one intent")
        }
    };
    build_group(&single, &BuildOptions::default())
        .map(|g| g.triple_vars().len())
        .unwrap_or(usize::MAX)
}

/// A valid intent with at most two constraint slots.
pub fn random_intent(rng: &mut ChaCha8Rng) -> QueryIntent {
    loop {
        let target = *Target::ALL.choose(rng).expect("targets");
        let mut intent = QueryIntent::new(target);
        let mut free: Vec<Slot> = Slot::ALL
            .into_iter()
            .filter(|s| Some(*s) != target.own_slot())
            .collect();
        free.shuffle(rng);
        for slot in free.into_iter().take(rng.random_range(0..=2)) {
            intent
                .slots
                .insert(slot, SlotValue::Single(value(rng, slot)));
        }
        if let Some(own) = target.own_slot() {
            if rng.random_bool(0.2) {
                intent.verify = Some(value(rng, own));
            }
        }
        if target != Target::BookList && rng.random_bool(0.4) {
            make_multi(rng, &mut intent, None);
        }
        if intent.validate().is_ok() && group_vars(&intent) <= crate::engine::MAX_ORACLE_VARS {
            return intent;
        }
    }
}

/// Replaces the title slot with 2–3 distinct titles.
fn make_multi(rng: &mut ChaCha8Rng, intent: &mut QueryIntent, connective: Option<Connective>) {
    let n = rng.random_range(2..=3);
    let values: Vec<String> = TITLES
        .choose_multiple(rng, n)
        .map(|t| (*t).to_owned())
        .collect();
    let connective = connective.unwrap_or(if rng.random_bool(0.5) {
        Connective::And
    } else {
        Connective::Or
    });
    intent
        .slots
        .insert(Slot::Title, SlotValue::Multi { connective, values });
}

/// An intent whose title slot is multi-valued with `connective`, projecting rows.
pub fn random_multi_intent(rng: &mut ChaCha8Rng, connective: Connective) -> QueryIntent {
    loop {
        let mut intent = random_intent(rng);
        if matches!(intent.target, Target::BookList | Target::CountBooks) {
            continue;
        }
        make_multi(rng, &mut intent, Some(connective));
        if intent.validate().is_ok() && group_vars(&intent) <= crate::engine::MAX_ORACLE_VARS {
            return intent;
        }
    }
}

/// One differential-testing case.
#[derive(Debug, Clone)]
pub struct FuzzCase {
    pub seed: u64,
    pub graph: Graph,
    pub intent: QueryIntent,
    pub query: Select,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn case(seed: u64) -> FuzzCase {
    let mut r = rng(seed);
    let graph = random_graph(&mut r);
    let intent = random_intent(&mut r);
    let query = build_query(&decompose(&intent), &BuildOptions::default())
        .expect("generated intents compile");
    FuzzCase {
        seed,
        graph,
        intent,
        query,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cases_are_reproducible_and_bounded() {
        for seed in 0..20 {
            let a = case(seed);
            let b = case(seed);
            assert_eq!(a.intent, b.intent);
            assert_eq!(a.graph.canonical(), b.graph.canonical());
            assert!(a.graph.len() <= MAX_FUZZ_TRIPLES);
            a.query.check().unwrap();
        }
    }
}
