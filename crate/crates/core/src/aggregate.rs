//! The combining algorithm: group by action, rank attributes by similarity,
//! multi-key stable sort, merge runs that differ in a single attribute
//! (recursively, to a fixpoint), break the result into sentences, and mark
//! identity deletions.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::message::Message;
use crate::plan::{ActionGroup, AggregateMessage, Clause, DocumentPlan, Sentence, Slot};
use crate::schema::AttributeSchema;
use crate::value::{AtomicValue, Value};

/// Similarity score of one attribute within a group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttributeRank {
    pub attribute: String,
    pub distinct_count: usize,
    pub rank: usize,
}

/// Ranks for every non-group-key attribute of one group, in schema
/// declaration order. `rank = message_count - distinct_count`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ranking {
    pub message_count: usize,
    pub ranks: Vec<AttributeRank>,
}

impl Ranking {
    pub fn rank(&self, attribute: &str) -> Option<usize> {
        self.ranks.iter().find(|r| r.attribute == attribute).map(|r| r.rank)
    }

    pub fn distinct_count(&self, attribute: &str) -> Option<usize> {
        self.ranks
            .iter()
            .find(|r| r.attribute == attribute)
            .map(|r| r.distinct_count)
    }
}

/// One pipeline stage that can be disabled for ablation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Sort,
    Merge,
    Delete,
    Break,
}

/// Knobs for [`aggregate`]. Disabling `sort` implies disabling `merge`
/// (merging requires the adjacency that sorting creates).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregateOptions {
    pub disabled_steps: BTreeSet<Step>,
    pub max_clauses: usize,
}

impl Default for AggregateOptions {
    fn default() -> Self {
        AggregateOptions { disabled_steps: BTreeSet::new(), max_clauses: usize::MAX }
    }
}

impl AggregateOptions {
    fn enabled(&self, step: Step) -> bool {
        match step {
            Step::Merge => {
                !self.disabled_steps.contains(&Step::Merge)
                    && !self.disabled_steps.contains(&Step::Sort)
            }
            _ => !self.disabled_steps.contains(&step),
        }
    }
}

/// Splits messages into groups sharing the same group-key tuple, ordered by
/// first occurrence; input order is preserved within each group.
pub fn group_by_action(msgs: &[Message], schema: &AttributeSchema) -> Vec<Vec<Message>> {
    let mut order: Vec<Vec<AtomicValue>> = Vec::new();
    let mut groups: Vec<Vec<Message>> = Vec::new();
    for msg in msgs {
        let key: Vec<AtomicValue> = schema
            .group_keys()
            .iter()
            .filter_map(|k| msg.value(k).cloned())
            .collect();
        match order.iter().position(|k| *k == key) {
            Some(i) => groups[i].push(msg.clone()),
            None => {
                order.push(key);
                groups.push(vec![msg.clone()]);
            }
        }
    }
    groups
}

/// Scores every non-group-key attribute of a non-empty group.
pub fn rank_attributes(group: &[Message], schema: &AttributeSchema) -> Ranking {
    assert!(!group.is_empty(), "rank_attributes requires a non-empty group");
    let m = group.len();
    let ranks = schema
        .non_group_attributes()
        .map(|decl| {
            let distinct: BTreeSet<&AtomicValue> =
                group.iter().filter_map(|msg| msg.value(&decl.name)).collect();
            let d = distinct.len();
            AttributeRank { attribute: decl.name.clone(), distinct_count: d, rank: m - d }
        })
        .collect();
    Ranking { message_count: m, ranks }
}

/// Orders attributes for the sorting step: ascending rank, so the
/// highest-rank attribute is sorted last and dominates the final order. Ties
/// break by the schema's priority list, the higher-priority attribute
/// sorting later.
pub fn sort_order(ranking: &Ranking, schema: &AttributeSchema) -> Vec<String> {
    let mut entries: Vec<&AttributeRank> = ranking.ranks.iter().collect();
    entries.sort_by_key(|r| {
        (r.rank, Reverse(schema.priority_index(&r.attribute).unwrap_or(usize::MAX)))
    });
    entries.into_iter().map(|r| r.attribute.clone()).collect()
}

fn compare_on(attribute: &str, a: &Message, b: &Message) -> std::cmp::Ordering {
    match (a.value(attribute), b.value(attribute)) {
        (Some(x), Some(y)) => x.domain_cmp(y),
        _ => std::cmp::Ordering::Equal,
    }
}

/// Applies one stable sorting pass per attribute, in the given order; the
/// last pass dominates. Returns the intermediate order after every pass.
pub fn sort_stages(group: &[Message], order: &[String]) -> Vec<Vec<Message>> {
    let mut current = group.to_vec();
    let mut stages = Vec::with_capacity(order.len());
    for attribute in order {
        current.sort_by(|a, b| compare_on(attribute, a, b));
        stages.push(current.clone());
    }
    stages
}

/// The final order after all sorting passes.
pub fn sort_messages(group: &[Message], order: &[String]) -> Vec<Message> {
    sort_stages(group, order).pop().unwrap_or_else(|| group.to_vec())
}

/// The set of non-group-key attributes on which `a` and `b` differ. A
/// conjoined value equals another value only if both are conjoined with
/// identical lists.
pub fn distinct_attrs(
    a: &AggregateMessage,
    b: &AggregateMessage,
    schema: &AttributeSchema,
) -> BTreeSet<String> {
    schema
        .non_group_attributes()
        .filter(|decl| a.value(&decl.name) != b.value(&decl.name))
        .map(|decl| decl.name.clone())
        .collect()
}

/// Cartesian expansion of one aggregate message's attribute maps, used by
/// the merge-safety check below. The verification oracle keeps its own,
/// fuller implementation on purpose.
fn expansion(msg: &AggregateMessage) -> BTreeSet<BTreeMap<String, AtomicValue>> {
    let mut maps: Vec<BTreeMap<String, AtomicValue>> = vec![BTreeMap::new()];
    for (name, value) in &msg.attrs {
        let items = value.items();
        let mut next = Vec::with_capacity(maps.len() * items.len());
        for map in &maps {
            for item in items {
                let mut extended = map.clone();
                extended.insert(name.clone(), item.clone());
                next.push(extended);
            }
        }
        maps = next;
    }
    maps.into_iter().collect()
}

fn merge_safe(merged: &AggregateMessage, left: &AggregateMessage, right: &AggregateMessage) -> bool {
    let mut union = expansion(left);
    union.extend(expansion(right));
    expansion(merged) == union
}

fn conjoin(acc: &Value, next: &Value) -> Value {
    let mut items: Vec<AtomicValue> = acc.items().to_vec();
    for item in next.items() {
        if !items.contains(item) {
            items.push(item.clone());
        }
    }
    Value::Conjoined(items)
}

/// One left-to-right merging pass. The accumulated message absorbs exact
/// duplicates and merges with a neighbor differing in exactly one attribute,
/// provided the conjunction stays well formed: either the accumulator's only
/// compound attribute is the differing one (a growing run), or both sides
/// carry identical conjunctions and differ in a fresh attribute (a crossing
/// conjunction).
pub fn merge_pass(
    msgs: Vec<AggregateMessage>,
    schema: &AttributeSchema,
) -> Vec<AggregateMessage> {
    let mut out = Vec::with_capacity(msgs.len());
    let mut iter = msgs.into_iter();
    let Some(mut acc) = iter.next() else { return out };
    for next in iter {
        let distinct = distinct_attrs(&acc, &next, schema);
        if distinct.is_empty() {
            debug_assert!(expansion(&acc) == expansion(&next));
            acc.provenance.extend(next.provenance);
            continue;
        }
        if distinct.len() == 1 {
            let attribute = distinct.into_iter().next().expect("len checked");
            let extends_run =
                acc.compound.is_empty() || (acc.compound.len() == 1 && acc.compound.contains(&attribute));
            let crosses =
                !acc.compound.contains(&attribute) && acc.compound == next.compound;
            if extends_run || crosses {
                let merged_value = conjoin(
                    acc.value(&attribute).expect("distinct attribute present"),
                    next.value(&attribute).expect("distinct attribute present"),
                );
                let mut merged = acc.clone();
                merged.attrs.insert(attribute.clone(), merged_value);
                merged.compound.insert(attribute);
                merged.provenance.extend(next.provenance.iter().cloned());
                debug_assert!(merge_safe(&merged, &acc, &next), "unsafe merge attempted");
                acc = merged;
                continue;
            }
        }
        out.push(acc);
        acc = next;
    }
    out.push(acc);
    out
}

/// Repeats [`merge_pass`] until it stops changing the list; repeated passes
/// let identical conjunctions on one attribute cross-merge over another.
pub fn merge_fixpoint(
    msgs: Vec<AggregateMessage>,
    schema: &AttributeSchema,
) -> Vec<AggregateMessage> {
    let mut current = msgs;
    loop {
        let merged = merge_pass(current.clone(), schema);
        if merged == current {
            return merged;
        }
        current = merged;
    }
}

/// Greedy sentence breaking: the first two messages always share a sentence,
/// fixing the distinct-attribute set that later clauses must repeat; a
/// mismatch (or the clause cap) breaks the sentence and the rule restarts.
pub fn break_sentences(
    msgs: Vec<AggregateMessage>,
    schema: &AttributeSchema,
    max_clauses: usize,
) -> Vec<Sentence> {
    let max_clauses = max_clauses.max(1);
    let mut sentences = Vec::new();
    let mut rest = msgs.into_iter().peekable();
    while let Some(first) = rest.next() {
        if max_clauses < 2 || rest.peek().is_none() {
            sentences.push(Sentence {
                clauses: vec![Clause::new(first)],
                established_distinct: BTreeSet::new(),
            });
            continue;
        }
        let second = rest.next().expect("peeked");
        let established = distinct_attrs(&first, &second, schema);
        let mut clauses = vec![Clause::new(first), Clause::new(second)];
        while clauses.len() < max_clauses {
            let Some(candidate) = rest.peek() else { break };
            if distinct_attrs(&clauses.last().expect("non-empty").body, candidate, schema)
                != established
            {
                break;
            }
            clauses.push(Clause::new(rest.next().expect("peeked")));
        }
        sentences.push(Sentence { clauses, established_distinct: established });
    }
    sentences
}

/// Marks identity deletions: non-initial clauses lose subject and verb, and
/// an attribute identical across all clauses of a multi-clause sentence is
/// suppressed everywhere except the last clause.
pub fn mark_deletions(sentence: Sentence, schema: &AttributeSchema) -> Sentence {
    if sentence.clauses.len() < 2 {
        return sentence;
    }
    let mut sentence = sentence;
    let last = sentence.clauses.len() - 1;
    for clause in &mut sentence.clauses[1..] {
        clause.deleted.insert(Slot::Subject);
        clause.deleted.insert(Slot::Verb);
    }
    for decl in schema.non_group_attributes() {
        let mut values = sentence.clauses.iter().map(|c| c.body.value(&decl.name));
        let Some(first) = values.next() else { continue };
        if first.is_some() && values.all(|v| v == first) {
            for clause in &mut sentence.clauses[..last] {
                clause.deleted.insert(Slot::attr(&decl.name));
            }
        }
    }
    sentence
}

/// Runs the whole pipeline and assembles the document plan.
pub fn aggregate(
    msgs: &[Message],
    schema: &AttributeSchema,
    options: &AggregateOptions,
) -> DocumentPlan {
    let mut groups = Vec::new();
    for group in group_by_action(msgs, schema) {
        let first = group.first().expect("groups are non-empty");
        let key: Vec<(String, AtomicValue)> = schema
            .group_keys()
            .iter()
            .filter_map(|k| first.value(k).map(|v| (k.clone(), v.clone())))
            .collect();

        let sorted = if options.enabled(Step::Sort) {
            let ranking = rank_attributes(&group, schema);
            let order = sort_order(&ranking, schema);
            sort_messages(&group, &order)
        } else {
            group
        };

        let aggregates: Vec<AggregateMessage> =
            sorted.iter().map(AggregateMessage::from_message).collect();
        let merged = if options.enabled(Step::Merge) {
            merge_fixpoint(aggregates, schema)
        } else {
            aggregates
        };

        let sentences = if options.enabled(Step::Break) {
            break_sentences(merged, schema, options.max_clauses)
        } else {
            merged
                .into_iter()
                .map(|m| Sentence {
                    clauses: vec![Clause::new(m)],
                    established_distinct: BTreeSet::new(),
                })
                .collect()
        };

        let sentences = if options.enabled(Step::Delete) {
            sentences.into_iter().map(|s| mark_deletions(s, schema)).collect()
        } else {
            sentences
        };

        groups.push(ActionGroup { key, sentences });
    }
    DocumentPlan { groups }
}
