//! Independent verification: expand a document plan back into the atomic
//! messages it claims to convey, and measure conciseness against the
//! unaggregated baseline. Expansion reads only the plan, never realized
//! text, so realizer bugs cannot mask aggregation bugs.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{OracleError, RealizeError};
use crate::message::{Message, MessageId};
use crate::plan::{Clause, DocumentPlan, Sentence, Slot};
use crate::realize::{realize_baseline, realize_document, Lexicon, RenderOptions};
use crate::value::{AtomicValue, Value};

/// Expands one clause to the atomic messages it conveys: the cartesian
/// product over its conjoined attributes. Group-key attributes come from the
/// group; a deleted attribute's value is read from the clause in the same
/// sentence that still carries it (as a reader of the text would).
pub fn expand_clause(
    clause: &Clause,
    sentence: &Sentence,
    group_key: &[(String, AtomicValue)],
) -> Result<Vec<Message>, OracleError> {
    let mut attrs: BTreeMap<String, Value> = clause.body.attrs.clone();
    for (name, value) in group_key {
        attrs.insert(name.clone(), Value::Atomic(value.clone()));
    }
    for slot in &clause.deleted {
        let Slot::Attr(name) = slot else { continue };
        let retained = sentence
            .clauses
            .iter()
            .rev()
            .find(|c| !c.is_deleted(slot))
            .and_then(|c| c.body.value(name))
            .ok_or_else(|| OracleError::UnrecoverableDeletion { attribute: name.clone() })?;
        attrs.insert(name.clone(), retained.clone());
    }

    let mut tuples: Vec<BTreeMap<String, AtomicValue>> = vec![BTreeMap::new()];
    for (name, value) in &attrs {
        let items = value.items();
        let mut next = Vec::with_capacity(tuples.len() * items.len());
        for tuple in &tuples {
            for item in items {
                let mut extended = tuple.clone();
                extended.insert(name.clone(), item.clone());
                next.push(extended);
            }
        }
        tuples = next;
    }

    let ids: Vec<MessageId> = if tuples.len() == clause.body.provenance.len() {
        clause.body.provenance.clone()
    } else {
        let base = clause
            .body
            .provenance
            .first()
            .map(|id| id.0.clone())
            .unwrap_or_default();
        (0..tuples.len()).map(|i| MessageId(format!("{}#{}", base, i))).collect()
    };

    Ok(tuples
        .into_iter()
        .zip(ids)
        .map(|(attrs, id)| Message::new(id, attrs))
        .collect())
}

/// Expands a whole plan: the union of every clause's expansion, in plan
/// order.
pub fn expand_plan(plan: &DocumentPlan) -> Result<Vec<Message>, OracleError> {
    let mut out = Vec::new();
    for group in &plan.groups {
        for sentence in &group.sentences {
            for clause in &sentence.clauses {
                out.extend(expand_clause(clause, sentence, &group.key)?);
            }
        }
    }
    Ok(out)
}

/// The multiset of attribute tuples, ignoring id and admin metadata:
/// aggregation may absorb duplicates, so semantic identity is the tuple.
pub fn attr_multiset(msgs: &[Message]) -> BTreeMap<BTreeMap<String, AtomicValue>, usize> {
    let mut counts = BTreeMap::new();
    for msg in msgs {
        *counts.entry(msg.attrs.clone()).or_insert(0) += 1;
    }
    counts
}

/// Drops attribute-level duplicates, keeping first occurrences in order.
pub fn dedup_messages(msgs: &[Message]) -> Vec<Message> {
    let mut seen = Vec::new();
    let mut out = Vec::new();
    for msg in msgs {
        if !seen.contains(&msg.attrs) {
            seen.push(msg.attrs.clone());
            out.push(msg.clone());
        }
    }
    out
}

/// Size comparison between the aggregated text and the unaggregated
/// baseline for the same messages.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcisenessReport {
    pub baseline_chars: usize,
    pub baseline_words: usize,
    pub aggregated_chars: usize,
    pub aggregated_words: usize,
    pub reduction_ratio: f64,
    pub messages_in: usize,
    pub clauses_out: usize,
    pub sentences_out: usize,
}

/// Realizes both texts and counts. `plan` must be the aggregation of `msgs`
/// for the numbers to mean anything.
pub fn conciseness_stats(
    msgs: &[Message],
    plan: &DocumentPlan,
    lex: &Lexicon,
    opts: &RenderOptions,
) -> Result<ConcisenessReport, RealizeError> {
    let baseline = realize_baseline(msgs, lex, opts)?;
    let aggregated = realize_document(plan, lex, opts)?;
    let baseline_chars = baseline.chars().count();
    let aggregated_chars = aggregated.chars().count();
    let reduction_ratio = if baseline_chars == 0 {
        0.0
    } else {
        1.0 - aggregated_chars as f64 / baseline_chars as f64
    };
    Ok(ConcisenessReport {
        baseline_chars,
        baseline_words: baseline.split_whitespace().count(),
        aggregated_chars,
        aggregated_words: aggregated.split_whitespace().count(),
        reduction_ratio,
        messages_in: msgs.len(),
        clauses_out: plan.clause_count(),
        sentences_out: plan.sentence_count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::{aggregate, AggregateOptions};
    use crate::config::default_schema;
    use crate::plan::AggregateMessage;
    use crate::realize::DateStyle;
    use std::collections::BTreeSet;

    fn msg(id: usize, equipment: &str, site: &str, year: i64, quarter: u8) -> Message {
        Message::new(
            id,
            BTreeMap::from([
                ("class".into(), AtomicValue::symbol("refinement")),
                ("action".into(), AtomicValue::symbol("activation")),
                ("equipment-type".into(), AtomicValue::symbol(equipment)),
                ("csa-site".into(), AtomicValue::symbol(site)),
                ("date".into(), AtomicValue::quarter(year, quarter)),
            ]),
        )
    }

    fn corpus() -> Vec<Message> {
        vec![
            msg(0, "ALL-DLC", "3134", 1994, 3),
            msg(1, "DLC", "3130", 1994, 1),
            msg(2, "DSS-DLC", "3208", 1994, 3),
            msg(3, "DLC", "3122", 1994, 1),
        ]
    }

    fn group_key() -> Vec<(String, AtomicValue)> {
        vec![
            ("class".into(), AtomicValue::symbol("refinement")),
            ("action".into(), AtomicValue::symbol("activation")),
        ]
    }

    fn lone(clause: Clause) -> Sentence {
        Sentence { clauses: vec![clause], established_distinct: BTreeSet::new() }
    }

    #[test]
    fn conjoined_clause_expands_to_each_value() {
        let mut body = AggregateMessage::from_message(&msg(0, "DLC", "3122", 1994, 1));
        body.attrs.insert(
            "csa-site".into(),
            Value::Conjoined(vec![AtomicValue::symbol("3122"), AtomicValue::symbol("3130")]),
        );
        body.compound.insert("csa-site".into());
        body.provenance.push(MessageId::from(1));
        let sentence = lone(Clause::new(body));
        let expanded = expand_clause(&sentence.clauses[0], &sentence, &group_key()).unwrap();
        assert_eq!(
            attr_multiset(&expanded),
            attr_multiset(&[msg(0, "DLC", "3122", 1994, 1), msg(1, "DLC", "3130", 1994, 1)])
        );
        assert_eq!(expanded[0].id, MessageId::from(0));
        assert_eq!(expanded[1].id, MessageId::from(1));
    }

    #[test]
    fn atomic_clause_expands_to_itself() {
        let source = msg(7, "ALL-DLC", "3134", 1994, 3);
        let sentence = lone(Clause::new(AggregateMessage::from_message(&source)));
        let expanded = expand_clause(&sentence.clauses[0], &sentence, &group_key()).unwrap();
        assert_eq!(expanded, vec![source]);
    }

    #[test]
    fn crossing_clause_expands_to_the_cartesian_product() {
        let mut body = AggregateMessage::from_message(&msg(0, "ALL-DLC", "3122", 1993, 3));
        body.attrs.insert(
            "equipment-type".into(),
            Value::Conjoined(vec![AtomicValue::symbol("ALL-DLC"), AtomicValue::symbol("DSS-DLC")]),
        );
        body.attrs.insert(
            "csa-site".into(),
            Value::Conjoined(vec![AtomicValue::symbol("3122"), AtomicValue::symbol("3130")]),
        );
        body.compound = BTreeSet::from(["equipment-type".into(), "csa-site".into()]);
        body.provenance = (0..4).map(MessageId::from).collect();
        let sentence = lone(Clause::new(body));
        let expanded = expand_clause(&sentence.clauses[0], &sentence, &group_key()).unwrap();
        let expected = [
            msg(0, "ALL-DLC", "3122", 1993, 3),
            msg(1, "ALL-DLC", "3130", 1993, 3),
            msg(2, "DSS-DLC", "3122", 1993, 3),
            msg(3, "DSS-DLC", "3130", 1993, 3),
        ];
        assert_eq!(attr_multiset(&expanded), attr_multiset(&expected));
    }

    #[test]
    fn deleted_attribute_is_read_from_the_retaining_clause() {
        let mut first = Clause::new(AggregateMessage::from_message(&msg(0, "DLC", "3122", 1994, 1)));
        first.body.attrs.remove("date");
        first.deleted.insert(Slot::attr("date"));
        let second = Clause::new(AggregateMessage::from_message(&msg(1, "ALL-DLC", "3130", 1994, 1)));
        let sentence = Sentence {
            clauses: vec![first, second],
            established_distinct: BTreeSet::from(["equipment-type".into(), "csa-site".into()]),
        };
        let expanded = expand_clause(&sentence.clauses[0], &sentence, &group_key()).unwrap();
        assert_eq!(
            expanded[0].value("date"),
            Some(&AtomicValue::quarter(1994, 1))
        );
    }

    #[test]
    fn deletion_without_a_retaining_clause_is_an_error() {
        let mut first = Clause::new(AggregateMessage::from_message(&msg(0, "DLC", "3122", 1994, 1)));
        first.deleted.insert(Slot::attr("date"));
        let mut second = Clause::new(AggregateMessage::from_message(&msg(1, "ALL-DLC", "3130", 1994, 1)));
        second.deleted.insert(Slot::attr("date"));
        let sentence = Sentence {
            clauses: vec![first, second],
            established_distinct: BTreeSet::new(),
        };
        let err = expand_clause(&sentence.clauses[0], &sentence, &group_key()).unwrap_err();
        assert_eq!(err, OracleError::UnrecoverableDeletion { attribute: "date".into() });
    }

    #[test]
    fn plan_expansion_recovers_the_input() {
        let schema = default_schema();
        let plan = aggregate(&corpus(), &schema, &AggregateOptions::default());
        let expanded = expand_plan(&plan).unwrap();
        assert_eq!(attr_multiset(&expanded), attr_multiset(&corpus()));
    }

    #[test]
    fn empty_plan_expands_to_nothing() {
        assert_eq!(expand_plan(&DocumentPlan::default()).unwrap(), Vec::<Message>::new());
    }

    #[test]
    fn dedup_keeps_first_occurrences() {
        let msgs = vec![
            msg(0, "DLC", "3122", 1994, 1),
            msg(1, "DLC", "3122", 1994, 1),
            msg(2, "ALL-DLC", "3134", 1994, 3),
        ];
        let deduped = dedup_messages(&msgs);
        assert_eq!(deduped.len(), 2);
        assert_eq!(deduped[0].id, MessageId::from(0));
    }

    #[test]
    fn stats_count_both_renderings() {
        let schema = default_schema();
        let lex = Lexicon::default();
        let opts = RenderOptions::default();
        let plan = aggregate(&corpus(), &schema, &AggregateOptions::default());
        let report = conciseness_stats(&corpus(), &plan, &lex, &opts).unwrap();
        assert_eq!(report.messages_in, 4);
        assert_eq!(report.sentences_out, 2);
        assert_eq!(report.clauses_out, 3);
        assert!(report.aggregated_chars < report.baseline_chars);
        assert!(report.reduction_ratio > 0.0 && report.reduction_ratio < 1.0);
    }

    #[test]
    fn single_message_with_short_dates_reduces_nothing() {
        let schema = default_schema();
        let lex = Lexicon::default();
        let opts = RenderOptions { date_style: DateStyle::AllShort, ..RenderOptions::default() };
        let msgs = corpus()[..1].to_vec();
        let plan = aggregate(&msgs, &schema, &AggregateOptions::default());
        let report = conciseness_stats(&msgs, &plan, &lex, &opts).unwrap();
        assert_eq!(report.reduction_ratio, 0.0);
        assert_eq!(report.aggregated_chars, report.baseline_chars);
    }

    #[test]
    fn crossing_corpus_halves_the_text() {
        let schema = default_schema();
        let lex = Lexicon::default();
        let opts = RenderOptions { date_style: DateStyle::AllShort, ..RenderOptions::default() };
        let msgs = vec![
            msg(0, "ALL-DLC", "3122", 1993, 3),
            msg(1, "ALL-DLC", "3130", 1993, 3),
            msg(2, "DSS-DLC", "3122", 1993, 3),
            msg(3, "DSS-DLC", "3130", 1993, 3),
        ];
        let plan = aggregate(&msgs, &schema, &AggregateOptions::default());
        assert_eq!(plan.sentence_count(), 1);
        let report = conciseness_stats(&msgs, &plan, &lex, &opts).unwrap();
        assert!(report.reduction_ratio > 0.5, "ratio was {}", report.reduction_ratio);
    }
}
