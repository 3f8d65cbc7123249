//! Reproducible random corpora for property tests and the CLI's `gen`
//! subcommand. The generator is seeded splitmix64, chosen over an external
//! RNG so corpora are reproducible from the seed alone across platforms and
//! releases; the constants below are the published ones.

use std::collections::BTreeMap;

use crate::message::Message;
use crate::realize::{AttributeTemplate, Lexicon};
use crate::schema::{AttributeDecl, AttributeSchema, ValueType};
use crate::value::AtomicValue;

/// splitmix64: 64 bits of state, one addition and two xor-multiply mixes per
/// output.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `0..n` (0 when `n` is 0), via the multiply-shift
    /// reduction, which avoids modulo bias.
    pub fn below(&mut self, n: u64) -> u64 {
        if n == 0 {
            return 0;
        }
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// Uniform draw in `lo..=hi`.
    pub fn range_inclusive(&mut self, lo: u64, hi: u64) -> u64 {
        lo + self.below(hi - lo + 1)
    }
}

/// Shape of a random corpus: how many messages, how many actions they are
/// spread over, and for each generated attribute its type and the size of
/// the pool values are drawn from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusParams {
    pub message_count: usize,
    pub action_pool: usize,
    pub attributes: Vec<(ValueType, usize)>,
}

const TYPE_CYCLE: [ValueType; 3] = [ValueType::Symbol, ValueType::Integer, ValueType::QuarterDate];
const ACTIONS: [&str; 2] = ["activation", "extension"];
const PREPOSITIONS: [&str; 5] = ["for", "in", "at", "on", "with"];

impl CorpusParams {
    /// Draws a corpus shape: up to 12 messages, 1 to 5 attributes, value
    /// pools of at most 4.
    pub fn sample(rng: &mut SplitMix64) -> Self {
        let message_count = rng.range_inclusive(0, 12) as usize;
        let action_pool = rng.range_inclusive(1, 2) as usize;
        let attribute_count = rng.range_inclusive(1, 5) as usize;
        let attributes = (0..attribute_count)
            .map(|i| (TYPE_CYCLE[i % TYPE_CYCLE.len()], rng.range_inclusive(1, 4) as usize))
            .collect();
        CorpusParams { message_count, action_pool, attributes }
    }

    fn attribute_name(i: usize) -> String {
        format!("attr-{}", i)
    }

    /// The schema these corpora validate against: `class`/`action` group
    /// keys plus the generated attributes in declaration order.
    pub fn schema(&self) -> AttributeSchema {
        let mut decls = vec![
            AttributeDecl { name: "class".into(), value_type: ValueType::Symbol },
            AttributeDecl { name: "action".into(), value_type: ValueType::Symbol },
        ];
        let mut priority = Vec::new();
        for (i, (value_type, _)) in self.attributes.iter().enumerate() {
            let name = Self::attribute_name(i);
            decls.push(AttributeDecl { name: name.clone(), value_type: *value_type });
            priority.push(name);
        }
        AttributeSchema::new(decls, vec!["class".into(), "action".into()], priority)
            .expect("generated schema is well formed")
    }

    /// A lexicon covering every generated attribute, so realization of these
    /// corpora is total.
    pub fn lexicon(&self) -> Lexicon {
        let templates = self
            .attributes
            .iter()
            .enumerate()
            .map(|(i, (value_type, _))| {
                let mut tmpl = AttributeTemplate::bare(Self::attribute_name(i));
                if i > 0 {
                    tmpl.preposition = Some(PREPOSITIONS[i % PREPOSITIONS.len()].into());
                }
                if *value_type == ValueType::Symbol && i % 2 == 1 {
                    tmpl.classifier_singular = Some("unit".into());
                    tmpl.classifier_plural = Some("units".into());
                }
                tmpl
            })
            .collect();
        Lexicon {
            subject_first: "This plan".into(),
            attribute_templates: templates,
            ..Lexicon::default()
        }
    }

    fn value(&self, attribute: usize, pick: usize) -> AtomicValue {
        match self.attributes[attribute].0 {
            ValueType::Symbol => AtomicValue::symbol(format!("val-{}-{}", attribute, pick)),
            ValueType::Integer => AtomicValue::Integer((attribute as i64 + 1) * 100 + pick as i64),
            ValueType::QuarterDate => {
                AtomicValue::quarter(1990 + (pick / 4) as i64, (pick % 4) as u8 + 1)
            }
        }
    }
}

/// Generates the corpus for `seed` under the given shape: independent
/// uniform draws per attribute, ids in input order. Deterministic in
/// (seed, params).
pub fn gen_random_instance(seed: u64, params: &CorpusParams) -> Vec<Message> {
    let mut rng = SplitMix64::new(seed ^ 0xD6E8_FEB8_6659_FD93);
    (0..params.message_count)
        .map(|m| {
            let mut attrs = BTreeMap::from([
                ("class".to_owned(), AtomicValue::symbol("refinement")),
                (
                    "action".to_owned(),
                    AtomicValue::symbol(ACTIONS[rng.below(params.action_pool as u64) as usize]),
                ),
            ]);
            for (i, (_, pool)) in params.attributes.iter().enumerate() {
                let pick = rng.below(*pool as u64) as usize;
                attrs.insert(CorpusParams::attribute_name(i), params.value(i, pick));
            }
            Message::new(m, attrs)
        })
        .collect()
}

/// A random corpus over the built-in schema, suitable for piping straight
/// back into the pipeline with zero configuration.
pub fn gen_default_corpus(seed: u64) -> Vec<Message> {
    const EQUIPMENT: [&str; 3] = ["ALL-DLC", "DLC", "DSS-DLC"];
    const SITES: [&str; 4] = ["3122", "3130", "3134", "3208"];
    let mut rng = SplitMix64::new(seed);
    let n = rng.range_inclusive(0, 12) as usize;
    (0..n)
        .map(|m| {
            let attrs = BTreeMap::from([
                ("class".to_owned(), AtomicValue::symbol("refinement")),
                (
                    "action".to_owned(),
                    AtomicValue::symbol(ACTIONS[rng.below(2) as usize]),
                ),
                (
                    "equipment-type".to_owned(),
                    AtomicValue::symbol(EQUIPMENT[rng.below(3) as usize]),
                ),
                ("csa-site".to_owned(), AtomicValue::symbol(SITES[rng.below(4) as usize])),
                (
                    "date".to_owned(),
                    AtomicValue::quarter(1993 + rng.below(2) as i64, rng.below(4) as u8 + 1),
                ),
            ]);
            Message::new(m, attrs)
        })
        .collect()
}
