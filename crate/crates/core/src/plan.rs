//! The document plan: what aggregation produces and what realization and
//! expansion consume. Serializes to canonical JSON with stable key order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::message::{Message, MessageId};
use crate::value::{AtomicValue, Value};

/// A realization slot that identity deletion can suppress: the clause
/// subject, its verb, or one attribute's phrase.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Slot {
    Subject,
    Verb,
    Attr(String),
}

impl Slot {
    pub fn attr(name: impl Into<String>) -> Self {
        Slot::Attr(name.into())
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Subject => f.write_str("subject"),
            Slot::Verb => f.write_str("verb"),
            Slot::Attr(name) => f.write_str(name),
        }
    }
}

impl Serialize for Slot {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Slot {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(match s.as_str() {
            "subject" => Slot::Subject,
            "verb" => Slot::Verb,
            _ => Slot::Attr(s),
        })
    }
}

/// A message whose attributes may hold conjoined value lists. `compound`
/// names exactly the attributes holding conjoined values; `provenance` lists
/// the source message ids folded into this aggregate, in merge order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AggregateMessage {
    pub attrs: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "BTreeSet::is_empty")]
    pub compound: BTreeSet<String>,
    pub provenance: Vec<MessageId>,
}

impl AggregateMessage {
    /// Lifts an atomic message: no conjunctions, provenance of one.
    pub fn from_message(msg: &Message) -> Self {
        AggregateMessage {
            attrs: msg
                .attrs
                .iter()
                .map(|(k, v)| (k.clone(), Value::Atomic(v.clone())))
                .collect(),
            compound: BTreeSet::new(),
            provenance: vec![msg.id.clone()],
        }
    }

    pub fn value(&self, attribute: &str) -> Option<&Value> {
        self.attrs.get(attribute)
    }
}

impl<'de> Deserialize<'de> for AggregateMessage {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            attrs: BTreeMap<String, Value>,
            #[serde(default)]
            compound: BTreeSet<String>,
            provenance: Vec<MessageId>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let derived: BTreeSet<String> = raw
            .attrs
            .iter()
            .filter(|(_, v)| v.is_conjoined())
            .map(|(k, _)| k.clone())
            .collect();
        if !raw.compound.is_empty() && raw.compound != derived {
            return Err(serde::de::Error::custom(
                "compound set does not match the conjoined attributes",
            ));
        }
        Ok(AggregateMessage { attrs: raw.attrs, compound: derived, provenance: raw.provenance })
    }
}

/// One clause of a sentence: an aggregate message plus the slots that
/// identity deletion suppressed for this clause.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub body: AggregateMessage,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub deleted: BTreeSet<Slot>,
}

impl Clause {
    pub fn new(body: AggregateMessage) -> Self {
        Clause { body, deleted: BTreeSet::new() }
    }

    pub fn is_deleted(&self, slot: &Slot) -> bool {
        self.deleted.contains(slot)
    }
}

/// An ordered run of clauses realized as one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub clauses: Vec<Clause>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub established_distinct: BTreeSet<String>,
}

/// All sentences produced from the messages sharing one group-key tuple.
/// `key` keeps the group-key attributes in schema order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionGroup {
    pub key: Vec<(String, AtomicValue)>,
    pub sentences: Vec<Sentence>,
}

impl ActionGroup {
    pub fn key_value(&self, attribute: &str) -> Option<&AtomicValue> {
        self.key.iter().find(|(k, _)| k == attribute).map(|(_, v)| v)
    }

    pub fn clause_count(&self) -> usize {
        self.sentences.iter().map(|s| s.clauses.len()).sum()
    }
}

impl Serialize for ActionGroup {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        struct Key<'a>(&'a [(String, AtomicValue)]);
        impl Serialize for Key<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                let mut map = serializer.serialize_map(Some(self.0.len()))?;
                for (k, v) in self.0 {
                    map.serialize_entry(k, v)?;
                }
                map.end()
            }
        }
        let mut map = serializer.serialize_map(Some(2))?;
        map.serialize_entry("key", &Key(&self.key))?;
        map.serialize_entry("sentences", &self.sentences)?;
        map.end()
    }
}

impl<'de> Deserialize<'de> for ActionGroup {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct GroupVisitor;
        impl<'de> Visitor<'de> for GroupVisitor {
            type Value = ActionGroup;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object with `key` and `sentences` fields")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut key: Option<Vec<(String, AtomicValue)>> = None;
                let mut sentences: Option<Vec<Sentence>> = None;
                while let Some(field) = access.next_key::<String>()? {
                    match field.as_str() {
                        "key" => {
                            key = Some(access.next_value::<OrderedKey>()?.0);
                        }
                        "sentences" => {
                            sentences = Some(access.next_value()?);
                        }
                        other => {
                            return Err(serde::de::Error::unknown_field(
                                other,
                                &["key", "sentences"],
                            ))
                        }
                    }
                }
                Ok(ActionGroup {
                    key: key.ok_or_else(|| serde::de::Error::missing_field("key"))?,
                    sentences: sentences
                        .ok_or_else(|| serde::de::Error::missing_field("sentences"))?,
                })
            }
        }

        struct OrderedKey(Vec<(String, AtomicValue)>);
        impl<'de> Deserialize<'de> for OrderedKey {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                struct KeyVisitor;
                impl<'de> Visitor<'de> for KeyVisitor {
                    type Value = OrderedKey;

                    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                        f.write_str("an object of group-key attributes")
                    }

                    fn visit_map<A: MapAccess<'de>>(
                        self,
                        mut access: A,
                    ) -> Result<Self::Value, A::Error> {
                        let mut pairs = Vec::new();
                        while let Some((k, v)) = access.next_entry::<String, AtomicValue>()? {
                            pairs.push((k, v));
                        }
                        Ok(OrderedKey(pairs))
                    }
                }
                deserializer.deserialize_map(KeyVisitor)
            }
        }

        deserializer.deserialize_map(GroupVisitor)
    }
}

/// The full plan: ordered action groups, each holding its sentences.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DocumentPlan {
    pub groups: Vec<ActionGroup>,
}

impl DocumentPlan {
    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn sentence_count(&self) -> usize {
        self.groups.iter().map(|g| g.sentences.len()).sum()
    }

    pub fn clause_count(&self) -> usize {
        self.groups.iter().map(ActionGroup::clause_count).sum()
    }

    /// Canonical JSON: pretty-printed, keys in a fixed order, byte-stable
    /// across runs for identical plans.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_aggregate() -> AggregateMessage {
        AggregateMessage {
            attrs: BTreeMap::from([
                ("equipment-type".into(), Value::Atomic(AtomicValue::symbol("DLC"))),
                (
                    "csa-site".into(),
                    Value::Conjoined(vec![AtomicValue::symbol("3122"), AtomicValue::symbol("3130")]),
                ),
                ("date".into(), Value::Atomic(AtomicValue::quarter(1994, 1))),
            ]),
            compound: BTreeSet::from(["csa-site".into()]),
            provenance: vec![MessageId::from(0), MessageId::from(1)],
        }
    }

    #[test]
    fn slot_serializes_to_plain_strings() {
        let slots = BTreeSet::from([Slot::Subject, Slot::Verb, Slot::attr("date")]);
        let json = serde_json::to_string(&slots).unwrap();
        assert_eq!(json, r#"["subject","verb","date"]"#);
        let back: BTreeSet<Slot> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, slots);
    }

    #[test]
    fn aggregate_message_roundtrips() {
        let msg = sample_aggregate();
        let json = serde_json::to_string(&msg).unwrap();
        let back: AggregateMessage = serde_json::from_str(&json).unwrap();
        assert_eq!(back, msg);
    }

    #[test]
    fn compound_is_recomputed_when_omitted() {
        let json = r#"{"attrs":{"csa-site":["3122","3130"],"date":{"year":1994,"quarter":1}},"provenance":["0","1"]}"#;
        let msg: AggregateMessage = serde_json::from_str(json).unwrap();
        assert_eq!(msg.compound, BTreeSet::from(["csa-site".to_owned()]));
    }

    #[test]
    fn inconsistent_compound_is_rejected() {
        let json = r#"{"attrs":{"csa-site":["3122","3130"]},"compound":["date"],"provenance":["0"]}"#;
        assert!(serde_json::from_str::<AggregateMessage>(json).is_err());
    }

    #[test]
    fn group_key_order_is_preserved() {
        let group = ActionGroup {
            key: vec![
                ("class".into(), AtomicValue::symbol("refinement")),
                ("action".into(), AtomicValue::symbol("activation")),
            ],
            sentences: vec![Sentence {
                clauses: vec![Clause::new(sample_aggregate())],
                established_distinct: BTreeSet::new(),
            }],
        };
        let plan = DocumentPlan { groups: vec![group] };
        let json = plan.to_canonical_json();
        let class_at = json.find("\"class\"").unwrap();
        let action_at = json.find("\"action\"").unwrap();
        assert!(class_at < action_at, "group-key order must survive serialization");
        let back = DocumentPlan::from_json(&json).unwrap();
        assert_eq!(back, plan);
        assert_eq!(json, back.to_canonical_json());
    }
}
