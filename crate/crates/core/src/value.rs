//! Atomic and conjoined attribute values.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer, MapAccess, SeqAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

/// A calendar quarter, `year` plus `quarter` in 1..=4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct QuarterDate {
    pub year: i64,
    pub quarter: u8,
}

impl QuarterDate {
    /// Builds a quarter date, rejecting quarters outside 1..=4.
    pub fn new(year: i64, quarter: u8) -> Option<Self> {
        (1..=4).contains(&quarter).then_some(Self { year, quarter })
    }
}

impl fmt::Display for QuarterDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} Q{}", self.year, self.quarter)
    }
}

/// One atomic attribute value: a symbol token, an integer, or a quarter date.
///
/// Equality is structural (symbols compare case-sensitively). Domain-aware
/// ordering for the sorting step lives in [`AtomicValue::domain_cmp`]; the
/// derived `Ord` below is only a stable structural order for use in
/// containers and deterministic dedup.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomicValue {
    Symbol(String),
    Integer(i64),
    Quarter(QuarterDate),
}

impl AtomicValue {
    pub fn symbol(s: impl Into<String>) -> Self {
        AtomicValue::Symbol(s.into())
    }

    pub fn quarter(year: i64, quarter: u8) -> Self {
        AtomicValue::Quarter(QuarterDate { year, quarter })
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            AtomicValue::Symbol(s) => Some(s),
            _ => None,
        }
    }

    /// Ordering used by the sorting step: symbols compare lexicographically
    /// ignoring ASCII case, integers numerically, quarter dates
    /// chronologically. Mixed types fall back to a fixed variant order so the
    /// comparison stays total; validation keeps attribute columns uniformly
    /// typed, so that branch is not hit on valid data.
    pub fn domain_cmp(&self, other: &AtomicValue) -> Ordering {
        use AtomicValue::*;
        match (self, other) {
            (Symbol(a), Symbol(b)) => cmp_ignore_ascii_case(a, b),
            (Integer(a), Integer(b)) => a.cmp(b),
            (Quarter(a), Quarter(b)) => a.cmp(b),
            _ => self.variant_rank().cmp(&other.variant_rank()),
        }
    }

    fn variant_rank(&self) -> u8 {
        match self {
            AtomicValue::Symbol(_) => 0,
            AtomicValue::Integer(_) => 1,
            AtomicValue::Quarter(_) => 2,
        }
    }
}

fn cmp_ignore_ascii_case(a: &str, b: &str) -> Ordering {
    let mut ai = a.bytes().map(|c| c.to_ascii_lowercase());
    let mut bi = b.bytes().map(|c| c.to_ascii_lowercase());
    loop {
        match (ai.next(), bi.next()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(x), Some(y)) => match x.cmp(&y) {
                Ordering::Equal => continue,
                ord => return ord,
            },
        }
    }
}

impl fmt::Display for AtomicValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AtomicValue::Symbol(s) => f.write_str(s),
            AtomicValue::Integer(n) => write!(f, "{}", n),
            AtomicValue::Quarter(q) => write!(f, "{}", q),
        }
    }
}

// JSON shape: symbol <-> string, integer <-> number, quarter <-> {"year":..,"quarter":..}.
impl Serialize for AtomicValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            AtomicValue::Symbol(s) => serializer.serialize_str(s),
            AtomicValue::Integer(n) => serializer.serialize_i64(*n),
            AtomicValue::Quarter(q) => {
                let mut map = serializer.serialize_map(Some(2))?;
                map.serialize_entry("year", &q.year)?;
                map.serialize_entry("quarter", &q.quarter)?;
                map.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for AtomicValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct AtomicVisitor;

        impl<'de> Visitor<'de> for AtomicVisitor {
            type Value = AtomicValue;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a string, an integer, or a {year, quarter} object")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<AtomicValue, E> {
                Ok(AtomicValue::Symbol(v.to_owned()))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<AtomicValue, E> {
                Ok(AtomicValue::Integer(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<AtomicValue, E> {
                i64::try_from(v)
                    .map(AtomicValue::Integer)
                    .map_err(|_| E::custom("integer out of range"))
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<AtomicValue, A::Error> {
                let mut year: Option<i64> = None;
                let mut quarter: Option<u8> = None;
                while let Some(key) = map.next_key::<String>()? {
                    match key.as_str() {
                        "year" => year = Some(map.next_value()?),
                        "quarter" => quarter = Some(map.next_value()?),
                        other => return Err(de::Error::unknown_field(other, &["year", "quarter"])),
                    }
                }
                let year = year.ok_or_else(|| de::Error::missing_field("year"))?;
                let quarter = quarter.ok_or_else(|| de::Error::missing_field("quarter"))?;
                QuarterDate::new(year, quarter)
                    .map(AtomicValue::Quarter)
                    .ok_or_else(|| de::Error::custom("quarter must be between 1 and 4"))
            }
        }

        deserializer.deserialize_any(AtomicVisitor)
    }
}

/// An attribute slot in an aggregate message: either a single atomic value or
/// a conjoined list of at least two pairwise-distinct values, ordered by
/// first contribution during merging.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Atomic(AtomicValue),
    Conjoined(Vec<AtomicValue>),
}

impl Value {
    pub fn is_conjoined(&self) -> bool {
        matches!(self, Value::Conjoined(_))
    }

    /// The value list: a single element for atomic values.
    pub fn items(&self) -> &[AtomicValue] {
        match self {
            Value::Atomic(v) => std::slice::from_ref(v),
            Value::Conjoined(vs) => vs,
        }
    }
}

impl From<AtomicValue> for Value {
    fn from(v: AtomicValue) -> Self {
        Value::Atomic(v)
    }
}

// Atomic values never serialize as arrays, so `[..]` unambiguously means a
// conjoined list.
impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Atomic(v) => v.serialize(serializer),
            Value::Conjoined(vs) => vs.serialize(serializer),
        }
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ValueVisitor;

        impl<'de> Visitor<'de> for ValueVisitor {
            type Value = Value;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an atomic value or an array of atomic values")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Value, E> {
                Ok(Value::Atomic(AtomicValue::Symbol(v.to_owned())))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Value, E> {
                Ok(Value::Atomic(AtomicValue::Integer(v)))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Value, E> {
                i64::try_from(v)
                    .map(|n| Value::Atomic(AtomicValue::Integer(n)))
                    .map_err(|_| E::custom("integer out of range"))
            }

            fn visit_map<A: MapAccess<'de>>(self, map: A) -> Result<Value, A::Error> {
                let atomic =
                    AtomicValue::deserialize(de::value::MapAccessDeserializer::new(map))?;
                Ok(Value::Atomic(atomic))
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Value, A::Error> {
                let mut items = Vec::new();
                while let Some(v) = seq.next_element::<AtomicValue>()? {
                    items.push(v);
                }
                if items.len() < 2 {
                    return Err(de::Error::custom("conjoined value needs at least 2 items"));
                }
                Ok(Value::Conjoined(items))
            }
        }

        deserializer.deserialize_any(ValueVisitor)
    }
}
