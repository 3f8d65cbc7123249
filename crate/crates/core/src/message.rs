//! The atomic message: one decision, a flat map from schema attributes to
//! atomic values, plus identity and admin metadata.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ParseError;
use crate::schema::{AttributeSchema, ValueType};
use crate::value::AtomicValue;

/// Opaque message identity. Parsers assign input-order ids (0-based) when the
/// input carries none.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MessageId(pub String);

impl From<usize> for MessageId {
    fn from(n: usize) -> Self {
        MessageId(n.to_string())
    }
}

impl From<&str> for MessageId {
    fn from(s: &str) -> Self {
        MessageId(s.to_owned())
    }
}

impl fmt::Display for MessageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One atomic decision. `attrs` holds exactly the schema's attributes, each
/// with an atomic (never conjoined) value. `admin` is preserved verbatim and
/// ignored by aggregation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub id: MessageId,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub admin: BTreeMap<String, String>,
    pub attrs: BTreeMap<String, AtomicValue>,
}

impl Message {
    pub fn new(id: impl Into<MessageId>, attrs: BTreeMap<String, AtomicValue>) -> Self {
        Message { id: id.into(), admin: BTreeMap::new(), attrs }
    }

    pub fn value(&self, attribute: &str) -> Option<&AtomicValue> {
        self.attrs.get(attribute)
    }
}

/// Checks a message against the schema: exactly the declared attributes, each
/// value matching its declared type, every symbol a parenthesis- and
/// whitespace-free token.
pub fn validate_message(msg: &Message, schema: &AttributeSchema) -> Result<(), ParseError> {
    for decl in schema.attributes() {
        let value = msg.attrs.get(&decl.name).ok_or_else(|| ParseError::MissingAttribute {
            name: decl.name.clone(),
        })?;
        check_type(&decl.name, decl.value_type, value)?;
    }
    for name in msg.attrs.keys() {
        if schema.decl(name).is_none() {
            return Err(ParseError::UnknownAttribute { name: name.clone(), position: None });
        }
    }
    Ok(())
}

/// Validates a batch, reporting the first failure with its input index.
pub fn validate_messages(msgs: &[Message], schema: &AttributeSchema) -> Result<(), ParseError> {
    for (i, msg) in msgs.iter().enumerate() {
        validate_message(msg, schema).map_err(|e| e.on_line(i + 1))?;
    }
    Ok(())
}

pub(crate) fn check_type(
    attribute: &str,
    expected: ValueType,
    value: &AtomicValue,
) -> Result<(), ParseError> {
    let mismatch = |got: &str| ParseError::TypeMismatch {
        attribute: attribute.to_owned(),
        expected: expected.name().to_owned(),
        got: got.to_owned(),
        position: None,
    };
    match (expected, value) {
        (ValueType::Symbol, AtomicValue::Symbol(s)) => {
            if s.is_empty() || s.chars().any(|c| c.is_whitespace() || c == '(' || c == ')') {
                Err(mismatch("non-token symbol"))
            } else {
                Ok(())
            }
        }
        (ValueType::Integer, AtomicValue::Integer(_)) => Ok(()),
        (ValueType::QuarterDate, AtomicValue::Quarter(q)) => {
            if (1..=4).contains(&q.quarter) {
                Ok(())
            } else {
                Err(mismatch(&format!("quarter {}", q.quarter)))
            }
        }
        (_, AtomicValue::Symbol(_)) => Err(mismatch("symbol")),
        (_, AtomicValue::Integer(_)) => Err(mismatch("integer")),
        (_, AtomicValue::Quarter(_)) => Err(mismatch("quarter_date")),
    }
}
