//! Attribute schema: the domain-independence mechanism. A schema declares the
//! attribute vocabulary, which attributes key the grouping step, and the
//! expert priority order used to break ranking ties.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Value type of a declared attribute; decides the parser's expectations and
/// the comparator used by the sorting step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueType {
    Symbol,
    Integer,
    QuarterDate,
}

impl ValueType {
    pub fn name(self) -> &'static str {
        match self {
            ValueType::Symbol => "symbol",
            ValueType::Integer => "integer",
            ValueType::QuarterDate => "quarter_date",
        }
    }
}

/// One attribute declaration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeDecl {
    pub name: String,
    #[serde(rename = "type")]
    pub value_type: ValueType,
}

/// Slot names reserved for realization; attributes may not shadow them.
const RESERVED_NAMES: [&str; 2] = ["subject", "verb"];

/// Ordered attribute declarations plus grouping and tie-break metadata.
///
/// Invariants, enforced by [`AttributeSchema::new`]:
/// - attribute names are unique and none is a reserved slot name;
/// - every group key and tie-break entry names a declared attribute;
/// - the tie-break priority lists every non-group-key attribute exactly once.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttributeSchema {
    attributes: Vec<AttributeDecl>,
    group_keys: Vec<String>,
    tie_break_priority: Vec<String>,
}

impl AttributeSchema {
    pub fn new(
        attributes: Vec<AttributeDecl>,
        group_keys: Vec<String>,
        tie_break_priority: Vec<String>,
    ) -> Result<Self, ConfigError> {
        let schema = Self { attributes, group_keys, tie_break_priority };
        schema.validate()?;
        Ok(schema)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.attributes.is_empty() {
            return Err(ConfigError::Schema("schema declares no attributes".into()));
        }
        for (i, decl) in self.attributes.iter().enumerate() {
            if RESERVED_NAMES.contains(&decl.name.as_str()) {
                return Err(ConfigError::Schema(format!(
                    "attribute name `{}` is reserved",
                    decl.name
                )));
            }
            if self.attributes[..i].iter().any(|d| d.name == decl.name) {
                return Err(ConfigError::Schema(format!(
                    "attribute `{}` declared more than once",
                    decl.name
                )));
            }
        }
        for key in &self.group_keys {
            if self.decl(key).is_none() {
                return Err(ConfigError::Schema(format!(
                    "group key `{}` is not a declared attribute",
                    key
                )));
            }
        }
        for name in &self.tie_break_priority {
            if self.decl(name).is_none() {
                return Err(ConfigError::Schema(format!(
                    "tie-break entry `{}` is not a declared attribute",
                    name
                )));
            }
        }
        for decl in self.non_group_attributes() {
            let count = self
                .tie_break_priority
                .iter()
                .filter(|n| *n == &decl.name)
                .count();
            if count != 1 {
                return Err(ConfigError::Schema(format!(
                    "tie-break priority must list `{}` exactly once (found {})",
                    decl.name, count
                )));
            }
        }
        if self.tie_break_priority.len() != self.attributes.len() - self.group_keys.len() {
            return Err(ConfigError::Schema(
                "tie-break priority must cover exactly the non-group-key attributes".into(),
            ));
        }
        Ok(())
    }

    pub fn attributes(&self) -> &[AttributeDecl] {
        &self.attributes
    }

    pub fn group_keys(&self) -> &[String] {
        &self.group_keys
    }

    pub fn tie_break_priority(&self) -> &[String] {
        &self.tie_break_priority
    }

    pub fn decl(&self, name: &str) -> Option<&AttributeDecl> {
        self.attributes.iter().find(|d| d.name == name)
    }

    pub fn is_group_key(&self, name: &str) -> bool {
        self.group_keys.iter().any(|k| k == name)
    }

    /// Declarations that participate in ranking/sorting/merging, in
    /// declaration order.
    pub fn non_group_attributes(&self) -> impl Iterator<Item = &AttributeDecl> {
        self.attributes.iter().filter(|d| !self.is_group_key(&d.name))
    }

    /// Position of `name` in the tie-break priority list (0 = highest
    /// priority). `None` for group keys.
    pub fn priority_index(&self, name: &str) -> Option<usize> {
        self.tie_break_priority.iter().position(|n| n == name)
    }
}

impl<'de> Deserialize<'de> for AttributeSchema {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            attributes: Vec<AttributeDecl>,
            group_keys: Vec<String>,
            tie_break_priority: Vec<String>,
        }
        let raw = Raw::deserialize(deserializer)?;
        AttributeSchema::new(raw.attributes, raw.group_keys, raw.tie_break_priority)
            .map_err(serde::de::Error::custom)
    }
}
