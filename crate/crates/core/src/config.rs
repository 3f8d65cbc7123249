//! Run configuration: schema + lexicon + options as one JSON document. Every
//! field has a default, so a partial config (or none at all) runs the
//! built-in telephone-network domain.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::aggregate::{AggregateOptions, Step};
use crate::error::ConfigError;
use crate::realize::{DateStyle, Lexicon, RenderOptions};
use crate::schema::{AttributeDecl, AttributeSchema, ValueType};

/// Pipeline and output options.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Options {
    /// Upper bound on clauses per sentence; absent means unlimited.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_clauses: Option<usize>,
    pub date_style: DateStyle,
    pub oxford_comma: bool,
    pub sentence_separator: String,
    pub disabled_steps: BTreeSet<Step>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            max_clauses: None,
            date_style: DateStyle::Auto,
            oxford_comma: false,
            sentence_separator: "  ".into(),
            disabled_steps: BTreeSet::new(),
        }
    }
}

/// Everything one invocation needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub schema: AttributeSchema,
    pub lexicon: Lexicon,
    pub options: Options,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema: default_schema(),
            lexicon: Lexicon::default(),
            options: Options::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Cross-field checks: the lexicon must be able to render everything the
    /// schema admits.
    pub fn validate(&self) -> Result<(), ConfigError> {
        for decl in self.schema.non_group_attributes() {
            if self.lexicon.template(&decl.name).is_none() {
                return Err(ConfigError::Lexicon(format!(
                    "no phrase template for attribute `{}`",
                    decl.name
                )));
            }
        }
        if self.schema.decl(&self.lexicon.verb_attribute).is_none() {
            return Err(ConfigError::Lexicon(format!(
                "verb attribute `{}` is not declared in the schema",
                self.lexicon.verb_attribute
            )));
        }
        if self.options.max_clauses == Some(0) {
            return Err(ConfigError::Options("max_clauses must be at least 1".into()));
        }
        Ok(())
    }

    /// Aggregation knobs, with the step dependency applied: disabling `sort`
    /// also disables `merge`.
    pub fn aggregate_options(&self) -> AggregateOptions {
        let mut disabled = self.options.disabled_steps.clone();
        if disabled.contains(&Step::Sort) {
            disabled.insert(Step::Merge);
        }
        AggregateOptions {
            disabled_steps: disabled,
            max_clauses: self.options.max_clauses.unwrap_or(usize::MAX),
        }
    }

    pub fn render_options(&self) -> RenderOptions {
        RenderOptions {
            date_style: self.options.date_style,
            sentence_separator: self.options.sentence_separator.clone(),
            oxford_comma: self.options.oxford_comma,
        }
    }
}

/// The built-in schema: telephone-network refinement messages with
/// `class`/`action` group keys.
pub fn default_schema() -> AttributeSchema {
    AttributeSchema::new(
        vec![
            AttributeDecl { name: "class".into(), value_type: ValueType::Symbol },
            AttributeDecl { name: "action".into(), value_type: ValueType::Symbol },
            AttributeDecl { name: "equipment-type".into(), value_type: ValueType::Symbol },
            AttributeDecl { name: "csa-site".into(), value_type: ValueType::Symbol },
            AttributeDecl { name: "date".into(), value_type: ValueType::QuarterDate },
        ],
        vec!["class".into(), "action".into()],
        vec!["date".into(), "equipment-type".into(), "csa-site".into()],
    )
    .expect("built-in schema is well formed")
}

/// The built-in lexicon matching [`default_schema`].
pub fn default_lexicon() -> Lexicon {
    Lexicon::default()
}
