//! Template realizer: renders a document plan as English report text using a
//! lexicon of verbs, per-attribute phrase templates, and date paraphrases.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::RealizeError;
use crate::message::Message;
use crate::plan::{AggregateMessage, Clause, DocumentPlan, Slot};
use crate::value::{AtomicValue, QuarterDate, Value};

/// Document-level date paraphrase policy. `Auto` renders the first date
/// phrase in long form and every later one in short form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DateStyle {
    #[default]
    Auto,
    AllLong,
    AllShort,
}

/// Concrete form for a single date phrase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhraseDateStyle {
    Long,
    Short,
}

/// Whether a clause opens its sentence or continues it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClausePosition {
    First,
    Subsequent,
}

/// How one attribute becomes a phrase: optional preposition, optional
/// classifier noun (with a plural for conjoined values), and a map from
/// lowercased raw symbols to display casing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeTemplate {
    pub attribute: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preposition: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classifier_singular: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classifier_plural: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub value_casing: BTreeMap<String, String>,
}

impl AttributeTemplate {
    pub fn bare(attribute: impl Into<String>) -> Self {
        AttributeTemplate {
            attribute: attribute.into(),
            preposition: None,
            classifier_singular: None,
            classifier_plural: None,
            value_casing: BTreeMap::new(),
        }
    }
}

/// Everything the realizer needs to know about the domain's language.
/// Template order defines the within-clause constituent order. The date
/// patterns recognize `{year}`, `{quarter}`, and `{quarter_ordinal}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Lexicon {
    pub subject_first: String,
    pub subject_subsequent: String,
    pub verb_attribute: String,
    pub verbs: BTreeMap<String, String>,
    pub attribute_templates: Vec<AttributeTemplate>,
    pub date_long: String,
    pub date_short: String,
    pub conjunction: String,
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon {
            subject_first: "This refinement".into(),
            subject_subsequent: "It also".into(),
            verb_attribute: "action".into(),
            verbs: BTreeMap::from([
                ("activation".into(), "activated".into()),
                ("extension".into(), "extended".into()),
            ]),
            attribute_templates: vec![
                AttributeTemplate {
                    attribute: "equipment-type".into(),
                    preposition: None,
                    classifier_singular: None,
                    classifier_plural: None,
                    value_casing: BTreeMap::from([
                        ("all-dlc".into(), "ALL-DLC".into()),
                        ("dlc".into(), "DLC".into()),
                        ("dss-dlc".into(), "DSS-DLC".into()),
                    ]),
                },
                AttributeTemplate {
                    attribute: "csa-site".into(),
                    preposition: Some("for".into()),
                    classifier_singular: Some("CSA".into()),
                    classifier_plural: Some("CSAs".into()),
                    value_casing: BTreeMap::new(),
                },
                AttributeTemplate {
                    attribute: "date".into(),
                    preposition: Some("in".into()),
                    classifier_singular: None,
                    classifier_plural: None,
                    value_casing: BTreeMap::new(),
                },
            ],
            date_long: "the {quarter_ordinal} quarter of {year}".into(),
            date_short: "{year} Q{quarter}".into(),
            conjunction: "and".into(),
        }
    }
}

impl Lexicon {
    pub fn template(&self, attribute: &str) -> Option<&AttributeTemplate> {
        self.attribute_templates.iter().find(|t| t.attribute == attribute)
    }

    fn verb_for(&self, body: &AggregateMessage) -> Result<&str, RealizeError> {
        let key = match body.value(&self.verb_attribute) {
            Some(Value::Atomic(AtomicValue::Symbol(s))) => s.to_ascii_lowercase(),
            Some(Value::Atomic(AtomicValue::Integer(n))) => n.to_string(),
            Some(Value::Atomic(AtomicValue::Quarter(q))) => q.to_string(),
            _ => String::new(),
        };
        self.verbs
            .get(&key)
            .map(String::as_str)
            .ok_or(RealizeError::MissingVerb { action: key })
    }
}

/// Output-shaping knobs that are not lexical: date policy, the separator
/// between sentences, and the list-comma convention.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderOptions {
    pub date_style: DateStyle,
    pub sentence_separator: String,
    pub oxford_comma: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            date_style: DateStyle::Auto,
            sentence_separator: "  ".into(),
            oxford_comma: false,
        }
    }
}

/// Rewrites symbol values to their display casing so that equality during
/// aggregation operates on canonical forms. Values without a casing entry
/// pass through unchanged; the rewrite is idempotent.
pub fn canonicalize(msgs: Vec<Message>, lex: &Lexicon) -> Vec<Message> {
    msgs.into_iter()
        .map(|mut msg| {
            for (name, value) in msg.attrs.iter_mut() {
                let AtomicValue::Symbol(s) = value else { continue };
                let Some(tmpl) = lex.template(name) else { continue };
                if let Some(display) = tmpl.value_casing.get(&s.to_ascii_lowercase()) {
                    *s = display.clone();
                }
            }
            msg
        })
        .collect()
}

fn ordinal(quarter: u8) -> &'static str {
    match quarter {
        1 => "first",
        2 => "second",
        3 => "third",
        4 => "fourth",
        _ => "unknown",
    }
}

fn format_quarter(q: &QuarterDate, pattern: &str) -> String {
    pattern
        .replace("{quarter_ordinal}", ordinal(q.quarter))
        .replace("{quarter}", &q.quarter.to_string())
        .replace("{year}", &q.year.to_string())
}

fn capitalize_first(text: &str) -> String {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

fn lowercase_first(text: &str) -> String {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

fn join_list(items: &[String], conjunction: &str, oxford: bool) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [left, right] => format!("{} {} {}", left, conjunction, right),
        many => {
            let head = many[..many.len() - 1].join(", ");
            let comma = if oxford { "," } else { "" };
            format!("{}{} {} {}", head, comma, conjunction, many[many.len() - 1])
        }
    }
}

fn has_quarter(value: &Value) -> bool {
    value.items().iter().any(|v| matches!(v, AtomicValue::Quarter(_)))
}

/// Tracks the document-level "first date phrase is long" rule.
struct DateSequencer {
    style: DateStyle,
    first_done: bool,
}

impl DateSequencer {
    fn new(style: DateStyle) -> Self {
        DateSequencer { style, first_done: false }
    }

    fn fixed(style: PhraseDateStyle) -> Self {
        match style {
            PhraseDateStyle::Long => DateSequencer::new(DateStyle::AllLong),
            PhraseDateStyle::Short => DateSequencer::new(DateStyle::AllShort),
        }
    }

    fn next(&mut self) -> PhraseDateStyle {
        match self.style {
            DateStyle::AllLong => PhraseDateStyle::Long,
            DateStyle::AllShort => PhraseDateStyle::Short,
            DateStyle::Auto => {
                if self.first_done {
                    PhraseDateStyle::Short
                } else {
                    self.first_done = true;
                    PhraseDateStyle::Long
                }
            }
        }
    }
}

fn display_item(
    tmpl: &AttributeTemplate,
    item: &AtomicValue,
    lex: &Lexicon,
    date_style: PhraseDateStyle,
) -> String {
    match item {
        AtomicValue::Symbol(s) => tmpl
            .value_casing
            .get(&s.to_ascii_lowercase())
            .cloned()
            .unwrap_or_else(|| s.clone()),
        AtomicValue::Integer(n) => n.to_string(),
        AtomicValue::Quarter(q) => {
            let pattern = match date_style {
                PhraseDateStyle::Long => &lex.date_long,
                PhraseDateStyle::Short => &lex.date_short,
            };
            format_quarter(q, pattern)
        }
    }
}

fn render_phrase(
    attribute: &str,
    value: &Value,
    lex: &Lexicon,
    date_style: PhraseDateStyle,
    oxford: bool,
) -> Result<String, RealizeError> {
    let tmpl = lex
        .template(attribute)
        .ok_or_else(|| RealizeError::MissingTemplate { attribute: attribute.to_owned() })?;
    let items = value.items();
    let rendered: Vec<String> =
        items.iter().map(|item| display_item(tmpl, item, lex, date_style)).collect();
    let classifier = if items.len() >= 2 {
        tmpl.classifier_plural.as_deref().or(tmpl.classifier_singular.as_deref())
    } else {
        tmpl.classifier_singular.as_deref()
    };
    let mut parts: Vec<&str> = Vec::with_capacity(3);
    if let Some(prep) = tmpl.preposition.as_deref() {
        parts.push(prep);
    }
    if let Some(classifier) = classifier {
        parts.push(classifier);
    }
    let values = join_list(&rendered, &lex.conjunction, oxford);
    parts.push(&values);
    Ok(parts.join(" "))
}

/// Renders one attribute phrase: preposition, classifier (pluralized for
/// conjoined values), and the value list.
pub fn realize_value(
    attribute: &str,
    value: &Value,
    lex: &Lexicon,
    date_style: PhraseDateStyle,
) -> Result<String, RealizeError> {
    render_phrase(attribute, value, lex, date_style, false)
}

fn render_clause(
    clause: &Clause,
    subject: &str,
    lex: &Lexicon,
    dates: &mut DateSequencer,
    oxford: bool,
) -> Result<String, RealizeError> {
    let mut parts: Vec<String> = Vec::new();
    if !clause.is_deleted(&Slot::Subject) {
        parts.push(subject.to_owned());
    }
    if !clause.is_deleted(&Slot::Verb) {
        parts.push(lex.verb_for(&clause.body)?.to_owned());
    }
    for tmpl in &lex.attribute_templates {
        if clause.is_deleted(&Slot::attr(&tmpl.attribute)) {
            continue;
        }
        let Some(value) = clause.body.value(&tmpl.attribute) else { continue };
        let style = if has_quarter(value) { dates.next() } else { PhraseDateStyle::Short };
        parts.push(render_phrase(&tmpl.attribute, value, lex, style, oxford)?);
    }
    Ok(parts.join(" "))
}

/// Renders one clause in isolation with the given concrete date style; the
/// document renderer handles subject alternation and the long/short date
/// sequence itself.
pub fn realize_clause(
    clause: &Clause,
    position: ClausePosition,
    lex: &Lexicon,
    date_style: PhraseDateStyle,
) -> Result<String, RealizeError> {
    let subject = match position {
        ClausePosition::First => lex.subject_first.clone(),
        ClausePosition::Subsequent => lowercase_first(&lex.subject_first),
    };
    render_clause(clause, &subject, lex, &mut DateSequencer::fixed(date_style), false)
}

/// Renders the whole plan. Per group, the first sentence opens with the
/// primary subject cue and later sentences with the follow-up cue; clauses
/// join on the conjunction; each sentence is capitalized and ends with a
/// period. Every non-group-key attribute in the plan must have a template.
pub fn realize_document(
    plan: &DocumentPlan,
    lex: &Lexicon,
    opts: &RenderOptions,
) -> Result<String, RealizeError> {
    let mut dates = DateSequencer::new(opts.date_style);
    let mut sentences = Vec::new();
    for group in &plan.groups {
        let key_names: BTreeSet<&str> = group.key.iter().map(|(k, _)| k.as_str()).collect();
        for (si, sentence) in group.sentences.iter().enumerate() {
            let cue = if si == 0 { &lex.subject_first } else { &lex.subject_subsequent };
            let mut clause_texts = Vec::new();
            for (ci, clause) in sentence.clauses.iter().enumerate() {
                for name in clause.body.attrs.keys() {
                    if !key_names.contains(name.as_str())
                        && name != &lex.verb_attribute
                        && lex.template(name).is_none()
                    {
                        return Err(RealizeError::MissingTemplate { attribute: name.clone() });
                    }
                }
                let subject = if ci == 0 { cue.clone() } else { lowercase_first(cue) };
                clause_texts.push(render_clause(clause, &subject, lex, &mut dates, opts.oxford_comma)?);
            }
            let joined = clause_texts.join(&format!(" {} ", lex.conjunction));
            let mut text = capitalize_first(joined.trim());
            text.push('.');
            sentences.push(text);
        }
    }
    Ok(sentences.join(&opts.sentence_separator))
}

/// Renders messages without any aggregation: one full sentence per message
/// in input order, the primary subject cue everywhere, short dates.
pub fn realize_baseline(
    msgs: &[Message],
    lex: &Lexicon,
    opts: &RenderOptions,
) -> Result<String, RealizeError> {
    let mut sentences = Vec::new();
    for msg in msgs {
        let clause = Clause::new(AggregateMessage::from_message(msg));
        let mut dates = DateSequencer::new(DateStyle::AllShort);
        let body =
            render_clause(&clause, &lex.subject_first, lex, &mut dates, opts.oxford_comma)?;
        let mut text = capitalize_first(body.trim());
        text.push('.');
        sentences.push(text);
    }
    Ok(sentences.join(&opts.sentence_separator))
}
