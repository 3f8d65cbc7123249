//! Line-delimited JSON input: one message object per line, blank lines
//! skipped. Each object carries the schema attributes plus optional `id`
//! (string or integer) and `admin` (string-valued object) fields.

use std::collections::BTreeMap;

use serde_json::Value as Json;

use crate::error::ParseError;
use crate::message::{check_type, Message, MessageId};
use crate::schema::{AttributeSchema, ValueType};
use crate::value::{AtomicValue, QuarterDate};

/// Parses a whole JSONL document. Errors carry the 1-based source line.
pub fn parse_jsonl(text: &str, schema: &AttributeSchema) -> Result<Vec<Message>, ParseError> {
    let mut messages = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let json: Json = serde_json::from_str(raw).map_err(|e| ParseError::MalformedLine {
            line,
            detail: e.to_string(),
        })?;
        let default_id = MessageId::from(messages.len());
        messages.push(message_from_json(json, schema, default_id).map_err(|e| e.on_line(line))?);
    }
    Ok(messages)
}

fn message_from_json(
    json: Json,
    schema: &AttributeSchema,
    default_id: MessageId,
) -> Result<Message, ParseError> {
    let Json::Object(fields) = json else {
        return Err(ParseError::Syntax {
            position: crate::error::Position { line: 1, column: 1 },
            detail: "each line must be a JSON object".into(),
        });
    };

    let mut id = default_id;
    let mut admin = BTreeMap::new();
    let mut attrs = BTreeMap::new();

    for (key, value) in fields {
        match key.as_str() {
            "id" => {
                id = match value {
                    Json::String(s) => MessageId(s),
                    Json::Number(n) if n.is_i64() || n.is_u64() => MessageId(n.to_string()),
                    other => {
                        return Err(ParseError::TypeMismatch {
                            attribute: "id".into(),
                            expected: "string or integer".into(),
                            got: json_kind(&other).into(),
                            position: None,
                        })
                    }
                };
            }
            "admin" => {
                let Json::Object(entries) = value else {
                    return Err(ParseError::TypeMismatch {
                        attribute: "admin".into(),
                        expected: "object".into(),
                        got: json_kind(&value).into(),
                        position: None,
                    });
                };
                for (k, v) in entries {
                    let Json::String(s) = v else {
                        return Err(ParseError::TypeMismatch {
                            attribute: format!("admin.{}", k),
                            expected: "string".into(),
                            got: json_kind(&v).into(),
                            position: None,
                        });
                    };
                    admin.insert(k, s);
                }
            }
            name => {
                let decl = schema.decl(name).ok_or_else(|| ParseError::UnknownAttribute {
                    name: name.to_owned(),
                    position: None,
                })?;
                let atomic = atomic_from_json(name, decl.value_type, value)?;
                check_type(name, decl.value_type, &atomic)?;
                attrs.insert(key, atomic);
            }
        }
    }

    for decl in schema.attributes() {
        if !attrs.contains_key(&decl.name) {
            return Err(ParseError::MissingAttribute { name: decl.name.clone() });
        }
    }

    Ok(Message { id, admin, attrs })
}

fn atomic_from_json(name: &str, expected: ValueType, value: Json) -> Result<AtomicValue, ParseError> {
    let mismatch = |got: String| ParseError::TypeMismatch {
        attribute: name.to_owned(),
        expected: expected.name().to_owned(),
        got,
        position: None,
    };
    match (expected, value) {
        (ValueType::Symbol, Json::String(s)) => Ok(AtomicValue::Symbol(s)),
        (ValueType::Integer, Json::Number(n)) => {
            n.as_i64().map(AtomicValue::Integer).ok_or_else(|| mismatch(n.to_string()))
        }
        (ValueType::QuarterDate, Json::Object(fields)) => {
            let mut year: Option<i64> = None;
            let mut quarter: Option<i64> = None;
            for (k, v) in fields {
                let n = v.as_i64().ok_or_else(|| mismatch(format!("{}: {}", k, json_kind(&v))))?;
                match k.as_str() {
                    "year" => year = Some(n),
                    "quarter" => quarter = Some(n),
                    other => return Err(mismatch(format!("unexpected field `{}`", other))),
                }
            }
            let year = year.ok_or_else(|| mismatch("date without year".into()))?;
            let quarter = quarter.ok_or_else(|| mismatch("date without quarter".into()))?;
            u8::try_from(quarter)
                .ok()
                .and_then(|q| QuarterDate::new(year, q))
                .map(AtomicValue::Quarter)
                .ok_or_else(|| mismatch(format!("quarter {}", quarter)))
        }
        (_, other) => Err(mismatch(json_kind(&other).into())),
    }
}

/// Renders messages as JSON lines in the shape [`parse_jsonl`] reads:
/// attributes inline, plus `id` and (when present) `admin`.
pub fn to_jsonl(msgs: &[Message]) -> String {
    let mut out = String::new();
    for msg in msgs {
        let mut fields = serde_json::Map::new();
        fields.insert("id".into(), Json::String(msg.id.0.clone()));
        if !msg.admin.is_empty() {
            let admin: serde_json::Map<String, Json> = msg
                .admin
                .iter()
                .map(|(k, v)| (k.clone(), Json::String(v.clone())))
                .collect();
            fields.insert("admin".into(), Json::Object(admin));
        }
        for (name, value) in &msg.attrs {
            let json = serde_json::to_value(value).expect("atomic values serialize");
            fields.insert(name.clone(), json);
        }
        out.push_str(&Json::Object(fields).to_string());
        out.push('\n');
    }
    out
}

fn json_kind(value: &Json) -> &'static str {
    match value {
        Json::Null => "null",
        Json::Bool(_) => "boolean",
        Json::Number(_) => "number",
        Json::String(_) => "string",
        Json::Array(_) => "array",
        Json::Object(_) => "object",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::default_schema;

    const LINE: &str = r#"{"class":"refinement","action":"activation","equipment-type":"ALL-DLC","csa-site":"3134","date":{"year":1994,"quarter":3}}"#;

    #[test]
    fn parses_a_line_per_message() {
        let schema = default_schema();
        let text = format!("{}\n\n{}\n", LINE, LINE);
        let msgs = parse_jsonl(&text, &schema).unwrap();
        assert_eq!(msgs.len(), 2);
        assert_eq!(msgs[0].id, MessageId::from(0));
        assert_eq!(msgs[1].id, MessageId::from(1));
        assert_eq!(msgs[0].value("date"), Some(&AtomicValue::quarter(1994, 3)));
    }

    #[test]
    fn explicit_ids_and_admin_are_kept() {
        let schema = default_schema();
        let text = LINE.replacen('{', r#"{"id":"m-7","admin":{"runid":"r-reg1"},"#, 1);
        let msgs = parse_jsonl(&text, &schema).unwrap();
        assert_eq!(msgs[0].id, MessageId::from("m-7"));
        assert_eq!(msgs[0].admin.get("runid").map(String::as_str), Some("r-reg1"));
    }

    #[test]
    fn integer_id_becomes_its_decimal_string() {
        let schema = default_schema();
        let text = LINE.replacen('{', r#"{"id":41,"#, 1);
        let msgs = parse_jsonl(&text, &schema).unwrap();
        assert_eq!(msgs[0].id, MessageId::from("41"));
    }

    #[test]
    fn malformed_json_reports_the_line() {
        let schema = default_schema();
        let text = format!("{}\nnot json\n", LINE);
        let err = parse_jsonl(&text, &schema).unwrap_err();
        assert!(matches!(err, ParseError::MalformedLine { line: 2, .. }));
    }

    #[test]
    fn wrong_value_type_reports_the_line() {
        let schema = default_schema();
        let text = LINE.replace(r#""equipment-type":"ALL-DLC""#, r#""equipment-type":7"#);
        let err = parse_jsonl(&text, &schema).unwrap_err();
        match err {
            ParseError::TypeMismatch { attribute, position, .. } => {
                assert_eq!(attribute, "equipment-type");
                assert_eq!(position.unwrap().line, 1);
            }
            other => panic!("unexpected error: {other:?}"),
        }
    }

    #[test]
    fn missing_attribute_is_reported() {
        let schema = default_schema();
        let text = LINE.replace(r#""csa-site":"3134","#, "");
        let err = parse_jsonl(&text, &schema).unwrap_err();
        assert!(matches!(err, ParseError::MissingAttribute { ref name } if name == "csa-site"));
    }

    #[test]
    fn writer_output_parses_back_identically() {
        let schema = default_schema();
        let text = LINE.replacen('{', r#"{"admin":{"runid":"r-reg1"},"#, 1);
        let msgs = parse_jsonl(&text, &schema).unwrap();
        let written = to_jsonl(&msgs);
        let back = parse_jsonl(&written, &schema).unwrap();
        assert_eq!(back, msgs);
    }
}
