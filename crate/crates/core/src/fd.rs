//! Parser and serializer for the parenthesized functional-description input
//! format: one message per `(...)` form, attribute-value pairs nested one
//! level deep for `admin` and quarter dates, whitespace-insensitive between
//! tokens.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{ParseError, Position};
use crate::message::{check_type, Message, MessageId};
use crate::schema::{AttributeSchema, ValueType};
use crate::value::{AtomicValue, QuarterDate};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    LParen(Position),
    RParen(Position),
    Atom(String, Position),
}

impl Token {
    fn position(&self) -> Position {
        match self {
            Token::LParen(p) | Token::RParen(p) => *p,
            Token::Atom(_, p) => *p,
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { chars: text.chars().peekable(), line: 1, column: 1 }
    }

    fn position(&self) -> Position {
        Position { line: self.line, column: self.column }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn next_token(&mut self) -> Option<Token> {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
        let pos = self.position();
        match self.chars.peek()? {
            '(' => {
                self.bump();
                Some(Token::LParen(pos))
            }
            ')' => {
                self.bump();
                Some(Token::RParen(pos))
            }
            _ => {
                let mut atom = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' {
                        break;
                    }
                    atom.push(c);
                    self.bump();
                }
                Some(Token::Atom(atom, pos))
            }
        }
    }
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut lexer = Lexer::new(text);
    let mut tokens = Vec::new();
    while let Some(t) = lexer.next_token() {
        tokens.push(t);
    }
    tokens
}

/// A parsed pair value: either a bare atom or a nested attribute-value list.
#[derive(Debug, Clone)]
enum PairValue {
    Atom(String, Position),
    List(Vec<Pair>),
}

#[derive(Debug, Clone)]
struct Pair {
    key: String,
    key_pos: Position,
    value: PairValue,
}

struct Parser {
    tokens: Vec<Token>,
    index: usize,
    end: Position,
}

impl Parser {
    fn new(text: &str) -> Self {
        let tokens = tokenize(text);
        let end = tokens
            .last()
            .map(|t| t.position())
            .unwrap_or(Position { line: 1, column: 1 });
        Parser { tokens, index: 0, end }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.index)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.index).cloned();
        if t.is_some() {
            self.index += 1;
        }
        t
    }

    fn here(&self) -> Position {
        self.peek().map(|t| t.position()).unwrap_or(self.end)
    }

    fn expect_lparen(&mut self) -> Result<Position, ParseError> {
        match self.next() {
            Some(Token::LParen(p)) => Ok(p),
            Some(t) => Err(ParseError::Syntax {
                position: t.position(),
                detail: "expected `(`".into(),
            }),
            None => Err(ParseError::UnbalancedParens {
                position: self.end,
                detail: "unexpected end of input, expected `(`".into(),
            }),
        }
    }

    /// Parses `(pair*)` with the opening paren already consumed.
    fn pair_list(&mut self, open: Position) -> Result<Vec<Pair>, ParseError> {
        let mut pairs = Vec::new();
        loop {
            match self.peek() {
                Some(Token::RParen(_)) => {
                    self.next();
                    return Ok(pairs);
                }
                Some(Token::LParen(_)) => {
                    let inner = match self.next() {
                        Some(Token::LParen(p)) => p,
                        _ => unreachable!(),
                    };
                    pairs.push(self.pair(inner)?);
                }
                Some(Token::Atom(_, p)) => {
                    return Err(ParseError::Syntax {
                        position: *p,
                        detail: "expected `(` starting an attribute pair".into(),
                    });
                }
                None => {
                    return Err(ParseError::UnbalancedParens {
                        position: open,
                        detail: "unclosed `(`".into(),
                    });
                }
            }
        }
    }

    /// Parses `key value)` with the opening paren already consumed.
    fn pair(&mut self, open: Position) -> Result<Pair, ParseError> {
        let (key, key_pos) = match self.next() {
            Some(Token::Atom(a, p)) => (a, p),
            Some(t) => {
                return Err(ParseError::Syntax {
                    position: t.position(),
                    detail: "expected an attribute name".into(),
                })
            }
            None => {
                return Err(ParseError::UnbalancedParens {
                    position: open,
                    detail: "unclosed `(`".into(),
                })
            }
        };
        let value = match self.peek() {
            Some(Token::Atom(..)) => match self.next() {
                Some(Token::Atom(a, p)) => PairValue::Atom(a, p),
                _ => unreachable!(),
            },
            Some(Token::LParen(_)) => {
                let inner = match self.next() {
                    Some(Token::LParen(p)) => p,
                    _ => unreachable!(),
                };
                PairValue::List(self.pair_list(inner)?)
            }
            Some(Token::RParen(p)) => {
                return Err(ParseError::Syntax {
                    position: *p,
                    detail: format!("attribute `{}` has no value", key),
                })
            }
            None => {
                return Err(ParseError::UnbalancedParens {
                    position: open,
                    detail: "unclosed `(`".into(),
                })
            }
        };
        match self.next() {
            Some(Token::RParen(_)) => Ok(Pair { key, key_pos, value }),
            Some(t) => Err(ParseError::Syntax {
                position: t.position(),
                detail: format!("expected `)` after the value of `{}`", key),
            }),
            None => Err(ParseError::UnbalancedParens {
                position: open,
                detail: "unclosed `(`".into(),
            }),
        }
    }

    fn at_end(&self) -> bool {
        self.peek().is_none()
    }
}

fn interpret(pairs: Vec<Pair>, schema: &AttributeSchema, id: MessageId) -> Result<Message, ParseError> {
    let mut admin = BTreeMap::new();
    let mut attrs: BTreeMap<String, AtomicValue> = BTreeMap::new();

    for pair in pairs {
        match pair.key.as_str() {
            // `(cat message)` is a format marker, consumed and discarded.
            "cat" => match &pair.value {
                PairValue::Atom(v, _) if v.eq_ignore_ascii_case("message") => {}
                _ => {
                    return Err(ParseError::TypeMismatch {
                        attribute: "cat".into(),
                        expected: "the marker `message`".into(),
                        got: describe(&pair.value),
                        position: Some(pair.key_pos),
                    })
                }
            },
            "admin" => {
                let entries = match pair.value {
                    PairValue::List(entries) => entries,
                    PairValue::Atom(..) => {
                        return Err(ParseError::TypeMismatch {
                            attribute: "admin".into(),
                            expected: "a nested attribute-value list".into(),
                            got: "atom".into(),
                            position: Some(pair.key_pos),
                        })
                    }
                };
                for entry in entries {
                    let value = match entry.value {
                        PairValue::Atom(v, _) => v,
                        PairValue::List(_) => {
                            return Err(ParseError::TypeMismatch {
                                attribute: format!("admin.{}", entry.key),
                                expected: "atom".into(),
                                got: "list".into(),
                                position: Some(entry.key_pos),
                            })
                        }
                    };
                    if admin.insert(entry.key.clone(), value).is_some() {
                        return Err(ParseError::DuplicateAttribute {
                            name: format!("admin.{}", entry.key),
                            position: Some(entry.key_pos),
                        });
                    }
                }
            }
            name => {
                let decl = schema.decl(name).ok_or_else(|| ParseError::UnknownAttribute {
                    name: name.to_owned(),
                    position: Some(pair.key_pos),
                })?;
                let value = atomic_from_pair(&pair, decl.value_type)?;
                check_type(name, decl.value_type, &value)?;
                if attrs.insert(name.to_owned(), value).is_some() {
                    return Err(ParseError::DuplicateAttribute {
                        name: name.to_owned(),
                        position: Some(pair.key_pos),
                    });
                }
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

fn describe(value: &PairValue) -> String {
    match value {
        PairValue::Atom(v, _) => format!("`{}`", v),
        PairValue::List(_) => "list".into(),
    }
}

fn atomic_from_pair(pair: &Pair, expected: ValueType) -> Result<AtomicValue, ParseError> {
    let mismatch = |got: String, pos: Position| ParseError::TypeMismatch {
        attribute: pair.key.clone(),
        expected: expected.name().to_owned(),
        got,
        position: Some(pos),
    };
    match (expected, &pair.value) {
        (ValueType::Symbol, PairValue::Atom(v, _)) => Ok(AtomicValue::Symbol(v.clone())),
        (ValueType::Integer, PairValue::Atom(v, p)) => v
            .parse::<i64>()
            .map(AtomicValue::Integer)
            .map_err(|_| mismatch(format!("`{}`", v), *p)),
        (ValueType::QuarterDate, PairValue::List(entries)) => {
            let mut year: Option<i64> = None;
            let mut quarter: Option<i64> = None;
            for entry in entries {
                let (raw, pos) = match &entry.value {
                    PairValue::Atom(v, p) => (v, *p),
                    PairValue::List(_) => {
                        return Err(mismatch("nested list".into(), entry.key_pos))
                    }
                };
                let n = raw
                    .parse::<i64>()
                    .map_err(|_| mismatch(format!("`{}`", raw), pos))?;
                match entry.key.as_str() {
                    "year" if year.is_none() => year = Some(n),
                    "quarter" if quarter.is_none() => quarter = Some(n),
                    other => return Err(mismatch(format!("unexpected field `{}`", other), entry.key_pos)),
                }
            }
            let year = year.ok_or_else(|| mismatch("date without year".into(), pair.key_pos))?;
            let quarter = quarter.ok_or_else(|| mismatch("date without quarter".into(), pair.key_pos))?;
            let quarter = u8::try_from(quarter)
                .ok()
                .and_then(|q| QuarterDate::new(year, q))
                .ok_or_else(|| mismatch(format!("quarter {}", quarter), pair.key_pos))?;
            Ok(AtomicValue::Quarter(quarter))
        }
        (_, PairValue::Atom(v, p)) => Err(mismatch(format!("`{}`", v), *p)),
        (_, PairValue::List(_)) => Err(mismatch("list".into(), pair.key_pos)),
    }
}

/// Parses exactly one message from `text`; trailing content is an error.
pub fn parse_fd(text: &str, schema: &AttributeSchema) -> Result<Message, ParseError> {
    let mut parser = Parser::new(text);
    let open = parser.expect_lparen()?;
    let pairs = parser.pair_list(open)?;
    if !parser.at_end() {
        return Err(ParseError::Syntax {
            position: parser.here(),
            detail: "unexpected content after the message".into(),
        });
    }
    interpret(pairs, schema, MessageId::from(0))
}

/// Parses a stream of zero or more messages, assigning 0-based input-order
/// ids.
pub fn parse_fd_stream(text: &str, schema: &AttributeSchema) -> Result<Vec<Message>, ParseError> {
    let mut parser = Parser::new(text);
    let mut messages = Vec::new();
    while !parser.at_end() {
        let open = parser.expect_lparen()?;
        let pairs = parser.pair_list(open)?;
        messages.push(interpret(pairs, schema, MessageId::from(messages.len()))?);
    }
    Ok(messages)
}

/// Renders a message back to the parenthesized format. Attribute order
/// follows the schema declaration; `admin` is emitted only when present.
pub fn serialize_fd(msg: &Message, schema: &AttributeSchema) -> String {
    let mut out = String::from("((cat message)");
    if !msg.admin.is_empty() {
        out.push_str("\n (admin (");
        for (i, (k, v)) in msg.admin.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "({} {})", k, v);
        }
        out.push_str("))");
    }
    for decl in schema.attributes() {
        let Some(value) = msg.attrs.get(&decl.name) else { continue };
        match value {
            AtomicValue::Symbol(s) => {
                let _ = write!(out, "\n ({} {})", decl.name, s);
            }
            AtomicValue::Integer(n) => {
                let _ = write!(out, "\n ({} {})", decl.name, n);
            }
            AtomicValue::Quarter(q) => {
                let _ = write!(out, "\n ({} ((year {}) (quarter {})))", decl.name, q.year, q.quarter);
            }
        }
    }
    out.push(')');
    out
}

/// Renders a whole corpus, one message per blank-line-separated block.
pub fn serialize_fd_stream(msgs: &[Message], schema: &AttributeSchema) -> String {
    msgs.iter()
        .map(|m| serialize_fd(m, schema))
        .collect::<Vec<_>>()
        .join("\n\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::default_schema;

    const REFERENCE_FD: &str = r#"((cat message)
 (admin ((PLANDoc-message-name RDA)
         (runid r-reg1)))
 (class refinement)
 (action activation)
 (equipment-type  all-dlc)
 (csa-site 3134)
 (date ((year 1994) (quarter 3))))"#;

    #[test]
    fn parses_reference_message() {
        let schema = default_schema();
        let msg = parse_fd(REFERENCE_FD, &schema).unwrap();
        assert_eq!(msg.value("class"), Some(&AtomicValue::symbol("refinement")));
        assert_eq!(msg.value("action"), Some(&AtomicValue::symbol("activation")));
        assert_eq!(msg.value("equipment-type"), Some(&AtomicValue::symbol("all-dlc")));
        assert_eq!(msg.value("csa-site"), Some(&AtomicValue::symbol("3134")));
        assert_eq!(msg.value("date"), Some(&AtomicValue::quarter(1994, 3)));
        assert_eq!(msg.admin.get("PLANDoc-message-name").map(String::as_str), Some("RDA"));
        assert_eq!(msg.admin.get("runid").map(String::as_str), Some("r-reg1"));
    }

    #[test]
    fn missing_attribute_is_reported() {
        let schema = default_schema();
        let err = parse_fd("((cat message))", &schema).unwrap_err();
        assert!(matches!(err, ParseError::MissingAttribute { .. }));
    }

    #[test]
    fn unknown_attribute_is_reported() {
        let schema = default_schema();
        let err = parse_fd("((cat message) (bogus 1))", &schema).unwrap_err();
        assert!(matches!(err, ParseError::UnknownAttribute { ref name, .. } if name == "bogus"));
    }

    #[test]
    fn quarter_out_of_range_is_type_mismatch() {
        let schema = default_schema();
        let text = REFERENCE_FD.replace("(quarter 3)", "(quarter 5)");
        let err = parse_fd(&text, &schema).unwrap_err();
        assert!(matches!(err, ParseError::TypeMismatch { .. }));
    }

    #[test]
    fn unbalanced_input_is_reported_with_position() {
        let schema = default_schema();
        let err = parse_fd("((cat message) (class refinement)", &schema).unwrap_err();
        assert!(matches!(err, ParseError::UnbalancedParens { .. }));
    }

    #[test]
    fn duplicate_attribute_is_rejected() {
        let schema = default_schema();
        let text = REFERENCE_FD.replace("(csa-site 3134)", "(csa-site 3134) (csa-site 3130)");
        let err = parse_fd(&text, &schema).unwrap_err();
        assert!(matches!(err, ParseError::DuplicateAttribute { ref name, .. } if name == "csa-site"));
    }

    #[test]
    fn roundtrip_preserves_reference_message() {
        let schema = default_schema();
        let msg = parse_fd(REFERENCE_FD, &schema).unwrap();
        let text = serialize_fd(&msg, &schema);
        let back = parse_fd(&text, &schema).unwrap();
        assert_eq!(back, msg);
    }

    #[test]
    fn stream_assigns_input_order_ids() {
        let schema = default_schema();
        let one = parse_fd(REFERENCE_FD, &schema).unwrap();
        let text = serialize_fd_stream(&[one.clone(), one], &schema);
        let msgs = parse_fd_stream(&text, &schema).unwrap();
        assert_eq!(msgs.len(), 2);
        assert_eq!(msgs[0].id, MessageId::from(0));
        assert_eq!(msgs[1].id, MessageId::from(1));
    }

    #[test]
    fn arbitrary_junk_never_panics() {
        let schema = default_schema();
        for junk in ["", "(", ")", "((()))", "(cat", "hello world", "((a b) c)", "(()"] {
            let _ = parse_fd_stream(junk, &schema);
        }
    }
}
