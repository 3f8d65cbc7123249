//! Combines similar attribute-value messages into concise, coordinated
//! English report sentences.
//!
//! The pipeline: parse messages (s-expression or JSON-lines), canonicalize
//! symbol casing, validate against a schema, group by action, rank and sort
//! by attribute similarity, merge runs differing in one attribute into
//! conjunctions (recursively, producing crossing conjunctions), break the
//! result into sentences, mark identity deletions, and realize text from a
//! lexicon of verbs and phrase templates. A brute-force expansion oracle
//! inverts plans back to atomic messages for verification.

pub mod aggregate;
pub mod config;
pub mod error;
pub mod fd;
pub mod gen;
pub mod jsonl;
pub mod message;
pub mod oracle;
pub mod plan;
pub mod realize;
pub mod schema;
pub mod value;

pub use aggregate::{aggregate, AggregateOptions, Ranking, Step};
pub use config::{default_lexicon, default_schema, Options, RunConfig};
pub use error::{ConfigError, OracleError, ParseError, RealizeError};
pub use message::{validate_messages, Message, MessageId};
pub use oracle::{conciseness_stats, expand_plan, ConcisenessReport};
pub use plan::DocumentPlan;
pub use realize::{
    canonicalize, realize_baseline, realize_document, DateStyle, Lexicon, RenderOptions,
};
pub use schema::{AttributeSchema, ValueType};
pub use value::{AtomicValue, QuarterDate, Value};
