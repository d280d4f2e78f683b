//! Sentence semantics: primitive parsing, resulting states, contradiction
//! checks and triple extraction, behind a pluggable backend.

mod bank;
mod remote;
mod rule;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Primitive, Triple};

pub use bank::{Template, TemplateBank, TemplateTag, DEFAULT_BANK};
pub use remote::{resulting_state_prompt, RemoteBackend, RemoteConfig, Task};
pub use rule::{extract_triple, strip_stopwords, RuleBackend, STOPWORDS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("ambiguous parse of {sentence:?}: templates {first:?} and {second:?} disagree")]
    AmbiguousParse { sentence: String, first: String, second: String },
    #[error("invalid template: {0}")]
    InvalidTemplate(String),
    #[error("sentence {index} could not be parsed: {text:?}")]
    UnparsedSentence { index: usize, text: String },
    #[error("no triple can be extracted from {0:?}")]
    ExtractionFailure(String),
    #[error("backend not configured: {0}")]
    NotConfigured(String),
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("backend timed out: {0}")]
    Timeout(String),
    #[error("backend rate limit hit")]
    RateLimited,
    #[error("backend protocol error: {0}")]
    BackendProtocolError(String),
}

impl SemanticsError {
    /// Transient failures worth another attempt.
    pub fn is_retryable(&self) -> bool {
        matches!(self, SemanticsError::BackendUnavailable(_) | SemanticsError::Timeout(_) | SemanticsError::RateLimited)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    Negative,
}

/// The fact that holds after a sentence's action.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResultingState {
    pub statement: String,
    pub polarity: Polarity,
    /// Present iff `polarity` is `Positive`.
    pub triple: Option<Triple>,
}

impl ResultingState {
    pub fn positive(statement: impl Into<String>, triple: Triple) -> Self {
        ResultingState { statement: statement.into(), polarity: Polarity::Positive, triple: Some(triple) }
    }

    pub fn negative(statement: impl Into<String>) -> Self {
        ResultingState { statement: statement.into(), polarity: Polarity::Negative, triple: None }
    }
}

impl fmt::Display for ResultingState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.statement)
    }
}

/// What the tracker and the question answerer need from a language
/// component.
pub trait SemanticBackend: Send + Sync {
    fn name(&self) -> &str;

    fn resulting_state(&self, sentence: &Primitive) -> Result<ResultingState, SemanticsError>;

    /// Does `state` (premise) contradict `edge` (hypothesis)?
    fn contradicts(&self, state: &ResultingState, edge: &Triple) -> Result<bool, SemanticsError>;

    /// Answers `question` about `target` from the ordered context sentences.
    /// `Ok(None)` means the context says nothing about the target.
    fn answer(&self, context: &[String], question: &str, target: &str) -> Result<Option<String>, SemanticsError>;
}

/// Renders an edge back into a plain sentence, for text-based backends.
pub fn triple_sentence(t: &Triple) -> String {
    let starts_upper = t.subject.chars().next().is_some_and(char::is_uppercase);
    let subject = if starts_upper { t.subject.clone() } else { format!("The {}", t.subject) };
    format!("{subject} {} the {}", t.relation.label, t.object)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Relation, Sentiment};

    #[test]
    fn triple_sentences() {
        assert_eq!(triple_sentence(&Triple::located("celery", "box")), "The celery is in the box");
        assert_eq!(triple_sentence(&Triple::located("Bob", "kitchen")), "Bob is in the kitchen");
        assert_eq!(
            triple_sentence(&Triple::new("Bob", Relation::opinion(Sentiment::Hates), "celery")),
            "Bob hates the celery"
        );
    }

    #[test]
    fn retryable_errors() {
        assert!(SemanticsError::RateLimited.is_retryable());
        assert!(SemanticsError::Timeout("x".into()).is_retryable());
        assert!(!SemanticsError::BackendProtocolError("x".into()).is_retryable());
    }
}
