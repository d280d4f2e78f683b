//! JSON-lines story records.
//!
//! One object per line:
//! `{"sentences": [..], "entities": {..}, "questions": [..], "provenance": ".."}`.
//! Sentences are stored as raw text and re-parsed on decode, so the record
//! stays readable by tools that know nothing about primitives.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{EntityKind, Primitive, Provenance, Question, Story};

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("failed to serialize story: {0}")]
    Serialize(#[from] serde_json::Error),
}

#[derive(Serialize, Deserialize)]
struct StoryRecord {
    sentences: Vec<String>,
    entities: BTreeMap<String, EntityKind>,
    questions: Vec<Question>,
    provenance: String,
}

/// Turns one sentence of raw text into a primitive.
pub trait SentenceParser {
    fn parse_sentence(&self, text: &str, index: usize) -> Result<Primitive, String>;
}

pub fn encode_story(story: &Story) -> Result<String, CodecError> {
    let record = StoryRecord {
        sentences: story.sentences.iter().map(|s| s.raw_text.clone()).collect(),
        entities: story.entities.clone(),
        questions: story.questions.clone(),
        provenance: story.provenance.to_string(),
    };
    Ok(serde_json::to_string(&record)?)
}

/// Decodes one record; `line` is 1-based and only used for error reports.
pub fn decode_story<P: SentenceParser + ?Sized>(record: &str, line: usize, parser: &P) -> Result<Story, CodecError> {
    let err = |message: String| CodecError::Parse { line, message };
    let raw: StoryRecord = serde_json::from_str(record).map_err(|e| err(e.to_string()))?;
    if raw.sentences.is_empty() {
        return Err(err("story has no sentences".into()));
    }
    let sentences = raw
        .sentences
        .iter()
        .enumerate()
        .map(|(i, text)| parser.parse_sentence(text, i).map_err(|m| err(format!("sentence {i}: {m}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let provenance: Provenance = raw.provenance.parse().map_err(|e: super::DomainError| err(e.to_string()))?;
    let story = Story { sentences, entities: raw.entities, questions: raw.questions, provenance };
    story.validate().map_err(|e| err(e.to_string()))?;
    Ok(story)
}

pub fn encode_corpus(stories: &[Story]) -> Result<String, CodecError> {
    let mut out = String::new();
    for story in stories {
        out.push_str(&encode_story(story)?);
        out.push('\n');
    }
    Ok(out)
}

/// Decodes a JSONL corpus, skipping blank lines.
pub fn decode_corpus<P: SentenceParser + ?Sized>(text: &str, parser: &P) -> Result<Vec<Story>, CodecError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| decode_story(l, i + 1, parser))
        .collect()
}
