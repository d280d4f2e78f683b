//! Question answering over a finished belief state: parse the question,
//! pick the graph, rebuild the sentences it represents, filter them and
//! ask the backend.

use std::sync::OnceLock;

use regex::Regex;
use serde::Serialize;
use thiserror::Error;

use crate::beliefgraph::BeliefGraph;
use crate::domain::{canonicalize_key, DomainError, EntityKind, Story, Triple};
use crate::semantics::{strip_stopwords, SemanticBackend, SemanticsError};
use crate::tracker::BeliefState;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QaError {
    #[error("unrecognized question {0:?}")]
    UnrecognizedQuestion(String),
    #[error("unknown character {0:?}")]
    UnknownCharacter(String),
    #[error("no graph was built for {0}")]
    MissingGraph(String),
    #[error("the context says nothing about the {0}")]
    NoAnswer(String),
    #[error("answer {0:?} is not a container of the story")]
    AnswerNotAnEntity(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QuestionMode {
    Belief,
    Reality,
    Memory,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParsedQuestion {
    pub chain: Vec<String>,
    pub rewritten: String,
    pub target: String,
    pub mode: QuestionMode,
}

/// One sentence of S′ with the edge it stands for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContextSentence {
    pub index: usize,
    pub text: String,
    pub triple: Triple,
}

const SEARCH_PHRASES: &[&str] = &[" look for the ", " looks for the ", " search for the ", " searches for the "];
const FILLER: &[&str] = &["Where", "will", "does", "do", "did"];

fn reality_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^Where is the (?P<obj>.+?) really\?$").expect("valid regex"))
}

fn memory_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^Where was the (?P<obj>.+?) at the beginning\?$").expect("valid regex"))
}

fn think_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(?P<head>.*) thinks? (?:that )?(?:the )?(?P<obj>.+?) is$").expect("valid regex"))
}

fn split_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r" thinks? that ").expect("valid regex"))
}

/// Turns a templated question into a chain and a world-state question.
pub fn process_question(text: &str) -> Result<ParsedQuestion, QaError> {
    let unrecognized = || QaError::UnrecognizedQuestion(text.to_string());
    let q = text.trim();
    let simple = |mode, obj: &str| ParsedQuestion {
        chain: vec![],
        rewritten: format!("Where is the {obj}?"),
        target: obj.to_string(),
        mode,
    };
    if let Some(c) = reality_re().captures(q) {
        return Ok(simple(QuestionMode::Reality, &c["obj"]));
    }
    if let Some(c) = memory_re().captures(q) {
        return Ok(simple(QuestionMode::Memory, &c["obj"]));
    }
    let body = q.strip_suffix('?').ok_or_else(unrecognized)?;
    let (head, obj) = match SEARCH_PHRASES.iter().filter_map(|p| body.rfind(p).map(|i| (i, p))).max() {
        Some((i, phrase)) => (&body[..i], &body[i + phrase.len()..]),
        None => {
            let c = think_re().captures(body).ok_or_else(unrecognized)?;
            let (h, o) = (c.name("head").unwrap(), c.name("obj").unwrap());
            (&body[h.start()..h.end()], &body[o.start()..o.end()])
        }
    };
    if obj.is_empty() || !head.starts_with("Where ") {
        return Err(unrecognized());
    }
    let mut chain = Vec::new();
    for segment in split_re().split(head) {
        let names: Vec<&str> = segment.split_whitespace().filter(|w| !FILLER.contains(w)).collect();
        match names.as_slice() {
            [name] => chain.push(name.to_string()),
            _ => return Err(unrecognized()),
        }
    }
    Ok(ParsedQuestion {
        chain,
        rewritten: format!("Where is the {obj}?"),
        target: obj.to_string(),
        mode: QuestionMode::Belief,
    })
}

/// Picks the graph that answers `q`.
///
/// Chains longer than the state's depth are read from the consecutive
/// depth-length windows of the chain; the window whose record of the
/// target is oldest wins, since belief along a chain is bounded by its
/// least informed link.
pub fn retrieve_graph<'s>(state: &'s BeliefState, q: &ParsedQuestion) -> Result<&'s BeliefGraph, QaError> {
    match q.mode {
        QuestionMode::Reality => Ok(&state.global),
        QuestionMode::Memory => {
            let first = state.first_location.get(&q.target).ok_or_else(|| QaError::NoAnswer(q.target.clone()))?;
            Ok(&state.history[*first])
        }
        QuestionMode::Belief => {
            if let Some(c) = q.chain.iter().find(|c| !state.characters().contains(*c)) {
                return Err(QaError::UnknownCharacter(c.clone()));
            }
            let fetch = |chain: &[String]| {
                let key = canonicalize_key(chain, state.m)?;
                state.locals.get(&key).ok_or_else(|| QaError::MissingGraph(key.to_string()))
            };
            if q.chain.len() <= state.m {
                return fetch(&q.chain);
            }
            let mut best: Option<(usize, &BeliefGraph)> = None;
            for window in q.chain.windows(state.m) {
                let g = fetch(window)?;
                let prov = g.location_of(&q.target).map_or(usize::MAX, |(_, p)| p);
                if best.is_none_or(|(p, _)| prov < p) {
                    best = Some((prov, g));
                }
            }
            Ok(best.expect("chain longer than m has at least one window").1)
        }
    }
}

/// S′: the sentences a graph was built from, in story order.
pub fn context_of(graph: &BeliefGraph, story: &Story) -> Vec<ContextSentence> {
    graph
        .represented()
        .into_iter()
        .filter_map(|(index, triple)| {
            story.sentences.get(index).map(|s| ContextSentence { index, text: s.raw_text.clone(), triple })
        })
        .collect()
}

/// S″: the sentences whose edge touches a chain character or the target.
pub fn filter_based_on_question(context: &[ContextSentence], q: &ParsedQuestion) -> Vec<ContextSentence> {
    context
        .iter()
        .filter(|c| c.triple.touches(&q.target) || q.chain.iter().any(|p| c.triple.touches(p)))
        .cloned()
        .collect()
}

/// Asks the backend and maps its reply onto a container of the story.
pub fn answer(
    backend: &dyn SemanticBackend,
    context: &[ContextSentence],
    q: &ParsedQuestion,
    story: &Story,
) -> Result<String, QaError> {
    let texts: Vec<String> = context.iter().map(|c| c.text.clone()).collect();
    let raw = backend.answer(&texts, &q.rewritten, &q.target)?.ok_or_else(|| QaError::NoAnswer(q.target.clone()))?;
    normalize_answer(&raw, story).ok_or(QaError::AnswerNotAnEntity(raw))
}

/// Case-insensitive match of a free-text answer against the containers.
pub fn normalize_answer(raw: &str, story: &Story) -> Option<String> {
    let cleaned = strip_stopwords(raw.trim().trim_end_matches('.'));
    story.entities_of(EntityKind::Container).find(|c| c.eq_ignore_ascii_case(&cleaned)).map(String::from)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Answered {
    pub parsed: ParsedQuestion,
    pub context: Vec<ContextSentence>,
    pub prediction: String,
}

/// The whole question path. With `filter` off, S′ goes to the backend
/// unfiltered.
pub fn answer_question(
    state: &BeliefState,
    story: &Story,
    text: &str,
    backend: &dyn SemanticBackend,
    filter: bool,
) -> Result<Answered, QaError> {
    let parsed = process_question(text)?;
    let graph = retrieve_graph(state, &parsed)?;
    let mut context = context_of(graph, story);
    if filter {
        context = filter_based_on_question(&context, &parsed);
    }
    let prediction = answer(backend, &context, &parsed, story)?;
    Ok(Answered { parsed, context, prediction })
}
