//! Corpus evaluation against gold labels, with baselines and ablations.

mod config;
mod report;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{canonicalize_key, encode_story, PrimitiveKind, Question, QuestionType, Story};
use crate::qa::{answer_question, process_question, QaError};
use crate::semantics::SemanticBackend;
use crate::tracker::{BeliefState, KeyMode, Tracker, TrackerOptions};

pub use config::{FileConfig, RunConfig};
pub use report::{check_assertions, parse_assertion, Assertion, Comparison, TypeFilter};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("bad assertion {0:?}")]
    BadAssertion(String),
    #[error("bad configuration: {0}")]
    Config(String),
    #[error("no failure with id {0:?}")]
    UnknownFailure(String),
    #[error(transparent)]
    Codec(#[from] crate::domain::CodecError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    /// Answer every question with where the object really is.
    Reality,
    /// Answer with the last location the story text gives the object.
    LastMention,
}

impl std::str::FromStr for Baseline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reality" => Ok(Baseline::Reality),
            "last-mention" => Ok(Baseline::LastMention),
            other => Err(format!("unknown baseline {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub m: usize,
    /// Apply the question filter to the retrieved sentences.
    pub filter: bool,
    pub baseline: Option<Baseline>,
    /// Build only the graphs the questions need.
    pub lazy: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { m: 2, filter: true, baseline: None, lazy: false }
    }
}

/// Row label for a question: order and belief type.
pub fn label_of(q: &Question) -> String {
    let ordinal = |k: usize| match k {
        1 => "1st".to_string(),
        2 => "2nd".to_string(),
        3 => "3rd".to_string(),
        k => format!("{k}th"),
    };
    match q.qtype {
        QuestionType::TrueBelief => format!("{} TB", ordinal(q.order)),
        QuestionType::FalseBelief => format!("{} FB", ordinal(q.order)),
        QuestionType::Reality => "Reality".into(),
        QuestionType::Memory => "Memory".into(),
    }
}

/// Fixed display order of row labels.
pub const LABEL_ORDER: &[&str] = &["1st TB", "1st FB", "2nd TB", "2nd FB", "3rd TB", "3rd FB", "Reality", "Memory"];

fn label_rank(label: &str) -> usize {
    LABEL_ORDER.iter().position(|l| *l == label).unwrap_or(LABEL_ORDER.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Counts {
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

impl Counts {
    fn add(&mut self, correct: bool) {
        self.total += 1;
        self.correct += usize::from(correct);
        self.accuracy = self.correct as f64 / self.total as f64;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub set: String,
    pub label: String,
    #[serde(flatten)]
    pub counts: Counts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub story: usize,
    pub question: usize,
    pub predicted: Option<String>,
    pub gold: String,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    /// `<story>:<question>`
    pub id: String,
    pub story: usize,
    pub question: usize,
    pub text: String,
    pub predicted: Option<String>,
    pub gold: String,
    pub error: Option<String>,
    /// The story as a corpus line, so the question can be re-run alone.
    pub record: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub backend: String,
    pub options: EvalOptions,
    pub rows: Vec<Row>,
    pub total: Counts,
    pub predictions: Vec<Prediction>,
    pub failures: Vec<Failure>,
}

impl EvalReport {
    pub fn row(&self, set: &str, label: &str) -> Option<&Counts> {
        self.rows.iter().find(|r| r.set == set && r.label == label).map(|r| &r.counts)
    }

    /// Counts pooled over every set for one label.
    pub fn pooled(&self, label: &str) -> Counts {
        let mut c = Counts::default();
        for r in self.rows.iter().filter(|r| r.label == label) {
            c.correct += r.counts.correct;
            c.total += r.counts.total;
        }
        c.accuracy = if c.total == 0 { 0.0 } else { c.correct as f64 / c.total as f64 };
        c
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn failure(&self, id: &str) -> Result<&Failure, HarnessError> {
        self.failures.iter().find(|f| f.id == id).ok_or_else(|| HarnessError::UnknownFailure(id.to_string()))
    }
}

/// Runs the tracker for one story; lazy mode only builds the keys its
/// questions need.
pub fn track(story: &Story, backend: &dyn SemanticBackend, opts: &EvalOptions) -> Result<BeliefState, String> {
    let keys = if opts.lazy {
        let mut keys = std::collections::BTreeSet::new();
        for q in &story.questions {
            let Ok(parsed) = process_question(&q.text) else { continue };
            let chain = &parsed.chain;
            let windows: Vec<&[String]> =
                if chain.len() > opts.m { chain.windows(opts.m).collect() } else { vec![chain.as_slice()] };
            for w in windows.into_iter().filter(|w| !w.is_empty()) {
                keys.insert(canonicalize_key(w, opts.m).map_err(|e| e.to_string())?);
            }
        }
        KeyMode::Only(keys)
    } else {
        KeyMode::All
    };
    let options = TrackerOptions { m: opts.m, keys, trace: false };
    Tracker::new(backend, options).run(story).map_err(|e| e.to_string())
}

fn last_mention(story: &Story, target: &str) -> Option<String> {
    story.sentences.iter().rev().find_map(|s| match &s.kind {
        PrimitiveKind::ObjectLocation { thing, location } if thing == target => Some(location.clone()),
        PrimitiveKind::Move { object, container, .. } if object == target => Some(container.clone()),
        _ => None,
    })
}

/// Answers one question of a story whose belief state is `state`.
pub fn predict(
    story: &Story,
    state: Option<&BeliefState>,
    q: &Question,
    backend: &dyn SemanticBackend,
    opts: &EvalOptions,
) -> Result<String, String> {
    match opts.baseline {
        Some(Baseline::LastMention) => {
            last_mention(story, &q.target).ok_or_else(|| QaError::NoAnswer(q.target.clone()).to_string())
        }
        Some(Baseline::Reality) => {
            let parsed = process_question(&q.text).map_err(|e| e.to_string())?;
            let state = state.ok_or("no belief state")?;
            state
                .global
                .location_of(&parsed.target)
                .map(|(c, _)| c.to_string())
                .ok_or_else(|| QaError::NoAnswer(parsed.target).to_string())
        }
        None => {
            let state = state.ok_or("no belief state")?;
            answer_question(state, story, &q.text, backend, opts.filter)
                .map(|a| a.prediction)
                .map_err(|e| e.to_string())
        }
    }
}

struct StoryResult {
    scored: Vec<(String, String, bool)>,
    predictions: Vec<Prediction>,
    failures: Vec<Failure>,
}

fn eval_story(id: usize, story: &Story, backend: &dyn SemanticBackend, opts: &EvalOptions) -> StoryResult {
    let state = match opts.baseline {
        Some(Baseline::LastMention) => Ok(None),
        _ => track(story, backend, opts).map(Some),
    };
    let mut out = StoryResult { scored: vec![], predictions: vec![], failures: vec![] };
    let set = story.provenance.to_string();
    for (qi, q) in story.questions.iter().enumerate() {
        let result = match &state {
            Ok(s) => predict(story, s.as_ref(), q, backend, opts),
            Err(e) => Err(e.clone()),
        };
        let (predicted, error) = match result {
            Ok(p) => (Some(p), None),
            Err(e) => (None, Some(e)),
        };
        let correct = predicted.as_deref() == Some(q.gold.as_str());
        out.scored.push((set.clone(), label_of(q), correct));
        out.predictions.push(Prediction {
            story: id,
            question: qi,
            predicted: predicted.clone(),
            gold: q.gold.clone(),
            correct,
        });
        if !correct {
            out.failures.push(Failure {
                id: format!("{id}:{qi}"),
                story: id,
                question: qi,
                text: q.text.clone(),
                predicted,
                gold: q.gold.clone(),
                error,
                record: encode_story(story).unwrap_or_default(),
            });
        }
    }
    out
}

/// Answers every question of every story and scores it against its gold
/// label. Per-question errors count as wrong answers.
pub fn evaluate(corpus: &[Story], backend: &dyn SemanticBackend, opts: &EvalOptions) -> EvalReport {
    let results: Vec<StoryResult> =
        corpus.par_iter().enumerate().map(|(i, s)| eval_story(i, s, backend, opts)).collect();
    let mut rows: BTreeMap<(String, usize, String), Counts> = BTreeMap::new();
    let mut total = Counts::default();
    let mut predictions = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        for (set, label, ok) in r.scored {
            let rank = label_rank(&label);
            rows.entry((set, rank, label)).or_default().add(ok);
            total.add(ok);
        }
        predictions.extend(r.predictions);
        failures.extend(r.failures);
    }
    EvalReport {
        backend: backend.name().to_string(),
        options: opts.clone(),
        rows: rows.into_iter().map(|((set, _, label), counts)| Row { set, label, counts }).collect(),
        total,
        predictions,
        failures,
    }
}

/// Re-runs the question behind one failure record.
pub fn replay(
    failure: &Failure,
    backend: &dyn SemanticBackend,
    opts: &EvalOptions,
    parser: &dyn crate::domain::SentenceParser,
) -> Result<Result<String, String>, HarnessError> {
    let story = crate::domain::decode_story(&failure.record, failure.story + 1, parser)?;
    let q = story.questions.get(failure.question).ok_or_else(|| HarnessError::UnknownFailure(failure.id.clone()))?;
    let state = match opts.baseline {
        Some(Baseline::LastMention) => None,
        _ => match track(&story, backend, opts) {
            Ok(s) => Some(s),
            Err(e) => return Ok(Err(e)),
        },
    };
    Ok(predict(&story, state.as_ref(), q, backend, opts))
}
