//! Labelled story generators.
//!
//! Every generator only writes the event sequence; sentence text comes from
//! the template bank and every gold label from the oracle.

mod robust;
mod tomi;
mod vocab;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::domain::{EntityKind, Primitive, PrimitiveKind, Provenance, Question, QuestionType, Sentiment, Story};
use crate::oracle::{simulate, OracleError};
use crate::semantics::{TemplateBank, TemplateTag};

pub use robust::{d1_story, d2_story, d3_story, third_order_chains};
pub use tomi::{tomi_story, Variant};
pub use vocab::Vocab;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("vocabulary has {have} {what}, {need} needed")]
    VocabExhausted { what: &'static str, need: usize, have: usize },
    #[error("vocabulary lists overlap on {0:?}")]
    VocabOverlap(String),
    #[error("labelling failed: {0}")]
    Oracle(#[from] OracleError),
    #[error("no template renders {0}")]
    Render(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GenSet {
    Tomi,
    D1,
    D2,
    D3,
}

impl GenSet {
    pub const ALL: [GenSet; 4] = [GenSet::Tomi, GenSet::D1, GenSet::D2, GenSet::D3];

    pub fn provenance(self) -> Provenance {
        match self {
            GenSet::Tomi => Provenance::TomiFixed,
            GenSet::D1 => Provenance::D1,
            GenSet::D2 => Provenance::D2,
            GenSet::D3 => Provenance::D3,
        }
    }

    fn stream(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for GenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GenSet::Tomi => "tomi",
            GenSet::D1 => "d1",
            GenSet::D2 => "d2",
            GenSet::D3 => "d3",
        })
    }
}

impl FromStr for GenSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GenSet::ALL.into_iter().find(|g| g.to_string() == s).ok_or_else(|| format!("unknown story set {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenConfig {
    pub seed: u64,
    pub vocab: Vocab,
    /// Rewrite every sentence with a random paraphrase.
    pub paraphrase: bool,
    pub count: usize,
    /// Depth the corpus is meant for; questions deeper than this are still
    /// emitted.
    pub m: usize,
}

impl GenConfig {
    pub fn new(seed: u64, count: usize) -> Self {
        GenConfig { seed, vocab: Vocab::default(), paraphrase: false, count, m: 2 }
    }
}

/// Generator for story `index`: a ChaCha stream keyed by set and index.
pub fn story_rng(seed: u64, set: GenSet, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((set.stream() << 40) | index as u64);
    rng
}

/// Draws `n` distinct words from `pool`.
pub(crate) fn pick<'v, R: Rng>(
    rng: &mut R,
    pool: &'v [String],
    n: usize,
    what: &'static str,
) -> Result<Vec<&'v str>, GenError> {
    if pool.len() < n {
        return Err(GenError::VocabExhausted { what, need: n, have: pool.len() });
    }
    Ok(pool.choose_multiple(rng, n).map(String::as_str).collect())
}

/// How a belief question is worded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phrasing {
    /// "Where will A look for the o?" / "Where will A think that B will look for the o?"
    Look,
    /// "Where does A think the o is?" / "Where does A think that B thinks the o is?"
    Think,
    /// "Where does A think that B searches for the o?", and "thinks that" for
    /// every further link.
    Search,
}

pub fn belief_question(chain: &[&str], object: &str, phrasing: Phrasing) -> String {
    match (chain, phrasing) {
        ([a], Phrasing::Look | Phrasing::Search) => format!("Where will {a} look for the {object}?"),
        ([a], Phrasing::Think) => format!("Where does {a} think the {object} is?"),
        ([a, b], Phrasing::Look) => format!("Where will {a} think that {b} will look for the {object}?"),
        ([a, b], Phrasing::Think) => format!("Where does {a} think that {b} thinks the {object} is?"),
        ([a, b], Phrasing::Search) => format!("Where does {a} think that {b} searches for the {object}?"),
        _ => {
            let (last, rest) = chain.split_last().expect("belief chain is non-empty");
            let (first, middle) = rest.split_first().expect("chain of three or more");
            let mut q = format!("Where does {first} think that ");
            for p in middle {
                q.push_str(&format!("{p} thinks that "));
            }
            q.push_str(&format!("{last} will search for the {object}?"));
            q
        }
    }
}

pub fn reality_question(object: &str) -> String {
    format!("Where is the {object} really?")
}

pub fn memory_question(object: &str) -> String {
    format!("Where was the {object} at the beginning?")
}

/// A question to label: a belief chain with its wording, or a reality or
/// memory question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ask {
    Belief(Vec<String>, Phrasing),
    Reality,
    Memory,
}

/// Event sequence plus entity table for a story under construction.
#[derive(Debug, Clone, Default)]
pub struct Draft {
    pub events: Vec<PrimitiveKind>,
    pub entities: BTreeMap<String, EntityKind>,
}

impl Draft {
    fn declare(&mut self, name: &str, kind: EntityKind) {
        self.entities.insert(name.to_string(), kind);
    }

    pub fn enter(&mut self, who: &str, room: &str) -> &mut Self {
        self.declare(who, EntityKind::Character);
        self.declare(room, EntityKind::Room);
        self.events.push(PrimitiveKind::Enter { character: who.into(), room: room.into() });
        self
    }

    pub fn exit(&mut self, who: &str, room: &str) -> &mut Self {
        self.events.push(PrimitiveKind::Exit { character: who.into(), room: room.into() });
        self
    }

    pub fn is_in(&mut self, who: &str, room: &str) -> &mut Self {
        self.declare(who, EntityKind::Character);
        self.declare(room, EntityKind::Room);
        self.events.push(PrimitiveKind::PersonLocation { character: who.into(), room: room.into() });
        self
    }

    /// An object placed in a container, followed by the container's room.
    pub fn place(&mut self, object: &str, container: &str, room: &str) -> &mut Self {
        self.declare(object, EntityKind::Object);
        self.declare(container, EntityKind::Container);
        self.events.push(PrimitiveKind::ObjectLocation { thing: object.into(), location: container.into() });
        self.container_in(container, room)
    }

    /// A move, followed by the target container's room.
    pub fn move_to(&mut self, who: &str, object: &str, container: &str, room: &str) -> &mut Self {
        self.declare(container, EntityKind::Container);
        self.events.push(PrimitiveKind::Move {
            character: who.into(),
            object: object.into(),
            container: container.into(),
        });
        self.container_in(container, room)
    }

    fn container_in(&mut self, container: &str, room: &str) -> &mut Self {
        self.declare(room, EntityKind::Room);
        self.events.push(PrimitiveKind::ObjectLocation { thing: container.into(), location: room.into() });
        self
    }

    pub fn opinion(&mut self, who: &str, object: &str, sentiment: Sentiment) -> &mut Self {
        self.declare(object, EntityKind::Object);
        self.events.push(PrimitiveKind::Opinion { character: who.into(), object: object.into(), sentiment });
        self
    }

    /// Renders with canonical templates and labels `asks` with the oracle.
    pub fn finish(self, bank: &TemplateBank, asks: &[(&str, Ask)], provenance: Provenance) -> Result<Story, GenError> {
        let sentences = self
            .events
            .into_iter()
            .enumerate()
            .map(|(index, kind)| {
                let raw_text = bank.render_canonical(&kind).ok_or_else(|| GenError::Render(kind.tag().into()))?;
                Ok(Primitive { kind, raw_text, index })
            })
            .collect::<Result<Vec<_>, GenError>>()?;
        let mut story = Story { sentences, entities: self.entities, questions: vec![], provenance };
        story.questions = label(&story, asks)?;
        Ok(story)
    }
}

fn label(story: &Story, asks: &[(&str, Ask)]) -> Result<Vec<Question>, GenError> {
    let trace = simulate(story)?;
    let mut out = Vec::with_capacity(asks.len());
    for &(target, ref ask) in asks {
        let reality = trace.reality(target).ok_or_else(|| OracleError::NeverPlaced(target.to_string()))?.to_string();
        out.push(match ask {
            Ask::Belief(chain, phrasing) => {
                let gold = trace.nested_belief(chain, target)?.to_string();
                let refs: Vec<&str> = chain.iter().map(String::as_str).collect();
                Question {
                    text: belief_question(&refs, target, *phrasing),
                    order: chain.len(),
                    qtype: if gold == reality { QuestionType::TrueBelief } else { QuestionType::FalseBelief },
                    chain: chain.clone(),
                    target: target.to_string(),
                    gold,
                }
            }
            Ask::Reality => Question {
                text: reality_question(target),
                order: 0,
                qtype: QuestionType::Reality,
                chain: vec![],
                target: target.to_string(),
                gold: reality,
            },
            Ask::Memory => Question {
                text: memory_question(target),
                order: 0,
                qtype: QuestionType::Memory,
                chain: vec![],
                target: target.to_string(),
                gold: trace.memory(target).ok_or_else(|| OracleError::NeverPlaced(target.to_string()))?.to_string(),
            },
        });
    }
    Ok(out)
}

/// Rewrites every sentence with a uniformly drawn paraphrase of its
/// primitive. Questions and entities are untouched.
pub fn paraphrase_story<R: Rng>(story: &Story, bank: &TemplateBank, rng: &mut R) -> Story {
    let sentences = story
        .sentences
        .iter()
        .map(|s| {
            let raw_text = TemplateTag::of(&s.kind)
                .and_then(|tag| bank.paraphrases(tag).choose(rng))
                .and_then(|t| t.render(&s.kind))
                .unwrap_or_else(|| s.raw_text.clone());
            Primitive { kind: s.kind.clone(), raw_text, index: s.index }
        })
        .collect();
    let provenance = match &story.provenance {
        p @ Provenance::Paraphrased(_) => p.clone(),
        p => Provenance::Paraphrased(Box::new(p.clone())),
    };
    Story { sentences, entities: story.entities.clone(), questions: story.questions.clone(), provenance }
}

/// Generates `cfg.count` stories of `set`, in parallel and in index order.
pub fn generate(set: GenSet, cfg: &GenConfig, bank: &TemplateBank) -> Result<Vec<Story>, GenError> {
    if let Some(w) = cfg.vocab.overlap() {
        return Err(GenError::VocabOverlap(w.to_string()));
    }
    (0..cfg.count)
        .into_par_iter()
        .map(|i| {
            let mut rng = story_rng(cfg.seed, set, i);
            let story = match set {
                GenSet::Tomi => tomi_story(&cfg.vocab, bank, &mut rng)?,
                GenSet::D1 => d1_story(&cfg.vocab, bank, &mut rng)?,
                GenSet::D2 => d2_story(&cfg.vocab, bank, &mut rng)?,
                GenSet::D3 => d3_story(&cfg.vocab, bank, &mut rng)?,
            };
            Ok(if cfg.paraphrase { paraphrase_story(&story, bank, &mut rng) } else { story })
        })
        .collect()
}
