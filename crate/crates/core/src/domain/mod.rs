//! Shared vocabulary: entities, relations, parsed sentences, stories,
//! questions and belief keys.

mod codec;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use codec::{decode_corpus, decode_story, encode_corpus, encode_story, CodecError, SentenceParser};

/// Relation label for every location fact.
pub const IS_IN: &str = "is in";
pub const LIKES: &str = "likes";
pub const HATES: &str = "hates";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error("belief chain is empty")]
    EmptyChain,
    #[error("belief chain of length {len} exceeds depth {depth}")]
    DepthExceeded { len: usize, depth: usize },
    #[error("invalid story: {0}")]
    InvalidStory(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Character,
    Object,
    Container,
    Room,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Entity {
    pub name: String,
    pub kind: EntityKind,
}

/// Spatial relations drive connectivity; opinion relations never do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationClass {
    Spatial,
    Opinion,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Relation {
    pub label: String,
    pub class: RelationClass,
}

impl Relation {
    pub fn is_in() -> Self {
        Relation { label: IS_IN.to_string(), class: RelationClass::Spatial }
    }

    pub fn opinion(sentiment: Sentiment) -> Self {
        Relation { label: sentiment.label().to_string(), class: RelationClass::Opinion }
    }

    /// Looks a label up in the fixed relation table.
    pub fn from_label(label: &str) -> Option<Self> {
        match label {
            IS_IN => Some(Self::is_in()),
            LIKES => Some(Self::opinion(Sentiment::Likes)),
            HATES => Some(Self::opinion(Sentiment::Hates)),
            _ => None,
        }
    }
}

/// A graph edge payload: `(subject, relation, object)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub subject: String,
    pub relation: Relation,
    pub object: String,
}

impl Triple {
    pub fn new(subject: impl Into<String>, relation: Relation, object: impl Into<String>) -> Self {
        Triple { subject: subject.into(), relation, object: object.into() }
    }

    pub fn located(subject: impl Into<String>, location: impl Into<String>) -> Self {
        Self::new(subject, Relation::is_in(), location)
    }

    pub fn is_spatial(&self) -> bool {
        self.relation.class == RelationClass::Spatial
    }

    pub fn touches(&self, entity: &str) -> bool {
        self.subject == entity || self.object == entity
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.subject, self.relation.label, self.object)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Likes,
    Hates,
}

impl Sentiment {
    pub fn label(self) -> &'static str {
        match self {
            Sentiment::Likes => LIKES,
            Sentiment::Hates => HATES,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Sentiment::Likes => Sentiment::Hates,
            Sentiment::Hates => Sentiment::Likes,
        }
    }
}

/// Semantic content of one story sentence.
///
/// `ObjectLocation` also covers container disambiguation sentences such as
/// "The basket is in the front yard.", where the thing is a container and
/// the location a room.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PrimitiveKind {
    Enter {
        character: String,
        room: String,
    },
    Exit {
        character: String,
        room: String,
    },
    ObjectLocation {
        thing: String,
        location: String,
    },
    PersonLocation {
        character: String,
        room: String,
    },
    Move {
        character: String,
        object: String,
        container: String,
    },
    Opinion {
        character: String,
        object: String,
        sentiment: Sentiment,
    },
    /// No rule template matched; only a remote backend can interpret it.
    Unparsed,
}

impl PrimitiveKind {
    /// Every entity name the primitive mentions, in slot order.
    pub fn entities(&self) -> Vec<&str> {
        match self {
            PrimitiveKind::Enter { character, room }
            | PrimitiveKind::Exit { character, room }
            | PrimitiveKind::PersonLocation { character, room } => vec![character, room],
            PrimitiveKind::ObjectLocation { thing, location } => vec![thing, location],
            PrimitiveKind::Move { character, object, container } => vec![character, object, container],
            PrimitiveKind::Opinion { character, object, .. } => vec![character, object],
            PrimitiveKind::Unparsed => vec![],
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            PrimitiveKind::Enter { .. } => "enter",
            PrimitiveKind::Exit { .. } => "exit",
            PrimitiveKind::ObjectLocation { .. } => "object_position",
            PrimitiveKind::PersonLocation { .. } => "person_position",
            PrimitiveKind::Move { .. } => "move",
            PrimitiveKind::Opinion { sentiment: Sentiment::Likes, .. } => "opinion_positive",
            PrimitiveKind::Opinion { sentiment: Sentiment::Hates, .. } => "opinion_negative",
            PrimitiveKind::Unparsed => "unparsed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Primitive {
    pub kind: PrimitiveKind,
    /// The story sentence, byte for byte.
    pub raw_text: String,
    pub index: usize,
}

/// A character chain canonicalized to exactly `depth` members.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BeliefKey(Vec<String>);

impl BeliefKey {
    pub fn chain(&self) -> &[String] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    /// Distinct members in first-mention order.
    pub fn members(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::with_capacity(self.0.len());
        for c in &self.0 {
            if !out.contains(&c.as_str()) {
                out.push(c);
            }
        }
        out
    }
}

impl fmt::Display for BeliefKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0.join(","))
    }
}

/// Pads `chain` to length `depth` by repeating its last element, since
/// what p thinks that p thinks is what p thinks.
pub fn canonicalize_key<S: AsRef<str>>(chain: &[S], depth: usize) -> Result<BeliefKey, DomainError> {
    let last = chain.last().ok_or(DomainError::EmptyChain)?;
    if chain.len() > depth {
        return Err(DomainError::DepthExceeded { len: chain.len(), depth });
    }
    let mut out: Vec<String> = chain.iter().map(|c| c.as_ref().to_string()).collect();
    out.resize(depth, last.as_ref().to_string());
    Ok(BeliefKey(out))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Provenance {
    TomiFixed,
    D1,
    D2,
    D3,
    Paraphrased(Box<Provenance>),
}

impl Provenance {
    pub fn base(&self) -> &Provenance {
        match self {
            Provenance::Paraphrased(inner) => inner.base(),
            other => other,
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::TomiFixed => f.write_str("tomi"),
            Provenance::D1 => f.write_str("d1"),
            Provenance::D2 => f.write_str("d2"),
            Provenance::D3 => f.write_str("d3"),
            Provenance::Paraphrased(base) => write!(f, "paraphrased:{base}"),
        }
    }
}

impl std::str::FromStr for Provenance {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tomi" => Ok(Provenance::TomiFixed),
            "d1" => Ok(Provenance::D1),
            "d2" => Ok(Provenance::D2),
            "d3" => Ok(Provenance::D3),
            other => match other.strip_prefix("paraphrased:") {
                Some(base) => Ok(Provenance::Paraphrased(Box::new(base.parse()?))),
                None => Err(DomainError::InvalidStory(format!("unknown provenance {other:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionType {
    TrueBelief,
    FalseBelief,
    Reality,
    Memory,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Question {
    pub text: String,
    pub order: usize,
    pub qtype: QuestionType,
    pub chain: Vec<String>,
    pub target: String,
    pub gold: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Story {
    pub sentences: Vec<Primitive>,
    pub entities: BTreeMap<String, EntityKind>,
    pub questions: Vec<Question>,
    pub provenance: Provenance,
}

impl Story {
    pub fn kind_of(&self, name: &str) -> Option<EntityKind> {
        self.entities.get(name).copied()
    }

    pub fn is_character(&self, name: &str) -> bool {
        self.kind_of(name) == Some(EntityKind::Character)
    }

    pub fn characters(&self) -> impl Iterator<Item = &str> {
        self.entities_of(EntityKind::Character)
    }

    pub fn entities_of(&self, kind: EntityKind) -> impl Iterator<Item = &str> {
        self.entities.iter().filter(move |(_, k)| **k == kind).map(|(n, _)| n.as_str())
    }

    /// Checks the structural story invariants: gap-free indices, non-empty
    /// sentences, every referenced entity present in the table, and
    /// well-formed questions.
    pub fn validate(&self) -> Result<(), DomainError> {
        if self.sentences.is_empty() {
            return Err(DomainError::InvalidStory("story has no sentences".into()));
        }
        for (i, s) in self.sentences.iter().enumerate() {
            if s.index != i {
                return Err(DomainError::InvalidStory(format!("sentence {i} carries index {}", s.index)));
            }
            if s.raw_text.trim().is_empty() {
                return Err(DomainError::InvalidStory(format!("sentence {i} is empty")));
            }
            for name in s.kind.entities() {
                if !self.entities.contains_key(name) {
                    return Err(DomainError::InvalidStory(format!(
                        "sentence {i} mentions {name:?}, which is missing from the entity table"
                    )));
                }
            }
        }
        for name in self.entities.keys() {
            if name.is_empty() {
                return Err(DomainError::InvalidStory("empty entity name".into()));
            }
        }
        for q in &self.questions {
            let chain_ok = match q.qtype {
                QuestionType::Reality | QuestionType::Memory => q.order == 0 && q.chain.is_empty(),
                QuestionType::TrueBelief | QuestionType::FalseBelief => q.order >= 1 && q.order == q.chain.len(),
            };
            if !chain_ok {
                return Err(DomainError::InvalidStory(format!("question {:?} has inconsistent order/chain", q.text)));
            }
            if self.kind_of(&q.gold) != Some(EntityKind::Container) {
                return Err(DomainError::InvalidStory(format!("gold {:?} is not a container", q.gold)));
            }
            if q.chain.iter().any(|c| !self.is_character(c)) {
                return Err(DomainError::InvalidStory(format!("question {:?} names an unknown character", q.text)));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_character_chain_is_padded() {
        let key = canonicalize_key(&["Bob"], 2).unwrap();
        assert_eq!(key.chain(), ["Bob", "Bob"]);
    }

    #[test]
    fn full_length_chain_is_unchanged() {
        let key = canonicalize_key(&["Bob", "Alice"], 2).unwrap();
        assert_eq!(key.chain(), ["Bob", "Alice"]);
        let key = canonicalize_key(&["p1", "p2", "p1"], 3).unwrap();
        assert_eq!(key.chain(), ["p1", "p2", "p1"]);
    }

    #[test]
    fn key_errors() {
        let empty: [&str; 0] = [];
        assert_eq!(canonicalize_key(&empty, 2), Err(DomainError::EmptyChain));
        assert_eq!(canonicalize_key(&["a", "b", "c"], 2), Err(DomainError::DepthExceeded { len: 3, depth: 2 }));
    }

    #[test]
    fn padded_keys_compare_by_canonical_form() {
        assert_eq!(canonicalize_key(&["Bob"], 3).unwrap(), canonicalize_key(&["Bob", "Bob"], 3).unwrap());
        assert_ne!(canonicalize_key(&["Bob"], 2).unwrap(), canonicalize_key(&["Bob", "Alice"], 2).unwrap());
    }

    #[test]
    fn provenance_round_trips_through_text() {
        let p = Provenance::Paraphrased(Box::new(Provenance::D2));
        assert_eq!(p.to_string(), "paraphrased:d2");
        assert_eq!("paraphrased:d2".parse::<Provenance>().unwrap(), p);
        assert!("d9".parse::<Provenance>().is_err());
    }

    #[test]
    fn members_deduplicate_in_order() {
        let key = canonicalize_key(&["p1", "p2", "p1"], 3).unwrap();
        assert_eq!(key.members(), ["p1", "p2"]);
    }
}
