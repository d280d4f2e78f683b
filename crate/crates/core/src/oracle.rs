//! Reference semantics by direct simulation.
//!
//! The world is a pair of maps: which room each character is in, and where
//! each object or container was put. An event is observed by everyone in
//! the rooms it touches. A chain of characters shares a belief about an
//! event only if every member observed it; while a step is shared, members
//! also see the current contents of the rooms they stand in.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::domain::{EntityKind, PrimitiveKind, Question, QuestionType, Story};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("inconsistent story at sentence {index}: {reason}")]
    InconsistentStory { index: usize, reason: String },
    #[error("the chain {chain:?} never learned where the {object} is")]
    UnknownBelief { chain: Vec<String>, object: String },
    #[error("the {0} is never placed")]
    NeverPlaced(String),
    #[error("empty belief chain")]
    EmptyChain,
    #[error("{0:?} does not appear in the story")]
    UnknownCharacter(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Arrive { who: String, room: String },
    Leave { who: String, room: String },
    Place { thing: String, at: String },
    Opinion { who: String, about: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub index: usize,
    pub event: Event,
    pub observers: BTreeSet<String>,
    /// World after the event.
    pub occupancy: BTreeMap<String, String>,
    pub placement: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WorldTrace {
    pub steps: Vec<Step>,
    rooms: BTreeSet<String>,
    characters: BTreeSet<String>,
}

fn root<'a>(placement: &'a BTreeMap<String, String>, rooms: &BTreeSet<String>, thing: &'a str) -> Option<&'a str> {
    let mut cur = thing;
    for _ in 0..=placement.len() {
        if rooms.contains(cur) {
            return Some(cur);
        }
        cur = placement.get(cur)?;
    }
    None
}

fn occupants(occupancy: &BTreeMap<String, String>, room: Option<&str>) -> BTreeSet<String> {
    match room {
        Some(r) => occupancy.iter().filter(|(_, at)| *at == r).map(|(who, _)| who.clone()).collect(),
        None => BTreeSet::new(),
    }
}

/// Replays the story, recording every event with its observers.
pub fn simulate(story: &Story) -> Result<WorldTrace, OracleError> {
    let rooms: BTreeSet<String> = story.entities_of(EntityKind::Room).map(String::from).collect();
    let mut occupancy: BTreeMap<String, String> = BTreeMap::new();
    let mut placement: BTreeMap<String, String> = BTreeMap::new();
    let mut steps = Vec::with_capacity(story.sentences.len());
    let mut characters = BTreeSet::new();
    for s in &story.sentences {
        let index = s.index;
        let bad = |reason: String| OracleError::InconsistentStory { index, reason };
        let (event, observers) = match &s.kind {
            PrimitiveKind::Enter { character, room } | PrimitiveKind::PersonLocation { character, room } => {
                if !rooms.contains(room) {
                    return Err(bad(format!("{room} is not a room")));
                }
                let mut seen = occupants(&occupancy, Some(room));
                seen.extend(occupants(&occupancy, occupancy.get(character).map(String::as_str)));
                seen.insert(character.clone());
                occupancy.insert(character.clone(), room.clone());
                characters.insert(character.clone());
                (Event::Arrive { who: character.clone(), room: room.clone() }, seen)
            }
            PrimitiveKind::Exit { character, room } => {
                if occupancy.get(character) != Some(room) {
                    return Err(bad(format!("{character} leaves the {room} without being there")));
                }
                let seen = occupants(&occupancy, Some(room));
                occupancy.remove(character);
                (Event::Leave { who: character.clone(), room: room.clone() }, seen)
            }
            PrimitiveKind::ObjectLocation { thing, location } => {
                let mut seen = occupants(&occupancy, root(&placement, &rooms, thing));
                placement.insert(thing.clone(), location.clone());
                if root(&placement, &rooms, thing).is_none() && placement_cycles(&placement, thing) {
                    return Err(bad(format!("the {thing} would contain itself")));
                }
                seen.extend(occupants(&occupancy, root(&placement, &rooms, thing)));
                (Event::Place { thing: thing.clone(), at: location.clone() }, seen)
            }
            PrimitiveKind::Move { character, object, container } => {
                let mut seen = occupants(&occupancy, root(&placement, &rooms, object));
                placement.insert(object.clone(), container.clone());
                seen.extend(occupants(&occupancy, root(&placement, &rooms, object)));
                if !seen.contains(character) {
                    return Err(bad(format!("{character} moves the {object} from another room")));
                }
                (Event::Place { thing: object.clone(), at: container.clone() }, seen)
            }
            PrimitiveKind::Opinion { character, object, .. } => {
                let mut seen = occupants(&occupancy, occupancy.get(character).map(String::as_str));
                seen.extend(occupants(&occupancy, root(&placement, &rooms, object)));
                seen.insert(character.clone());
                characters.insert(character.clone());
                (Event::Opinion { who: character.clone(), about: object.clone() }, seen)
            }
            PrimitiveKind::Unparsed => return Err(bad("unparsed sentence".into())),
        };
        steps.push(Step { index, event, observers, occupancy: occupancy.clone(), placement: placement.clone() });
    }
    Ok(WorldTrace { steps, rooms, characters })
}

fn placement_cycles(placement: &BTreeMap<String, String>, thing: &str) -> bool {
    let mut cur = thing;
    for _ in 0..=placement.len() {
        match placement.get(cur) {
            Some(next) if next == thing => return true,
            Some(next) => cur = next,
            None => return false,
        }
    }
    true
}

impl WorldTrace {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Characters who observed sentence `index`.
    pub fn witnesses_of(&self, index: usize) -> Option<&BTreeSet<String>> {
        self.steps.get(index).map(|s| &s.observers)
    }

    /// Where `thing` is at the end of the story.
    pub fn reality(&self, thing: &str) -> Option<&str> {
        self.steps.last()?.placement.get(thing).map(String::as_str)
    }

    /// Where `thing` was first put.
    pub fn memory(&self, thing: &str) -> Option<&str> {
        self.steps.iter().find_map(|s| match &s.event {
            Event::Place { thing: t, at } if t == thing => Some(at.as_str()),
            _ => None,
        })
    }

    /// Indices of events every chain member observed.
    pub fn observed_events<S: AsRef<str>>(&self, chain: &[S]) -> BTreeSet<usize> {
        self.steps.iter().filter(|s| chain.iter().all(|c| s.observers.contains(c.as_ref()))).map(|s| s.index).collect()
    }

    /// What p1 thinks that p2 thinks ... about where `object` is.
    pub fn nested_belief<S: AsRef<str>>(&self, chain: &[S], object: &str) -> Result<&str, OracleError> {
        if chain.is_empty() {
            return Err(OracleError::EmptyChain);
        }
        let members: BTreeSet<&str> = chain.iter().map(AsRef::as_ref).collect();
        if let Some(missing) = members.iter().find(|m| !self.characters.contains(**m)) {
            return Err(OracleError::UnknownCharacter((*missing).to_string()));
        }
        let mut belief: BTreeMap<&str, &str> = BTreeMap::new();
        for step in &self.steps {
            if !members.iter().all(|m| step.observers.contains(*m)) {
                continue;
            }
            if let Event::Place { thing, at } = &step.event {
                belief.insert(thing, at);
            }
            let watched: BTreeSet<&str> =
                members.iter().filter_map(|m| step.occupancy.get(*m).map(String::as_str)).collect();
            for (thing, at) in &step.placement {
                if root(&step.placement, &self.rooms, thing).is_some_and(|r| watched.contains(r)) {
                    belief.insert(thing, at);
                }
            }
        }
        belief.get(object).copied().ok_or_else(|| OracleError::UnknownBelief {
            chain: chain.iter().map(|c| c.as_ref().to_string()).collect(),
            object: object.to_string(),
        })
    }

    /// Gold answer for a question; `qtype` only distinguishes belief from
    /// reality and memory.
    pub fn gold_answer(&self, question: &Question) -> Result<&str, OracleError> {
        match question.qtype {
            QuestionType::Reality => {
                self.reality(&question.target).ok_or_else(|| OracleError::NeverPlaced(question.target.clone()))
            }
            QuestionType::Memory => {
                self.memory(&question.target).ok_or_else(|| OracleError::NeverPlaced(question.target.clone()))
            }
            QuestionType::TrueBelief | QuestionType::FalseBelief => {
                self.nested_belief(&question.chain, &question.target)
            }
        }
    }
}
