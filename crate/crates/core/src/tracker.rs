//! Sentence-by-sentence construction of the global graph and every local
//! belief graph.
//!
//! For each sentence the global graph is updated first: contradicted edges
//! are collected, the new fact is added, witnesses are read off the spatial
//! components around the change, and only then are the contradicted edges
//! deleted. Every local graph whose chain members all witnessed the
//! sentence then receives the same update plus the contents of the rooms
//! its members can see.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::beliefgraph::{BeliefGraph, GraphError};
use crate::domain::{canonicalize_key, BeliefKey, DomainError, Primitive, Story, Triple};
use crate::semantics::{ResultingState, SemanticBackend, SemanticsError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TrackError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("sentence adds no fact and contradicts nothing, so it has no witnesses")]
    NoWitness,
    #[error("unknown character {0:?}")]
    UnknownCharacter(String),
}

/// A failure while processing one sentence.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("sentence {index}: {source}")]
pub struct TrackerError {
    pub index: usize,
    #[source]
    pub source: TrackError,
}

/// Which local graphs to maintain.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum KeyMode {
    /// Every canonical key over the characters seen so far.
    #[default]
    All,
    /// Only these keys, created once all their members have appeared.
    Only(BTreeSet<BeliefKey>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrackerOptions {
    pub m: usize,
    pub keys: KeyMode,
    /// Record a [`TraceEvent`] per sentence.
    pub trace: bool,
}

impl TrackerOptions {
    pub fn new(m: usize) -> Self {
        TrackerOptions { m, keys: KeyMode::All, trace: false }
    }
}

/// Per-sentence debug record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub index: usize,
    pub sentence: String,
    pub statement: String,
    pub added: Vec<String>,
    pub removed: Vec<String>,
    pub witnesses: Vec<String>,
    pub touched_keys: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct BeliefState {
    pub global: BeliefGraph,
    pub locals: BTreeMap<BeliefKey, BeliefGraph>,
    pub m: usize,
    /// Sentences processed so far.
    pub position: usize,
    /// Global graph after each processed sentence.
    pub history: Vec<BeliefGraph>,
    /// Index of the first sentence that located each subject.
    pub first_location: BTreeMap<String, usize>,
    pub witnesses: Vec<BTreeSet<String>>,
    pub trace: Vec<TraceEvent>,
    seen: BTreeSet<String>,
}

impl BeliefState {
    pub fn new(m: usize) -> Self {
        BeliefState {
            global: BeliefGraph::global(),
            locals: BTreeMap::new(),
            m,
            position: 0,
            history: Vec::new(),
            first_location: BTreeMap::new(),
            witnesses: Vec::new(),
            trace: Vec::new(),
            seen: BTreeSet::new(),
        }
    }

    /// Characters that have appeared so far.
    pub fn characters(&self) -> &BTreeSet<String> {
        &self.seen
    }

    /// The local graph for `chain`, padded to depth `m`.
    pub fn local<S: AsRef<str>>(&self, chain: &[S]) -> Result<Option<&BeliefGraph>, DomainError> {
        Ok(self.locals.get(&canonicalize_key(chain, self.m)?))
    }

    /// Trace as line-delimited JSON.
    pub fn trace_jsonl(&self) -> String {
        self.trace.iter().map(|e| serde_json::to_string(e).expect("trace serializes") + "\n").collect()
    }
}

/// What the global step did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalUpdate {
    pub state: ResultingState,
    pub added: Option<Triple>,
    pub removed: Vec<Triple>,
    pub witnesses: BTreeSet<String>,
}

/// Applies one sentence to the global graph and returns its witnesses.
pub fn global_context_update(
    g: &mut BeliefGraph,
    sentence: &Primitive,
    story: &Story,
    backend: &dyn SemanticBackend,
) -> Result<GlobalUpdate, TrackError> {
    let state = backend.resulting_state(sentence)?;
    let mut contradicted = Vec::new();
    for (edge, _) in g.edges() {
        if backend.contradicts(&state, edge)? {
            contradicted.push(edge.clone());
        }
    }
    let mut seeds: Vec<&str> = Vec::new();
    if let Some(t) = &state.triple {
        g.add_edge(t.clone(), sentence.index);
        seeds.extend([t.subject.as_str(), t.object.as_str()]);
    } else {
        if contradicted.is_empty() {
            return Err(TrackError::NoWitness);
        }
        seeds.extend(contradicted.iter().flat_map(|t| [t.subject.as_str(), t.object.as_str()]));
    }
    let mut witnesses = BTreeSet::new();
    for seed in seeds {
        witnesses.extend(g.connected_component(seed).into_iter().filter(|n| story.is_character(n)));
    }
    g.remove_edges(&contradicted)?;
    Ok(GlobalUpdate { added: state.triple.clone(), state, removed: contradicted, witnesses })
}

/// Copies the spatial facts of every room visible to `members` from `g`
/// into `b`, dropping `b`'s stale locations for the entities seen there.
/// Returns `(added, removed)`.
pub fn propagate_knowledge(g: &BeliefGraph, b: &mut BeliefGraph, members: &[&str]) -> (Vec<Triple>, Vec<Triple>) {
    let mut visible = BTreeSet::new();
    for m in members {
        visible.extend(g.connected_component(m));
    }
    let known: BTreeMap<Triple, usize> = g.spatial_edges_within(&visible).into_iter().collect();
    let stale: Vec<Triple> = b
        .edges()
        .filter(|(t, _)| t.is_spatial() && visible.contains(&t.subject) && !known.contains_key(*t))
        .map(|(t, _)| t.clone())
        .collect();
    let mut added = Vec::new();
    for (t, p) in known {
        if b.provenance(&t) != Some(p) {
            added.push(t.clone());
        }
        b.add_edge(t, p);
    }
    b.remove_edges(&stale).expect("stale edges were read from the graph");
    (added, stale)
}

/// Applies one witnessed sentence to a local graph. `g` is the global
/// graph after the sentence.
pub fn local_context_update(
    b: &mut BeliefGraph,
    g: &BeliefGraph,
    state: &ResultingState,
    index: usize,
    key: &BeliefKey,
    backend: &dyn SemanticBackend,
) -> Result<(Vec<Triple>, Vec<Triple>), TrackError> {
    let mut contradicted = Vec::new();
    for (edge, _) in b.edges() {
        if backend.contradicts(state, edge)? {
            contradicted.push(edge.clone());
        }
    }
    let mut added = Vec::new();
    if let Some(t) = &state.triple {
        b.add_edge(t.clone(), index);
        added.push(t.clone());
    }
    let (prop_added, mut removed) = propagate_knowledge(g, b, &key.members());
    added.extend(prop_added.into_iter().filter(|t| Some(t) != state.triple.as_ref()));
    let still_there: Vec<Triple> = contradicted.into_iter().filter(|t| b.provenance(t).is_some()).collect();
    b.remove_edges(&still_there)?;
    removed.extend(still_there);
    Ok((added, removed))
}

/// All m-tuples over `chars`, in lexicographic order.
fn all_keys(chars: &BTreeSet<String>, m: usize) -> Vec<BeliefKey> {
    let chars: Vec<&String> = chars.iter().collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; m];
    if chars.is_empty() || m == 0 {
        return out;
    }
    loop {
        let chain: Vec<&str> = idx.iter().map(|&i| chars[i].as_str()).collect();
        out.push(canonicalize_key(&chain, m).expect("non-empty chain within depth"));
        let mut pos = m;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < chars.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

pub struct Tracker<'b> {
    backend: &'b dyn SemanticBackend,
    options: TrackerOptions,
}

impl<'b> Tracker<'b> {
    pub fn new(backend: &'b dyn SemanticBackend, options: TrackerOptions) -> Self {
        Tracker { backend, options }
    }

    pub fn options(&self) -> &TrackerOptions {
        &self.options
    }

    pub fn run(&self, story: &Story) -> Result<BeliefState, TrackerError> {
        let mut state = BeliefState::new(self.options.m);
        if self.options.m == 0 {
            return Err(TrackerError { index: 0, source: TrackError::Domain(DomainError::EmptyChain) });
        }
        for i in 0..story.sentences.len() {
            self.step(&mut state, story, i).map_err(|source| TrackerError { index: i, source })?;
        }
        Ok(state)
    }

    /// Processes sentence `index`, which must be the next unprocessed one.
    pub fn step(&self, state: &mut BeliefState, story: &Story, index: usize) -> Result<(), TrackError> {
        let sentence = &story.sentences[index];
        let update = global_context_update(&mut state.global, sentence, story, self.backend)?;

        let newcomers: Vec<String> = state
            .global
            .nodes()
            .iter()
            .filter(|n| story.is_character(n) && !state.seen.contains(*n))
            .cloned()
            .collect();
        if !newcomers.is_empty() {
            state.seen.extend(newcomers);
            self.instantiate_keys(state);
        }

        let mut touched = Vec::new();
        let mut added: Vec<String> = update.added.iter().map(|t| format!("G {t}")).collect();
        let mut removed: Vec<String> = update.removed.iter().map(|t| format!("G {t}")).collect();
        for (key, b) in state.locals.iter_mut() {
            if !key.chain().iter().all(|c| update.witnesses.contains(c)) {
                continue;
            }
            let (a, r) = local_context_update(b, &state.global, &update.state, index, key, self.backend)?;
            if self.options.trace {
                added.extend(a.iter().map(|t| format!("{key} {t}")));
                removed.extend(r.iter().map(|t| format!("{key} {t}")));
                touched.push(key.to_string());
            }
        }

        if let Some(t) = update.added.as_ref().filter(|t| t.is_spatial()) {
            state.first_location.entry(t.subject.clone()).or_insert(index);
        }
        if self.options.trace {
            state.trace.push(TraceEvent {
                index,
                sentence: sentence.raw_text.clone(),
                statement: update.state.statement.clone(),
                added,
                removed,
                witnesses: update.witnesses.iter().cloned().collect(),
                touched_keys: touched,
            });
        }
        state.witnesses.push(update.witnesses);
        state.history.push(state.global.clone());
        state.position = index + 1;
        Ok(())
    }

    fn instantiate_keys(&self, state: &mut BeliefState) {
        let keys: Vec<BeliefKey> = match &self.options.keys {
            KeyMode::All => all_keys(&state.seen, state.m),
            KeyMode::Only(wanted) => {
                wanted.iter().filter(|k| k.chain().iter().all(|c| state.seen.contains(c))).cloned().collect()
            }
        };
        for key in keys {
            state.locals.entry(key.clone()).or_insert_with(|| BeliefGraph::local(key));
        }
    }
}

/// Runs the full tracker over `story` with depth `m`.
pub fn belief_tracking_structure(
    story: &Story,
    m: usize,
    backend: &dyn SemanticBackend,
) -> Result<BeliefState, TrackerError> {
    Tracker::new(backend, TrackerOptions::new(m)).run(story)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{EntityKind, Provenance};
    use crate::semantics::{RuleBackend, TemplateBank};

    /// Builds a story; entities not listed as containers or rooms are
    /// characters if capitalized and objects otherwise.
    fn story(lines: &[&str], containers: &[&str], rooms: &[&str]) -> Story {
        let bank = TemplateBank::shipped();
        let sentences: Vec<Primitive> = lines.iter().enumerate().map(|(i, l)| bank.parse(l, i).unwrap()).collect();
        let mut entities = BTreeMap::new();
        for name in sentences.iter().flat_map(|s| s.kind.entities()) {
            let kind = if containers.contains(&name) {
                EntityKind::Container
            } else if rooms.contains(&name) {
                EntityKind::Room
            } else if name.starts_with(char::is_uppercase) {
                EntityKind::Character
            } else {
                EntityKind::Object
            };
            entities.insert(name.to_string(), kind);
        }
        Story { sentences, entities, questions: vec![], provenance: Provenance::TomiFixed }
    }

    fn sally_anne() -> Story {
        story(
            &[
                "Alice entered the kitchen.",
                "Bob entered the kitchen.",
                "The celery is in the basket.",
                "The basket is in the kitchen.",
                "The box is in the kitchen.",
                "Alice exited the kitchen.",
                "Bob moved the celery to the box.",
            ],
            &["basket", "box"],
            &["kitchen"],
        )
    }

    #[test]
    fn false_belief_is_kept() {
        let backend = RuleBackend::default();
        let s = belief_tracking_structure(&sally_anne(), 2, &backend).unwrap();
        let loc = |chain: &[&str]| s.local(chain).unwrap().unwrap().location_of("celery").map(|(c, _)| c.to_string());
        assert_eq!(loc(&["Bob"]).as_deref(), Some("box"));
        assert_eq!(loc(&["Alice"]).as_deref(), Some("basket"));
        assert_eq!(loc(&["Bob", "Alice"]).as_deref(), Some("basket"));
        assert_eq!(s.global.location_of("celery").map(|(c, _)| c), Some("box"));
        assert_eq!(s.locals.len(), 4);
        assert_eq!(s.witnesses[6], BTreeSet::from(["Bob".to_string()]));
        assert_eq!(s.witnesses[5], BTreeSet::from(["Alice".to_string(), "Bob".to_string()]));
    }

    #[test]
    fn single_character_story_has_one_local() {
        let backend = RuleBackend::default();
        let st = story(
            &["Ann entered the hall.", "The pen is in the tray.", "The tray is in the hall."],
            &["tray"],
            &["hall"],
        );
        for m in 1..=3 {
            assert_eq!(belief_tracking_structure(&st, m, &backend).unwrap().locals.len(), 1);
        }
    }

    #[test]
    fn lazy_mode_builds_only_requested_keys() {
        let backend = RuleBackend::default();
        let key = canonicalize_key(&["Bob", "Alice"], 2).unwrap();
        let opts = TrackerOptions { m: 2, keys: KeyMode::Only(BTreeSet::from([key.clone()])), trace: false };
        let lazy = Tracker::new(&backend, opts).run(&sally_anne()).unwrap();
        let full = belief_tracking_structure(&sally_anne(), 2, &backend).unwrap();
        assert_eq!(lazy.locals.len(), 1);
        assert_eq!(lazy.locals[&key], full.locals[&key]);
    }

    #[test]
    fn trace_has_one_event_per_sentence() {
        let backend = RuleBackend::default();
        let opts = TrackerOptions { trace: true, ..TrackerOptions::new(2) };
        let s = Tracker::new(&backend, opts).run(&sally_anne()).unwrap();
        assert_eq!(s.trace_jsonl().lines().count(), 7);
        assert_eq!(s.trace[6].witnesses, vec!["Bob".to_string()]);
        assert_eq!(s.trace[6].touched_keys, vec!["[Bob,Bob]".to_string()]);
    }

    #[test]
    fn unparsed_sentence_is_fatal() {
        let backend = RuleBackend::default();
        let mut st = sally_anne();
        st.sentences[3].kind = crate::domain::PrimitiveKind::Unparsed;
        let err = belief_tracking_structure(&st, 2, &backend).unwrap_err();
        assert_eq!(err.index, 3);
        assert!(matches!(err.source, TrackError::Semantics(SemanticsError::UnparsedSentence { .. })));
    }

    #[test]
    fn key_enumeration() {
        let chars: BTreeSet<String> = ["a", "b", "c"].into_iter().map(String::from).collect();
        let keys = all_keys(&chars, 2);
        assert_eq!(keys.len(), 9);
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(all_keys(&chars, 3).len(), 27);
    }
}
