//! Invariant checks shared by the property tests and the acceptance run.
//! Each returns an error message on violation.

use std::collections::BTreeSet;

use belieftrack::beliefgraph::BeliefGraph;
use belieftrack::domain::{encode_corpus, Story};
use belieftrack::oracle::simulate;
use belieftrack::qa::answer_question;
use belieftrack::semantics::{RuleBackend, TemplateBank};
use belieftrack::storygen::{generate, paraphrase_story, story_rng, GenConfig, GenSet};
use belieftrack::tracker::{BeliefState, Tracker, TrackerOptions};

use super::{labelled, Action};

pub type Check = Result<(), String>;

pub const SETS: [GenSet; 4] = [GenSet::Tomi, GenSet::D1, GenSet::D2, GenSet::D3];

pub fn steps(story: &Story, m: usize, mut each: impl FnMut(usize, &BeliefState, &BeliefState) -> Check) -> Check {
    let backend = RuleBackend::default();
    let tracker = Tracker::new(&backend, TrackerOptions::new(m));
    let mut state = BeliefState::new(m);
    for i in 0..story.sentences.len() {
        let before = state.clone();
        tracker.step(&mut state, story, i).map_err(|e| e.to_string())?;
        each(i, &before, &state)?;
    }
    Ok(())
}

pub fn spatial_exclusive(g: &BeliefGraph) -> bool {
    let mut subjects = BTreeSet::new();
    g.edges().filter(|(t, _)| t.is_spatial()).all(|(t, _)| subjects.insert(t.subject.clone()))
}

/// At most one location per subject in every graph, and at most n^m local
/// graphs, after every sentence.
pub fn exclusivity_and_key_bound(actions: &[Action], m: usize) -> Check {
    let Some(story) = labelled(actions, 0) else { return Ok(()) };
    let n = story.characters().count();
    steps(&story, m, |i, _, after| {
        if after.locals.len() > n.pow(m as u32) {
            return Err(format!("{} local graphs for {n} characters at sentence {i}", after.locals.len()));
        }
        if !spatial_exclusive(&after.global) {
            return Err(format!("global graph has two locations for a subject at sentence {i}"));
        }
        match after.locals.iter().find(|(_, b)| !spatial_exclusive(b)) {
            Some((k, _)) => Err(format!("{k} has two locations for a subject at sentence {i}")),
            None => Ok(()),
        }
    })
}

/// Graphs of keys with no witnessing member are untouched.
pub fn frame_axiom(actions: &[Action], m: usize) -> Check {
    let Some(story) = labelled(actions, 0) else { return Ok(()) };
    steps(&story, m, |i, before, after| {
        let w = &after.witnesses[i];
        for (k, b) in &before.locals {
            if k.chain().iter().all(|c| !w.contains(c)) && after.locals.get(k) != Some(b) {
                return Err(format!("{k} changed at sentence {i} without a witness"));
            }
        }
        Ok(())
    })
}

/// Every chain of length at most m is answered as the oracle labels it,
/// with and without the question filter.
pub fn oracle_answers(actions: &[Action], m: usize) -> Check {
    let Some(story) = labelled(actions, m) else { return Ok(()) };
    let backend = RuleBackend::default();
    let state = Tracker::new(&backend, TrackerOptions::new(m)).run(&story).map_err(|e| e.to_string())?;
    for q in &story.questions {
        for filter in [true, false] {
            let got = answer_question(&state, &story, &q.text, &backend, filter).map(|a| a.prediction);
            if got.as_deref() != Ok(q.gold.as_str()) {
                let text: Vec<&str> = story.sentences.iter().map(|s| s.raw_text.as_str()).collect();
                return Err(format!("{} m={m} filter={filter}: got {got:?}, gold {}\n{text:#?}", q.text, q.gold));
            }
        }
    }
    Ok(())
}

pub fn generator_determinism(seed: u64, set: GenSet, paraphrase: bool) -> Check {
    let bank = TemplateBank::shipped();
    let mut cfg = GenConfig::new(seed, 3);
    cfg.paraphrase = paraphrase;
    let a = encode_corpus(&generate(set, &cfg, &bank).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let b = encode_corpus(&generate(set, &cfg, &bank).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    if a != b {
        return Err(format!("{set} seed {seed} generated different bytes"));
    }
    Ok(())
}

/// Paraphrasing keeps every primitive, every observer set and every label.
pub fn paraphrase_invariance(seed: u64, set: GenSet) -> Check {
    let bank = TemplateBank::shipped();
    let story = generate(set, &GenConfig::new(seed, 1), &bank).map_err(|e| e.to_string())?.remove(0);
    let para = paraphrase_story(&story, &bank, &mut story_rng(seed, set, 0));
    for s in &para.sentences {
        let parsed = bank.parse(&s.raw_text, s.index).map_err(|e| e.to_string())?;
        if parsed.kind != s.kind {
            return Err(format!("{:?} parses as {:?}, not {:?}", s.raw_text, parsed.kind, s.kind));
        }
    }
    let a = simulate(&story).map_err(|e| e.to_string())?;
    let b = simulate(&para).map_err(|e| e.to_string())?;
    let events = |t: &belieftrack::oracle::WorldTrace| {
        t.steps.iter().map(|s| (s.event.clone(), s.observers.clone())).collect::<Vec<_>>()
    };
    if events(&a) != events(&b) {
        return Err(format!("{set} seed {seed}: paraphrase changed the event trace"));
    }
    for q in &para.questions {
        let g = b.gold_answer(q).map_err(|e| e.to_string())?;
        if g != q.gold {
            return Err(format!("{}: paraphrased gold {g}, original {}", q.text, q.gold));
        }
    }
    Ok(())
}
