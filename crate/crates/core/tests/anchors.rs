//! Hand-traceable stories with known answers.

mod common;

use std::collections::BTreeSet;

use belieftrack::domain::{decode_story, encode_story, Triple};
use belieftrack::oracle::simulate;
use belieftrack::qa::answer_question;
use belieftrack::semantics::{RuleBackend, TemplateBank};
use belieftrack::storygen::{d2_story, generate, third_order_chains, GenConfig, GenSet, Vocab};
use belieftrack::tracker::{Tracker, TrackerOptions};
use common::{ethan_story, sally_anne};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn set(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

#[test]
fn sally_anne_text() {
    let s = sally_anne();
    let text: Vec<&str> = s.sentences.iter().map(|p| p.raw_text.as_str()).collect();
    assert_eq!(
        text,
        [
            "Alice entered the kitchen.",
            "Bob entered the kitchen.",
            "The celery is in the basket.",
            "The basket is in the kitchen.",
            "Alice exited the kitchen.",
            "Bob moved the celery to the box.",
            "The box is in the kitchen.",
        ]
    );
    let line = encode_story(&s).unwrap();
    assert_eq!(decode_story(&line, 1, &TemplateBank::shipped()).unwrap(), s);
}

#[test]
fn sally_anne_answers() {
    let s = sally_anne();
    let backend = RuleBackend::default();
    let state = Tracker::new(&backend, TrackerOptions::new(2)).run(&s).unwrap();
    assert_eq!(state.locals.len(), 4);
    assert_eq!(state.witnesses[5], set(&["Bob"]));

    let b_bob = state.local(&["Bob"]).unwrap().unwrap();
    let b_alice = state.local(&["Alice"]).unwrap().unwrap();
    let b_bob_alice = state.local(&["Bob", "Alice"]).unwrap().unwrap();
    assert!(b_bob.provenance(&Triple::located("celery", "box")).is_some());
    assert!(b_alice.provenance(&Triple::located("celery", "basket")).is_some());
    assert!(b_bob_alice.provenance(&Triple::located("celery", "basket")).is_some());
    assert!(state.global.provenance(&Triple::located("celery", "basket")).is_none());

    let ask = |q: &str| answer_question(&state, &s, q, &backend, true).unwrap().prediction;
    assert_eq!(ask("Where will Alice look for the celery?"), "basket");
    assert_eq!(ask("Where will Bob think that Alice will look for the celery?"), "basket");
    assert_eq!(ask("Where will Bob look for the celery?"), "box");
    assert_eq!(ask("Where is the celery really?"), "box");
    assert_eq!(ask("Where was the celery at the beginning?"), "basket");

    let golds: Vec<&str> = s.questions.iter().map(|q| q.gold.as_str()).collect();
    assert_eq!(golds, ["basket", "box", "basket", "basket", "box", "basket"]);
}

#[test]
fn ethan_thinks_basket() {
    let s = ethan_story();
    let trace = simulate(&s).unwrap();
    assert_eq!(s.sentences[7].raw_text, "Oliver moved the objectA to the containerX.");
    assert_eq!(trace.witnesses_of(7), Some(&set(&["Oliver"])));
    assert_eq!(trace.nested_belief(&["Ethan"], "objectA").unwrap(), "basket");
    assert_eq!(s.questions[0].gold, "basket");

    let backend = RuleBackend::default();
    let state = Tracker::new(&backend, TrackerOptions::new(2)).run(&s).unwrap();
    assert_eq!(state.witnesses[7], set(&["Oliver"]));
    let got = answer_question(&state, &s, "Where does Ethan think the objectA is?", &backend, true).unwrap();
    assert_eq!(got.prediction, "basket");
}

#[test]
fn third_order_chains_through_p2() {
    let bank = TemplateBank::shipped();
    let backend = RuleBackend::default();
    for seed in 0..20 {
        let s = d2_story(&Vocab::default(), &bank, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let p: Vec<&str> = [0, 1, 2].iter().map(|&i| s.sentences[i].kind.entities()[0]).collect();
        let c1 = s.sentences[3].kind.entities()[1];
        let c2 = s.sentences[6].kind.entities()[2];
        let trace = simulate(&s).unwrap();
        for m in [2, 3] {
            let state = Tracker::new(&backend, TrackerOptions::new(m)).run(&s).unwrap();
            for chain in third_order_chains() {
                let names: Vec<&str> = chain.iter().map(|&i| p[i]).collect();
                let expected = if chain.contains(&1) { c1 } else { c2 };
                assert_eq!(trace.nested_belief(&names, s.sentences[3].kind.entities()[0]).unwrap(), expected);
                let q = format!(
                    "Where does {} think that {} thinks that {} will search for the {}?",
                    names[0],
                    names[1],
                    names[2],
                    s.sentences[3].kind.entities()[0]
                );
                assert_eq!(answer_question(&state, &s, &q, &backend, true).unwrap().prediction, expected, "{q} m={m}");
            }
            for (a, b) in [(0, 2), (2, 0)] {
                let q = format!(
                    "Where does {} think that {} searches for the {}?",
                    p[a],
                    p[b],
                    s.sentences[3].kind.entities()[0]
                );
                assert_eq!(answer_question(&state, &s, &q, &backend, true).unwrap().prediction, c2, "{q}");
            }
        }
    }
}

fn swapped_answers(seed: u64) -> (usize, usize) {
    let bank = TemplateBank::shipped();
    let backend = RuleBackend::default();
    let (mut asked, mut differ) = (0, 0);
    for set in [GenSet::Tomi, GenSet::D1, GenSet::D2, GenSet::D3] {
        for s in generate(set, &GenConfig::new(seed, 50), &bank).unwrap() {
            let state = Tracker::new(&backend, TrackerOptions::new(2)).run(&s).unwrap();
            let people: Vec<&str> = s.characters().collect();
            let objects: BTreeSet<&str> = s.questions.iter().map(|q| q.target.as_str()).collect();
            for o in &objects {
                for a in &people {
                    for b in people.iter().filter(|b| *b != a) {
                        let ask = |x: &str, y: &str| {
                            let q = format!("Where does {x} think that {y} searches for the {o}?");
                            answer_question(&state, &s, &q, &backend, true).ok().map(|r| r.prediction)
                        };
                        asked += 1;
                        if ask(a, b) != ask(b, a) {
                            differ += 1;
                        }
                    }
                }
            }
        }
    }
    (asked, differ)
}

#[test]
fn swapped_second_order_chains_agree() {
    let (asked, differ) = swapped_answers(11);
    assert!(asked > 500, "{asked}");
    assert_eq!(differ, 0);
}

/// Searches for a story where swapping a second-order chain changes the
/// answer. Under joint observation no such story exists, so this fails.
#[test]
#[ignore]
fn chain_order_changes_some_answer() {
    let (asked, differ) = swapped_answers(11);
    assert!(differ > 0, "{asked} swapped pairs, none differ");
}
