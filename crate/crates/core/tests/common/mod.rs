#![allow(dead_code)]

pub mod checks;

use belieftrack::domain::{PrimitiveKind, Provenance, Sentiment, Story};
use belieftrack::oracle::simulate;
use belieftrack::semantics::TemplateBank;
use belieftrack::storygen::{Ask, Draft, Phrasing};
use proptest::prelude::*;

pub const PEOPLE: [&str; 4] = ["Alice", "Bob", "Carol", "Dave"];
pub const ROOMS: [&str; 3] = ["kitchen", "garden", "front yard"];
pub const CONTAINERS: [&str; 4] = ["basket", "box", "green drawer", "pantry"];
pub const OBJECTS: [&str; 3] = ["celery", "apple", "sweet potato"];

/// One raw action; the interpreter skips actions that make no sense in the
/// current world.
#[derive(Debug, Clone, Copy)]
pub struct Action {
    pub op: u8,
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

pub fn action() -> impl Strategy<Value = Action> {
    let op =
        prop_oneof![3 => Just(0u8), 1 => Just(1u8), 3 => Just(2u8), 2 => Just(3u8), 5 => Just(4u8), 1 => Just(5u8)];
    (op, 0usize..4, 0usize..4, 0usize..4).prop_map(|(op, a, b, c)| Action { op, a, b, c })
}

#[derive(Default)]
struct World {
    person: [Option<usize>; 4],
    appeared: [bool; 4],
    container: [Option<usize>; 4],
    object: [Option<usize>; 3],
}

/// Turns raw actions into a draft the oracle accepts. Placements and moves
/// are followed by the container's room the first time the container is
/// used, like the generators do.
pub fn draft_of(actions: &[Action]) -> Draft {
    let mut w = World::default();
    let mut d = Draft::default();
    for act in actions {
        let p = act.a % PEOPLE.len();
        match act.op {
            0 | 1 => {
                let r = act.b % ROOMS.len();
                if w.person[p] == Some(r) {
                    continue;
                }
                if act.op == 0 {
                    d.enter(PEOPLE[p], ROOMS[r]);
                } else {
                    d.is_in(PEOPLE[p], ROOMS[r]);
                }
                w.person[p] = Some(r);
                w.appeared[p] = true;
            }
            2 => {
                let Some(r) = w.person[p] else { continue };
                d.exit(PEOPLE[p], ROOMS[r]);
                w.person[p] = None;
            }
            3 => {
                let o = act.b % OBJECTS.len();
                let c = act.c % CONTAINERS.len();
                if w.object[o].is_some() {
                    continue;
                }
                match w.container[c] {
                    Some(_) => {
                        d.events.push(PrimitiveKind::ObjectLocation {
                            thing: OBJECTS[o].into(),
                            location: CONTAINERS[c].into(),
                        });
                        d.entities.insert(OBJECTS[o].into(), belieftrack::domain::EntityKind::Object);
                    }
                    None => {
                        let r = act.a % ROOMS.len();
                        d.place(OBJECTS[o], CONTAINERS[c], ROOMS[r]);
                        w.container[c] = Some(r);
                    }
                }
                w.object[o] = Some(c);
            }
            4 => {
                let o = act.b % OBJECTS.len();
                let c = act.c % CONTAINERS.len();
                let Some(from) = w.object[o] else { continue };
                let Some(r) = w.container[from] else { continue };
                let here: Vec<usize> = (0..PEOPLE.len()).filter(|&q| w.person[q] == Some(r)).collect();
                if here.is_empty() || from == c || w.container[c].is_some_and(|cr| cr != r) {
                    continue;
                }
                let p = here[act.a % here.len()];
                if w.container[c].is_some() {
                    d.events.push(PrimitiveKind::Move {
                        character: PEOPLE[p].into(),
                        object: OBJECTS[o].into(),
                        container: CONTAINERS[c].into(),
                    });
                } else {
                    d.move_to(PEOPLE[p], OBJECTS[o], CONTAINERS[c], ROOMS[r]);
                    w.container[c] = Some(r);
                }
                w.object[o] = Some(c);
            }
            _ => {
                if !w.appeared[p] {
                    continue;
                }
                let o = act.b % OBJECTS.len();
                let s = if act.c % 2 == 0 { Sentiment::Likes } else { Sentiment::Hates };
                d.opinion(PEOPLE[p], OBJECTS[o], s);
            }
        }
    }
    d
}

/// Every chain over the characters of the draft up to `depth`, including
/// repeats.
pub fn chains(people: &[&str], depth: usize) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = vec![vec![]];
    let mut all = Vec::new();
    for _ in 0..depth {
        out = out
            .iter()
            .flat_map(|c| {
                people.iter().map(move |p| {
                    let mut c = c.clone();
                    c.push(p.to_string());
                    c
                })
            })
            .collect();
        all.extend(out.clone());
    }
    all
}

/// A labelled story: every chain up to `depth` the oracle can answer, plus
/// reality and memory questions for every placed object.
pub fn labelled(actions: &[Action], depth: usize) -> Option<Story> {
    let bank = TemplateBank::shipped();
    let d = draft_of(actions);
    if d.events.is_empty() {
        return None;
    }
    let bare = d.clone().finish(&bank, &[], Provenance::TomiFixed).ok()?;
    let trace = simulate(&bare).ok()?;
    let people: Vec<&str> = bare.characters().collect();
    let mut asks = Vec::new();
    for o in OBJECTS.iter().filter(|o| trace.reality(o).is_some()) {
        asks.push((*o, Ask::Reality));
        asks.push((*o, Ask::Memory));
        for chain in chains(&people, depth) {
            if trace.nested_belief(&chain, o).is_ok() {
                let phrasing = if chain.len() == 1 { Phrasing::Look } else { Phrasing::Search };
                asks.push((*o, Ask::Belief(chain, phrasing)));
            }
        }
    }
    d.finish(&bank, &asks, Provenance::TomiFixed).ok()
}

pub fn story_strategy(max_len: usize) -> impl Strategy<Value = Vec<Action>> {
    prop::collection::vec(action(), 1..max_len)
}

fn own(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// Alice and Bob in the kitchen; Alice leaves and Bob moves the celery
/// from the basket to the box.
pub fn sally_anne() -> Story {
    let mut d = Draft::default();
    d.enter("Alice", "kitchen")
        .enter("Bob", "kitchen")
        .place("celery", "basket", "kitchen")
        .exit("Alice", "kitchen")
        .move_to("Bob", "celery", "box", "kitchen");
    let asks = [
        ("celery", Ask::Belief(own(&["Alice"]), Phrasing::Look)),
        ("celery", Ask::Belief(own(&["Bob"]), Phrasing::Look)),
        ("celery", Ask::Belief(own(&["Bob", "Alice"]), Phrasing::Look)),
        ("celery", Ask::Belief(own(&["Alice", "Bob"]), Phrasing::Look)),
        ("celery", Ask::Reality),
        ("celery", Ask::Memory),
    ];
    d.finish(&TemplateBank::shipped(), &asks, Provenance::TomiFixed).unwrap()
}

/// Ethan sees objectA in the basket, then goes to the kitchen where Liam
/// is; Oliver then moves it to containerX. Sentence 7 is the move.
pub fn ethan_story() -> Story {
    let mut d = Draft::default();
    d.enter("Oliver", "front yard")
        .enter("Ethan", "front yard")
        .enter("Liam", "kitchen")
        .place("objectA", "basket", "front yard")
        .exit("Ethan", "front yard")
        .enter("Ethan", "kitchen")
        .move_to("Oliver", "objectA", "containerX", "front yard");
    let asks = [("objectA", Ask::Belief(own(&["Ethan"]), Phrasing::Think))];
    d.finish(&TemplateBank::shipped(), &asks, Provenance::TomiFixed).unwrap()
}
