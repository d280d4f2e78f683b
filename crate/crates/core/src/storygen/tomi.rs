//! Sally-Anne stories with container disambiguation.
//!
//! A (the mover) and B (the observer) share a room with an object in a
//! container; A moves it to a second container. The variant decides when
//! B and A leave or come back. An optional third character enters the same
//! or another room, and up to two opinion sentences about unrelated objects
//! are mixed in.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{pick, Ask, Draft, GenError, Phrasing, Vocab};
use crate::domain::{PrimitiveKind, Provenance, Sentiment, Story};
use crate::semantics::TemplateBank;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// B watches the move.
    TrueBelief,
    /// B leaves before the move.
    FalseBelief,
    /// B leaves, A moves, B comes back while A is still there.
    ReturnWhileMoverStays,
    /// B leaves, A moves and leaves, then B comes back.
    ReturnAfterMoverLeft,
    /// B watches the move, then A leaves.
    MoverLeaves,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::TrueBelief,
        Variant::FalseBelief,
        Variant::ReturnWhileMoverStays,
        Variant::ReturnAfterMoverLeft,
        Variant::MoverLeaves,
    ];
}

pub fn tomi_story<R: Rng>(vocab: &Vocab, bank: &TemplateBank, rng: &mut R) -> Result<Story, GenError> {
    let variant = *Variant::ALL.choose(rng).expect("non-empty");
    let names = pick(rng, &vocab.names, 3, "names")?;
    let rooms = pick(rng, &vocab.rooms, 2, "rooms")?;
    let containers = pick(rng, &vocab.containers, 2, "containers")?;
    let objects = pick(rng, &vocab.objects, 3, "objects")?;
    let (a, b, c) = (names[0], names[1], names[2]);
    let (room, elsewhere) = (rooms[0], rooms[1]);
    let (c1, c2) = (containers[0], containers[1]);
    let target = objects[0];

    let mut d = Draft::default();
    let mut arrivals = vec![a, b];
    arrivals.shuffle(rng);
    for p in arrivals {
        d.enter(p, room);
    }
    if rng.gen_bool(0.5) {
        let where_c = if rng.gen_bool(0.5) { room } else { elsewhere };
        let mut tail = std::mem::take(&mut d.events);
        let at = rng.gen_range(0..=tail.len());
        d.events.extend(tail.drain(..at));
        d.enter(c, where_c);
        d.events.extend(tail);
    }
    d.place(target, c1, room);
    match variant {
        Variant::TrueBelief => {
            d.move_to(a, target, c2, room);
        }
        Variant::FalseBelief => {
            d.exit(b, room).move_to(a, target, c2, room);
        }
        Variant::ReturnWhileMoverStays => {
            d.exit(b, room).move_to(a, target, c2, room).enter(b, room);
        }
        Variant::ReturnAfterMoverLeft => {
            d.exit(b, room).move_to(a, target, c2, room).exit(a, room).enter(b, room);
        }
        Variant::MoverLeaves => {
            d.move_to(a, target, c2, room).exit(a, room);
        }
    }
    insert_opinions(&mut d, &objects[1..], rng);

    let phrasing = if rng.gen_bool(0.5) { Phrasing::Look } else { Phrasing::Think };
    let second = if rng.gen_bool(0.5) { Phrasing::Look } else { Phrasing::Search };
    let own = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let asks = [
        (target, Ask::Belief(own(&[a]), phrasing)),
        (target, Ask::Belief(own(&[b]), phrasing)),
        (target, Ask::Belief(own(&[a, b]), second)),
        (target, Ask::Belief(own(&[b, a]), second)),
        (target, Ask::Reality),
        (target, Ask::Memory),
    ];
    d.finish(bank, &asks, Provenance::TomiFixed)
}

/// Up to two opinions about never-placed objects, each said by someone who
/// has already arrived, never last and never between a placement and its
/// room sentence.
fn insert_opinions<R: Rng>(d: &mut Draft, spare: &[&str], rng: &mut R) {
    let count = rng.gen_range(0..=2.min(spare.len()));
    for object in &spare[..count] {
        let slots: Vec<usize> = (1..d.events.len()).filter(|&i| !is_room_sentence(d, &d.events[i])).collect();
        let Some(&at) = slots.choose(rng) else { return };
        let speakers: Vec<String> = d.events[..at]
            .iter()
            .filter_map(|e| match e {
                PrimitiveKind::Enter { character, .. } => Some(character.clone()),
                _ => None,
            })
            .collect();
        let Some(who) = speakers.choose(rng).cloned() else { continue };
        let sentiment = if rng.gen_bool(0.5) { Sentiment::Likes } else { Sentiment::Hates };
        let tail = d.events.split_off(at);
        d.opinion(&who, object, sentiment);
        d.events.extend(tail);
    }
}

fn is_room_sentence(d: &Draft, e: &PrimitiveKind) -> bool {
    matches!(e, PrimitiveKind::ObjectLocation { location, .. }
        if d.entities.get(location) == Some(&crate::domain::EntityKind::Room))
}
