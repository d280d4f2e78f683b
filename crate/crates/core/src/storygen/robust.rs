//! Story-structure robustness sets.
//!
//! D1 chains two false-belief episodes with the same two characters in two
//! rooms. D2 has three characters, one of whom leaves before the first move
//! while another makes a second move unseen. D3 moves one object across
//! four containers, with the observer arriving just before the first mover
//! leaves.

use rand::Rng;

use super::{pick, Ask, Draft, GenError, Phrasing, Vocab};
use crate::domain::{Provenance, Story};
use crate::semantics::TemplateBank;

fn own(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

pub fn d1_story<R: Rng>(vocab: &Vocab, bank: &TemplateBank, rng: &mut R) -> Result<Story, GenError> {
    let p = pick(rng, &vocab.names, 2, "names")?;
    let r = pick(rng, &vocab.rooms, 2, "rooms")?;
    let c = pick(rng, &vocab.containers, 4, "containers")?;
    let o = pick(rng, &vocab.objects, 2, "objects")?;
    let mut d = Draft::default();
    d.enter(p[0], r[0])
        .enter(p[1], r[0])
        .place(o[0], c[0], r[0])
        .exit(p[1], r[0])
        .move_to(p[0], o[0], c[1], r[0])
        .exit(p[0], r[0])
        .enter(p[1], r[1])
        .enter(p[0], r[1])
        .place(o[1], c[2], r[1])
        .exit(p[0], r[1])
        .move_to(p[1], o[1], c[3], r[1])
        .exit(p[1], r[1]);
    let mut asks = Vec::new();
    for target in [o[0], o[1]] {
        asks.push((target, Ask::Belief(own(&[p[0], p[1]]), Phrasing::Search)));
        asks.push((target, Ask::Belief(own(&[p[1], p[0]]), Phrasing::Search)));
    }
    d.finish(bank, &asks, Provenance::D1)
}

pub fn d2_story<R: Rng>(vocab: &Vocab, bank: &TemplateBank, rng: &mut R) -> Result<Story, GenError> {
    let p = pick(rng, &vocab.names, 3, "names")?;
    let r = pick(rng, &vocab.rooms, 1, "rooms")?;
    let c = pick(rng, &vocab.containers, 3, "containers")?;
    let o = pick(rng, &vocab.objects, 1, "objects")?;
    let mut d = Draft::default();
    d.enter(p[0], r[0])
        .enter(p[1], r[0])
        .enter(p[2], r[0])
        .place(o[0], c[0], r[0])
        .exit(p[1], r[0])
        .move_to(p[0], o[0], c[1], r[0])
        .exit(p[0], r[0])
        .move_to(p[2], o[0], c[2], r[0])
        .exit(p[2], r[0]);
    let mut asks = Vec::new();
    for a in 0..3 {
        for b in 0..3 {
            if a != b {
                asks.push((o[0], Ask::Belief(own(&[p[a], p[b]]), Phrasing::Search)));
            }
        }
    }
    for chain in third_order_chains() {
        let names: Vec<&str> = chain.iter().map(|&i| p[i]).collect();
        asks.push((o[0], Ask::Belief(own(&names), Phrasing::Search)));
    }
    d.finish(bank, &asks, Provenance::D2)
}

/// The six orderings of three characters plus the two alternating chains
/// of the first and third character.
pub fn third_order_chains() -> [[usize; 3]; 8] {
    [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0], [0, 2, 0], [2, 0, 2]]
}

pub fn d3_story<R: Rng>(vocab: &Vocab, bank: &TemplateBank, rng: &mut R) -> Result<Story, GenError> {
    let p = pick(rng, &vocab.names, 2, "names")?;
    let r = pick(rng, &vocab.rooms, 1, "rooms")?;
    let c = pick(rng, &vocab.containers, 4, "containers")?;
    let o = pick(rng, &vocab.objects, 1, "objects")?;
    let mut d = Draft::default();
    d.is_in(p[0], r[0])
        .place(o[0], c[0], r[0])
        .move_to(p[0], o[0], c[1], r[0])
        .enter(p[1], r[0])
        .exit(p[0], r[0])
        .move_to(p[1], o[0], c[2], r[0])
        .move_to(p[1], o[0], c[3], r[0]);
    let asks = [
        (o[0], Ask::Belief(own(&[p[0]]), Phrasing::Look)),
        (o[0], Ask::Belief(own(&[p[1]]), Phrasing::Look)),
        (o[0], Ask::Belief(own(&[p[0], p[1]]), Phrasing::Search)),
        (o[0], Ask::Belief(own(&[p[1], p[0]]), Phrasing::Search)),
    ];
    d.finish(bank, &asks, Provenance::D3)
}
