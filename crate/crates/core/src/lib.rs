//! Nested belief tracking for theory-of-mind question answering.
//!
//! Stories are read sentence by sentence into a global graph of what is
//! true and one local graph per character chain of what that chain
//! believes. Questions are answered by reading the right graph back as
//! text. The `storygen` and `oracle` modules produce labelled benchmark
//! stories and an independent reference semantics; `harness` ties it all
//! together for evaluation.

pub mod beliefgraph;
pub mod domain;
pub mod harness;
pub mod oracle;
pub mod qa;
pub mod semantics;
pub mod storygen;
pub mod tracker;
