//! Entity graphs with per-edge provenance.
//!
//! Connectivity only follows spatial edges and ignores direction; opinion
//! edges are stored for answering and filtering but never join components.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::domain::{BeliefKey, Story, Triple};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge {0} is not in the graph")]
    EdgeNotFound(Triple),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphRole {
    Global,
    Local(BeliefKey),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeliefGraph {
    role: GraphRole,
    nodes: BTreeSet<String>,
    /// Edge to the index of the sentence it came from.
    edges: BTreeMap<Triple, usize>,
}

impl BeliefGraph {
    pub fn new(role: GraphRole) -> Self {
        BeliefGraph { role, nodes: BTreeSet::new(), edges: BTreeMap::new() }
    }

    pub fn global() -> Self {
        Self::new(GraphRole::Global)
    }

    pub fn local(key: BeliefKey) -> Self {
        Self::new(GraphRole::Local(key))
    }

    pub fn role(&self) -> &GraphRole {
        &self.role
    }

    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    pub fn contains_node(&self, name: &str) -> bool {
        self.nodes.contains(name)
    }

    pub fn edges(&self) -> impl Iterator<Item = (&Triple, usize)> {
        self.edges.iter().map(|(t, p)| (t, *p))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn provenance(&self, t: &Triple) -> Option<usize> {
        self.edges.get(t).copied()
    }

    pub fn add_node(&mut self, name: &str) {
        if !self.nodes.contains(name) {
            self.nodes.insert(name.to_string());
        }
    }

    /// Inserts `t`, or refreshes its provenance to `prov` if present.
    pub fn add_edge(&mut self, t: Triple, prov: usize) {
        self.add_node(&t.subject);
        self.add_node(&t.object);
        self.edges.insert(t, prov);
    }

    /// Removes every edge in `edges`; nodes stay. Fails without modifying
    /// the graph if any edge is missing.
    pub fn remove_edges<'a, I>(&mut self, edges: I) -> Result<(), GraphError>
    where
        I: IntoIterator<Item = &'a Triple>,
    {
        let edges: Vec<&Triple> = edges.into_iter().collect();
        if let Some(missing) = edges.iter().find(|t| !self.edges.contains_key(**t)) {
            return Err(GraphError::EdgeNotFound((*missing).clone()));
        }
        for t in edges {
            self.edges.remove(t);
        }
        Ok(())
    }

    /// Location recorded for `subject`, if any.
    pub fn location_of(&self, subject: &str) -> Option<(&str, usize)> {
        self.edges.iter().find(|(t, _)| t.is_spatial() && t.subject == subject).map(|(t, p)| (t.object.as_str(), *p))
    }

    /// Nodes reachable from `seed` through spatial edges in either
    /// direction. An unknown seed is its own component.
    pub fn connected_component(&self, seed: &str) -> BTreeSet<String> {
        let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for t in self.edges.keys().filter(|t| t.is_spatial()) {
            adjacency.entry(&t.subject).or_default().push(&t.object);
            adjacency.entry(&t.object).or_default().push(&t.subject);
        }
        let mut seen = BTreeSet::from([seed.to_string()]);
        let mut queue = VecDeque::from([seed]);
        while let Some(n) = queue.pop_front() {
            for next in adjacency.get(n).into_iter().flatten() {
                if seen.insert((*next).to_string()) {
                    queue.push_back(next);
                }
            }
        }
        seen
    }

    /// Spatial edges with both endpoints in `nodes`, with provenance.
    pub fn spatial_edges_within(&self, nodes: &BTreeSet<String>) -> Vec<(Triple, usize)> {
        self.edges
            .iter()
            .filter(|(t, _)| t.is_spatial() && nodes.contains(&t.subject) && nodes.contains(&t.object))
            .map(|(t, p)| (t.clone(), *p))
            .collect()
    }

    /// Each represented sentence index paired with its edge, in story order.
    pub fn represented(&self) -> Vec<(usize, Triple)> {
        let mut out: Vec<(usize, Triple)> = self.edges.iter().map(|(t, p)| (*p, t.clone())).collect();
        out.sort();
        out
    }

    /// The verbatim story sentences this graph was built from, in order.
    pub fn sentences_represented_by_graph<'s>(&self, story: &'s Story) -> Vec<(usize, &'s str)> {
        let idx: BTreeSet<usize> = self.edges.values().copied().collect();
        idx.into_iter().filter_map(|i| story.sentences.get(i).map(|s| (i, s.raw_text.as_str()))).collect()
    }

    /// Deterministic text form: role, sorted nodes, sorted edges.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        match &self.role {
            GraphRole::Global => out.push_str("graph global\n"),
            GraphRole::Local(k) => {
                let _ = writeln!(out, "graph local {k}");
            }
        }
        for n in &self.nodes {
            let _ = writeln!(out, "node {n}");
        }
        for (t, p) in &self.edges {
            let _ = writeln!(out, "edge {t} @{p}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Relation, Sentiment};

    fn likes(a: &str, b: &str) -> Triple {
        Triple::new(a, Relation::opinion(Sentiment::Likes), b)
    }

    #[test]
    fn add_to_empty_graph() {
        let mut g = BeliefGraph::global();
        g.add_edge(Triple::located("celery", "basket"), 0);
        assert_eq!(g.nodes().len(), 2);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn readding_refreshes_provenance() {
        let mut g = BeliefGraph::global();
        g.add_edge(Triple::located("celery", "basket"), 0);
        g.add_edge(Triple::located("celery", "basket"), 4);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.provenance(&Triple::located("celery", "basket")), Some(4));
    }

    #[test]
    fn removal_keeps_nodes() {
        let mut g = BeliefGraph::global();
        g.add_edge(Triple::located("celery", "basket"), 0);
        g.add_edge(Triple::located("celery", "box"), 1);
        g.remove_edges([&Triple::located("celery", "basket")]).unwrap();
        assert_eq!(g.represented(), vec![(1, Triple::located("celery", "box"))]);
        assert_eq!(g.nodes().len(), 3);
        g.remove_edges(std::iter::empty()).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn removing_missing_edge_fails_atomically() {
        let mut g = BeliefGraph::global();
        g.add_edge(Triple::located("a", "b"), 0);
        let before = g.clone();
        let err = g.remove_edges([&Triple::located("a", "b"), &Triple::located("x", "y")]).unwrap_err();
        assert_eq!(err, GraphError::EdgeNotFound(Triple::located("x", "y")));
        assert_eq!(g, before);
    }

    #[test]
    fn components_ignore_opinions_and_direction() {
        let mut g = BeliefGraph::global();
        g.add_edge(Triple::located("Liam", "kitchen"), 0);
        g.add_edge(Triple::located("box", "kitchen"), 1);
        g.add_edge(Triple::located("objectA", "basket"), 2);
        g.add_edge(Triple::located("basket", "front yard"), 3);
        g.add_edge(likes("Liam", "objectA"), 4);
        let c = g.connected_component("Liam");
        assert_eq!(c, ["Liam", "box", "kitchen"].into_iter().map(String::from).collect());
        assert_eq!(g.connected_component("nobody"), BTreeSet::from(["nobody".to_string()]));
    }

    #[test]
    fn dump_is_sorted() {
        let mut g = BeliefGraph::global();
        g.add_edge(Triple::located("b", "r"), 1);
        g.add_edge(Triple::located("a", "r"), 0);
        assert_eq!(g.dump(), "graph global\nnode a\nnode b\nnode r\nedge (a, is in, r) @0\nedge (b, is in, r) @1\n");
    }
}
