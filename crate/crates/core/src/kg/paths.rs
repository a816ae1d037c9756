//! Minimal predicate paths between an entity and a set of targets.

use std::collections::BTreeSet;

use super::{EntityId, KnowledgeGraph, Literal, Node, PredicateId};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PathStep {
    /// Traverse from subject to object.
    Forward(PredicateId),
    /// Traverse from object back to subject.
    Backward(PredicateId),
}

pub type PredicatePath = Vec<PathStep>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    Entity(EntityId),
    Literal(Literal),
}

impl From<&Node> for Target {
    fn from(n: &Node) -> Self {
        match n {
            Node::Entity(e) => Target::Entity(e.clone()),
            Node::Literal(l) => Target::Literal(l.clone()),
        }
    }
}

fn one_hop(g: &KnowledgeGraph, from: &EntityId) -> Vec<(PathStep, Target)> {
    let mut out = Vec::new();
    for &id in g.by_subject(from) {
        let s = g.statement(id);
        out.push((PathStep::Forward(s.predicate.clone()), Target::from(&s.object)));
    }
    for &id in g.by_object(from) {
        let s = g.statement(id);
        out.push((PathStep::Backward(s.predicate.clone()), Target::Entity(s.subject.clone())));
    }
    out
}

/// All shortest predicate paths (at most `max_hops`, clamped to 1..=2) from
/// `from` to any member of `to`. Zero-hop matches are excluded.
pub fn shortest_paths(g: &KnowledgeGraph, from: &EntityId, to: &BTreeSet<Target>, max_hops: usize) -> Vec<PredicatePath> {
    let max_hops = max_hops.clamp(1, 2);
    let first = one_hop(g, from);
    let mut found: BTreeSet<PredicatePath> = first
        .iter()
        .filter(|(_, t)| to.contains(t))
        .map(|(step, _)| vec![step.clone()])
        .collect();
    if !found.is_empty() || max_hops == 1 {
        return found.into_iter().collect();
    }
    for (step, mid) in &first {
        let Target::Entity(mid) = mid else { continue };
        for (second, end) in one_hop(g, mid) {
            if to.contains(&end) {
                found.insert(vec![step.clone(), second]);
            }
        }
    }
    found.into_iter().collect()
}
