//! Immutable in-memory knowledge graph with qualifier-bearing statements.
//!
//! A [`Statement`] is a subject–predicate–object assertion that may carry
//! qualifiers (secondary predicate/value pairs). Qualifiers hold validity
//! times and contextual links such as "subject of"; they play the role of
//! both Wikidata qualifiers and Freebase mediator nodes.
//!
//! Predicates carry [`SchemaFlag`]s declared in the graph file. Grounding
//! reads them to find temporal qualifiers, part-of links and sequence
//! relations.

mod link;
mod paths;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::{Interval, TimeValue, OPEN_END, OPEN_START};

pub use link::{link_entities, EntityMention};
pub use paths::{shortest_paths, PathStep, PredicatePath, Target};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed graph document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("duplicate entity id `{0}`")]
    DuplicateEntity(String),
    #[error("duplicate predicate id `{0}`")]
    DuplicatePredicate(String),
    #[error("entity `{0}` has an empty label")]
    EmptyLabel(String),
    #[error("statement {index} ({summary}) references undeclared entity `{entity}`")]
    DanglingEntity {
        index: usize,
        summary: String,
        entity: String,
    },
    #[error("statement {index} ({summary}) references undeclared predicate `{predicate}`")]
    DanglingPredicate {
        index: usize,
        summary: String,
        predicate: String,
    },
    #[error("statement {index} ({summary}) has more than one {role} qualifier")]
    DuplicateTemporalRole {
        index: usize,
        summary: String,
        role: &'static str,
    },
    #[error("statement {index} ({summary}) has a non-time value for temporal qualifier `{predicate}`")]
    NonTimeQualifier {
        index: usize,
        summary: String,
        predicate: String,
    },
    #[error("predicate `{0}` is flagged both PRECEDES and SUCCEEDS")]
    ConflictingSequenceFlags(String),
    #[error("statement {0} starts after it ends")]
    InvertedSpan(usize),
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(pub String);

impl EntityId {
    pub fn new(id: impl Into<String>) -> Self {
        EntityId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PredicateId(pub String);

impl PredicateId {
    pub fn new(id: impl Into<String>) -> Self {
        PredicateId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PredicateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Index of a statement in load order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StatementId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(untagged)]
pub enum Literal {
    Time(TimeValue),
    Int(i64),
    Str(String),
}

impl Literal {
    pub fn as_time(&self) -> Option<&TimeValue> {
        match self {
            Literal::Time(t) => Some(t),
            _ => None,
        }
    }

    /// Integer reading of the literal; numeric strings count.
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Literal::Int(n) => Some(*n),
            Literal::Str(s) => s.trim().parse().ok(),
            Literal::Time(_) => None,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Time(t) => write!(f, "{t}"),
            Literal::Int(n) => write!(f, "{n}"),
            Literal::Str(s) => f.write_str(s),
        }
    }
}

/// Object or qualifier value of a statement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Entity(EntityId),
    Literal(Literal),
}

impl Node {
    pub fn as_entity(&self) -> Option<&EntityId> {
        match self {
            Node::Entity(e) => Some(e),
            Node::Literal(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SchemaFlag {
    TemporalPoint,
    TemporalStart,
    TemporalEnd,
    PartOf,
    Precedes,
    Succeeds,
    OrdinalAttribute,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub id: EntityId,
    pub label: String,
    pub aliases: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub id: PredicateId,
    pub label: String,
    pub flags: BTreeSet<SchemaFlag>,
}

impl Predicate {
    pub fn has(&self, flag: SchemaFlag) -> bool {
        self.flags.contains(&flag)
    }

    pub fn is_temporal(&self) -> bool {
        self.has(SchemaFlag::TemporalPoint) || self.has(SchemaFlag::TemporalStart) || self.has(SchemaFlag::TemporalEnd)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Qualifier {
    pub predicate: PredicateId,
    pub value: Node,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub subject: EntityId,
    pub predicate: PredicateId,
    pub object: Node,
    pub qualifiers: Vec<Qualifier>,
}

impl Statement {
    pub fn qualifier(&self, predicate: &PredicateId) -> Option<&Node> {
        self.qualifiers.iter().find(|q| &q.predicate == predicate).map(|q| &q.value)
    }

    fn summary(&self) -> String {
        format!("{} {} {}", self.subject, self.predicate, node_text(&self.object))
    }
}

fn node_text(node: &Node) -> String {
    match node {
        Node::Entity(e) => e.0.clone(),
        Node::Literal(l) => format!("\"{l}\""),
    }
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    #[serde(default)]
    pub entities: Vec<EntityDoc>,
    #[serde(default)]
    pub predicates: Vec<PredicateDoc>,
    #[serde(default)]
    pub statements: Vec<StatementDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityDoc {
    pub id: String,
    pub label: String,
    #[serde(default)]
    pub aliases: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredicateDoc {
    pub id: String,
    pub label: String,
    #[serde(default)]
    pub flags: Vec<SchemaFlag>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueDoc {
    Entity(String),
    Time(TimeValue),
    Int(i64),
    String(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualifierDoc {
    pub predicate: String,
    pub value: ValueDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatementDoc {
    pub subject: String,
    pub predicate: String,
    pub object: ValueDoc,
    #[serde(default)]
    pub qualifiers: Vec<QualifierDoc>,
}

impl From<ValueDoc> for Node {
    fn from(v: ValueDoc) -> Self {
        match v {
            ValueDoc::Entity(e) => Node::Entity(EntityId(e)),
            ValueDoc::Time(t) => Node::Literal(Literal::Time(t)),
            ValueDoc::Int(n) => Node::Literal(Literal::Int(n)),
            ValueDoc::String(s) => Node::Literal(Literal::Str(s)),
        }
    }
}

impl From<&Node> for ValueDoc {
    fn from(n: &Node) -> Self {
        match n {
            Node::Entity(e) => ValueDoc::Entity(e.0.clone()),
            Node::Literal(Literal::Time(t)) => ValueDoc::Time(t.clone()),
            Node::Literal(Literal::Int(n)) => ValueDoc::Int(*n),
            Node::Literal(Literal::Str(s)) => ValueDoc::String(s.clone()),
        }
    }
}

// ---------------------------------------------------------------------------
// Graph
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeGraph {
    entities: Vec<Entity>,
    entity_index: HashMap<EntityId, usize>,
    predicates: Vec<Predicate>,
    predicate_index: HashMap<PredicateId, usize>,
    statements: Vec<Statement>,
    by_subject: HashMap<EntityId, Vec<StatementId>>,
    by_object: HashMap<EntityId, Vec<StatementId>>,
    by_qualifier_value: HashMap<EntityId, Vec<StatementId>>,
    by_predicate: HashMap<PredicateId, Vec<StatementId>>,
}

impl KnowledgeGraph {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| GraphError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let doc: GraphDocument = serde_json::from_str(text)?;
        Self::from_document(doc)
    }

    pub fn from_document(doc: GraphDocument) -> Result<Self, GraphError> {
        let mut entities = Vec::with_capacity(doc.entities.len());
        let mut entity_index = HashMap::new();
        for e in doc.entities {
            if e.label.trim().is_empty() {
                return Err(GraphError::EmptyLabel(e.id));
            }
            let id = EntityId(e.id);
            if entity_index.insert(id.clone(), entities.len()).is_some() {
                return Err(GraphError::DuplicateEntity(id.0));
            }
            entities.push(Entity {
                id,
                label: e.label,
                aliases: e.aliases,
            });
        }

        let mut predicates = Vec::with_capacity(doc.predicates.len());
        let mut predicate_index = HashMap::new();
        for p in doc.predicates {
            let flags: BTreeSet<SchemaFlag> = p.flags.into_iter().collect();
            if flags.contains(&SchemaFlag::Precedes) && flags.contains(&SchemaFlag::Succeeds) {
                return Err(GraphError::ConflictingSequenceFlags(p.id));
            }
            let id = PredicateId(p.id);
            if predicate_index.insert(id.clone(), predicates.len()).is_some() {
                return Err(GraphError::DuplicatePredicate(id.0));
            }
            predicates.push(Predicate {
                id,
                label: p.label,
                flags,
            });
        }

        let mut graph = KnowledgeGraph {
            entities,
            entity_index,
            predicates,
            predicate_index,
            statements: Vec::with_capacity(doc.statements.len()),
            by_subject: HashMap::new(),
            by_object: HashMap::new(),
            by_qualifier_value: HashMap::new(),
            by_predicate: HashMap::new(),
        };
        for (index, s) in doc.statements.into_iter().enumerate() {
            let statement = Statement {
                subject: EntityId(s.subject),
                predicate: PredicateId(s.predicate),
                object: s.object.into(),
                qualifiers: s
                    .qualifiers
                    .into_iter()
                    .map(|q| Qualifier {
                        predicate: PredicateId(q.predicate),
                        value: q.value.into(),
                    })
                    .collect(),
            };
            graph.check_statement(index, &statement)?;
            graph.insert(statement);
            // Validity spans are checked once here so reads never fail later.
            graph.temporal_of(StatementId(index))?;
        }
        Ok(graph)
    }

    fn check_statement(&self, index: usize, s: &Statement) -> Result<(), GraphError> {
        let dangling_entity = |e: &EntityId| GraphError::DanglingEntity {
            index,
            summary: s.summary(),
            entity: e.0.clone(),
        };
        let dangling_predicate = |p: &PredicateId| GraphError::DanglingPredicate {
            index,
            summary: s.summary(),
            predicate: p.0.clone(),
        };
        if !self.entity_index.contains_key(&s.subject) {
            return Err(dangling_entity(&s.subject));
        }
        if !self.predicate_index.contains_key(&s.predicate) {
            return Err(dangling_predicate(&s.predicate));
        }
        if let Node::Entity(e) = &s.object {
            if !self.entity_index.contains_key(e) {
                return Err(dangling_entity(e));
            }
        }
        let mut roles = [0usize; 3];
        for q in &s.qualifiers {
            let predicate = self.predicate(&q.predicate).ok_or_else(|| dangling_predicate(&q.predicate))?;
            if let Node::Entity(e) = &q.value {
                if !self.entity_index.contains_key(e) {
                    return Err(dangling_entity(e));
                }
            }
            for (slot, (flag, role)) in [
                (SchemaFlag::TemporalPoint, "point"),
                (SchemaFlag::TemporalStart, "start"),
                (SchemaFlag::TemporalEnd, "end"),
            ]
            .into_iter()
            .enumerate()
            {
                if predicate.has(flag) {
                    if !matches!(q.value, Node::Literal(Literal::Time(_))) {
                        return Err(GraphError::NonTimeQualifier {
                            index,
                            summary: s.summary(),
                            predicate: q.predicate.0.clone(),
                        });
                    }
                    roles[slot] += 1;
                    if roles[slot] > 1 {
                        return Err(GraphError::DuplicateTemporalRole {
                            index,
                            summary: s.summary(),
                            role,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn insert(&mut self, s: Statement) {
        let id = StatementId(self.statements.len());
        self.by_subject.entry(s.subject.clone()).or_default().push(id);
        if let Node::Entity(o) = &s.object {
            self.by_object.entry(o.clone()).or_default().push(id);
        }
        for q in &s.qualifiers {
            if let Node::Entity(v) = &q.value {
                let list = self.by_qualifier_value.entry(v.clone()).or_default();
                if list.last() != Some(&id) {
                    list.push(id);
                }
            }
        }
        self.by_predicate.entry(s.predicate.clone()).or_default().push(id);
        self.statements.push(s);
    }

    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            entities: self
                .entities
                .iter()
                .map(|e| EntityDoc {
                    id: e.id.0.clone(),
                    label: e.label.clone(),
                    aliases: e.aliases.clone(),
                })
                .collect(),
            predicates: self
                .predicates
                .iter()
                .map(|p| PredicateDoc {
                    id: p.id.0.clone(),
                    label: p.label.clone(),
                    flags: p.flags.iter().copied().collect(),
                })
                .collect(),
            statements: self
                .statements
                .iter()
                .map(|s| StatementDoc {
                    subject: s.subject.0.clone(),
                    predicate: s.predicate.0.clone(),
                    object: (&s.object).into(),
                    qualifiers: s
                        .qualifiers
                        .iter()
                        .map(|q| QualifierDoc {
                            predicate: q.predicate.0.clone(),
                            value: (&q.value).into(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("graph documents always serialize")
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.predicates
    }

    pub fn statements(&self) -> &[Statement] {
        &self.statements
    }

    pub fn statement_ids(&self) -> impl Iterator<Item = StatementId> {
        (0..self.statements.len()).map(StatementId)
    }

    pub fn statement(&self, id: StatementId) -> &Statement {
        &self.statements[id.0]
    }

    pub fn entity(&self, id: &EntityId) -> Option<&Entity> {
        self.entity_index.get(id).map(|&i| &self.entities[i])
    }

    pub fn contains_entity(&self, id: &EntityId) -> bool {
        self.entity_index.contains_key(id)
    }

    pub fn predicate(&self, id: &PredicateId) -> Option<&Predicate> {
        self.predicate_index.get(id).map(|&i| &self.predicates[i])
    }

    pub fn has_flag(&self, id: &PredicateId, flag: SchemaFlag) -> bool {
        self.predicate(id).is_some_and(|p| p.has(flag))
    }

    pub fn entity_label<'a>(&'a self, id: &'a EntityId) -> &'a str {
        self.entity(id).map_or(id.as_str(), |e| e.label.as_str())
    }

    pub fn predicate_label<'a>(&'a self, id: &'a PredicateId) -> &'a str {
        self.predicate(id).map_or(id.as_str(), |p| p.label.as_str())
    }

    pub fn predicates_with(&self, flag: SchemaFlag) -> impl Iterator<Item = &Predicate> {
        self.predicates.iter().filter(move |p| p.has(flag))
    }

    pub fn by_subject(&self, e: &EntityId) -> &[StatementId] {
        self.by_subject.get(e).map_or(&[], Vec::as_slice)
    }

    pub fn by_object(&self, e: &EntityId) -> &[StatementId] {
        self.by_object.get(e).map_or(&[], Vec::as_slice)
    }

    pub fn by_qualifier_value(&self, e: &EntityId) -> &[StatementId] {
        self.by_qualifier_value.get(e).map_or(&[], Vec::as_slice)
    }

    pub fn by_predicate(&self, p: &PredicateId) -> &[StatementId] {
        self.by_predicate.get(p).map_or(&[], Vec::as_slice)
    }

    /// Every statement mentioning `e` as subject, object or qualifier value,
    /// in insertion order.
    pub fn neighbors(&self, e: &EntityId) -> Result<Vec<StatementId>, GraphError> {
        if !self.contains_entity(e) {
            return Err(GraphError::UnknownEntity(e.0.clone()));
        }
        let mut ids: Vec<StatementId> = self
            .by_subject(e)
            .iter()
            .chain(self.by_object(e))
            .chain(self.by_qualifier_value(e))
            .copied()
            .collect();
        ids.sort_unstable();
        ids.dedup();
        Ok(ids)
    }

    /// Validity interval of a statement from its temporal qualifiers.
    ///
    /// A point qualifier wins over start/end. A start without an end (or the
    /// reverse) yields an interval open on the missing side.
    pub fn temporal_of(&self, id: StatementId) -> Result<Option<Interval>, GraphError> {
        let s = self.statement(id);
        let (mut point, mut start, mut end) = (None, None, None);
        for q in &s.qualifiers {
            let Some(t) = (match &q.value {
                Node::Literal(Literal::Time(t)) => Some(t),
                _ => None,
            }) else {
                continue;
            };
            let Some(p) = self.predicate(&q.predicate) else { continue };
            if p.has(SchemaFlag::TemporalPoint) {
                point = Some(t.interval());
            } else if p.has(SchemaFlag::TemporalStart) {
                start = Some(t.interval());
            } else if p.has(SchemaFlag::TemporalEnd) {
                end = Some(t.interval());
            }
        }
        if point.is_some() {
            return Ok(point);
        }
        match (start, end) {
            (None, None) => Ok(None),
            (Some(s), None) => Ok(Some(Interval { start: s.start, end: OPEN_END })),
            (None, Some(e)) => Ok(Some(Interval { start: OPEN_START, end: e.end })),
            (Some(s), Some(e)) => Interval::new(s.start, e.end)
                .filter(|_| s.start <= e.start)
                .map(Some)
                .ok_or(GraphError::InvertedSpan(id.0)),
        }
    }

    /// The time value that stands for a statement's validity: the point
    /// qualifier, else the start, else the end.
    pub fn anchor_time(&self, id: StatementId) -> Option<&TimeValue> {
        let s = self.statement(id);
        let find = |flag| {
            s.qualifiers.iter().find_map(|q| match &q.value {
                Node::Literal(Literal::Time(t)) if self.has_flag(&q.predicate, flag) => Some(t),
                _ => None,
            })
        };
        find(SchemaFlag::TemporalPoint)
            .or_else(|| find(SchemaFlag::TemporalStart))
            .or_else(|| find(SchemaFlag::TemporalEnd))
    }

    /// Statements giving `e` its own time, e.g. `time` on a named event.
    pub fn event_time_statements(&self, e: &EntityId) -> Vec<StatementId> {
        self.by_subject(e)
            .iter()
            .copied()
            .filter(|&id| {
                let s = self.statement(id);
                matches!(s.object, Node::Literal(Literal::Time(_))) && self.has_flag(&s.predicate, SchemaFlag::TemporalPoint)
            })
            .collect()
    }

    /// Interval of the named event `e`, when it has a point-time attribute.
    pub fn event_time(&self, e: &EntityId) -> Option<Interval> {
        self.event_time_statements(e).first().and_then(|&id| match &self.statement(id).object {
            Node::Literal(Literal::Time(t)) => Some(t.interval()),
            _ => None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_graph() -> KnowledgeGraph {
        KnowledgeGraph::from_json(
            r#"{
              "entities": [
                {"id": "a", "label": "A"},
                {"id": "b", "label": "B", "aliases": ["bee"]},
                {"id": "c", "label": "C"},
                {"id": "lonely", "label": "Lonely"}
              ],
              "predicates": [
                {"id": "rel", "label": "rel"},
                {"id": "start", "label": "start time", "flags": ["TEMPORAL_START"]},
                {"id": "end", "label": "end time", "flags": ["TEMPORAL_END"]},
                {"id": "at", "label": "point in time", "flags": ["TEMPORAL_POINT"]},
                {"id": "ctx", "label": "context"}
              ],
              "statements": [
                {"subject": "a", "predicate": "rel", "object": {"entity": "b"},
                 "qualifiers": [{"predicate": "start", "value": {"time": "1506"}},
                                {"predicate": "end", "value": {"time": "1533"}}]},
                {"subject": "b", "predicate": "rel", "object": {"int": 7}},
                {"subject": "c", "predicate": "rel", "object": {"string": "x"},
                 "qualifiers": [{"predicate": "ctx", "value": {"entity": "a"}}]},
                {"subject": "c", "predicate": "at", "object": {"time": "1980-12-08"}}
              ]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn empty_statements_is_valid() {
        let g = KnowledgeGraph::from_json(r#"{"entities": [], "predicates": [], "statements": []}"#).unwrap();
        assert!(g.statements().is_empty());
    }

    #[test]
    fn dangling_entity_is_rejected() {
        let err = KnowledgeGraph::from_json(
            r#"{"entities": [{"id": "a", "label": "A"}],
                "predicates": [{"id": "p", "label": "p"}],
                "statements": [{"subject": "a", "predicate": "p", "object": {"entity": "ghost"}}]}"#,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, GraphError::DanglingEntity { ref entity, .. } if entity == "ghost"));
        assert!(msg.contains("statement 0"), "{msg}");
    }

    #[test]
    fn duplicate_entity_is_rejected() {
        let err = KnowledgeGraph::from_json(
            r#"{"entities": [{"id": "a", "label": "A"}, {"id": "a", "label": "again"}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, GraphError::DuplicateEntity(id) if id == "a"));
    }

    #[test]
    fn conflicting_sequence_flags_are_rejected() {
        let err = KnowledgeGraph::from_json(
            r#"{"predicates": [{"id": "p", "label": "p", "flags": ["PRECEDES", "SUCCEEDS"]}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, GraphError::ConflictingSequenceFlags(_)));
    }

    #[test]
    fn two_start_qualifiers_are_rejected() {
        let err = KnowledgeGraph::from_json(
            r#"{"entities": [{"id": "a", "label": "A"}],
                "predicates": [{"id": "p", "label": "p"}, {"id": "s", "label": "s", "flags": ["TEMPORAL_START"]}],
                "statements": [{"subject": "a", "predicate": "p", "object": {"int": 1},
                  "qualifiers": [{"predicate": "s", "value": {"time": "1900"}},
                                 {"predicate": "s", "value": {"time": "1901"}}]}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, GraphError::DuplicateTemporalRole { role: "start", .. }));
    }

    #[test]
    fn inverted_span_is_a_data_error() {
        let err = KnowledgeGraph::from_json(
            r#"{"entities": [{"id": "a", "label": "A"}],
                "predicates": [{"id": "p", "label": "p"},
                               {"id": "s", "label": "s", "flags": ["TEMPORAL_START"]},
                               {"id": "e", "label": "e", "flags": ["TEMPORAL_END"]}],
                "statements": [{"subject": "a", "predicate": "p", "object": {"int": 1},
                  "qualifiers": [{"predicate": "s", "value": {"time": "1950"}},
                                 {"predicate": "e", "value": {"time": "1900"}}]}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, GraphError::InvertedSpan(0)));
    }

    #[test]
    fn neighbors_cover_all_roles() {
        let g = small_graph();
        let a = EntityId::new("a");
        assert_eq!(g.neighbors(&a).unwrap(), vec![StatementId(0), StatementId(2)]);
        assert!(g.neighbors(&EntityId::new("lonely")).unwrap().is_empty());
        assert!(matches!(g.neighbors(&EntityId::new("nope")), Err(GraphError::UnknownEntity(_))));
    }

    #[test]
    fn start_end_span() {
        let g = small_graph();
        let iv = g.temporal_of(StatementId(0)).unwrap().unwrap();
        assert_eq!(iv, TimeValue::year(1506).interval().hull(&TimeValue::year(1533).interval()));
        assert_eq!(iv.to_string(), "[1506-01-01, 1534-01-01)");
        assert_eq!(g.anchor_time(StatementId(0)).unwrap().canonical(), "1506");
        assert_eq!(g.temporal_of(StatementId(1)).unwrap(), None);
    }

    #[test]
    fn event_time_from_point_attribute() {
        let g = small_graph();
        let iv = g.event_time(&EntityId::new("c")).unwrap();
        assert_eq!(iv, TimeValue::parse("1980-12-08").unwrap().interval());
        assert_eq!(g.event_time(&EntityId::new("a")), None);
    }

    #[test]
    fn dump_and_reload_is_a_fixpoint() {
        let g = small_graph();
        let again = KnowledgeGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(again, g);
        assert_eq!(again.to_json(), g.to_json());
    }

    fn arb_document() -> impl Strategy<Value = GraphDocument> {
        let n_entities = 1usize..8;
        n_entities.prop_flat_map(|n| {
            let statement = (0..n, 0usize..3, prop_oneof![(0..n).prop_map(Some), Just(None)], proptest::option::of(0..n));
            proptest::collection::vec(statement, 0..30).prop_map(move |raw| GraphDocument {
                entities: (0..n)
                    .map(|i| EntityDoc {
                        id: format!("e{i}"),
                        label: format!("Entity {i}"),
                        aliases: vec![],
                    })
                    .collect(),
                predicates: (0..3)
                    .map(|i| PredicateDoc {
                        id: format!("p{i}"),
                        label: format!("pred {i}"),
                        flags: vec![],
                    })
                    .collect(),
                statements: raw
                    .into_iter()
                    .map(|(s, p, o, q)| StatementDoc {
                        subject: format!("e{s}"),
                        predicate: format!("p{p}"),
                        object: match o {
                            Some(o) => ValueDoc::Entity(format!("e{o}")),
                            None => ValueDoc::Int(p as i64),
                        },
                        qualifiers: q
                            .map(|q| QualifierDoc {
                                predicate: "p0".into(),
                                value: ValueDoc::Entity(format!("e{q}")),
                            })
                            .into_iter()
                            .collect(),
                    })
                    .collect(),
            })
        })
    }

    proptest! {
        #[test]
        fn indexes_are_coherent(doc in arb_document()) {
            let g = KnowledgeGraph::from_document(doc).unwrap();
            for id in g.statement_ids() {
                let s = g.statement(id);
                prop_assert!(g.by_subject(&s.subject).contains(&id));
                prop_assert!(g.by_predicate(&s.predicate).contains(&id));
                prop_assert!(g.neighbors(&s.subject).unwrap().contains(&id));
                if let Node::Entity(o) = &s.object {
                    prop_assert!(g.by_object(o).contains(&id));
                    prop_assert!(g.neighbors(o).unwrap().contains(&id));
                }
                for q in &s.qualifiers {
                    if let Node::Entity(v) = &q.value {
                        prop_assert!(g.neighbors(v).unwrap().contains(&id));
                    }
                }
            }
            // Nothing reachable from an index key that doesn't mention the key.
            for e in g.entities() {
                for &id in &g.neighbors(&e.id).unwrap() {
                    let s = g.statement(id);
                    let mentions = s.subject == e.id
                        || s.object.as_entity() == Some(&e.id)
                        || s.qualifiers.iter().any(|q| q.value.as_entity() == Some(&e.id));
                    prop_assert!(mentions);
                }
            }
        }

        #[test]
        fn reload_fixpoint(doc in arb_document()) {
            let g = KnowledgeGraph::from_document(doc).unwrap();
            let again = KnowledgeGraph::from_json(&g.to_json()).unwrap();
            prop_assert_eq!(again, g);
        }
    }
}
