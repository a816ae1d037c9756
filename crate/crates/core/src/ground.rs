//! Grounding of interpretation templates into candidate query graphs.
//!
//! Every candidate carries a [`Plan`]: the slot fills (anchor entities,
//! predicates, qualifiers, reference times) it was built from. Replaying a
//! plan against the graph checks each fill and rebuilds the same query.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;
use std::path::Path as FsPath;

use indexmap::IndexSet;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::annotate::{annotate, AnnotationDoc, OrdinalDirection};
use crate::evoke::{evoke_constraints, evoke_interpretations, InterpretationTemplate, Structure, TemporalConstraint};
use crate::kg::{link_entities, EntityId, KnowledgeGraph, Literal, Node, PredicateId, SchemaFlag, StatementId};
use crate::query::{
    serialize, solutions, FilterArg, OrdinalSelector, Pattern, QueryGraph, SerializeMode, TemporalFilter, Term, Value, Var,
};
use crate::rank::lexical_score;
use crate::time::{satisfies, ComparisonPredicate, TimeMlRelType, TimeValue};

#[derive(Debug, Error)]
pub enum GroundError {
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("predicate `{predicate}` lacks the {flag:?} flag")]
    MissingFlag { predicate: String, flag: SchemaFlag },
    #[error("no statement `{0}` in the graph")]
    MissingStatement(String),
    #[error("plan has no statement to project a time from")]
    NoStatement,
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed config: {0}")]
    Config(#[from] serde_json::Error),
}

fn structures_to_numbers<S: Serializer>(set: &BTreeSet<Structure>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(set.iter().map(|x| x.number()))
}

fn structures_from_numbers<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeSet<Structure>, D::Error> {
    Vec::<u8>::deserialize(d)?
        .into_iter()
        .map(|n| Structure::from_number(n).ok_or_else(|| serde::de::Error::custom(format!("no structure IS-{n}"))))
        .collect()
}

fn all_structures() -> BTreeSet<Structure> {
    Structure::ALL.into_iter().collect()
}

fn default_beam() -> usize {
    8
}

fn default_hops() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundingConfig {
    #[serde(
        rename = "enabled_is",
        default = "all_structures",
        serialize_with = "structures_to_numbers",
        deserialize_with = "structures_from_numbers"
    )]
    pub enabled: BTreeSet<Structure>,
    /// Options kept per slot, best lexical match first.
    #[serde(default = "default_beam")]
    pub beam_width: usize,
    #[serde(default = "default_hops")]
    pub max_hops: usize,
}

impl Default for GroundingConfig {
    fn default() -> Self {
        GroundingConfig { enabled: all_structures(), beam_width: default_beam(), max_hops: default_hops() }
    }
}

impl GroundingConfig {
    pub fn from_json(text: &str) -> Result<Self, GroundError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<FsPath>) -> Result<Self, GroundError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn without(mut self, disabled: &[Structure]) -> Self {
        for s in disabled {
            self.enabled.remove(s);
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Subject,
    Object,
}

/// A one- or two-hop path from an anchor entity to the answer. The last
/// statement on the path is the one filters and ordinals look at.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "path", rename_all = "snake_case")]
pub enum Path {
    /// `anchor -p-> ANS`
    Out { anchor: EntityId, predicate: PredicateId },
    /// `ANS -p-> anchor`
    In { anchor: EntityId, predicate: PredicateId },
    /// A qualifier value of a statement on the anchor.
    QualOut { anchor: EntityId, predicate: PredicateId, qualifier: PredicateId, anchor_side: Side },
    /// An end of a statement qualified by the anchor.
    QualAnchor { anchor: EntityId, qualifier: PredicateId, predicate: PredicateId, answer_side: Side },
    /// Through an intermediate entity.
    TwoHop { anchor: EntityId, first: PredicateId, first_forward: bool, second: PredicateId, second_forward: bool },
}

impl Path {
    pub fn anchor(&self) -> &EntityId {
        match self {
            Path::Out { anchor, .. }
            | Path::In { anchor, .. }
            | Path::QualOut { anchor, .. }
            | Path::QualAnchor { anchor, .. }
            | Path::TwoHop { anchor, .. } => anchor,
        }
    }

    fn predicates(&self) -> Vec<&PredicateId> {
        match self {
            Path::Out { predicate, .. } | Path::In { predicate, .. } => vec![predicate],
            Path::QualOut { predicate, qualifier, .. } | Path::QualAnchor { predicate, qualifier, .. } => {
                vec![predicate, qualifier]
            }
            Path::TwoHop { first, second, .. } => vec![first, second],
        }
    }

    /// Patterns with variables prefixed by `pre`; returns the statement var.
    fn patterns(&self, pre: &str, answer: &Var) -> (Vec<Pattern>, Var) {
        let s = Var(format!("{pre}s"));
        let ans = Term::Var(answer.clone());
        let fact = |subject, predicate: &PredicateId, object| Pattern::Fact {
            stmt: Some(s.clone()),
            subject,
            predicate: predicate.clone(),
            object,
        };
        let ps = match self {
            Path::Out { anchor, predicate } => vec![fact(Term::entity(anchor), predicate, ans)],
            Path::In { anchor, predicate } => vec![fact(ans, predicate, Term::entity(anchor))],
            Path::QualOut { anchor, predicate, qualifier, anchor_side } => {
                let other = Term::Var(Var(format!("{pre}o")));
                let f = match anchor_side {
                    Side::Subject => fact(Term::entity(anchor), predicate, other),
                    Side::Object => fact(other, predicate, Term::entity(anchor)),
                };
                vec![f, Pattern::Qualifier { stmt: s.clone(), predicate: qualifier.clone(), value: ans }]
            }
            Path::QualAnchor { anchor, qualifier, predicate, answer_side } => {
                let other = Term::Var(Var(format!("{pre}o")));
                let f = match answer_side {
                    Side::Subject => fact(ans, predicate, other),
                    Side::Object => fact(other, predicate, ans),
                };
                vec![Pattern::Qualifier { stmt: s.clone(), predicate: qualifier.clone(), value: Term::entity(anchor) }, f]
            }
            Path::TwoHop { anchor, first, first_forward, second, second_forward } => {
                let m = Term::Var(Var(format!("{pre}m")));
                let hop1 = if *first_forward {
                    Pattern::fact(Term::entity(anchor), first, m.clone())
                } else {
                    Pattern::fact(m.clone(), first, Term::entity(anchor))
                };
                let hop2 = if *second_forward { fact(m, second, ans) } else { fact(ans, second, m) };
                vec![hop1, hop2]
            }
        };
        (ps, s)
    }

    /// Statements the path's last hop matches.
    pub fn statements(&self, g: &KnowledgeGraph) -> Vec<StatementId> {
        let (ps, s) = self.patterns("", &Var::answer());
        let q = QueryGraph::new(ps);
        let mut out: Vec<StatementId> = solutions(&q, g)
            .unwrap_or_default()
            .iter()
            .filter_map(|b| match b.get(&s) {
                Some(Value::Statement(id)) => Some(*id),
                _ => None,
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn is_temporal(&self, g: &KnowledgeGraph) -> bool {
        self.statements(g).iter().any(|&id| matches!(g.temporal_of(id), Ok(Some(_))))
    }

    fn check(&self, g: &KnowledgeGraph) -> Result<(), GroundError> {
        check_entity(g, self.anchor())?;
        self.predicates().into_iter().try_for_each(|p| check_predicate(g, p, None))
    }
}

/// Where the reference time of a comparison comes from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum TimeRef {
    /// A time expression in the question.
    Const { value: TimeValue },
    /// A named event's own time attribute.
    EventAttr { event: EntityId, predicate: PredicateId },
    /// An event entity linked to the anchor, `event -link-> anchor`.
    NeighborEvent { event: EntityId, link: PredicateId, anchor: EntityId, predicate: PredicateId },
    /// Validity time of a fact on the anchor.
    Qualified { path: Path },
}

impl TimeRef {
    fn patterns(&self) -> (Vec<Pattern>, FilterArg) {
        let rt = Var::new("rt");
        match self {
            TimeRef::Const { value } => (vec![], FilterArg::Const(value.clone())),
            TimeRef::EventAttr { event, predicate } => {
                (vec![Pattern::fact(Term::entity(event), predicate, Term::Var(rt.clone()))], FilterArg::Var(rt))
            }
            TimeRef::NeighborEvent { event, link, anchor, predicate } => (
                vec![
                    Pattern::fact(Term::entity(event), link, Term::entity(anchor)),
                    Pattern::fact(Term::entity(event), predicate, Term::Var(rt.clone())),
                ],
                FilterArg::Var(rt),
            ),
            TimeRef::Qualified { path } => {
                let (mut ps, s) = path.patterns("r", &Var::new("rans"));
                ps.push(Pattern::ValidTime { stmt: s, time: rt.clone() });
                (ps, FilterArg::Var(rt))
            }
        }
    }

    fn check(&self, g: &KnowledgeGraph) -> Result<(), GroundError> {
        match self {
            TimeRef::Const { .. } => Ok(()),
            TimeRef::EventAttr { event, predicate } => {
                check_entity(g, event)?;
                check_predicate(g, predicate, Some(SchemaFlag::TemporalPoint))
            }
            TimeRef::NeighborEvent { event, link, anchor, predicate } => {
                check_statement(g, event, link, anchor)?;
                check_predicate(g, predicate, Some(SchemaFlag::TemporalPoint))
            }
            TimeRef::Qualified { path } => path.check(g),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectValue {
    /// Matches this literal exactly.
    Equals(Literal),
    /// Matches a time inside this value.
    Within(TimeValue),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "target", rename_all = "snake_case")]
pub enum SeqTarget {
    Entity { entity: EntityId },
    /// The event entity reached by one hop from the anchor.
    Bridge { event: EntityId, link: PredicateId, anchor: EntityId },
}

/// Slot fills of a candidate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "plan", rename_all = "snake_case")]
pub enum Plan {
    Basic { path: Path },
    Compare { path: Path, predicate: ComparisonPredicate, reference: TimeRef },
    /// Answers with the validity time of the inner plan's answer statement.
    Project { inner: Box<Plan> },
    Order { path: Path, rank: u32, direction: OrdinalDirection },
    /// `on_entity` puts the attribute on the answer entity rather than on
    /// the path statement.
    Direct { path: Path, attribute: PredicateId, on_entity: bool, value: DirectValue },
    SameEntity { event: EntityId, link: PredicateId, anchor: EntityId, answer: Path },
    PartOf { path: Path, qualifier: PredicateId, event: EntityId },
    Sequent { predicate: PredicateId, answer_is_subject: bool, target: SeqTarget },
    Conjunction { parts: Vec<Plan> },
}

fn check_entity(g: &KnowledgeGraph, e: &EntityId) -> Result<(), GroundError> {
    g.contains_entity(e).then_some(()).ok_or_else(|| GroundError::UnknownEntity(e.0.clone()))
}

fn check_predicate(g: &KnowledgeGraph, p: &PredicateId, flag: Option<SchemaFlag>) -> Result<(), GroundError> {
    let pred = g.predicate(p).ok_or_else(|| GroundError::UnknownPredicate(p.0.clone()))?;
    match flag {
        Some(flag) if !pred.has(flag) => Err(GroundError::MissingFlag { predicate: p.0.clone(), flag }),
        _ => Ok(()),
    }
}

fn check_statement(g: &KnowledgeGraph, s: &EntityId, p: &PredicateId, o: &EntityId) -> Result<(), GroundError> {
    check_entity(g, s)?;
    check_entity(g, o)?;
    check_predicate(g, p, None)?;
    let found = g.by_subject(s).iter().any(|&id| {
        let st = g.statement(id);
        st.predicate == *p && st.object.as_entity() == Some(o)
    });
    found.then_some(()).ok_or_else(|| GroundError::MissingStatement(format!("{s} {p} {o}")))
}

fn add_time_filter(q: &mut QueryGraph, stmt: &Var, time: &str) -> Var {
    let existing = q.patterns.iter().find_map(|p| match p {
        Pattern::ValidTime { stmt: s, time } if s == stmt => Some(time.clone()),
        _ => None,
    });
    existing.unwrap_or_else(|| {
        let t = Var::new(time);
        q.patterns.push(Pattern::ValidTime { stmt: stmt.clone(), time: t.clone() });
        t
    })
}

impl Plan {
    pub fn structures(&self) -> BTreeSet<Structure> {
        match self {
            Plan::Basic { .. } => BTreeSet::new(),
            Plan::Compare { .. } => [Structure::Is1Comparison].into(),
            Plan::Project { inner } => {
                let mut s = inner.structures();
                s.insert(Structure::Is1Comparison);
                s
            }
            Plan::Order { .. } => [Structure::Is2Ordering].into(),
            Plan::Direct { .. } => [Structure::Is3Direct].into(),
            Plan::SameEntity { .. } => [Structure::Is4SameEntity].into(),
            Plan::PartOf { .. } => [Structure::Is5PartOf].into(),
            Plan::Sequent { .. } => [Structure::Is6Sequent].into(),
            Plan::Conjunction { parts } => parts.iter().flat_map(Plan::structures).collect(),
        }
    }

    /// The query graph plus the statement variable holding the answer fact.
    fn build_parts(&self) -> Result<(QueryGraph, Option<Var>), GroundError> {
        let ans = Var::answer();
        Ok(match self {
            Plan::Basic { path } => {
                let (ps, s) = path.patterns("", &ans);
                (QueryGraph::new(ps), Some(s))
            }
            Plan::Compare { path, predicate, reference } => {
                let (ps, s) = path.patterns("", &ans);
                let mut q = QueryGraph::new(ps);
                let t = add_time_filter(&mut q, &s, "t");
                let (rps, reference) = reference.patterns();
                q.patterns.extend(rps);
                (q.with_filter(TemporalFilter { predicate: *predicate, reference, subject: t }), Some(s))
            }
            Plan::Project { inner } => {
                let (q, s) = inner.build_parts()?;
                let s = s.ok_or(GroundError::NoStatement)?;
                let mut q = q.rename_var(&ans, &Var::new("y"));
                let t = add_time_filter(&mut q, &s, "pt");
                (q.with_answer(t), Some(s))
            }
            Plan::Order { path, rank, direction } => {
                let (ps, s) = path.patterns("", &ans);
                let mut q = QueryGraph::new(ps);
                let t = add_time_filter(&mut q, &s, "t");
                (q.with_ordinal(OrdinalSelector { key: t, rank: *rank, direction: *direction }), Some(s))
            }
            Plan::Direct { path, attribute, on_entity, value } => {
                let (ps, s) = path.patterns("", &ans);
                let mut q = QueryGraph::new(ps);
                let dt = Var::new("dt");
                let term = match value {
                    DirectValue::Equals(l) => Term::Literal(l.clone()),
                    DirectValue::Within(x) => {
                        q.filters.push(TemporalFilter {
                            predicate: ComparisonPredicate::IsIncluded,
                            reference: FilterArg::Const(x.clone()),
                            subject: dt.clone(),
                        });
                        Term::Var(dt)
                    }
                };
                q.patterns.push(if *on_entity {
                    Pattern::fact(Term::Var(ans), attribute, term)
                } else {
                    Pattern::Qualifier { stmt: s.clone(), predicate: attribute.clone(), value: term }
                });
                (q, Some(s))
            }
            Plan::SameEntity { event, link, anchor, answer } => {
                let (mut ps, s) = answer.patterns("", &ans);
                ps.push(Pattern::fact(Term::entity(event), link, Term::entity(anchor)));
                (QueryGraph::new(ps), Some(s))
            }
            Plan::PartOf { path, qualifier, event } => {
                let (mut ps, s) = path.patterns("", &ans);
                ps.push(Pattern::Qualifier { stmt: s.clone(), predicate: qualifier.clone(), value: Term::entity(event) });
                (QueryGraph::new(ps), Some(s))
            }
            Plan::Sequent { predicate, answer_is_subject, target } => {
                let s = Var::new("s");
                let mut ps = Vec::new();
                let t = match target {
                    SeqTarget::Entity { entity } => entity,
                    SeqTarget::Bridge { event, link, anchor } => {
                        ps.push(Pattern::fact(Term::entity(event), link, Term::entity(anchor)));
                        event
                    }
                };
                let (subject, object) = if *answer_is_subject {
                    (Term::Var(ans), Term::entity(t))
                } else {
                    (Term::entity(t), Term::Var(ans))
                };
                ps.insert(0, Pattern::Fact { stmt: Some(s.clone()), subject, predicate: predicate.clone(), object });
                (QueryGraph::new(ps), Some(s))
            }
            Plan::Conjunction { parts } => {
                let mut iter = parts.iter();
                let first = iter.next().ok_or(GroundError::NoStatement)?;
                let (mut q, s) = first.build_parts()?;
                for (i, p) in iter.enumerate() {
                    let (other, _) = p.build_parts()?;
                    q = q.conjoin(&other.rename_apart(&format!("k{}", i + 1)));
                }
                (q, s)
            }
        })
    }

    pub fn build(&self) -> Result<QueryGraph, GroundError> {
        self.build_parts().map(|(q, _)| q)
    }

    /// Checks every slot fill against the graph.
    pub fn check(&self, g: &KnowledgeGraph) -> Result<(), GroundError> {
        match self {
            Plan::Basic { path } | Plan::Order { path, .. } => path.check(g),
            Plan::Compare { path, reference, .. } => {
                path.check(g)?;
                reference.check(g)
            }
            Plan::Project { inner } => inner.check(g),
            Plan::Direct { path, attribute, value, .. } => {
                path.check(g)?;
                let flag = match value {
                    DirectValue::Equals(_) => SchemaFlag::OrdinalAttribute,
                    DirectValue::Within(_) => SchemaFlag::TemporalPoint,
                };
                check_predicate(g, attribute, Some(flag))
            }
            Plan::SameEntity { event, link, anchor, answer } => {
                check_statement(g, event, link, anchor)?;
                answer.check(g)
            }
            Plan::PartOf { path, qualifier, event } => {
                path.check(g)?;
                check_entity(g, event)?;
                check_predicate(g, qualifier, Some(SchemaFlag::PartOf))
            }
            Plan::Sequent { predicate, target, .. } => {
                let ok = [SchemaFlag::Precedes, SchemaFlag::Succeeds].into_iter().any(|f| g.has_flag(predicate, f));
                if !ok {
                    check_predicate(g, predicate, None)?;
                    return Err(GroundError::MissingFlag { predicate: predicate.0.clone(), flag: SchemaFlag::Succeeds });
                }
                match target {
                    SeqTarget::Entity { entity } => check_entity(g, entity),
                    SeqTarget::Bridge { event, link, anchor } => check_statement(g, event, link, anchor),
                }
            }
            Plan::Conjunction { parts } => parts.iter().try_for_each(|p| p.check(g)),
        }
    }

    /// Human-readable slot fills, one `slot = value` line each.
    pub fn slot_log(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.log_into("", &mut out);
        out
    }

    fn log_into(&self, pre: &str, out: &mut Vec<String>) {
        let path_line = |out: &mut Vec<String>, slot: &str, p: &Path| {
            out.push(format!("{pre}{slot} = {}", serde_json::to_string(p).unwrap_or_default()));
        };
        match self {
            Plan::Basic { path } => path_line(out, "path", path),
            Plan::Compare { path, predicate, reference } => {
                path_line(out, "time(E1)", path);
                out.push(format!("{pre}compare = {predicate}"));
                out.push(format!("{pre}time(T|E2) = {}", serde_json::to_string(reference).unwrap_or_default()));
            }
            Plan::Project { inner } => {
                out.push(format!("{pre}project = time of answer fact"));
                inner.log_into(pre, out);
            }
            Plan::Order { path, rank, direction } => {
                path_line(out, "attr(E1)", path);
                out.push(format!("{pre}order = rank {rank} {direction:?}"));
            }
            Plan::Direct { path, attribute, on_entity, value } => {
                path_line(out, "E1", path);
                let at = if *on_entity { "answer entity" } else { "statement qualifier" };
                out.push(format!("{pre}value = {attribute} on {at} {}", serde_json::to_string(value).unwrap_or_default()));
            }
            Plan::SameEntity { event, link, anchor, answer } => {
                out.push(format!("{pre}e = {event}"));
                out.push(format!("{pre}E2 = {event} {link} {anchor}"));
                path_line(out, "E1", answer);
            }
            Plan::PartOf { path, qualifier, event } => {
                path_line(out, "E1", path);
                out.push(format!("{pre}r_p = {qualifier} (PART_OF qualifier)"));
                out.push(format!("{pre}ent(E2) = {event}"));
            }
            Plan::Sequent { predicate, answer_is_subject, target } => {
                let dir = if *answer_is_subject { "ANS -> ent(E2)" } else { "ent(E2) -> ANS" };
                out.push(format!("{pre}r_seq = {predicate} ({dir})"));
                match target {
                    SeqTarget::Entity { entity } => out.push(format!("{pre}ent(E2) = {entity}")),
                    SeqTarget::Bridge { event, link, anchor } => {
                        out.push(format!("{pre}ent(E2) = {event} via {link} {anchor}"))
                    }
                }
            }
            Plan::Conjunction { parts } => {
                for (i, p) in parts.iter().enumerate() {
                    p.log_into(&format!("{pre}[{}] ", i + 1), out);
                }
            }
        }
    }
}

/// Checks a plan against the graph and rebuilds its query graph.
pub fn replay(g: &KnowledgeGraph, plan: &Plan) -> Result<QueryGraph, GroundError> {
    plan.check(g)?;
    plan.build()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    /// Index into the context's constraints.
    pub constraint: usize,
    pub template: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub graph: QueryGraph,
    pub plan: Plan,
    /// Empty for basic graphs.
    pub provenance: Vec<Provenance>,
}

impl Candidate {
    fn new(plan: Plan, provenance: Vec<Provenance>) -> Option<Self> {
        let graph = plan.build().ok()?;
        graph.validate().ok()?;
        Some(Candidate { graph, plan, provenance })
    }

    pub fn structures(&self) -> BTreeSet<Structure> {
        self.plan.structures()
    }
}

pub struct GroundingContext<'g> {
    pub graph: &'g KnowledgeGraph,
    pub question: String,
    pub doc: AnnotationDoc,
    /// Linked entities with their token spans.
    pub links: Vec<(Range<usize>, EntityId)>,
    pub constraints: Vec<TemporalConstraint>,
    pub config: GroundingConfig,
}

impl<'g> GroundingContext<'g> {
    pub fn new(graph: &'g KnowledgeGraph, question: &str, config: GroundingConfig) -> Self {
        let doc = annotate(question);
        let links = link_entities(graph, question)
            .into_iter()
            .filter_map(|m| {
                let first = doc.token_at(m.span.start)?;
                let last = doc.token_at(m.span.end - 1)?;
                Some((first..last + 1, m.entity))
            })
            .collect();
        let constraints = evoke_constraints(&doc);
        GroundingContext { graph, question: question.to_string(), doc, links, constraints, config }
    }

    fn enabled(&self, s: Structure) -> bool {
        self.config.enabled.contains(&s)
    }

    /// The linked entity naming the event itself, as in "46th Tony Awards".
    pub fn event_entity(&self, event: usize) -> Option<EntityId> {
        let span = &self.doc.events[event].span;
        self.links.iter().find(|(r, _)| r.start < span.end && span.start < r.end).map(|(_, e)| e.clone())
    }

    /// Entities a mention of `event` is about: the entity it names, else the
    /// linked entities of its clause, else every linked entity.
    pub fn anchors(&self, event: usize) -> Vec<EntityId> {
        if let Some(e) = self.event_entity(event) {
            return vec![e];
        }
        let clause = self.doc.clause_of(self.doc.events[event].span.start);
        let mut out: IndexSet<EntityId> =
            self.links.iter().filter(|(r, _)| self.doc.clause_of(r.start) == clause).map(|(_, e)| e.clone()).collect();
        if out.is_empty() {
            out = self.links.iter().map(|(_, e)| e.clone()).collect();
        }
        out.into_iter().collect()
    }

    fn linked(&self) -> IndexSet<EntityId> {
        self.links.iter().map(|(_, e)| e.clone()).collect()
    }

    /// Keeps the best `beam_width` options by lexical match with the question.
    fn beam<T>(&self, items: Vec<T>, text: impl Fn(&T) -> String) -> Vec<T> {
        let mut scored: Vec<(f64, usize, T)> =
            items.into_iter().enumerate().map(|(i, t)| (lexical_score(&self.question, &text(&t)), i, t)).collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        scored.into_iter().take(self.config.beam_width).map(|(.., t)| t).collect()
    }

    fn path_text(&self, p: &Path) -> String {
        Plan::Basic { path: p.clone() }
            .build()
            .map(|q| serialize(&q, self.graph, SerializeMode::Ranking))
            .unwrap_or_default()
    }
}

fn one_hop_paths(g: &KnowledgeGraph, a: &EntityId) -> IndexSet<Path> {
    let mut out = IndexSet::new();
    for &id in g.by_subject(a) {
        let s = g.statement(id);
        out.insert(Path::Out { anchor: a.clone(), predicate: s.predicate.clone() });
    }
    for &id in g.by_object(a) {
        let s = g.statement(id);
        out.insert(Path::In { anchor: a.clone(), predicate: s.predicate.clone() });
    }
    out
}

/// Every 1-hop path from `a`, qualifier paths included, and 2-hop paths
/// through entities when `two_hop` is set.
fn paths_from(g: &KnowledgeGraph, a: &EntityId, two_hop: bool) -> IndexSet<Path> {
    let mut out = one_hop_paths(g, a);
    let non_temporal = |q: &PredicateId| g.predicate(q).is_some_and(|p| !p.is_temporal());
    for (ids, side) in [(g.by_subject(a), Side::Subject), (g.by_object(a), Side::Object)] {
        for &id in ids {
            let s = g.statement(id);
            for q in s.qualifiers.iter().filter(|q| non_temporal(&q.predicate)) {
                out.insert(Path::QualOut {
                    anchor: a.clone(),
                    predicate: s.predicate.clone(),
                    qualifier: q.predicate.clone(),
                    anchor_side: side,
                });
            }
        }
    }
    for &id in g.by_qualifier_value(a) {
        let s = g.statement(id);
        for q in s.qualifiers.iter().filter(|q| q.value.as_entity() == Some(a)) {
            for answer_side in [Side::Subject, Side::Object] {
                out.insert(Path::QualAnchor {
                    anchor: a.clone(),
                    qualifier: q.predicate.clone(),
                    predicate: s.predicate.clone(),
                    answer_side,
                });
            }
        }
    }
    if two_hop {
        let firsts: Vec<(StatementId, bool, EntityId)> = g
            .by_subject(a)
            .iter()
            .filter_map(|&id| g.statement(id).object.as_entity().map(|m| (id, true, m.clone())))
            .chain(g.by_object(a).iter().map(|&id| (id, false, g.statement(id).subject.clone())))
            .filter(|(_, _, m)| m != a)
            .collect();
        for (first_id, first_forward, m) in firsts {
            let first = g.statement(first_id).predicate.clone();
            let seconds = g
                .by_subject(&m)
                .iter()
                .map(|&id| (id, true))
                .chain(g.by_object(&m).iter().map(|&id| (id, false)));
            for (id, second_forward) in seconds {
                if id == first_id {
                    continue;
                }
                out.insert(Path::TwoHop {
                    anchor: a.clone(),
                    first: first.clone(),
                    first_forward,
                    second: g.statement(id).predicate.clone(),
                    second_forward,
                });
            }
        }
    }
    out
}

fn provenance(ctx: &GroundingContext, t: &InterpretationTemplate) -> Vec<Provenance> {
    let constraint = ctx.constraints.iter().position(|c| *c == t.constraint).unwrap_or(0);
    vec![Provenance { constraint, template: t.to_string() }]
}

fn candidates(plans: impl IntoIterator<Item = Plan>, prov: &[Provenance]) -> Vec<Candidate> {
    let mut seen = IndexSet::new();
    plans.into_iter().filter(|p| seen.insert(p.clone())).filter_map(|p| Candidate::new(p, prov.to_vec())).collect()
}

/// Unconstrained 1- and 2-hop paths from every linked entity.
pub fn ground_basic(ctx: &GroundingContext) -> Vec<Candidate> {
    let two_hop = ctx.config.max_hops >= 2;
    let plans = ctx.linked().into_iter().flat_map(|a| paths_from(ctx.graph, &a, two_hop)).map(|path| Plan::Basic { path });
    candidates(plans, &[])
}

fn temporal_paths(ctx: &GroundingContext, event: usize) -> Vec<Path> {
    let paths: Vec<Path> = ctx
        .anchors(event)
        .iter()
        .flat_map(|a| paths_from(ctx.graph, a, false))
        .filter(|p| p.is_temporal(ctx.graph))
        .collect();
    ctx.beam(paths, |p| ctx.path_text(p))
}

/// Reference times for the second event of a relation.
fn event_times(ctx: &GroundingContext, e2: usize) -> Vec<TimeRef> {
    let g = ctx.graph;
    let text = |r: &TimeRef| match r.patterns() {
        (ps, _) if !ps.is_empty() => serialize(&QueryGraph::new(ps), g, SerializeMode::Ranking),
        _ => String::new(),
    };
    let mut named = Vec::new();
    if let Some(e) = ctx.event_entity(e2) {
        for id in g.event_time_statements(&e) {
            named.push(TimeRef::EventAttr { event: e.clone(), predicate: g.statement(id).predicate.clone() });
        }
    }
    let mut neighbors = Vec::new();
    let mut facts = Vec::new();
    for a in ctx.anchors(e2) {
        for &id in g.by_object(&a) {
            let s = g.statement(id);
            for tid in g.event_time_statements(&s.subject) {
                neighbors.push(TimeRef::NeighborEvent {
                    event: s.subject.clone(),
                    link: s.predicate.clone(),
                    anchor: a.clone(),
                    predicate: g.statement(tid).predicate.clone(),
                });
            }
        }
        for path in one_hop_paths(g, &a) {
            if path.is_temporal(g) {
                facts.push(TimeRef::Qualified { path });
            }
        }
    }
    let mut out: IndexSet<TimeRef> = IndexSet::new();
    for group in [named, neighbors, facts] {
        out.extend(ctx.beam(group, text));
    }
    out.into_iter().take(ctx.config.beam_width).collect()
}

/// Comparison of the question event's fact time with a reference time, or
/// for WHEN questions, projection of that time.
pub fn ground_is1(ctx: &GroundingContext, t: &InterpretationTemplate) -> Vec<Candidate> {
    let prov = provenance(ctx, t);
    let (event, refs) = match t.constraint {
        TemporalConstraint::WhenQuery { event } => {
            let mut plans: Vec<Plan> = temporal_paths(ctx, event)
                .into_iter()
                .map(|path| Plan::Project { inner: Box::new(Plan::Basic { path }) })
                .collect();
            // Facts whose object is itself a time answer directly.
            for a in ctx.anchors(event) {
                for path in one_hop_paths(ctx.graph, &a) {
                    let Path::Out { .. } = path else { continue };
                    let timed = path.statements(ctx.graph).iter().any(|&id| {
                        matches!(ctx.graph.statement(id).object, Node::Literal(Literal::Time(_)))
                    });
                    if timed {
                        plans.push(Plan::Basic { path });
                    }
                }
            }
            return candidates(plans, &prov);
        }
        TemporalConstraint::HasValueTime { event, timex } | TemporalConstraint::RelationEt { event, timex, .. } => {
            (event, vec![TimeRef::Const { value: ctx.doc.timexes[timex].value.clone() }])
        }
        TemporalConstraint::RelationEe { e1, e2, .. } => (e1, event_times(ctx, e2)),
        TemporalConstraint::HasValueOrdinal { .. } => return vec![],
    };
    let Some(predicate) = t.predicate else { return vec![] };
    let plans = temporal_paths(ctx, event).into_iter().flat_map(|path| {
        refs.iter().map(move |reference| Plan::Compare { path: path.clone(), predicate, reference: reference.clone() })
    });
    candidates(plans, &prov)
}

/// Ordinal selection over the timed facts of the question event.
pub fn ground_is2(ctx: &GroundingContext, t: &InterpretationTemplate) -> Vec<Candidate> {
    let TemporalConstraint::HasValueOrdinal { event, ordinal } = t.constraint else { return vec![] };
    let o = &ctx.doc.ordinals[ordinal];
    let paths: Vec<Path> = temporal_paths(ctx, event)
        .into_iter()
        .filter(|p| matches!(p, Path::Out { .. } | Path::In { .. }))
        .collect();
    let plans = paths.into_iter().map(|path| Plan::Order { path, rank: o.rank, direction: o.direction });
    candidates(plans, &provenance(ctx, t))
}

/// A neighbor whose ordinal attribute (or point time) is the mentioned value.
pub fn ground_is3(ctx: &GroundingContext, t: &InterpretationTemplate) -> Vec<Candidate> {
    let g = ctx.graph;
    let (event, rank, within) = match t.constraint {
        TemporalConstraint::HasValueOrdinal { event, ordinal } => (event, Some(ctx.doc.ordinals[ordinal].rank), None),
        TemporalConstraint::HasValueTime { event, timex } => (event, None, Some(ctx.doc.timexes[timex].value.clone())),
        _ => return vec![],
    };
    let value_of = |p: &PredicateId, n: &Node| -> Option<DirectValue> {
        match (n, rank, &within) {
            (Node::Literal(l), Some(r), _) if g.has_flag(p, SchemaFlag::OrdinalAttribute) => {
                (l.as_int() == Some(i64::from(r))).then(|| DirectValue::Equals(l.clone()))
            }
            (Node::Literal(Literal::Time(time)), _, Some(x)) if g.has_flag(p, SchemaFlag::TemporalPoint) => {
                satisfies(ComparisonPredicate::Includes, x, time).then(|| DirectValue::Within(x.clone()))
            }
            _ => None,
        }
    };
    let mut plans = Vec::new();
    for a in ctx.anchors(event) {
        let Ok(ids) = g.neighbors(&a) else { continue };
        for id in ids {
            let s = g.statement(id);
            let (path, other) = if s.subject == a {
                (Path::Out { anchor: a.clone(), predicate: s.predicate.clone() }, s.object.as_entity().cloned())
            } else if s.object.as_entity() == Some(&a) {
                (Path::In { anchor: a.clone(), predicate: s.predicate.clone() }, Some(s.subject.clone()))
            } else {
                continue;
            };
            for q in &s.qualifiers {
                if let Some(value) = value_of(&q.predicate, &q.value) {
                    plans.push(Plan::Direct { path: path.clone(), attribute: q.predicate.clone(), on_entity: false, value });
                }
            }
            let Some(n) = other else { continue };
            for &nid in g.by_subject(&n) {
                let ns = g.statement(nid);
                if let Some(value) = value_of(&ns.predicate, &ns.object) {
                    plans.push(Plan::Direct { path: path.clone(), attribute: ns.predicate.clone(), on_entity: true, value });
                }
            }
        }
    }
    let mut seen = IndexSet::new();
    plans.retain(|p| seen.insert(p.clone()));
    let plans = ctx.beam(plans, |p| p.build().map(|q| serialize(&q, g, SerializeMode::Ranking)).unwrap_or_default());
    candidates(plans, &provenance(ctx, t))
}

/// Both events are attributes of one entity linked to the second event's
/// participant.
pub fn ground_is4(ctx: &GroundingContext, t: &InterpretationTemplate) -> Vec<Candidate> {
    let TemporalConstraint::RelationEe { e2, .. } = t.constraint else { return vec![] };
    let g = ctx.graph;
    let mut plans = Vec::new();
    for a in ctx.anchors(e2) {
        for &link_id in g.by_object(&a) {
            let link = g.statement(link_id);
            let e = &link.subject;
            if *e == a {
                continue;
            }
            let answers: IndexSet<Path> = g
                .by_subject(e)
                .iter()
                .filter(|&&id| id != link_id)
                .map(|&id| Path::Out { anchor: e.clone(), predicate: g.statement(id).predicate.clone() })
                .chain(
                    g.by_object(e)
                        .iter()
                        .map(|&id| Path::In { anchor: e.clone(), predicate: g.statement(id).predicate.clone() }),
                )
                .filter(|p| !matches!(p, Path::Out { predicate, .. } if *predicate == link.predicate))
                .collect();
            let answers = ctx.beam(answers.into_iter().collect(), |p| ctx.path_text(p));
            plans.extend(answers.into_iter().map(|answer| Plan::SameEntity {
                event: e.clone(),
                link: link.predicate.clone(),
                anchor: a.clone(),
                answer,
            }));
        }
    }
    candidates(plans, &provenance(ctx, t))
}

/// Facts of the question event qualified as part of the named second event.
pub fn ground_is5(ctx: &GroundingContext, t: &InterpretationTemplate) -> Vec<Candidate> {
    let TemporalConstraint::RelationEe { e1, e2, .. } = t.constraint else { return vec![] };
    let g = ctx.graph;
    let Some(event) = ctx.event_entity(e2) else { return vec![] };
    let mut plans = Vec::new();
    for a in ctx.anchors(e1).into_iter().filter(|a| *a != event) {
        let sides = g.by_subject(&a).iter().map(|&id| (id, true)).chain(g.by_object(&a).iter().map(|&id| (id, false)));
        for (id, forward) in sides {
            let s = g.statement(id);
            for q in &s.qualifiers {
                if q.value.as_entity() != Some(&event) || !g.has_flag(&q.predicate, SchemaFlag::PartOf) {
                    continue;
                }
                let path = if forward {
                    Path::Out { anchor: a.clone(), predicate: s.predicate.clone() }
                } else {
                    Path::In { anchor: a.clone(), predicate: s.predicate.clone() }
                };
                plans.push(Plan::PartOf { path, qualifier: q.predicate.clone(), event: event.clone() });
            }
        }
    }
    let mut seen = IndexSet::new();
    plans.retain(|p| seen.insert(p.clone()));
    let plans = ctx.beam(plans, |p| p.build().map(|q| serialize(&q, g, SerializeMode::Ranking)).unwrap_or_default());
    candidates(plans, &provenance(ctx, t))
}

/// The answer precedes or succeeds the second event's entity along a
/// sequence predicate.
pub fn ground_is6(ctx: &GroundingContext, t: &InterpretationTemplate) -> Vec<Candidate> {
    let TemporalConstraint::RelationEe { reltype, e2, .. } = t.constraint else { return vec![] };
    let after = match reltype {
        TimeMlRelType::After | TimeMlRelType::Iafter => true,
        TimeMlRelType::Before | TimeMlRelType::Ibefore => false,
        _ => return vec![],
    };
    let g = ctx.graph;
    let mut targets: IndexSet<SeqTarget> = IndexSet::new();
    if let Some(e) = ctx.event_entity(e2) {
        targets.insert(SeqTarget::Entity { entity: e });
    }
    for a in ctx.anchors(e2) {
        targets.insert(SeqTarget::Entity { entity: a.clone() });
        for &id in g.by_object(&a) {
            let s = g.statement(id);
            if !g.event_time_statements(&s.subject).is_empty() {
                targets.insert(SeqTarget::Bridge { event: s.subject.clone(), link: s.predicate.clone(), anchor: a.clone() });
            }
        }
    }
    let mut plans = Vec::new();
    for target in targets {
        let entity = match &target {
            SeqTarget::Entity { entity } => entity,
            SeqTarget::Bridge { event, .. } => event,
        };
        for p in g.predicates() {
            let answer_is_subject = match (p.has(SchemaFlag::Succeeds), p.has(SchemaFlag::Precedes)) {
                (true, _) => after,
                (_, true) => !after,
                _ => continue,
            };
            let found = if answer_is_subject {
                g.by_object(entity).iter().any(|&id| g.statement(id).predicate == p.id)
            } else {
                g.by_subject(entity).iter().any(|&id| g.statement(id).predicate == p.id)
            };
            if found {
                plans.push(Plan::Sequent { predicate: p.id.clone(), answer_is_subject, target: target.clone() });
            }
        }
    }
    candidates(plans, &provenance(ctx, t))
}

pub fn ground_template(ctx: &GroundingContext, t: &InterpretationTemplate) -> Vec<Candidate> {
    if !ctx.enabled(t.structure) {
        return vec![];
    }
    match t.structure {
        Structure::Is1Comparison => ground_is1(ctx, t),
        Structure::Is2Ordering => ground_is2(ctx, t),
        Structure::Is3Direct => ground_is3(ctx, t),
        Structure::Is4SameEntity => ground_is4(ctx, t),
        Structure::Is5PartOf => ground_is5(ctx, t),
        Structure::Is6Sequent => ground_is6(ctx, t),
    }
}

fn dedupe(g: &KnowledgeGraph, cands: Vec<Candidate>) -> Vec<Candidate> {
    let mut seen = BTreeSet::new();
    cands.into_iter().filter(|c| seen.insert(serialize(&c.graph, g, SerializeMode::Debug))).collect()
}

/// All candidates for the question. Constraints other than WHEN are
/// grounded separately and conjoined on the answer; a WHEN query projects
/// the time of whatever those yield. Falls back to basic graphs when the
/// constraints ground to nothing.
pub fn generate_candidates(ctx: &GroundingContext) -> Vec<Candidate> {
    if ctx.links.is_empty() {
        return vec![];
    }
    if ctx.constraints.is_empty() {
        return dedupe(ctx.graph, ground_basic(ctx));
    }
    let mut when = None;
    let mut groups: Vec<Vec<Candidate>> = Vec::new();
    for c in &ctx.constraints {
        let templates = evoke_interpretations(c);
        if matches!(c, TemporalConstraint::WhenQuery { .. }) {
            when = templates.into_iter().next();
            continue;
        }
        let group: Vec<Candidate> = templates.iter().flat_map(|t| ground_template(ctx, t)).collect();
        if !group.is_empty() {
            groups.push(dedupe(ctx.graph, group));
        }
    }

    let mut combined: Vec<Candidate> = match groups.len() {
        0 => vec![],
        1 => groups.pop().unwrap_or_default(),
        _ => {
            let mut acc: Vec<Candidate> = Vec::new();
            for group in groups {
                let group = ctx.beam(group, |c| serialize(&c.graph, ctx.graph, SerializeMode::Ranking));
                if acc.is_empty() {
                    acc = group;
                    continue;
                }
                acc = acc
                    .iter()
                    .flat_map(|a| {
                        group.iter().filter_map(move |b| {
                            let parts = match &a.plan {
                                Plan::Conjunction { parts } => {
                                    parts.iter().cloned().chain([b.plan.clone()]).collect()
                                }
                                p => vec![p.clone(), b.plan.clone()],
                            };
                            let prov = a.provenance.iter().chain(&b.provenance).cloned().collect();
                            Candidate::new(Plan::Conjunction { parts }, prov)
                        })
                    })
                    .collect();
            }
            acc
        }
    };

    if let Some(w) = when.filter(|w| ctx.enabled(w.structure)) {
        let prov = provenance(ctx, &w);
        combined = if combined.is_empty() {
            ground_is1(ctx, &w)
        } else {
            combined
                .into_iter()
                .filter_map(|c| {
                    let provenance = prov.iter().chain(&c.provenance).cloned().collect();
                    Candidate::new(Plan::Project { inner: Box::new(c.plan) }, provenance)
                })
                .collect()
        };
    }
    if combined.is_empty() {
        combined = ground_basic(ctx);
    }
    dedupe(ctx.graph, combined)
}

/// Groups candidates by the structures in their provenance.
pub fn by_structure(cands: &[Candidate]) -> BTreeMap<Vec<Structure>, usize> {
    let mut out = BTreeMap::new();
    for c in cands {
        *out.entry(c.structures().into_iter().collect()).or_insert(0) += 1;
    }
    out
}
