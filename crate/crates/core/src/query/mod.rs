//! Query graphs: conjunctive patterns over statements, temporal filters,
//! ordinal selection and a designated answer variable.

mod exec;
mod f1;
mod serialize;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::annotate::OrdinalDirection;
use crate::kg::{EntityId, Literal, Node, PredicateId};
use crate::time::{ComparisonPredicate, TimeValue};

pub use exec::{execute, solutions, AnswerSet, Binding, Value};
pub use f1::{f1_score, Prf};
pub use serialize::{serialize, SerializeMode};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QueryError {
    #[error("query graph has no patterns")]
    Empty,
    #[error("answer variable ?{0} is not bound by any pattern")]
    UnboundAnswer(String),
    #[error("answer variable ?{0} is a statement variable")]
    StatementAnswer(String),
    #[error("filter variable ?{0} is not bound by any pattern")]
    UnboundFilterVar(String),
    #[error("ordinal key ?{0} is not bound by any pattern")]
    UnboundOrdinalKey(String),
    #[error("ordinal rank must be at least 1")]
    ZeroRank,
    #[error("query graph is not connected")]
    Disconnected,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub String);

impl Var {
    pub fn new(name: impl Into<String>) -> Self {
        Var(name.into())
    }

    pub fn answer() -> Self {
        Var("ans".into())
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Entity(EntityId),
    Literal(Literal),
    Var(Var),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(Var::new(name))
    }

    pub fn entity(id: &EntityId) -> Self {
        Term::Entity(id.clone())
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }
}

impl From<Node> for Term {
    fn from(n: Node) -> Self {
        match n {
            Node::Entity(e) => Term::Entity(e),
            Node::Literal(l) => Term::Literal(l),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pattern {
    /// A main statement; `stmt` names the statement node when qualifiers
    /// or its validity time are needed.
    Fact {
        stmt: Option<Var>,
        subject: Term,
        predicate: PredicateId,
        object: Term,
    },
    /// A qualifier of the statement bound to `stmt`.
    Qualifier { stmt: Var, predicate: PredicateId, value: Term },
    /// Binds `time` to the validity interval of the statement in `stmt`.
    ValidTime { stmt: Var, time: Var },
}

impl Pattern {
    pub fn fact(subject: Term, predicate: &PredicateId, object: Term) -> Self {
        Pattern::Fact { stmt: None, subject, predicate: predicate.clone(), object }
    }

    pub fn stmt_fact(stmt: &str, subject: Term, predicate: &PredicateId, object: Term) -> Self {
        Pattern::Fact { stmt: Some(Var::new(stmt)), subject, predicate: predicate.clone(), object }
    }

    /// Terms in the order subject, object, stmt (or stmt, value / stmt, time).
    pub fn terms(&self) -> Vec<Term> {
        match self {
            Pattern::Fact { stmt, subject, object, .. } => {
                let mut t = vec![subject.clone(), object.clone()];
                t.extend(stmt.clone().map(Term::Var));
                t
            }
            Pattern::Qualifier { stmt, value, .. } => vec![Term::Var(stmt.clone()), value.clone()],
            Pattern::ValidTime { stmt, time } => vec![Term::Var(stmt.clone()), Term::Var(time.clone())],
        }
    }

    fn statement_vars(&self) -> Vec<&Var> {
        match self {
            Pattern::Fact { stmt, .. } => stmt.iter().collect(),
            Pattern::Qualifier { stmt, .. } | Pattern::ValidTime { stmt, .. } => vec![stmt],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FilterArg {
    Const(TimeValue),
    Var(Var),
}

/// Holds when `subject ∘ reference` reads true, e.g. `?t IS_INCLUDED 1960`.
/// Evaluated as `satisfies(∘.converse(), reference, subject)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TemporalFilter {
    pub predicate: ComparisonPredicate,
    pub reference: FilterArg,
    pub subject: Var,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrdinalSelector {
    pub key: Var,
    pub rank: u32,
    pub direction: OrdinalDirection,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QueryGraph {
    pub patterns: Vec<Pattern>,
    pub filters: Vec<TemporalFilter>,
    pub ordinal: Option<OrdinalSelector>,
    pub answer: Var,
}

impl QueryGraph {
    pub fn new(patterns: Vec<Pattern>) -> Self {
        QueryGraph { patterns, filters: Vec::new(), ordinal: None, answer: Var::answer() }
    }

    pub fn with_filter(mut self, filter: TemporalFilter) -> Self {
        self.filters.push(filter);
        self
    }

    pub fn with_ordinal(mut self, ordinal: OrdinalSelector) -> Self {
        self.ordinal = Some(ordinal);
        self
    }

    pub fn with_answer(mut self, answer: Var) -> Self {
        self.answer = answer;
        self
    }

    /// Variables bound by at least one pattern.
    pub fn bound_vars(&self) -> BTreeSet<Var> {
        self.patterns.iter().flat_map(Pattern::terms).filter_map(|t| t.as_var().cloned()).collect()
    }

    pub fn statement_vars(&self) -> BTreeSet<Var> {
        self.patterns.iter().flat_map(Pattern::statement_vars).cloned().collect()
    }

    /// Adjacency over terms: patterns join their terms, var-var filters join
    /// their two variables.
    pub(crate) fn adjacency(&self) -> BTreeMap<Term, BTreeSet<Term>> {
        let mut adj: BTreeMap<Term, BTreeSet<Term>> = BTreeMap::new();
        let mut join = |terms: &[Term]| {
            for a in terms {
                let entry = adj.entry(a.clone()).or_default();
                entry.extend(terms.iter().filter(|b| *b != a).cloned());
            }
        };
        for p in &self.patterns {
            join(&p.terms());
        }
        for f in &self.filters {
            if let FilterArg::Var(r) = &f.reference {
                join(&[Term::Var(f.subject.clone()), Term::Var(r.clone())]);
            }
        }
        adj
    }

    /// Breadth-first distance of every term from the answer variable.
    pub(crate) fn distances(&self) -> BTreeMap<Term, usize> {
        let adj = self.adjacency();
        let mut dist = BTreeMap::new();
        let start = Term::Var(self.answer.clone());
        dist.insert(start.clone(), 0);
        let mut frontier = vec![start];
        let mut d = 0;
        while !frontier.is_empty() {
            d += 1;
            let mut next = Vec::new();
            for t in &frontier {
                for n in adj.get(t).into_iter().flatten() {
                    if !dist.contains_key(n) {
                        dist.insert(n.clone(), d);
                        next.push(n.clone());
                    }
                }
            }
            frontier = next;
        }
        dist
    }

    pub fn validate(&self) -> Result<(), QueryError> {
        if self.patterns.is_empty() {
            return Err(QueryError::Empty);
        }
        let bound = self.bound_vars();
        if !bound.contains(&self.answer) {
            return Err(QueryError::UnboundAnswer(self.answer.0.clone()));
        }
        if self.statement_vars().contains(&self.answer) {
            return Err(QueryError::StatementAnswer(self.answer.0.clone()));
        }
        for f in &self.filters {
            for v in std::iter::once(&f.subject).chain(match &f.reference {
                FilterArg::Var(r) => Some(r),
                FilterArg::Const(_) => None,
            }) {
                if !bound.contains(v) {
                    return Err(QueryError::UnboundFilterVar(v.0.clone()));
                }
            }
        }
        if let Some(o) = &self.ordinal {
            if o.rank == 0 {
                return Err(QueryError::ZeroRank);
            }
            if !bound.contains(&o.key) {
                return Err(QueryError::UnboundOrdinalKey(o.key.0.clone()));
            }
        }
        if self.distances().len() != self.adjacency().len() {
            return Err(QueryError::Disconnected);
        }
        Ok(())
    }

    /// Renames variables apart with `prefix` except the answer variable.
    pub fn rename_apart(&self, prefix: &str) -> QueryGraph {
        let rn = |v: &Var| if *v == self.answer { v.clone() } else { Var(format!("{prefix}{}", v.0)) };
        let rt = |t: &Term| match t {
            Term::Var(v) => Term::Var(rn(v)),
            other => other.clone(),
        };
        QueryGraph {
            patterns: self
                .patterns
                .iter()
                .map(|p| match p {
                    Pattern::Fact { stmt, subject, predicate, object } => Pattern::Fact {
                        stmt: stmt.as_ref().map(rn),
                        subject: rt(subject),
                        predicate: predicate.clone(),
                        object: rt(object),
                    },
                    Pattern::Qualifier { stmt, predicate, value } => {
                        Pattern::Qualifier { stmt: rn(stmt), predicate: predicate.clone(), value: rt(value) }
                    }
                    Pattern::ValidTime { stmt, time } => Pattern::ValidTime { stmt: rn(stmt), time: rn(time) },
                })
                .collect(),
            filters: self
                .filters
                .iter()
                .map(|f| TemporalFilter {
                    predicate: f.predicate,
                    reference: match &f.reference {
                        FilterArg::Var(v) => FilterArg::Var(rn(v)),
                        c => c.clone(),
                    },
                    subject: rn(&f.subject),
                })
                .collect(),
            ordinal: self.ordinal.as_ref().map(|o| OrdinalSelector { key: rn(&o.key), ..o.clone() }),
            answer: self.answer.clone(),
        }
    }

    /// Conjunction of two graphs sharing only the answer variable. The
    /// second graph's other variables are renamed apart. Keeps the first
    /// ordinal selector found.
    pub fn conjoin(&self, other: &QueryGraph) -> QueryGraph {
        let other = other.rename_apart("c").with_answer(other.answer.clone());
        let other = if other.answer == self.answer {
            other
        } else {
            other.rename_var(&other.answer.clone(), &self.answer)
        };
        let mut out = self.clone();
        for p in other.patterns {
            if !out.patterns.contains(&p) {
                out.patterns.push(p);
            }
        }
        out.filters.extend(other.filters);
        if out.ordinal.is_none() {
            out.ordinal = other.ordinal;
        }
        out
    }

    pub(crate) fn rename_var(&self, from: &Var, to: &Var) -> QueryGraph {
        let rn = |v: &Var| if v == from { to.clone() } else { v.clone() };
        let mut g = self.clone();
        for p in &mut g.patterns {
            match p {
                Pattern::Fact { stmt, subject, object, .. } => {
                    *stmt = stmt.as_ref().map(rn);
                    for t in [subject, object] {
                        if let Term::Var(v) = t {
                            *v = rn(v);
                        }
                    }
                }
                Pattern::Qualifier { stmt, value, .. } => {
                    *stmt = rn(stmt);
                    if let Term::Var(v) = value {
                        *v = rn(v);
                    }
                }
                Pattern::ValidTime { stmt, time } => {
                    *stmt = rn(stmt);
                    *time = rn(time);
                }
            }
        }
        for f in &mut g.filters {
            f.subject = rn(&f.subject);
            if let FilterArg::Var(v) = &mut f.reference {
                *v = rn(v);
            }
        }
        if let Some(o) = &mut g.ordinal {
            o.key = rn(&o.key);
        }
        g.answer = rn(&g.answer);
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(id: &str) -> PredicateId {
        PredicateId::new(id)
    }

    #[test]
    fn validation() {
        let a = Term::entity(&EntityId::new("a"));
        let ok = QueryGraph::new(vec![Pattern::fact(a.clone(), &p("r"), Term::var("ans"))]);
        assert_eq!(ok.validate(), Ok(()));
        assert_eq!(QueryGraph::new(vec![]).validate(), Err(QueryError::Empty));
        let unbound = QueryGraph::new(vec![Pattern::fact(a.clone(), &p("r"), Term::var("x"))]);
        assert_eq!(unbound.validate(), Err(QueryError::UnboundAnswer("ans".into())));
        let filter = ok.clone().with_filter(TemporalFilter {
            predicate: ComparisonPredicate::Before,
            reference: FilterArg::Const(TimeValue::year(1960)),
            subject: Var::new("t"),
        });
        assert_eq!(filter.validate(), Err(QueryError::UnboundFilterVar("t".into())));
        let split = QueryGraph::new(vec![
            Pattern::fact(a.clone(), &p("r"), Term::var("ans")),
            Pattern::fact(Term::entity(&EntityId::new("b")), &p("r"), Term::var("y")),
        ]);
        assert_eq!(split.validate(), Err(QueryError::Disconnected));
        let stmt_answer = QueryGraph::new(vec![Pattern::stmt_fact("ans", a, &p("r"), Term::var("y"))]);
        assert_eq!(stmt_answer.validate(), Err(QueryError::StatementAnswer("ans".into())));
    }

    #[test]
    fn filters_connect_components() {
        let g = QueryGraph::new(vec![
            Pattern::stmt_fact("s1", Term::var("ans"), &p("r"), Term::entity(&EntityId::new("a"))),
            Pattern::ValidTime { stmt: Var::new("s1"), time: Var::new("t1") },
            Pattern::fact(Term::entity(&EntityId::new("b")), &p("time"), Term::var("t2")),
        ]);
        assert_eq!(g.validate(), Err(QueryError::Disconnected));
        let g = g.with_filter(TemporalFilter {
            predicate: ComparisonPredicate::Overlaps,
            reference: FilterArg::Var(Var::new("t2")),
            subject: Var::new("t1"),
        });
        assert_eq!(g.validate(), Ok(()));
    }

    #[test]
    fn conjoin_shares_only_the_answer() {
        let a = Term::entity(&EntityId::new("a"));
        let g1 = QueryGraph::new(vec![Pattern::stmt_fact("s", a.clone(), &p("r"), Term::var("ans"))]);
        let g2 = QueryGraph::new(vec![Pattern::stmt_fact("s", a, &p("q"), Term::var("ans"))]);
        let c = g1.conjoin(&g2);
        assert_eq!(c.patterns.len(), 2);
        assert_eq!(c.statement_vars().len(), 2);
        assert_eq!(c.validate(), Ok(()));
    }
}
