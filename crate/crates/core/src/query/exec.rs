use std::collections::{BTreeMap, BTreeSet};

use serde::{Serialize, Serializer};

use super::{FilterArg, Pattern, QueryError, QueryGraph, Term, Var};
use crate::annotate::OrdinalDirection;
use crate::kg::{KnowledgeGraph, Literal, Node, StatementId};
use crate::time::{satisfies_interval, Interval, TimeValue};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Node(Node),
    Statement(StatementId),
    /// Validity interval of a statement plus the time value standing for it.
    Span(Interval, Option<TimeValue>),
}

impl Value {
    pub fn interval(&self) -> Option<Interval> {
        match self {
            Value::Node(Node::Literal(Literal::Time(t))) => Some(t.interval()),
            Value::Span(iv, _) => Some(*iv),
            _ => None,
        }
    }

    /// The answer-set member this value projects to.
    pub fn project(&self) -> Option<Node> {
        match self {
            Value::Node(n) => Some(n.clone()),
            Value::Span(_, t) => t.clone().map(|t| Node::Literal(Literal::Time(t))),
            Value::Statement(_) => None,
        }
    }

    fn sort_key(&self) -> Option<(i64, i64)> {
        match self {
            Value::Node(Node::Literal(Literal::Int(n))) => Some((*n, *n)),
            other => other.interval().map(|iv| (iv.start, iv.end)),
        }
    }
}

pub type Binding = BTreeMap<Var, Value>;

/// Duplicate-free set of answers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnswerSet(pub BTreeSet<Node>);

impl AnswerSet {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Node> {
        self.0.iter()
    }

    /// Entity ids and canonical literal forms, sorted.
    pub fn to_strings(&self) -> BTreeSet<String> {
        self.0.iter().map(node_string).collect()
    }
}

fn node_string(n: &Node) -> String {
    match n {
        Node::Entity(e) => e.0.clone(),
        Node::Literal(l) => l.to_string(),
    }
}

impl Serialize for AnswerSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.to_strings())
    }
}

impl FromIterator<Node> for AnswerSet {
    fn from_iter<I: IntoIterator<Item = Node>>(iter: I) -> Self {
        AnswerSet(iter.into_iter().collect())
    }
}

fn resolve<'a>(t: &'a Term, b: &'a Binding) -> Option<Value> {
    match t {
        Term::Entity(e) => Some(Value::Node(Node::Entity(e.clone()))),
        Term::Literal(l) => Some(Value::Node(Node::Literal(l.clone()))),
        Term::Var(v) => b.get(v).cloned(),
    }
}

/// Unifies `t` with `value`, extending `b`. Returns false on a clash.
fn unify(t: &Term, value: Value, b: &mut Binding) -> bool {
    match t {
        Term::Var(v) => match b.get(v) {
            Some(bound) => *bound == value,
            None => {
                b.insert(v.clone(), value);
                true
            }
        },
        other => resolve(other, b).as_ref() == Some(&value),
    }
}

fn bound_stmt(v: &Var, b: &Binding) -> Option<StatementId> {
    match b.get(v) {
        Some(Value::Statement(id)) => Some(*id),
        _ => None,
    }
}

fn score(p: &Pattern, b: &Binding) -> u32 {
    let known = |t: &Term| u32::from(!matches!(t, Term::Var(v) if !b.contains_key(v)));
    match p {
        Pattern::Fact { stmt, subject, object, .. } => {
            3 * u32::from(stmt.as_ref().is_some_and(|s| b.contains_key(s))) + 2 * known(subject) + 2 * known(object) + 1
        }
        Pattern::Qualifier { stmt, value, .. } => 3 * u32::from(b.contains_key(stmt)) + known(value),
        Pattern::ValidTime { stmt, .. } => 3 * u32::from(b.contains_key(stmt)),
    }
}

fn extend(g: &KnowledgeGraph, p: &Pattern, b: &Binding) -> Vec<Binding> {
    let mut out = Vec::new();
    match p {
        Pattern::Fact { stmt, subject, predicate, object } => {
            let pinned = stmt.as_ref().and_then(|s| b.get(s));
            let ids: Vec<StatementId> = match (pinned, resolve(subject, b), resolve(object, b)) {
                (Some(Value::Statement(id)), ..) => vec![*id],
                (Some(_), ..) => vec![],
                (None, Some(Value::Node(Node::Entity(e))), _) => g.by_subject(&e).to_vec(),
                (None, Some(_), _) => vec![],
                (None, None, Some(Value::Node(Node::Entity(e)))) => g.by_object(&e).to_vec(),
                (None, None, _) => g.by_predicate(predicate).to_vec(),
            };
            for id in ids {
                let s = g.statement(id);
                if s.predicate != *predicate {
                    continue;
                }
                let mut nb = b.clone();
                let ok = unify(subject, Value::Node(Node::Entity(s.subject.clone())), &mut nb)
                    && unify(object, Value::Node(s.object.clone()), &mut nb)
                    && stmt.as_ref().is_none_or(|v| unify(&Term::Var(v.clone()), Value::Statement(id), &mut nb));
                if ok {
                    out.push(nb);
                }
            }
        }
        Pattern::Qualifier { stmt, predicate, value } => {
            let ids: Vec<StatementId> = match (b.get(stmt), resolve(value, b)) {
                (Some(_), _) => bound_stmt(stmt, b).into_iter().collect(),
                (None, Some(Value::Node(Node::Entity(e)))) => g.by_qualifier_value(&e).to_vec(),
                (None, _) => g.statement_ids().collect(),
            };
            for id in ids {
                for q in &g.statement(id).qualifiers {
                    if q.predicate != *predicate {
                        continue;
                    }
                    let mut nb = b.clone();
                    if unify(&Term::Var(stmt.clone()), Value::Statement(id), &mut nb)
                        && unify(value, Value::Node(q.value.clone()), &mut nb)
                    {
                        out.push(nb);
                    }
                }
            }
        }
        Pattern::ValidTime { stmt, time } => {
            let ids: Vec<StatementId> = match b.get(stmt) {
                Some(_) => bound_stmt(stmt, b).into_iter().collect(),
                None => g.statement_ids().collect(),
            };
            for id in ids {
                let Some(iv) = g.temporal_of(id).ok().flatten() else { continue };
                let span = Value::Span(iv, g.anchor_time(id).cloned());
                let mut nb = b.clone();
                if unify(&Term::Var(stmt.clone()), Value::Statement(id), &mut nb)
                    && unify(&Term::Var(time.clone()), span, &mut nb)
                {
                    out.push(nb);
                }
            }
        }
    }
    out
}

fn search(g: &KnowledgeGraph, remaining: &[&Pattern], b: Binding, out: &mut Vec<Binding>) {
    if remaining.is_empty() {
        out.push(b);
        return;
    }
    let (best, _) = remaining
        .iter()
        .enumerate()
        .fold((0, 0), |acc, (i, p)| {
            let s = score(p, &b);
            if i == 0 || s > acc.1 { (i, s) } else { acc }
        });
    let mut rest = remaining.to_vec();
    let p = rest.remove(best);
    for nb in extend(g, p, &b) {
        search(g, &rest, nb, out);
    }
}

/// Every binding satisfying the patterns and filters, before ordinal
/// selection.
pub fn solutions(q: &QueryGraph, g: &KnowledgeGraph) -> Result<Vec<Binding>, QueryError> {
    let patterns: Vec<&Pattern> = q.patterns.iter().collect();
    let mut raw = Vec::new();
    search(g, &patterns, Binding::new(), &mut raw);
    let mut out = Vec::new();
    'next: for b in raw {
        for f in &q.filters {
            let subject = b.get(&f.subject).ok_or_else(|| QueryError::UnboundFilterVar(f.subject.0.clone()))?;
            let reference = match &f.reference {
                FilterArg::Const(t) => Some(t.interval()),
                FilterArg::Var(v) => b.get(v).ok_or_else(|| QueryError::UnboundFilterVar(v.0.clone()))?.interval(),
            };
            // Facts without the needed time are dropped, not passed through.
            let (Some(reference), Some(subject)) = (reference, subject.interval()) else { continue 'next };
            if !satisfies_interval(f.predicate.converse(), &reference, &subject) {
                continue 'next;
            }
        }
        out.push(b);
    }
    Ok(out)
}

pub fn execute(q: &QueryGraph, g: &KnowledgeGraph) -> Result<AnswerSet, QueryError> {
    q.validate()?;
    let sols = solutions(q, g)?;
    let Some(ord) = &q.ordinal else {
        return Ok(sols.iter().filter_map(|b| b.get(&q.answer)?.project()).collect());
    };
    let mut keyed: Vec<((i64, i64), Node)> = sols
        .iter()
        .filter_map(|b| Some((b.get(&ord.key)?.sort_key()?, b.get(&q.answer)?.project()?)))
        .collect();
    keyed.sort_by(|a, b| match ord.direction {
        OrdinalDirection::FromFirst => a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)),
        OrdinalDirection::FromLast => b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)),
    });
    let mut seen = BTreeSet::new();
    let ranked: Vec<Node> = keyed.into_iter().map(|(_, n)| n).filter(|n| seen.insert(n.clone())).collect();
    Ok(ranked.into_iter().nth(ord.rank as usize - 1).into_iter().collect())
}
