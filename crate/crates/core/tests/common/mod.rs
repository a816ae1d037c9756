//! Shared fixtures and the brute-force query oracle.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use tempq::annotate::OrdinalDirection;
use tempq::eval::{load_benchmark, BenchmarkQuestion};
use tempq::kg::{
    EntityDoc, GraphDocument, KnowledgeGraph, Literal, Node, PredicateDoc, PredicateId, QualifierDoc, SchemaFlag,
    StatementDoc, StatementId, ValueDoc,
};
use tempq::query::{FilterArg, OrdinalSelector, Pattern, QueryGraph, TemporalFilter, Term, Value, Var};
use tempq::time::{ComparisonPredicate, Interval, TimeValue};

pub const GRAPH: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/graph.json");
pub const BENCHMARK: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/benchmark.jsonl");

pub const HITCHCOCK: &str = "Which movie did Alfred Hitchcock direct in 1960?";
pub const HENRY: &str = "When did Henry the VIII marry his first wife?";
pub const POTTER: &str = "What was the 7th Harry Potter book?";
pub const LENNON: &str = "Where was John Lennon standing when he was shot?";
pub const FISHBURNE: &str = "What award did Laurence Fishburne received at the 46th Tony Awards?";
pub const KENNEDY: &str = "Who became the president after J.F. Kennedy was shot?";
pub const CARTER: &str = "Who was the U.S. president when John Lennon was shot?";

pub fn graph() -> KnowledgeGraph {
    KnowledgeGraph::load(GRAPH).expect("fixture graph loads")
}

pub fn benchmark() -> Vec<BenchmarkQuestion> {
    load_benchmark(BENCHMARK).expect("fixture benchmark loads")
}

pub fn strings(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

// ---------------------------------------------------------------------------
// Random graphs and queries

const ENTITIES: usize = 8;
const PLAIN: [&str; 3] = ["p0", "p1", "p2"];
const QUALS: [&str; 4] = ["q_ent", "q_point", "q_start", "q_end"];

fn year(rng: &mut impl Rng) -> TimeValue {
    TimeValue::year(rng.gen_range(2000..2008))
}

fn entity(rng: &mut impl Rng) -> String {
    format!("e{}", rng.gen_range(0..ENTITIES))
}

pub fn random_graph(rng: &mut impl Rng) -> KnowledgeGraph {
    let entities = (0..ENTITIES).map(|i| EntityDoc { id: format!("e{i}"), label: format!("E{i}"), aliases: vec![] }).collect();
    let pred = |id: &str, flags: Vec<SchemaFlag>| PredicateDoc { id: id.into(), label: id.into(), flags };
    let mut predicates: Vec<PredicateDoc> = PLAIN.iter().map(|p| pred(p, vec![])).collect();
    predicates.push(pred("time", vec![SchemaFlag::TemporalPoint]));
    predicates.push(pred("rank", vec![SchemaFlag::OrdinalAttribute]));
    predicates.push(pred("q_ent", vec![SchemaFlag::PartOf]));
    predicates.push(pred("q_point", vec![SchemaFlag::TemporalPoint]));
    predicates.push(pred("q_start", vec![SchemaFlag::TemporalStart]));
    predicates.push(pred("q_end", vec![SchemaFlag::TemporalEnd]));

    let n = rng.gen_range(5..=50);
    let mut statements = Vec::new();
    for _ in 0..n {
        let subject = entity(rng);
        let (predicate, object) = match rng.gen_range(0..10) {
            0 => ("time".to_string(), ValueDoc::Time(year(rng))),
            1 => ("rank".to_string(), ValueDoc::Int(rng.gen_range(1..4))),
            _ => (PLAIN[rng.gen_range(0..PLAIN.len())].to_string(), ValueDoc::Entity(entity(rng))),
        };
        let mut qualifiers = Vec::new();
        match rng.gen_range(0..5) {
            0 => qualifiers.push(QualifierDoc { predicate: "q_point".into(), value: ValueDoc::Time(year(rng)) }),
            1 => {
                let start = rng.gen_range(2000..2008);
                let end = start + rng.gen_range(0..4);
                qualifiers.push(QualifierDoc { predicate: "q_start".into(), value: ValueDoc::Time(TimeValue::year(start)) });
                if rng.gen_bool(0.7) {
                    qualifiers.push(QualifierDoc { predicate: "q_end".into(), value: ValueDoc::Time(TimeValue::year(end)) });
                }
            }
            _ => {}
        }
        if rng.gen_bool(0.3) {
            qualifiers.push(QualifierDoc { predicate: "q_ent".into(), value: ValueDoc::Entity(entity(rng)) });
        }
        statements.push(StatementDoc { subject, predicate, object, qualifiers });
    }
    KnowledgeGraph::from_document(GraphDocument { entities, predicates, statements }).expect("random graph is valid")
}

fn constant(rng: &mut impl Rng) -> Term {
    match rng.gen_range(0..6) {
        0 => Term::Literal(Literal::Time(year(rng))),
        1 => Term::Literal(Literal::Int(rng.gen_range(1..4))),
        _ => Term::Entity(tempq::kg::EntityId::new(entity(rng))),
    }
}

/// A valid query of one to three patterns, sometimes with a filter and an
/// ordinal selector.
pub fn random_query(rng: &mut impl Rng) -> QueryGraph {
    loop {
        let mut next = 0;
        let mut fresh = |prefix: &str| {
            next += 1;
            Var::new(format!("{prefix}{next}"))
        };
        let mut nodes: Vec<Var> = vec![Var::answer()];
        let mut stmts: Vec<Var> = Vec::new();
        // Variables that can carry a time or an integer.
        let mut keyable: Vec<Var> = Vec::new();
        let mut patterns = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let kind = if stmts.is_empty() { 0 } else { rng.gen_range(0..3) };
            match kind {
                0 => {
                    let anchor = Term::Var(nodes[rng.gen_range(0..nodes.len())].clone());
                    let other = match rng.gen_range(0..10) {
                        0..=6 => {
                            let v = fresh("n");
                            nodes.push(v.clone());
                            Term::Var(v)
                        }
                        7 => Term::Var(nodes[rng.gen_range(0..nodes.len())].clone()),
                        _ => constant(rng),
                    };
                    let predicate = PredicateId::new(match rng.gen_range(0..8) {
                        0 => "time",
                        1 => "rank",
                        i => PLAIN[(i - 2) % PLAIN.len()],
                    });
                    let literal_valued = ["time", "rank"].contains(&predicate.as_str());
                    let (subject, object) = if literal_valued || rng.gen_bool(0.5) { (anchor, other) } else { (other, anchor) };
                    if let (true, Term::Var(v)) = (literal_valued, &object) {
                        keyable.push(v.clone());
                    }
                    let stmt = rng.gen_bool(0.7).then(|| {
                        let s = fresh("s");
                        stmts.push(s.clone());
                        s
                    });
                    patterns.push(Pattern::Fact { stmt, subject, predicate, object });
                }
                1 => {
                    let stmt = stmts[rng.gen_range(0..stmts.len())].clone();
                    let predicate = PredicateId::new(QUALS[rng.gen_range(0..QUALS.len())]);
                    let value = if rng.gen_bool(0.8) {
                        let v = fresh("n");
                        nodes.push(v.clone());
                        if predicate.as_str() != "q_ent" {
                            keyable.push(v.clone());
                        }
                        Term::Var(v)
                    } else {
                        constant(rng)
                    };
                    patterns.push(Pattern::Qualifier { stmt, predicate, value });
                }
                _ => {
                    let stmt = stmts[rng.gen_range(0..stmts.len())].clone();
                    let t = fresh("t");
                    keyable.push(t.clone());
                    patterns.push(Pattern::ValidTime { stmt, time: t });
                }
            }
        }
        let mut q = QueryGraph::new(patterns);
        if !keyable.is_empty() && rng.gen_bool(0.7) {
            let subject = keyable[rng.gen_range(0..keyable.len())].clone();
            let predicate = ComparisonPredicate::ALL[rng.gen_range(0..ComparisonPredicate::ALL.len())];
            q = q.with_filter(TemporalFilter { predicate, reference: FilterArg::Const(year(rng)), subject });
        }
        if !keyable.is_empty() && rng.gen_bool(0.5) {
            let key = keyable[rng.gen_range(0..keyable.len())].clone();
            let direction = if rng.gen_bool(0.5) { OrdinalDirection::FromFirst } else { OrdinalDirection::FromLast };
            q = q.with_ordinal(OrdinalSelector { key, rank: rng.gen_range(1..3), direction });
        }
        if q.validate().is_ok() {
            return q;
        }
    }
}

// ---------------------------------------------------------------------------
// Oracle

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Node,
    Stmt,
    Time,
}

fn interval_of(v: &Value) -> Option<Interval> {
    match v {
        Value::Node(Node::Literal(Literal::Time(t))) => Some(t.interval()),
        Value::Span(iv, _) => Some(*iv),
        _ => None,
    }
}

/// `subject ∘ reference` by endpoint arithmetic.
fn filter_holds(p: ComparisonPredicate, s: Interval, r: Interval) -> bool {
    match p {
        ComparisonPredicate::Equal => s == r,
        ComparisonPredicate::Before => s.end <= r.start,
        ComparisonPredicate::After => r.end <= s.start,
        ComparisonPredicate::Includes => s.start <= r.start && r.end <= s.end,
        ComparisonPredicate::IsIncluded => r.start <= s.start && s.end <= r.end,
        ComparisonPredicate::Overlaps => s.start < r.end && r.start < s.end,
    }
}

fn value_of(t: &Term, a: &BTreeMap<Var, Value>) -> Option<Value> {
    match t {
        Term::Var(v) => a.get(v).cloned(),
        Term::Entity(e) => Some(Value::Node(Node::Entity(e.clone()))),
        Term::Literal(l) => Some(Value::Node(Node::Literal(l.clone()))),
    }
}

fn pattern_holds(p: &Pattern, a: &BTreeMap<Var, Value>, g: &KnowledgeGraph) -> Option<bool> {
    let stmt_of = |v: &Var| match a.get(v)? {
        Value::Statement(id) => Some(Some(*id)),
        _ => Some(None),
    };
    Some(match p {
        Pattern::Fact { stmt, subject, predicate, object } => {
            let s = value_of(subject, a)?;
            let o = value_of(object, a)?;
            let matches = |id: StatementId| {
                let st = g.statement(id);
                st.predicate == *predicate
                    && s == Value::Node(Node::Entity(st.subject.clone()))
                    && o == Value::Node(st.object.clone())
            };
            match stmt {
                Some(v) => stmt_of(v)?.is_some_and(matches),
                None => g.statement_ids().any(matches),
            }
        }
        Pattern::Qualifier { stmt, predicate, value } => {
            let v = value_of(value, a)?;
            stmt_of(stmt)?.is_some_and(|id| {
                g.statement(id).qualifiers.iter().any(|q| q.predicate == *predicate && Value::Node(q.value.clone()) == v)
            })
        }
        Pattern::ValidTime { stmt, time } => {
            let t = a.get(time)?;
            stmt_of(stmt)?.is_some_and(|id| match g.temporal_of(id) {
                Ok(Some(iv)) => *t == Value::Span(iv, g.anchor_time(id).cloned()),
                _ => false,
            })
        }
    })
}

/// Answers by enumerating every assignment of every variable over its
/// domain, pruning only on patterns whose variables are all assigned.
pub fn oracle_execute(q: &QueryGraph, g: &KnowledgeGraph) -> BTreeSet<Node> {
    let mut order: Vec<(Var, Kind)> = Vec::new();
    let mut add = |v: &Var, k: Kind| {
        if !order.iter().any(|(x, _)| x == v) {
            order.push((v.clone(), k));
        }
    };
    for p in &q.patterns {
        match p {
            Pattern::Fact { stmt, subject, object, .. } => {
                for t in [subject, object] {
                    if let Term::Var(v) = t {
                        add(v, Kind::Node);
                    }
                }
                if let Some(s) = stmt {
                    add(s, Kind::Stmt);
                }
            }
            Pattern::Qualifier { stmt, value, .. } => {
                add(stmt, Kind::Stmt);
                if let Term::Var(v) = value {
                    add(v, Kind::Node);
                }
            }
            Pattern::ValidTime { stmt, time } => {
                add(stmt, Kind::Stmt);
                add(time, Kind::Time);
            }
        }
    }

    let mut nodes: BTreeSet<Node> = g.entities().iter().map(|e| Node::Entity(e.id.clone())).collect();
    for s in g.statements() {
        nodes.insert(s.object.clone());
        nodes.extend(s.qualifiers.iter().map(|q| q.value.clone()));
    }
    let domain = |k: Kind| -> Vec<Value> {
        match k {
            Kind::Node => nodes.iter().cloned().map(Value::Node).collect(),
            Kind::Stmt => g.statement_ids().map(Value::Statement).collect(),
            Kind::Time => g
                .statement_ids()
                .filter_map(|id| Some(Value::Span(g.temporal_of(id).ok()??, g.anchor_time(id).cloned())))
                .collect(),
        }
    };
    let domains: Vec<Vec<Value>> = order.iter().map(|(_, k)| domain(*k)).collect();

    let mut solutions = Vec::new();
    let mut assignment = BTreeMap::new();
    enumerate(0, &order, &domains, q, g, &mut assignment, &mut solutions);

    let solutions: Vec<BTreeMap<Var, Value>> = solutions
        .into_iter()
        .filter(|a| {
            q.filters.iter().all(|f| {
                let s = a.get(&f.subject).and_then(interval_of);
                let r = match &f.reference {
                    FilterArg::Const(t) => Some(t.interval()),
                    FilterArg::Var(v) => a.get(v).and_then(interval_of),
                };
                matches!((s, r), (Some(s), Some(r)) if filter_holds(f.predicate, s, r))
            })
        })
        .collect();

    let project = |v: &Value| match v {
        Value::Node(n) => Some(n.clone()),
        Value::Span(_, t) => t.clone().map(|t| Node::Literal(Literal::Time(t))),
        Value::Statement(_) => None,
    };
    let Some(ord) = &q.ordinal else {
        return solutions.iter().filter_map(|a| project(a.get(&q.answer)?)).collect();
    };
    let key = |v: &Value| match v {
        Value::Node(Node::Literal(Literal::Int(n))) => Some((*n, *n)),
        other => interval_of(other).map(|iv| (iv.start, iv.end)),
    };
    let mut keyed: Vec<((i64, i64), Node)> =
        solutions.iter().filter_map(|a| Some((key(a.get(&ord.key)?)?, project(a.get(&q.answer)?)?))).collect();
    keyed.sort();
    if ord.direction == OrdinalDirection::FromLast {
        // Keys descend; equal keys keep ascending answers.
        keyed.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    }
    let mut seen = BTreeSet::new();
    keyed.retain(|(_, n)| seen.insert(n.clone()));
    keyed.into_iter().nth(ord.rank as usize - 1).map(|(_, n)| n).into_iter().collect()
}

fn enumerate(
    i: usize,
    order: &[(Var, Kind)],
    domains: &[Vec<Value>],
    q: &QueryGraph,
    g: &KnowledgeGraph,
    a: &mut BTreeMap<Var, Value>,
    out: &mut Vec<BTreeMap<Var, Value>>,
) {
    for p in &q.patterns {
        if pattern_holds(p, a, g) == Some(false) {
            return;
        }
    }
    let Some((var, _)) = order.get(i) else {
        out.push(a.clone());
        return;
    };
    for value in &domains[i] {
        a.insert(var.clone(), value.clone());
        enumerate(i + 1, order, domains, q, g, a, out);
    }
    a.remove(var);
}
