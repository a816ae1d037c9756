use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{FilterArg, Pattern, QueryGraph, Term, Var};
use crate::annotate::OrdinalDirection;
use crate::kg::{KnowledgeGraph, Literal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SerializeMode {
    /// Label words only, for the scorer.
    Ranking,
    /// SPARQL-like text.
    Debug,
}

enum Kind<'a> {
    Fact(Option<&'a Var>, &'a str),
    Qualifier(&'a str),
    ValidTime,
    Filter(&'a str),
}

/// A pattern or filter seen as an edge, oriented away from the answer.
struct Edge<'a> {
    near: Term,
    far: Term,
    kind: Kind<'a>,
    /// Subject first, as written in the pattern.
    flipped: bool,
    dist: usize,
    label: String,
}

fn words_only(text: &str) -> String {
    text.chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect::<String>()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

fn ranking_label(t: &Term, q: &QueryGraph, g: &KnowledgeGraph) -> String {
    match t {
        Term::Entity(e) => words_only(g.entity_label(e)),
        Term::Literal(Literal::Str(s)) => words_only(s),
        Term::Literal(l) => l.to_string(),
        Term::Var(v) if *v == q.answer => "ANS".into(),
        Term::Var(_) => String::new(),
    }
}

fn ordinal_word(rank: u32, direction: OrdinalDirection) -> String {
    const WORDS: [&str; 10] = ["first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth"];
    let base = match WORDS.get(rank as usize - 1) {
        Some(w) => (*w).to_string(),
        None => format!("{rank}th"),
    };
    match (direction, rank) {
        (OrdinalDirection::FromFirst, _) => base,
        (OrdinalDirection::FromLast, 1) => "last".into(),
        (OrdinalDirection::FromLast, _) => format!("{base} last"),
    }
}

fn edges<'a>(q: &'a QueryGraph, g: &'a KnowledgeGraph) -> Vec<Edge<'a>> {
    let dist = q.distances();
    let d = |t: &Term| dist.get(t).copied().unwrap_or(usize::MAX);
    let mut out = Vec::new();
    let mut push = |a: Term, b: Term, kind: Kind<'a>, label: String| {
        let flipped = d(&b) < d(&a);
        let (near, far) = if flipped { (b, a) } else { (a, b) };
        let dist = d(&near);
        out.push(Edge { near, far, kind, flipped, dist, label });
    };
    for p in &q.patterns {
        match p {
            Pattern::Fact { stmt, subject, predicate, object } => {
                let label = words_only(g.predicate_label(predicate));
                push(subject.clone(), object.clone(), Kind::Fact(stmt.as_ref(), predicate.as_str()), label);
            }
            Pattern::Qualifier { stmt, predicate, value } => {
                let label = words_only(g.predicate_label(predicate));
                push(Term::Var(stmt.clone()), value.clone(), Kind::Qualifier(predicate.as_str()), label);
            }
            Pattern::ValidTime { stmt, time } => {
                push(Term::Var(stmt.clone()), Term::Var(time.clone()), Kind::ValidTime, String::new());
            }
        }
    }
    for f in &q.filters {
        let label = f.predicate.as_str().to_lowercase().replace('_', " ");
        let reference = match &f.reference {
            FilterArg::Var(v) => Term::Var(v.clone()),
            FilterArg::Const(t) => Term::Literal(Literal::Time(t.clone())),
        };
        push(Term::Var(f.subject.clone()), reference, Kind::Filter(f.predicate.as_str()), label);
    }
    let far_label = |e: &Edge| ranking_label(&e.far, q, g);
    out.sort_by(|a, b| (a.dist, &a.label, far_label(a)).cmp(&(b.dist, &b.label, far_label(b))));
    out
}

/// Deterministic rendering. Edges are ordered by distance from the answer,
/// then predicate label, then far-node label.
pub fn serialize(q: &QueryGraph, g: &KnowledgeGraph, mode: SerializeMode) -> String {
    let es = edges(q, g);
    match mode {
        SerializeMode::Ranking => {
            let mut words: Vec<String> = Vec::new();
            let mut last = String::new();
            for e in &es {
                let near = ranking_label(&e.near, q, g);
                if !near.is_empty() && near != last {
                    words.push(near.clone());
                }
                words.push(e.label.clone());
                let far = ranking_label(&e.far, q, g);
                words.push(far.clone());
                last = if far.is_empty() { near } else { far };
            }
            if let Some(o) = &q.ordinal {
                words.push(ordinal_word(o.rank, o.direction));
            }
            words.retain(|w| !w.is_empty());
            words.join(" ")
        }
        SerializeMode::Debug => {
            let mut names: BTreeMap<Var, String> = BTreeMap::new();
            names.insert(q.answer.clone(), "?ans".into());
            let mut name = |v: &Var| {
                let n = names.len();
                names.entry(v.clone()).or_insert_with(|| format!("?v{n}")).clone()
            };
            let mut term = |t: &Term| match t {
                Term::Entity(e) => e.0.clone(),
                Term::Literal(Literal::Time(t)) => format!("\"{t}\""),
                Term::Literal(Literal::Int(n)) => n.to_string(),
                Term::Literal(Literal::Str(s)) => format!("{s:?}"),
                Term::Var(v) => name(v),
            };
            let mut out = String::from("SELECT ?ans WHERE {\n");
            for e in &es {
                let (a, b) = if e.flipped { (&e.far, &e.near) } else { (&e.near, &e.far) };
                let (a, b) = (term(a), term(b));
                let line = match &e.kind {
                    Kind::Fact(None, p) => format!("{a} <{p}> {b} ."),
                    Kind::Fact(Some(s), p) => {
                        let s = term(&Term::Var((*s).clone()));
                        format!("{a} <{p}> {b} AS {s} .")
                    }
                    Kind::Qualifier(p) => format!("{a} <{p}> {b} ."),
                    Kind::ValidTime => format!("{a} VALID_TIME {b} ."),
                    Kind::Filter(p) => format!("FILTER({p}({a}, {b})) ."),
                };
                let _ = writeln!(out, "  {line}");
            }
            if let Some(o) = &q.ordinal {
                let dir = match o.direction {
                    OrdinalDirection::FromFirst => "FROM_FIRST",
                    OrdinalDirection::FromLast => "FROM_LAST",
                };
                let key = term(&Term::Var(o.key.clone()));
                let _ = writeln!(out, "  RANK({dir}, {}, {key}) .", o.rank);
            }
            out.push('}');
            out
        }
    }
}
