//! End-to-end pipeline, benchmark loading and evaluation reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evoke::evoke_interpretations;
use crate::ground::{generate_candidates, GroundingConfig, GroundingContext};
use crate::kg::{EntityId, KnowledgeGraph};
use crate::query::{f1_score, AnswerSet, Prf};
use crate::rank::{
    build_training_set, candidate_features, rank, train, Label, PoolCandidate, QuestionPool, RankError, SamplingMode,
    ScoredCandidate, ScorerModel, TrainingSet,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("benchmark line {line}{}: {message}", id.as_ref().map(|i| format!(" (id `{i}`)")).unwrap_or_default())]
    Record { line: usize, id: Option<String>, message: String },
    #[error("benchmark is empty")]
    EmptyBenchmark,
    #[error("no question in the benchmark has a candidate with positive f1")]
    NothingTrainable,
    #[error(transparent)]
    Rank(#[from] RankError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkQuestion {
    pub id: String,
    pub question: String,
    /// Entity ids or canonical literals.
    pub answers: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotations: Option<serde_json::Value>,
}

/// Parses JSON lines; blank lines are skipped.
pub fn parse_benchmark(text: &str) -> Result<Vec<BenchmarkQuestion>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = |message: String| {
            let id = serde_json::from_str::<serde_json::Value>(line)
                .ok()
                .and_then(|v| v.get("id").and_then(|x| x.as_str()).map(str::to_string));
            EvalError::Record { line: i + 1, id, message }
        };
        let q: BenchmarkQuestion = serde_json::from_str(line).map_err(|e| record(e.to_string()))?;
        if q.answers.is_empty() {
            return Err(record("gold answers are empty".into()));
        }
        out.push(q);
    }
    Ok(out)
}

pub fn load_benchmark(path: impl AsRef<Path>) -> Result<Vec<BenchmarkQuestion>, EvalError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io { path: path.display().to_string(), source })?;
    parse_benchmark(&text)
}

/// The answer reported for hit@1: the smallest id or literal.
pub fn select_answer(answers: &AnswerSet) -> Option<String> {
    answers.to_strings().into_iter().next()
}

#[derive(Debug, Clone, Serialize)]
pub struct Answer {
    pub question: String,
    pub answers: AnswerSet,
    pub query: Option<String>,
    pub debug: Option<String>,
    pub candidates: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceCandidate {
    pub rank: usize,
    pub score: f64,
    pub structures: Vec<String>,
    pub provenance: Vec<String>,
    pub slots: Vec<String>,
    pub serialization: String,
    pub debug: String,
    pub answers: AnswerSet,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trace {
    pub question: String,
    pub timeml: String,
    pub links: Vec<String>,
    pub constraints: Vec<String>,
    pub constraint_lines: Vec<String>,
    pub templates: Vec<String>,
    pub candidates: Vec<TraceCandidate>,
}

impl Trace {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "question: {}", self.question);
        let _ = writeln!(out, "annotation:\n  {}", self.timeml.replace('\n', "\n  "));
        let _ = writeln!(out, "linked entities:");
        for l in &self.links {
            let _ = writeln!(out, "  {l}");
        }
        let _ = writeln!(out, "constraints:");
        for (c, d) in self.constraints.iter().zip(&self.constraint_lines) {
            let _ = writeln!(out, "  {c}    {d}");
        }
        let _ = writeln!(out, "templates:");
        for t in &self.templates {
            let _ = writeln!(out, "  {t}");
        }
        let _ = writeln!(out, "candidates: {}", self.candidates.len());
        for c in &self.candidates {
            let s = if c.structures.is_empty() { "basic".to_string() } else { c.structures.join("+") };
            let _ = writeln!(out, "#{} score={:.6} [{s}] {}", c.rank, c.score, c.serialization);
            for p in &c.provenance {
                let _ = writeln!(out, "  from {p}");
            }
            for slot in &c.slots {
                let _ = writeln!(out, "  slot {slot}");
            }
            let _ = writeln!(out, "  answers: {}", c.answers.to_strings().into_iter().collect::<Vec<_>>().join(", "));
            let _ = writeln!(out, "  {}", c.debug.replace('\n', "\n  "));
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QuestionResult {
    pub id: String,
    pub question: String,
    pub gold: BTreeSet<String>,
    pub predicted: BTreeSet<String>,
    pub selected_answer: Option<String>,
    pub hit_at_1: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub query: Option<String>,
}

impl QuestionResult {
    pub fn new(id: &str, question: &str, gold: &BTreeSet<String>, answers: &AnswerSet, query: Option<String>) -> Self {
        let predicted = answers.to_strings();
        let Prf { precision, recall, f1 } = f1_score(&predicted, gold);
        let selected_answer = select_answer(answers);
        let hit = selected_answer.as_ref().is_some_and(|a| gold.contains(a));
        QuestionResult {
            id: id.to_string(),
            question: question.to_string(),
            gold: gold.clone(),
            predicted,
            selected_answer,
            hit_at_1: f64::from(u8::from(hit)),
            precision,
            recall,
            f1,
            query,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Means {
    pub hit_at_1: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub questions: Vec<QuestionResult>,
    pub mean: Means,
}

impl EvalReport {
    /// Sorts by id and averages each metric over questions.
    pub fn from_results(mut questions: Vec<QuestionResult>) -> Self {
        questions.sort_by(|a, b| a.id.cmp(&b.id));
        let n = questions.len().max(1) as f64;
        let avg = |f: fn(&QuestionResult) -> f64| questions.iter().map(f).sum::<f64>() / n;
        let mean = Means {
            hit_at_1: avg(|q| q.hit_at_1),
            precision: avg(|q| q.precision),
            recall: avg(|q| q.recall),
            f1: avg(|q| q.f1),
        };
        EvalReport { questions, mean }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let width = self.questions.iter().map(|q| q.id.len()).max().unwrap_or(2).max(4);
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  {:>5}  {:>9}  {:>6}  {:>6}  answer", "id", "hit@1", "precision", "recall", "f1");
        for q in &self.questions {
            let _ = writeln!(
                out,
                "{:<width$}  {:>5.3}  {:>9.3}  {:>6.3}  {:>6.3}  {}",
                q.id,
                q.hit_at_1,
                q.precision,
                q.recall,
                q.f1,
                q.selected_answer.as_deref().unwrap_or("-")
            );
        }
        let m = &self.mean;
        let _ = writeln!(
            out,
            "{:<width$}  {:>5.3}  {:>9.3}  {:>6.3}  {:>6.3}",
            "mean", m.hit_at_1, m.precision, m.recall, m.f1
        );
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainOutcome {
    pub model: ScorerModel,
    pub counts: BTreeMap<Label, usize>,
    pub skipped: Vec<String>,
    pub examples: usize,
}

pub struct Pipeline<'g> {
    pub graph: &'g KnowledgeGraph,
    pub config: GroundingConfig,
    pub model: ScorerModel,
}

impl<'g> Pipeline<'g> {
    pub fn new(graph: &'g KnowledgeGraph, config: GroundingConfig, model: ScorerModel) -> Self {
        Pipeline { graph, config, model }
    }

    fn ranked(&self, question: &str) -> (GroundingContext<'g>, Vec<ScoredCandidate>) {
        let ctx = GroundingContext::new(self.graph, question, self.config.clone());
        let candidates = generate_candidates(&ctx);
        let linked = linked(&ctx);
        let ranked = rank(&self.model, question, &linked, candidates, self.graph);
        (ctx, ranked)
    }

    /// Answers with the top-ranked candidate.
    pub fn answer(&self, question: &str) -> Answer {
        let (_, ranked) = self.ranked(question);
        let candidates = ranked.len();
        match ranked.into_iter().next() {
            Some(top) => Answer {
                question: question.to_string(),
                answers: top.answers,
                query: Some(top.serialization),
                debug: Some(top.debug),
                candidates,
            },
            None => Answer { question: question.to_string(), answers: AnswerSet::default(), query: None, debug: None, candidates },
        }
    }

    pub fn trace(&self, question: &str) -> Trace {
        let (ctx, ranked) = self.ranked(question);
        let doc = &ctx.doc;
        let candidates = ranked
            .into_iter()
            .enumerate()
            .map(|(i, r)| TraceCandidate {
                rank: i + 1,
                score: r.score,
                structures: r.candidate.structures().into_iter().map(|s| s.to_string()).collect(),
                provenance: r
                    .candidate
                    .provenance
                    .iter()
                    .map(|p| format!("{} via {}", ctx.constraints[p.constraint].notation(doc), p.template))
                    .collect(),
                slots: r.candidate.plan.slot_log(),
                serialization: r.serialization,
                debug: r.debug,
                answers: r.answers,
            })
            .collect();
        Trace {
            question: question.to_string(),
            timeml: doc.to_timeml(),
            links: ctx.links.iter().map(|(span, e)| format!("tokens {}..{} -> {e}", span.start, span.end)).collect(),
            constraints: ctx.constraints.iter().map(|c| c.notation(doc)).collect(),
            constraint_lines: ctx.constraints.iter().map(|c| c.debug_line(doc)).collect(),
            templates: ctx
                .constraints
                .iter()
                .flat_map(|c| evoke_interpretations(c).into_iter().map(move |t| (c, t)))
                .map(|(c, t)| {
                    let state = if ctx.config.enabled.contains(&t.structure) { "" } else { " (disabled)" };
                    format!("{t} for {}{state}", c.notation(doc))
                })
                .collect(),
            candidates,
        }
    }

    pub fn evaluate(&self, benchmark: &[BenchmarkQuestion]) -> EvalReport {
        let results = benchmark
            .iter()
            .map(|q| {
                let a = self.answer(&q.question);
                QuestionResult::new(&q.id, &q.question, &q.answers, &a.answers, a.query)
            })
            .collect();
        EvalReport::from_results(results)
    }

    /// Every candidate of every question with its features and f1.
    pub fn pools(&self, benchmark: &[BenchmarkQuestion]) -> Vec<QuestionPool> {
        benchmark
            .iter()
            .map(|q| {
                let (ctx, ranked) = self.ranked(&q.question);
                let linked = linked(&ctx);
                let candidates = ranked
                    .into_iter()
                    .map(|r| {
                        let predicted = r.answers.to_strings();
                        PoolCandidate {
                            features: candidate_features(&q.question, &r.candidate, self.graph, &linked),
                            f1: f1_score(&predicted, &q.answers).f1,
                            hits_gold: predicted.iter().any(|a| q.answers.contains(a)),
                            serialization: r.serialization,
                        }
                    })
                    .collect();
                QuestionPool { id: q.id.clone(), question: q.question.clone(), candidates }
            })
            .collect()
    }

    pub fn training_set(&self, benchmark: &[BenchmarkQuestion], k: usize, mode: SamplingMode, seed: u64) -> TrainingSet {
        build_training_set(&self.pools(benchmark), k, mode, seed)
    }

    pub fn train(
        &self,
        benchmark: &[BenchmarkQuestion],
        k: usize,
        mode: SamplingMode,
        seed: u64,
    ) -> Result<TrainOutcome, EvalError> {
        if benchmark.is_empty() {
            return Err(EvalError::EmptyBenchmark);
        }
        let set = self.training_set(benchmark, k, mode, seed);
        if set.examples.is_empty() {
            return Err(EvalError::NothingTrainable);
        }
        let model = train(&set.examples)?;
        Ok(TrainOutcome { model, counts: set.counts(), skipped: set.skipped, examples: set.examples.len() })
    }
}

fn linked(ctx: &GroundingContext) -> Vec<EntityId> {
    ctx.links.iter().map(|(_, e)| e.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn malformed_record_is_named() {
        let text = "{\"id\":\"a\",\"question\":\"q\",\"answers\":[\"x\"]}\n{\"id\":\"b\",\"question\":3}\n";
        let err = parse_benchmark(text).unwrap_err().to_string();
        assert!(err.contains("line 2") && err.contains("`b`"), "{err}");
        let err = parse_benchmark("{\"id\":\"c\",\"question\":\"q\",\"answers\":[]}").unwrap_err().to_string();
        assert!(err.contains("`c`"), "{err}");
    }

    #[test]
    fn unanswerable_conventions() {
        let gold: BTreeSet<String> = ["x".to_string()].into();
        let r = QuestionResult::new("u", "q", &gold, &AnswerSet::default(), None);
        assert_eq!((r.precision, r.recall, r.f1, r.hit_at_1), (1.0, 0.0, 0.0, 0.0));
    }
}
