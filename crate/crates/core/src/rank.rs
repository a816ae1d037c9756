//! Candidate scoring, ranking and training data.
//!
//! The scorer is linear over lexical overlap features between the question
//! and a query's ranking serialization, plus per-structure biases. The
//! untrained model weighs only the overlap ratio.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::LazyLock;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evoke::Structure;
use crate::ground::Candidate;
use crate::kg::{EntityId, KnowledgeGraph};
use crate::query::{execute, serialize, AnswerSet, SerializeMode, Term};
use crate::text::normalized;

#[derive(Debug, Error)]
pub enum RankError {
    #[error("training set has no positive example")]
    NoPositives,
    #[error("cannot read model: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed model: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown sampling mode `{0}`")]
    UnknownMode(String),
}

#[derive(Deserialize)]
struct SynonymFile {
    question_words: BTreeMap<String, Vec<String>>,
    words: BTreeMap<String, Vec<String>>,
    stopwords: Vec<String>,
}

struct Lexicon {
    question_words: Vec<(Vec<String>, Vec<String>)>,
    words: BTreeMap<String, Vec<String>>,
    stopwords: BTreeSet<String>,
}

static LEXICON: LazyLock<Lexicon> = LazyLock::new(|| {
    let file: SynonymFile =
        serde_json::from_str(include_str!("../resources/synonyms.json")).expect("bundled synonym lexicon parses");
    // Longer question phrases are tried first.
    let mut question_words: Vec<(Vec<String>, Vec<String>)> =
        file.question_words.into_iter().map(|(k, v)| (normalized(&k), v)).collect();
    question_words.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(&b.0)));
    Lexicon { question_words, words: file.words, stopwords: file.stopwords.into_iter().collect() }
});

/// Five-character prefix stem; `7th` becomes `7`.
fn stem(word: &str) -> String {
    let w = word.to_lowercase();
    let digits = w.trim_end_matches(|c: char| c.is_ascii_alphabetic());
    if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) && ["st", "nd", "rd", "th", ""].contains(&&w[digits.len()..]) {
        return digits.to_string();
    }
    w.chars().take(5).collect()
}

fn keep(word: &str) -> bool {
    word.chars().count() > 1 && !LEXICON.stopwords.contains(word)
}

/// Stemmed content tokens of a serialization.
pub fn tokens(text: &str) -> BTreeSet<String> {
    normalized(text).into_iter().filter(|w| keep(w)).map(|w| stem(&w)).collect()
}

/// Stemmed question tokens, with and without synonym expansion.
fn question_tokens(question: &str) -> (BTreeSet<String>, BTreeSet<String>) {
    let words = normalized(question);
    let plain = tokens(question);
    let mut expanded = plain.clone();
    if let Some((_, syn)) = LEXICON.question_words.iter().find(|(k, _)| words.starts_with(k)) {
        expanded.extend(syn.iter().map(|s| stem(s)));
    }
    for w in &words {
        if let Some(syn) = LEXICON.words.get(w) {
            expanded.extend(syn.iter().map(|s| stem(s)));
        }
    }
    (plain, expanded)
}

pub const FEATURES: [&str; 12] = [
    "overlap",
    "shared",
    "coverage",
    "norm_overlap",
    "entity_coverage",
    "bias_basic",
    "bias_is1",
    "bias_is2",
    "bias_is3",
    "bias_is4",
    "bias_is5",
    "bias_is6",
];

pub type Features = BTreeMap<String, f64>;

/// Overlap features of a question against a serialization.
pub fn text_features(question: &str, serialization: &str) -> Features {
    let (plain, expanded) = question_tokens(question);
    let s = tokens(serialization);
    let shared = expanded.intersection(&s).count() as f64;
    let ratio = |n: f64, d: usize| if d == 0 { 0.0 } else { n / d as f64 };
    let mut f = Features::new();
    f.insert("overlap".into(), ratio(shared, s.len()));
    f.insert("shared".into(), shared);
    f.insert("coverage".into(), ratio(plain.intersection(&s).count() as f64, plain.len()));
    let norm = (expanded.len() * s.len()) as f64;
    f.insert("norm_overlap".into(), if norm == 0.0 { 0.0 } else { shared / norm.sqrt() });
    f
}

/// Text features plus entity coverage and structure indicators.
pub fn candidate_features(question: &str, c: &Candidate, g: &KnowledgeGraph, linked: &[EntityId]) -> Features {
    let mut f = text_features(question, &serialize(&c.graph, g, SerializeMode::Ranking));
    let used: BTreeSet<&EntityId> = c
        .graph
        .patterns
        .iter()
        .flat_map(|p| p.terms())
        .filter_map(|t| match t {
            Term::Entity(e) => linked.iter().find(|l| **l == e),
            _ => None,
        })
        .collect();
    let distinct: BTreeSet<&EntityId> = linked.iter().collect();
    let cov = if distinct.is_empty() { 0.0 } else { used.len() as f64 / distinct.len() as f64 };
    f.insert("entity_coverage".into(), cov);
    let structures = c.structures();
    f.insert("bias_basic".into(), f64::from(u8::from(structures.is_empty())));
    for s in Structure::ALL {
        f.insert(format!("bias_is{}", s.number()), f64::from(u8::from(structures.contains(&s))));
    }
    f
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorerModel {
    pub trained: bool,
    pub weights: BTreeMap<String, f64>,
}

impl Default for ScorerModel {
    fn default() -> Self {
        ScorerModel::untrained()
    }
}

impl ScorerModel {
    pub fn untrained() -> Self {
        ScorerModel { trained: false, weights: [("overlap".to_string(), 1.0)].into() }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RankError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn from_json(text: &str) -> Result<Self, RankError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn score_features(&self, f: &Features) -> f64 {
        self.weights.iter().map(|(k, w)| w * f.get(k).copied().unwrap_or(0.0)).sum()
    }
}

pub fn score(model: &ScorerModel, question: &str, serialization: &str) -> f64 {
    model.score_features(&text_features(question, serialization))
}

/// Untrained score, used for beam pruning during grounding.
pub fn lexical_score(question: &str, serialization: &str) -> f64 {
    text_features(question, serialization)["overlap"]
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoredCandidate {
    #[serde(skip)]
    pub candidate: Candidate,
    pub serialization: String,
    pub debug: String,
    pub score: f64,
    pub answers: AnswerSet,
}

/// Scores and executes candidates; best first, ties broken by ranking then
/// debug serialization.
pub fn rank(
    model: &ScorerModel,
    question: &str,
    linked: &[EntityId],
    candidates: Vec<Candidate>,
    g: &KnowledgeGraph,
) -> Vec<ScoredCandidate> {
    let mut out: Vec<ScoredCandidate> = candidates
        .into_iter()
        .map(|c| {
            let score = model.score_features(&candidate_features(question, &c, g, linked));
            ScoredCandidate {
                serialization: serialize(&c.graph, g, SerializeMode::Ranking),
                debug: serialize(&c.graph, g, SerializeMode::Debug),
                answers: execute(&c.graph, g).unwrap_or_default(),
                score,
                candidate: c,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        b.score.total_cmp(&a.score).then_with(|| a.serialization.cmp(&b.serialization)).then_with(|| a.debug.cmp(&b.debug))
    });
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Label {
    Positive,
    ConfusingNeg,
    IrrelevantNeg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    #[default]
    Full,
    NoConfusing,
    NoIrrelevant,
    Random,
}

impl std::str::FromStr for SamplingMode {
    type Err = RankError;

    fn from_str(s: &str) -> Result<Self, RankError> {
        match s {
            "full" => Ok(SamplingMode::Full),
            "no-confusing" => Ok(SamplingMode::NoConfusing),
            "no-irrelevant" => Ok(SamplingMode::NoIrrelevant),
            "random" => Ok(SamplingMode::Random),
            other => Err(RankError::UnknownMode(other.to_string())),
        }
    }
}

/// A candidate of one question, with what labeling needs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoolCandidate {
    pub serialization: String,
    pub features: Features,
    pub f1: f64,
    /// Whether any answer is in the gold set.
    pub hits_gold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuestionPool {
    pub id: String,
    pub question: String,
    pub candidates: Vec<PoolCandidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingExample {
    pub question_id: String,
    pub question: String,
    pub serialization: String,
    pub label: Label,
    pub f1: f64,
    pub features: Features,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingSet {
    pub examples: Vec<TrainingExample>,
    /// Ids of questions without a positive candidate.
    pub skipped: Vec<String>,
}

impl TrainingSet {
    pub fn counts(&self) -> BTreeMap<Label, usize> {
        let mut out: BTreeMap<Label, usize> =
            [Label::Positive, Label::ConfusingNeg, Label::IrrelevantNeg].into_iter().map(|l| (l, 0)).collect();
        for e in &self.examples {
            *out.entry(e.label).or_default() += 1;
        }
        out
    }
}

pub const DEFAULT_NEGATIVES: usize = 20;

fn pick(rng: &mut ChaCha8Rng, pool: &[usize], n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = sample(rng, pool.len(), n.min(pool.len())).into_iter().map(|i| pool[i]).collect();
    idx.sort_unstable();
    idx
}

/// Labels candidates and samples `k` negatives per positive, split evenly
/// between confusing and irrelevant pools with back-fill.
pub fn build_training_set(pools: &[QuestionPool], k: usize, mode: SamplingMode, seed: u64) -> TrainingSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = TrainingSet { examples: Vec::new(), skipped: Vec::new() };
    for q in pools {
        let best = q.candidates.iter().map(|c| c.f1).fold(0.0, f64::max);
        if best <= 0.0 {
            log::warn!("question {} has no candidate with positive f1; skipped", q.id);
            set.skipped.push(q.id.clone());
            continue;
        }
        let by = |pred: &dyn Fn(&PoolCandidate) -> bool| -> Vec<usize> {
            q.candidates.iter().enumerate().filter(|(_, c)| pred(c)).map(|(i, _)| i).collect()
        };
        let positives = by(&|c| c.f1 == best);
        let confusing = by(&|c| c.f1 > 0.0 && c.f1 < best);
        let irrelevant = by(&|c| !c.hits_gold);
        let n = k * positives.len();
        let (conf, irr) = match mode {
            SamplingMode::Full => {
                let mut c = confusing.len().min(n.div_ceil(2));
                let i = irrelevant.len().min(n - c);
                c = confusing.len().min(n - i);
                (pick(&mut rng, &confusing, c), pick(&mut rng, &irrelevant, i))
            }
            SamplingMode::NoConfusing => (vec![], pick(&mut rng, &irrelevant, n)),
            SamplingMode::NoIrrelevant => (pick(&mut rng, &confusing, n), vec![]),
            SamplingMode::Random => {
                let mut all: Vec<usize> = confusing.iter().chain(&irrelevant).copied().collect();
                all.sort_unstable();
                let chosen = pick(&mut rng, &all, n);
                chosen.into_iter().partition(|i| confusing.contains(i))
            }
        };
        let labeled = positives
            .iter()
            .map(|&i| (i, Label::Positive))
            .chain(conf.iter().map(|&i| (i, Label::ConfusingNeg)))
            .chain(irr.iter().map(|&i| (i, Label::IrrelevantNeg)));
        for (i, label) in labeled {
            let c = &q.candidates[i];
            set.examples.push(TrainingExample {
                question_id: q.id.clone(),
                question: q.question.clone(),
                serialization: c.serialization.clone(),
                label,
                f1: c.f1,
                features: c.features.clone(),
            });
        }
    }
    set
}

pub const LEARNING_RATE: f64 = 0.05;
pub const STEPS: usize = 200;

fn vector(f: &Features) -> [f64; FEATURES.len()] {
    FEATURES.map(|k| f.get(k).copied().unwrap_or(0.0))
}

/// Pairwise logistic regression over (positive, negative) pairs of the same
/// question, by full-batch gradient descent from the untrained weights.
pub fn train(examples: &[TrainingExample]) -> Result<ScorerModel, RankError> {
    if !examples.iter().any(|e| e.label == Label::Positive) {
        return Err(RankError::NoPositives);
    }
    type Group = (Vec<[f64; 12]>, Vec<[f64; 12]>);
    let mut groups: BTreeMap<&str, Group> = BTreeMap::new();
    for e in examples {
        let g = groups.entry(&e.question_id).or_default();
        if e.label == Label::Positive { &mut g.0 } else { &mut g.1 }.push(vector(&e.features));
    }
    let diffs: Vec<[f64; 12]> = groups
        .values()
        .flat_map(|(pos, neg)| pos.iter().flat_map(move |p| neg.iter().map(move |n| std::array::from_fn(|i| p[i] - n[i]))))
        .collect();
    let mut w = vector(&ScorerModel::untrained().weights);
    if !diffs.is_empty() {
        for _ in 0..STEPS {
            let mut grad = [0.0; 12];
            for d in &diffs {
                let margin: f64 = w.iter().zip(d).map(|(a, b)| a * b).sum();
                let coef = 1.0 / (1.0 + margin.exp());
                for (g, x) in grad.iter_mut().zip(d) {
                    *g -= coef * x;
                }
            }
            for (wi, g) in w.iter_mut().zip(grad) {
                *wi -= LEARNING_RATE * g / diffs.len() as f64;
            }
        }
    }
    Ok(ScorerModel { trained: true, weights: FEATURES.iter().zip(w).map(|(k, v)| (k.to_string(), v)).collect() })
}
