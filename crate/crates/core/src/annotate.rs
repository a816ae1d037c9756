//! Rule-based TimeML-lite annotation of questions.
//!
//! Finds events (nominal or predicative), time expressions, ordinals and
//! signals, then links each signal to the nearest event before it and the
//! nearest event or time expression after it.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::ops::Range;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::words;
use crate::time::{parse_time_value, TimeMlRelType, TimeValue};

const SIGNALS_JSON: &str = include_str!("../resources/signals.json");
const EVENTS_JSON: &str = include_str!("../resources/events.json");

#[derive(Debug, Error)]
pub enum AnnotateError {
    #[error("`{0}` is not in the signal lexicon")]
    UnknownSignal(String),
    #[error("signal `{lexeme}` does not relate to a {kind:?}")]
    NotApplicable { lexeme: String, kind: RelatedKind },
    #[error("malformed lexicon: {0}")]
    Lexicon(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RelatedKind {
    Event,
    Timex,
}

#[derive(Debug, Clone, Deserialize)]
struct SignalEntry {
    lexeme: String,
    event: Option<TimeMlRelType>,
    timex: Option<TimeMlRelType>,
}

#[derive(Debug, Clone, Deserialize)]
struct SignalFile {
    signals: Vec<SignalEntry>,
}

#[derive(Debug, Clone, Deserialize)]
struct EventFile {
    verbs: Vec<String>,
    nominal: Vec<String>,
    roles: Vec<String>,
    #[serde(default)]
    lemmas: HashMap<String, String>,
}

/// Signal and event word lists.
#[derive(Debug, Clone)]
pub struct Lexicon {
    signals: HashMap<String, SignalEntry>,
    verbs: HashSet<String>,
    nominal: HashSet<String>,
    lemmas: HashMap<String, String>,
}

impl Lexicon {
    pub fn from_json(signals: &str, events: &str) -> Result<Self, AnnotateError> {
        let signals: SignalFile = serde_json::from_str(signals)?;
        let events: EventFile = serde_json::from_str(events)?;
        Ok(Lexicon {
            signals: signals.signals.into_iter().map(|s| (s.lexeme.to_lowercase(), s)).collect(),
            verbs: events.verbs.into_iter().map(|v| v.to_lowercase()).collect(),
            nominal: events.nominal.into_iter().chain(events.roles).map(|v| v.to_lowercase()).collect(),
            lemmas: events.lemmas,
        })
    }

    pub fn builtin() -> &'static Lexicon {
        static BUILTIN: LazyLock<Lexicon> =
            LazyLock::new(|| Lexicon::from_json(SIGNALS_JSON, EVENTS_JSON).expect("bundled lexicon parses"));
        &BUILTIN
    }

    pub fn signal_to_reltype(&self, lexeme: &str, kind: RelatedKind) -> Result<TimeMlRelType, AnnotateError> {
        let key = lexeme.to_lowercase();
        let entry = self.signals.get(&key).ok_or_else(|| AnnotateError::UnknownSignal(lexeme.to_string()))?;
        let reltype = match kind {
            RelatedKind::Event => entry.event,
            RelatedKind::Timex => entry.timex,
        };
        reltype.ok_or(AnnotateError::NotApplicable { lexeme: key, kind })
    }

    fn lemma(&self, lower: &str) -> String {
        self.lemmas.get(lower).cloned().unwrap_or_else(|| lower.to_string())
    }
}

/// Signal normalization with the bundled lexicon.
pub fn signal_to_reltype(lexeme: &str, kind: RelatedKind) -> Result<TimeMlRelType, AnnotateError> {
    Lexicon::builtin().signal_to_reltype(lexeme, kind)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Tag {
    Wh,
    Aux,
    Det,
    Prep,
    Pron,
    Conj,
    Num,
    Ordinal,
    Verb,
    Noun,
    ProperNoun,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub text: String,
    pub lower: String,
    pub tag: Tag,
    /// Byte span in the question.
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    Nominal,
    Predicative,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EventMention {
    /// Token span.
    pub span: Range<usize>,
    pub kind: EventKind,
    pub lemma: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TimexMention {
    pub span: Range<usize>,
    pub value: TimeValue,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OrdinalDirection {
    FromFirst,
    FromLast,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrdinalMention {
    pub span: Range<usize>,
    pub rank: u32,
    pub direction: OrdinalDirection,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignalMention {
    pub span: Range<usize>,
    pub lexeme: String,
}

/// Index into [`AnnotationDoc::events`] or [`AnnotationDoc::timexes`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum MentionRef {
    Event(usize),
    Timex(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TLink {
    pub reltype: TimeMlRelType,
    /// Index of the target event.
    pub target: usize,
    pub related_to: MentionRef,
    /// Index of the triggering signal.
    pub signal: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnnotationDoc {
    pub question: String,
    pub tokens: Vec<Token>,
    pub events: Vec<EventMention>,
    pub timexes: Vec<TimexMention>,
    pub ordinals: Vec<OrdinalMention>,
    pub signals: Vec<SignalMention>,
    pub tlinks: Vec<TLink>,
}

const WH: &[&str] = &["who", "whom", "whose", "what", "when", "where", "which", "why", "how"];
const AUX: &[&str] = &[
    "am", "are", "be", "been", "being", "can", "could", "did", "do", "does", "had", "has", "have", "is", "may", "might",
    "must", "should", "was", "were", "will", "would",
];
const DET: &[&str] = &["a", "all", "an", "any", "each", "every", "some", "that", "the", "these", "this", "those"];
const PREP: &[&str] = &[
    "about", "after", "as", "at", "before", "between", "by", "during", "for", "from", "in", "into", "of", "on", "over",
    "since", "to", "under", "until", "with",
];
const PRON: &[&str] = &["he", "her", "him", "his", "i", "it", "its", "me", "she", "their", "them", "they", "us", "we", "you"];
const CONJ: &[&str] = &["and", "but", "or", "while"];
// Words whose -ing/-ed ending does not make them verbs.
const SUFFIX_EXCEPTIONS: &[&str] = &[
    "anything", "bed", "bring", "during", "evening", "everything", "feed", "hundred", "king", "morning", "need",
    "nothing", "red", "ring", "seed", "something", "speed", "spring", "string", "thing", "united", "wedding", "wing",
];

const ORDINAL_WORDS: &[(&str, u32, OrdinalDirection)] = &[
    ("first", 1, OrdinalDirection::FromFirst),
    ("earliest", 1, OrdinalDirection::FromFirst),
    ("second", 2, OrdinalDirection::FromFirst),
    ("third", 3, OrdinalDirection::FromFirst),
    ("fourth", 4, OrdinalDirection::FromFirst),
    ("fifth", 5, OrdinalDirection::FromFirst),
    ("sixth", 6, OrdinalDirection::FromFirst),
    ("seventh", 7, OrdinalDirection::FromFirst),
    ("eighth", 8, OrdinalDirection::FromFirst),
    ("ninth", 9, OrdinalDirection::FromFirst),
    ("tenth", 10, OrdinalDirection::FromFirst),
    ("last", 1, OrdinalDirection::FromLast),
    ("latest", 1, OrdinalDirection::FromLast),
    ("penultimate", 2, OrdinalDirection::FromLast),
];

fn ordinal_of(lower: &str) -> Option<(u32, OrdinalDirection)> {
    if let Some(&(_, rank, dir)) = ORDINAL_WORDS.iter().find(|(w, ..)| *w == lower) {
        return Some((rank, dir));
    }
    let digits = lower.trim_end_matches(|c: char| c.is_ascii_alphabetic());
    let suffix = &lower[digits.len()..];
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if !matches!(suffix, "st" | "nd" | "rd" | "th") {
        return None;
    }
    digits.parse().ok().filter(|&n| n >= 1).map(|n| (n, OrdinalDirection::FromFirst))
}

fn time_of(text: &str) -> Option<TimeValue> {
    if !text.bytes().next().is_some_and(|b| b.is_ascii_digit()) {
        return None;
    }
    let value = parse_time_value(text).ok()?;
    // Bare numbers only count as years in a plausible range.
    if !text.contains('-') && (text.len() != 4 || !(1000..=2999).contains(&value.start().year_ce().1)) {
        return None;
    }
    Some(value)
}

use chrono::Datelike as _;

fn is_capitalized(text: &str) -> bool {
    text.chars().next().is_some_and(char::is_uppercase)
}

fn tag_word(lex: &Lexicon, text: &str, lower: &str, position: usize) -> Tag {
    if time_of(text).is_some() {
        return Tag::Num;
    }
    if ordinal_of(lower).is_some() {
        return Tag::Ordinal;
    }
    let closed = [(WH, Tag::Wh), (AUX, Tag::Aux), (DET, Tag::Det), (PREP, Tag::Prep), (PRON, Tag::Pron), (CONJ, Tag::Conj)];
    if let Some((_, tag)) = closed.iter().find(|(list, _)| list.contains(&lower)) {
        return *tag;
    }
    if lower.bytes().all(|b| b.is_ascii_digit()) {
        return Tag::Num;
    }
    if lex.verbs.contains(lower) {
        return Tag::Verb;
    }
    if lex.nominal.contains(lower) {
        return Tag::Noun;
    }
    if position > 0 && is_capitalized(text) {
        return Tag::ProperNoun;
    }
    let suffixed = (lower.ends_with("ing") || lower.ends_with("ed")) && lower.len() >= 5;
    if suffixed && !SUFFIX_EXCEPTIONS.contains(&lower) {
        return Tag::Verb;
    }
    Tag::Noun
}

/// Annotates with the bundled lexicon.
pub fn annotate(question: &str) -> AnnotationDoc {
    annotate_with(Lexicon::builtin(), question)
}

pub fn annotate_with(lex: &Lexicon, question: &str) -> AnnotationDoc {
    let tokens: Vec<Token> = words(question)
        .into_iter()
        .enumerate()
        .map(|(i, w)| {
            let lower = w.text.to_lowercase();
            Token {
                tag: tag_word(lex, w.text, &lower, i),
                text: w.text.to_string(),
                lower,
                start: w.start,
                end: w.end,
            }
        })
        .collect();

    let span_text = |span: &Range<usize>| -> String {
        if span.is_empty() {
            return String::new();
        }
        question[tokens[span.start].start..tokens[span.end - 1].end].to_string()
    };

    let mut consumed = vec![false; tokens.len()];
    let mut events = Vec::new();

    // Nominal events first: their names may swallow ordinals and years,
    // as in "46th Tony Awards".
    for (i, tok) in tokens.iter().enumerate() {
        if tok.tag != Tag::Noun || !lex.nominal.contains(&tok.lower) {
            continue;
        }
        let proper_head = i > 0 && is_capitalized(&tok.text);
        let mut start = i;
        while start > 0 {
            let prev = &tokens[start - 1];
            let joins = prev.tag == Tag::ProperNoun
                || (proper_head && matches!(prev.tag, Tag::Ordinal | Tag::Num) && !consumed[start - 1]);
            if !joins {
                break;
            }
            start -= 1;
        }
        let span = start..i + 1;
        consumed[span.clone()].iter_mut().for_each(|c| *c = true);
        events.push(EventMention {
            text: span_text(&span),
            span,
            kind: EventKind::Nominal,
            lemma: lex.lemma(&tok.lower),
        });
    }
    for (i, tok) in tokens.iter().enumerate() {
        if tok.tag == Tag::Verb && !consumed[i] {
            consumed[i] = true;
            events.push(EventMention {
                span: i..i + 1,
                kind: EventKind::Predicative,
                lemma: lex.lemma(&tok.lower),
                text: tok.text.clone(),
            });
        }
    }
    events.sort_by_key(|e| e.span.start);

    let mut timexes = Vec::new();
    let mut ordinals = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        if consumed[i] {
            continue;
        }
        if let Some(value) = (tok.tag == Tag::Num).then(|| time_of(&tok.text)).flatten() {
            timexes.push(TimexMention {
                span: i..i + 1,
                value,
                text: tok.text.clone(),
            });
        } else if let Some((rank, direction)) = (tok.tag == Tag::Ordinal).then(|| ordinal_of(&tok.lower)).flatten() {
            ordinals.push(OrdinalMention {
                span: i..i + 1,
                rank,
                direction,
                text: tok.text.clone(),
            });
        }
    }

    let mut signals = Vec::new();
    let mut tlinks = Vec::new();
    let mut clause_start = 0;
    for (i, tok) in tokens.iter().enumerate() {
        // A leading "when" asks a question rather than relating two events.
        if i == 0 || !lex.signals.contains_key(&tok.lower) {
            continue;
        }
        let next_event = events.iter().position(|e| e.span.start > i).map(|k| (events[k].span.start, MentionRef::Event(k)));
        let next_timex = timexes.iter().position(|t| t.span.start > i).map(|k| (timexes[k].span.start, MentionRef::Timex(k)));
        let related = match (next_event, next_timex) {
            (Some(e), Some(t)) => Some(if t.0 < e.0 { t } else { e }),
            (e, t) => e.or(t),
        };
        let Some((_, related)) = related else { continue };
        let kind = match related {
            MentionRef::Event(_) => RelatedKind::Event,
            MentionRef::Timex(_) => RelatedKind::Timex,
        };
        let Ok(reltype) = lex.signal_to_reltype(&tok.lower, kind) else { continue };

        // Nearest preceding event in this clause, preferring a verb over a
        // noun ("became the president after ..." targets "became").
        let preceding: Vec<usize> =
            (0..events.len()).filter(|&k| events[k].span.end <= i && events[k].span.start >= clause_start).collect();
        let target = preceding
            .iter()
            .rev()
            .find(|&&k| events[k].kind == EventKind::Predicative)
            .or(preceding.last())
            .copied();
        let Some(target) = target else { continue };
        if related == MentionRef::Event(target) {
            continue;
        }
        signals.push(SignalMention {
            span: i..i + 1,
            lexeme: tok.lower.clone(),
        });
        tlinks.push(TLink {
            reltype,
            target,
            related_to: related,
            signal: signals.len() - 1,
        });
        clause_start = i + 1;
    }

    AnnotationDoc {
        question: question.to_string(),
        tokens,
        events,
        timexes,
        ordinals,
        signals,
        tlinks,
    }
}

impl AnnotationDoc {
    pub fn mention_text(&self, m: MentionRef) -> &str {
        match m {
            MentionRef::Event(i) => &self.events[i].text,
            MentionRef::Timex(i) => &self.timexes[i].text,
        }
    }

    pub fn mention_span(&self, m: MentionRef) -> Range<usize> {
        match m {
            MentionRef::Event(i) => self.events[i].span.clone(),
            MentionRef::Timex(i) => self.timexes[i].span.clone(),
        }
    }

    /// Token index containing the byte offset, if any.
    pub fn token_at(&self, byte: usize) -> Option<usize> {
        self.tokens.iter().position(|t| t.start <= byte && byte < t.end)
    }

    /// Token indices at which clauses begin: 0 and each signal position.
    pub fn clause_starts(&self) -> Vec<usize> {
        let mut starts = vec![0];
        starts.extend(self.signals.iter().map(|s| s.span.start));
        starts
    }

    pub fn clause_of(&self, token: usize) -> usize {
        self.clause_starts().iter().rposition(|&s| s <= token).unwrap_or(0)
    }

    /// TimeML-style inline markup followed by one TLINK element per link.
    pub fn to_timeml(&self) -> String {
        let mut opens: Vec<(usize, usize, String, &'static str)> = Vec::new();
        for (i, e) in self.events.iter().enumerate() {
            let class = match e.kind {
                EventKind::Nominal => "NOMINAL",
                EventKind::Predicative => "PREDICATIVE",
            };
            opens.push((e.span.start, e.span.end, format!("<EVENT eid=\"e{}\" class=\"{class}\">", i + 1), "</EVENT>"));
        }
        for (i, t) in self.timexes.iter().enumerate() {
            opens.push((
                t.span.start,
                t.span.end,
                format!("<TIMEX3 tid=\"t{}\" value=\"{}\">", i + 1, t.value.canonical()),
                "</TIMEX3>",
            ));
        }
        for (i, o) in self.ordinals.iter().enumerate() {
            let dir = match o.direction {
                OrdinalDirection::FromFirst => "FROM_FIRST",
                OrdinalDirection::FromLast => "FROM_LAST",
            };
            opens.push((o.span.start, o.span.end, format!("<ORDINAL oid=\"o{}\" rank=\"{}\" direction=\"{dir}\">", i + 1, o.rank), "</ORDINAL>"));
        }
        for (i, s) in self.signals.iter().enumerate() {
            opens.push((s.span.start, s.span.end, format!("<SIGNAL sid=\"s{}\">", i + 1), "</SIGNAL>"));
        }
        opens.sort_by_key(|o| o.0);

        let mut out = String::new();
        let mut cursor = 0;
        for (start, end, open, close) in opens {
            let (from, to) = (self.tokens[start].start, self.tokens[end - 1].end);
            out.push_str(&self.question[cursor..from]);
            out.push_str(&open);
            out.push_str(&self.question[from..to]);
            out.push_str(close);
            cursor = to;
        }
        out.push_str(&self.question[cursor..]);
        for link in &self.tlinks {
            let related = match link.related_to {
                MentionRef::Event(i) => format!("e{}", i + 1),
                MentionRef::Timex(i) => format!("t{}", i + 1),
            };
            let _ = write!(
                out,
                "\n<TLINK reltype=\"{}\" target=\"e{}\" relatedTo=\"{related}\" signal=\"s{}\" />",
                link.reltype,
                link.target + 1,
                link.signal + 1
            );
        }
        out
    }
}
