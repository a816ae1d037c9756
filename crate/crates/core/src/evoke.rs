//! Temporal constraints read off an annotation, and the interpretation
//! structures each constraint evokes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::annotate::{AnnotationDoc, EventKind, MentionRef};
use crate::time::{normalize_reltype, ComparisonPredicate, TimeMlRelType};

/// Mention indices refer to the [`AnnotationDoc`] the constraint came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "variant", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TemporalConstraint {
    /// VC-1.
    HasValueTime { event: usize, timex: usize },
    /// VC-2.
    HasValueOrdinal { event: usize, ordinal: usize },
    /// RC-1.
    RelationEt { reltype: TimeMlRelType, event: usize, timex: usize },
    /// RC-2.
    RelationEe { reltype: TimeMlRelType, e1: usize, e2: usize },
    WhenQuery { event: usize },
}

impl TemporalConstraint {
    pub fn kind(&self) -> &'static str {
        match self {
            TemporalConstraint::HasValueTime { .. } => "VC-1",
            TemporalConstraint::HasValueOrdinal { .. } => "VC-2",
            TemporalConstraint::RelationEt { .. } => "RC-1",
            TemporalConstraint::RelationEe { .. } => "RC-2",
            TemporalConstraint::WhenQuery { .. } => "WHEN",
        }
    }

    /// The question event constrained by this constraint.
    pub fn event(&self) -> usize {
        match *self {
            TemporalConstraint::HasValueTime { event, .. }
            | TemporalConstraint::HasValueOrdinal { event, .. }
            | TemporalConstraint::RelationEt { event, .. }
            | TemporalConstraint::WhenQuery { event } => event,
            TemporalConstraint::RelationEe { e1, .. } => e1,
        }
    }

    /// Rendering such as `Relation(SIMULTANEOUS, "standing", "shot")`.
    pub fn notation(&self, doc: &AnnotationDoc) -> String {
        let ev = |i: usize| &doc.events[i].text;
        match *self {
            TemporalConstraint::HasValueTime { event, timex } => {
                format!("HasValue(\"{}\", \"{}\")", ev(event), doc.timexes[timex].text)
            }
            TemporalConstraint::HasValueOrdinal { event, ordinal } => {
                format!("HasValue(\"{}\", \"{}\")", ev(event), doc.ordinals[ordinal].text)
            }
            TemporalConstraint::RelationEt { reltype, event, timex } => {
                format!("Relation({reltype}, \"{}\", \"{}\")", ev(event), doc.timexes[timex].text)
            }
            TemporalConstraint::RelationEe { reltype, e1, e2 } => {
                format!("Relation({reltype}, \"{}\", \"{}\")", ev(e1), ev(e2))
            }
            TemporalConstraint::WhenQuery { event } => format!("HasValue(\"{}\", T?)", ev(event)),
        }
    }

    /// Variant name with arguments, e.g. `HAS_VALUE_ORDINAL(marry, first)`.
    pub fn debug_line(&self, doc: &AnnotationDoc) -> String {
        let ev = |i: usize| &doc.events[i].text;
        match *self {
            TemporalConstraint::HasValueTime { event, timex } => {
                format!("HAS_VALUE_TIME({}, {})", ev(event), doc.timexes[timex].text)
            }
            TemporalConstraint::HasValueOrdinal { event, ordinal } => {
                format!("HAS_VALUE_ORDINAL({}, {})", ev(event), doc.ordinals[ordinal].text)
            }
            TemporalConstraint::RelationEt { reltype, event, timex } => {
                format!("RELATION_ET({reltype}, {}, {})", ev(event), doc.timexes[timex].text)
            }
            TemporalConstraint::RelationEe { reltype, e1, e2 } => format!("RELATION_EE({reltype}, {}, {})", ev(e1), ev(e2)),
            TemporalConstraint::WhenQuery { event } => format!("WHEN_QUERY({})", ev(event)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Structure {
    #[serde(rename = "IS1_COMPARISON")]
    Is1Comparison,
    #[serde(rename = "IS2_ORDERING")]
    Is2Ordering,
    #[serde(rename = "IS3_DIRECT")]
    Is3Direct,
    #[serde(rename = "IS4_SAME_ENTITY")]
    Is4SameEntity,
    #[serde(rename = "IS5_PART_OF")]
    Is5PartOf,
    #[serde(rename = "IS6_SEQUENT")]
    Is6Sequent,
}

impl Structure {
    pub const ALL: [Structure; 6] = [
        Structure::Is1Comparison,
        Structure::Is2Ordering,
        Structure::Is3Direct,
        Structure::Is4SameEntity,
        Structure::Is5PartOf,
        Structure::Is6Sequent,
    ];

    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Structure> {
        Structure::ALL.get(usize::from(n).checked_sub(1)?).copied()
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IS-{}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct InterpretationTemplate {
    pub structure: Structure,
    pub constraint: TemporalConstraint,
    /// Set for IS-1 filters; `None` for the projection used by WHEN questions.
    pub predicate: Option<ComparisonPredicate>,
}

impl InterpretationTemplate {
    pub fn is_projection(&self) -> bool {
        self.structure == Structure::Is1Comparison && self.predicate.is_none()
    }
}

impl fmt::Display for InterpretationTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.structure, self.predicate) {
            (Structure::Is1Comparison, Some(p)) => write!(f, "IS-1({p})"),
            (Structure::Is1Comparison, None) => f.write_str("IS-1(PROJECT)"),
            (s, _) => write!(f, "{s}"),
        }
    }
}

fn is_when_question(doc: &AnnotationDoc) -> bool {
    let lower = |i: usize| doc.tokens.get(i).map(|t| t.lower.as_str());
    matches!((lower(0), lower(1)), (Some("when"), _) | (Some("what" | "which"), Some("year" | "date")))
}

fn token_gap(a: &std::ops::Range<usize>, b: &std::ops::Range<usize>) -> usize {
    if a.end <= b.start {
        b.start - a.end
    } else {
        a.start.saturating_sub(b.end)
    }
}

/// Constraints in order: WHEN query, TLink relations, VC-1, VC-2.
pub fn evoke_constraints(doc: &AnnotationDoc) -> Vec<TemporalConstraint> {
    let mut out = Vec::new();
    if is_when_question(doc) {
        let main = doc
            .events
            .iter()
            .position(|e| e.kind == EventKind::Predicative)
            .or((!doc.events.is_empty()).then_some(0));
        if let Some(event) = main {
            out.push(TemporalConstraint::WhenQuery { event });
        }
    }
    for link in &doc.tlinks {
        out.push(match link.related_to {
            MentionRef::Timex(timex) => TemporalConstraint::RelationEt { reltype: link.reltype, event: link.target, timex },
            MentionRef::Event(e2) => TemporalConstraint::RelationEe { reltype: link.reltype, e1: link.target, e2 },
        });
    }
    for (timex, t) in doc.timexes.iter().enumerate() {
        if doc.tlinks.iter().any(|l| l.related_to == MentionRef::Timex(timex)) {
            continue;
        }
        let nearest = doc
            .events
            .iter()
            .enumerate()
            .map(|(i, e)| (token_gap(&e.span, &t.span), i))
            .filter(|&(gap, _)| gap <= 1)
            .min();
        if let Some((_, event)) = nearest {
            out.push(TemporalConstraint::HasValueTime { event, timex });
        }
    }
    for (ordinal, o) in doc.ordinals.iter().enumerate() {
        let following_nominal = doc
            .events
            .iter()
            .position(|e| e.kind == EventKind::Nominal && e.span.start >= o.span.end && e.span.start - o.span.end <= 4);
        let nearest = || {
            doc.events
                .iter()
                .enumerate()
                .map(|(i, e)| (token_gap(&e.span, &o.span), e.span.start > o.span.start, i))
                .min()
                .map(|(.., i)| i)
        };
        if let Some(event) = following_nominal.or_else(nearest) {
            out.push(TemporalConstraint::HasValueOrdinal { event, ordinal });
        }
    }
    out
}

/// Candidate structures for one constraint; grounding decides which survive.
pub fn evoke_interpretations(c: &TemporalConstraint) -> Vec<InterpretationTemplate> {
    let t = |structure, predicate| InterpretationTemplate { structure, constraint: *c, predicate };
    match *c {
        TemporalConstraint::HasValueTime { .. } => {
            vec![t(Structure::Is1Comparison, Some(ComparisonPredicate::Equal)), t(Structure::Is3Direct, None)]
        }
        TemporalConstraint::HasValueOrdinal { .. } => vec![t(Structure::Is2Ordering, None), t(Structure::Is3Direct, None)],
        TemporalConstraint::WhenQuery { .. } => vec![t(Structure::Is1Comparison, None)],
        TemporalConstraint::RelationEt { reltype, .. } => {
            vec![t(Structure::Is1Comparison, Some(normalize_reltype(reltype)))]
        }
        TemporalConstraint::RelationEe { reltype, .. } => {
            let compare = t(Structure::Is1Comparison, Some(normalize_reltype(reltype)));
            let intrinsic = match reltype {
                TimeMlRelType::Simultaneous => Some(Structure::Is4SameEntity),
                TimeMlRelType::Includes | TimeMlRelType::IsIncluded | TimeMlRelType::During => Some(Structure::Is5PartOf),
                TimeMlRelType::Before | TimeMlRelType::After | TimeMlRelType::Ibefore | TimeMlRelType::Iafter => {
                    Some(Structure::Is6Sequent)
                }
                _ => None,
            };
            intrinsic.map(|s| t(s, None)).into_iter().chain([compare]).collect()
        }
    }
}
