//! Alias-dictionary entity linking.

use std::collections::HashMap;
use std::ops::Range;

use super::{EntityId, KnowledgeGraph};
use crate::text::{normalized, words};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityMention {
    /// Byte span in the question.
    pub span: Range<usize>,
    pub text: String,
    pub entity: EntityId,
}

/// Greedy, case-insensitive longest match of entity labels and aliases over
/// word sequences, scanning left to right. Spans never overlap. When two
/// entities share an alias the one declared first wins.
pub fn link_entities(g: &KnowledgeGraph, question: &str) -> Vec<EntityMention> {
    let mut table: HashMap<Vec<String>, &EntityId> = HashMap::new();
    let mut longest = 0;
    for e in g.entities() {
        for alias in std::iter::once(&e.label).chain(&e.aliases) {
            let key = normalized(alias);
            if key.is_empty() {
                continue;
            }
            longest = longest.max(key.len());
            table.entry(key).or_insert(&e.id);
        }
    }

    let tokens = words(question);
    let lowered: Vec<String> = tokens.iter().map(|w| w.text.to_lowercase()).collect();
    let mut mentions = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let max_len = longest.min(tokens.len() - i);
        let hit = (1..=max_len).rev().find_map(|len| table.get(&lowered[i..i + len]).map(|e| (len, *e)));
        match hit {
            Some((len, entity)) => {
                let span = tokens[i].start..tokens[i + len - 1].end;
                mentions.push(EntityMention {
                    text: question[span.clone()].to_string(),
                    span,
                    entity: entity.clone(),
                });
                i += len;
            }
            None => i += 1,
        }
    }
    mentions
}
