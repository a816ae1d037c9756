//! Temporal question answering over a knowledge graph.
//!
//! Questions are annotated with events, time expressions, ordinals and
//! signals. Temporal constraints evoke interpretation structures, which are
//! grounded into executable query graphs and ranked.

pub mod annotate;
pub mod eval;
pub mod evoke;
pub mod ground;
pub mod kg;
pub mod query;
pub mod rank;
pub mod text;
pub mod time;
