//! Early prediction of negotiation outcomes from partial dialogues.
//!
//! The pipeline: parse and clean a corpus ([`corpus`]), truncate each
//! dialogue to a fraction of its messages, extract task-specific and
//! language features ([`features`]), fit regressors ([`models`]) and score
//! them ([`eval`]). [`bridge`] exports dialogues for an external text
//! encoder and combines its predictions; [`probing`] checks which
//! explainable features the encoder's representations capture.

pub mod bridge;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod fixtures;
pub mod models;
pub mod probing;

pub use error::{Error, Result};
