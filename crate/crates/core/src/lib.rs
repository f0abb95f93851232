//! Retrieval-augmented Text-to-SQL prompting.

pub mod approx;
pub mod bm25;
pub mod eval;
mod http;
pub mod schema;
pub mod split;
pub mod sql;
pub mod text;
pub mod values;

pub use http::HttpError;
pub mod example_store;
pub mod llm;
pub mod prompt;
