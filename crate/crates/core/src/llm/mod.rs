//! Readers for the two answer formats of LLM-based extraction: text with
//! tagged character mentions, and a GraphML-like network.

mod graph;
mod tagged;

pub use graph::{parse_llm_graph, LenientGraphParse};
pub use tagged::{parse_tagged_text, TaggedTextParse};

use crate::network::NetworkError;

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("no node could be recovered from the answer")]
    NoNodes,
    #[error(transparent)]
    Network(#[from] NetworkError),
}
