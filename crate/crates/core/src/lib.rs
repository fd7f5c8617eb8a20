//! Character network extraction from annotated literary text.
//!
//! The pipeline reads a pre-tokenized [`corpus::Document`] carrying a flat
//! NER layer and coreference chains, unifies mentions into characters
//! ([`unify`]), counts co-occurrences inside a token window ([`network`]),
//! and compares predicted networks with gold ones ([`measures`]).
//! [`perturb`] degrades annotations step by step to measure how NER and
//! coreference errors propagate to the extracted network, and [`llm`]
//! reads the two output formats used for LLM-based extraction.

pub mod corpus;
pub mod llm;
pub mod measures;
pub mod network;
pub mod perturb;
pub mod unify;
