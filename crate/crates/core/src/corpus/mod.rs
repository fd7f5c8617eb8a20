//! Document model: pre-tokenized text with a flat NER layer of `PER`
//! alias mentions and a layer of coreference chains.
//!
//! The canonical on-disk form is one JSON object per document:
//!
//! ```json
//! {
//!   "id": "doc",
//!   "tokens": ["One-Eye", "looked", "at", "Goblin", "."],
//!   "ner": [{"start": 0, "end": 1}, {"start": 3, "end": 4}],
//!   "coref": [[{"start": 0, "end": 1}], [{"start": 3, "end": 4}]]
//! }
//! ```
//!
//! Indices are token offsets, `end` exclusive. Coreference mentions do not
//! carry their kind on disk: a coreference mention is an alias mention iff
//! its span is also a NER mention.

mod flatten;
mod io;
pub mod litbank;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use flatten::{
    flatten_nested_ner, is_alias_form, trim_mention, trim_span, NestedMention, WordLists,
    MAX_NESTING_LAYERS,
};
pub use io::{read_document, write_document, DocumentFile};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid document: {0}")]
    Invariant(String),
}

/// A single pre-tokenized token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub index: usize,
}

/// Half-open token range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// True if `other` lies inside `self` (equal spans contain each other).
    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MentionKind {
    Alias,
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mention {
    pub span: Span,
    pub kind: MentionKind,
}

impl Mention {
    pub fn alias(start: usize, end: usize) -> Self {
        Mention {
            span: Span::new(start, end),
            kind: MentionKind::Alias,
        }
    }

    pub fn generic(start: usize, end: usize) -> Self {
        Mention {
            span: Span::new(start, end),
            kind: MentionKind::Generic,
        }
    }

    pub fn is_alias(&self) -> bool {
        self.kind == MentionKind::Alias
    }
}

/// Mentions referring to one entity, in document order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorefChain {
    mentions: Vec<Mention>,
}

impl CorefChain {
    /// Builds a chain, sorting mentions by span. Returns `None` when empty.
    pub fn new(mut mentions: Vec<Mention>) -> Option<Self> {
        if mentions.is_empty() {
            return None;
        }
        mentions.sort_by_key(|m| m.span);
        Some(CorefChain { mentions })
    }

    pub fn mentions(&self) -> &[Mention] {
        &self.mentions
    }

    pub fn spans(&self) -> impl Iterator<Item = Span> + '_ {
        self.mentions.iter().map(|m| m.span)
    }

    pub fn len(&self) -> usize {
        self.mentions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mentions.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.mentions.len() == 1
    }
}

/// A validated document. Fields are private so every `Document` in
/// circulation satisfies the flat-NER and bounds invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    id: String,
    tokens: Vec<Token>,
    ner: Vec<Mention>,
    coref: Vec<CorefChain>,
}

impl Document {
    /// Validates and assembles a document. Coreference mention kinds are
    /// recomputed from `ner`; chain order is preserved.
    pub fn new(
        id: impl Into<String>,
        tokens: Vec<String>,
        ner: Vec<Span>,
        coref: Vec<Vec<Span>>,
    ) -> Result<Self, CorpusError> {
        let id = id.into();
        let n = tokens.len();
        let tokens: Vec<Token> = tokens
            .into_iter()
            .enumerate()
            .map(|(index, text)| Token { text, index })
            .collect();
        if let Some(t) = tokens.iter().find(|t| t.text.is_empty()) {
            return Err(CorpusError::Invariant(format!(
                "token {} is empty",
                t.index
            )));
        }

        let check_bounds = |span: &Span, layer: &str| -> Result<(), CorpusError> {
            if span.start >= span.end || span.end > n {
                Err(CorpusError::Invariant(format!(
                    "{layer} span {span} is out of bounds for a document of {n} tokens"
                )))
            } else {
                Ok(())
            }
        };

        let mut ner = ner;
        ner.sort();
        for span in &ner {
            check_bounds(span, "ner")?;
        }
        for pair in ner.windows(2) {
            if pair[0] == pair[1] {
                return Err(CorpusError::Invariant(format!(
                    "duplicate ner span {}",
                    pair[0]
                )));
            }
            if pair[0].overlaps(&pair[1]) {
                return Err(CorpusError::Invariant(format!(
                    "ner spans {} and {} overlap",
                    pair[0], pair[1]
                )));
            }
        }

        let ner_set: BTreeSet<Span> = ner.iter().copied().collect();
        let mut seen = BTreeSet::new();
        let mut chains = Vec::with_capacity(coref.len());
        for (ci, chain) in coref.into_iter().enumerate() {
            let mut mentions = Vec::with_capacity(chain.len());
            for span in chain {
                check_bounds(&span, "coref")?;
                if !seen.insert(span) {
                    return Err(CorpusError::Invariant(format!(
                        "coref span {span} appears more than once (chain {ci})"
                    )));
                }
                let kind = if ner_set.contains(&span) {
                    MentionKind::Alias
                } else {
                    MentionKind::Generic
                };
                mentions.push(Mention { span, kind });
            }
            let chain = CorefChain::new(mentions)
                .ok_or_else(|| CorpusError::Invariant(format!("coref chain {ci} is empty")))?;
            chains.push(chain);
        }

        Ok(Document {
            id,
            tokens,
            ner: ner.into_iter().map(|s| Mention { span: s, kind: MentionKind::Alias }).collect(),
            coref: chains,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn token_texts(&self) -> impl Iterator<Item = &str> + '_ {
        self.tokens.iter().map(|t| t.text.as_str())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn ner(&self) -> &[Mention] {
        &self.ner
    }

    pub fn coref(&self) -> &[CorefChain] {
        &self.coref
    }

    pub fn ner_spans(&self) -> Vec<Span> {
        self.ner.iter().map(|m| m.span).collect()
    }

    pub fn coref_spans(&self) -> Vec<Vec<Span>> {
        self.coref.iter().map(|c| c.spans().collect()).collect()
    }

    /// The surface form of a span: its tokens joined by single spaces.
    pub fn form(&self, span: Span) -> String {
        self.tokens[span.start..span.end]
            .iter()
            .map(|t| t.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn span_tokens(&self, span: Span) -> Vec<&str> {
        self.tokens[span.start..span.end]
            .iter()
            .map(|t| t.text.as_str())
            .collect()
    }

    /// Rebuilds the document with new annotation layers, re-validating.
    pub fn with_annotations(
        &self,
        ner: Vec<Span>,
        coref: Vec<Vec<Span>>,
    ) -> Result<Document, CorpusError> {
        Document::new(
            self.id.clone(),
            self.tokens.iter().map(|t| t.text.clone()).collect(),
            ner,
            coref,
        )
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Document {
        self.id = id.into();
        self
    }
}
