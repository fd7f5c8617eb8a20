//! Normalization of nested `PER` annotations into a flat alias layer.
//!
//! Each nested mention is trimmed (leading determiners dropped, content cut
//! at the first comma), kept only if it still looks like a proper name, and
//! overlaps among the survivors are resolved in favour of outer mentions.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use super::{CorpusError, Mention, Span, Token};

pub const MAX_NESTING_LAYERS: u8 = 4;

const DEFAULT_DETERMINERS: &[&str] = &["the", "a", "an", "this", "that", "these", "those"];
const DEFAULT_STOPWORDS: &[&str] = &["of", "the", "de", "la", "van", "von", "du", "and"];

/// Determiners stripped by trimming and stopwords tolerated by the
/// capitalization filter. Both are matched case-insensitively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordLists {
    pub determiners: BTreeSet<String>,
    pub stopwords: BTreeSet<String>,
}

impl Default for WordLists {
    fn default() -> Self {
        WordLists {
            determiners: DEFAULT_DETERMINERS.iter().map(|s| s.to_string()).collect(),
            stopwords: DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl WordLists {
    /// Reads a word list: one word per line, `#` comments and blank lines ignored.
    pub fn read_list(path: impl AsRef<Path>) -> Result<BTreeSet<String>, CorpusError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(parse_word_list(&text))
    }

    pub fn is_determiner(&self, word: &str) -> bool {
        contains_ci(&self.determiners, word)
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        contains_ci(&self.stopwords, word)
    }
}

fn parse_word_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.to_lowercase())
        .collect()
}

fn contains_ci(set: &BTreeSet<String>, word: &str) -> bool {
    set.contains(&word.to_lowercase())
}

/// A mention from one layer of a nested annotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct NestedMention {
    pub span: Span,
    pub layer: u8,
}

impl NestedMention {
    pub fn new(span: Span, layer: u8) -> Result<Self, CorpusError> {
        if layer >= MAX_NESTING_LAYERS {
            return Err(CorpusError::Invariant(format!(
                "nesting layer {layer} for {span} exceeds {}",
                MAX_NESTING_LAYERS - 1
            )));
        }
        Ok(NestedMention { span, layer })
    }
}

/// Offsets `[from, to)` of the trimmed sub-sequence inside `tokens`.
fn trim_offsets<S: AsRef<str>>(tokens: &[S], determiners: &BTreeSet<String>) -> (usize, usize) {
    let from = tokens
        .iter()
        .take_while(|t| contains_ci(determiners, t.as_ref()))
        .count();
    let to = tokens[from..]
        .iter()
        .position(|t| t.as_ref() == ",")
        .map_or(tokens.len(), |p| from + p);
    (from, to)
}

/// Drops leading determiners, then everything from the first comma on.
/// The result may be empty.
pub fn trim_mention<S: AsRef<str>>(tokens: &[S], determiners: &BTreeSet<String>) -> Vec<String> {
    let (from, to) = trim_offsets(tokens, determiners);
    tokens[from..to].iter().map(|t| t.as_ref().to_string()).collect()
}

/// [`trim_mention`] expressed on a span of `tokens`; `None` when nothing remains.
pub fn trim_span(span: Span, tokens: &[Token], determiners: &BTreeSet<String>) -> Option<Span> {
    let words: Vec<&str> = tokens[span.start..span.end]
        .iter()
        .map(|t| t.text.as_str())
        .collect();
    let (from, to) = trim_offsets(&words, determiners);
    (from < to).then(|| Span::new(span.start + from, span.start + to))
}

fn is_capitalized(word: &str) -> bool {
    word.chars().next().is_some_and(char::is_uppercase)
}

/// True iff every token is capitalized or a stopword, and at least one
/// token is a capitalized non-stopword.
pub fn is_alias_form<S: AsRef<str>>(tokens: &[S], stopwords: &BTreeSet<String>) -> bool {
    let mut has_content = false;
    for t in tokens {
        let t = t.as_ref();
        let stop = contains_ci(stopwords, t);
        if !stop && !is_capitalized(t) {
            return false;
        }
        has_content |= !stop && is_capitalized(t);
    }
    has_content
}

/// Flattens nested mentions into non-overlapping alias mentions sorted by span.
///
/// Survivors contained in another survivor are dropped first. Remaining
/// partial overlaps keep the mention with the smaller start, or the longer
/// one on equal starts.
pub fn flatten_nested_ner(
    nested: &[NestedMention],
    tokens: &[Token],
    lists: &WordLists,
) -> Vec<Mention> {
    let mut survivors: Vec<Span> = nested
        .iter()
        .filter(|m| m.span.start < m.span.end && m.span.end <= tokens.len())
        .filter_map(|m| trim_span(m.span, tokens, &lists.determiners))
        .filter(|span| {
            let words: Vec<&str> = tokens[span.start..span.end]
                .iter()
                .map(|t| t.text.as_str())
                .collect();
            is_alias_form(&words, &lists.stopwords)
        })
        .collect();
    survivors.sort_by(|a, b| a.start.cmp(&b.start).then(b.end.cmp(&a.end)));
    survivors.dedup();

    let outermost: Vec<Span> = survivors
        .iter()
        .filter(|s| !survivors.iter().any(|o| o != *s && o.contains(s)))
        .copied()
        .collect();

    let mut kept: Vec<Span> = Vec::with_capacity(outermost.len());
    for span in outermost {
        if kept.last().is_none_or(|k| !k.overlaps(&span)) {
            kept.push(span);
        }
    }
    kept.into_iter()
        .map(|s| Mention::alias(s.start, s.end))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tokens(s: &str) -> Vec<Token> {
        s.split_whitespace()
            .enumerate()
            .map(|(index, t)| Token { text: t.to_string(), index })
            .collect()
    }

    fn lists() -> WordLists {
        WordLists::default()
    }

    #[test]
    fn trims_leading_determiner() {
        assert_eq!(
            trim_mention(&["the", "Lord", "High", "Chancellor"], &lists().determiners),
            vec!["Lord", "High", "Chancellor"]
        );
    }

    #[test]
    fn cuts_at_first_comma() {
        assert_eq!(
            trim_mention(&["Elric", ",", "prince", "of", "ruins"], &lists().determiners),
            vec!["Elric"]
        );
    }

    #[test]
    fn determiner_only_trims_to_nothing() {
        assert!(trim_mention(&["the"], &lists().determiners).is_empty());
        assert!(trim_mention(&["The", ",", "Duke"], &lists().determiners).is_empty());
    }

    #[test]
    fn alias_form_examples() {
        let stop = &lists().stopwords;
        assert!(is_alias_form(&["Lord", "High", "Chancellor"], stop));
        assert!(!is_alias_form(&["an", "honourable", "man"], stop));
        assert!(!is_alias_form(&["of", "the"], stop));
        assert!(is_alias_form(&["One-Eye"], stop));
        assert!(is_alias_form(&["Duke", "of", "Wellington"], stop));
        assert!(is_alias_form(&["Émile"], stop));
        assert!(!is_alias_form::<&str>(&[], stop));
    }

    #[test]
    fn keeps_outermost_of_nested_pair() {
        let toks = tokens("Then the Lord High Chancellor spoke");
        let nested = [
            NestedMention::new(Span::new(1, 5), 0).unwrap(),
            NestedMention::new(Span::new(2, 3), 1).unwrap(),
        ];
        let flat = flatten_nested_ner(&nested, &toks, &lists());
        assert_eq!(flat, vec![Mention::alias(2, 5)]);
    }

    #[test]
    fn flat_name_is_a_fixed_point() {
        let toks = tokens("Goblin laughed");
        let nested = [NestedMention::new(Span::new(0, 1), 0).unwrap()];
        assert_eq!(flatten_nested_ner(&nested, &toks, &lists()), vec![Mention::alias(0, 1)]);
    }

    #[test]
    fn partial_overlap_keeps_smaller_start() {
        // "Anna Karenina Oblonsky" annotated as two crossing names
        let toks = tokens("Anna Karenina Oblonsky arrived");
        let nested = [
            NestedMention::new(Span::new(1, 3), 0).unwrap(),
            NestedMention::new(Span::new(0, 2), 1).unwrap(),
        ];
        assert_eq!(flatten_nested_ner(&nested, &toks, &lists()), vec![Mention::alias(0, 2)]);
    }

    #[test]
    fn equal_start_prefers_longer() {
        let toks = tokens("Anna Karenina arrived");
        let nested = [
            NestedMention::new(Span::new(0, 1), 0).unwrap(),
            NestedMention::new(Span::new(0, 2), 1).unwrap(),
        ];
        assert_eq!(flatten_nested_ner(&nested, &toks, &lists()), vec![Mention::alias(0, 2)]);
    }

    #[test]
    fn generic_mentions_are_discarded() {
        let toks = tokens("an honourable man came");
        let nested = [NestedMention::new(Span::new(0, 3), 0).unwrap()];
        assert!(flatten_nested_ner(&nested, &toks, &lists()).is_empty());
    }

    #[test]
    fn layer_bound_is_enforced() {
        assert!(NestedMention::new(Span::new(0, 1), 4).is_err());
        assert!(NestedMention::new(Span::new(0, 1), 3).is_ok());
    }

    #[test]
    fn word_list_file_parsing() {
        let set = parse_word_list("# dets\nThe\n\n  a \n");
        assert_eq!(set, ["a", "the"].iter().map(|s| s.to_string()).collect());
    }

    const VOCAB: &[&str] = &["the", "Lord", "of", ",", "man", "Emma", "a", "Smith", "he"];

    fn nested_input() -> impl Strategy<Value = (Vec<Token>, Vec<NestedMention>)> {
        prop::collection::vec(0..VOCAB.len(), 1..25).prop_flat_map(|words| {
            let n = words.len();
            let toks: Vec<Token> = words
                .iter()
                .enumerate()
                .map(|(index, &w)| Token { text: VOCAB[w].to_string(), index })
                .collect();
            let mention = (0..n, 1..5usize, 0..MAX_NESTING_LAYERS).prop_map(move |(s, l, layer)| {
                NestedMention { span: Span::new(s, (s + l).min(n)), layer }
            });
            (Just(toks), prop::collection::vec(mention, 0..12))
        })
    }

    proptest! {
        #[test]
        fn flattened_output_never_overlaps((toks, nested) in nested_input()) {
            let flat = flatten_nested_ner(&nested, &toks, &lists());
            for pair in flat.windows(2) {
                prop_assert!(pair[0].span.end <= pair[1].span.start);
            }
        }

        #[test]
        fn flattening_is_idempotent((toks, nested) in nested_input()) {
            let flat = flatten_nested_ner(&nested, &toks, &lists());
            let again: Vec<NestedMention> =
                flat.iter().map(|m| NestedMention { span: m.span, layer: 0 }).collect();
            prop_assert_eq!(flatten_nested_ner(&again, &toks, &lists()), flat);
        }

        #[test]
        fn trimming_never_grows(words in prop::collection::vec(0..VOCAB.len(), 1..10)) {
            let words: Vec<&str> = words.iter().map(|&w| VOCAB[w]).collect();
            let trimmed = trim_mention(&words, &lists().determiners);
            prop_assert!(trimmed.len() <= words.len());
            if is_alias_form(&trimmed, &lists().stopwords) {
                prop_assert!(!trimmed.is_empty());
            }
        }
    }
}
