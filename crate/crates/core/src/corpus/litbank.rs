//! Conversion from Litbank-style layered entity files.
//!
//! Assumed entity layout: one token per line, tab-separated,
//! `token<TAB>layer0<TAB>layer1<TAB>layer2<TAB>layer3`, each layer a BIO tag
//! such as `B-PER`, `I-PER` or `O`. Missing trailing layers read as `O`;
//! blank lines (sentence breaks) are skipped and tokens are numbered across
//! the whole document. Only `PER` mentions are kept.
//!
//! The optional coreference file holds one mention per line:
//! `chain_id<TAB>start<TAB>end`, token offsets with `end` exclusive.
//! A coreference mention whose trimmed span equals a flattened alias span is
//! re-anchored on that span, so that alias mentions are shared by both layers.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use super::flatten::{flatten_nested_ner, trim_span, NestedMention, WordLists, MAX_NESTING_LAYERS};
use super::{CorpusError, Document, Span, Token};

/// Tokens and nested `PER` mentions read from an entity file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestedEntities {
    pub tokens: Vec<String>,
    pub mentions: Vec<NestedMention>,
}

fn line_error(line: usize, message: impl Into<String>) -> CorpusError {
    CorpusError::Parse {
        line,
        column: 1,
        message: message.into(),
    }
}

pub fn parse_entities(text: &str) -> Result<NestedEntities, CorpusError> {
    let mut tokens = Vec::new();
    let mut mentions = Vec::new();
    let mut open: [Option<usize>; MAX_NESTING_LAYERS as usize] = [None; MAX_NESTING_LAYERS as usize];

    let close = |open: &mut [Option<usize>], layer: usize, end: usize, out: &mut Vec<NestedMention>| {
        if let Some(start) = open[layer].take() {
            out.push(NestedMention {
                span: Span::new(start, end),
                layer: layer as u8,
            });
        }
    };

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split('\t');
        let token = cols.next().unwrap_or_default();
        if token.is_empty() {
            return Err(line_error(lineno, "empty token"));
        }
        let tags: Vec<&str> = cols.collect();
        if tags.len() > MAX_NESTING_LAYERS as usize {
            return Err(line_error(
                lineno,
                format!("{} tag columns, at most {MAX_NESTING_LAYERS} expected", tags.len()),
            ));
        }
        let index = tokens.len();
        for layer in 0..MAX_NESTING_LAYERS as usize {
            let tag = tags.get(layer).map(|t| t.trim()).unwrap_or("O");
            let (prefix, label) = match tag.split_once('-') {
                Some((p, l)) => (p, l),
                None if tag == "O" || tag.is_empty() => ("O", ""),
                None => return Err(line_error(lineno, format!("malformed tag {tag:?}"))),
            };
            match (prefix, label) {
                ("B", "PER") => {
                    close(&mut open, layer, index, &mut mentions);
                    open[layer] = Some(index);
                }
                ("I", "PER") => {
                    if open[layer].is_none() {
                        open[layer] = Some(index);
                    }
                }
                ("O", _) | ("B", _) | ("I", _) => close(&mut open, layer, index, &mut mentions),
                _ => return Err(line_error(lineno, format!("malformed tag {tag:?}"))),
            }
        }
        tokens.push(token.to_string());
    }
    for layer in 0..MAX_NESTING_LAYERS as usize {
        close(&mut open, layer, tokens.len(), &mut mentions);
    }
    mentions.sort();
    Ok(NestedEntities { tokens, mentions })
}

/// Parses `chain_id<TAB>start<TAB>end` lines into chains ordered by id.
pub fn parse_coref(text: &str) -> Result<Vec<Vec<Span>>, CorpusError> {
    let mut chains: BTreeMap<String, Vec<Span>> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(line_error(lineno, format!("expected 3 columns, found {}", cols.len())));
        }
        let parse = |s: &str, field: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| line_error(lineno, format!("bad {field}: {e}")))
        };
        let span = Span::new(parse(cols[1], "start")?, parse(cols[2], "end")?);
        chains.entry(cols[0].to_string()).or_default().push(span);
    }
    Ok(chains.into_values().collect())
}

/// Builds a canonical document from entity (and optional coreference) files.
pub fn convert(
    id: &str,
    entities: &str,
    coref: Option<&str>,
    lists: &WordLists,
) -> Result<Document, CorpusError> {
    let nested = parse_entities(entities)?;
    let tokens: Vec<Token> = nested
        .tokens
        .iter()
        .enumerate()
        .map(|(index, text)| Token { text: text.clone(), index })
        .collect();
    let flat = flatten_nested_ner(&nested.mentions, &tokens, lists);
    let ner: Vec<Span> = flat.iter().map(|m| m.span).collect();
    let ner_set: BTreeSet<Span> = ner.iter().copied().collect();

    let mut chains = Vec::new();
    if let Some(text) = coref {
        let mut seen = BTreeSet::new();
        for chain in parse_coref(text)? {
            let mut out = Vec::new();
            for span in chain {
                if span.start >= span.end || span.end > tokens.len() {
                    return Err(CorpusError::Invariant(format!(
                        "coref span {span} is out of bounds for {} tokens",
                        tokens.len()
                    )));
                }
                let anchored = trim_span(span, &tokens, &lists.determiners)
                    .filter(|t| ner_set.contains(t))
                    .unwrap_or(span);
                if seen.insert(anchored) {
                    out.push(anchored);
                }
            }
            if !out.is_empty() {
                chains.push(out);
            }
        }
    }
    Document::new(id, nested.tokens, ner, chains)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ENTITIES: &str = "Then\tO\tO\tO\tO\n\
the\tB-PER\tO\tO\tO\n\
Lord\tI-PER\tB-PER\tO\tO\n\
High\tI-PER\tO\tO\tO\n\
Chancellor\tI-PER\tO\tO\tO\n\
spoke\tO\tO\tO\tO\n\
.\tO\tO\tO\tO\n\
\n\
an\tB-PER\n\
honourable\tI-PER\n\
man\tI-PER\n\
listened\tO\n\
to\tO\n\
him\tB-PER\n\
in\tO\n\
London\tB-GPE\n";

    #[test]
    fn reads_layers_and_labels() {
        let nested = parse_entities(ENTITIES).unwrap();
        assert_eq!(nested.tokens.len(), 15);
        let spans: Vec<(Span, u8)> = nested.mentions.iter().map(|m| (m.span, m.layer)).collect();
        assert_eq!(
            spans,
            vec![
                (Span::new(1, 5), 0),
                (Span::new(2, 3), 1),
                (Span::new(7, 10), 0),
                (Span::new(12, 13), 0),
            ]
        );
    }

    #[test]
    fn converts_and_anchors_coref() {
        let coref = "0\t1\t5\n0\t12\t13\n1\t7\t10\n";
        let doc = convert("toy", ENTITIES, Some(coref), &WordLists::default()).unwrap();
        assert_eq!(doc.ner_spans(), vec![Span::new(2, 5)]);
        assert_eq!(
            doc.coref_spans(),
            vec![vec![Span::new(2, 5), Span::new(12, 13)], vec![Span::new(7, 10)]]
        );
        assert!(doc.coref()[0].mentions()[0].is_alias());
        assert!(!doc.coref()[1].mentions()[0].is_alias());
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let err = parse_entities("a\tO\nb\tX-\tO\tO\tO\tO\n").unwrap_err();
        assert!(matches!(err, CorpusError::Parse { line: 2, .. }));
        let err = parse_coref("0\t1\n").unwrap_err();
        assert!(matches!(err, CorpusError::Parse { line: 1, .. }));
    }
}
