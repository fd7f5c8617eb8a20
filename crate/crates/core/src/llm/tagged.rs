//! Text answers where character mentions are wrapped in `[id] ... [/id]`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::corpus::{is_alias_form, CorpusError, Document, Span, WordLists};

/// How far ahead of the current position an output token may align.
const LOOKAHEAD: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaggedTextParse {
    /// Mentions in order of their opening tags.
    pub mentions: Vec<(String, Span)>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece<'a> {
    Open(&'a str),
    Close(&'a str),
    Word(&'a str),
}

fn tag_at(s: &str) -> Option<(Piece<'_>, usize)> {
    let rest = s.strip_prefix('[')?;
    let end = rest.find(']')?;
    let inner = &rest[..end];
    let (closing, id) = match inner.strip_prefix('/') {
        Some(id) => (true, id),
        None => (false, inner),
    };
    if id.is_empty() || id.contains(['[', '/']) {
        return None;
    }
    let piece = if closing { Piece::Close(id) } else { Piece::Open(id) };
    Some((piece, end + 2))
}

/// Splits on whitespace, then peels tags off the words they touch.
fn lex(raw: &str) -> Vec<Piece<'_>> {
    let mut out = Vec::new();
    for chunk in raw.split_whitespace() {
        let mut rest = chunk;
        let mut word_start = 0;
        let mut i = 0;
        while i < rest.len() {
            if rest.as_bytes()[i] == b'[' {
                if let Some((piece, len)) = tag_at(&rest[i..]) {
                    if word_start < i {
                        out.push(Piece::Word(&rest[word_start..i]));
                    }
                    out.push(piece);
                    rest = &rest[i + len..];
                    i = 0;
                    word_start = 0;
                    continue;
                }
            }
            i += rest[i..].chars().next().map_or(1, char::len_utf8);
        }
        if word_start < rest.len() {
            out.push(Piece::Word(&rest[word_start..]));
        }
    }
    out
}

struct Open<'a> {
    id: &'a str,
    first: Option<usize>,
    last: usize,
    order: usize,
}

/// Extracts tagged mentions and aligns them to `reference` tokens.
///
/// Output words are matched greedily, in order, against the reference;
/// words without a counterpart nearby are skipped. Unclosed tags are closed
/// at the end of input, and stray closing tags are ignored.
pub fn parse_tagged_text<S: AsRef<str>>(raw: &str, reference: &[S]) -> TaggedTextParse {
    let mut diagnostics = Vec::new();
    let mut stack: Vec<Open> = Vec::new();
    let mut found: Vec<(usize, String, Option<Span>)> = Vec::new();
    let mut next_ref = 0;
    let mut skipped = Vec::new();
    let mut order = 0;

    let finish = |o: Open, found: &mut Vec<(usize, String, Option<Span>)>| {
        let span = o.first.map(|f| Span::new(f, o.last + 1));
        found.push((o.order, o.id.to_string(), span));
    };

    for piece in lex(raw) {
        match piece {
            Piece::Open(id) => {
                stack.push(Open { id, first: None, last: 0, order });
                order += 1;
            }
            Piece::Close(id) => match stack.iter().rposition(|o| o.id == id) {
                Some(pos) => {
                    if pos + 1 != stack.len() {
                        diagnostics.push(format!("closing tag [/{id}] crosses an inner open tag"));
                    }
                    let o = stack.remove(pos);
                    finish(o, &mut found);
                }
                None => diagnostics.push(format!("closing tag [/{id}] without a matching opening tag")),
            },
            Piece::Word(w) => {
                let limit = (next_ref + LOOKAHEAD).min(reference.len());
                match (next_ref..limit).find(|&j| reference[j].as_ref() == w) {
                    Some(j) => {
                        next_ref = j + 1;
                        for o in &mut stack {
                            o.first.get_or_insert(j);
                            o.last = j;
                        }
                    }
                    None => skipped.push(w.to_string()),
                }
            }
        }
    }
    while let Some(o) = stack.pop() {
        diagnostics.push(format!("tag [{}] left open; closed at end of input", o.id));
        finish(o, &mut found);
    }
    if !skipped.is_empty() {
        diagnostics.push(format!(
            "{} output token(s) had no counterpart in the reference text: {}",
            skipped.len(),
            skipped.join(" ")
        ));
    }

    found.sort_by_key(|(o, _, _)| *o);
    let mut mentions = Vec::new();
    let mut seen: BTreeMap<Span, String> = BTreeMap::new();
    for (_, id, span) in found {
        let Some(span) = span else {
            diagnostics.push(format!("mention tagged [{id}] aligns to no reference token; dropped"));
            continue;
        };
        if let Some(prev) = seen.get(&span) {
            diagnostics.push(format!("span {span} tagged as both [{prev}] and [{id}]; kept [{prev}]"));
            continue;
        }
        seen.insert(span, id.clone());
        mentions.push((id, span));
    }
    TaggedTextParse { mentions, diagnostics }
}

impl TaggedTextParse {
    /// Builds a document over `tokens`: one chain per id (in order of first
    /// mention), alias mentions decided by their surface form. Overlapping
    /// alias mentions keep the earliest (then longest) one in the NER layer.
    pub fn to_document(
        &self,
        id: &str,
        tokens: Vec<String>,
        lists: &WordLists,
    ) -> Result<(Document, Vec<String>), CorpusError> {
        let mut notes = Vec::new();
        let mut chains: Vec<Vec<Span>> = Vec::new();
        let mut chain_of: BTreeMap<&str, usize> = BTreeMap::new();
        let mut aliases = Vec::new();
        for (cid, span) in &self.mentions {
            let c = *chain_of.entry(cid.as_str()).or_insert_with(|| {
                chains.push(Vec::new());
                chains.len() - 1
            });
            chains[c].push(*span);
            if is_alias_form(&tokens[span.start..span.end], &lists.stopwords) {
                aliases.push(*span);
            }
        }
        aliases.sort_by_key(|s| (s.start, std::cmp::Reverse(s.end)));
        let mut ner: Vec<Span> = Vec::new();
        for s in aliases {
            match ner.last() {
                Some(prev) if prev.overlaps(&s) => {
                    notes.push(format!("alias mention {s} overlaps {prev}; kept as a generic mention"))
                }
                _ => ner.push(s),
            }
        }
        let doc = Document::new(id, tokens, ner, chains)?;
        Ok((doc, notes))
    }
}
