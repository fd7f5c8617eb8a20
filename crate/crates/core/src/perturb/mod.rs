//! Seeded perturbations of NER and coreference annotations, and sweeps that
//! score the extracted network after each degradation step.
//!
//! Every operation takes the current prediction and the gold document,
//! changes exactly one annotation unit, and fails with
//! [`PerturbError::Saturated`] before drawing from the generator when no
//! instance of the perturbation remains.

mod sweep;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusError, Document, Span};

pub use sweep::{run_sweep, run_sweeps, sweep_networks, write_csv, SweepConfig, SweepOutcome, SweepRecord, CSV_HEADER};

pub const DEFAULT_MAX_SPAN_LEN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationKind {
    NerAddSpurious,
    NerRemoveCorrect,
    CorefAddMention,
    CorefRemoveMention,
    CorefAddLink,
    CorefRemoveLink,
}

impl PerturbationKind {
    pub const ALL: [PerturbationKind; 6] = [
        PerturbationKind::NerAddSpurious,
        PerturbationKind::NerRemoveCorrect,
        PerturbationKind::CorefAddMention,
        PerturbationKind::CorefRemoveMention,
        PerturbationKind::CorefAddLink,
        PerturbationKind::CorefRemoveLink,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PerturbationKind::NerAddSpurious => "ner-add-spurious",
            PerturbationKind::NerRemoveCorrect => "ner-remove-correct",
            PerturbationKind::CorefAddMention => "coref-add-mention",
            PerturbationKind::CorefRemoveMention => "coref-remove-mention",
            PerturbationKind::CorefAddLink => "coref-add-link",
            PerturbationKind::CorefRemoveLink => "coref-remove-link",
        }
    }

    /// Applies one perturbation of this kind.
    pub fn apply<R: Rng + ?Sized>(
        self,
        doc: &Document,
        gold: &Document,
        rng: &mut R,
        max_span_len: usize,
    ) -> Result<Document, PerturbError> {
        match self {
            PerturbationKind::NerAddSpurious => ner_add_spurious(doc, gold, rng, max_span_len),
            PerturbationKind::NerRemoveCorrect => ner_remove_correct(doc, gold, rng),
            PerturbationKind::CorefAddMention => coref_add_mention(doc, gold, rng, max_span_len),
            PerturbationKind::CorefRemoveMention => coref_remove_mention(doc, gold, rng),
            PerturbationKind::CorefAddLink => coref_add_link(doc, gold, rng),
            PerturbationKind::CorefRemoveLink => coref_remove_link(doc, gold, rng),
        }
    }
}

impl fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PerturbationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        PerturbationKind::ALL
            .into_iter()
            .find(|k| k.name() == key || k.name().replace('-', "") == key)
            .ok_or_else(|| {
                let names: Vec<&str> = PerturbationKind::ALL.iter().map(|k| k.name()).collect();
                format!("unknown perturbation kind {s:?} (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PerturbError {
    #[error("no {0} perturbation is possible")]
    Saturated(PerturbationKind),
    #[error("invalid sweep configuration: {0}")]
    Config(String),
    #[error("prediction and gold documents differ: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Spans of length `1..=max_len` that avoid every span of `blocked` and
/// differ from every span of `excluded`, grouped by length.
fn free_spans(
    n_tokens: usize,
    blocked: &[Span],
    excluded: &BTreeSet<Span>,
    max_len: usize,
) -> Vec<Vec<Span>> {
    let mut covered = vec![false; n_tokens];
    for s in blocked {
        covered[s.start..s.end].iter_mut().for_each(|c| *c = true);
    }
    // run[i]: free tokens starting at i
    let mut run = vec![0usize; n_tokens + 1];
    for i in (0..n_tokens).rev() {
        run[i] = if covered[i] { 0 } else { run[i + 1] + 1 };
    }
    (1..=max_len)
        .map(|len| {
            (0..n_tokens)
                .filter(|&i| run[i] >= len)
                .map(|i| Span::new(i, i + len))
                .filter(|s| !excluded.contains(s))
                .collect::<Vec<_>>()
        })
        .filter(|v| !v.is_empty())
        .collect()
}

/// Length uniform among feasible lengths, then start uniform.
fn sample_free_span<R: Rng + ?Sized>(by_len: &[Vec<Span>], rng: &mut R) -> Option<Span> {
    let spans = by_len.choose(rng)?;
    spans.choose(rng).copied()
}

/// Tags a new alias mention on a span overlapping no NER mention and
/// matching no gold one.
pub fn ner_add_spurious<R: Rng + ?Sized>(
    doc: &Document,
    gold: &Document,
    rng: &mut R,
    max_span_len: usize,
) -> Result<Document, PerturbError> {
    let ner = doc.ner_spans();
    let gold_spans: BTreeSet<Span> = gold.ner_spans().into_iter().collect();
    let free = free_spans(doc.len(), &ner, &gold_spans, max_span_len);
    let span = sample_free_span(&free, rng).ok_or(PerturbError::Saturated(PerturbationKind::NerAddSpurious))?;
    let mut ner = ner;
    ner.push(span);
    Ok(doc.with_annotations(ner, doc.coref_spans())?)
}

/// Untags one alias mention that matches gold.
pub fn ner_remove_correct<R: Rng + ?Sized>(
    doc: &Document,
    gold: &Document,
    rng: &mut R,
) -> Result<Document, PerturbError> {
    let gold_spans: BTreeSet<Span> = gold.ner_spans().into_iter().collect();
    let correct: Vec<Span> = doc.ner_spans().into_iter().filter(|s| gold_spans.contains(s)).collect();
    let victim = *correct
        .choose(rng)
        .ok_or(PerturbError::Saturated(PerturbationKind::NerRemoveCorrect))?;
    let ner = doc.ner_spans().into_iter().filter(|&s| s != victim).collect();
    Ok(doc.with_annotations(ner, doc.coref_spans())?)
}

/// Adds a singleton chain on a span overlapping no mention of either layer
/// and matching no gold coreference mention.
pub fn coref_add_mention<R: Rng + ?Sized>(
    doc: &Document,
    gold: &Document,
    rng: &mut R,
    max_span_len: usize,
) -> Result<Document, PerturbError> {
    let mut blocked = doc.ner_spans();
    blocked.extend(doc.coref_spans().into_iter().flatten());
    let gold_spans: BTreeSet<Span> = gold.coref_spans().into_iter().flatten().collect();
    let free = free_spans(doc.len(), &blocked, &gold_spans, max_span_len);
    let span = sample_free_span(&free, rng).ok_or(PerturbError::Saturated(PerturbationKind::CorefAddMention))?;
    let mut coref = doc.coref_spans();
    coref.push(vec![span]);
    Ok(doc.with_annotations(doc.ner_spans(), coref)?)
}

/// Deletes one chain mention that is a gold coreference mention.
pub fn coref_remove_mention<R: Rng + ?Sized>(
    doc: &Document,
    gold: &Document,
    rng: &mut R,
) -> Result<Document, PerturbError> {
    let gold_spans: BTreeSet<Span> = gold.coref_spans().into_iter().flatten().collect();
    let correct: Vec<Span> = doc
        .coref_spans()
        .into_iter()
        .flatten()
        .filter(|s| gold_spans.contains(s))
        .collect();
    let victim = *correct
        .choose(rng)
        .ok_or(PerturbError::Saturated(PerturbationKind::CorefRemoveMention))?;
    let coref = doc
        .coref_spans()
        .into_iter()
        .map(|c| c.into_iter().filter(|&s| s != victim).collect::<Vec<_>>())
        .filter(|c| !c.is_empty())
        .collect();
    Ok(doc.with_annotations(doc.ner_spans(), coref)?)
}

/// Gold entity of every gold coreference mention.
fn gold_entities(gold: &Document) -> BTreeMap<Span, usize> {
    gold.coref_spans()
        .into_iter()
        .enumerate()
        .flat_map(|(i, c)| c.into_iter().map(move |s| (s, i)))
        .collect()
}

/// Merges two predicted chains through an incorrect link, sampled
/// uniformly over all mention pairs lying in different predicted chains and
/// different gold entities. Mentions outside gold count as entities of
/// their own.
pub fn coref_add_link<R: Rng + ?Sized>(
    doc: &Document,
    gold: &Document,
    rng: &mut R,
) -> Result<Document, PerturbError> {
    let entity = gold_entities(gold);
    let chains = doc.coref_spans();
    let counts: Vec<BTreeMap<usize, u64>> = chains
        .iter()
        .map(|c| {
            let mut m = BTreeMap::new();
            for s in c {
                if let Some(&e) = entity.get(s) {
                    *m.entry(e).or_insert(0) += 1;
                }
            }
            m
        })
        .collect();
    // number of incorrect links between each pair of chains
    let mut pairs: Vec<((usize, usize), u64)> = Vec::new();
    for a in 0..chains.len() {
        for b in a + 1..chains.len() {
            let all = chains[a].len() as u64 * chains[b].len() as u64;
            let same: u64 = counts[a]
                .iter()
                .map(|(e, n)| n * counts[b].get(e).copied().unwrap_or(0))
                .sum();
            if all > same {
                pairs.push(((a, b), all - same));
            }
        }
    }
    let total: u64 = pairs.iter().map(|(_, w)| w).sum();
    if total == 0 {
        return Err(PerturbError::Saturated(PerturbationKind::CorefAddLink));
    }
    let mut pick = rng.gen_range(0..total);
    let (a, b) = pairs
        .iter()
        .find_map(|&(p, w)| {
            if pick < w {
                Some(p)
            } else {
                pick -= w;
                None
            }
        })
        .expect("pick below total");
    let mut chains = chains;
    let moved = chains.remove(b);
    chains[a].extend(moved);
    Ok(doc.with_annotations(doc.ner_spans(), chains)?)
}

/// Splits a chain at one correct link. Links are the pairs of consecutive
/// mentions of a chain; a link is correct when both mentions belong to the
/// same gold chain. The suffix becomes a new chain right after the prefix.
pub fn coref_remove_link<R: Rng + ?Sized>(
    doc: &Document,
    gold: &Document,
    rng: &mut R,
) -> Result<Document, PerturbError> {
    let entity = gold_entities(gold);
    let chains = doc.coref_spans();
    let links: Vec<(usize, usize)> = chains
        .iter()
        .enumerate()
        .flat_map(|(c, spans)| {
            let entity = &entity;
            spans.windows(2).enumerate().filter_map(move |(k, w)| {
                match (entity.get(&w[0]), entity.get(&w[1])) {
                    (Some(x), Some(y)) if x == y => Some((c, k + 1)),
                    _ => None,
                }
            })
        })
        .collect();
    let &(c, at) = links
        .choose(rng)
        .ok_or(PerturbError::Saturated(PerturbationKind::CorefRemoveLink))?;
    let mut chains = chains;
    let suffix = chains[c].split_off(at);
    chains.insert(c + 1, suffix);
    Ok(doc.with_annotations(doc.ner_spans(), chains)?)
}
