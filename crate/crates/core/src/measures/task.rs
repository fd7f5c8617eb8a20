//! NER and coreference scores. Mentions match by exact span.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::f1;
use crate::corpus::Span;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

impl Prf {
    fn new(precision: Option<f64>, recall: Option<f64>) -> Self {
        Prf {
            precision,
            recall,
            f1: f1(precision, recall),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorefScores {
    pub muc: Prf,
    pub b3: Prf,
}

impl CorefScores {
    pub fn compute(pred: &[Vec<Span>], gold: &[Vec<Span>]) -> Self {
        CorefScores {
            muc: muc(pred, gold),
            b3: b_cubed(pred, gold),
        }
    }
}

/// Micro-averaged exact-match precision, recall and F1.
pub fn ner_f1(pred: &[Span], gold: &[Span]) -> Prf {
    let pred: BTreeSet<Span> = pred.iter().copied().collect();
    let gold: BTreeSet<Span> = gold.iter().copied().collect();
    let hits = pred.intersection(&gold).count() as f64;
    let p = (!pred.is_empty()).then(|| hits / pred.len() as f64);
    let r = (!gold.is_empty()).then(|| hits / gold.len() as f64);
    Prf::new(p, r)
}

fn chain_index(chains: &[Vec<Span>]) -> BTreeMap<Span, usize> {
    chains
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |&s| (s, i)))
        .collect()
}

/// MUC recall of `key` against `response`: for each key chain, its size
/// minus the number of parts the response splits it into.
fn muc_recall(key: &[Vec<Span>], response: &[Vec<Span>]) -> Option<f64> {
    let index = chain_index(response);
    let mut num = 0usize;
    let mut den = 0usize;
    for chain in key {
        let mut parts = BTreeSet::new();
        let mut loose = 0;
        for s in chain {
            match index.get(s) {
                Some(&c) => {
                    parts.insert(c);
                }
                None => loose += 1,
            }
        }
        num += chain.len() - (parts.len() + loose);
        den += chain.len() - 1;
    }
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn muc(pred: &[Vec<Span>], gold: &[Vec<Span>]) -> Prf {
    Prf::new(muc_recall(pred, gold), muc_recall(gold, pred))
}

/// Mention-averaged B³ recall of `key` against `response`, singletons
/// included. Key mentions absent from the response score 0.
fn b3_recall(key: &[Vec<Span>], response: &[Vec<Span>]) -> Option<f64> {
    let index = chain_index(response);
    let mut total = 0.0;
    let mut mentions = 0usize;
    for chain in key {
        let members: BTreeSet<Span> = chain.iter().copied().collect();
        for s in chain {
            mentions += 1;
            if let Some(&c) = index.get(s) {
                let common = response[c].iter().filter(|r| members.contains(r)).count();
                total += common as f64 / members.len() as f64;
            }
        }
    }
    (mentions > 0).then(|| total / mentions as f64)
}

pub fn b_cubed(pred: &[Vec<Span>], gold: &[Vec<Span>]) -> Prf {
    Prf::new(b3_recall(pred, gold), b3_recall(gold, pred))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(i: usize) -> Span {
        Span::new(i, i + 1)
    }

    #[test]
    fn ner_counts_exact_matches() {
        let gold = [Span::new(0, 1), Span::new(8, 9)];
        let pred = [Span::new(0, 1)];
        let r = ner_f1(&pred, &gold);
        assert_eq!(r.precision, Some(1.0));
        assert_eq!(r.recall, Some(0.5));
        assert!((r.f1.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(ner_f1(&[], &gold).precision, None);
        assert_eq!(ner_f1(&[Span::new(0, 2)], &gold).precision, Some(0.0));
    }

    #[test]
    fn muc_split_chain() {
        let gold = vec![vec![s(0), s(1), s(2)]];
        let pred = vec![vec![s(0), s(1)], vec![s(2)]];
        let r = muc(&pred, &gold);
        assert_eq!(r.recall, Some(0.5));
        assert_eq!(r.precision, Some(1.0));
        let singletons = vec![vec![s(0)], vec![s(1)], vec![s(2)]];
        assert_eq!(muc(&singletons, &gold).recall, Some(0.0));
        assert_eq!(muc(&gold, &gold).f1, Some(1.0));
    }

    #[test]
    fn b3_singleton_prediction() {
        let gold = vec![vec![s(0), s(1)]];
        let pred = vec![vec![s(0)], vec![s(1)]];
        let r = b_cubed(&pred, &gold);
        assert_eq!(r.recall, Some(0.5));
        assert_eq!(r.precision, Some(1.0));
        let disjoint = vec![vec![s(5), s(6)]];
        let r = b_cubed(&disjoint, &gold);
        assert_eq!((r.precision, r.recall), (Some(0.0), Some(0.0)));
        assert_eq!(b_cubed(&gold, &gold).f1, Some(1.0));
    }

    #[test]
    fn merge_lowers_muc_precision() {
        let gold = vec![vec![s(0), s(1)], vec![s(2), s(3)]];
        let merged = vec![vec![s(0), s(1), s(2), s(3)]];
        assert!(muc(&merged, &gold).precision < muc(&gold, &gold).precision);
    }
}
