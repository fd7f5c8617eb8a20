use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PerturbError, PerturbationKind, DEFAULT_MAX_SPAN_LEN};
use crate::corpus::Document;
use crate::measures::{b_cubed, muc, ner_f1, network_scores, NetworkScores, Prf};
use crate::network::{extract_network, CharacterNetwork, WindowConfig};
use crate::unify::{gold_characters, unify, Lexicon};

pub const CSV_HEADER: &str =
    "seed,step,ner_p,ner_r,ner_f1,muc_f1,b3_f1,pre_v,rec_v,f1_v,pre_e,rec_e,f1_e,wpre_e,wrec_e,wf1_e";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub kinds: Vec<PerturbationKind>,
    pub steps: usize,
    pub record_every: usize,
    pub seed: u64,
    pub max_span_len: usize,
    pub window: usize,
    pub use_coref: bool,
}

impl SweepConfig {
    pub fn new(kinds: impl IntoIterator<Item = PerturbationKind>, steps: usize) -> Self {
        SweepConfig {
            kinds: kinds.into_iter().collect(),
            steps,
            record_every: 1,
            seed: 0,
            max_span_len: DEFAULT_MAX_SPAN_LEN,
            window: crate::network::DEFAULT_WINDOW,
            use_coref: true,
        }
    }

    pub fn validate(&self) -> Result<WindowConfig, PerturbError> {
        let fail = |m: &str| Err(PerturbError::Config(m.to_string()));
        if self.kinds.is_empty() {
            return fail("at least one perturbation kind is required");
        }
        if self.record_every == 0 {
            return fail("record_every must be positive");
        }
        if self.steps > 0 && self.record_every > self.steps {
            return fail("record_every must not exceed steps");
        }
        if self.max_span_len == 0 {
            return fail("max_span_len must be positive");
        }
        WindowConfig::new(self.window).map_err(|e| PerturbError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub seed: u64,
    pub step: usize,
    pub ner: Prf,
    pub muc_f1: Option<f64>,
    pub b3_f1: Option<f64>,
    pub network: NetworkScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub seed: u64,
    pub records: Vec<SweepRecord>,
    /// Step after which no configured perturbation applied, if the sweep
    /// stopped early.
    pub saturated_at: Option<usize>,
}

struct Scorer<'a> {
    gold: &'a Document,
    reference: CharacterNetwork,
    window: WindowConfig,
    use_coref: bool,
    lexicon: &'a Lexicon,
}

impl Scorer<'_> {
    fn predicted_network(&self, doc: &Document) -> CharacterNetwork {
        extract_network(&unify(doc, self.use_coref, self.lexicon), &self.window)
    }

    fn record(&self, seed: u64, step: usize, doc: &Document) -> SweepRecord {
        let pred_chains = doc.coref_spans();
        let gold_chains = self.gold.coref_spans();
        SweepRecord {
            seed,
            step,
            ner: ner_f1(&doc.ner_spans(), &self.gold.ner_spans()),
            muc_f1: muc(&pred_chains, &gold_chains).f1,
            b3_f1: b_cubed(&pred_chains, &gold_chains).f1,
            network: network_scores(&self.predicted_network(doc), &self.reference),
        }
    }
}

fn check_same_text(doc: &Document, gold: &Document) -> Result<(), PerturbError> {
    if doc.len() != gold.len() || doc.token_texts().ne(gold.token_texts()) {
        return Err(PerturbError::Mismatch(format!(
            "{} has {} tokens, {} has {}",
            doc.id(),
            doc.len(),
            gold.id(),
            gold.len()
        )));
    }
    Ok(())
}

/// Walks the sweep, handing the prediction at every recorded step to
/// `on_record`. Returns the saturation step if the sweep stopped early.
fn sweep_states(
    doc: &Document,
    gold: &Document,
    config: &SweepConfig,
    mut on_record: impl FnMut(usize, &Document),
) -> Result<Option<usize>, PerturbError> {
    config.validate()?;
    check_same_text(doc, gold)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut kinds = config.kinds.clone();
    kinds.sort();
    kinds.dedup();

    let mut current = doc.clone();
    on_record(0, &current);
    for step in 1..=config.steps {
        let mut candidates = kinds.clone();
        let mut next = None;
        // drawing among the kinds not yet found saturated is uniform over
        // the applicable ones
        while !candidates.is_empty() {
            let i = rng.gen_range(0..candidates.len());
            match candidates[i].apply(&current, gold, &mut rng, config.max_span_len) {
                Ok(d) => {
                    next = Some(d);
                    break;
                }
                Err(PerturbError::Saturated(_)) => {
                    candidates.remove(i);
                }
                Err(e) => return Err(e),
            }
        }
        match next {
            Some(d) => current = d,
            None => {
                let last = step - 1;
                if last % config.record_every != 0 {
                    on_record(last, &current);
                }
                return Ok(Some(last));
            }
        }
        if step % config.record_every == 0 {
            on_record(step, &current);
        }
    }
    Ok(None)
}

/// Runs one seeded sweep from `doc` (normally a copy of `gold`), scoring
/// the extracted network against the gold characters' network.
pub fn run_sweep(
    doc: &Document,
    gold: &Document,
    config: &SweepConfig,
    lexicon: &Lexicon,
) -> Result<SweepOutcome, PerturbError> {
    let window = config.validate()?;
    let scorer = Scorer {
        gold,
        reference: extract_network(&gold_characters(gold), &window),
        window,
        use_coref: config.use_coref,
        lexicon,
    };
    let mut records = Vec::new();
    let saturated_at = sweep_states(doc, gold, config, |step, d| {
        records.push(scorer.record(config.seed, step, d))
    })?;
    Ok(SweepOutcome {
        seed: config.seed,
        records,
        saturated_at,
    })
}

/// Predicted networks at every recorded step, for structural comparisons.
pub fn sweep_networks(
    doc: &Document,
    gold: &Document,
    config: &SweepConfig,
    lexicon: &Lexicon,
) -> Result<Vec<(usize, CharacterNetwork)>, PerturbError> {
    let window = config.validate()?;
    let mut out = Vec::new();
    sweep_states(doc, gold, config, |step, d| {
        out.push((step, extract_network(&unify(d, config.use_coref, lexicon), &window)))
    })?;
    Ok(out)
}

/// Runs the same sweep once per seed, in parallel; results follow `seeds`.
pub fn run_sweeps(
    doc: &Document,
    gold: &Document,
    config: &SweepConfig,
    seeds: &[u64],
    lexicon: &Lexicon,
) -> Result<Vec<SweepOutcome>, PerturbError> {
    seeds
        .par_iter()
        .map(|&seed| {
            let config = SweepConfig { seed, ..config.clone() };
            run_sweep(doc, gold, &config, lexicon)
        })
        .collect()
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes sweep records as CSV, ordered by seed then step.
pub fn write_csv<W: Write>(out: &mut W, outcomes: &[SweepOutcome]) -> io::Result<()> {
    let mut records: Vec<&SweepRecord> = outcomes.iter().flat_map(|o| &o.records).collect();
    records.sort_by_key(|r| (r.seed, r.step));
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        let mut row = vec![
            r.seed.to_string(),
            r.step.to_string(),
            cell(r.ner.precision),
            cell(r.ner.recall),
            cell(r.ner.f1),
            cell(r.muc_f1),
            cell(r.b3_f1),
        ];
        row.extend(r.network.values().into_iter().map(cell));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Span;

    fn doc() -> Document {
        let text = "Anna met Boris . Later Anna and Clara talked with Boris while she smiled at Clara .";
        Document::new(
            "toy",
            text.split_whitespace().map(String::from).collect(),
            vec![Span::new(0, 1), Span::new(2, 3), Span::new(5, 6), Span::new(7, 8), Span::new(10, 11), Span::new(15, 16)],
            vec![
                vec![Span::new(0, 1), Span::new(5, 6), Span::new(12, 13)],
                vec![Span::new(2, 3), Span::new(10, 11)],
                vec![Span::new(7, 8), Span::new(15, 16)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn step_zero_scores_one() {
        let d = doc();
        let out = run_sweep(&d, &d, &SweepConfig::new([PerturbationKind::NerAddSpurious], 0), &Lexicon::default()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert!(out.records[0].network.values().iter().all(|v| *v == Some(1.0)));
        assert_eq!(out.records[0].ner.f1, Some(1.0));
    }

    #[test]
    fn records_follow_record_every() {
        let d = doc();
        let mut cfg = SweepConfig::new([PerturbationKind::CorefAddMention], 6);
        cfg.record_every = 3;
        let out = run_sweep(&d, &d, &cfg, &Lexicon::default()).unwrap();
        let steps: Vec<usize> = out.records.iter().map(|r| r.step).collect();
        assert_eq!(steps, vec![0, 3, 6]);
        assert!(out.records.iter().all(|r| r.network == out.records[0].network));
    }

    #[test]
    fn saturation_stops_with_final_record() {
        let d = doc();
        let mut cfg = SweepConfig::new([PerturbationKind::NerRemoveCorrect], 50);
        cfg.record_every = 4;
        let out = run_sweep(&d, &d, &cfg, &Lexicon::default()).unwrap();
        assert_eq!(out.saturated_at, Some(6));
        let last = out.records.last().unwrap();
        assert_eq!(last.step, 6);
        assert_eq!(last.ner.recall, Some(0.0));
        assert_eq!(last.network.rec_v, Some(0.0));
        assert_eq!(last.network.pre_v, None);
        assert_eq!(last.network.pre_e, None);
    }

    #[test]
    fn csv_is_deterministic_and_leaves_undefined_empty() {
        let d = doc();
        let mut cfg = SweepConfig::new([PerturbationKind::NerRemoveCorrect, PerturbationKind::CorefAddLink], 8);
        cfg.record_every = 2;
        let run = || {
            let outs = run_sweeps(&d, &d, &cfg, &[3, 1, 2], &Lexicon::default()).unwrap();
            let mut buf = Vec::new();
            write_csv(&mut buf, &outs).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let a = run();
        assert_eq!(a, run());
        let mut lines = a.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let seeds: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
        let mut sorted = seeds.clone();
        sorted.sort();
        assert_eq!(seeds, sorted);
        assert!(a.lines().all(|l| l.split(',').count() == 16));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let d = doc();
        let lex = Lexicon::default();
        assert!(run_sweep(&d, &d, &SweepConfig::new([], 3), &lex).is_err());
        let mut cfg = SweepConfig::new([PerturbationKind::CorefAddLink], 3);
        cfg.record_every = 4;
        assert!(run_sweep(&d, &d, &cfg, &lex).is_err());
        cfg.record_every = 1;
        cfg.window = 0;
        assert!(run_sweep(&d, &d, &cfg, &lex).is_err());
        let other = d.with_annotations(vec![], vec![]).unwrap();
        let short = Document::new("s", vec!["x".into()], vec![], vec![]).unwrap();
        assert!(run_sweep(&other, &short, &SweepConfig::new([PerturbationKind::CorefAddLink], 1), &lex).is_err());
    }
}
