//! Network quality measures, plus the NER and coreference scores reported
//! alongside them during sweeps.
//!
//! Undefined values (empty denominators) are `None` throughout.

mod assignment;
mod task;

use serde::{Deserialize, Serialize};

use crate::network::CharacterNetwork;

pub use assignment::max_weight_assignment;
pub use task::{b_cubed, muc, ner_f1, CorefScores, Prf};

/// Harmonic mean; undefined if either side is, or if both are zero.
pub fn f1(precision: Option<f64>, recall: Option<f64>) -> Option<f64> {
    let (p, r) = (precision?, recall?);
    if p + r == 0.0 {
        None
    } else {
        Some(2.0 * p * r / (p + r))
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    PredToGold,
    GoldToPred,
}

/// A partial injective map between the vertices of two networks. `None`
/// stands for the null vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexMapping {
    pub direction: Direction,
    pub assignment: Vec<Option<usize>>,
    /// Optimal objective, scaled by `scale` for the pred→gold direction.
    objective: i128,
    scale: i128,
}

impl VertexMapping {
    pub fn target(&self, source: usize) -> Option<usize> {
        self.assignment.get(source).copied().flatten()
    }

    /// Optimal objective value.
    pub fn objective(&self) -> f64 {
        self.objective as f64 / self.scale as f64
    }
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn overlap(a: &std::collections::BTreeSet<String>, b: &std::collections::BTreeSet<String>) -> usize {
    a.intersection(b).count()
}

/// Computes the optimal vertex mapping in the given direction. Pred→gold
/// maximizes the summed alias overlap ratio `|u ∩ f(u)| / |u|`; gold→pred
/// maximizes the number of gold vertices matched to an overlapping vertex.
/// Ties go to the lexicographically smallest assignment.
pub fn match_vertices(pred: &CharacterNetwork, gold: &CharacterNetwork, direction: Direction) -> VertexMapping {
    let (source, target) = match direction {
        Direction::PredToGold => (pred, gold),
        Direction::GoldToPred => (gold, pred),
    };
    // integer weights: |u ∩ v| · L / |u| with L the lcm of the source sizes
    let scale = match direction {
        Direction::PredToGold => source
            .vertices()
            .iter()
            .map(|u| u.len().max(1) as i128)
            .fold(1, |l, n| l / gcd(l, n) * n),
        Direction::GoldToPred => 1,
    };
    let weights: Vec<Vec<Option<i128>>> = source
        .vertices()
        .iter()
        .map(|u| {
            target
                .vertices()
                .iter()
                .map(|v| {
                    let common = overlap(u, v) as i128;
                    (common > 0).then(|| match direction {
                        Direction::PredToGold => common * scale / u.len() as i128,
                        Direction::GoldToPred => 1,
                    })
                })
                .collect()
        })
        .collect();
    let assignment = max_weight_assignment(&weights, target.vertex_count());
    let objective = assignment
        .iter()
        .enumerate()
        .filter_map(|(i, t)| t.and_then(|t| weights[i][t]))
        .sum();
    VertexMapping {
        direction,
        assignment,
        objective,
        scale,
    }
}

/// The nine network measures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkScores {
    pub pre_v: Option<f64>,
    pub rec_v: Option<f64>,
    pub f1_v: Option<f64>,
    pub pre_e: Option<f64>,
    pub rec_e: Option<f64>,
    pub f1_e: Option<f64>,
    pub wpre_e: Option<f64>,
    pub wrec_e: Option<f64>,
    pub wf1_e: Option<f64>,
}

impl NetworkScores {
    pub const NAMES: [&'static str; 9] = [
        "pre_v", "rec_v", "f1_v", "pre_e", "rec_e", "f1_e", "wpre_e", "wrec_e", "wf1_e",
    ];

    /// Values in the order of [`NetworkScores::NAMES`].
    pub fn values(&self) -> [Option<f64>; 9] {
        [
            self.pre_v,
            self.rec_v,
            self.f1_v,
            self.pre_e,
            self.rec_e,
            self.f1_e,
            self.wpre_e,
            self.wrec_e,
            self.wf1_e,
        ]
    }
}

/// Edge scores of `source` edges mapped through `mapping` into `target`:
/// (count of edges landing on a target edge, summed weighted credit).
fn edge_credit(source: &CharacterNetwork, target: &CharacterNetwork, mapping: &VertexMapping) -> (usize, f64) {
    let source_max = source.max_weight() as f64;
    let target_max = target.max_weight() as f64;
    let mut hits = 0;
    let mut weighted = 0.0;
    for (&(a, b), &w) in source.edges() {
        let w = w as f64 / source_max;
        let image = match (mapping.target(a), mapping.target(b)) {
            (Some(fa), Some(fb)) => target.weight(fa, fb),
            _ => 0,
        };
        if image > 0 {
            hits += 1;
        }
        let w_image = if image > 0 { image as f64 / target_max } else { 0.0 };
        weighted += 1.0 - (w_image - w).abs();
    }
    (hits, weighted)
}

/// Scores a predicted network against a gold one. Both edge directions are
/// derived from the two optimal vertex mappings.
pub fn network_scores(pred: &CharacterNetwork, gold: &CharacterNetwork) -> NetworkScores {
    let f = match_vertices(pred, gold, Direction::PredToGold);
    let g = match_vertices(pred, gold, Direction::GoldToPred);

    let pre_v = (pred.vertex_count() > 0)
        .then(|| f.objective as f64 / (f.scale as f64 * pred.vertex_count() as f64));
    let rec_v = ratio(g.objective as usize, gold.vertex_count());

    let (f_hits, f_weighted) = edge_credit(pred, gold, &f);
    let (g_hits, g_weighted) = edge_credit(gold, pred, &g);
    let pre_e = ratio(f_hits, pred.edge_count());
    let rec_e = ratio(g_hits, gold.edge_count());
    let wpre_e = (pred.edge_count() > 0).then(|| f_weighted / pred.edge_count() as f64);
    let wrec_e = (gold.edge_count() > 0).then(|| g_weighted / gold.edge_count() as f64);

    NetworkScores {
        pre_v,
        rec_v,
        f1_v: f1(pre_v, rec_v),
        pre_e,
        rec_e,
        f1_e: f1(pre_e, rec_e),
        wpre_e,
        wrec_e,
        wf1_e: f1(wpre_e, wrec_e),
    }
}
