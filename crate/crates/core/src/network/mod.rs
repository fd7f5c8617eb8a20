//! Weighted co-occurrence character networks.

mod graphml;

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::Span;
use crate::unify::CharacterGroup;

pub use graphml::{read_graphml, split_aliases, write_graphml, GraphmlError, ALIAS_SEPARATOR};

pub const DEFAULT_WINDOW: usize = 32;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum NetworkError {
    #[error("co-occurrence window must be at least 1 token")]
    ZeroWindow,
    #[error("edge ({0}, {1}) refers to a missing vertex")]
    MissingVertex(usize, usize),
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("edge ({0}, {1}) has zero weight")]
    ZeroWeight(usize, usize),
}

/// How the distance between two mentions is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceAnchor {
    /// Difference of start tokens.
    #[default]
    Start,
    /// Tokens strictly between the two spans (0 when they overlap or touch).
    Gap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowConfig {
    window: usize,
    pub anchor: DistanceAnchor,
}

impl WindowConfig {
    pub fn new(window: usize) -> Result<Self, NetworkError> {
        if window == 0 {
            return Err(NetworkError::ZeroWindow);
        }
        Ok(WindowConfig {
            window,
            anchor: DistanceAnchor::Start,
        })
    }

    pub fn with_anchor(mut self, anchor: DistanceAnchor) -> Self {
        self.anchor = anchor;
        self
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn distance(&self, a: Span, b: Span) -> usize {
        match self.anchor {
            DistanceAnchor::Start => a.start.abs_diff(b.start),
            DistanceAnchor::Gap => {
                let (first, second) = if a.start <= b.start { (a, b) } else { (b, a) };
                second.start.saturating_sub(first.end)
            }
        }
    }
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            window: DEFAULT_WINDOW,
            anchor: DistanceAnchor::Start,
        }
    }
}

/// Undirected weighted graph whose vertices are alias sets. Edge keys are
/// `(i, j)` with `i < j`; weights are raw interaction counts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CharacterNetwork {
    vertices: Vec<BTreeSet<String>>,
    edges: BTreeMap<(usize, usize), u64>,
}

impl CharacterNetwork {
    pub fn new(
        vertices: Vec<BTreeSet<String>>,
        edges: impl IntoIterator<Item = ((usize, usize), u64)>,
    ) -> Result<Self, NetworkError> {
        let n = vertices.len();
        let mut map = BTreeMap::new();
        for ((a, b), w) in edges {
            if a >= n || b >= n {
                return Err(NetworkError::MissingVertex(a, b));
            }
            if a == b {
                return Err(NetworkError::SelfLoop(a));
            }
            if w == 0 {
                return Err(NetworkError::ZeroWeight(a, b));
            }
            *map.entry((a.min(b), a.max(b))).or_insert(0) += w;
        }
        Ok(CharacterNetwork { vertices, edges: map })
    }

    pub fn vertices(&self) -> &[BTreeSet<String>] {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeMap<(usize, usize), u64> {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn weight(&self, a: usize, b: usize) -> u64 {
        self.edges.get(&(a.min(b), a.max(b))).copied().unwrap_or(0)
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().sum()
    }

    pub fn max_weight(&self) -> u64 {
        self.edges.values().copied().max().unwrap_or(0)
    }

    /// Position of the first vertex whose alias set contains `alias`.
    pub fn find(&self, alias: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.contains(alias))
    }
}

/// Builds the co-occurrence network of `characters`.
///
/// Every pair of mentions of two different characters within the window adds
/// one to their edge weight. Anonymous characters (no alias) are not
/// vertices; characters without mentions stay as isolated vertices.
pub fn extract_network(characters: &[CharacterGroup], config: &WindowConfig) -> CharacterNetwork {
    let kept: Vec<&CharacterGroup> = characters.iter().filter(|c| !c.is_anonymous()).collect();
    let mut mentions: Vec<(Span, usize)> = kept
        .iter()
        .enumerate()
        .flat_map(|(v, c)| c.mentions.iter().map(move |m| (m.span, v)))
        .collect();
    mentions.sort();
    let max_len = mentions.iter().map(|(s, _)| s.len()).max().unwrap_or(0);
    let reach = match config.anchor {
        DistanceAnchor::Start => config.window,
        DistanceAnchor::Gap => config.window + max_len,
    };

    let mut edges: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for (i, &(a, va)) in mentions.iter().enumerate() {
        for &(b, vb) in &mentions[i + 1..] {
            if b.start - a.start > reach {
                break;
            }
            if va != vb && config.distance(a, b) <= config.window {
                *edges.entry((va.min(vb), va.max(vb))).or_insert(0) += 1;
            }
        }
    }
    CharacterNetwork {
        vertices: kept.iter().map(|c| c.aliases.clone()).collect(),
        edges,
    }
}

/// Drops generic mentions from every character, keeping the characters.
pub fn alias_mentions_only(characters: &[CharacterGroup]) -> Vec<CharacterGroup> {
    characters.iter().map(CharacterGroup::alias_mentions_only).collect()
}
