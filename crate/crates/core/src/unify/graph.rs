//! The alias graph and its connection / disconnection rules.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::lexicon::{Gazetteer, Gender, Lexicon, TitleTable};
use super::ChainEvidence;

/// A parsed alias. `first`/`last` are computed after the leading title is
/// removed; the `plain_*` fields are the positional components of the full
/// form, ignoring any component that is itself a title word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AliasForm {
    pub raw: String,
    pub title: Option<String>,
    pub first: Option<String>,
    pub last: Option<String>,
    pub hypocorism_keys: BTreeSet<usize>,
    plain_first: Option<String>,
    plain_last: Option<String>,
    plain_keys: BTreeSet<usize>,
}

pub fn parse_alias(raw: &str, titles: &TitleTable, gazetteer: &Gazetteer) -> AliasForm {
    let tokens: Vec<&str> = raw.split_whitespace().collect();
    let (title_len, title) = match titles.leading_title(&tokens) {
        Some((k, _)) => (k, Some(tokens[..k].join(" "))),
        None => (0, None),
    };
    let rest = &tokens[title_len..];
    let first = rest.first().map(|s| s.to_string());
    let last = (rest.len() >= 2).then(|| rest[rest.len() - 1].to_string());
    let hypocorism_keys = first.as_deref().map(|f| gazetteer.keys(f)).unwrap_or_default();

    let plain = |w: Option<&&str>| {
        w.filter(|w| !titles.is_title_word(w)).map(|w| w.to_string())
    };
    let plain_first = plain(tokens.first());
    let plain_last = if tokens.len() >= 2 { plain(tokens.last()) } else { None };
    let plain_keys = plain_first.as_deref().map(|f| gazetteer.keys(f)).unwrap_or_default();

    AliasForm {
        raw: tokens.join(" "),
        title,
        first,
        last,
        hypocorism_keys,
        plain_first,
        plain_last,
        plain_keys,
    }
}

impl AliasForm {
    fn plain_names(&self) -> impl Iterator<Item = &str> {
        self.plain_first.iter().chain(self.plain_last.iter()).map(String::as_str)
    }

    fn names(&self) -> impl Iterator<Item = &str> {
        self.first.iter().chain(self.last.iter()).map(String::as_str)
    }
}

/// Which rule created an alias-graph edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    /// Rule 1: a first or last name in common.
    SharedName,
    /// Rule 2: first names in one hypocorism class.
    Hypocorism,
    /// Rule 3: rule 1 or 2 holds once titles are removed.
    TitleStripped,
    /// Rule 4: the aliases are coreferential.
    Coreferential,
}

fn shares_name(a: &AliasForm, b: &AliasForm) -> bool {
    a.plain_names().any(|x| b.plain_names().any(|y| x == y))
}

fn hypocorisms(a: &AliasForm, b: &AliasForm) -> bool {
    !a.plain_keys.is_disjoint(&b.plain_keys)
}

fn related_without_titles(a: &AliasForm, b: &AliasForm) -> bool {
    if a.title.is_none() && b.title.is_none() {
        return false;
    }
    a.names().any(|x| b.names().any(|y| x == y))
        || !a.hypocorism_keys.is_disjoint(&b.hypocorism_keys)
}

/// True iff some chain holds alias mentions of both forms and no chain holds
/// an alias mention of one without the other.
pub fn coreferential(a: &str, b: &str, chains: &[ChainEvidence]) -> bool {
    let mut together = false;
    for chain in chains {
        match (chain.alias_forms.contains(a), chain.alias_forms.contains(b)) {
            (true, true) => together = true,
            (true, false) | (false, true) => return false,
            (false, false) => {}
        }
    }
    together
}

/// Title gender when the title is gendered, otherwise the majority gender
/// of pronouns in chains holding the alias form as an alias mention.
pub fn infer_gender(alias: &AliasForm, chains: &[ChainEvidence], lexicon: &Lexicon) -> Gender {
    if let Some(g) = alias
        .title
        .as_deref()
        .and_then(|t| lexicon.titles.gender_of(t))
        .filter(|g| *g != Gender::Unknown)
    {
        return g;
    }
    let (male, female) = chains
        .iter()
        .filter(|c| c.alias_forms.contains(&alias.raw))
        .fold((0, 0), |(m, f), c| (m + c.male, f + c.female));
    match male.cmp(&female) {
        std::cmp::Ordering::Greater => Gender::Male,
        std::cmp::Ordering::Less => Gender::Female,
        std::cmp::Ordering::Equal => Gender::Unknown,
    }
}

/// Both names present on both sides; exactly one of them shared.
fn same_family_different_person(a: &AliasForm, b: &AliasForm) -> bool {
    match (&a.first, &a.last, &b.first, &b.last) {
        (Some(af), Some(al), Some(bf), Some(bl)) => (af == bf) != (al == bl),
        _ => false,
    }
}

/// Undirected graph over distinct alias forms, sorted by raw form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliasGraph {
    vertices: Vec<AliasForm>,
    adjacency: Vec<BTreeSet<usize>>,
    edges: BTreeMap<(usize, usize), BTreeSet<Rule>>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl AliasGraph {
    pub fn new(aliases: impl IntoIterator<Item = AliasForm>) -> Self {
        let mut vertices: Vec<AliasForm> = aliases.into_iter().collect();
        vertices.sort_by(|a, b| a.raw.cmp(&b.raw));
        vertices.dedup_by(|a, b| a.raw == b.raw);
        let n = vertices.len();
        AliasGraph {
            vertices,
            adjacency: vec![BTreeSet::new(); n],
            edges: BTreeMap::new(),
        }
    }

    pub fn vertices(&self) -> &[AliasForm] {
        &self.vertices
    }

    pub fn index_of(&self, raw: &str) -> Option<usize> {
        self.vertices.binary_search_by(|v| v.raw.as_str().cmp(raw)).ok()
    }

    pub fn edges(&self) -> &BTreeMap<(usize, usize), BTreeSet<Rule>> {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].contains(&b)
    }

    pub fn rules_between(&self, a: &str, b: &str) -> Option<&BTreeSet<Rule>> {
        let (a, b) = (self.index_of(a)?, self.index_of(b)?);
        self.edges.get(&key(a, b))
    }

    fn add_edge(&mut self, a: usize, b: usize, rule: Rule) {
        debug_assert_ne!(a, b);
        self.adjacency[a].insert(b);
        self.adjacency[b].insert(a);
        self.edges.entry(key(a, b)).or_default().insert(rule);
    }

    fn remove_edge(&mut self, a: usize, b: usize) {
        self.adjacency[a].remove(&b);
        self.adjacency[b].remove(&a);
        self.edges.remove(&key(a, b));
    }

    /// Deleting an alias vertex leaves it as an isolated vertex, so its
    /// mentions still form a character of their own.
    fn isolate(&mut self, v: usize) {
        let neighbours: Vec<usize> = self.adjacency[v].iter().copied().collect();
        for u in neighbours {
            self.remove_edge(v, u);
        }
    }

    fn distances(&self, from: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertices.len()];
        dist[from] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn connected(&self, a: usize, b: usize) -> bool {
        self.distances(a)[b].is_some()
    }

    /// Distances from both endpoints and the length of a shortest a–b path.
    fn geodesics(&self, a: usize, b: usize) -> Option<(Vec<Option<usize>>, Vec<Option<usize>>, usize)> {
        let da = self.distances(a);
        let d = da[b]?;
        Some((da, self.distances(b), d))
    }

    fn on_shortest_path(da: &[Option<usize>], db: &[Option<usize>], d: usize, v: usize) -> bool {
        matches!((da[v], db[v]), (Some(x), Some(y)) if x + y == d)
    }

    /// Removes the interior vertices of every shortest a–b path (the edge
    /// itself when adjacent) until a and b are disconnected.
    fn cut_interior_vertices(&mut self, a: usize, b: usize) {
        while let Some((da, db, d)) = self.geodesics(a, b) {
            if d == 1 {
                self.remove_edge(a, b);
                continue;
            }
            let interior: Vec<usize> = (0..self.vertices.len())
                .filter(|&v| v != a && v != b && Self::on_shortest_path(&da, &db, d, v))
                .collect();
            for v in interior {
                self.isolate(v);
            }
        }
    }

    /// Removes every edge lying on a shortest a–b path until disconnected.
    fn cut_path_edges(&mut self, a: usize, b: usize) {
        while let Some((da, db, d)) = self.geodesics(a, b) {
            let on_path: Vec<(usize, usize)> = self
                .edges
                .keys()
                .copied()
                .filter(|&(u, v)| {
                    let step = |x: usize, y: usize| {
                        matches!((da[x], db[y]), (Some(p), Some(q)) if p + 1 + q == d)
                    };
                    step(u, v) || step(v, u)
                })
                .collect();
            for (u, v) in on_path {
                self.remove_edge(u, v);
            }
        }
    }

    /// Connected components as sorted vertex lists, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.vertices.len()];
        let mut out = Vec::new();
        for start in 0..self.vertices.len() {
            if seen[start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(u) = stack.pop() {
                comp.push(u);
                for &v in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Builds the alias graph: connection rules 1–4 over all pairs of the
/// original vertex set, then rule 5 and rule 6 in that order, each visiting
/// pairs in lexicographic order of their raw forms.
pub fn build_alias_graph(
    aliases: impl IntoIterator<Item = AliasForm>,
    chains: &[ChainEvidence],
    lexicon: &Lexicon,
) -> AliasGraph {
    let mut graph = AliasGraph::new(aliases);
    let n = graph.vertices.len();

    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&graph.vertices[i], &graph.vertices[j]);
            let mut rules = Vec::new();
            if shares_name(a, b) {
                rules.push(Rule::SharedName);
            }
            if hypocorisms(a, b) {
                rules.push(Rule::Hypocorism);
            }
            if related_without_titles(a, b) {
                rules.push(Rule::TitleStripped);
            }
            if coreferential(&a.raw, &b.raw, chains) {
                rules.push(Rule::Coreferential);
            }
            for rule in rules {
                graph.add_edge(i, j, rule);
            }
        }
    }

    for i in 0..n {
        for j in i + 1..n {
            if same_family_different_person(&graph.vertices[i], &graph.vertices[j])
                && graph.connected(i, j)
            {
                graph.cut_interior_vertices(i, j);
            }
        }
    }

    let genders: Vec<Gender> = graph
        .vertices
        .iter()
        .map(|v| infer_gender(v, chains, lexicon))
        .collect();
    for i in 0..n {
        for j in i + 1..n {
            let differ = genders[i] != Gender::Unknown
                && genders[j] != Gender::Unknown
                && genders[i] != genders[j];
            if differ && graph.connected(i, j) {
                graph.cut_path_edges(i, j);
            }
        }
    }
    graph
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex() -> Lexicon {
        Lexicon::default()
    }

    fn alias(raw: &str) -> AliasForm {
        let l = lex();
        parse_alias(raw, &l.titles, &l.gazetteer)
    }

    fn graph(raws: &[&str], chains: &[ChainEvidence]) -> AliasGraph {
        build_alias_graph(raws.iter().map(|r| alias(r)), chains, &lex())
    }

    fn chain(aliases: &[&str], generic: &[&str], lexicon: &Lexicon) -> ChainEvidence {
        let mut c = ChainEvidence::default();
        for a in aliases {
            c.forms.insert(a.to_string());
            c.alias_forms.insert(a.to_string());
        }
        for g in generic {
            c.forms.insert(g.to_string());
            match lexicon.pronouns.gender_of(g) {
                Some(Gender::Male) => c.male += 1,
                Some(Gender::Female) => c.female += 1,
                _ => {}
            }
        }
        c
    }

    fn same_component(g: &AliasGraph, a: &str, b: &str) -> bool {
        g.connected(g.index_of(a).unwrap(), g.index_of(b).unwrap())
    }

    #[test]
    fn parses_title_and_names() {
        let a = alias("Mr. John");
        assert_eq!(a.title.as_deref(), Some("Mr."));
        assert_eq!(a.first.as_deref(), Some("John"));
        assert_eq!(a.last, None);

        let b = alias("Emma Woodhouse");
        assert_eq!(b.title, None);
        assert_eq!((b.first.as_deref(), b.last.as_deref()), (Some("Emma"), Some("Woodhouse")));

        let j = alias("Johnny");
        assert!(!j.hypocorism_keys.is_disjoint(&alias("John").hypocorism_keys));
    }

    #[test]
    fn rule_one_shared_first_name() {
        let g = graph(&["Emma", "Emma Woodhouse"], &[]);
        assert_eq!(
            g.rules_between("Emma", "Emma Woodhouse"),
            Some(&BTreeSet::from([Rule::SharedName]))
        );
    }

    #[test]
    fn rule_two_hypocorism() {
        let g = graph(&["John", "Johnny"], &[]);
        assert_eq!(
            g.rules_between("John", "Johnny"),
            Some(&BTreeSet::from([Rule::Hypocorism]))
        );
    }

    #[test]
    fn rule_three_after_title_removal() {
        let g = graph(&["Mr. John", "Johnny"], &[]);
        assert_eq!(
            g.rules_between("Johnny", "Mr. John"),
            Some(&BTreeSet::from([Rule::TitleStripped]))
        );
        // shared titles alone never connect
        let g = graph(&["Mr. Bennet", "Mr. Collins"], &[]);
        assert!(g.edges().is_empty());
    }

    #[test]
    fn rule_four_coreferential() {
        let l = lex();
        let chains = [chain(&["One-Eye", "Croaker"], &["he"], &l)];
        assert!(coreferential("One-Eye", "Croaker", &chains));
        let g = graph(&["One-Eye", "Croaker"], &chains);
        assert_eq!(
            g.rules_between("Croaker", "One-Eye"),
            Some(&BTreeSet::from([Rule::Coreferential]))
        );
    }

    #[test]
    fn coreferential_requires_never_apart() {
        let l = lex();
        let chains = [chain(&["A", "B"], &[], &l), chain(&["A"], &["he"], &l)];
        assert!(!coreferential("A", "B", &chains));
        let apart = [chain(&["A"], &[], &l), chain(&["B"], &[], &l)];
        assert!(!coreferential("A", "B", &apart));
    }

    #[test]
    fn rule_five_splits_families() {
        let g = graph(&["John Smith", "John Klint", "John"], &[]);
        assert!(!same_component(&g, "John Smith", "John Klint"));
        // the shared first-name vertex sat on the shortest path and is cut off
        let john = g.index_of("John").unwrap();
        assert!(g.vertices().iter().enumerate().all(|(i, _)| !g.has_edge(john, i)));
    }

    #[test]
    fn rule_six_splits_genders() {
        let g = graph(&["Mr. Smith", "Miss Smith"], &[]);
        assert!(!same_component(&g, "Mr. Smith", "Miss Smith"));
        let g = graph(&["Mr. Smith", "Miss Smith", "Smith"], &[]);
        assert!(!same_component(&g, "Mr. Smith", "Miss Smith"));
    }

    #[test]
    fn gender_from_titles_and_pronouns() {
        let l = lex();
        assert_eq!(infer_gender(&alias("Miss Smith"), &[], &l), Gender::Female);
        assert_eq!(infer_gender(&alias("Goblin"), &[], &l), Gender::Unknown);
        let chains = [chain(&["Goblin"], &["he", "his", "he"], &l)];
        assert_eq!(infer_gender(&alias("Goblin"), &chains, &l), Gender::Male);
        let tied = [chain(&["Goblin"], &["he", "she"], &l)];
        assert_eq!(infer_gender(&alias("Goblin"), &tied, &l), Gender::Unknown);
        // ungendered title falls through to pronouns
        let chains = [chain(&["Dr. Lanyon"], &["she"], &l)];
        assert_eq!(infer_gender(&alias("Dr. Lanyon"), &chains, &l), Gender::Female);
    }

    #[test]
    fn graph_is_independent_of_input_order() {
        let raws = ["Mr. John Smith", "John", "Johnny", "Smith", "Miss Smith", "Jack Klint"];
        let forward = graph(&raws, &[]);
        let mut rev = raws;
        rev.reverse();
        assert_eq!(forward, graph(&rev, &[]));
    }
}
