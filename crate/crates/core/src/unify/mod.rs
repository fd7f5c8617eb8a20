//! Character unification: group alias forms into characters and assign
//! every mention to at most one of them.

mod graph;
pub mod lexicon;

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::{Document, Mention, MentionKind, Span};

pub use graph::{build_alias_graph, coreferential, infer_gender, parse_alias, AliasForm, AliasGraph, Rule};
pub use lexicon::{Gazetteer, Gender, Lexicon, LexiconError, PronounTable, TitleTable};

/// What unification needs to know about one coreference chain.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChainEvidence {
    /// Forms of every mention in the chain.
    pub forms: BTreeSet<String>,
    /// Forms of the chain's alias mentions.
    pub alias_forms: BTreeSet<String>,
    pub male: usize,
    pub female: usize,
}

impl ChainEvidence {
    pub fn from_document(doc: &Document, lexicon: &Lexicon) -> Vec<ChainEvidence> {
        doc.coref()
            .iter()
            .map(|chain| {
                let mut ev = ChainEvidence::default();
                for m in chain.mentions() {
                    let form = doc.form(m.span);
                    match lexicon.pronouns.gender_of(&form) {
                        Some(Gender::Male) => ev.male += 1,
                        Some(Gender::Female) => ev.female += 1,
                        _ => {}
                    }
                    if m.is_alias() {
                        ev.alias_forms.insert(form.clone());
                    }
                    ev.forms.insert(form);
                }
                ev
            })
            .collect()
    }
}

/// A unified character. `aliases` is empty only for anonymous gold
/// characters (chains without any alias mention).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterGroup {
    pub aliases: BTreeSet<String>,
    pub mentions: Vec<Mention>,
}

impl CharacterGroup {
    pub fn is_anonymous(&self) -> bool {
        self.aliases.is_empty()
    }

    fn first_span(&self) -> Option<Span> {
        self.mentions.first().map(|m| m.span)
    }

    /// The same character restricted to its alias mentions.
    pub fn alias_mentions_only(&self) -> CharacterGroup {
        CharacterGroup {
            aliases: self.aliases.clone(),
            mentions: self.mentions.iter().copied().filter(Mention::is_alias).collect(),
        }
    }
}

fn finish(mut groups: Vec<CharacterGroup>) -> Vec<CharacterGroup> {
    for g in &mut groups {
        g.mentions.sort();
        g.mentions.dedup_by_key(|m| m.span);
    }
    groups.sort_by_key(|g| g.first_span());
    groups
}

/// Runs the unification pipeline on a document's NER (and optionally
/// coreference) layers. Without coreference, generic mentions are ignored
/// and the rules see no chain evidence.
pub fn unify(doc: &Document, use_coref: bool, lexicon: &Lexicon) -> Vec<CharacterGroup> {
    let chains = if use_coref {
        ChainEvidence::from_document(doc, lexicon)
    } else {
        Vec::new()
    };
    let forms: BTreeSet<String> = doc.ner().iter().map(|m| doc.form(m.span)).collect();
    let graph = build_alias_graph(
        forms.iter().map(|f| parse_alias(f, &lexicon.titles, &lexicon.gazetteer)),
        &chains,
        lexicon,
    );

    let mut component_of = vec![0; graph.vertices().len()];
    let components = graph.components();
    for (c, members) in components.iter().enumerate() {
        for &v in members {
            component_of[v] = c;
        }
    }
    let mut groups: Vec<CharacterGroup> = components
        .iter()
        .map(|members| CharacterGroup {
            aliases: members.iter().map(|&v| graph.vertices()[v].raw.clone()).collect(),
            mentions: Vec::new(),
        })
        .collect();

    let mut character_at: BTreeMap<Span, usize> = BTreeMap::new();
    for m in doc.ner() {
        let form = doc.form(m.span);
        let v = graph.index_of(&form).expect("every NER form is a vertex");
        let c = component_of[v];
        groups[c].mentions.push(*m);
        character_at.insert(m.span, c);
    }

    if use_coref {
        for chain in doc.coref() {
            let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
            for m in chain.mentions().iter().filter(|m| m.is_alias()) {
                if let Some(&c) = character_at.get(&m.span) {
                    *counts.entry(c).or_default() += 1;
                }
            }
            let Some(&best) = counts.values().max() else { continue };
            let mut winners = counts.iter().filter(|(_, &n)| n == best);
            let (&winner, _) = winners.next().expect("non-empty counts");
            if winners.next().is_some() {
                continue;
            }
            for m in chain.mentions().iter().filter(|m| m.kind == MentionKind::Generic) {
                groups[winner].mentions.push(*m);
            }
        }
    }

    finish(groups)
}

/// Gold characters: one per coreference chain. Chains without alias
/// mentions give anonymous characters. NER mentions outside every chain
/// join the first character having their form as an alias, or otherwise
/// form one character per distinct form.
pub fn gold_characters(doc: &Document) -> Vec<CharacterGroup> {
    let mut groups: Vec<CharacterGroup> = doc
        .coref()
        .iter()
        .map(|chain| CharacterGroup {
            aliases: chain
                .mentions()
                .iter()
                .filter(|m| m.is_alias())
                .map(|m| doc.form(m.span))
                .collect(),
            mentions: chain.mentions().to_vec(),
        })
        .collect();

    let in_chains: BTreeSet<Span> = doc.coref().iter().flat_map(|c| c.spans()).collect();
    let mut by_form: BTreeMap<String, usize> = BTreeMap::new();
    for (i, g) in groups.iter().enumerate() {
        for a in &g.aliases {
            by_form.entry(a.clone()).or_insert(i);
        }
    }
    for m in doc.ner().iter().filter(|m| !in_chains.contains(&m.span)) {
        let form = doc.form(m.span);
        let idx = *by_form.entry(form.clone()).or_insert_with(|| {
            groups.push(CharacterGroup {
                aliases: BTreeSet::from([form]),
                mentions: Vec::new(),
            });
            groups.len() - 1
        });
        groups[idx].mentions.push(*m);
    }
    finish(groups)
}
