//! Lenient reader for GraphML-like network answers.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::Serialize;

use super::LlmError;
use crate::network::{split_aliases, CharacterNetwork};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LenientGraphParse {
    #[serde(skip)]
    pub network: CharacterNetwork,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Tag {
    name: String,
    closing: bool,
    self_closing: bool,
    attrs: BTreeMap<String, String>,
}

#[derive(Debug)]
enum Item {
    Tag(Tag),
    Text(String),
}

fn unescape(raw: &str, diagnostics: &mut Vec<String>) -> String {
    match quick_xml::escape::unescape(raw) {
        Ok(s) => s.into_owned(),
        Err(_) => {
            diagnostics.push(format!("could not decode entities in {raw:?}; kept as is"));
            raw.to_string()
        }
    }
}

/// Parses the inside of `<...>`, tolerating unquoted values.
fn parse_tag(inner: &str, diagnostics: &mut Vec<String>) -> Option<Tag> {
    let mut s = inner.trim();
    let closing = s.starts_with('/');
    if closing {
        s = s[1..].trim_start();
    }
    let self_closing = s.ends_with('/');
    if self_closing {
        s = s[..s.len() - 1].trim_end();
    }
    let name_len = s.find(|c: char| c.is_whitespace()).unwrap_or(s.len());
    let name = s[..name_len].to_ascii_lowercase();
    if name.is_empty() {
        return None;
    }
    let mut attrs = BTreeMap::new();
    let mut rest = s[name_len..].trim_start();
    while !rest.is_empty() {
        let key_len = rest
            .find(|c: char| c == '=' || c.is_whitespace())
            .unwrap_or(rest.len());
        let key = rest[..key_len].to_ascii_lowercase();
        rest = rest[key_len..].trim_start();
        let Some(after_eq) = rest.strip_prefix('=') else {
            attrs.insert(key, String::new());
            continue;
        };
        rest = after_eq.trim_start();
        let value;
        match rest.chars().next() {
            Some(q @ ('"' | '\'')) => match rest[1..].find(q) {
                Some(close) => {
                    value = &rest[1..1 + close];
                    rest = &rest[close + 2..];
                }
                None => {
                    value = &rest[1..];
                    rest = "";
                }
            },
            _ => {
                let len = rest.find(char::is_whitespace).unwrap_or(rest.len());
                value = &rest[..len];
                rest = &rest[len..];
            }
        }
        attrs.insert(key, unescape(value, diagnostics));
        rest = rest.trim_start();
    }
    Some(Tag {
        name,
        closing,
        self_closing,
        attrs,
    })
}

fn lex(text: &str, diagnostics: &mut Vec<String>) -> Vec<Item> {
    let mut items = Vec::new();
    let mut pos = 0;
    while let Some(lt) = text[pos..].find('<').map(|i| pos + i) {
        if lt > pos {
            items.push(Item::Text(text[pos..lt].to_string()));
        }
        let rest = &text[lt..];
        let skip_to = |pat: &str| rest.find(pat).map(|i| lt + i + pat.len()).unwrap_or(text.len());
        if rest.starts_with("<!--") {
            pos = skip_to("-->");
            continue;
        }
        if rest.starts_with("<?") || rest.starts_with("<!") {
            pos = skip_to(">");
            continue;
        }
        // find the closing '>' outside quotes
        let mut quote = None;
        let mut close = None;
        for (i, c) in rest.char_indices().skip(1) {
            match (quote, c) {
                (Some(q), c) if c == q => quote = None,
                (Some(_), _) => {}
                (None, '"' | '\'') => quote = Some(c),
                (None, '>') => {
                    close = Some(i);
                    break;
                }
                (None, '<') => break,
                _ => {}
            }
        }
        match close {
            Some(i) => {
                if let Some(tag) = parse_tag(&rest[1..i], diagnostics) {
                    items.push(Item::Tag(tag));
                }
                pos = lt + i + 1;
            }
            None => {
                // a lone '<' is plain text
                items.push(Item::Text("<".to_string()));
                pos = lt + 1;
            }
        }
    }
    if pos < text.len() {
        items.push(Item::Text(text[pos..].to_string()));
    }
    items
}

#[derive(Debug, Default)]
struct Element {
    edge: bool,
    attrs: BTreeMap<String, String>,
}

impl Element {
    /// First present attribute among `names`.
    fn get(&self, names: &[&str]) -> Option<&str> {
        names.iter().find_map(|n| self.attrs.get(*n)).map(String::as_str)
    }
}

const ALIAS_NAMES: [&str; 2] = ["aliases", "alias"];

/// Recovers a network from a GraphML-like answer.
///
/// Keys declared anywhere are honoured; only elements inside `<graph>` are
/// read when one is present. Node aliases and edge weights may come as
/// attributes or `<data>` children. Any `</node>` or `</edge>` closes the
/// current element. Edges without weight count 1; edges naming an unknown
/// node are dropped. Every repair adds a diagnostic.
pub fn parse_llm_graph(raw: &str) -> Result<LenientGraphParse, LlmError> {
    let mut diagnostics = Vec::new();
    let items = lex(raw, &mut diagnostics);

    let mut key_names: BTreeMap<String, String> = BTreeMap::new();
    for item in &items {
        if let Item::Tag(t) = item {
            if t.name == "key" && !t.closing {
                if let Some(id) = t.attrs.get("id") {
                    let name = t.attrs.get("attr.name").unwrap_or(id);
                    key_names.insert(id.clone(), name.to_ascii_lowercase());
                }
            }
        }
    }

    let graph_start = items
        .iter()
        .position(|i| matches!(i, Item::Tag(t) if t.name == "graph" && !t.closing));
    let region: &[Item] = match graph_start {
        Some(start) => {
            let end = items[start..]
                .iter()
                .position(|i| matches!(i, Item::Tag(t) if t.name == "graph" && t.closing))
                .map_or(items.len(), |e| start + e);
            &items[start + 1..end]
        }
        None => &items,
    };

    let mut elements: Vec<Element> = Vec::new();
    let mut current: Option<Element> = None;
    let mut data_key: Option<String> = None;
    let mut data_text = String::new();
    for item in region {
        match item {
            Item::Text(t) => {
                if data_key.is_some() {
                    data_text.push_str(t);
                }
            }
            Item::Tag(t) => match (t.name.as_str(), t.closing) {
                ("node" | "edge", false) => {
                    if let Some(open) = current.take() {
                        diagnostics.push(format!(
                            "{} left open before a new <{}>; closed",
                            if open.edge { "edge" } else { "node" },
                            t.name
                        ));
                        elements.push(open);
                    }
                    let el = Element {
                        edge: t.name == "edge",
                        attrs: t.attrs.clone(),
                    };
                    if t.self_closing {
                        elements.push(el);
                    } else {
                        current = Some(el);
                    }
                }
                ("node" | "edge", true) => match current.take() {
                    Some(el) => {
                        let kind = if el.edge { "edge" } else { "node" };
                        if kind != t.name {
                            diagnostics.push(format!("{kind} closed by </{}>", t.name));
                        }
                        elements.push(el);
                    }
                    None => diagnostics.push(format!("stray </{}> ignored", t.name)),
                },
                ("data", false) => {
                    let key = t.attrs.get("key").cloned().unwrap_or_default();
                    if t.self_closing {
                        continue;
                    }
                    data_key = Some(key);
                    data_text.clear();
                }
                ("data", true) => {
                    if let (Some(key), Some(el)) = (data_key.take(), current.as_mut()) {
                        let name = key_names.get(&key).cloned().unwrap_or(key.to_ascii_lowercase());
                        let value = unescape(data_text.trim(), &mut diagnostics);
                        el.attrs.insert(name, value);
                    }
                }
                _ => {}
            },
        }
    }
    if let Some(open) = current.take() {
        diagnostics.push(format!(
            "{} left open at end of input; closed",
            if open.edge { "edge" } else { "node" }
        ));
        elements.push(open);
    }

    let mut ids: BTreeMap<String, usize> = BTreeMap::new();
    let mut vertices: Vec<BTreeSet<String>> = Vec::new();
    for (k, el) in elements.iter().filter(|e| !e.edge).enumerate() {
        let id = match el.get(&["id"]) {
            Some(id) => id.to_string(),
            None => {
                diagnostics.push(format!("node #{k} has no id; edges cannot reach it"));
                format!("\u{0}anonymous{k}")
            }
        };
        if ids.contains_key(&id) {
            diagnostics.push(format!("duplicate node id {id:?}; later node ignored"));
            continue;
        }
        let aliases = match el.get(&ALIAS_NAMES) {
            Some(a) => split_aliases(a),
            None => {
                diagnostics.push(format!("node {id:?} has no aliases"));
                BTreeSet::new()
            }
        };
        ids.insert(id, vertices.len());
        vertices.push(aliases);
    }
    if vertices.is_empty() {
        return Err(LlmError::NoNodes);
    }

    let mut edges: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for el in elements.iter().filter(|e| e.edge) {
        let (Some(src), Some(dst)) = (el.get(&["source"]), el.get(&["target"])) else {
            diagnostics.push("edge without source or target dropped".to_string());
            continue;
        };
        let (Some(&a), Some(&b)) = (ids.get(src), ids.get(dst)) else {
            diagnostics.push(format!("edge {src:?}-{dst:?} names an unknown node; dropped"));
            continue;
        };
        if a == b {
            diagnostics.push(format!("self-loop on {src:?} dropped"));
            continue;
        }
        let weight = match el.get(&["weight"]) {
            None => {
                diagnostics.push(format!("edge {src:?}-{dst:?} has no weight; using 1"));
                1
            }
            Some(w) => match w.trim().parse::<f64>() {
                Ok(x) if x.is_finite() && x >= 0.5 => {
                    if x.fract() != 0.0 {
                        diagnostics.push(format!("edge {src:?}-{dst:?} weight {w} rounded"));
                    }
                    x.round() as u64
                }
                _ => {
                    diagnostics.push(format!("edge {src:?}-{dst:?} has unusable weight {w:?}; dropped"));
                    continue;
                }
            },
        };
        let key = (a.min(b), a.max(b));
        if let Some(prev) = edges.get_mut(&key) {
            diagnostics.push(format!("edge {src:?}-{dst:?} repeated; weights summed"));
            *prev += weight;
        } else {
            edges.insert(key, weight);
        }
    }
    let network = CharacterNetwork::new(vertices, edges)?;
    Ok(LenientGraphParse { network, diagnostics })
}
