//! Strict GraphML serialization of character networks.
//!
//! Nodes carry an `aliases` string (semicolon-joined, sorted), edges an
//! integer `weight`. Node ids are `n0..`, edge ids `e0..` in key order.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{CharacterNetwork, NetworkError};

pub const ALIAS_SEPARATOR: char = ';';

#[derive(Debug, thiserror::Error)]
pub enum GraphmlError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed GraphML: {0}")]
    Xml(String),
    #[error("{element} is missing `{name}`")]
    MissingAttribute { element: String, name: String },
    #[error("invalid GraphML value: {0}")]
    Invalid(String),
    #[error("alias {0:?} contains the separator ';'")]
    SeparatorInAlias(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

impl From<quick_xml::Error> for GraphmlError {
    fn from(e: quick_xml::Error) -> Self {
        GraphmlError::Xml(e.to_string())
    }
}

impl From<quick_xml::events::attributes::AttrError> for GraphmlError {
    fn from(e: quick_xml::events::attributes::AttrError) -> Self {
        GraphmlError::Xml(e.to_string())
    }
}

fn escape(s: &str) -> String {
    quick_xml::escape::escape(s).into_owned()
}

/// Splits a `;`-joined alias list, trimming and skipping empty entries.
pub fn split_aliases(joined: &str) -> BTreeSet<String> {
    joined
        .split(ALIAS_SEPARATOR)
        .map(str::trim)
        .filter(|a| !a.is_empty())
        .map(String::from)
        .collect()
}

impl CharacterNetwork {
    pub fn to_graphml(&self) -> Result<String, GraphmlError> {
        let mut out = String::new();
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
        out.push_str("  <key id=\"aliases\" for=\"node\" attr.name=\"aliases\" attr.type=\"string\"/>\n");
        out.push_str("  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"int\"/>\n");
        out.push_str("  <graph id=\"G\" edgedefault=\"undirected\">\n");
        for (i, aliases) in self.vertices().iter().enumerate() {
            if let Some(bad) = aliases.iter().find(|a| a.contains(ALIAS_SEPARATOR)) {
                return Err(GraphmlError::SeparatorInAlias(bad.clone()));
            }
            let joined: Vec<&str> = aliases.iter().map(String::as_str).collect();
            let _ = writeln!(
                out,
                "    <node id=\"n{i}\">\n      <data key=\"aliases\">{}</data>\n    </node>",
                escape(&joined.join(";"))
            );
        }
        for (k, (&(a, b), w)) in self.edges().iter().enumerate() {
            let _ = writeln!(
                out,
                "    <edge id=\"e{k}\" source=\"n{a}\" target=\"n{b}\">\n      <data key=\"weight\">{w}</data>\n    </edge>"
            );
        }
        out.push_str("  </graph>\n</graphml>\n");
        Ok(out)
    }

    pub fn from_graphml(text: &str) -> Result<CharacterNetwork, GraphmlError> {
        parse_strict(text)
    }
}

pub fn write_graphml(net: &CharacterNetwork, path: impl AsRef<Path>) -> Result<(), GraphmlError> {
    let path = path.as_ref();
    fs::write(path, net.to_graphml()?).map_err(|source| GraphmlError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_graphml(path: impl AsRef<Path>) -> Result<CharacterNetwork, GraphmlError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| GraphmlError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_strict(&text)
}

fn attribute(e: &BytesStart<'_>, name: &str) -> Result<Option<String>, GraphmlError> {
    for attr in e.attributes() {
        let attr = attr?;
        if attr.key.as_ref() == name.as_bytes() {
            return Ok(Some(attr.unescape_value()?.into_owned()));
        }
    }
    Ok(None)
}

fn required(e: &BytesStart<'_>, name: &str) -> Result<String, GraphmlError> {
    attribute(e, name)?.ok_or_else(|| GraphmlError::MissingAttribute {
        element: String::from_utf8_lossy(e.name().as_ref()).into_owned(),
        name: name.to_string(),
    })
}

enum Pending {
    Node { id: String, aliases: Option<String> },
    Edge { source: String, target: String, weight: Option<String> },
}

struct RawEdge {
    source: String,
    target: String,
    weight: String,
}

fn apply_data(pending: &mut Option<Pending>, key: &str, value: String) {
    match pending {
        Some(Pending::Node { aliases, .. }) if key == "aliases" => *aliases = Some(value),
        Some(Pending::Edge { weight, .. }) if key == "weight" => *weight = Some(value),
        _ => {}
    }
}

fn parse_strict(text: &str) -> Result<CharacterNetwork, GraphmlError> {
    let mut reader = Reader::from_str(text);
    // key id -> attribute name
    let mut keys: HashMap<String, String> = HashMap::new();
    let mut node_ids: HashMap<String, usize> = HashMap::new();
    let mut vertices: Vec<BTreeSet<String>> = Vec::new();
    let mut raw_edges: Vec<RawEdge> = Vec::new();
    let mut pending: Option<Pending> = None;
    let mut data_key: Option<String> = None;
    let mut data_text = String::new();

    let mut finish = |pending: Option<Pending>,
                      vertices: &mut Vec<BTreeSet<String>>,
                      raw_edges: &mut Vec<RawEdge>|
     -> Result<(), GraphmlError> {
        match pending {
            Some(Pending::Node { id, aliases }) => {
                let aliases = aliases.ok_or_else(|| GraphmlError::MissingAttribute {
                    element: format!("node {id}"),
                    name: "aliases".into(),
                })?;
                if node_ids.insert(id.clone(), vertices.len()).is_some() {
                    return Err(GraphmlError::Invalid(format!("duplicate node id {id}")));
                }
                vertices.push(split_aliases(&aliases));
            }
            Some(Pending::Edge { source, target, weight }) => {
                let weight = weight.ok_or_else(|| GraphmlError::MissingAttribute {
                    element: format!("edge {source}-{target}"),
                    name: "weight".into(),
                })?;
                raw_edges.push(RawEdge { source, target, weight });
            }
            None => {}
        }
        Ok(())
    };

    loop {
        match reader.read_event()? {
            Event::Start(e) => match e.name().as_ref() {
                b"node" => {
                    pending = Some(Pending::Node { id: required(&e, "id")?, aliases: None });
                }
                b"edge" => {
                    pending = Some(Pending::Edge {
                        source: required(&e, "source")?,
                        target: required(&e, "target")?,
                        weight: None,
                    });
                }
                b"data" => {
                    let key = required(&e, "key")?;
                    data_key = Some(keys.get(&key).cloned().unwrap_or(key));
                    data_text.clear();
                }
                b"key" => {
                    let id = required(&e, "id")?;
                    let name = attribute(&e, "attr.name")?.unwrap_or_else(|| id.clone());
                    keys.insert(id, name);
                }
                _ => {}
            },
            Event::Empty(e) => match e.name().as_ref() {
                b"key" => {
                    let id = required(&e, "id")?;
                    let name = attribute(&e, "attr.name")?.unwrap_or_else(|| id.clone());
                    keys.insert(id, name);
                }
                b"node" => {
                    let p = Pending::Node { id: required(&e, "id")?, aliases: None };
                    finish(Some(p), &mut vertices, &mut raw_edges)?;
                }
                b"edge" => {
                    let p = Pending::Edge {
                        source: required(&e, "source")?,
                        target: required(&e, "target")?,
                        weight: None,
                    };
                    finish(Some(p), &mut vertices, &mut raw_edges)?;
                }
                b"data" => {
                    let key = required(&e, "key")?;
                    let key = keys.get(&key).cloned().unwrap_or(key);
                    apply_data(&mut pending, &key, String::new());
                }
                _ => {}
            },
            Event::Text(t) => {
                if data_key.is_some() {
                    data_text.push_str(&t.unescape()?);
                }
            }
            Event::CData(t) => {
                if data_key.is_some() {
                    data_text.push_str(&String::from_utf8_lossy(&t));
                }
            }
            Event::End(e) => match e.name().as_ref() {
                b"data" => {
                    if let Some(key) = data_key.take() {
                        apply_data(&mut pending, &key, std::mem::take(&mut data_text));
                    }
                }
                b"node" | b"edge" => finish(pending.take(), &mut vertices, &mut raw_edges)?,
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
    }

    let mut edges: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for e in raw_edges {
        let lookup = |id: &str| {
            node_ids
                .get(id)
                .copied()
                .ok_or_else(|| GraphmlError::Invalid(format!("edge endpoint {id} is not a node")))
        };
        let (a, b) = (lookup(&e.source)?, lookup(&e.target)?);
        let w: u64 = e
            .weight
            .trim()
            .parse()
            .map_err(|_| GraphmlError::Invalid(format!("weight {:?} is not a positive integer", e.weight)))?;
        if edges.insert((a.min(b), a.max(b)), w).is_some() {
            return Err(GraphmlError::Invalid(format!(
                "duplicate edge {}-{}",
                e.source, e.target
            )));
        }
    }
    Ok(CharacterNetwork::new(vertices, edges)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn aliases(list: &[&str]) -> BTreeSet<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    fn liana() -> CharacterNetwork {
        CharacterNetwork::new(
            vec![aliases(&["Princess Liana", "Liana"]), aliases(&["Zarth Arn"])],
            [((0, 1), 2)],
        )
        .unwrap()
    }

    #[test]
    fn writes_two_nodes_one_edge() {
        let xml = liana().to_graphml().unwrap();
        assert_eq!(xml.matches("<node ").count(), 2);
        assert_eq!(xml.matches("<edge ").count(), 1);
        assert!(xml.contains("<data key=\"aliases\">Liana;Princess Liana</data>"));
        assert!(xml.contains("<edge id=\"e0\" source=\"n0\" target=\"n1\">"));
        assert!(xml.contains("<data key=\"weight\">2</data>"));
        assert_eq!(CharacterNetwork::from_graphml(&xml).unwrap(), liana());
    }

    #[test]
    fn empty_network_is_valid() {
        let xml = CharacterNetwork::default().to_graphml().unwrap();
        assert!(xml.contains("<graph id=\"G\" edgedefault=\"undirected\">"));
        assert_eq!(CharacterNetwork::from_graphml(&xml).unwrap(), CharacterNetwork::default());
    }

    #[test]
    fn missing_weight_is_an_error() {
        let xml = liana().to_graphml().unwrap().replace("<data key=\"weight\">2</data>", "");
        assert!(matches!(
            CharacterNetwork::from_graphml(&xml),
            Err(GraphmlError::MissingAttribute { ref name, .. }) if name == "weight"
        ));
    }

    #[test]
    fn empty_aliases_give_anonymous_vertex() {
        let net = CharacterNetwork::new(vec![BTreeSet::new()], []).unwrap();
        let xml = net.to_graphml().unwrap();
        assert_eq!(CharacterNetwork::from_graphml(&xml).unwrap(), net);
        let self_closing = xml.replace("<data key=\"aliases\"></data>", "<data key=\"aliases\"/>");
        assert_eq!(CharacterNetwork::from_graphml(&self_closing).unwrap(), net);
    }

    #[test]
    fn special_characters_are_escaped() {
        let net = CharacterNetwork::new(vec![aliases(&["Tom & Jerry <2>", "\"Q\""])], []).unwrap();
        let xml = net.to_graphml().unwrap();
        assert!(xml.contains("&amp;"));
        assert_eq!(CharacterNetwork::from_graphml(&xml).unwrap(), net);
    }

    #[test]
    fn separator_inside_alias_is_refused() {
        let net = CharacterNetwork::new(vec![aliases(&["a;b"])], []).unwrap();
        assert!(matches!(net.to_graphml(), Err(GraphmlError::SeparatorInAlias(_))));
    }

    #[test]
    fn foreign_key_ids_are_resolved_by_attribute_name() {
        let xml = r#"<graphml>
  <key id="d0" for="node" attr.name="aliases" attr.type="string"/>
  <key id="d1" for="edge" attr.name="weight" attr.type="int"/>
  <graph edgedefault="undirected">
    <edge source="b" target="a"><data key="d1">7</data></edge>
    <node id="a"><data key="d0">Anna</data></node>
    <node id="b"><data key="d0">Boris; Bo</data></node>
  </graph>
</graphml>"#;
        let net = CharacterNetwork::from_graphml(xml).unwrap();
        assert_eq!(net.vertices()[1], aliases(&["Bo", "Boris"]));
        assert_eq!(net.weight(0, 1), 7);
    }

    #[test]
    fn bad_documents_are_rejected() {
        assert!(CharacterNetwork::from_graphml("<graphml><graph><node id=\"a\"></graph>").is_err());
        let dangling = r#"<graphml><graph><node id="a"><data key="aliases">A</data></node>
            <edge source="a" target="z"><data key="weight">1</data></edge></graph></graphml>"#;
        assert!(matches!(CharacterNetwork::from_graphml(dangling), Err(GraphmlError::Invalid(_))));
    }
}
