use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CorpusError, Document, Span};

/// Serialized form of a [`Document`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentFile {
    pub id: String,
    pub tokens: Vec<String>,
    #[serde(default)]
    pub ner: Vec<Span>,
    #[serde(default)]
    pub coref: Vec<Vec<Span>>,
}

impl From<&Document> for DocumentFile {
    fn from(doc: &Document) -> Self {
        DocumentFile {
            id: doc.id().to_string(),
            tokens: doc.token_texts().map(String::from).collect(),
            ner: doc.ner_spans(),
            coref: doc.coref_spans(),
        }
    }
}

impl TryFrom<DocumentFile> for Document {
    type Error = CorpusError;

    fn try_from(file: DocumentFile) -> Result<Self, Self::Error> {
        Document::new(file.id, file.tokens, file.ner, file.coref)
    }
}

impl Document {
    pub fn from_json_str(text: &str) -> Result<Document, CorpusError> {
        let file: DocumentFile =
            serde_json::from_str(text).map_err(|e| CorpusError::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
        Document::try_from(file)
    }

    pub fn to_json_string(&self) -> String {
        let mut out = serde_json::to_string_pretty(&DocumentFile::from(self))
            .expect("document serialization cannot fail");
        out.push('\n');
        out
    }
}

pub fn read_document(path: impl AsRef<Path>) -> Result<Document, CorpusError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Document::from_json_str(&text)
}

pub fn write_document(doc: &Document, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    fs::write(path, doc.to_json_string()).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}
