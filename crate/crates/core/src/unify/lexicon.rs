//! Editable word resources used by unification: titles with their gender,
//! the hypocorism gazetteer, and gendered pronouns.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gender {
    Male,
    Female,
    Unknown,
}

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

const TITLES: &str = include_str!("../../data/titles.tsv");
const HYPOCORISMS: &str = include_str!("../../data/hypocorisms.txt");
const PRONOUNS: &str = include_str!("../../data/pronouns.tsv");

/// Lower-cased, trailing periods removed: `Mr.` and `mr` share a key.
pub(crate) fn title_key(word: &str) -> String {
    word.trim_end_matches('.').to_lowercase()
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_gender(code: &str, line: usize) -> Result<Gender, LexiconError> {
    match code.trim() {
        "M" | "m" => Ok(Gender::Male),
        "F" | "f" => Ok(Gender::Female),
        "-" => Ok(Gender::Unknown),
        other => Err(LexiconError::Format {
            line,
            message: format!("unknown gender code {other:?}"),
        }),
    }
}

fn read(path: &Path) -> Result<String, LexiconError> {
    fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Titles keyed by [`title_key`] of each whitespace token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TitleTable {
    titles: BTreeMap<Vec<String>, Gender>,
    longest: usize,
}

impl TitleTable {
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut titles = BTreeMap::new();
        for (line, l) in content_lines(text) {
            let (title, gender) = l.split_once('\t').ok_or_else(|| LexiconError::Format {
                line,
                message: "expected title<TAB>gender".into(),
            })?;
            let key: Vec<String> = title.split_whitespace().map(title_key).collect();
            if key.is_empty() {
                return Err(LexiconError::Format { line, message: "empty title".into() });
            }
            titles.insert(key, parse_gender(gender, line)?);
        }
        let longest = titles.keys().map(Vec::len).max().unwrap_or(0);
        Ok(TitleTable { titles, longest })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        Self::parse(&read(path.as_ref())?)
    }

    /// Number of leading tokens forming the longest title, with its gender.
    pub fn leading_title<S: AsRef<str>>(&self, tokens: &[S]) -> Option<(usize, Gender)> {
        (1..=self.longest.min(tokens.len())).rev().find_map(|k| {
            let key: Vec<String> = tokens[..k].iter().map(|t| title_key(t.as_ref())).collect();
            self.titles.get(&key).map(|g| (k, *g))
        })
    }

    pub fn is_title_word(&self, word: &str) -> bool {
        self.titles.contains_key(&vec![title_key(word)])
    }

    pub fn gender_of(&self, title: &str) -> Option<Gender> {
        let key: Vec<String> = title.split_whitespace().map(title_key).collect();
        self.titles.get(&key).copied()
    }
}

impl Default for TitleTable {
    fn default() -> Self {
        Self::parse(TITLES).expect("bundled title table is valid")
    }
}

/// Equivalence classes of given names; a name may belong to several classes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Gazetteer {
    classes: BTreeMap<String, BTreeSet<usize>>,
}

impl Gazetteer {
    pub fn parse(text: &str) -> Self {
        let mut classes: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
        for (class, (_, l)) in content_lines(text).enumerate() {
            for name in l.split(',').map(str::trim).filter(|n| !n.is_empty()) {
                classes.entry(name.to_lowercase()).or_default().insert(class);
            }
        }
        Gazetteer { classes }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        Ok(Self::parse(&read(path.as_ref())?))
    }

    pub fn bundled() -> Self {
        Self::parse(HYPOCORISMS)
    }

    pub fn keys(&self, name: &str) -> BTreeSet<usize> {
        self.classes.get(&name.to_lowercase()).cloned().unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PronounTable {
    pronouns: BTreeMap<String, Gender>,
}

impl PronounTable {
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut pronouns = BTreeMap::new();
        for (line, l) in content_lines(text) {
            let (word, gender) = l.split_once('\t').ok_or_else(|| LexiconError::Format {
                line,
                message: "expected pronoun<TAB>gender".into(),
            })?;
            pronouns.insert(word.trim().to_lowercase(), parse_gender(gender, line)?);
        }
        Ok(PronounTable { pronouns })
    }

    pub fn gender_of(&self, form: &str) -> Option<Gender> {
        self.pronouns.get(&form.to_lowercase()).copied()
    }
}

impl Default for PronounTable {
    fn default() -> Self {
        Self::parse(PRONOUNS).expect("bundled pronoun table is valid")
    }
}

/// All resources needed by unification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    pub titles: TitleTable,
    pub gazetteer: Gazetteer,
    pub pronouns: PronounTable,
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon {
            titles: TitleTable::default(),
            gazetteer: Gazetteer::bundled(),
            pronouns: PronounTable::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_resources_load() {
        let lex = Lexicon::default();
        assert_eq!(lex.titles.gender_of("Mr."), Some(Gender::Male));
        assert_eq!(lex.titles.gender_of("mr"), Some(Gender::Male));
        assert_eq!(lex.titles.gender_of("Miss"), Some(Gender::Female));
        assert_eq!(lex.titles.gender_of("Dr."), Some(Gender::Unknown));
        assert!(!lex.gazetteer.keys("Johnny").is_disjoint(&lex.gazetteer.keys("John")));
        assert_eq!(lex.pronouns.gender_of("His"), Some(Gender::Male));
    }

    #[test]
    fn longest_leading_title_wins() {
        let table = TitleTable::parse("Lord\tM\nLord High Chancellor\t-\n").unwrap();
        assert_eq!(
            table.leading_title(&["Lord", "High", "Chancellor", "Bleak"]),
            Some((3, Gender::Unknown))
        );
        assert_eq!(table.leading_title(&["Lord", "Byron"]), Some((1, Gender::Male)));
        assert_eq!(table.leading_title(&["Byron"]), None);
    }

    #[test]
    fn bad_gender_code_is_reported() {
        let err = TitleTable::parse("# c\nMr.\tX\n").unwrap_err();
        assert!(matches!(err, LexiconError::Format { line: 2, .. }));
    }
}
