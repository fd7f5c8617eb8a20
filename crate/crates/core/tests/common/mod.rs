//! Shared fixtures for integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use charnet::corpus::{read_document, Document, Span};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture(name: &str) -> Document {
    read_document(fixture_path(name)).unwrap()
}

/// Given name, surname, male. No name shares a token with another, none
/// is a known hypocorism and none is a title.
pub const PERSONAE: [(&str, &str, bool); 12] = [
    ("Alaric", "Thorne", true),
    ("Brynn", "Castell", false),
    ("Corvin", "Ashby", true),
    ("Delphine", "Marlow", false),
    ("Evander", "Quill", true),
    ("Fenna", "Holloway", false),
    ("Gideon", "Farrow", true),
    ("Hester", "Vane", false),
    ("Idris", "Kettering", true),
    ("Juniper", "Blackwood", false),
    ("Lucan", "Redfern", true),
    ("Mireille", "Stroud", false),
];

const FILLER: [&str; 5] = [
    "The rain kept falling on the slate roofs of the quiet old town .",
    "Somewhere below the harbour bells rang twice and then fell silent again .",
    "A cart rattled past the closed shutters of the baker on the corner .",
    "Nobody in the street seemed to notice how late the evening had grown .",
    "Far away a dog barked at the lanterns swinging in the cold wind .",
];

struct Builder {
    tokens: Vec<String>,
    ner: Vec<Span>,
    chains: Vec<Vec<Span>>,
    introduced: Vec<bool>,
}

impl Builder {
    fn words(&mut self, text: &str) {
        self.tokens.extend(text.split_whitespace().map(String::from));
    }

    fn mention(&mut self, c: usize, text: &str, alias: bool) {
        let start = self.tokens.len();
        self.words(text);
        let span = Span::new(start, self.tokens.len());
        if alias {
            self.ner.push(span);
        }
        self.chains[c].push(span);
    }

    fn name(&mut self, c: usize, rng: &mut ChaCha8Rng) {
        let (first, last, _) = PERSONAE[c];
        let form = if !self.introduced[c] {
            self.introduced[c] = true;
            format!("{first} {last}")
        } else {
            match rng.gen_range(0..3) {
                0 => format!("{first} {last}"),
                1 => first.to_string(),
                _ => last.to_string(),
            }
        };
        self.mention(c, &form, true);
    }

    fn subject(&mut self, c: usize) {
        let he = PERSONAE[c].2;
        self.mention(c, if he { "he" } else { "she" }, false);
    }

    fn object(&mut self, c: usize) {
        let he = PERSONAE[c].2;
        self.mention(c, if he { "him" } else { "her" }, false);
    }

    fn filler(&mut self, rng: &mut ChaCha8Rng) {
        // three sentences: wider than a 32-token window
        for _ in 0..3 {
            let s = *FILLER.choose(rng).unwrap();
            self.words(s);
        }
    }
}

/// A synthetic story with `n_characters` characters over `n_scenes` scenes.
///
/// Each character has a single gold chain holding every mention of it, and
/// its first mention is its full name, so unifying the gold annotations
/// recovers exactly the gold characters. Scenes are separated by filler
/// wider than the default window. Half of the scenes link their two
/// characters only through a pronoun.
pub fn synthetic_document(id: &str, n_characters: usize, n_scenes: usize, seed: u64) -> Document {
    assert!((2..=PERSONAE.len()).contains(&n_characters));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Builder {
        tokens: Vec::new(),
        ner: Vec::new(),
        chains: vec![Vec::new(); n_characters],
        introduced: vec![false; n_characters],
    };
    for scene in 0..n_scenes {
        let (a, c) = if scene * 2 + 1 < n_characters {
            (scene * 2, scene * 2 + 1)
        } else if scene * 2 < n_characters {
            (scene * 2, 0)
        } else {
            let a = rng.gen_range(0..n_characters);
            let mut c = rng.gen_range(0..n_characters - 1);
            if c >= a {
                c += 1;
            }
            (a, c)
        };
        if rng.gen_bool(0.5) {
            b.name(a, &mut rng);
            b.words("greeted");
            b.name(c, &mut rng);
            b.words("and");
            b.subject(a);
            b.words("smiled at");
            b.object(c);
            b.words(".");
        } else {
            b.name(a, &mut rng);
            b.words("entered the old hall .");
            b.filler(&mut rng);
            b.name(c, &mut rng);
            b.words("saw");
            b.object(a);
            b.words("there , and");
            b.subject(c);
            b.words("waved .");
        }
        b.filler(&mut rng);
    }
    let chains: Vec<Vec<Span>> = b.chains.into_iter().filter(|c| !c.is_empty()).collect();
    Document::new(id, b.tokens, b.ner, chains).unwrap()
}

/// The hand-written fixtures plus a few synthetic stories.
pub fn fixture_corpus() -> Vec<Document> {
    let mut docs: Vec<Document> = ["inn.json", "goblin.json", "liana.json"]
        .iter()
        .map(|n| fixture(n))
        .collect();
    for (i, seed) in [11u64, 12, 13].into_iter().enumerate() {
        docs.push(synthetic_document(&format!("story{i}"), 12, 30, seed));
    }
    docs
}
