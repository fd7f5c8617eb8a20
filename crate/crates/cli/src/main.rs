//! `charnet`: extract, score and stress-test character networks.

mod output;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use charnet::corpus::{litbank, read_document, Document, WordLists};
use charnet::llm::{parse_llm_graph, parse_tagged_text};
use charnet::measures::network_scores;
use charnet::network::{alias_mentions_only, extract_network, read_graphml, CharacterNetwork, WindowConfig};
use charnet::perturb::{run_sweeps, write_csv, PerturbationKind, SweepConfig, DEFAULT_MAX_SPAN_LEN};
use charnet::unify::{gold_characters, unify, Gazetteer, Lexicon, TitleTable};

use output::{emit, RunManifest};

const GAZETTEER_VAR: &str = "CHARNET_GAZETTEER";
const TITLES_VAR: &str = "CHARNET_TITLES";

#[derive(Parser)]
#[command(name = "charnet", version, about = "Character network extraction and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract a co-occurrence network from a document.
    Extract {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
        window: u64,
        /// Ignore coreference chains (alias mentions only).
        #[arg(long)]
        no_coref: bool,
        /// Use the coreference chains as characters instead of unifying.
        #[arg(long)]
        gold: bool,
    },
    /// Score a predicted network against a gold one.
    Eval {
        pred: PathBuf,
        gold: PathBuf,
        /// JSON output; printed to stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Degrade a gold document step by step and score every recorded step.
    Sweep {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        kinds: Vec<PerturbationKind>,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
        #[arg(long, default_value_t = 1)]
        record_every: usize,
        #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
        window: u64,
        #[arg(long)]
        no_coref: bool,
        #[arg(long, default_value_t = DEFAULT_MAX_SPAN_LEN)]
        max_span_len: usize,
        /// Exit with status 3 when a sweep saturates before its last step.
        #[arg(long)]
        strict: bool,
    },
    /// Convert a layered entity file (and optional coreference file) into a
    /// document with flat NER.
    Flatten {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        coref: Option<PathBuf>,
        /// Document id; defaults to the input file stem.
        #[arg(long)]
        id: Option<String>,
        #[arg(long)]
        determiners: Option<PathBuf>,
        #[arg(long)]
        stopwords: Option<PathBuf>,
    },
    /// Turn an LLM answer into a GraphML network.
    IngestLlm {
        #[arg(long, value_enum)]
        format: LlmFormat,
        input: PathBuf,
        /// Reference document whose tokens the tagged text is aligned to.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
        window: u64,
        #[arg(long)]
        stopwords: Option<PathBuf>,
    },
    /// List documents whose gold network has at least M characters.
    FilterCorpus {
        dir: PathBuf,
        #[arg(long, default_value_t = 10)]
        min_characters: usize,
        /// Also write the ids to this file.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LlmFormat {
    CorefTags,
    Graph,
}

fn load_lexicon(manifest: &mut RunManifest) -> Result<Lexicon> {
    let mut lexicon = Lexicon::default();
    if let Some(path) = std::env::var_os(GAZETTEER_VAR) {
        let path = PathBuf::from(path);
        lexicon.gazetteer = Gazetteer::from_file(&path)
            .with_context(|| format!("cannot load gazetteer from {}", path.display()))?;
        manifest.set("gazetteer", path.display().to_string()).input(&path)?;
    }
    if let Some(path) = std::env::var_os(TITLES_VAR) {
        let path = PathBuf::from(path);
        lexicon.titles = TitleTable::from_file(&path)
            .with_context(|| format!("cannot load titles from {}", path.display()))?;
        manifest.set("titles", path.display().to_string()).input(&path)?;
    }
    Ok(lexicon)
}

fn word_lists(determiners: Option<&Path>, stopwords: Option<&Path>, manifest: &mut RunManifest) -> Result<WordLists> {
    let mut lists = WordLists::default();
    if let Some(p) = determiners {
        lists.determiners = WordLists::read_list(p)?;
        manifest.input(p)?;
    }
    if let Some(p) = stopwords {
        lists.stopwords = WordLists::read_list(p)?;
        manifest.input(p)?;
    }
    Ok(lists)
}

fn window_config(window: u64) -> Result<WindowConfig> {
    Ok(WindowConfig::new(window as usize)?)
}

fn graphml_bytes(net: &CharacterNetwork) -> Result<Vec<u8>> {
    Ok(net.to_graphml()?.into_bytes())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Extract {
            input,
            output,
            window,
            no_coref,
            gold,
        } => {
            let mut manifest = RunManifest::new("extract");
            manifest
                .set("window", window)
                .set("coref", !no_coref)
                .set("gold", gold)
                .input(&input)?;
            let lexicon = load_lexicon(&mut manifest)?;
            let doc = read_document(&input)?;
            let characters = if gold {
                let chars = gold_characters(&doc);
                if no_coref {
                    alias_mentions_only(&chars)
                } else {
                    chars
                }
            } else {
                unify(&doc, !no_coref, &lexicon)
            };
            let net = extract_network(&characters, &window_config(window)?);
            emit(&output, &graphml_bytes(&net)?, &manifest)?;
        }
        Command::Eval { pred, gold, output } => {
            let p = read_graphml(&pred)?;
            let g = read_graphml(&gold)?;
            let scores = network_scores(&p, &g);
            let mut text = serde_json::to_string_pretty(&scores)?;
            text.push('\n');
            match output {
                Some(out) => {
                    let mut manifest = RunManifest::new("eval");
                    manifest.input(&pred)?.input(&gold)?;
                    emit(&out, text.as_bytes(), &manifest)?;
                }
                None => print!("{text}"),
            }
        }
        Command::Sweep {
            input,
            output,
            kinds,
            steps,
            seeds,
            record_every,
            window,
            no_coref,
            max_span_len,
            strict,
        } => {
            let mut manifest = RunManifest::new("sweep");
            let kind_names: Vec<&str> = kinds.iter().map(|k| k.name()).collect();
            manifest
                .set("kinds", &kind_names)
                .set("steps", steps)
                .set("seeds", &seeds)
                .set("record_every", record_every)
                .set("window", window)
                .set("coref", !no_coref)
                .set("max_span_len", max_span_len)
                .input(&input)?;
            let lexicon = load_lexicon(&mut manifest)?;
            let gold = read_document(&input)?;
            let config = SweepConfig {
                kinds,
                steps,
                record_every,
                seed: 0,
                max_span_len,
                window: window as usize,
                use_coref: !no_coref,
            };
            let outcomes = run_sweeps(&gold, &gold, &config, &seeds, &lexicon)?;
            let mut csv = Vec::new();
            write_csv(&mut csv, &outcomes)?;
            let saturated: Vec<(u64, usize)> = outcomes
                .iter()
                .filter_map(|o| o.saturated_at.map(|s| (o.seed, s)))
                .collect();
            manifest.set("saturated", &saturated);
            emit(&output, &csv, &manifest)?;
            for (seed, step) in &saturated {
                eprintln!("seed {seed}: no perturbation applicable after step {step}");
            }
            if strict && !saturated.is_empty() {
                return Ok(ExitCode::from(3));
            }
        }
        Command::Flatten {
            input,
            output,
            coref,
            id,
            determiners,
            stopwords,
        } => {
            let mut manifest = RunManifest::new("flatten");
            manifest.input(&input)?;
            if let Some(c) = &coref {
                manifest.input(c)?;
            }
            let lists = word_lists(determiners.as_deref(), stopwords.as_deref(), &mut manifest)?;
            let id = id.unwrap_or_else(|| {
                input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
            });
            manifest.set("id", &id);
            let entities = fs::read_to_string(&input).with_context(|| format!("cannot read {}", input.display()))?;
            let coref_text = match &coref {
                Some(c) => Some(fs::read_to_string(c).with_context(|| format!("cannot read {}", c.display()))?),
                None => None,
            };
            let doc = litbank::convert(&id, &entities, coref_text.as_deref(), &lists)
                .with_context(|| format!("cannot convert {}", input.display()))?;
            emit(&output, doc.to_json_string().as_bytes(), &manifest)?;
        }
        Command::IngestLlm {
            format,
            input,
            reference,
            output,
            window,
            stopwords,
        } => {
            let mut manifest = RunManifest::new("ingest-llm");
            manifest.input(&input)?;
            let raw = fs::read_to_string(&input).with_context(|| format!("cannot read {}", input.display()))?;
            let (net, diagnostics) = match format {
                LlmFormat::Graph => {
                    manifest.set("format", "graph");
                    let parsed = parse_llm_graph(&raw)?;
                    (parsed.network, parsed.diagnostics)
                }
                LlmFormat::CorefTags => {
                    manifest.set("format", "coref-tags").set("window", window);
                    let Some(reference) = reference else {
                        bail!("--reference is required with --format coref-tags");
                    };
                    manifest.input(&reference)?;
                    let lists = word_lists(None, stopwords.as_deref(), &mut manifest)?;
                    let doc = read_document(&reference)?;
                    let tokens: Vec<String> = doc.token_texts().map(String::from).collect();
                    let parsed = parse_tagged_text(&raw, &tokens);
                    let (tagged, notes) = parsed.to_document(doc.id(), tokens, &lists)?;
                    let net = extract_network(&gold_characters(&tagged), &window_config(window)?);
                    let mut diagnostics = parsed.diagnostics;
                    diagnostics.extend(notes);
                    (net, diagnostics)
                }
            };
            for d in &diagnostics {
                eprintln!("warning: {d}");
            }
            manifest.set("diagnostics", &diagnostics);
            emit(&output, &graphml_bytes(&net)?, &manifest)?;
        }
        Command::FilterCorpus {
            dir,
            min_characters,
            output,
        } => {
            let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
                .with_context(|| format!("cannot list {}", dir.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json") && !p.to_string_lossy().ends_with(".manifest.json"))
                .collect();
            paths.sort();
            let docs: Vec<Document> = paths
                .par_iter()
                .map(|p| read_document(p).with_context(|| format!("cannot read {}", p.display())))
                .collect::<Result<_>>()?;
            let kept: BTreeSet<String> = docs
                .iter()
                .filter(|d| gold_characters(d).iter().filter(|c| !c.is_anonymous()).count() >= min_characters)
                .map(|d| d.id().to_string())
                .collect();
            let mut text = String::new();
            for id in &kept {
                text.push_str(id);
                text.push('\n');
            }
            print!("{text}");
            if let Some(out) = output {
                let mut manifest = RunManifest::new("filter-corpus");
                manifest.set("min_characters", min_characters);
                for p in &paths {
                    manifest.input(p)?;
                }
                emit(&out, text.as_bytes(), &manifest)?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
