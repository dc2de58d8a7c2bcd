//! Real-corpus pipeline: read a directory of plain-text documents,
//! lowercase, drop stopwords, Porter-stem, build a frequency-ordered
//! vocabulary, and run the within-only stability sweep (real corpora have
//! no ground truth to compare against).

pub mod porter;
pub mod stopwords;

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::{sweep_corpus, LdaTemplate, RunRecord, SweepSettings};
use crate::seed::derive_seed;
use crate::stability::{stability_table, SimilaritySample, StabilityRecord};
use crate::types::{Corpus, Vocabulary};

pub use porter::stem;

/// Text preprocessing knobs.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    /// Stopword file (one token per line); the built-in English list when
    /// absent.
    pub stopword_file: Option<PathBuf>,
    /// Drop terms occurring fewer than this many times corpus-wide.
    pub min_term_count: usize,
    /// Optional vocabulary cap, keeping the most frequent terms.
    pub max_vocab: Option<usize>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            stopword_file: None,
            min_term_count: 5,
            max_vocab: None,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_term_count < 1 {
            return Err(Error::Config("min_term_count must be >= 1".into()));
        }
        if self.max_vocab == Some(0) {
            return Err(Error::Config("max_vocab must be >= 1".into()));
        }
        Ok(())
    }

    fn stopwords(&self) -> Result<HashSet<String>> {
        match &self.stopword_file {
            None => Ok(stopwords::ENGLISH.iter().map(|s| s.to_string()).collect()),
            Some(path) => {
                let text =
                    fs::read_to_string(path).map_err(|e| Error::io(path.clone(), e))?;
                Ok(text
                    .lines()
                    .map(|l| l.trim().to_lowercase())
                    .filter(|l| !l.is_empty())
                    .collect())
            }
        }
    }
}

/// Lowercased alphabetic runs of `text`, stopword-filtered and stemmed.
/// Stems that themselves land on a stopword are dropped as well, so every
/// emitted token survives all three filters.
pub fn tokenize(text: &str, stopwords: &HashSet<String>) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut run = String::new();
    for c in text.chars().chain(std::iter::once(' ')) {
        if c.is_alphabetic() {
            run.extend(c.to_lowercase());
        } else if !run.is_empty() {
            let word = std::mem::take(&mut run);
            if !stopwords.contains(&word) {
                let stemmed = stem(&word);
                if !stopwords.contains(&stemmed) {
                    tokens.push(stemmed);
                }
            }
        }
    }
    tokens
}

/// All regular files under `dir` (recursively), sorted by path for a
/// deterministic document order.
fn collect_files(dir: &Path) -> Result<Vec<PathBuf>> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
        let entries = fs::read_dir(dir).map_err(|e| Error::io(dir.to_path_buf(), e))?;
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(dir.to_path_buf(), e))?;
            let path = entry.path();
            let kind = entry
                .file_type()
                .map_err(|e| Error::io(path.clone(), e))?;
            if kind.is_dir() {
                walk(&path, out)?;
            } else if kind.is_file() {
                out.push(path);
            }
        }
        Ok(())
    }
    let mut files = Vec::new();
    walk(dir, &mut files)?;
    files.sort();
    if files.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no documents found under {}",
            dir.display()
        )));
    }
    Ok(files)
}

/// Ingest a directory of plain-text files into a corpus.
///
/// The vocabulary is indexed by descending term frequency, ties broken
/// lexicographically; documents emptied by filtering are removed.
pub fn ingest(dir: &Path, config: &PreprocessConfig) -> Result<Corpus> {
    config.validate()?;
    let stopword_set = config.stopwords()?;
    let files = collect_files(dir)?;

    let mut docs_tokens: Vec<Vec<String>> = Vec::with_capacity(files.len());
    for path in &files {
        let bytes = fs::read(path).map_err(|e| Error::io(path.clone(), e))?;
        let text = String::from_utf8_lossy(&bytes);
        let tokens = tokenize(&text, &stopword_set);
        if !tokens.is_empty() {
            docs_tokens.push(tokens);
        }
    }

    let mut counts: HashMap<&str, usize> = HashMap::new();
    for doc in &docs_tokens {
        for token in doc {
            *counts.entry(token).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = counts
        .iter()
        .filter(|&(_, &c)| c >= config.min_term_count)
        .map(|(&t, &c)| (t, c))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    if let Some(cap) = config.max_vocab {
        ranked.truncate(cap);
    }
    if ranked.is_empty() {
        return Err(Error::InvalidInput(
            "all terms were filtered out; lower min_term_count or check the input".into(),
        ));
    }

    let vocabulary = Vocabulary::new(ranked.iter().map(|&(t, _)| t.to_owned()).collect())?;
    let mut documents = Vec::with_capacity(docs_tokens.len());
    for doc in &docs_tokens {
        let indices: Vec<u32> = doc
            .iter()
            .filter_map(|t| vocabulary.index_of(t).map(|i| i as u32))
            .collect();
        if !indices.is_empty() {
            documents.push(indices);
        }
    }
    if documents.is_empty() {
        return Err(Error::InvalidInput(
            "every document was emptied by filtering".into(),
        ));
    }
    Corpus::new(vocabulary, documents)
}

/// Write each document of `corpus` as a plain-text file of space-separated
/// terms, named so that re-ingestion preserves document order.
pub fn export_as_text(corpus: &Corpus, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir.to_path_buf(), e))?;
    for (i, doc) in corpus.documents().iter().enumerate() {
        let words: Vec<&str> = doc
            .iter()
            .map(|&w| corpus.vocabulary().term(w as usize).expect("valid index"))
            .collect();
        let path = dir.join(format!("doc_{i:06}.txt"));
        fs::write(&path, words.join(" ")).map_err(|e| Error::io(path.clone(), e))?;
    }
    Ok(())
}

/// Stability sweep over an ingested corpus: identical to the synthetic
/// harness with a single corpus, no generation and no between-samples.
pub fn real_sweep(
    corpus: &Corpus,
    label: &str,
    master_seed: u64,
    lda: &LdaTemplate,
    sweep: &SweepSettings,
) -> Result<(Vec<SimilaritySample>, Vec<RunRecord>, Vec<StabilityRecord>)> {
    let corpus_seed = derive_seed(master_seed, 0);
    let (samples, records) = sweep_corpus(corpus, None, 0, corpus_seed, None, lda, sweep)?;
    let table = stability_table(label, &samples, sweep.aggregate_by)?;
    Ok((samples, records, table))
}
