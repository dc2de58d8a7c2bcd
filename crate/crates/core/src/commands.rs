//! Subcommand implementations shared by the binary and the CLI tests.
//!
//! Every command writes into an output directory and finishes with a
//! `manifest.json` listing the SHA-256 of each produced file, so two runs
//! can be compared without diffing the payloads themselves.

use std::fs;
use std::path::Path;

use crate::config::AppConfig;
use crate::error::{Error, Result};
use crate::formats::{
    write_corpus, write_matrix_csv, write_runs_csv, write_samples_csv, write_stability_csv,
    write_vocabulary, RunManifest,
};
use crate::generation::generate_corpus;
use crate::harness::{execute, sweep_report, RunRecord};
use crate::ingestion::{ingest, real_sweep};
use crate::stability::{SimilaritySample, StabilityRecord};

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir.to_path_buf(), e))
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<serde_json::Value> {
    serde_json::to_value(value).map_err(|e| Error::InvalidInput(format!("config to JSON: {e}")))
}

fn write_sweep_outputs(
    out: &Path,
    manifest: &mut RunManifest,
    samples: &[SimilaritySample],
    records: &[RunRecord],
    table: &[StabilityRecord],
) -> Result<()> {
    write_samples_csv(&out.join("samples.csv"), samples)?;
    write_runs_csv(&out.join("runs.csv"), records)?;
    write_stability_csv(&out.join("stability.csv"), table)?;
    for name in ["samples.csv", "runs.csv", "stability.csv"] {
        manifest.add_file(out, name)?;
    }
    Ok(())
}

/// `generate`: sample the configured corpora and write them with their
/// ground truth. Per corpus `i` the files are `corpus_{i:04}.txt`,
/// `phi_true_{i:04}.csv` and `theta_true_{i:04}.csv`; the shared synthetic
/// vocabulary goes to `vocabulary.txt`.
pub fn cmd_generate(config: &AppConfig, out: &Path, master_seed: u64) -> Result<()> {
    let generation = config
        .generation
        .clone()
        .ok_or_else(|| {
            Error::Config("generate needs a [generation] section in the config file".into())
        })?
        .into_config(master_seed);
    generation.validate()?;
    ensure_dir(out)?;

    let mut manifest = RunManifest::new("generate", master_seed, to_json(&generation)?);
    for i in 0..generation.n_corpora {
        let (corpus, truth) = generate_corpus(&generation, generation.corpus_seed(i))?;
        if i == 0 {
            write_vocabulary(&out.join("vocabulary.txt"), corpus.vocabulary())?;
            manifest.add_file(out, "vocabulary.txt")?;
        }
        let names = [
            format!("corpus_{i:04}.txt"),
            format!("phi_true_{i:04}.csv"),
            format!("theta_true_{i:04}.csv"),
        ];
        write_corpus(&out.join(&names[0]), &corpus)?;
        write_matrix_csv(&out.join(&names[1]), truth.phi_true.rows())?;
        write_matrix_csv(&out.join(&names[2]), truth.theta_true.rows())?;
        for name in &names {
            manifest.add_file(out, name)?;
        }
        eprintln!(
            "corpus {i}: {} docs, {} tokens, {} distinct terms",
            corpus.n_docs(),
            corpus.total_tokens(),
            corpus.distinct_terms()
        );
    }
    manifest.write(&out.join("manifest.json"))
}

/// `sweep`: the full synthetic experiment — generate corpora, fit LDA
/// repeatedly across the K range, measure similarity, aggregate stability.
/// Writes `samples.csv`, `runs.csv`, `stability.csv` and `manifest.json`.
pub fn cmd_sweep(config: &AppConfig, out: &Path, master_seed: u64) -> Result<()> {
    let plan = config.experiment_plan(master_seed)?;
    ensure_dir(out)?;

    let (samples, records) = execute(&plan)?;
    let table = sweep_report(&plan, &samples)?;

    let mut manifest = RunManifest::new("sweep", master_seed, to_json(&plan)?);
    write_sweep_outputs(out, &mut manifest, &samples, &records, &table)?;
    manifest.write(&out.join("manifest.json"))
}

/// `ingest-sweep`: preprocess a directory of plain-text files into a
/// corpus, then run the same sweep on it (no ground truth, so only
/// within-run samples exist). The ingested corpus itself is written next
/// to the results for inspection and reuse.
pub fn cmd_ingest_sweep(
    config: &AppConfig,
    text_dir: &Path,
    out: &Path,
    master_seed: u64,
) -> Result<()> {
    let corpus = ingest(text_dir, &config.preprocess)?;
    eprintln!(
        "ingested {}: {} docs, {} tokens, vocabulary {}",
        text_dir.display(),
        corpus.n_docs(),
        corpus.total_tokens(),
        corpus.vocab_size()
    );
    ensure_dir(out)?;

    let (samples, records, table) =
        real_sweep(&corpus, "real", master_seed, &config.lda, &config.sweep)?;

    let config_json = serde_json::json!({
        "text_dir": text_dir.display().to_string(),
        "lda": to_json(&config.lda)?,
        "sweep": to_json(&config.sweep)?,
        "preprocess": to_json(&config.preprocess)?,
    });
    let mut manifest = RunManifest::new("ingest-sweep", master_seed, config_json);
    write_corpus(&out.join("corpus.txt"), &corpus)?;
    write_vocabulary(&out.join("vocabulary.txt"), corpus.vocabulary())?;
    manifest.add_file(out, "corpus.txt")?;
    manifest.add_file(out, "vocabulary.txt")?;
    write_sweep_outputs(out, &mut manifest, &samples, &records, &table)?;
    manifest.write(&out.join("manifest.json"))
}
