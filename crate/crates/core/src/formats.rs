//! On-disk formats, the single source of truth for every artifact:
//!
//! * corpus: header line `V M`, then one line per document of
//!   space-separated term indices; vocabulary in a sidecar file, one term
//!   per line in index order
//! * matrices (φ, θ): CSV, one row per topic/document, full precision
//! * samples CSV: `corpus_id,run_id,K,measure,kind,pair_index,value`
//! * stability CSV: `distribution,K,measure,kind,mean,variance,instability,t`
//! * runs CSV: per-fit seeds and φ̂ digests
//! * manifest: JSON reproducibility record with content digests of every
//!   emitted file

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::harness::RunRecord;
use crate::stability::{Kind, Measure, SimilaritySample, StabilityRecord};
use crate::types::{Corpus, Vocabulary};

pub const SAMPLES_HEADER: &str = "corpus_id,run_id,K,measure,kind,pair_index,value";
pub const STABILITY_HEADER: &str = "distribution,K,measure,kind,mean,variance,instability,t";
pub const RUNS_HEADER: &str = "corpus_id,K,run_id,run_seed,phi_digest";

/// Full-precision float formatting (17 significant digits), enough for
/// exact f64 round-trips.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn write_atomically(path: &Path, contents: &str) -> Result<()> {
    let mut file = BufWriter::new(
        fs::File::create(path).map_err(|e| Error::io(path.to_path_buf(), e))?,
    );
    file.write_all(contents.as_bytes())
        .and_then(|_| file.flush())
        .map_err(|e| Error::io(path.to_path_buf(), e))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path.to_path_buf(), e))
}

/// Hex SHA-256 of a file's bytes.
pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path.to_path_buf(), e))?;
    let digest = Sha256::digest(&bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        write!(out, "{byte:02x}").expect("writing to a String cannot fail");
    }
    Ok(out)
}

pub fn write_vocabulary(path: &Path, vocabulary: &Vocabulary) -> Result<()> {
    let mut out = String::new();
    for term in vocabulary.terms() {
        out.push_str(term);
        out.push('\n');
    }
    write_atomically(path, &out)
}

pub fn read_vocabulary(path: &Path) -> Result<Vocabulary> {
    let text = read_file(path)?;
    let terms: Vec<String> = text.lines().map(str::to_owned).collect();
    Vocabulary::new(terms).map_err(|e| parse_error(path, e.to_string()))
}

pub fn write_corpus(path: &Path, corpus: &Corpus) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", corpus.vocab_size(), corpus.n_docs());
    for doc in corpus.documents() {
        let mut first = true;
        for &w in doc {
            if !first {
                out.push(' ');
            }
            let _ = write!(out, "{w}");
            first = false;
        }
        out.push('\n');
    }
    write_atomically(path, &out)
}

pub fn read_corpus(corpus_path: &Path, vocabulary_path: &Path) -> Result<Corpus> {
    let vocabulary = read_vocabulary(vocabulary_path)?;
    let text = read_file(corpus_path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| parse_error(corpus_path, "missing `V M` header line"))?;
    let (v, m) = header
        .split_once(' ')
        .and_then(|(v, m)| Some((v.parse::<usize>().ok()?, m.parse::<usize>().ok()?)))
        .ok_or_else(|| parse_error(corpus_path, format!("malformed header {header:?}")))?;
    if v != vocabulary.len() {
        return Err(parse_error(
            corpus_path,
            format!("header says V={v} but the vocabulary has {} terms", vocabulary.len()),
        ));
    }
    let mut documents = Vec::with_capacity(m);
    for (i, line) in lines.enumerate() {
        let doc: std::result::Result<Vec<u32>, _> =
            line.split_whitespace().map(str::parse).collect();
        let doc =
            doc.map_err(|e| parse_error(corpus_path, format!("document {i}: {e}")))?;
        documents.push(doc);
    }
    if documents.len() != m {
        return Err(parse_error(
            corpus_path,
            format!("header says M={m} but found {} documents", documents.len()),
        ));
    }
    Corpus::new(vocabulary, documents).map_err(|e| parse_error(corpus_path, e.to_string()))
}

pub fn write_matrix_csv(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let mut out = String::new();
    for row in rows {
        for (i, &x) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&fmt_f64(x));
        }
        out.push('\n');
    }
    write_atomically(path, &out)
}

pub fn read_matrix_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = read_file(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(str::parse::<f64>).collect();
        rows.push(row.map_err(|e| parse_error(path, format!("row {i}: {e}")))?);
    }
    Ok(rows)
}

pub fn write_samples_csv(path: &Path, samples: &[SimilaritySample]) -> Result<()> {
    let mut out = String::from(SAMPLES_HEADER);
    out.push('\n');
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.corpus_id,
            s.run_id,
            s.k,
            s.measure,
            s.kind,
            s.pair_index,
            fmt_f64(s.value)
        );
    }
    write_atomically(path, &out)
}

pub fn read_samples_csv(path: &Path) -> Result<Vec<SimilaritySample>> {
    let text = read_file(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(SAMPLES_HEADER) => {}
        other => {
            return Err(parse_error(
                path,
                format!("expected header {SAMPLES_HEADER:?}, found {other:?}"),
            ))
        }
    }
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        let [corpus_id, run_id, k, measure, kind, pair_index, value] = fields[..] else {
            return Err(parse_error(path, format!("line {i}: wrong field count")));
        };
        let sample = (|| -> std::result::Result<SimilaritySample, String> {
            SimilaritySample::new(
                corpus_id.parse().map_err(|e| format!("corpus_id: {e}"))?,
                run_id.parse().map_err(|e| format!("run_id: {e}"))?,
                k.parse().map_err(|e| format!("K: {e}"))?,
                Measure::from_str(measure).map_err(|e| e.to_string())?,
                Kind::from_str(kind).map_err(|e| e.to_string())?,
                pair_index.parse().map_err(|e| format!("pair_index: {e}"))?,
                value.parse().map_err(|e| format!("value: {e}"))?,
            )
            .map_err(|e| e.to_string())
        })()
        .map_err(|m| parse_error(path, format!("line {i}: {m}")))?;
        samples.push(sample);
    }
    Ok(samples)
}

pub fn write_stability_csv(path: &Path, records: &[StabilityRecord]) -> Result<()> {
    let mut out = String::from(STABILITY_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.distribution,
            r.k,
            r.measure,
            r.kind,
            fmt_f64(r.mean),
            fmt_f64(r.variance),
            fmt_f64(r.instability),
            r.t
        );
    }
    write_atomically(path, &out)
}

pub fn read_stability_csv(path: &Path) -> Result<Vec<StabilityRecord>> {
    let text = read_file(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(STABILITY_HEADER) => {}
        other => {
            return Err(parse_error(
                path,
                format!("expected header {STABILITY_HEADER:?}, found {other:?}"),
            ))
        }
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        let [distribution, k, measure, kind, mean, variance, instability, t] = fields[..] else {
            return Err(parse_error(path, format!("line {i}: wrong field count")));
        };
        let record = (|| -> std::result::Result<StabilityRecord, String> {
            Ok(StabilityRecord {
                distribution: distribution.to_owned(),
                k: k.parse().map_err(|e| format!("K: {e}"))?,
                measure: Measure::from_str(measure).map_err(|e| e.to_string())?,
                kind: Kind::from_str(kind).map_err(|e| e.to_string())?,
                mean: mean.parse().map_err(|e| format!("mean: {e}"))?,
                variance: variance.parse().map_err(|e| format!("variance: {e}"))?,
                instability: instability
                    .parse()
                    .map_err(|e| format!("instability: {e}"))?,
                t: t.parse().map_err(|e| format!("t: {e}"))?,
            })
        })()
        .map_err(|m| parse_error(path, format!("line {i}: {m}")))?;
        records.push(record);
    }
    Ok(records)
}

/// Wall times are deliberately not persisted: the runs file must be
/// byte-identical across re-executions.
pub fn write_runs_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut out = String::from(RUNS_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.corpus_id, r.k, r.run_id, r.run_seed, r.phi_digest
        );
    }
    write_atomically(path, &out)
}

/// Reproducibility record: re-running the named command with this
/// configuration and master seed reproduces every digest below.
/// `created_at` is informational and excluded from determinism comparisons.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub master_seed: u64,
    pub config: serde_json::Value,
    /// file name -> hex SHA-256, sorted by name.
    pub files: BTreeMap<String, String>,
    pub created_at: String,
}

impl RunManifest {
    pub fn new(command: &str, master_seed: u64, config: serde_json::Value) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            command: command.to_owned(),
            master_seed,
            config,
            files: BTreeMap::new(),
            created_at: chrono::Utc::now().to_rfc3339(),
        }
    }

    /// Record the digest of an already-written file living in `dir`.
    pub fn add_file(&mut self, dir: &Path, name: &str) -> Result<()> {
        let digest = file_digest(&dir.join(name))?;
        self.files.insert(name.to_owned(), digest);
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| parse_error(path, e.to_string()))?;
        write_atomically(path, &(json + "\n"))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = read_file(path)?;
        serde_json::from_str(&text).map_err(|e| parse_error(path, e.to_string()))
    }
}
