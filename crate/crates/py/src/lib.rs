//! Python bindings: the similarity measures, alignment, instability,
//! corpus generation, Gibbs fitting and text preprocessing, with plain
//! lists/tuples at the boundary.
//!
//! Build with `cargo build -p topicstab-py` and import the produced
//! `libtopicstab_py.so` as `topicstab_py` (see `python/smoke_test.py`).

use std::collections::HashSet;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use topicstab::generation::{self, GenerationConfig};
use topicstab::inference::{self, LdaConfig};
use topicstab::ingestion::{self, stopwords};
use topicstab::measures::{self, TopNList};
use topicstab::types::{Corpus, TopicWordMatrix, Vocabulary};
use topicstab::{alignment, stability};

fn err(e: topicstab::Error) -> PyErr {
    match e {
        topicstab::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Jensen-Shannon similarity of two probability distributions.
#[pyfunction]
fn jss(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    measures::jss(&p, &q).map_err(err)
}

/// Jaccard index of two top-n term index lists.
#[pyfunction]
fn jis(a: Vec<usize>, b: Vec<usize>) -> PyResult<f64> {
    let a = TopNList::new(a).map_err(err)?;
    let b = TopNList::new(b).map_err(err)?;
    Ok(measures::jis(&a, &b))
}

/// Extrapolated rank-biased overlap of two equal-length ranked lists.
#[pyfunction]
#[pyo3(signature = (a, b, p = measures::DEFAULT_RBO_P))]
fn rbo(a: Vec<usize>, b: Vec<usize>, p: f64) -> PyResult<f64> {
    let a = TopNList::new(a).map_err(err)?;
    let b = TopNList::new(b).map_err(err)?;
    measures::rbo(&a, &b, p).map_err(err)
}

/// Indices of the n largest entries, descending, ties by ascending index.
#[pyfunction]
#[pyo3(signature = (row, n = measures::DEFAULT_TOP_N))]
fn top_n(row: Vec<f64>, n: usize) -> PyResult<Vec<usize>> {
    Ok(measures::top_n(&row, n).map_err(err)?.as_slice().to_vec())
}

/// Greedily match the rows of two topic-word matrices by JSS.
/// Returns (reference_topic, candidate_topic, jss) sorted by reference.
#[pyfunction]
fn match_topics(
    phi_ref: Vec<Vec<f64>>,
    phi_cand: Vec<Vec<f64>>,
) -> PyResult<Vec<(usize, usize, f64)>> {
    let phi_ref = TopicWordMatrix::new(phi_ref).map_err(err)?;
    let phi_cand = TopicWordMatrix::new(phi_cand).map_err(err)?;
    Ok(alignment::match_topics(&phi_ref, &phi_cand)
        .map_err(err)?
        .by_reference())
}

/// Instability distance of (mean, variance) points from the ideal (1, 0).
#[pyfunction]
fn instability(points: Vec<(f64, f64)>) -> PyResult<f64> {
    stability::instability(&points).map_err(err)
}

/// Sample one synthetic corpus with its ground truth.
/// Returns (documents, vocabulary, phi_true, theta_true).
#[pyfunction]
#[pyo3(signature = (k_true, n_docs, vocab_size, doc_length, phi_family, seed, alpha = 0.1, reinject_max = 3))]
#[allow(clippy::too_many_arguments, clippy::type_complexity)]
fn generate_corpus(
    k_true: usize,
    n_docs: usize,
    vocab_size: usize,
    doc_length: usize,
    phi_family: &str,
    seed: u64,
    alpha: f64,
    reinject_max: usize,
) -> PyResult<(Vec<Vec<u32>>, Vec<String>, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let config = GenerationConfig {
        k_true,
        n_docs,
        vocab_size,
        doc_length,
        alpha,
        phi_family: phi_family.parse().map_err(err)?,
        n_corpora: 1,
        master_seed: seed,
        reinject_max,
    };
    config.validate().map_err(err)?;
    let (corpus, truth) = generation::generate_corpus(&config, config.corpus_seed(0)).map_err(err)?;
    Ok((
        corpus.documents().to_vec(),
        corpus.vocabulary().terms().to_vec(),
        truth.phi_true.rows().to_vec(),
        truth.theta_true.rows().to_vec(),
    ))
}

/// Collapsed-Gibbs LDA fit on index-encoded documents.
/// Returns (phi_hat, theta_hat, log_likelihood_trace).
#[pyfunction]
#[pyo3(signature = (documents, vocab_size, k, seed, n_iterations = 1000, burn_in = 500, sample_every = 10, alpha = None, beta = 0.01))]
#[allow(clippy::too_many_arguments, clippy::type_complexity)]
fn fit_lda(
    documents: Vec<Vec<u32>>,
    vocab_size: usize,
    k: usize,
    seed: u64,
    n_iterations: usize,
    burn_in: usize,
    sample_every: usize,
    alpha: Option<f64>,
    beta: f64,
) -> PyResult<(Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>)> {
    let vocabulary = Vocabulary::synthetic(vocab_size).map_err(err)?;
    let corpus = Corpus::new(vocabulary, documents).map_err(err)?;
    let config = LdaConfig {
        k,
        alpha: alpha.unwrap_or(50.0 / k as f64),
        beta,
        n_iterations,
        burn_in,
        sample_every,
        run_seed: seed,
    };
    let result = inference::fit(&corpus, &config).map_err(err)?;
    Ok((
        result.phi_hat.rows().to_vec(),
        result.theta_hat.rows().to_vec(),
        result.log_likelihood_trace,
    ))
}

/// Porter-stem a single lowercase word.
#[pyfunction]
fn stem(word: &str) -> String {
    ingestion::stem(word)
}

/// Lowercase, split, drop English stopwords, stem — the same pipeline the
/// ingest-sweep command applies to text files.
#[pyfunction]
fn preprocess(text: &str) -> Vec<String> {
    let stopword_set: HashSet<String> =
        stopwords::ENGLISH.iter().map(|s| s.to_string()).collect();
    ingestion::tokenize(text, &stopword_set)
}

#[pymodule]
fn topicstab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(jss, m)?)?;
    m.add_function(wrap_pyfunction!(jis, m)?)?;
    m.add_function(wrap_pyfunction!(rbo, m)?)?;
    m.add_function(wrap_pyfunction!(top_n, m)?)?;
    m.add_function(wrap_pyfunction!(match_topics, m)?)?;
    m.add_function(wrap_pyfunction!(instability, m)?)?;
    m.add_function(wrap_pyfunction!(generate_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(fit_lda, m)?)?;
    m.add_function(wrap_pyfunction!(stem, m)?)?;
    m.add_function(wrap_pyfunction!(preprocess, m)?)?;
    Ok(())
}
