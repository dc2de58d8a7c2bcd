//! Synthetic corpus generation with known ground truth: sample φ from one
//! of five distribution families, θ from a symmetric Dirichlet, draw every
//! token through the LDA generative process, re-inject vocabulary terms
//! that never occurred, and shuffle the documents.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal, OpenClosed01};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from, stream};
use crate::types::{Corpus, DocTopicMatrix, TopicAssignments, TopicWordMatrix, Vocabulary};

/// β of the sparser Dirichlet topic-word family.
pub const DIRICHLET_SMALL_BETA: f64 = 0.0001;
/// β of the denser Dirichlet topic-word family.
pub const DIRICHLET_MID_BETA: f64 = 0.001;

/// Probability floor applied after exp-normalization so that no term ends
/// up with exactly zero mass in sampled rows. Tiny Dirichlet concentrations
/// otherwise underflow whole vocabulary columns to zero in f64, which would
/// make those terms impossible to re-inject.
const PROB_FLOOR: f64 = 1e-300;

/// Topic-word distribution family for ground-truth φ rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiFamily {
    /// Symmetric Dirichlet over the vocabulary.
    Dirichlet { beta: f64 },
    /// I.i.d. N(0, σ²) scores mapped through a softmax.
    Normal { sigma: f64 },
    /// Disjoint near-equal vocabulary blocks with uniform mass.
    UniformSeparable,
}

impl PhiFamily {
    pub fn dirichlet_small() -> Self {
        PhiFamily::Dirichlet {
            beta: DIRICHLET_SMALL_BETA,
        }
    }

    pub fn dirichlet_mid() -> Self {
        PhiFamily::Dirichlet {
            beta: DIRICHLET_MID_BETA,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PhiFamily::Dirichlet { beta } if !(beta > 0.0) => Err(Error::Config(format!(
                "dirichlet beta must be positive, got {beta}"
            ))),
            PhiFamily::Normal { sigma } if !(sigma > 0.0) => Err(Error::Config(format!(
                "normal sigma must be positive, got {sigma}"
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for PhiFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PhiFamily::Dirichlet { beta } if beta == DIRICHLET_SMALL_BETA => {
                f.write_str("dirichlet_small")
            }
            PhiFamily::Dirichlet { beta } if beta == DIRICHLET_MID_BETA => {
                f.write_str("dirichlet_mid")
            }
            PhiFamily::Dirichlet { beta } => write!(f, "dirichlet(beta={beta})"),
            PhiFamily::Normal { sigma } if sigma == 1.0 => f.write_str("normal_1"),
            PhiFamily::Normal { sigma } if sigma == 10.0 => f.write_str("normal_10"),
            PhiFamily::Normal { sigma } => write!(f, "normal(sigma={sigma})"),
            PhiFamily::UniformSeparable => f.write_str("uniform_separable"),
        }
    }
}

impl FromStr for PhiFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let family = match s {
            "dirichlet_small" => PhiFamily::dirichlet_small(),
            "dirichlet_mid" => PhiFamily::dirichlet_mid(),
            "normal_1" => PhiFamily::Normal { sigma: 1.0 },
            "normal_10" => PhiFamily::Normal { sigma: 10.0 },
            "uniform_separable" => PhiFamily::UniformSeparable,
            _ => {
                let parse_param = |body: &str, key: &str| -> Option<f64> {
                    body.strip_prefix(key)?.parse().ok()
                };
                if let Some(body) = s.strip_prefix("dirichlet(").and_then(|b| b.strip_suffix(')'))
                {
                    let beta = parse_param(body, "beta=").ok_or_else(|| {
                        Error::Config(format!("cannot parse phi family {s:?}"))
                    })?;
                    PhiFamily::Dirichlet { beta }
                } else if let Some(body) =
                    s.strip_prefix("normal(").and_then(|b| b.strip_suffix(')'))
                {
                    let sigma = parse_param(body, "sigma=").ok_or_else(|| {
                        Error::Config(format!("cannot parse phi family {s:?}"))
                    })?;
                    PhiFamily::Normal { sigma }
                } else {
                    return Err(Error::Config(format!(
                        "unknown phi family {s:?} (expected dirichlet_small, dirichlet_mid, \
                         normal_1, normal_10, uniform_separable, dirichlet(beta=B) or \
                         normal(sigma=S))"
                    )));
                }
            }
        };
        family.validate()?;
        Ok(family)
    }
}

impl Serialize for PhiFamily {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PhiFamily {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Full parameterization of one synthetic-corpus generation experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    /// True number of topics K.
    pub k_true: usize,
    /// Number of documents M.
    pub n_docs: usize,
    /// Vocabulary size V.
    pub vocab_size: usize,
    /// Tokens drawn per document before re-injection.
    pub doc_length: usize,
    /// Symmetric Dirichlet concentration for θ rows.
    pub alpha: f64,
    pub phi_family: PhiFamily,
    pub n_corpora: usize,
    pub master_seed: u64,
    /// Upper bound (inclusive) of the uniform occurrence count drawn for
    /// each re-injected term.
    pub reinject_max: usize,
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_true < 2 {
            return Err(Error::Config("k_true must be >= 2".into()));
        }
        if self.n_docs < 1 {
            return Err(Error::Config("n_docs must be >= 1".into()));
        }
        if self.vocab_size < self.k_true {
            return Err(Error::Config(format!(
                "vocab_size {} must be >= k_true {}",
                self.vocab_size, self.k_true
            )));
        }
        if self.doc_length < 1 {
            return Err(Error::Config("doc_length must be >= 1".into()));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::Config(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if self.n_corpora < 1 {
            return Err(Error::Config("n_corpora must be >= 1".into()));
        }
        if self.reinject_max < 1 {
            return Err(Error::Config("reinject_max must be >= 1".into()));
        }
        self.phi_family.validate()
    }

    /// Seed for the i-th corpus replicate.
    pub fn corpus_seed(&self, corpus_index: usize) -> u64 {
        derive_seed(self.master_seed, corpus_index as u64)
    }
}

/// The generating parameters behind one synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub phi_true: TopicWordMatrix,
    pub theta_true: DocTopicMatrix,
    pub assignments: TopicAssignments,
}

/// ln Γ-distributed draw: returns ln(g) for g ~ Gamma(shape, 1).
///
/// For shape < 1 the draw is boosted through Gamma(shape + 1) and scaled by
/// U^(1/shape) in log space, which stays finite where a direct draw would
/// underflow to zero.
fn log_gamma_draw(rng: &mut ChaCha8Rng, shape: f64) -> f64 {
    if shape >= 1.0 {
        let g: f64 = Gamma::new(shape, 1.0).expect("valid shape").sample(rng);
        g.ln()
    } else {
        let g: f64 = Gamma::new(shape + 1.0, 1.0)
            .expect("valid shape")
            .sample(rng);
        let u: f64 = rng.sample(OpenClosed01);
        g.ln() + u.ln() / shape
    }
}

/// Exponentiate log-scores into a probability row, flooring underflowed
/// entries at [`PROB_FLOOR`] so every term keeps nonzero mass.
fn exp_normalize_floored(log_scores: &[f64]) -> Vec<f64> {
    let max = log_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut row: Vec<f64> = log_scores
        .iter()
        .map(|&x| (x - max).exp().max(PROB_FLOOR))
        .collect();
    let total: f64 = row.iter().sum();
    for v in row.iter_mut() {
        *v /= total;
    }
    row
}

/// One symmetric-Dirichlet row of the given width, strictly positive.
fn dirichlet_row(rng: &mut ChaCha8Rng, concentration: f64, width: usize) -> Vec<f64> {
    let log_gammas: Vec<f64> = (0..width)
        .map(|_| log_gamma_draw(rng, concentration))
        .collect();
    exp_normalize_floored(&log_gammas)
}

/// Sample a K × V ground-truth topic-word matrix from `family`.
pub fn sample_phi(family: PhiFamily, k: usize, v: usize, seed: u64) -> Result<TopicWordMatrix> {
    family.validate()?;
    if k < 1 {
        return Err(Error::InvalidInput("sample_phi requires K >= 1".into()));
    }
    if v < 2 {
        return Err(Error::InvalidInput("sample_phi requires V >= 2".into()));
    }
    let mut rng = rng_from(seed);
    let rows: Vec<Vec<f64>> = match family {
        PhiFamily::Dirichlet { beta } => (0..k).map(|_| dirichlet_row(&mut rng, beta, v)).collect(),
        PhiFamily::Normal { sigma } => {
            let normal = Normal::new(0.0, sigma).expect("valid sigma");
            (0..k)
                .map(|_| {
                    let scores: Vec<f64> = (0..v).map(|_| normal.sample(&mut rng)).collect();
                    exp_normalize_floored(&scores)
                })
                .collect()
        }
        PhiFamily::UniformSeparable => {
            if v < k {
                return Err(Error::InvalidInput(format!(
                    "uniform_separable needs V >= K, got V={v}, K={k}"
                )));
            }
            // First (V mod K) blocks take the extra term.
            let base = v / k;
            let extra = v % k;
            let mut rows = Vec::with_capacity(k);
            let mut start = 0;
            for block in 0..k {
                let size = base + usize::from(block < extra);
                let mut row = vec![0.0; v];
                for slot in row.iter_mut().skip(start).take(size) {
                    *slot = 1.0 / size as f64;
                }
                rows.push(row);
                start += size;
            }
            rows
        }
    };
    TopicWordMatrix::new(rows)
}

/// Draws indices from a fixed categorical distribution via its CDF.
struct CdfSampler {
    cdf: Vec<f64>,
}

impl CdfSampler {
    fn new(probs: &[f64]) -> Self {
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for &p in probs {
            acc += p;
            cdf.push(acc);
        }
        CdfSampler { cdf }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.cdf.last().expect("non-empty distribution");
        let x: f64 = rng.random::<f64>() * total;
        // Zero-probability entries have zero-width CDF intervals and can
        // never be selected.
        let idx = self.cdf.partition_point(|&c| c <= x);
        idx.min(self.cdf.len() - 1)
    }
}

/// Run the LDA generative process once: no re-injection, no shuffling.
/// Documents appear in generation order and may miss vocabulary terms.
pub fn generate_corpus_raw(
    config: &GenerationConfig,
    corpus_seed: u64,
) -> Result<(Corpus, GroundTruth)> {
    config.validate()?;
    let (k, m, v, d) = (
        config.k_true,
        config.n_docs,
        config.vocab_size,
        config.doc_length,
    );

    let phi_true = sample_phi(config.phi_family, k, v, derive_seed(corpus_seed, stream::PHI))?;

    let mut theta_rng = rng_from(derive_seed(corpus_seed, stream::THETA));
    let theta_rows: Vec<Vec<f64>> = (0..m)
        .map(|_| dirichlet_row(&mut theta_rng, config.alpha, k))
        .collect();
    let theta_true = DocTopicMatrix::new(theta_rows)?;

    let phi_samplers: Vec<CdfSampler> = phi_true.rows().iter().map(|r| CdfSampler::new(r)).collect();
    let mut token_rng = rng_from(derive_seed(corpus_seed, stream::TOKENS));
    let mut documents = Vec::with_capacity(m);
    let mut assignments = Vec::with_capacity(m);
    for doc in 0..m {
        let theta_sampler = CdfSampler::new(theta_true.row(doc));
        let mut words = Vec::with_capacity(d);
        let mut topics = Vec::with_capacity(d);
        for _ in 0..d {
            let z = theta_sampler.draw(&mut token_rng);
            let w = phi_samplers[z].draw(&mut token_rng);
            topics.push(z as u32);
            words.push(w as u32);
        }
        documents.push(words);
        assignments.push(topics);
    }

    let corpus = Corpus::new(Vocabulary::synthetic(v)?, documents)?;
    let truth = GroundTruth {
        phi_true,
        theta_true,
        assignments: TopicAssignments::new(assignments, k)?,
    };
    Ok((corpus, truth))
}

/// Append occurrences of every vocabulary term missing from the corpus.
///
/// For each missing term (in ascending index order) an occurrence count is
/// drawn uniformly from {1..=max_count}; each occurrence picks its topic
/// from the column-normalized φ_true[·][w], its document from the
/// θ_true[·][z] column normalized over documents, and is appended to that
/// document with its assignment recorded.
pub fn reinject_missing_terms(
    corpus: Corpus,
    truth: GroundTruth,
    seed: u64,
    max_count: usize,
) -> Result<(Corpus, GroundTruth)> {
    if max_count < 1 {
        return Err(Error::InvalidInput("reinject max_count must be >= 1".into()));
    }
    let v = corpus.vocab_size();
    let mut present = vec![false; v];
    for doc in corpus.documents() {
        for &w in doc {
            present[w as usize] = true;
        }
    }
    if present.iter().all(|&p| p) {
        return Ok((corpus, truth));
    }

    let k = truth.phi_true.n_topics();
    let m = truth.theta_true.n_docs();
    let mut rng = rng_from(seed);
    let mut documents: Vec<Vec<u32>> = corpus.documents().to_vec();
    let mut per_doc: Vec<Vec<u32>> = truth.assignments.per_doc().to_vec();

    // Per-topic document samplers are built lazily: most corpora miss few
    // terms and touch few topics here.
    let mut doc_samplers: Vec<Option<CdfSampler>> = (0..k).map(|_| None).collect();

    for (w, _) in present.iter().enumerate().filter(|&(_, &p)| !p) {
        let column: Vec<f64> = (0..k).map(|t| truth.phi_true.row(t)[w]).collect();
        let col_total: f64 = column.iter().sum();
        if col_total <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "cannot re-inject term {w}: its topic column is all zero"
            )));
        }
        let topic_sampler = CdfSampler::new(&column);
        let count = rng.random_range(1..=max_count);
        for _ in 0..count {
            let z = topic_sampler.draw(&mut rng);
            let doc_sampler = doc_samplers[z].get_or_insert_with(|| {
                let weights: Vec<f64> = (0..m).map(|d| truth.theta_true.row(d)[z]).collect();
                CdfSampler::new(&weights)
            });
            let doc = doc_sampler.draw(&mut rng);
            documents[doc].push(w as u32);
            per_doc[doc].push(z as u32);
        }
    }

    let corpus = Corpus::new(corpus.vocabulary().clone(), documents)?;
    let truth = GroundTruth {
        assignments: TopicAssignments::new(per_doc, k)?,
        ..truth
    };
    Ok((corpus, truth))
}

/// Permute documents (and the matching θ rows and assignment rows) by a
/// uniform random permutation.
fn shuffle_documents(corpus: Corpus, truth: GroundTruth, seed: u64) -> Result<(Corpus, GroundTruth)> {
    let permutation = crate::inference::random_permutation(corpus.n_docs(), seed);
    let documents = permute(corpus.documents(), &permutation);
    let theta_rows = permute(truth.theta_true.rows(), &permutation);
    let z_rows = permute(truth.assignments.per_doc(), &permutation);
    let k = truth.phi_true.n_topics();
    Ok((
        Corpus::new(corpus.vocabulary().clone(), documents)?,
        GroundTruth {
            phi_true: truth.phi_true,
            theta_true: DocTopicMatrix::new(theta_rows)?,
            assignments: TopicAssignments::new(z_rows, k)?,
        },
    ))
}

fn permute<T: Clone>(items: &[T], permutation: &[usize]) -> Vec<T> {
    permutation.iter().map(|&i| items[i].clone()).collect()
}

/// Full generation pass: raw LDA process, then missing-term re-injection,
/// then a document shuffle. Deterministic in (config, corpus_seed).
pub fn generate_corpus(config: &GenerationConfig, corpus_seed: u64) -> Result<(Corpus, GroundTruth)> {
    let (corpus, truth) = generate_corpus_raw(config, corpus_seed)?;
    let (corpus, truth) = reinject_missing_terms(
        corpus,
        truth,
        derive_seed(corpus_seed, stream::REINJECT),
        config.reinject_max,
    )?;
    shuffle_documents(corpus, truth, derive_seed(corpus_seed, stream::DOC_SHUFFLE))
}
