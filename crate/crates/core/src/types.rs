//! Shared domain types: vocabulary, probability matrices, corpora and
//! token-level topic assignments.
//!
//! All types validate their invariants on construction (and therefore on
//! deserialization) and are immutable afterwards, so they can be shared
//! freely across worker threads.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when checking that a probability vector sums to one.
///
/// Tight enough to catch real mistakes at V=1000, loose enough to absorb
/// summation-order differences.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// True iff `v` is non-empty, has no negative entries and sums to 1 within
/// [`SIMPLEX_TOL`].
pub fn validate_simplex(v: &[f64]) -> bool {
    !v.is_empty()
        && v.iter().all(|&x| x >= 0.0)
        && (v.iter().sum::<f64>() - 1.0).abs() <= SIMPLEX_TOL
}

/// Ordered set of unique term strings; term index <-> string is a bijection.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new(terms: Vec<String>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidInput("vocabulary must be non-empty".into()));
        }
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!(
                    "vocabulary has duplicate term {t:?}"
                )));
            }
        }
        Ok(Vocabulary { terms, index })
    }

    /// Synthetic vocabulary of `v` distinct terms for generated corpora.
    ///
    /// Terms are fixed-width codes over a consonant alphabet (no vowels, no
    /// `l`/`s`/`y`), chosen so that every term is a single alphabetic token
    /// that survives lowercasing, stopword removal and Porter stemming
    /// unchanged. That keeps text export -> re-ingestion lossless.
    pub fn synthetic(v: usize) -> Result<Self> {
        const ALPHABET: &[u8] = b"bcdfghjkmnpqrtvwxz";
        if v == 0 {
            return Err(Error::InvalidInput("vocabulary size must be >= 1".into()));
        }
        let base = ALPHABET.len();
        let mut width = 1;
        let mut cap = base;
        while cap < v {
            cap *= base;
            width += 1;
        }
        let mut terms = Vec::with_capacity(v);
        for i in 0..v {
            let mut code = vec![b'0'; width];
            let mut rem = i;
            for slot in code.iter_mut().rev() {
                *slot = ALPHABET[rem % base];
                rem /= base;
            }
            terms.push(String::from_utf8(code).expect("ascii"));
        }
        Self::new(terms)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, idx: usize) -> Option<&str> {
        self.terms.get(idx).map(String::as_str)
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}
impl Eq for Vocabulary {}

impl TryFrom<Vec<String>> for Vocabulary {
    type Error = Error;
    fn try_from(terms: Vec<String>) -> Result<Self> {
        Vocabulary::new(terms)
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Vec<String> {
        v.terms
    }
}

fn check_rows(rows: &[Vec<f64>], what: &str) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidInput(format!("{what}: no rows")));
    }
    let width = rows[0].len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::InvalidInput(format!(
                "{what}: row {i} has length {} but row 0 has {width}",
                row.len()
            )));
        }
        if !validate_simplex(row) {
            return Err(Error::InvalidInput(format!(
                "{what}: row {i} is not a probability distribution"
            )));
        }
    }
    Ok(())
}

/// Topic-word matrix: K rows, each a probability distribution over V terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct TopicWordMatrix {
    rows: Vec<Vec<f64>>,
}

impl TopicWordMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        check_rows(&rows, "topic-word matrix")?;
        if rows[0].len() < 2 {
            return Err(Error::InvalidInput(
                "topic-word matrix needs V >= 2".into(),
            ));
        }
        Ok(TopicWordMatrix { rows })
    }

    /// Number of topics K.
    pub fn n_topics(&self) -> usize {
        self.rows.len()
    }

    /// Vocabulary size V.
    pub fn vocab_size(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.rows[k]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

impl TryFrom<Vec<Vec<f64>>> for TopicWordMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        TopicWordMatrix::new(rows)
    }
}

impl From<TopicWordMatrix> for Vec<Vec<f64>> {
    fn from(m: TopicWordMatrix) -> Self {
        m.rows
    }
}

/// Document-topic matrix: M rows, each a probability distribution over K
/// topics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct DocTopicMatrix {
    rows: Vec<Vec<f64>>,
}

impl DocTopicMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        check_rows(&rows, "document-topic matrix")?;
        Ok(DocTopicMatrix { rows })
    }

    /// Number of documents M.
    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    /// Number of topics K.
    pub fn n_topics(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.rows[m]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

impl TryFrom<Vec<Vec<f64>>> for DocTopicMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        DocTopicMatrix::new(rows)
    }
}

impl From<DocTopicMatrix> for Vec<Vec<f64>> {
    fn from(m: DocTopicMatrix) -> Self {
        m.rows
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct CorpusRepr {
    vocabulary: Vocabulary,
    documents: Vec<Vec<u32>>,
}

/// A bag-of-words corpus: M documents as sequences of dense term indices
/// into a shared vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CorpusRepr", into = "CorpusRepr")]
pub struct Corpus {
    vocabulary: Vocabulary,
    documents: Vec<Vec<u32>>,
}

impl Corpus {
    pub fn new(vocabulary: Vocabulary, documents: Vec<Vec<u32>>) -> Result<Self> {
        if documents.is_empty() {
            return Err(Error::InvalidInput("corpus has no documents".into()));
        }
        let v = vocabulary.len() as u32;
        for (m, doc) in documents.iter().enumerate() {
            if doc.is_empty() {
                return Err(Error::InvalidInput(format!("document {m} is empty")));
            }
            if let Some(&w) = doc.iter().find(|&&w| w >= v) {
                return Err(Error::InvalidInput(format!(
                    "document {m} references term {w} but V={v}"
                )));
            }
        }
        Ok(Corpus {
            vocabulary,
            documents,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn documents(&self) -> &[Vec<u32>] {
        &self.documents
    }

    /// Number of documents M.
    pub fn n_docs(&self) -> usize {
        self.documents.len()
    }

    /// Vocabulary size V.
    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn total_tokens(&self) -> usize {
        self.documents.iter().map(Vec::len).sum()
    }

    /// Number of distinct term indices that actually occur.
    pub fn distinct_terms(&self) -> usize {
        let mut seen = vec![false; self.vocab_size()];
        for doc in &self.documents {
            for &w in doc {
                seen[w as usize] = true;
            }
        }
        seen.iter().filter(|&&s| s).count()
    }
}

impl TryFrom<CorpusRepr> for Corpus {
    type Error = Error;
    fn try_from(r: CorpusRepr) -> Result<Self> {
        Corpus::new(r.vocabulary, r.documents)
    }
}

impl From<Corpus> for CorpusRepr {
    fn from(c: Corpus) -> Self {
        CorpusRepr {
            vocabulary: c.vocabulary,
            documents: c.documents,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct AssignRepr {
    n_topics: usize,
    per_doc: Vec<Vec<u32>>,
}

/// Latent topic index for every token, aligned positionally with the corpus
/// documents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AssignRepr", into = "AssignRepr")]
pub struct TopicAssignments {
    n_topics: usize,
    per_doc: Vec<Vec<u32>>,
}

impl TopicAssignments {
    pub fn new(per_doc: Vec<Vec<u32>>, n_topics: usize) -> Result<Self> {
        if n_topics == 0 {
            return Err(Error::InvalidInput("n_topics must be >= 1".into()));
        }
        for (m, doc) in per_doc.iter().enumerate() {
            if let Some(&z) = doc.iter().find(|&&z| z as usize >= n_topics) {
                return Err(Error::InvalidInput(format!(
                    "document {m} assigns topic {z} but K={n_topics}"
                )));
            }
        }
        Ok(TopicAssignments { n_topics, per_doc })
    }

    pub fn n_topics(&self) -> usize {
        self.n_topics
    }

    pub fn per_doc(&self) -> &[Vec<u32>] {
        &self.per_doc
    }

    /// True iff the assignment shape matches the corpus document shape.
    pub fn matches_shape(&self, corpus: &Corpus) -> bool {
        self.per_doc.len() == corpus.n_docs()
            && self
                .per_doc
                .iter()
                .zip(corpus.documents())
                .all(|(z, d)| z.len() == d.len())
    }
}

impl TryFrom<AssignRepr> for TopicAssignments {
    type Error = Error;
    fn try_from(r: AssignRepr) -> Result<Self> {
        TopicAssignments::new(r.per_doc, r.n_topics)
    }
}

impl From<TopicAssignments> for AssignRepr {
    fn from(a: TopicAssignments) -> Self {
        AssignRepr {
            n_topics: a.n_topics,
            per_doc: a.per_doc,
        }
    }
}
