//! Topic correspondence between two unordered LDA outputs: a matrix of
//! pairwise JSS values reduced by greedy global-max-first elimination.

use crate::error::{Error, Result};
use crate::measures::jss;
use crate::types::{DocTopicMatrix, TopicWordMatrix};

/// A partial bijection between reference and candidate topic indices with
/// the JSS score of each matched pair, in greedy pick order (descending
/// score).
#[derive(Debug, Clone, PartialEq)]
pub struct TopicMatching {
    pairs: Vec<(usize, usize)>,
    scores: Vec<f64>,
}

impl TopicMatching {
    fn new(pairs: Vec<(usize, usize)>, scores: Vec<f64>) -> Result<Self> {
        if pairs.len() != scores.len() {
            return Err(Error::InvalidInput(
                "matching pairs and scores must have equal length".into(),
            ));
        }
        if let Some(&s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::InvalidInput(format!(
                "matching score {s} outside [0,1]"
            )));
        }
        for (i, &(r, c)) in pairs.iter().enumerate() {
            for &(r2, c2) in &pairs[i + 1..] {
                if r == r2 || c == c2 {
                    return Err(Error::InvalidInput(
                        "matching repeats a topic index".into(),
                    ));
                }
            }
        }
        Ok(TopicMatching { pairs, scores })
    }

    /// Matched (reference, candidate) index pairs in greedy pick order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// JSS value of each pair, aligned with [`pairs`](Self::pairs).
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Candidate topic matched to `reference`, if any.
    pub fn candidate_for(&self, reference: usize) -> Option<usize> {
        self.pairs
            .iter()
            .find(|&&(r, _)| r == reference)
            .map(|&(_, c)| c)
    }

    /// (reference, candidate, score) triples sorted by reference index.
    pub fn by_reference(&self) -> Vec<(usize, usize, f64)> {
        let mut out: Vec<(usize, usize, f64)> = self
            .pairs
            .iter()
            .zip(&self.scores)
            .map(|(&(r, c), &s)| (r, c, s))
            .collect();
        out.sort_unstable_by_key(|&(r, _, _)| r);
        out
    }
}

/// Matrix of pairwise JSS values between two sets of row distributions:
/// entry (i, j) compares `rows_ref[i]` with `rows_cand[j]`.
pub fn jss_matrix_between(rows_ref: &[Vec<f64>], rows_cand: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(rows_ref.len());
    for r in rows_ref {
        let mut row = Vec::with_capacity(rows_cand.len());
        for c in rows_cand {
            row.push(jss(r, c)?);
        }
        out.push(row);
    }
    Ok(out)
}

/// K_ref × K_cand matrix of JSS values between topic-word rows.
pub fn jss_matrix(
    phi_ref: &TopicWordMatrix,
    phi_cand: &TopicWordMatrix,
) -> Result<Vec<Vec<f64>>> {
    if phi_ref.vocab_size() != phi_cand.vocab_size() {
        return Err(Error::InvalidInput(format!(
            "vocabulary size mismatch: {} vs {}",
            phi_ref.vocab_size(),
            phi_cand.vocab_size()
        )));
    }
    jss_matrix_between(phi_ref.rows(), phi_cand.rows())
}

/// Greedy matching: repeatedly pick the globally largest remaining entry,
/// record its (row, col) pair and eliminate that row and column. Ties break
/// toward the lower row, then the lower column. Terminates after
/// min(K_ref, K_cand) picks.
pub fn greedy_match(sim: &[Vec<f64>]) -> Result<TopicMatching> {
    if sim.is_empty() || sim[0].is_empty() {
        return Err(Error::InvalidInput("similarity matrix is empty".into()));
    }
    let n_cols = sim[0].len();
    if sim.iter().any(|row| row.len() != n_cols) {
        return Err(Error::InvalidInput("similarity matrix is ragged".into()));
    }
    let n_rows = sim.len();
    let n_picks = n_rows.min(n_cols);

    let mut row_free = vec![true; n_rows];
    let mut col_free = vec![true; n_cols];
    let mut pairs = Vec::with_capacity(n_picks);
    let mut scores = Vec::with_capacity(n_picks);
    for _ in 0..n_picks {
        let mut best: Option<(usize, usize)> = None;
        for r in 0..n_rows {
            if !row_free[r] {
                continue;
            }
            for c in 0..n_cols {
                if !col_free[c] {
                    continue;
                }
                // Strict > keeps the earliest (row, col) on ties.
                if best.is_none_or(|(br, bc)| sim[r][c] > sim[br][bc]) {
                    best = Some((r, c));
                }
            }
        }
        let (r, c) = best.expect("at least one free cell remains");
        row_free[r] = false;
        col_free[c] = false;
        pairs.push((r, c));
        scores.push(sim[r][c]);
    }
    TopicMatching::new(pairs, scores)
}

/// Convenience: greedy matching of candidate topics onto reference topics
/// via their JSS matrix.
pub fn match_topics(
    phi_ref: &TopicWordMatrix,
    phi_cand: &TopicWordMatrix,
) -> Result<TopicMatching> {
    greedy_match(&jss_matrix(phi_ref, phi_cand)?)
}

/// Per-topic distributions over documents: column k of the document-topic
/// matrix normalized to sum 1. Used for the θ-based matching diagnostic.
pub fn topic_document_profiles(theta: &DocTopicMatrix) -> Result<Vec<Vec<f64>>> {
    let (m, k) = (theta.n_docs(), theta.n_topics());
    let mut cols = vec![vec![0.0; m]; k];
    for (d, row) in theta.rows().iter().enumerate() {
        for (t, &v) in row.iter().enumerate() {
            cols[t][d] = v;
        }
    }
    for (t, col) in cols.iter_mut().enumerate() {
        let total: f64 = col.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "topic {t} has zero total document mass"
            )));
        }
        for v in col.iter_mut() {
            *v /= total;
        }
    }
    Ok(cols)
}
