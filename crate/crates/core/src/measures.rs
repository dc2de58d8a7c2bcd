//! Pairwise topic similarity measures, each mapping into [0, 1]:
//! Jensen-Shannon similarity on full term distributions, Jaccard index and
//! rank-biased overlap on ranked top-n term lists.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::types::validate_simplex;

/// Default number of top terms used to summarize a topic.
pub const DEFAULT_TOP_N: usize = 10;

/// Default persistence parameter for rank-biased overlap.
pub const DEFAULT_RBO_P: f64 = 0.9;

/// Ranked list of distinct term indices, descending by probability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopNList(Vec<usize>);

impl TopNList {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidInput("top-n list must be non-empty".into()));
        }
        let mut seen = HashSet::with_capacity(indices.len());
        for &i in &indices {
            if !seen.insert(i) {
                return Err(Error::InvalidInput(format!(
                    "top-n list repeats term index {i}"
                )));
            }
        }
        Ok(TopNList(indices))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl AsRef<[usize]> for TopNList {
    fn as_ref(&self) -> &[usize] {
        &self.0
    }
}

/// Indices of the `n` largest entries of `phi_row`, descending by value,
/// ties broken by ascending index.
pub fn top_n(phi_row: &[f64], n: usize) -> Result<TopNList> {
    if n == 0 {
        return Err(Error::InvalidInput("top-n size must be >= 1".into()));
    }
    if n > phi_row.len() {
        return Err(Error::InvalidInput(format!(
            "top-n size {n} exceeds vocabulary size {}",
            phi_row.len()
        )));
    }
    let mut order: Vec<usize> = (0..phi_row.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        phi_row[b]
            .total_cmp(&phi_row[a])
            .then_with(|| a.cmp(&b))
    });
    order.truncate(n);
    TopNList::new(order)
}

/// Jensen-Shannon similarity: 1 − sqrt(JSD(p, q)) with the divergence taken
/// in log base 2, so both divergence and similarity live in [0, 1].
pub fn jss(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::InvalidInput(format!(
            "jss length mismatch: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    if !validate_simplex(p) || !validate_simplex(q) {
        return Err(Error::InvalidInput(
            "jss arguments must be probability distributions".into(),
        ));
    }
    let mut jsd = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        let mi = 0.5 * (pi + qi);
        // 0 * log(0/x) = 0 by convention. The two halves are added to each
        // other before the accumulator so the result is exactly symmetric
        // in (p, q): IEEE addition commutes, it just doesn't associate.
        let p_half = if pi > 0.0 { 0.5 * pi * (pi / mi).log2() } else { 0.0 };
        let q_half = if qi > 0.0 { 0.5 * qi * (qi / mi).log2() } else { 0.0 };
        jsd += p_half + q_half;
    }
    // Summation noise can push the divergence a hair outside [0, 1].
    let jsd = jsd.clamp(0.0, 1.0);
    Ok((1.0 - jsd.sqrt()).clamp(0.0, 1.0))
}

/// Jaccard index of the two top-n term sets: |A ∩ B| / |A ∪ B|.
pub fn jis(a: &TopNList, b: &TopNList) -> f64 {
    let sa: HashSet<usize> = a.as_slice().iter().copied().collect();
    let sb: HashSet<usize> = b.as_slice().iter().copied().collect();
    let inter = sa.intersection(&sb).count();
    let union = sa.len() + sb.len() - inter;
    inter as f64 / union as f64
}

/// Extrapolated rank-biased overlap at evaluation depth n:
///
///   RBO = (X_n / n) p^n + ((1 − p) / p) Σ_{i=1..n} (X_i / i) p^i
///
/// where X_i is the size of the intersection of the two depth-i prefixes.
pub fn rbo(a: &TopNList, b: &TopNList, p: f64) -> Result<f64> {
    if !(0.0 < p && p < 1.0) {
        return Err(Error::InvalidInput(format!(
            "rbo persistence must lie in (0,1), got {p}"
        )));
    }
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "rbo list length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    let mut seen_a: HashSet<usize> = HashSet::with_capacity(n);
    let mut seen_b: HashSet<usize> = HashSet::with_capacity(n);
    let mut overlap = 0usize; // X_i
    let mut weighted_sum = 0.0; // Σ (X_i/i) p^i
    let mut p_pow = 1.0;
    for i in 0..n {
        let (ai, bi) = (a.as_slice()[i], b.as_slice()[i]);
        if ai == bi {
            overlap += 1;
        } else {
            if seen_b.contains(&ai) {
                overlap += 1;
            }
            if seen_a.contains(&bi) {
                overlap += 1;
            }
        }
        seen_a.insert(ai);
        seen_b.insert(bi);
        p_pow *= p;
        weighted_sum += overlap as f64 / (i + 1) as f64 * p_pow;
    }
    let x_n = overlap as f64 / n as f64;
    Ok((x_n * p_pow + (1.0 - p) / p * weighted_sum).clamp(0.0, 1.0))
}
