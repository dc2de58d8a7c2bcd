//! LDA parameter estimation via collapsed Gibbs sampling, plus the
//! document-shuffle operation applied between repeated runs.
//!
//! The sampler resamples every token's topic from
//! (n_mk + α)(n_wk + β)/(n_k + Vβ), logs the joint log likelihood each
//! sweep and estimates φ̂/θ̂ from counts averaged over thinned post-burn-in
//! sweeps. Everything is deterministic in the run seed.

use rand::Rng;

use crate::error::{Error, Result};
use crate::seed::rng_from;
use crate::types::{Corpus, DocTopicMatrix, TopicWordMatrix};

/// Collapsed Gibbs sampling parameters for a single run.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LdaConfig {
    pub k: usize,
    /// Symmetric document-topic prior.
    pub alpha: f64,
    /// Symmetric topic-word prior.
    pub beta: f64,
    pub n_iterations: usize,
    pub burn_in: usize,
    /// Post-burn-in sweeps are averaged every this many sweeps.
    pub sample_every: usize,
    pub run_seed: u64,
}

impl LdaConfig {
    /// Standard heuristics: α = 50/K, β = 0.01, 1000 sweeps with 500
    /// burn-in, averaging every 10th kept sweep.
    pub fn with_default_priors(k: usize, run_seed: u64) -> Self {
        LdaConfig {
            k,
            alpha: 50.0 / k as f64,
            beta: 0.01,
            n_iterations: 1000,
            burn_in: 500,
            sample_every: 10,
            run_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::Config(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if !(self.beta > 0.0) {
            return Err(Error::Config(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if self.n_iterations <= self.burn_in {
            return Err(Error::Config(format!(
                "n_iterations ({}) must exceed burn_in ({})",
                self.n_iterations, self.burn_in
            )));
        }
        if self.sample_every < 1 {
            return Err(Error::Config("sample_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// Output of one Gibbs run.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaResult {
    pub phi_hat: TopicWordMatrix,
    pub theta_hat: DocTopicMatrix,
    /// Joint log likelihood log p(w, z) in nats, one entry per sweep.
    pub log_likelihood_trace: Vec<f64>,
}

/// Memoized lgamma(n + offset) for integer n, the only arguments the joint
/// likelihood ever needs.
struct LgammaTable {
    offset: f64,
    values: Vec<f64>,
}

impl LgammaTable {
    fn new(offset: f64, max_n: usize) -> Self {
        let values = (0..=max_n)
            .map(|n| libm::lgamma(n as f64 + offset))
            .collect();
        LgammaTable { offset: 0.0 + offset, values }
    }

    #[inline]
    fn get(&self, n: u32) -> f64 {
        self.values[n as usize]
    }

    fn at_zero(&self) -> f64 {
        libm::lgamma(self.offset)
    }
}

/// Fit LDA to `corpus` by collapsed Gibbs sampling.
pub fn fit(corpus: &Corpus, config: &LdaConfig) -> Result<LdaResult> {
    config.validate()?;
    let v = corpus.vocab_size();
    if v < 2 {
        return Err(Error::InvalidInput("fit requires V >= 2".into()));
    }
    let k = config.k;
    let m = corpus.n_docs();
    let total_tokens = corpus.total_tokens();
    if k > total_tokens {
        return Err(Error::InvalidInput(format!(
            "K={k} exceeds the {total_tokens} tokens in the corpus"
        )));
    }
    let (alpha, beta) = (config.alpha, config.beta);
    let v_beta = v as f64 * beta;
    let k_alpha = k as f64 * alpha;

    // Flattened token stream with document offsets.
    let mut words: Vec<u32> = Vec::with_capacity(total_tokens);
    let mut offsets: Vec<usize> = Vec::with_capacity(m + 1);
    offsets.push(0);
    for doc in corpus.documents() {
        words.extend_from_slice(doc);
        offsets.push(words.len());
    }
    let max_doc_len = corpus.documents().iter().map(Vec::len).max().unwrap_or(0);

    let mut rng = rng_from(config.run_seed);
    let mut z: Vec<u32> = (0..total_tokens)
        .map(|_| rng.random_range(0..k) as u32)
        .collect();

    // Count tables, token-major layouts so one token touches one cache line
    // per table: n_wk[w*k + t], n_mk[d*k + t].
    let mut n_wk = vec![0u32; v * k];
    let mut n_k = vec![0u32; k];
    let mut n_mk = vec![0u32; m * k];
    for d in 0..m {
        for i in offsets[d]..offsets[d + 1] {
            let (w, t) = (words[i] as usize, z[i] as usize);
            n_wk[w * k + t] += 1;
            n_k[t] += 1;
            n_mk[d * k + t] += 1;
        }
    }

    let lg_beta = LgammaTable::new(beta, total_tokens);
    let lg_vbeta = LgammaTable::new(v_beta, total_tokens);
    let lg_alpha = LgammaTable::new(alpha, max_doc_len);
    let lg_kalpha = LgammaTable::new(k_alpha, max_doc_len);
    // Constant normalizers of the joint likelihood.
    let ll_const = k as f64 * lg_vbeta.at_zero() - (k * v) as f64 * lg_beta.at_zero()
        + m as f64 * lg_kalpha.at_zero()
        - (m * k) as f64 * lg_alpha.at_zero();

    let effective_thin = config.sample_every.min(config.n_iterations - config.burn_in);
    let mut sum_wk = vec![0u64; v * k];
    let mut sum_mk = vec![0u64; m * k];
    let mut n_snapshots = 0u64;

    let mut trace = Vec::with_capacity(config.n_iterations);
    let mut cumulative = vec![0.0f64; k];
    for sweep in 1..=config.n_iterations {
        for d in 0..m {
            let doc_counts = d * k;
            for i in offsets[d]..offsets[d + 1] {
                let w = words[i] as usize;
                let old = z[i] as usize;
                n_wk[w * k + old] -= 1;
                n_k[old] -= 1;
                n_mk[doc_counts + old] -= 1;

                let word_counts = w * k;
                let mut acc = 0.0;
                for t in 0..k {
                    acc += (n_mk[doc_counts + t] as f64 + alpha)
                        * (n_wk[word_counts + t] as f64 + beta)
                        / (n_k[t] as f64 + v_beta);
                    cumulative[t] = acc;
                }
                let u: f64 = rng.random::<f64>() * acc;
                let new = cumulative
                    .iter()
                    .position(|&c| c > u)
                    .unwrap_or(k - 1);

                n_wk[word_counts + new] += 1;
                n_k[new] += 1;
                n_mk[doc_counts + new] += 1;
                z[i] = new as u32;
            }
        }

        let mut ll = ll_const;
        for t in 0..k {
            ll -= lg_vbeta.get(n_k[t]);
        }
        for &n in &n_wk {
            ll += lg_beta.get(n);
        }
        for d in 0..m {
            ll -= lg_kalpha.get((offsets[d + 1] - offsets[d]) as u32);
        }
        for &n in &n_mk {
            ll += lg_alpha.get(n);
        }
        trace.push(ll);

        if sweep > config.burn_in && (sweep - config.burn_in) % effective_thin == 0 {
            for (sum, &n) in sum_wk.iter_mut().zip(&n_wk) {
                *sum += n as u64;
            }
            for (sum, &n) in sum_mk.iter_mut().zip(&n_mk) {
                *sum += n as u64;
            }
            n_snapshots += 1;
        }
    }
    debug_assert!(n_snapshots > 0);

    let snapshots = n_snapshots as f64;
    let mut phi_rows = Vec::with_capacity(k);
    for t in 0..k {
        let mut mean_counts = vec![0.0f64; v];
        let mut topic_total = 0.0f64;
        for w in 0..v {
            let mean = sum_wk[w * k + t] as f64 / snapshots;
            mean_counts[w] = mean;
            topic_total += mean;
        }
        let denom = topic_total + v_beta;
        phi_rows.push(mean_counts.iter().map(|&c| (c + beta) / denom).collect());
    }
    let mut theta_rows = Vec::with_capacity(m);
    for d in 0..m {
        let doc_len = (offsets[d + 1] - offsets[d]) as f64;
        let denom = doc_len + k_alpha;
        theta_rows.push(
            (0..k)
                .map(|t| (sum_mk[d * k + t] as f64 / snapshots + alpha) / denom)
                .collect(),
        );
    }

    Ok(LdaResult {
        phi_hat: TopicWordMatrix::new(phi_rows)?,
        theta_hat: DocTopicMatrix::new(theta_rows)?,
        log_likelihood_trace: trace,
    })
}

/// Uniform random permutation of 0..n by Fisher–Yates over the crate RNG.
/// Hand-rolled so the byte-level draw sequence is pinned by this crate, not
/// by a dependency's shuffle implementation.
pub fn random_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng_from(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

/// Permute the documents of `corpus` uniformly at random. Document
/// contents are untouched; only their order changes.
pub fn shuffle_corpus(corpus: &Corpus, seed: u64) -> Corpus {
    let perm = random_permutation(corpus.n_docs(), seed);
    let documents = perm
        .iter()
        .map(|&i| corpus.documents()[i].clone())
        .collect();
    Corpus::new(corpus.vocabulary().clone(), documents)
        .expect("permutation preserves corpus validity")
}
