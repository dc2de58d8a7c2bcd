//! Experiment orchestration: corpora × K-sweep × replicated shuffled LDA
//! runs, producing the similarity samples behind every stability table.
//!
//! Fit units — one (corpus, K, run) triple each — execute in parallel on
//! the current rayon pool. All randomness flows through seeds derived from
//! the unit's coordinates, so results are identical at any worker count.

use std::time::Instant;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::alignment::{greedy_match, jss_matrix_between, topic_document_profiles, TopicMatching};
use crate::error::{Error, Result};
use crate::generation::{generate_corpus, GenerationConfig, GroundTruth};
use crate::inference::{fit, random_permutation, shuffle_corpus, LdaConfig, LdaResult};
use crate::measures::{jis, rbo, top_n};
use crate::seed::{derive_seed, stream};
use crate::stability::{
    stability_table, AggregateBy, Kind, Measure, SimilaritySample, StabilityRecord,
};
use crate::types::{Corpus, DocTopicMatrix, TopicWordMatrix};

/// Which matrix drives the greedy topic correspondence. Measures are always
/// evaluated on φ rows; θ-based matching is a diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlignmentBasis {
    #[default]
    Phi,
    Theta,
}

/// LDA settings shared by every run of a sweep; `alpha: None` selects the
/// per-K default 50/K.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaTemplate {
    pub alpha: Option<f64>,
    pub beta: f64,
    pub n_iterations: usize,
    pub burn_in: usize,
    pub sample_every: usize,
}

impl Default for LdaTemplate {
    fn default() -> Self {
        LdaTemplate {
            alpha: None,
            beta: 0.01,
            n_iterations: 1000,
            burn_in: 500,
            sample_every: 10,
        }
    }
}

impl LdaTemplate {
    pub fn materialize(&self, k: usize, run_seed: u64) -> LdaConfig {
        LdaConfig {
            k,
            alpha: self.alpha.unwrap_or(50.0 / k as f64),
            beta: self.beta,
            n_iterations: self.n_iterations,
            burn_in: self.burn_in,
            sample_every: self.sample_every,
            run_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        // Valid iff any materialization is; K and seed don't affect it.
        self.materialize(2, 0).validate()
    }
}

/// Sweep shape: which K values, how many replicated runs, which measures.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    /// Inclusive K range.
    pub k_min: usize,
    pub k_max: usize,
    /// Replicated runs per (corpus, K); run 1 is the alignment base.
    pub n_runs: usize,
    pub measures: Vec<Measure>,
    pub top_n: usize,
    pub rbo_p: f64,
    pub aggregate_by: AggregateBy,
    pub alignment_basis: AlignmentBasis,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            k_min: 7,
            k_max: 13,
            n_runs: 2,
            measures: Measure::ALL.to_vec(),
            top_n: crate::measures::DEFAULT_TOP_N,
            rbo_p: crate::measures::DEFAULT_RBO_P,
            aggregate_by: AggregateBy::default(),
            alignment_basis: AlignmentBasis::default(),
        }
    }
}

impl SweepSettings {
    pub fn validate(&self) -> Result<()> {
        if self.k_min < 1 || self.k_min > self.k_max {
            return Err(Error::Config(format!(
                "invalid K range {}..={}",
                self.k_min, self.k_max
            )));
        }
        if self.n_runs < 2 {
            return Err(Error::Config(
                "n_runs must be >= 2 (run 1 is the alignment base)".into(),
            ));
        }
        if self.measures.is_empty() {
            return Err(Error::Config("at least one measure must be enabled".into()));
        }
        let mut seen = [false; 3];
        for &m in &self.measures {
            let slot = &mut seen[m as usize];
            if *slot {
                return Err(Error::Config(format!("measure {m} listed twice")));
            }
            *slot = true;
        }
        if self.top_n < 1 {
            return Err(Error::Config("top_n must be >= 1".into()));
        }
        if !(0.0 < self.rbo_p && self.rbo_p < 1.0) {
            return Err(Error::Config(format!(
                "rbo_p must lie in (0,1), got {}",
                self.rbo_p
            )));
        }
        Ok(())
    }

    pub fn k_values(&self) -> impl Iterator<Item = usize> {
        self.k_min..=self.k_max
    }
}

/// A full synthetic-benchmark experiment.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExperimentPlan {
    pub generation: GenerationConfig,
    pub lda: LdaTemplate,
    pub sweep: SweepSettings,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        self.generation.validate()?;
        self.lda.validate()?;
        self.sweep.validate()?;
        if self.sweep.top_n > self.generation.vocab_size {
            return Err(Error::Config(format!(
                "top_n {} exceeds vocabulary size {}",
                self.sweep.top_n, self.generation.vocab_size
            )));
        }
        Ok(())
    }
}

/// Bookkeeping for one completed fit.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub corpus_id: usize,
    pub k: usize,
    pub run_id: usize,
    pub run_seed: u64,
    pub wall_time: f64,
    /// Content digest of φ̂ — stable across re-execution with the same seed.
    pub phi_digest: String,
}

/// Hex SHA-256 over the row-major little-endian f64 bytes of a matrix.
pub fn matrix_digest(rows: &[Vec<f64>]) -> String {
    let mut hasher = Sha256::new();
    for row in rows {
        for &x in row {
            hasher.update(x.to_bits().to_le_bytes());
        }
    }
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

struct FitUnit {
    k: usize,
    run_id: usize,
    run_seed: u64,
    result: LdaResult,
    /// θ̂ columns restored to base document order, kept only under the
    /// θ-alignment diagnostic.
    theta_profiles: Option<Vec<Vec<f64>>>,
    wall_time: f64,
}

fn unit_seeds(corpus_seed: u64, k: usize, run_id: usize) -> (u64, u64) {
    let fit_seed = derive_seed(
        derive_seed(derive_seed(corpus_seed, stream::FIT), k as u64),
        run_id as u64,
    );
    let shuffle_seed = derive_seed(
        derive_seed(derive_seed(corpus_seed, stream::RUN_SHUFFLE), k as u64),
        run_id as u64,
    );
    (fit_seed, shuffle_seed)
}

fn run_unit(
    corpus: &Corpus,
    corpus_id: usize,
    corpus_seed: u64,
    k: usize,
    run_id: usize,
    lda: &LdaTemplate,
    basis: AlignmentBasis,
) -> Result<FitUnit> {
    let (run_seed, shuffle_seed) = unit_seeds(corpus_seed, k, run_id);
    let started = Instant::now();
    let shuffled;
    let fit_input = if run_id == 1 {
        corpus
    } else {
        shuffled = shuffle_corpus(corpus, shuffle_seed);
        &shuffled
    };
    let config = lda.materialize(k, run_seed);
    let result = fit(fit_input, &config).map_err(|source| Error::Fit {
        corpus_id,
        k,
        run_id,
        source: Box::new(source),
    })?;
    let theta_profiles = match basis {
        AlignmentBasis::Phi => None,
        AlignmentBasis::Theta => {
            let rows = if run_id == 1 {
                result.theta_hat.rows().to_vec()
            } else {
                // Shuffled position i holds base document perm[i]; undo it.
                let perm = random_permutation(corpus.n_docs(), shuffle_seed);
                let mut rows = vec![Vec::new(); corpus.n_docs()];
                for (i, &original) in perm.iter().enumerate() {
                    rows[original] = result.theta_hat.row(i).to_vec();
                }
                rows
            };
            Some(topic_document_profiles(&DocTopicMatrix::new(rows)?)?)
        }
    };
    let wall_time = started.elapsed().as_secs_f64();
    eprintln!("corpus {corpus_id} K={k} run {run_id}: {wall_time:.2}s");
    Ok(FitUnit {
        k,
        run_id,
        run_seed,
        result,
        theta_profiles,
        wall_time,
    })
}

fn align(
    reference_phi: &TopicWordMatrix,
    reference_profiles: Option<&[Vec<f64>]>,
    candidate: &FitUnit,
) -> Result<TopicMatching> {
    let sim = match (reference_profiles, &candidate.theta_profiles) {
        (Some(r), Some(c)) => jss_matrix_between(r, c)?,
        _ => jss_matrix_between(reference_phi.rows(), candidate.result.phi_hat.rows())?,
    };
    greedy_match(&sim)
}

/// Emit one sample per enabled measure for every matched topic pair.
#[allow(clippy::too_many_arguments)]
fn emit_samples(
    samples: &mut Vec<SimilaritySample>,
    matching: &TopicMatching,
    reference_phi: &TopicWordMatrix,
    candidate_phi: &TopicWordMatrix,
    corpus_id: usize,
    run_id: usize,
    k: usize,
    kind: Kind,
    sweep: &SweepSettings,
) -> Result<()> {
    for (ref_topic, cand_topic, jss_score) in matching.by_reference() {
        for &measure in &sweep.measures {
            let value = match measure {
                Measure::Jss => jss_score,
                Measure::Jis | Measure::Rbo => {
                    let a = top_n(reference_phi.row(ref_topic), sweep.top_n)?;
                    let b = top_n(candidate_phi.row(cand_topic), sweep.top_n)?;
                    if measure == Measure::Jis {
                        jis(&a, &b)
                    } else {
                        rbo(&a, &b, sweep.rbo_p)?
                    }
                }
            };
            samples.push(SimilaritySample::new(
                corpus_id, run_id, k, measure, kind, ref_topic, value,
            )?);
        }
    }
    Ok(())
}

/// Sweep one corpus across the K range with replicated shuffled runs.
///
/// Within-samples compare runs 2..n to run 1; between-samples compare every
/// run to the ground truth, only at K == K_true, and only when `truth` is
/// present.
pub fn sweep_corpus(
    corpus: &Corpus,
    truth: Option<&GroundTruth>,
    corpus_id: usize,
    corpus_seed: u64,
    k_true: Option<usize>,
    lda: &LdaTemplate,
    sweep: &SweepSettings,
) -> Result<(Vec<SimilaritySample>, Vec<RunRecord>)> {
    sweep.validate()?;
    lda.validate()?;
    if sweep.top_n > corpus.vocab_size() {
        return Err(Error::Config(format!(
            "top_n {} exceeds vocabulary size {}",
            sweep.top_n,
            corpus.vocab_size()
        )));
    }

    let units: Vec<(usize, usize)> = sweep
        .k_values()
        .flat_map(|k| (1..=sweep.n_runs).map(move |run_id| (k, run_id)))
        .collect();
    let outcomes: Vec<Result<FitUnit>> = units
        .par_iter()
        .map(|&(k, run_id)| {
            run_unit(corpus, corpus_id, corpus_seed, k, run_id, lda, sweep.alignment_basis)
        })
        .collect();
    // Deterministic abort on the first failing unit in plan order.
    let mut fits = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        fits.push(outcome?);
    }

    let truth_profiles = match (sweep.alignment_basis, truth) {
        (AlignmentBasis::Theta, Some(t)) => Some(topic_document_profiles(&t.theta_true)?),
        _ => None,
    };

    let mut samples = Vec::new();
    let mut records = Vec::with_capacity(fits.len());
    for k in sweep.k_values() {
        let ks: Vec<&FitUnit> = fits.iter().filter(|u| u.k == k).collect();
        let base = ks[0];
        debug_assert_eq!(base.run_id, 1);
        for unit in &ks {
            if let (Some(t), Some(kt)) = (truth, k_true) {
                if k == kt {
                    let matching =
                        align(&t.phi_true, truth_profiles.as_deref(), unit)?;
                    emit_samples(
                        &mut samples,
                        &matching,
                        &t.phi_true,
                        &unit.result.phi_hat,
                        corpus_id,
                        unit.run_id,
                        k,
                        Kind::Between,
                        sweep,
                    )?;
                }
            }
            if unit.run_id > 1 {
                let matching = align(
                    &base.result.phi_hat,
                    base.theta_profiles.as_deref(),
                    unit,
                )?;
                emit_samples(
                    &mut samples,
                    &matching,
                    &base.result.phi_hat,
                    &unit.result.phi_hat,
                    corpus_id,
                    unit.run_id,
                    k,
                    Kind::Within,
                    sweep,
                )?;
            }
            records.push(RunRecord {
                corpus_id,
                k,
                run_id: unit.run_id,
                run_seed: unit.run_seed,
                wall_time: unit.wall_time,
                phi_digest: matrix_digest(unit.result.phi_hat.rows()),
            });
        }
    }
    Ok((samples, records))
}

/// Execute a full plan: generate every corpus, sweep each one, concatenate.
pub fn execute(plan: &ExperimentPlan) -> Result<(Vec<SimilaritySample>, Vec<RunRecord>)> {
    plan.validate()?;
    let k_true = plan.generation.k_true;
    if !(plan.sweep.k_min..=plan.sweep.k_max).contains(&k_true) {
        eprintln!(
            "warning: K_true={} outside the sweep range {}..={}; no between-samples will exist",
            k_true, plan.sweep.k_min, plan.sweep.k_max
        );
    }
    let mut samples = Vec::new();
    let mut records = Vec::new();
    for corpus_id in 0..plan.generation.n_corpora {
        let corpus_seed = plan.generation.corpus_seed(corpus_id);
        let (corpus, truth) = generate_corpus(&plan.generation, corpus_seed)?;
        let (s, r) = sweep_corpus(
            &corpus,
            Some(&truth),
            corpus_id,
            corpus_seed,
            Some(k_true),
            &plan.lda,
            &plan.sweep,
        )?;
        samples.extend(s);
        records.extend(r);
    }
    Ok((samples, records))
}

/// Stability table for an executed plan, labelled with the φ family.
pub fn sweep_report(
    plan: &ExperimentPlan,
    samples: &[SimilaritySample],
) -> Result<Vec<StabilityRecord>> {
    stability_table(
        &plan.generation.phi_family.to_string(),
        samples,
        plan.sweep.aggregate_by,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generation::PhiFamily;

    fn tiny_plan() -> ExperimentPlan {
        ExperimentPlan {
            generation: GenerationConfig {
                k_true: 2,
                n_docs: 8,
                vocab_size: 12,
                doc_length: 10,
                alpha: 0.1,
                phi_family: PhiFamily::UniformSeparable,
                n_corpora: 1,
                master_seed: 1234,
                reinject_max: 3,
            },
            lda: LdaTemplate {
                n_iterations: 40,
                burn_in: 20,
                ..LdaTemplate::default()
            },
            sweep: SweepSettings {
                k_min: 2,
                k_max: 2,
                n_runs: 2,
                top_n: 5,
                ..SweepSettings::default()
            },
        }
    }

    fn strip_wall(records: &[RunRecord]) -> Vec<(usize, usize, usize, u64, String)> {
        records
            .iter()
            .map(|r| (r.corpus_id, r.k, r.run_id, r.run_seed, r.phi_digest.clone()))
            .collect()
    }

    #[test]
    fn sample_counts_match_loop_structure() {
        let plan = tiny_plan();
        let (samples, records) = execute(&plan).unwrap();
        let k_true = plan.generation.k_true;
        let n_measures = plan.sweep.measures.len();
        let within: Vec<_> = samples.iter().filter(|s| s.kind == Kind::Within).collect();
        let between: Vec<_> = samples.iter().filter(|s| s.kind == Kind::Between).collect();
        // (n_runs − 1) × K × |measures| within; n_runs × K_true × |measures| between.
        assert_eq!(within.len(), k_true * n_measures);
        assert_eq!(between.len(), 2 * k_true * n_measures);
        assert_eq!(records.len(), 2);
    }

    #[test]
    fn no_between_samples_off_k_true() {
        let mut plan = tiny_plan();
        plan.sweep.k_min = 3;
        plan.sweep.k_max = 3;
        let (samples, _) = execute(&plan).unwrap();
        assert!(samples.iter().all(|s| s.kind == Kind::Within));
        assert!(samples.iter().all(|s| s.k == 3));
    }

    #[test]
    fn execute_is_deterministic() {
        let plan = tiny_plan();
        let (s1, r1) = execute(&plan).unwrap();
        let (s2, r2) = execute(&plan).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(strip_wall(&r1), strip_wall(&r2));
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let plan = tiny_plan();
        let run_with = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| execute(&plan).unwrap())
        };
        let (s1, r1) = run_with(1);
        let (s2, r2) = run_with(3);
        assert_eq!(s1, s2);
        assert_eq!(strip_wall(&r1), strip_wall(&r2));
    }

    #[test]
    fn run_one_fits_the_unshuffled_corpus() {
        let plan = tiny_plan();
        let corpus_seed = plan.generation.corpus_seed(0);
        let (corpus, truth) = generate_corpus(&plan.generation, corpus_seed).unwrap();
        let (_, records) = sweep_corpus(
            &corpus,
            Some(&truth),
            0,
            corpus_seed,
            Some(2),
            &plan.lda,
            &plan.sweep,
        )
        .unwrap();
        let base = records.iter().find(|r| r.run_id == 1).unwrap();
        let config = plan.lda.materialize(2, base.run_seed);
        let direct = fit(&corpus, &config).unwrap();
        assert_eq!(matrix_digest(direct.phi_hat.rows()), base.phi_digest);
    }

    #[test]
    fn theta_basis_produces_full_sample_set() {
        let mut plan = tiny_plan();
        plan.sweep.alignment_basis = AlignmentBasis::Theta;
        let (samples, _) = execute(&plan).unwrap();
        let n_measures = plan.sweep.measures.len();
        assert_eq!(samples.len(), 3 * plan.generation.k_true * n_measures);
    }

    #[test]
    fn plan_validation_rejects_bad_sweeps() {
        let mut plan = tiny_plan();
        plan.sweep.n_runs = 1;
        assert!(plan.validate().is_err());

        let mut plan = tiny_plan();
        plan.sweep.k_min = 5;
        plan.sweep.k_max = 4;
        assert!(plan.validate().is_err());

        let mut plan = tiny_plan();
        plan.sweep.measures = vec![Measure::Jss, Measure::Jss];
        assert!(plan.validate().is_err());

        let mut plan = tiny_plan();
        plan.sweep.top_n = 13;
        assert!(plan.validate().is_err());

        let mut plan = tiny_plan();
        plan.sweep.rbo_p = 1.0;
        assert!(plan.validate().is_err());
    }
}
