//! TOML run configuration.
//!
//! Every section and field is optional except the generation geometry
//! (`k_true`, `n_docs`, `vocab_size`, `doc_length`, `phi_family`), which is
//! required whenever a `[generation]` section is present. A minimal sweep
//! config is therefore just:
//!
//! ```toml
//! master_seed = 42
//!
//! [generation]
//! k_true = 5
//! n_docs = 200
//! vocab_size = 200
//! doc_length = 50
//! phi_family = "uniform_separable"
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generation::{GenerationConfig, PhiFamily};
use crate::harness::{ExperimentPlan, LdaTemplate, SweepSettings};
use crate::ingestion::PreprocessConfig;

pub const DEFAULT_MASTER_SEED: u64 = 20240613;
pub const DEFAULT_DOC_TOPIC_ALPHA: f64 = 0.1;
pub const DEFAULT_REINJECT_MAX: usize = 3;

/// `[generation]` section. Mirrors [`GenerationConfig`] except that the
/// master seed lives at the top level (so `--seed` can override it without
/// touching the section).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationSection {
    pub k_true: usize,
    pub n_docs: usize,
    pub vocab_size: usize,
    pub doc_length: usize,
    pub phi_family: PhiFamily,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_n_corpora")]
    pub n_corpora: usize,
    #[serde(default = "default_reinject_max")]
    pub reinject_max: usize,
}

fn default_alpha() -> f64 {
    DEFAULT_DOC_TOPIC_ALPHA
}

fn default_n_corpora() -> usize {
    1
}

fn default_reinject_max() -> usize {
    DEFAULT_REINJECT_MAX
}

impl GenerationSection {
    pub fn into_config(self, master_seed: u64) -> GenerationConfig {
        GenerationConfig {
            k_true: self.k_true,
            n_docs: self.n_docs,
            vocab_size: self.vocab_size,
            doc_length: self.doc_length,
            alpha: self.alpha,
            phi_family: self.phi_family,
            n_corpora: self.n_corpora,
            master_seed,
            reinject_max: self.reinject_max,
        }
    }
}

/// Whole config file. Unknown keys are rejected so typos surface as errors
/// instead of silently falling back to defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub master_seed: Option<u64>,
    pub generation: Option<GenerationSection>,
    pub lda: LdaTemplate,
    pub sweep: SweepSettings,
    pub preprocess: PreprocessConfig,
}

impl AppConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path.to_path_buf(), e))?;
        let config: AppConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(config)
    }

    /// The master seed after applying a `--seed` override.
    pub fn resolved_seed(&self, cli_seed: Option<u64>) -> u64 {
        cli_seed
            .or(self.master_seed)
            .unwrap_or(DEFAULT_MASTER_SEED)
    }

    /// Assemble a full experiment plan for the synthetic pipeline.
    pub fn experiment_plan(&self, master_seed: u64) -> Result<ExperimentPlan> {
        let generation = self
            .generation
            .clone()
            .ok_or_else(|| {
                Error::Config(
                    "this command needs a [generation] section in the config file".into(),
                )
            })?
            .into_config(master_seed);
        let plan = ExperimentPlan {
            generation,
            lda: self.lda.clone(),
            sweep: self.sweep.clone(),
        };
        plan.validate()?;
        Ok(plan)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generation::PhiFamily;
    use crate::stability::Measure;

    fn write_config(text: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.toml");
        fs::write(&path, text).unwrap();
        (dir, path)
    }

    #[test]
    fn empty_config_is_all_defaults() {
        let (_dir, path) = write_config("");
        let config = AppConfig::load(&path).unwrap();
        assert_eq!(config.master_seed, None);
        assert!(config.generation.is_none());
        assert_eq!(config.lda, LdaTemplate::default());
        assert_eq!(config.sweep, SweepSettings::default());
        assert_eq!(config.resolved_seed(None), DEFAULT_MASTER_SEED);
        assert_eq!(config.resolved_seed(Some(7)), 7);
    }

    #[test]
    fn full_config_parses() {
        let (_dir, path) = write_config(
            r#"
            master_seed = 99

            [generation]
            k_true = 5
            n_docs = 200
            vocab_size = 250
            doc_length = 50
            phi_family = "dirichlet_mid"
            n_corpora = 3

            [lda]
            alpha = 0.5
            n_iterations = 200
            burn_in = 100

            [sweep]
            k_min = 3
            k_max = 7
            n_runs = 4
            measures = ["jis", "rbo"]
            alignment_basis = "theta"

            [preprocess]
            min_term_count = 2
            "#,
        );
        let config = AppConfig::load(&path).unwrap();
        assert_eq!(config.resolved_seed(None), 99);
        let generation = config.generation.as_ref().unwrap();
        assert_eq!(generation.alpha, DEFAULT_DOC_TOPIC_ALPHA);
        assert_eq!(generation.n_corpora, 3);
        assert_eq!(generation.phi_family, PhiFamily::dirichlet_mid());
        assert_eq!(config.lda.alpha, Some(0.5));
        assert_eq!(config.lda.beta, 0.01);
        assert_eq!(config.sweep.measures, vec![Measure::Jis, Measure::Rbo]);
        assert_eq!(config.preprocess.min_term_count, 2);

        let plan = config.experiment_plan(99).unwrap();
        assert_eq!(plan.generation.master_seed, 99);
        assert_eq!(plan.sweep.k_values().collect::<Vec<_>>(), vec![3, 4, 5, 6, 7]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for text in [
            "master_sead = 3",
            "[generation]\nk_true = 2\nn_docs = 2\nvocab_size = 9\ndoc_length = 4\nphi_family = \"normal_1\"\nbogus = 1",
            "[lda]\niterations = 100",
            "[sweep]\nkmin = 2",
        ] {
            let (_dir, path) = write_config(text);
            let err = AppConfig::load(&path).unwrap_err();
            assert_eq!(err.exit_code(), 1, "config error expected for {text:?}");
        }
    }

    #[test]
    fn generation_section_requires_geometry() {
        let (_dir, path) = write_config("[generation]\nk_true = 5");
        assert!(AppConfig::load(&path).is_err());
    }

    #[test]
    fn plan_without_generation_section_is_a_config_error() {
        let (_dir, path) = write_config("master_seed = 1");
        let config = AppConfig::load(&path).unwrap();
        let err = config.experiment_plan(1).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn invalid_plan_surfaces_validation_error() {
        let (_dir, path) = write_config(
            r#"
            [generation]
            k_true = 0
            n_docs = 10
            vocab_size = 20
            doc_length = 5
            phi_family = "uniform_separable"
            "#,
        );
        let config = AppConfig::load(&path).unwrap();
        assert!(config.experiment_plan(1).is_err());
    }
}
