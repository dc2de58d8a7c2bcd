//! Aggregation of similarity samples into the instability distance: the
//! average Euclidean distance of per-corpus (mean, variance) points from
//! the ideal point (1, 0).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The maximal instability value, attained at the point (0, 1).
pub const INSTABILITY_MAX: f64 = std::f64::consts::SQRT_2;

/// Similarity measure identity. Ordering follows the reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Jss,
    Jis,
    Rbo,
}

impl Measure {
    pub const ALL: [Measure; 3] = [Measure::Jss, Measure::Jis, Measure::Rbo];

    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Jss => "jss",
            Measure::Jis => "jis",
            Measure::Rbo => "rbo",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Measure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "jss" => Ok(Measure::Jss),
            "jis" => Ok(Measure::Jis),
            "rbo" => Ok(Measure::Rbo),
            other => Err(Error::Config(format!(
                "unknown measure {other:?} (expected jss, jis or rbo)"
            ))),
        }
    }
}

/// Comparison kind: against ground truth (between) or against the base run
/// (within).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Between,
    Within,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Between => "between",
            Kind::Within => "within",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "between" => Ok(Kind::Between),
            "within" => Ok(Kind::Within),
            other => Err(Error::Config(format!(
                "unknown comparison kind {other:?} (expected between or within)"
            ))),
        }
    }
}

/// One measured similarity value for one matched topic pair of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilaritySample {
    pub corpus_id: usize,
    pub run_id: usize,
    pub k: usize,
    pub measure: Measure,
    pub kind: Kind,
    /// Reference-side topic index of the matched pair.
    pub pair_index: usize,
    pub value: f64,
}

impl SimilaritySample {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        corpus_id: usize,
        run_id: usize,
        k: usize,
        measure: Measure,
        kind: Kind,
        pair_index: usize,
        value: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidInput(format!(
                "similarity value {value} outside [0,1]"
            )));
        }
        Ok(SimilaritySample {
            corpus_id,
            run_id,
            k,
            measure,
            kind,
            pair_index,
            value,
        })
    }
}

/// Which grouping index plays the role of "corpus" in the instability
/// average: one point per corpus (the default reading) or one per run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregateBy {
    #[default]
    Corpus,
    Run,
}

/// Arithmetic mean and population variance of a corpus's similarity values.
pub fn corpus_point(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::InvalidInput(
            "corpus point requires at least one value".into(),
        ));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, variance))
}

/// Instability distance: (1/t) Σ_i sqrt((m̄_i − 1)² + var(m_i)²) over the t
/// per-corpus points. Lies in [0, √2].
pub fn instability(points: &[(f64, f64)]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InvalidInput(
            "instability requires at least one point".into(),
        ));
    }
    for &(mean, variance) in points {
        if !(0.0..=1.0).contains(&mean) || !(0.0..=1.0).contains(&variance) {
            return Err(Error::InvalidInput(format!(
                "corpus point ({mean}, {variance}) outside the unit square"
            )));
        }
    }
    let total: f64 = points
        .iter()
        .map(|&(mean, variance)| ((mean - 1.0).powi(2) + variance.powi(2)).sqrt())
        .sum();
    Ok(total / points.len() as f64)
}

/// One aggregated stability row per (distribution, K, measure, kind).
///
/// `mean` and `variance` are the averages of the per-corpus means and
/// variances; `instability` averages the per-corpus distances; `t` counts
/// the corpora (or runs, under [`AggregateBy::Run`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRecord {
    pub distribution: String,
    pub k: usize,
    pub measure: Measure,
    pub kind: Kind,
    pub mean: f64,
    pub variance: f64,
    pub instability: f64,
    pub t: usize,
}

/// Aggregate samples into one record per (K, measure, kind), labelled with
/// `distribution`. Rows are ordered by (measure, kind, K); grouping within a
/// cell follows `aggregate_by`.
pub fn stability_table(
    distribution: &str,
    samples: &[SimilaritySample],
    aggregate_by: AggregateBy,
) -> Result<Vec<StabilityRecord>> {
    // (measure, kind, K) -> group id -> values. BTreeMaps pin the ordering
    // regardless of sample arrival order.
    let mut cells: BTreeMap<(Measure, Kind, usize), BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for s in samples {
        let group = match aggregate_by {
            AggregateBy::Corpus => s.corpus_id,
            AggregateBy::Run => s.run_id,
        };
        cells
            .entry((s.measure, s.kind, s.k))
            .or_default()
            .entry(group)
            .or_default()
            .push(s.value);
    }
    let mut records = Vec::with_capacity(cells.len());
    for ((measure, kind, k), groups) in cells {
        let mut points = Vec::with_capacity(groups.len());
        for values in groups.values() {
            points.push(corpus_point(values)?);
        }
        let t = points.len();
        let mean = points.iter().map(|p| p.0).sum::<f64>() / t as f64;
        let variance = points.iter().map(|p| p.1).sum::<f64>() / t as f64;
        records.push(StabilityRecord {
            distribution: distribution.to_owned(),
            k,
            measure,
            kind,
            mean,
            variance,
            instability: instability(&points)?,
            t,
        });
    }
    Ok(records)
}
