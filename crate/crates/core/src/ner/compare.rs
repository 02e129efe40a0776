use serde::{Deserialize, Serialize};

use super::metrics::{relative_difference, RunSummary};
use super::LabelStats;
use crate::Result;

/// Aggregated runs of one embedding system on one dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemScores {
    pub system: String,
    pub summary: RunSummary,
}

/// One system against the baseline, with the dataset covariates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub language: String,
    pub system: String,
    pub baseline: String,
    pub macro_f1: f64,
    pub baseline_macro_f1: f64,
    pub relative_difference: f64,
    pub density: f64,
    /// Dataset size in tokens.
    pub size: u64,
}

/// Rows comparing each system's mean macro-F1 with the baseline's.
pub fn compare_systems(
    language: &str,
    stats: &LabelStats,
    baseline: &SystemScores,
    systems: &[SystemScores],
) -> Result<Vec<ComparisonRow>> {
    let b = baseline.summary.mean.macro_f1;
    systems
        .iter()
        .map(|s| {
            let a = s.summary.mean.macro_f1;
            Ok(ComparisonRow {
                language: language.to_owned(),
                system: s.system.clone(),
                baseline: baseline.system.clone(),
                macro_f1: a,
                baseline_macro_f1: b,
                relative_difference: relative_difference(a, b)?,
                density: stats.density,
                size: stats.n,
            })
        })
        .collect()
}
