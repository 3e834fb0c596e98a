//! Synthetic epoch streams and the paired refinement / baseline runs over
//! them.

pub mod pipeline;
pub mod plot;
pub mod report;
pub mod stream;

use crate::config::{SimConfig, SlrConfig};
use crate::error::Result;
use crate::metrics::{adjusted_rand_index, nmi, purity};
use crate::model::{EpochRecord, FeatureMatrix, HardLabeling};

pub use pipeline::{
    median_nn_distance, resolve_eps, run_baseline, run_baseline_with_eps, run_pipeline,
    run_pipeline_with_eps, M_CLUSTERS, M_CLUSTERS_RAW, M_CONSISTENCY, M_NOISE, M_NOISE_RAW,
};
pub use report::{AggregateSummary, RunReport};
pub use stream::{generate_stream, noise_sigma, EpochStream};

pub const M_ARI: &str = "ari";
pub const M_NMI: &str = "nmi";
pub const M_PURITY: &str = "purity";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    Slr,
    Baseline,
}

/// One simulated run: the stream plus the records of both arms, each record
/// scored against the ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRun {
    pub ground_truth: HardLabeling,
    pub features: Vec<FeatureMatrix>,
    pub eps: f64,
    pub slr: Vec<EpochRecord>,
    pub baseline: Vec<EpochRecord>,
}

/// Adds ARI, NMI and purity of the refined labels against `truth`.
pub fn score_records(records: &mut [EpochRecord], truth: &HardLabeling) -> Result<()> {
    for r in records {
        let l = &r.refined_labels;
        r.metrics
            .insert(M_ARI.into(), adjusted_rand_index(l, truth)?);
        r.metrics.insert(M_NMI.into(), nmi(l, truth)?);
        r.metrics.insert(M_PURITY.into(), purity(l, truth)?);
    }
    Ok(())
}

pub fn run_simulation(sim: &SimConfig, slr: &SlrConfig) -> Result<SimRun> {
    let stream = generate_stream(sim)?;
    let eps = resolve_eps(&stream.features, slr)?;
    let mut slr_records = run_pipeline_with_eps(&stream.features, slr, eps)?;
    let mut base_records = run_baseline_with_eps(&stream.features, slr, eps)?;
    score_records(&mut slr_records, &stream.ground_truth)?;
    score_records(&mut base_records, &stream.ground_truth)?;
    Ok(SimRun {
        ground_truth: stream.ground_truth,
        features: stream.features,
        eps,
        slr: slr_records,
        baseline: base_records,
    })
}

impl SimRun {
    pub fn records(&self, arm: Arm) -> &[EpochRecord] {
        match arm {
            Arm::Slr => &self.slr,
            Arm::Baseline => &self.baseline,
        }
    }

    /// Per-epoch values of one metric (NaN where absent).
    pub fn series(&self, arm: Arm, metric: &str) -> Vec<f64> {
        self.records(arm)
            .iter()
            .map(|r| r.metrics.get(metric).copied().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn final_metric(&self, arm: Arm, metric: &str) -> f64 {
        self.series(arm, metric).last().copied().unwrap_or(f64::NAN)
    }

    /// Mean over the epochs where the metric exists.
    pub fn mean_metric(&self, arm: Arm, metric: &str) -> f64 {
        let vals: Vec<f64> = self
            .series(arm, metric)
            .into_iter()
            .filter(|v| !v.is_nan())
            .collect();
        if vals.is_empty() {
            f64::NAN
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runs_are_reproducible() {
        let sim = SimConfig {
            n_epochs: 3,
            ..SimConfig::default()
        };
        let a = run_simulation(&sim, &SlrConfig::default()).unwrap();
        let b = run_simulation(&sim, &SlrConfig::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.slr.len(), 3);
        assert!(a.slr.iter().all(|r| r.metrics.contains_key(M_ARI)));
        assert!(a.mean_metric(Arm::Slr, M_CONSISTENCY).is_finite());
    }
}
