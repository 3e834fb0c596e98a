//! JSON run reports and the multi-seed summary.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Arm, SimRun, M_ARI, M_CONSISTENCY, M_NMI};
use crate::config::{SimConfig, SlrConfig};
use crate::model::EpochRecord;
use crate::sim::M_CLUSTERS;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochEntry {
    pub epoch: usize,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmReports {
    pub slr: Vec<EpochEntry>,
    pub baseline: Vec<EpochEntry>,
}

/// Report for one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub eps: f64,
    pub slr_config: SlrConfig,
    pub sim_config: SimConfig,
    pub arms: ArmReports,
}

fn entries(records: &[EpochRecord]) -> Vec<EpochEntry> {
    records
        .iter()
        .map(|r| EpochEntry {
            epoch: r.epoch_index,
            metrics: r.metrics.clone(),
        })
        .collect()
}

impl RunReport {
    pub fn new(run: &SimRun, sim: &SimConfig, slr: &SlrConfig) -> Self {
        Self {
            seed: sim.rng_seed,
            eps: run.eps,
            slr_config: slr.clone(),
            sim_config: sim.clone(),
            arms: ArmReports {
                slr: entries(&run.slr),
                baseline: entries(&run.baseline),
            },
        }
    }
}

/// Means across seeds of the final-epoch scores of both arms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateSummary {
    pub seeds: Vec<u64>,
    pub mean_final_ari_slr: f64,
    pub mean_final_ari_baseline: f64,
    /// Mean of `final ARI(slr) - final ARI(baseline)`.
    pub mean_ari_delta: f64,
    /// Fraction of seeds where the SLR arm's final ARI is strictly higher.
    pub win_rate: f64,
    /// Fraction of seeds where it is at least as high.
    pub non_loss_rate: f64,
    pub mean_final_nmi_slr: f64,
    pub mean_final_nmi_baseline: f64,
    /// Mean over seeds of the per-run mean epoch-to-epoch consistency.
    pub mean_consistency_slr: f64,
    pub mean_consistency_baseline: f64,
    pub mean_final_clusters_slr: f64,
    pub mean_final_clusters_baseline: f64,
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

impl AggregateSummary {
    pub fn from_runs(seeds: &[u64], runs: &[SimRun]) -> Self {
        let fin = |arm, m| mean(runs.iter().map(|r| r.final_metric(arm, m)));
        let deltas: Vec<f64> = runs
            .iter()
            .map(|r| r.final_metric(Arm::Slr, M_ARI) - r.final_metric(Arm::Baseline, M_ARI))
            .collect();
        let n = runs.len().max(1) as f64;
        Self {
            seeds: seeds.to_vec(),
            mean_final_ari_slr: fin(Arm::Slr, M_ARI),
            mean_final_ari_baseline: fin(Arm::Baseline, M_ARI),
            mean_ari_delta: mean(deltas.iter().copied()),
            win_rate: deltas.iter().filter(|&&d| d > 0.0).count() as f64 / n,
            non_loss_rate: deltas.iter().filter(|&&d| d >= 0.0).count() as f64 / n,
            mean_final_nmi_slr: fin(Arm::Slr, M_NMI),
            mean_final_nmi_baseline: fin(Arm::Baseline, M_NMI),
            mean_consistency_slr: mean(runs.iter().map(|r| r.mean_metric(Arm::Slr, M_CONSISTENCY))),
            mean_consistency_baseline: mean(
                runs.iter()
                    .map(|r| r.mean_metric(Arm::Baseline, M_CONSISTENCY)),
            ),
            mean_final_clusters_slr: fin(Arm::Slr, M_CLUSTERS),
            mean_final_clusters_baseline: fin(Arm::Baseline, M_CLUSTERS),
        }
    }
}
