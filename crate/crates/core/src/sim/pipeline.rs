use std::collections::BTreeMap;

use crate::clustering::{dbscan_with_distances, pairwise_distances, DistanceMatrix, Metric};
use crate::config::{Hardening, ProjectionSource, SlrConfig};
use crate::error::{Result, SlrError};
use crate::metrics::{noise_fraction, pairwise_consistency};
use crate::model::{EpochRecord, FeatureMatrix, HardLabeling};
use crate::refine::{harden_hdbscan, harden_max, refine_epoch};

pub const M_CLUSTERS: &str = "n_clusters";
pub const M_CLUSTERS_RAW: &str = "n_clusters_raw";
pub const M_NOISE: &str = "noise_fraction";
pub const M_NOISE_RAW: &str = "noise_fraction_raw";
pub const M_CONSISTENCY: &str = "consistency";

/// Median over samples of the distance to the nearest other sample.
pub fn median_nn_distance(dist: &DistanceMatrix) -> Option<f64> {
    let n = dist.n();
    if n < 2 {
        return None;
    }
    let mut nn: Vec<f64> = (0..n)
        .map(|i| {
            dist.row(i)
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &d)| d)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    nn.sort_by(f64::total_cmp);
    Some(if n % 2 == 1 {
        nn[n / 2]
    } else {
        0.5 * (nn[n / 2 - 1] + nn[n / 2])
    })
}

/// The configured DBSCAN radius, or `eps_nn_factor` times the median
/// nearest-neighbor distance of the first epoch.
pub fn resolve_eps(features: &[FeatureMatrix], cfg: &SlrConfig) -> Result<f64> {
    if let Some(eps) = cfg.dbscan_eps {
        return Ok(eps);
    }
    let first = features
        .first()
        .ok_or_else(|| SlrError::InvalidParameter("no epochs".into()))?;
    let median = median_nn_distance(&pairwise_distances(first, Metric::Euclidean)).unwrap_or(1.0);
    let eps = cfg.eps_nn_factor * median;
    Ok(if eps > 0.0 { eps } else { f64::EPSILON })
}

fn check_epochs(features: &[FeatureMatrix]) -> Result<()> {
    let first = features
        .first()
        .ok_or_else(|| SlrError::InvalidParameter("at least one epoch is required".into()))?;
    for f in features {
        SlrError::check_len("samples per epoch", f.n_samples(), first.n_samples())?;
    }
    Ok(())
}

fn base_metrics(raw: &HardLabeling, refined: &HardLabeling) -> BTreeMap<String, f64> {
    BTreeMap::from([
        (M_CLUSTERS_RAW.to_string(), raw.n_clusters() as f64),
        (M_NOISE_RAW.to_string(), noise_fraction(raw)),
        (M_CLUSTERS.to_string(), refined.n_clusters() as f64),
        (M_NOISE.to_string(), noise_fraction(refined)),
    ])
}

fn raw_labels(features: &FeatureMatrix, eps: f64, cfg: &SlrConfig) -> Result<HardLabeling> {
    let dist = pairwise_distances(features, Metric::Euclidean);
    dbscan_with_distances(&dist, eps, cfg.dbscan_min_pts)
}

/// Runs the refinement loop over a sequence of epochs.
///
/// Epoch 0 keeps the raw DBSCAN labels. From epoch 1 on, the previous
/// epoch's labels (refined by default, raw if configured) are projected onto
/// the current raw labels, blended into soft labels and hardened.
pub fn run_pipeline(features: &[FeatureMatrix], cfg: &SlrConfig) -> Result<Vec<EpochRecord>> {
    let eps = resolve_eps(features, cfg)?;
    run_pipeline_with_eps(features, cfg, eps)
}

pub fn run_pipeline_with_eps(
    features: &[FeatureMatrix],
    cfg: &SlrConfig,
    eps: f64,
) -> Result<Vec<EpochRecord>> {
    cfg.validate()?;
    check_epochs(features)?;
    let mut records: Vec<EpochRecord> = Vec::with_capacity(features.len());
    for (t, f) in features.iter().enumerate() {
        let raw = raw_labels(f, eps, cfg)?;
        let record = match records.last() {
            None => EpochRecord {
                epoch_index: t,
                metrics: base_metrics(&raw, &raw),
                soft_labels: None,
                refined_labels: raw.clone(),
                raw_labels: raw,
            },
            Some(prev) => {
                let seed = match cfg.projection_source {
                    ProjectionSource::Refined => &prev.refined_labels,
                    ProjectionSource::Raw => &prev.raw_labels,
                };
                let soft = refine_epoch(seed, &raw, cfg.alpha)?;
                let refined = match cfg.hardening {
                    Hardening::Hdbscan => harden_hdbscan(&soft, cfg.min_cluster_size)?,
                    Hardening::Max => harden_max(&soft),
                };
                let mut metrics = base_metrics(&raw, &refined);
                metrics.insert(
                    M_CONSISTENCY.into(),
                    pairwise_consistency(&prev.refined_labels, &refined)?,
                );
                EpochRecord {
                    epoch_index: t,
                    raw_labels: raw,
                    soft_labels: Some(soft),
                    refined_labels: refined,
                    metrics,
                }
            }
        };
        records.push(record);
    }
    Ok(records)
}

/// Per-epoch DBSCAN labels with no refinement.
pub fn run_baseline(features: &[FeatureMatrix], cfg: &SlrConfig) -> Result<Vec<EpochRecord>> {
    let eps = resolve_eps(features, cfg)?;
    run_baseline_with_eps(features, cfg, eps)
}

pub fn run_baseline_with_eps(
    features: &[FeatureMatrix],
    cfg: &SlrConfig,
    eps: f64,
) -> Result<Vec<EpochRecord>> {
    cfg.validate()?;
    check_epochs(features)?;
    let mut records: Vec<EpochRecord> = Vec::with_capacity(features.len());
    for (t, f) in features.iter().enumerate() {
        let raw = raw_labels(f, eps, cfg)?;
        let mut metrics = base_metrics(&raw, &raw);
        if let Some(prev) = records.last() {
            metrics.insert(
                M_CONSISTENCY.into(),
                pairwise_consistency(&prev.refined_labels, &raw)?,
            );
        }
        records.push(EpochRecord {
            epoch_index: t,
            refined_labels: raw.clone(),
            raw_labels: raw,
            soft_labels: None,
            metrics,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> FeatureMatrix {
        let mut rows = Vec::new();
        for c in 0..3 {
            for k in 0..10 {
                rows.push([c as f64 * 10.0 + (k % 5) as f64 * 0.1, (k / 5) as f64 * 0.1]);
            }
        }
        FeatureMatrix::from_rows(&rows).unwrap()
    }

    fn cfg() -> SlrConfig {
        SlrConfig {
            dbscan_eps: Some(0.5),
            dbscan_min_pts: 3,
            ..SlrConfig::default()
        }
    }

    #[test]
    fn single_epoch_matches_baseline() {
        let f = vec![blobs()];
        assert_eq!(
            run_pipeline(&f, &cfg()).unwrap(),
            run_baseline(&f, &cfg()).unwrap()
        );
    }

    #[test]
    fn fixed_features_are_a_fixed_point() {
        let f = vec![blobs(); 4];
        let records = run_pipeline(&f, &cfg()).unwrap();
        for r in &records {
            assert_eq!(r.refined_labels, records[0].refined_labels);
            assert_eq!(r.refined_labels.n_clusters(), 3);
        }
        for r in &records[1..] {
            assert_eq!(r.metrics[M_CONSISTENCY], 1.0);
        }
    }

    #[test]
    fn all_noise_epoch_continues() {
        let f = vec![blobs(), blobs()];
        let c = SlrConfig {
            dbscan_eps: Some(1e-6),
            dbscan_min_pts: 5,
            ..SlrConfig::default()
        };
        let records = run_pipeline(&f, &c).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[1].refined_labels.n_noise(), 30);
        assert_eq!(records[1].metrics[M_NOISE], 1.0);
    }

    #[test]
    fn rejects_empty_and_mismatched() {
        assert!(run_pipeline(&[], &cfg()).is_err());
        let small = FeatureMatrix::from_rows(&[[0.0, 0.0]]).unwrap();
        assert!(run_pipeline(&[blobs(), small], &cfg()).is_err());
    }

    #[test]
    fn median_nn() {
        let f = FeatureMatrix::from_rows(&[[0.0], [1.0], [3.0], [7.0]]).unwrap();
        let d = pairwise_distances(&f, Metric::Euclidean);
        // nearest neighbor distances 1, 1, 2, 4
        assert_eq!(median_nn_distance(&d), Some(1.5));
        let one = FeatureMatrix::from_rows(&[[0.0]]).unwrap();
        assert_eq!(
            median_nn_distance(&pairwise_distances(&one, Metric::Euclidean)),
            None
        );
    }
}
