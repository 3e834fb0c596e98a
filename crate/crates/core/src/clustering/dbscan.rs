use std::collections::VecDeque;

use super::distance::{pairwise_distances, DistanceMatrix, Metric};
use crate::error::{Result, SlrError};
use crate::model::{FeatureMatrix, HardLabeling};

/// Flat DBSCAN over Euclidean features.
///
/// A point is core when at least `min_pts` points (itself included) lie
/// within `eps`. Cluster ids follow the order in which their first core
/// point is met scanning indices upward; a border point reachable from
/// several clusters joins the one discovered first.
pub fn dbscan(features: &FeatureMatrix, eps: f64, min_pts: usize) -> Result<HardLabeling> {
    let dist = pairwise_distances(features, Metric::Euclidean);
    dbscan_with_distances(&dist, eps, min_pts)
}

pub fn dbscan_with_distances(
    dist: &DistanceMatrix,
    eps: f64,
    min_pts: usize,
) -> Result<HardLabeling> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(SlrError::InvalidParameter(format!(
            "eps = {eps} must be > 0"
        )));
    }
    if min_pts == 0 {
        return Err(SlrError::InvalidParameter("min_pts must be >= 1".into()));
    }
    let n = dist.n();
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            dist.row(i)
                .iter()
                .enumerate()
                .filter(|(_, &d)| d <= eps)
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let is_core: Vec<bool> = neighbors.iter().map(|nb| nb.len() >= min_pts).collect();

    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for seed in 0..n {
        if !is_core[seed] || labels[seed].is_some() {
            continue;
        }
        let cluster = next;
        next += 1;
        labels[seed] = Some(cluster);
        queue.push_back(seed);
        while let Some(p) = queue.pop_front() {
            for &q in &neighbors[p] {
                if labels[q].is_none() {
                    labels[q] = Some(cluster);
                    if is_core[q] {
                        queue.push_back(q);
                    }
                }
            }
        }
    }
    HardLabeling::new(labels)
}
