use super::condensed::{condense_tree, extract_clusters_eom};
use super::distance::{pairwise_distances, DistanceMatrix, Metric};
use super::mst::build_mst;
use crate::error::{Result, SlrError};
use crate::model::{FeatureMatrix, HardLabeling};

/// Distance from each point to its `min_pts`-th nearest neighbor, counting
/// the point itself as the first.
pub fn core_distances(dist: &DistanceMatrix, min_pts: usize) -> Result<Vec<f64>> {
    let n = dist.n();
    if min_pts == 0 || min_pts > n {
        return Err(SlrError::InvalidParameter(format!(
            "min_pts = {min_pts} must be in 1..={n}"
        )));
    }
    Ok((0..n)
        .map(|i| {
            let mut row = dist.row(i).to_vec();
            let (_, kth, _) = row.select_nth_unstable_by(min_pts - 1, f64::total_cmp);
            *kth
        })
        .collect())
}

/// `mr(i, j) = max(core_i, core_j, d(i, j))` off the diagonal.
pub fn mutual_reachability(dist: &DistanceMatrix, min_pts: usize) -> Result<DistanceMatrix> {
    let core = core_distances(dist, min_pts)?;
    let n = dist.n();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                data[i * n + j] = dist.get(i, j).max(core[i]).max(core[j]);
            }
        }
    }
    Ok(DistanceMatrix::from_parts_unchecked(n, data))
}

/// HDBSCAN with `min_pts = min_cluster_size` for core distances and
/// excess-of-mass extraction.
pub fn hdbscan(features: &FeatureMatrix, min_cluster_size: usize) -> Result<HardLabeling> {
    hdbscan_with_distances(
        &pairwise_distances(features, Metric::Euclidean),
        min_cluster_size,
    )
}

pub fn hdbscan_with_distances(
    dist: &DistanceMatrix,
    min_cluster_size: usize,
) -> Result<HardLabeling> {
    if min_cluster_size < 2 {
        return Err(SlrError::InvalidParameter(format!(
            "min_cluster_size = {min_cluster_size} must be >= 2"
        )));
    }
    if dist.n() < min_cluster_size {
        return Ok(HardLabeling::all_noise(dist.n()));
    }
    let mr = mutual_reachability(dist, min_cluster_size)?;
    let tree = condense_tree(&build_mst(&mr), min_cluster_size)?;
    Ok(extract_clusters_eom(&tree))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(pos: &[f64]) -> DistanceMatrix {
        let rows: Vec<[f64; 1]> = pos.iter().map(|&x| [x]).collect();
        pairwise_distances(&FeatureMatrix::from_rows(&rows).unwrap(), Metric::Euclidean)
    }

    #[test]
    fn min_pts_one_is_identity() {
        let d = line(&[0.0, 1.5, 4.0, 4.1]);
        assert_eq!(mutual_reachability(&d, 1).unwrap(), d);
    }

    #[test]
    fn collinear_example() {
        let d = line(&[0.0, 1.0, 3.0]);
        assert_eq!(core_distances(&d, 2).unwrap(), vec![1.0, 1.0, 2.0]);
        let mr = mutual_reachability(&d, 2).unwrap();
        assert_eq!(mr.get(0, 1), 1.0);
        assert_eq!(mr.get(1, 2), 2.0);
        assert_eq!(mr.get(0, 2), 3.0);
        assert_eq!(mr.get(2, 2), 0.0);
    }

    #[test]
    fn min_pts_out_of_range() {
        let d = line(&[0.0, 1.0]);
        assert!(mutual_reachability(&d, 3).is_err());
        assert!(mutual_reachability(&d, 0).is_err());
    }

    #[test]
    fn single_sample_is_noise() {
        let f = FeatureMatrix::from_rows(&[[1.0, 1.0]]).unwrap();
        assert_eq!(hdbscan(&f, 7).unwrap().to_raw(), vec![-1]);
    }

    #[test]
    fn duplicate_rows_give_one_cluster_each() {
        let distinct = [[0.0, 0.0], [1.0, 0.0], [0.0, 3.0]];
        let rows: Vec<[f64; 2]> = (0..3 * 8).map(|i| distinct[i % 3]).collect();
        let f = FeatureMatrix::from_rows(&rows).unwrap();
        let labels = hdbscan(&f, 7).unwrap();
        assert_eq!(labels.n_clusters(), 3);
        assert_eq!(labels.n_noise(), 0);
        for i in 0..rows.len() {
            assert_eq!(labels.get(i), labels.get(i % 3));
        }
    }
}
