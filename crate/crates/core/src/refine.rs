//! Label refinement across consecutive clustering epochs.
//!
//! Previous-epoch clusters are mapped onto current-epoch clusters through a
//! row-normalized IoU matrix. Each sample's previous label, pushed through
//! that map, is blended with its current one-hot label into a soft label,
//! and the soft labels are clustered again to obtain refined hard labels.
//!
//! Noise never belongs to a cluster set. A sample that is noise in the
//! current epoch gets a masked (all-zero) soft row and stays noise after
//! hardening; a sample that was noise in the previous epoch keeps its
//! current one-hot label.

use crate::clustering::{hdbscan_with_distances, pairwise_distances_unordered, sorted_sum};
use crate::error::{Result, SlrError};
use crate::model::{FeatureMatrix, HardLabeling, ProjectionMatrix, SoftLabelMatrix};

pub fn one_hot(labeling: &HardLabeling) -> SoftLabelMatrix {
    let m = labeling.n_clusters();
    let mut data = vec![0.0; labeling.len() * m];
    let mut masked = vec![false; labeling.len()];
    for (i, label) in labeling.labels().iter().enumerate() {
        match label {
            Some(c) => data[i * m + c] = 1.0,
            None => masked[i] = true,
        }
    }
    SoftLabelMatrix::new(m, data, masked).expect("one-hot rows are valid")
}

/// Raw IoU matrix: entry `(a, b)` is `|C_a ∩ D_b| / |C_a ∪ D_b|` where
/// `C_a` are the samples labeled `a` previously and `D_b` those labeled `b`
/// now.
pub fn projection_matrix(prev: &HardLabeling, curr: &HardLabeling) -> Result<ProjectionMatrix> {
    SlrError::check_len("previous vs current labels", prev.len(), curr.len())?;
    let (mp, mc) = (prev.n_clusters(), curr.n_clusters());
    let mut inter = vec![0usize; mp * mc];
    for (a, b) in prev.labels().iter().zip(curr.labels()) {
        if let (Some(a), Some(b)) = (a, b) {
            inter[a * mc + b] += 1;
        }
    }
    let prev_sizes = prev.cluster_sizes();
    let curr_sizes = curr.cluster_sizes();
    let mut values = vec![0.0; mp * mc];
    for a in 0..mp {
        for b in 0..mc {
            let i = inter[a * mc + b];
            if i > 0 {
                let union = prev_sizes[a] + curr_sizes[b] - i;
                values[a * mc + b] = i as f64 / union as f64;
            }
        }
    }
    ProjectionMatrix::new(mp, mc, values)
}

/// Divides each row by its sum; all-zero rows stay zero.
pub fn normalize_projection(raw: &ProjectionMatrix) -> ProjectionMatrix {
    let mc = raw.m_curr();
    let mut values = Vec::with_capacity(raw.m_prev() * mc);
    for a in 0..raw.m_prev() {
        let row = raw.row(a);
        let sum = sorted_sum(&mut row.to_vec());
        if sum > 0.0 {
            values.extend(row.iter().map(|v| v / sum));
        } else {
            values.extend_from_slice(row);
        }
    }
    ProjectionMatrix::new(raw.m_prev(), mc, values).expect("normalized rows stay in [0, 1]")
}

/// `P̂ᵀ y`: maps a previous-epoch label vector into the current label space.
pub fn project_label(p_hat: &ProjectionMatrix, y_prev: &[f64]) -> Result<Vec<f64>> {
    SlrError::check_len("previous label vector", y_prev.len(), p_hat.m_prev())?;
    let mut out = vec![0.0; p_hat.m_curr()];
    for (a, &w) in y_prev.iter().enumerate() {
        if w != 0.0 {
            for (o, &p) in out.iter_mut().zip(p_hat.row(a)) {
                *o += w * p;
            }
        }
    }
    Ok(out)
}

/// `alpha * y_curr + (1 - alpha) * y_proj`, rescaled to unit mass.
///
/// An all-zero `y_curr` is a masked row and yields zeros.
pub fn refine_soft(y_curr: &[f64], y_proj: &[f64], alpha: f64) -> Result<Vec<f64>> {
    SlrError::check_len("projected label vector", y_proj.len(), y_curr.len())?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(SlrError::InvalidParameter(format!(
            "alpha = {alpha} must lie in [0, 1]"
        )));
    }
    if y_curr.iter().all(|&v| v == 0.0) {
        return Ok(vec![0.0; y_curr.len()]);
    }
    let mut out: Vec<f64> = y_curr
        .iter()
        .zip(y_proj)
        .map(|(c, p)| alpha * c + (1.0 - alpha) * p)
        .collect();
    let sum = sorted_sum(&mut out.clone());
    if sum > 0.0 {
        out.iter_mut().for_each(|v| *v /= sum);
    }
    Ok(out)
}

/// Soft labels for the current epoch given the labels of the previous one.
pub fn refine_epoch(
    prev: &HardLabeling,
    curr: &HardLabeling,
    alpha: f64,
) -> Result<SoftLabelMatrix> {
    let p_hat = normalize_projection(&projection_matrix(prev, curr)?);
    refine_with_projection(prev, curr, &p_hat, alpha)
}

/// Same as [`refine_epoch`] with a precomputed normalized projection.
pub fn refine_with_projection(
    prev: &HardLabeling,
    curr: &HardLabeling,
    p_hat: &ProjectionMatrix,
    alpha: f64,
) -> Result<SoftLabelMatrix> {
    SlrError::check_len("previous vs current labels", prev.len(), curr.len())?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(SlrError::InvalidParameter(format!(
            "alpha = {alpha} must lie in [0, 1]"
        )));
    }
    let m = curr.n_clusters();
    let mut data = vec![0.0; curr.len() * m];
    let mut masked = vec![false; curr.len()];
    let mut y_curr = vec![0.0; m];
    for (i, (a, b)) in prev.labels().iter().zip(curr.labels()).enumerate() {
        let row = &mut data[i * m..(i + 1) * m];
        match (a, b) {
            (_, None) => masked[i] = true,
            (None, Some(b)) => row[*b] = 1.0,
            (Some(a), Some(b)) => {
                y_curr[*b] = 1.0;
                let soft = refine_soft(&y_curr, p_hat.row(*a), alpha)?;
                y_curr[*b] = 0.0;
                row.copy_from_slice(&soft);
            }
        }
    }
    SoftLabelMatrix::new(m, data, masked)
}

/// Hard labels from HDBSCAN over the unmasked soft rows (Euclidean).
/// Masked rows become noise. Sums are taken in sorted order throughout, so
/// the result does not depend on the order of the classes.
pub fn harden_hdbscan(soft: &SoftLabelMatrix, min_cluster_size: usize) -> Result<HardLabeling> {
    let kept: Vec<usize> = (0..soft.n_samples())
        .filter(|&i| !soft.is_masked(i))
        .collect();
    if kept.is_empty() {
        if min_cluster_size < 2 {
            return Err(SlrError::InvalidParameter(format!(
                "min_cluster_size = {min_cluster_size} must be >= 2"
            )));
        }
        return Ok(HardLabeling::all_noise(soft.n_samples()));
    }
    let mut data = Vec::with_capacity(kept.len() * soft.n_classes());
    for &i in &kept {
        data.extend_from_slice(soft.row(i));
    }
    let rows = FeatureMatrix::new(kept.len(), soft.n_classes(), data)?;
    let sub = hdbscan_with_distances(&pairwise_distances_unordered(&rows), min_cluster_size)?;
    let mut labels = vec![None; soft.n_samples()];
    for (k, &i) in kept.iter().enumerate() {
        labels[i] = sub.get(k);
    }
    Ok(HardLabeling::by_first_appearance(labels))
}

/// Per-row argmax with ties to the lowest class; masked rows become noise.
/// Empty classes are dropped without reordering the rest.
pub fn harden_max(soft: &SoftLabelMatrix) -> HardLabeling {
    let labels = (0..soft.n_samples())
        .map(|i| {
            if soft.is_masked(i) {
                return None;
            }
            let row = soft.row(i);
            let mut best = 0;
            for (k, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = k;
                }
            }
            Some(best)
        })
        .collect();
    HardLabeling::compacted(labels)
}
