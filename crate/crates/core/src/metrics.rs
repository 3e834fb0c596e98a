//! Agreement between labelings: ARI, NMI, purity and cross-epoch pairwise
//! consistency.
//!
//! Noise is excluded everywhere: a sample only counts when it is assigned
//! in both labelings. How much was discarded is reported separately by
//! [`noise_fraction`].

use crate::error::{Result, SlrError};
use crate::model::HardLabeling;

/// Counts of co-assigned samples, predicted clusters by true clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    k_pred: usize,
    k_true: usize,
    counts: Vec<u64>,
    pred_marginals: Vec<u64>,
    true_marginals: Vec<u64>,
    total: u64,
}

impl ContingencyTable {
    pub fn new(pred: &HardLabeling, truth: &HardLabeling) -> Result<Self> {
        SlrError::check_len("predicted vs true labels", pred.len(), truth.len())?;
        let (kp, kt) = (pred.n_clusters(), truth.n_clusters());
        let mut counts = vec![0u64; kp * kt];
        for (p, t) in pred.labels().iter().zip(truth.labels()) {
            if let (Some(p), Some(t)) = (p, t) {
                counts[p * kt + t] += 1;
            }
        }
        let pred_marginals: Vec<u64> = (0..kp)
            .map(|p| counts[p * kt..(p + 1) * kt].iter().sum())
            .collect();
        let true_marginals: Vec<u64> = (0..kt)
            .map(|t| (0..kp).map(|p| counts[p * kt + t]).sum())
            .collect();
        let total = pred_marginals.iter().sum();
        Ok(Self {
            k_pred: kp,
            k_true: kt,
            counts,
            pred_marginals,
            true_marginals,
            total,
        })
    }

    pub fn get(&self, p: usize, t: usize) -> u64 {
        self.counts[p * self.k_true + t]
    }

    pub fn k_pred(&self) -> usize {
        self.k_pred
    }

    pub fn k_true(&self) -> usize {
        self.k_true
    }

    pub fn pred_marginals(&self) -> &[u64] {
        &self.pred_marginals
    }

    pub fn true_marginals(&self) -> &[u64] {
        &self.true_marginals
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

fn pairs(n: u64) -> f64 {
    (n * n.saturating_sub(1)) as f64 / 2.0
}

/// Adjusted Rand index. Returns 1.0 when the index is undefined because
/// both partitions are trivial in the same way (e.g. both a single cluster),
/// and 0.0 when no sample is assigned in both.
pub fn adjusted_rand_index(pred: &HardLabeling, truth: &HardLabeling) -> Result<f64> {
    let t = ContingencyTable::new(pred, truth)?;
    if t.total == 0 {
        return Ok(0.0);
    }
    let index: f64 = t.counts.iter().map(|&c| pairs(c)).sum();
    let a: f64 = t.pred_marginals.iter().map(|&c| pairs(c)).sum();
    let b: f64 = t.true_marginals.iter().map(|&c| pairs(c)).sum();
    let n_pairs = pairs(t.total);
    if n_pairs == 0.0 {
        return Ok(1.0);
    }
    let expected = a * b / n_pairs;
    let max = 0.5 * (a + b);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

fn entropy(marginals: &[u64], total: f64) -> f64 {
    -marginals
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            p * p.ln()
        })
        .sum::<f64>()
}

/// Normalized mutual information with arithmetic-mean normalization.
/// Two constant labelings score 1.0; no commonly assigned sample scores 0.0.
pub fn nmi(pred: &HardLabeling, truth: &HardLabeling) -> Result<f64> {
    let t = ContingencyTable::new(pred, truth)?;
    if t.total == 0 {
        return Ok(0.0);
    }
    let n = t.total as f64;
    let h_pred = entropy(&t.pred_marginals, n);
    let h_true = entropy(&t.true_marginals, n);
    if h_pred == 0.0 && h_true == 0.0 {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for p in 0..t.k_pred {
        for q in 0..t.k_true {
            let c = t.get(p, q);
            if c > 0 {
                let c = c as f64;
                let (mp, mt) = (t.pred_marginals[p] as f64, t.true_marginals[q] as f64);
                mi += c / n * (c * n / (mp * mt)).ln();
            }
        }
    }
    Ok((mi / (0.5 * (h_pred + h_true))).clamp(0.0, 1.0))
}

/// Fraction of samples falling in the majority true class of their
/// predicted cluster, 0.0 if none is assigned. Not symmetric in its
/// arguments.
pub fn purity(pred: &HardLabeling, truth: &HardLabeling) -> Result<f64> {
    let t = ContingencyTable::new(pred, truth)?;
    if t.total == 0 {
        return Ok(0.0);
    }
    let hits: u64 = (0..t.k_pred)
        .map(|p| (0..t.k_true).map(|q| t.get(p, q)).max().unwrap_or(0))
        .sum();
    Ok(hits as f64 / t.total as f64)
}

/// Over pairs of samples assigned in both labelings, the fraction whose
/// same-cluster / different-cluster relation agrees. 1.0 if no such pair.
pub fn pairwise_consistency(prev: &HardLabeling, curr: &HardLabeling) -> Result<f64> {
    let t = ContingencyTable::new(prev, curr)?;
    let total = pairs(t.total);
    if total == 0.0 {
        return Ok(1.0);
    }
    let both: f64 = t.counts.iter().map(|&c| pairs(c)).sum();
    let same_prev: f64 = t.pred_marginals.iter().map(|&c| pairs(c)).sum();
    let same_curr: f64 = t.true_marginals.iter().map(|&c| pairs(c)).sum();
    let disagree = same_prev + same_curr - 2.0 * both;
    Ok((total - disagree) / total)
}

pub fn cluster_count(labeling: &HardLabeling) -> usize {
    labeling.n_clusters()
}

/// Share of noise samples; 0 for an empty labeling.
pub fn noise_fraction(labeling: &HardLabeling) -> f64 {
    if labeling.is_empty() {
        0.0
    } else {
        labeling.n_noise() as f64 / labeling.len() as f64
    }
}

/// Names accepted by [`evaluate`].
pub const METRIC_NAMES: [&str; 4] = ["ari", "nmi", "purity", "consistency"];

/// Evaluates one named metric of `pred` against `reference`.
pub fn evaluate(name: &str, pred: &HardLabeling, reference: &HardLabeling) -> Result<f64> {
    match name {
        "ari" => adjusted_rand_index(pred, reference),
        "nmi" => nmi(pred, reference),
        "purity" => purity(pred, reference),
        "consistency" => pairwise_consistency(reference, pred),
        other => Err(SlrError::InvalidParameter(format!(
            "unknown metric {other:?}; valid names: {}",
            METRIC_NAMES.join(", ")
        ))),
    }
}
