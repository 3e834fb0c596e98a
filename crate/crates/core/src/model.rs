//! Shared data types: feature matrices, hard and soft labelings, projection
//! matrices and per-epoch records.

use std::collections::BTreeMap;

use crate::error::{Result, SlrError};

/// Integer encoding of a noise sample in files and raw label vectors.
pub const NOISE: i64 = -1;

/// Tolerance on row sums of soft labels and normalized projections.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// Dense `n_samples x n_dims` matrix of embeddings, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_samples: usize,
    n_dims: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(n_samples: usize, n_dims: usize, data: Vec<f64>) -> Result<Self> {
        if n_samples == 0 {
            return Err(SlrError::Validation("feature matrix has no samples".into()));
        }
        if n_dims == 0 {
            return Err(SlrError::Validation("feature matrix has no columns".into()));
        }
        SlrError::check_len("feature data", data.len(), n_samples * n_dims)?;
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(SlrError::Validation(format!(
                "non-finite feature value at row {}, column {}",
                pos / n_dims,
                pos % n_dims
            )));
        }
        Ok(Self {
            n_samples,
            n_dims,
            data,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_dims = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * n_dims);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n_dims {
                return Err(SlrError::Validation(format!(
                    "row {i} has {} columns, expected {n_dims}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), n_dims, data)
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_dims(&self) -> usize {
        self.n_dims
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_dims..(i + 1) * self.n_dims]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_dims)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Multiplies every coordinate by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.n_samples,
            self.n_dims,
            self.data.iter().map(|v| v * factor).collect(),
        )
    }

    /// Keeps the listed rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.n_dims);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self::new(indices.len(), self.n_dims, data)
    }
}

/// Per-sample cluster assignment; `None` marks noise.
///
/// Cluster ids are compact: every id in `0..n_clusters` has at least one
/// member.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HardLabeling {
    labels: Vec<Option<usize>>,
    n_clusters: usize,
}

impl HardLabeling {
    /// Validates compact numbering.
    pub fn new(labels: Vec<Option<usize>>) -> Result<Self> {
        let n_clusters = labels.iter().flatten().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; n_clusters];
        for &c in labels.iter().flatten() {
            seen[c] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(SlrError::Validation(format!(
                "cluster id {missing} has no members (ids must be 0..{n_clusters} without gaps)"
            )));
        }
        Ok(Self { labels, n_clusters })
    }

    /// Parses raw integer labels where `-1` is noise.
    pub fn from_raw(raw: &[i64]) -> Result<Self> {
        let labels = raw
            .iter()
            .enumerate()
            .map(|(i, &v)| match v {
                NOISE => Ok(None),
                v if v >= 0 => Ok(Some(v as usize)),
                v => Err(SlrError::Validation(format!(
                    "sample {i}: label {v} is negative and not the noise sentinel -1"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels)
    }

    /// Removes gaps in the id space while keeping the relative order of ids.
    pub fn compacted(labels: Vec<Option<usize>>) -> Self {
        let n = labels.iter().flatten().max().map_or(0, |m| m + 1);
        let mut remap = vec![usize::MAX; n];
        for &c in labels.iter().flatten() {
            remap[c] = 0;
        }
        let mut next = 0;
        for slot in remap.iter_mut().filter(|s| **s == 0) {
            *slot = next;
            next += 1;
        }
        let labels = labels.into_iter().map(|l| l.map(|c| remap[c])).collect();
        Self {
            labels,
            n_clusters: next,
        }
    }

    /// Renumbers clusters in order of first appearance by sample index.
    pub fn by_first_appearance(labels: Vec<Option<usize>>) -> Self {
        let mut remap = std::collections::HashMap::new();
        let labels = labels
            .into_iter()
            .map(|l| {
                l.map(|c| {
                    let next = remap.len();
                    *remap.entry(c).or_insert(next)
                })
            })
            .collect();
        Self {
            labels,
            n_clusters: remap.len(),
        }
    }

    pub fn all_noise(n: usize) -> Self {
        Self {
            labels: vec![None; n],
            n_clusters: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn get(&self, i: usize) -> Option<usize> {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn to_raw(&self) -> Vec<i64> {
        self.labels
            .iter()
            .map(|l| l.map_or(NOISE, |c| c as i64))
            .collect()
    }

    pub fn n_noise(&self) -> usize {
        self.labels.iter().filter(|l| l.is_none()).count()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters];
        for &c in self.labels.iter().flatten() {
            sizes[c] += 1;
        }
        sizes
    }

    /// Sample indices grouped per cluster, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_clusters];
        for (i, &c) in self.labels.iter().enumerate() {
            if let Some(c) = c {
                out[c].push(i);
            }
        }
        out
    }
}

/// `n_samples x n_classes` nonnegative label distributions.
///
/// Masked rows (noise) are all zero and carry no supervision; every other
/// row sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftLabelMatrix {
    n_classes: usize,
    data: Vec<f64>,
    masked: Vec<bool>,
}

impl SoftLabelMatrix {
    pub fn new(n_classes: usize, data: Vec<f64>, masked: Vec<bool>) -> Result<Self> {
        SlrError::check_len("soft label data", data.len(), masked.len() * n_classes)?;
        for (i, &m) in masked.iter().enumerate() {
            let row = &data[i * n_classes..(i + 1) * n_classes];
            if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(SlrError::Validation(format!(
                    "soft label row {i} has entry {v} outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if m && sum != 0.0 {
                return Err(SlrError::Validation(format!(
                    "masked soft label row {i} is not all zero"
                )));
            }
            if !m && (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(SlrError::Validation(format!(
                    "soft label row {i} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(Self {
            n_classes,
            data,
            masked,
        })
    }

    /// Builds a matrix from rows, treating all-zero rows as masked.
    pub fn from_rows(n_classes: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * n_classes);
        let mut masked = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_classes {
                return Err(SlrError::Validation(format!(
                    "soft label row {i} has {} entries, expected {n_classes}",
                    row.len()
                )));
            }
            masked.push(row.iter().all(|&v| v == 0.0));
            data.extend_from_slice(row);
        }
        Self::new(n_classes, data, masked)
    }

    pub fn n_samples(&self) -> usize {
        self.masked.len()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_classes..(i + 1) * self.n_classes]
    }

    pub fn is_masked(&self, i: usize) -> bool {
        self.masked[i]
    }

    pub fn masked(&self) -> &[bool] {
        &self.masked
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Previous-cluster by current-cluster matrix of IoU values (raw) or of
/// row-normalized IoU values.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix {
    m_prev: usize,
    m_curr: usize,
    values: Vec<f64>,
}

impl ProjectionMatrix {
    pub fn new(m_prev: usize, m_curr: usize, values: Vec<f64>) -> Result<Self> {
        SlrError::check_len("projection values", values.len(), m_prev * m_curr)?;
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(SlrError::Validation(format!(
                "projection entry {v} outside [0, 1]"
            )));
        }
        Ok(Self {
            m_prev,
            m_curr,
            values,
        })
    }

    pub fn identity(m: usize) -> Self {
        let mut values = vec![0.0; m * m];
        for a in 0..m {
            values[a * m + a] = 1.0;
        }
        Self {
            m_prev: m,
            m_curr: m,
            values,
        }
    }

    pub fn m_prev(&self) -> usize {
        self.m_prev
    }

    pub fn m_curr(&self) -> usize {
        self.m_curr
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.m_curr + b]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.values[a * self.m_curr..(a + 1) * self.m_curr]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// True if every row sums to one within tolerance or is entirely zero.
    pub fn is_row_normalized(&self) -> bool {
        (0..self.m_prev).all(|a| {
            let row = self.row(a);
            row.iter().all(|&v| v == 0.0) || (row.iter().sum::<f64>() - 1.0).abs() <= ROW_SUM_TOL
        })
    }
}

/// Everything produced for one epoch of a refinement run.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch_index: usize,
    pub raw_labels: HardLabeling,
    /// Absent at epoch 0 and in the baseline arm.
    pub soft_labels: Option<SoftLabelMatrix>,
    pub refined_labels: HardLabeling,
    pub metrics: BTreeMap<String, f64>,
}
