use crate::error::{Result, SlrError};
use crate::model::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Euclidean,
}

/// Dense symmetric `n x n` distance matrix with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Validates symmetry, a zero diagonal and finite nonnegative entries.
    pub fn from_vec(n: usize, data: Vec<f64>) -> Result<Self> {
        SlrError::check_len("distance matrix", data.len(), n * n)?;
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(SlrError::Validation(format!("d({i},{i}) is not zero")));
            }
            for j in (i + 1)..n {
                let d = data[i * n + j];
                if !(d.is_finite() && d >= 0.0) {
                    return Err(SlrError::Validation(format!("d({i},{j}) = {d} is invalid")));
                }
                if d != data[j * n + i] {
                    return Err(SlrError::Validation(format!("d({i},{j}) != d({j},{i})")));
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn from_parts_unchecked(n: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        Self { n, data }
    }
}

#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Sum whose result does not depend on the order of `values`.
pub fn sorted_sum(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    values.iter().sum()
}

/// Euclidean distance with the squared terms summed in sorted order, so
/// permuting coordinates of both vectors gives a bit-identical result.
pub fn euclidean_unordered(a: &[f64], b: &[f64]) -> f64 {
    let mut sq: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).collect();
    sorted_sum(&mut sq).sqrt()
}

/// All-pairs [`euclidean_unordered`] distances.
pub fn pairwise_distances_unordered(features: &FeatureMatrix) -> DistanceMatrix {
    let n = features.n_samples();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclidean_unordered(features.row(i), features.row(j));
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    DistanceMatrix::from_parts_unchecked(n, data)
}

/// Exact all-pairs distances. Each pair is computed once and mirrored, so
/// the result is symmetric bit for bit.
pub fn pairwise_distances(features: &FeatureMatrix, metric: Metric) -> DistanceMatrix {
    let n = features.n_samples();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        let a = features.row(i);
        for j in (i + 1)..n {
            let d = match metric {
                Metric::Euclidean => euclidean(a, features.row(j)),
            };
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    DistanceMatrix::from_parts_unchecked(n, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unordered_distance_ignores_coordinate_order() {
        let a = [0.1, 0.7, 0.2, 1e-9];
        let b = [0.3, 0.0, 0.65, 0.05];
        let d = euclidean_unordered(&a, &b);
        let ra: Vec<f64> = a.iter().rev().copied().collect();
        let rb: Vec<f64> = b.iter().rev().copied().collect();
        assert_eq!(euclidean_unordered(&ra, &rb), d);
        assert!((d - euclidean(&a, &b)).abs() < 1e-15);
    }

    #[test]
    fn three_four_five() {
        let f = FeatureMatrix::from_rows(&[[0.0, 0.0], [3.0, 4.0]]).unwrap();
        let d = pairwise_distances(&f, Metric::Euclidean);
        assert_eq!(d.get(0, 1), 5.0);
        assert_eq!(d.get(1, 0), 5.0);
        assert_eq!(d.get(0, 0), 0.0);
        assert_eq!(d.get(1, 1), 0.0);
    }

    #[test]
    fn from_vec_validation() {
        assert!(DistanceMatrix::from_vec(2, vec![0.0, 1.0, 1.0, 0.0]).is_ok());
        assert!(DistanceMatrix::from_vec(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(DistanceMatrix::from_vec(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(DistanceMatrix::from_vec(2, vec![0.0, -1.0, -1.0, 0.0]).is_err());
    }
}
