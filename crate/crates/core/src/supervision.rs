//! Loss terms of the teacher/student training objective and the EMA
//! teacher update, as plain numeric functions over probability vectors and
//! embeddings. There is no autodiff here.

use crate::config::SlrConfig;
use crate::error::{Result, SlrError};
use crate::model::{FeatureMatrix, HardLabeling, SoftLabelMatrix};

/// Probabilities are clamped to at least this before taking logs.
pub const LOG_CLAMP: f64 = 1e-12;

#[inline]
fn clamped_ln(p: f64) -> f64 {
    p.max(LOG_CLAMP).ln()
}

/// `-Σ_k target_k ln(pred_k)`.
fn cross_entropy(target: &[f64], pred: &[f64]) -> f64 {
    -target
        .iter()
        .zip(pred)
        .filter(|(&t, _)| t != 0.0)
        .map(|(&t, &p)| t * clamped_ln(p))
        .sum::<f64>()
}

/// Outputs of the two classifier branches for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionPair {
    pub p_m: Vec<f64>,
    pub p_a: Vec<f64>,
}

impl PredictionPair {
    pub fn new(p_m: Vec<f64>, p_a: Vec<f64>) -> Result<Self> {
        SlrError::check_len("branch class counts", p_m.len(), p_a.len())?;
        for (name, p) in [("p_m", &p_m), ("p_a", &p_a)] {
            if p.iter().any(|v| !(*v > 0.0 && *v <= 1.0)) {
                return Err(SlrError::Validation(format!(
                    "{name} has entries outside (0, 1]"
                )));
            }
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > 1e-6 {
                return Err(SlrError::Validation(format!("{name} sums to {sum}")));
            }
        }
        Ok(Self { p_m, p_a })
    }

    pub fn n_classes(&self) -> usize {
        self.p_m.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub lambda_c: f64,
    pub lambda_sc: f64,
    pub lambda_st: f64,
}

impl LossWeights {
    pub fn new(lambda_c: f64, lambda_sc: f64, lambda_st: f64) -> Result<Self> {
        if [lambda_c, lambda_sc, lambda_st]
            .iter()
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(SlrError::InvalidParameter(
                "loss weights must be finite and >= 0".into(),
            ));
        }
        Ok(Self {
            lambda_c,
            lambda_sc,
            lambda_st,
        })
    }
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda_c: 0.5,
            lambda_sc: 0.5,
            lambda_st: 1.0,
        }
    }
}

impl From<&SlrConfig> for LossWeights {
    fn from(cfg: &SlrConfig) -> Self {
        Self {
            lambda_c: cfg.lambda_c,
            lambda_sc: cfg.lambda_sc,
            lambda_st: cfg.lambda_st,
        }
    }
}

/// Classification loss of both branches against the (hard or refined)
/// targets, summed over unmasked samples.
pub fn hard_ce_loss(
    targets: &SoftLabelMatrix,
    preds_m: &[Vec<f64>],
    preds_a: &[Vec<f64>],
) -> Result<f64> {
    SlrError::check_len("branch m predictions", preds_m.len(), targets.n_samples())?;
    SlrError::check_len("branch a predictions", preds_a.len(), targets.n_samples())?;
    let mut loss = 0.0;
    for i in 0..targets.n_samples() {
        if targets.is_masked(i) {
            continue;
        }
        let t = targets.row(i);
        SlrError::check_len("prediction classes", preds_m[i].len(), t.len())?;
        SlrError::check_len("prediction classes", preds_a[i].len(), t.len())?;
        loss += cross_entropy(t, &preds_m[i]) + cross_entropy(t, &preds_a[i]);
    }
    Ok(loss)
}

/// Cross-branch loss: the teacher's `a` branch supervises the student's `m`
/// branch and the teacher's `m` branch supervises the student's `a` branch.
pub fn cross_branch_loss(teacher: &[PredictionPair], student: &[PredictionPair]) -> Result<f64> {
    SlrError::check_len("teacher vs student batch", teacher.len(), student.len())?;
    let mut loss = 0.0;
    for (t, s) in teacher.iter().zip(student) {
        SlrError::check_len("teacher vs student classes", t.n_classes(), s.n_classes())?;
        loss += cross_entropy(&t.p_a, &s.p_m) + cross_entropy(&t.p_m, &s.p_a);
    }
    Ok(loss)
}

/// Softmax weight of the positive distance against the negative one:
/// `exp(|a-p|) / (exp(|a-p|) + exp(|a-n|))`.
///
/// Evaluated as a logistic of the distance gap so large distances cannot
/// overflow. Gaps beyond roughly ±700 saturate to 0 or 1 in `f64`.
pub fn soft_triplet_prob(anchor: &[f64], positive: &[f64], negative: &[f64]) -> Result<f64> {
    SlrError::check_len("positive embedding", positive.len(), anchor.len())?;
    SlrError::check_len("negative embedding", negative.len(), anchor.len())?;
    let d_pos = crate::clustering::distance::euclidean(anchor, positive);
    let d_neg = crate::clustering::distance::euclidean(anchor, negative);
    let gap = d_pos - d_neg;
    Ok(if gap >= 0.0 {
        1.0 / (1.0 + (-gap).exp())
    } else {
        let e = gap.exp();
        e / (1.0 + e)
    })
}

/// `-Σ_p [d_a^T ln d_m^S + d_m^T ln d_a^S]`, the single-log-term form.
pub fn soft_triplet_loss(
    teacher_d_m: &[f64],
    teacher_d_a: &[f64],
    student_d_m: &[f64],
    student_d_a: &[f64],
) -> Result<f64> {
    let n = teacher_d_m.len();
    SlrError::check_len("teacher d_a", teacher_d_a.len(), n)?;
    SlrError::check_len("student d_m", student_d_m.len(), n)?;
    SlrError::check_len("student d_a", student_d_a.len(), n)?;
    Ok(-(0..n)
        .map(|p| {
            teacher_d_a[p] * clamped_ln(student_d_m[p])
                + teacher_d_m[p] * clamped_ln(student_d_a[p])
        })
        .sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triplet {
    pub positive: usize,
    pub negative: usize,
}

/// Why an anchor has no usable triplet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum Unminable {
    #[error("anchor is noise")]
    NoiseAnchor,
    #[error("anchor's cluster has no other member")]
    NoPositive,
    #[error("no sample from another cluster")]
    NoNegative,
}

/// Batch-hard mining: the farthest same-cluster sample and the nearest
/// sample of another cluster. Noise samples are never picked. Ties go to
/// the lowest index.
///
/// # Panics
/// If `anchor` is out of range or the labeling length differs from the
/// number of embeddings.
pub fn mine_triplets(
    embeddings: &FeatureMatrix,
    hard: &HardLabeling,
    anchor: usize,
) -> std::result::Result<Triplet, Unminable> {
    assert_eq!(embeddings.n_samples(), hard.len(), "embeddings vs labels");
    let own = hard.get(anchor).ok_or(Unminable::NoiseAnchor)?;
    let a = embeddings.row(anchor);
    let mut positive: Option<(usize, f64)> = None;
    let mut negative: Option<(usize, f64)> = None;
    for (j, label) in hard.labels().iter().enumerate() {
        let Some(c) = *label else { continue };
        if j == anchor {
            continue;
        }
        let d = crate::clustering::distance::euclidean(a, embeddings.row(j));
        if c == own {
            if positive.is_none_or(|(_, best)| d > best) {
                positive = Some((j, d));
            }
        } else if negative.is_none_or(|(_, best)| d < best) {
            negative = Some((j, d));
        }
    }
    let (positive, _) = positive.ok_or(Unminable::NoPositive)?;
    let (negative, _) = negative.ok_or(Unminable::NoNegative)?;
    Ok(Triplet { positive, negative })
}

/// Weighted sum of the three loss terms.
pub fn total_loss(l_c: f64, l_sc: f64, l_st: f64, w: &LossWeights) -> f64 {
    w.lambda_c * l_c + w.lambda_sc * l_sc + w.lambda_st * l_st
}

/// Flat parameter vector of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector(pub Vec<f64>);

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SlrError::Validation("non-finite parameter".into()));
        }
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// `momentum * teacher + (1 - momentum) * student`, elementwise.
pub fn ema_update(
    teacher: &ParameterVector,
    student: &ParameterVector,
    momentum: f64,
) -> Result<ParameterVector> {
    SlrError::check_len(
        "teacher vs student parameters",
        teacher.len(),
        student.len(),
    )?;
    if !(0.0..=1.0).contains(&momentum) {
        return Err(SlrError::InvalidParameter(format!(
            "momentum = {momentum} must lie in [0, 1]"
        )));
    }
    Ok(ParameterVector(
        teacher
            .0
            .iter()
            .zip(&student.0)
            .map(|(t, s)| momentum * t + (1.0 - momentum) * s)
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn ce_zero_for_perfect_predictions() {
        let targets = SoftLabelMatrix::from_rows(2, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let preds = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(hard_ce_loss(&targets, &preds, &preds).unwrap(), 0.0);
    }

    #[test]
    fn ce_uniform_closed_form() {
        let targets = SoftLabelMatrix::from_rows(2, &[vec![1.0, 0.0]]).unwrap();
        let u = vec![vec![0.5, 0.5]];
        let l = hard_ce_loss(&targets, &u, &u).unwrap();
        assert!((l - 2.0 * LN2).abs() < 1e-12);
    }

    #[test]
    fn ce_skips_masked_and_clamps() {
        let targets = SoftLabelMatrix::from_rows(2, &[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let preds = vec![vec![0.5, 0.5], vec![0.0, 1.0]];
        let l = hard_ce_loss(&targets, &preds, &preds).unwrap();
        assert!((l - 2.0 * -(LOG_CLAMP.ln())).abs() < 1e-9);
        assert!(l.is_finite());
        assert!(hard_ce_loss(&targets, &preds[..1], &preds).is_err());
    }

    #[test]
    fn cross_branch_cases() {
        let one = PredictionPair::new(vec![1.0, 1e-300], vec![1.0, 1e-300]);
        // entries must be in (0, 1] and sum to one
        assert!(one.is_ok());
        let u = PredictionPair::new(vec![0.5, 0.5], vec![0.5, 0.5]).unwrap();
        let l = cross_branch_loss(std::slice::from_ref(&u), std::slice::from_ref(&u)).unwrap();
        assert!((l - 2.0 * LN2).abs() < 1e-12);
        let sharp = PredictionPair::new(vec![1.0], vec![1.0]).unwrap();
        assert_eq!(
            cross_branch_loss(std::slice::from_ref(&sharp), std::slice::from_ref(&sharp)).unwrap(),
            0.0
        );
        assert!(cross_branch_loss(&[u], &[]).is_err());
        assert!(PredictionPair::new(vec![0.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(PredictionPair::new(vec![0.5, 0.4], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn cross_branch_crosses_branches() {
        let t = PredictionPair::new(vec![0.9, 0.1], vec![0.2, 0.8]).unwrap();
        let s = PredictionPair::new(vec![0.3, 0.7], vec![0.6, 0.4]).unwrap();
        let want =
            -(0.2 * 0.3f64.ln() + 0.8 * 0.7f64.ln()) - (0.9 * 0.6f64.ln() + 0.1 * 0.4f64.ln());
        let got = cross_branch_loss(&[t], &[s]).unwrap();
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn triplet_prob_cases() {
        let d = soft_triplet_prob(&[0.0, 0.0], &[1.0, 0.0], &[0.0, -1.0]).unwrap();
        assert_eq!(d, 0.5);
        let d = soft_triplet_prob(&[0.0], &[0.0], &[10.0]).unwrap();
        assert!((d - 1.0 / (1.0 + 10f64.exp())).abs() < 1e-18);
        assert!((d - 4.54e-5).abs() < 1e-7);
        let far = soft_triplet_prob(&[0.0], &[0.0], &[500.0]).unwrap();
        assert!(far > 0.0 && far < 1.0);
        assert!(soft_triplet_prob(&[0.0], &[0.0, 1.0], &[1.0]).is_err());
    }

    #[test]
    fn triplet_loss_closed_forms() {
        let half = vec![0.5; 4];
        let l = soft_triplet_loss(&half, &half, &half, &half).unwrap();
        assert!((l - 4.0 * LN2).abs() < 1e-12);
        let near = vec![1.0 - 1e-12; 3];
        assert!(soft_triplet_loss(&near, &near, &near, &near).unwrap().abs() < 1e-10);
        assert!(soft_triplet_loss(&half, &half[..1], &half, &half).is_err());
    }

    #[test]
    fn mining_two_pairs() {
        let f =
            FeatureMatrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [10.0, 0.0], [12.0, 0.0]]).unwrap();
        let l = HardLabeling::from_raw(&[0, 0, 1, 1]).unwrap();
        assert_eq!(
            mine_triplets(&f, &l, 0),
            Ok(Triplet {
                positive: 1,
                negative: 2
            })
        );
        assert_eq!(
            mine_triplets(&f, &l, 3),
            Ok(Triplet {
                positive: 2,
                negative: 1
            })
        );
    }

    #[test]
    fn mining_failures() {
        let f = FeatureMatrix::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
        let l = HardLabeling::from_raw(&[0, 1, -1]).unwrap();
        assert_eq!(mine_triplets(&f, &l, 0), Err(Unminable::NoPositive));
        assert_eq!(mine_triplets(&f, &l, 2), Err(Unminable::NoiseAnchor));
        let l = HardLabeling::from_raw(&[0, 0, -1]).unwrap();
        assert_eq!(mine_triplets(&f, &l, 0), Err(Unminable::NoNegative));
    }

    #[test]
    fn total_loss_examples() {
        assert_eq!(total_loss(2.0, 4.0, 1.0, &LossWeights::default()), 4.0);
        assert_eq!(
            total_loss(2.0, 4.0, 1.0, &LossWeights::new(0.0, 0.0, 0.0).unwrap()),
            0.0
        );
        let ones = LossWeights::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(total_loss(0.25, 1.5, 3.0, &ones), 4.75);
        assert!(LossWeights::new(-1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn ema_examples() {
        let t = ParameterVector::new(vec![0.0, 2.0]).unwrap();
        let s = ParameterVector::new(vec![2.0, 0.0]).unwrap();
        assert_eq!(ema_update(&t, &s, 1.0).unwrap(), t);
        assert_eq!(ema_update(&t, &s, 0.0).unwrap(), s);
        let out = ema_update(&t, &s, 0.999).unwrap();
        assert!((out.0[0] - 0.002).abs() < 1e-15);
        assert!((out.0[1] - 1.998).abs() < 1e-15);
        assert!(ema_update(&t, &ParameterVector(vec![1.0]), 0.5).is_err());
        assert!(ema_update(&t, &s, 1.1).is_err());
    }
}
