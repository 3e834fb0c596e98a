#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;
use slr_core::refine::*;
use slr_core::HardLabeling;

fn lab(raw: &[i64]) -> HardLabeling {
    HardLabeling::from_raw(raw).unwrap()
}

fn compact(raw: Vec<i64>) -> HardLabeling {
    HardLabeling::compacted(raw.into_iter().map(|v| usize::try_from(v).ok()).collect())
}

#[test]
fn six_sample_example_matches_set_enumeration() {
    let prev = [0, 0, 0, 1, 1, 2];
    let curr = [0, 0, 1, 1, 2, 2];
    let p = projection_matrix(&lab(&prev), &lab(&curr)).unwrap();
    let want = slr_oracle::iou_matrix(&prev, &curr);
    assert_eq!(
        want,
        vec![
            vec![2.0 / 3.0, 1.0 / 4.0, 0.0],
            vec![0.0, 1.0 / 3.0, 1.0 / 3.0],
            vec![0.0, 0.0, 1.0 / 2.0]
        ]
    );
    for a in 0..3 {
        for b in 0..3 {
            assert!((p.get(a, b) - want[a][b]).abs() < 1e-12);
        }
    }
    let p_hat = normalize_projection(&p);
    assert!((p_hat.get(0, 0) - 8.0 / 11.0).abs() < 1e-12);
    assert!((p_hat.get(0, 1) - 3.0 / 11.0).abs() < 1e-12);
    assert_eq!(p_hat.get(0, 2), 0.0);
    assert_eq!(
        project_label(&p_hat, &[1.0, 0.0, 0.0]).unwrap(),
        p_hat.row(0)
    );

    let soft = refine_epoch(&lab(&prev), &lab(&curr), 0.9).unwrap();
    let s2 = soft.row(2);
    let want2 = [0.8 / 11.0, 0.9 + 0.3 / 11.0, 0.0];
    let oracle2 = slr_oracle::refined_row(&prev, &curr, 0.9, 2).unwrap();
    for k in 0..3 {
        assert!((s2[k] - want2[k]).abs() < 1e-12);
        assert!((s2[k] - oracle2[k]).abs() < 1e-12);
    }
    assert_eq!(harden_max(&soft).get(2), Some(1));
}

#[test]
fn noise_rows_follow_the_policy() {
    let prev = lab(&[0, -1, 0, 1, 1]);
    let curr = lab(&[0, 0, -1, 1, 1]);
    let soft = refine_epoch(&prev, &curr, 0.9).unwrap();
    assert!(soft.is_masked(2));
    assert_eq!(soft.row(2), &[0.0, 0.0]);
    assert_eq!(soft.row(1), &[1.0, 0.0]);
    let all_noise = lab(&[-1, -1, -1, -1, -1]);
    let p = projection_matrix(&all_noise, &curr).unwrap();
    assert_eq!((p.m_prev(), p.m_curr()), (0, 2));
}

#[test]
fn mismatched_lengths_are_rejected() {
    assert!(projection_matrix(&lab(&[0, 0]), &lab(&[0])).is_err());
    assert!(refine_epoch(&lab(&[0, 0]), &lab(&[0]), 0.9).is_err());
    assert!(refine_soft(&[1.0, 0.0], &[0.5], 0.9).is_err());
}

fn labeling(n: usize, k: i64) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-1..k, n)
}

fn pair() -> impl Strategy<Value = (Vec<i64>, Vec<i64>)> {
    pair_upto(60)
}

fn pair_upto(max_n: usize) -> impl Strategy<Value = (Vec<i64>, Vec<i64>)> {
    (1usize..=max_n, 1i64..=8).prop_flat_map(|(n, k)| (labeling(n, k), labeling(n, k)))
}

/// Clusters of at least `mcs` members plus some noise, shuffled.
fn big_cluster_labeling(mcs: usize) -> impl Strategy<Value = Vec<i64>> {
    (prop::collection::vec(mcs..=mcs + 8, 1..=6), 0usize..=10).prop_flat_map(|(sizes, noise)| {
        let mut v: Vec<i64> = Vec::new();
        for (c, s) in sizes.iter().enumerate() {
            v.extend(std::iter::repeat_n(c as i64, *s));
        }
        v.extend(std::iter::repeat_n(-1, noise));
        v.truncate(100);
        Just(v).prop_shuffle()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn identity_is_a_fixed_point(raw in big_cluster_labeling(7), alpha in 0.0f64..=1.0) {
        let l = compact(raw);
        let soft = refine_epoch(&l, &l, alpha).unwrap();
        prop_assert_eq!(&soft, &one_hot(&l));
        prop_assert_eq!(&harden_max(&soft), &l);
        let h = harden_hdbscan(&soft, 7).unwrap();
        prop_assert!(slr_oracle::same_partition(&h.to_raw(), &l.to_raw()));
    }

    #[test]
    fn argmax_keeps_current_labels((p, c) in pair(), alpha in 0.5001f64..=1.0) {
        let (prev, curr) = (compact(p), compact(c));
        let hard = harden_max(&refine_epoch(&prev, &curr, alpha).unwrap());
        for i in 0..curr.len() {
            if curr.get(i).is_some() {
                prop_assert_eq!(hard.get(i), curr.get(i));
            } else {
                prop_assert_eq!(hard.get(i), None);
            }
        }
    }

    #[test]
    fn rows_match_oracle_and_sum_to_one((p, c) in pair(), alpha in 0.0f64..=1.0) {
        let (prev, curr) = (compact(p), compact(c));
        let (rp, rc) = (prev.to_raw(), curr.to_raw());
        let pm = projection_matrix(&prev, &curr).unwrap();
        let want = slr_oracle::iou_matrix(&rp, &rc);
        for a in 0..pm.m_prev() {
            for b in 0..pm.m_curr() {
                prop_assert!((pm.get(a, b) - want[a][b]).abs() < 1e-12);
            }
        }
        let soft = refine_epoch(&prev, &curr, alpha).unwrap();
        for i in 0..curr.len() {
            match slr_oracle::refined_row(&rp, &rc, alpha, i) {
                None => prop_assert!(soft.is_masked(i)),
                Some(row) => {
                    let s: f64 = soft.row(i).iter().sum();
                    prop_assert!((s - 1.0).abs() < 1e-9);
                    for (x, y) in soft.row(i).iter().zip(&row) {
                        prop_assert!(*x >= 0.0);
                        prop_assert!((x - y).abs() < 1e-12);
                    }
                }
            }
        }
        let p_hat = normalize_projection(&pm);
        for a in 0..p_hat.m_prev() {
            let s: f64 = p_hat.row(a).iter().sum();
            prop_assert!(s == 0.0 || (s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn relabeling_ids_does_not_change_hardened_partitions(
        (p, c) in pair(),
        shift in 1i64..8,
        alpha in 0.0f64..=1.0,
    ) {
        let (prev, curr) = (compact(p), compact(c));
        let k = prev.n_clusters().max(1) as i64;
        let prev2 = compact(prev.to_raw().iter().map(|&v| if v < 0 { v } else { (v + shift) % k }).collect());
        let s1 = refine_epoch(&prev, &curr, alpha).unwrap();
        let s2 = refine_epoch(&prev2, &curr, alpha).unwrap();
        prop_assert_eq!(&s1, &s2);
        let kc = curr.n_clusters().max(1) as i64;
        let curr2 = compact(curr.to_raw().iter().map(|&v| if v < 0 { v } else { (v + shift) % kc }).collect());
        let s3 = refine_epoch(&prev, &curr2, alpha).unwrap();
        let h1 = harden_hdbscan(&s1, 3).unwrap();
        let h3 = harden_hdbscan(&s3, 3).unwrap();
        prop_assert!(slr_oracle::same_partition(&h1.to_raw(), &h3.to_raw()));
        if alpha > 0.5 {
            // below that, argmax ties depend on column order
            prop_assert!(slr_oracle::same_partition(&harden_max(&s1).to_raw(), &harden_max(&s3).to_raw()));
        }
    }

    #[test]
    fn hdbscan_hardening_matches_oracle((p, c) in pair_upto(30), alpha in 0.0f64..=1.0) {
        let (prev, curr) = (compact(p), compact(c));
        let soft = refine_epoch(&prev, &curr, alpha).unwrap();
        let got = harden_hdbscan(&soft, 3).unwrap();
        let kept: Vec<usize> = (0..curr.len()).filter(|&i| !soft.is_masked(i)).collect();
        let rows: Vec<Vec<f64>> = kept.iter().map(|&i| soft.row(i).to_vec()).collect();
        let sub = if rows.is_empty() {
            Vec::new()
        } else {
            slr_oracle::hdbscan_from_distances(&slr_oracle::distance_matrix_sorted(&rows), 3)
        };
        let mut want = vec![-1; curr.len()];
        for (k, &i) in kept.iter().enumerate() {
            want[i] = sub[k];
        }
        prop_assert!(slr_oracle::same_partition(&got.to_raw(), &want));
    }
}
