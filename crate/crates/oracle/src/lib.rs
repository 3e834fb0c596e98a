//! Slow, direct reference implementations used as test oracles.
//!
//! Nothing here depends on `slr-core`. Points are `&[Vec<f64>]`, labelings
//! are `Vec<i64>` with -1 for noise, matrices are `Vec<Vec<f64>>`.

#![allow(clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

pub const NOISE: i64 = -1;
pub const LAMBDA_CAP: f64 = 1e12;
pub const LOG_CLAMP: f64 = 1e-12;

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn distance_matrix(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            d[i][j] = dist(&points[i], &points[j]);
        }
    }
    d
}

/// Distances with the squared terms added smallest first.
pub fn distance_matrix_sorted(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut sq: Vec<f64> = points[i]
                .iter()
                .zip(&points[j])
                .map(|(x, y)| (x - y) * (x - y))
                .collect();
            sq.sort_by(f64::total_cmp);
            d[i][j] = sq.iter().sum::<f64>().sqrt();
        }
    }
    d
}

/// Relabels by first appearance so equal partitions compare equal.
pub fn canonical(labels: &[i64]) -> Vec<i64> {
    let mut map = HashMap::new();
    labels
        .iter()
        .map(|&l| {
            if l < 0 {
                NOISE
            } else {
                let next = map.len() as i64;
                *map.entry(l).or_insert(next)
            }
        })
        .collect()
}

pub fn same_partition(a: &[i64], b: &[i64]) -> bool {
    a.len() == b.len() && canonical(a) == canonical(b)
}

// ---------------------------------------------------------------- DBSCAN

/// Core points, components of the core eps-graph by transitive closure,
/// components numbered by their smallest core index, border points joined
/// to the lowest-numbered component holding one of their core neighbors.
pub fn dbscan(points: &[Vec<f64>], eps: f64, min_pts: usize) -> Vec<i64> {
    let n = points.len();
    let d = distance_matrix(points);
    let near = |i: usize, j: usize| d[i][j] <= eps;
    let core: Vec<bool> = (0..n)
        .map(|i| (0..n).filter(|&j| near(i, j)).count() >= min_pts)
        .collect();

    // reach[i][j]: core j reachable from core i through cores
    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            reach[i][j] = core[i] && core[j] && near(i, j);
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let mut component = vec![NOISE; n];
    let mut next = 0;
    for i in 0..n {
        if core[i] && component[i] == NOISE {
            for j in 0..n {
                if reach[i][j] {
                    component[j] = next;
                }
            }
            next += 1;
        }
    }
    let mut labels = component.clone();
    for i in 0..n {
        if !core[i] {
            labels[i] = (0..n)
                .filter(|&j| core[j] && near(i, j))
                .map(|j| component[j])
                .min()
                .unwrap_or(NOISE);
        }
    }
    labels
}

// ---------------------------------------------------------------- HDBSCAN

/// Distance to the `min_pts`-th nearest point, the point itself included.
pub fn core_distances(d: &[Vec<f64>], min_pts: usize) -> Vec<f64> {
    d.iter()
        .map(|row| {
            let mut r = row.clone();
            r.sort_by(f64::total_cmp);
            r[min_pts - 1]
        })
        .collect()
}

pub fn mutual_reachability(d: &[Vec<f64>], min_pts: usize) -> Vec<Vec<f64>> {
    let core = core_distances(d, min_pts);
    let n = d.len();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                m[i][j] = d[i][j].max(core[i]).max(core[j]);
            }
        }
    }
    m
}

/// Kruskal over every pair, fully sorted. Returns `(u, v, w)` edges.
pub fn kruskal(d: &[Vec<f64>]) -> Vec<(usize, usize, f64)> {
    let n = d.len();
    let mut all = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            all.push((i, j, d[i][j]));
        }
    }
    all.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut comp: Vec<usize> = (0..n).collect();
    let mut tree = Vec::new();
    for (i, j, w) in all {
        let (ci, cj) = (comp[i], comp[j]);
        if ci != cj {
            for c in comp.iter_mut() {
                if *c == cj {
                    *c = ci;
                }
            }
            tree.push((i, j, w));
        }
    }
    tree
}

pub fn mst_weight(d: &[Vec<f64>]) -> f64 {
    kruskal(d).iter().map(|e| e.2).sum()
}

fn lambda(w: f64) -> f64 {
    if w <= 0.0 {
        LAMBDA_CAP
    } else {
        (1.0 / w).min(LAMBDA_CAP)
    }
}

/// Connected components of `set` using tree edges lighter than `w`.
fn components_below(set: &[usize], edges: &[(usize, usize, f64)], w: f64) -> Vec<Vec<usize>> {
    let members: BTreeSet<usize> = set.iter().copied().collect();
    let mut label: BTreeMap<usize, usize> = set.iter().map(|&p| (p, p)).collect();
    loop {
        let mut changed = false;
        for &(u, v, ew) in edges {
            if ew < w && members.contains(&u) && members.contains(&v) {
                let (lu, lv) = (label[&u], label[&v]);
                if lu != lv {
                    let m = lu.min(lv);
                    label.insert(u, m);
                    label.insert(v, m);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (p, l) in label {
        groups.entry(l).or_default().push(p);
    }
    groups.into_values().collect()
}

#[derive(Debug, Clone)]
pub struct OracleCluster {
    pub parent: Option<usize>,
    pub birth: f64,
    pub size: usize,
    pub children: Vec<usize>,
    pub points: Vec<(usize, f64)>,
    pub stability: f64,
}

/// Top-down condensed tree: at each distinct edge weight, from heaviest to
/// lightest, split the current cluster into components joined by strictly
/// lighter edges.
pub fn condensed_tree(edges: &[(usize, usize, f64)], n: usize, mcs: usize) -> Vec<OracleCluster> {
    let mut clusters = Vec::new();
    if n == 0 {
        return clusters;
    }
    build(edges, (0..n).collect(), 0.0, None, mcs, &mut clusters);
    clusters
}

fn build(
    edges: &[(usize, usize, f64)],
    set: Vec<usize>,
    birth: f64,
    parent: Option<usize>,
    mcs: usize,
    out: &mut Vec<OracleCluster>,
) {
    let id = out.len();
    out.push(OracleCluster {
        parent,
        birth,
        size: set.len(),
        children: Vec::new(),
        points: Vec::new(),
        stability: 0.0,
    });
    let mut current = set;
    let mut split_into = Vec::new();
    let mut levels: Vec<f64> = edges.iter().map(|e| e.2).collect();
    levels.sort_by(|a, b| b.total_cmp(a));
    levels.dedup();
    for w in levels {
        if current.len() <= 1 {
            break;
        }
        let parts = components_below(&current, edges, w);
        if parts.len() == 1 {
            continue;
        }
        let l = lambda(w);
        let (big, small): (Vec<_>, Vec<_>) = parts.into_iter().partition(|p| p.len() >= mcs);
        for p in small.iter().flatten() {
            out[id].points.push((*p, l));
        }
        match big.len() {
            0 => {
                current.clear();
                break;
            }
            1 => current = big.into_iter().next().unwrap(),
            _ => {
                split_into = big.into_iter().map(|p| (p, l)).collect();
                current.clear();
                break;
            }
        }
    }
    // only a one-point root gets here with points left
    for &p in &current {
        out[id].points.push((p, birth));
    }
    let mut stability: f64 = out[id].points.iter().map(|&(_, l)| l - birth).sum();
    for (part, l) in split_into {
        stability += part.len() as f64 * (l - birth);
        let child = out.len();
        out[id].children.push(child);
        build(edges, part, l, Some(id), mcs, out);
    }
    out[id].stability = stability;
}

/// Every "cut" of the tree: sets of clusters containing exactly one cluster
/// on each root-to-leaf path.
fn cuts(tree: &[OracleCluster], c: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![c]];
    if tree[c].children.is_empty() {
        return out;
    }
    let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
    for &ch in &tree[c].children {
        let sub = cuts(tree, ch);
        combos = combos
            .iter()
            .flat_map(|prefix| {
                sub.iter().map(move |s| {
                    let mut v = prefix.clone();
                    v.extend(s);
                    v
                })
            })
            .collect();
    }
    out.extend(combos);
    out
}

/// Exhaustive stability maximisation; among optima equal up to rounding
/// the cut with more clusters wins.
pub fn select_clusters(tree: &[OracleCluster], n: usize, mcs: usize) -> Vec<usize> {
    if tree.is_empty() || n < mcs {
        return Vec::new();
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for cut in cuts(tree, 0) {
        let total: f64 = cut.iter().map(|&c| tree[c].stability).sum();
        let better = match &best {
            None => true,
            Some((bt, bc)) => {
                let tol = 16.0 * f64::EPSILON * bt.abs().max(1.0);
                total > bt + tol || ((total - bt).abs() <= tol && cut.len() > bc.len())
            }
        };
        if better {
            best = Some((total, cut));
        }
    }
    let mut sel = best.map(|b| b.1).unwrap_or_default();
    sel.sort_unstable();
    sel
}

fn subtree(tree: &[OracleCluster], c: usize, out: &mut Vec<usize>) {
    out.extend(tree[c].points.iter().map(|p| p.0));
    for &ch in &tree[c].children {
        subtree(tree, ch, out);
    }
}

pub fn labels_from_selection(tree: &[OracleCluster], selected: &[usize], n: usize) -> Vec<i64> {
    let mut labels = vec![NOISE; n];
    for (k, &c) in selected.iter().enumerate() {
        let mut pts = Vec::new();
        subtree(tree, c, &mut pts);
        for p in pts {
            labels[p] = k as i64;
        }
    }
    canonical(&labels)
}

pub fn hdbscan_from_distances(d: &[Vec<f64>], mcs: usize) -> Vec<i64> {
    let n = d.len();
    if n < mcs {
        return vec![NOISE; n];
    }
    let mr = mutual_reachability(d, mcs);
    let edges = kruskal(&mr);
    let tree = condensed_tree(&edges, n, mcs);
    let sel = select_clusters(&tree, n, mcs);
    labels_from_selection(&tree, &sel, n)
}

pub fn hdbscan(points: &[Vec<f64>], mcs: usize) -> Vec<i64> {
    hdbscan_from_distances(&distance_matrix(points), mcs)
}

// ---------------------------------------------------------------- refinement

fn clusters_as_sets(labels: &[i64]) -> BTreeMap<i64, BTreeSet<usize>> {
    let mut m: BTreeMap<i64, BTreeSet<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        if l >= 0 {
            m.entry(l).or_default().insert(i);
        }
    }
    m
}

/// `P[a][b] = |A ∩ B| / |A ∪ B|` with noise left out of every set. Rows and
/// columns follow ascending cluster id.
pub fn iou_matrix(prev: &[i64], curr: &[i64]) -> Vec<Vec<f64>> {
    let a = clusters_as_sets(prev);
    let b = clusters_as_sets(curr);
    a.values()
        .map(|sa| {
            b.values()
                .map(|sb| {
                    let inter = sa.intersection(sb).count() as f64;
                    let union = sa.union(sb).count() as f64;
                    inter / union
                })
                .collect()
        })
        .collect()
}

pub fn row_normalize(p: &[Vec<f64>]) -> Vec<Vec<f64>> {
    p.iter()
        .map(|r| {
            let s: f64 = r.iter().sum();
            if s > 0.0 {
                r.iter().map(|v| v / s).collect()
            } else {
                r.clone()
            }
        })
        .collect()
}

/// Soft row of sample `i`: `alpha * onehot(curr) + (1 - alpha) * P̂[prev]`,
/// renormalised; `None` when `i` is noise now.
pub fn refined_row(prev: &[i64], curr: &[i64], alpha: f64, i: usize) -> Option<Vec<f64>> {
    let m_curr = clusters_as_sets(curr).len();
    let c = usize::try_from(curr[i]).ok()?;
    let mut row = vec![0.0; m_curr];
    if prev[i] < 0 {
        row[c] = 1.0;
        return Some(row);
    }
    let p_hat = row_normalize(&iou_matrix(prev, curr));
    let proj = &p_hat[prev[i] as usize];
    for k in 0..m_curr {
        row[k] = (1.0 - alpha) * proj[k];
    }
    row[c] += alpha;
    let s: f64 = row.iter().sum();
    Some(row.iter().map(|v| v / s).collect())
}

// ---------------------------------------------------------------- metrics

fn assigned_pairs(a: &[i64], b: &[i64]) -> Vec<(bool, bool)> {
    let idx: Vec<usize> = (0..a.len()).filter(|&i| a[i] >= 0 && b[i] >= 0).collect();
    let mut out = Vec::new();
    for x in 0..idx.len() {
        for y in x + 1..idx.len() {
            let (i, j) = (idx[x], idx[y]);
            out.push((a[i] == a[j], b[i] == b[j]));
        }
    }
    out
}

/// Pair-counting ARI over samples assigned in both labelings.
pub fn ari(pred: &[i64], truth: &[i64]) -> f64 {
    if !pred.iter().zip(truth).any(|(&p, &t)| p >= 0 && t >= 0) {
        return 0.0;
    }
    let (mut n11, mut n10, mut n01, mut n00) = (0.0, 0.0, 0.0, 0.0);
    for (sp, st) in assigned_pairs(pred, truth) {
        match (sp, st) {
            (true, true) => n11 += 1.0,
            (true, false) => n10 += 1.0,
            (false, true) => n01 += 1.0,
            (false, false) => n00 += 1.0,
        }
    }
    let den: f64 = (n11 + n10) * (n10 + n00) + (n11 + n01) * (n01 + n00);
    if den == 0.0 {
        return 1.0;
    }
    2.0 * (n11 * n00 - n10 * n01) / den
}

/// Fraction of doubly-assigned pairs whose together/apart relation agrees.
pub fn consistency(prev: &[i64], curr: &[i64]) -> f64 {
    let pairs = assigned_pairs(prev, curr);
    if pairs.is_empty() {
        return 1.0;
    }
    pairs.iter().filter(|(a, b)| a == b).count() as f64 / pairs.len() as f64
}

/// NMI with arithmetic-mean normalisation from plain entropy sums.
pub fn nmi(pred: &[i64], truth: &[i64]) -> f64 {
    let both: Vec<(i64, i64)> = pred
        .iter()
        .zip(truth)
        .filter(|(&p, &t)| p >= 0 && t >= 0)
        .map(|(&p, &t)| (p, t))
        .collect();
    if both.is_empty() {
        return 0.0;
    }
    let n = both.len() as f64;
    let mut joint: HashMap<(i64, i64), f64> = HashMap::new();
    let mut pa: HashMap<i64, f64> = HashMap::new();
    let mut pb: HashMap<i64, f64> = HashMap::new();
    for &(p, t) in &both {
        *joint.entry((p, t)).or_default() += 1.0 / n;
        *pa.entry(p).or_default() += 1.0 / n;
        *pb.entry(t).or_default() += 1.0 / n;
    }
    let h = |m: &HashMap<i64, f64>| -> f64 { -m.values().map(|p| p * p.ln()).sum::<f64>() };
    let (ha, hb) = (h(&pa), h(&pb));
    if ha == 0.0 && hb == 0.0 {
        return 1.0;
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(p, t), &pj)| pj * (pj / (pa[&p] * pb[&t])).ln())
        .sum();
    mi / (0.5 * (ha + hb))
}

pub fn purity(pred: &[i64], truth: &[i64]) -> f64 {
    let mut by_pred: HashMap<i64, HashMap<i64, usize>> = HashMap::new();
    let mut n = 0usize;
    for (&p, &t) in pred.iter().zip(truth) {
        if p >= 0 && t >= 0 {
            *by_pred.entry(p).or_default().entry(t).or_default() += 1;
            n += 1;
        }
    }
    if n == 0 {
        return 0.0;
    }
    let hits: usize = by_pred
        .values()
        .map(|m| m.values().copied().max().unwrap_or(0))
        .sum();
    hits as f64 / n as f64
}

// ---------------------------------------------------------------- losses

pub fn clamped_ln(x: f64) -> f64 {
    x.max(LOG_CLAMP).ln()
}

pub fn cross_entropy(target: &[f64], pred: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..target.len() {
        s -= target[k] * clamped_ln(pred[k]);
    }
    s
}

/// `exp(d_ap) / (exp(d_ap) + exp(d_an))` evaluated directly.
pub fn soft_triplet_prob(a: &[f64], p: &[f64], n: &[f64]) -> f64 {
    let (dp, dn) = (dist(a, p), dist(a, n));
    dp.exp() / (dp.exp() + dn.exp())
}

/// Farthest same-label and nearest other-label sample of `anchor` by
/// listing every candidate; ties to the lowest index.
pub fn hardest_triplet(
    points: &[Vec<f64>],
    labels: &[i64],
    anchor: usize,
) -> Option<(usize, usize)> {
    if labels[anchor] < 0 {
        return None;
    }
    let cand: Vec<(usize, f64, bool)> = (0..points.len())
        .filter(|&j| j != anchor && labels[j] >= 0)
        .map(|j| {
            (
                j,
                dist(&points[anchor], &points[j]),
                labels[j] == labels[anchor],
            )
        })
        .collect();
    let pos = cand
        .iter()
        .filter(|c| c.2)
        .fold(None::<(usize, f64)>, |best, c| match best {
            Some((_, bd)) if bd >= c.1 => best,
            _ => Some((c.0, c.1)),
        })?;
    let neg = cand
        .iter()
        .filter(|c| !c.2)
        .fold(None::<(usize, f64)>, |best, c| match best {
            Some((_, bd)) if bd <= c.1 => best,
            _ => Some((c.0, c.1)),
        })?;
    Some((pos.0, neg.0))
}

pub fn ema(teacher: &[f64], student: &[f64], momentum: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(teacher.len());
    for i in 0..teacher.len() {
        out.push(momentum * teacher[i] + (1.0 - momentum) * student[i]);
    }
    out
}
