//! Condensed cluster tree and excess-of-mass flat cluster selection.

use std::collections::{BTreeMap, VecDeque};

use super::mst::{MstEdgeList, UnionFind};
use crate::error::{Result, SlrError};
use crate::model::HardLabeling;

/// Largest lambda (1 / distance) used; zero-length edges map here.
pub const LAMBDA_CAP: f64 = 1e12;

pub fn lambda_of(distance: f64) -> f64 {
    if distance <= 0.0 {
        LAMBDA_CAP
    } else {
        (1.0 / distance).min(LAMBDA_CAP)
    }
}

/// One cluster of the condensed tree.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterNode {
    pub parent: Option<usize>,
    pub birth_lambda: f64,
    /// Lambda at which the cluster splits into children or dissolves.
    pub death_lambda: f64,
    /// Member count at birth.
    pub size: usize,
    pub children: Vec<usize>,
    /// Points leaving this cluster directly, with their departure lambda.
    pub points: Vec<(usize, f64)>,
    pub stability: f64,
}

/// Clusters indexed so that every child id is larger than its parent's.
/// Node 0 is the root holding all points.
#[derive(Debug, Clone, PartialEq)]
pub struct CondensedTree {
    n_points: usize,
    min_cluster_size: usize,
    nodes: Vec<ClusterNode>,
}

impl CondensedTree {
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn min_cluster_size(&self) -> usize {
        self.min_cluster_size
    }

    pub fn nodes(&self) -> &[ClusterNode] {
        &self.nodes
    }

    pub fn root(&self) -> &ClusterNode {
        &self.nodes[0]
    }

    /// All points that belong to `cluster` or any of its descendants.
    pub fn subtree_points(&self, cluster: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![cluster];
        while let Some(c) = stack.pop() {
            out.extend(self.nodes[c].points.iter().map(|&(p, _)| p));
            stack.extend(&self.nodes[c].children);
        }
        out.sort_unstable();
        out
    }
}

/// Internal node of the single-linkage dendrogram. Ids below `n` are points,
/// id `n + k` is `merges[k]`. All merges at one distance that touch the same
/// component collapse into a single multi-way node.
struct Merge {
    distance: f64,
    children: Vec<usize>,
    size: usize,
}

fn single_linkage(mst: &MstEdgeList) -> (Vec<Merge>, usize) {
    let n = mst.n_nodes();
    let mut uf = UnionFind::new(n);
    let mut top: Vec<usize> = (0..n).collect();
    let mut merges: Vec<Merge> = Vec::with_capacity(n.saturating_sub(1));
    let edges = mst.sorted_edges();
    let mut start = 0;
    while start < edges.len() {
        let w = edges[start].weight;
        let end = start + edges[start..].iter().take_while(|e| e.weight == w).count();
        let mut pending: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for e in &edges[start..end] {
            let (a, b) = (uf.find(e.u), uf.find(e.v));
            if a == b {
                continue;
            }
            let mut children = pending.remove(&a).unwrap_or_else(|| vec![top[a]]);
            children.extend(pending.remove(&b).unwrap_or_else(|| vec![top[b]]));
            let root = uf.union(a, b).expect("distinct roots");
            pending.insert(root, children);
        }
        for (root, children) in pending {
            top[root] = n + merges.len();
            merges.push(Merge {
                distance: w,
                children,
                size: uf.size_of(root),
            });
        }
        start = end;
    }
    let root = if n == 0 { 0 } else { top[uf.find(0)] };
    (merges, root)
}

/// Builds the condensed tree from a spanning tree of mutual-reachability
/// distances.
///
/// Edges are merged bottom-up in ascending weight with a union-find. Walking
/// the resulting hierarchy top-down, a split where two or more parts have at
/// least `min_cluster_size` points creates child clusters; smaller parts
/// fall out of the current cluster as individual points.
pub fn condense_tree(mst: &MstEdgeList, min_cluster_size: usize) -> Result<CondensedTree> {
    if min_cluster_size < 2 {
        return Err(SlrError::InvalidParameter(format!(
            "min_cluster_size = {min_cluster_size} must be >= 2"
        )));
    }
    let n = mst.n_nodes();
    let (merges, root) = single_linkage(mst);
    let size_of = |node: usize| if node < n { 1 } else { merges[node - n].size };
    let leaves = |node: usize| -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(x) = stack.pop() {
            if x < n {
                out.push(x);
            } else {
                stack.extend(&merges[x - n].children);
            }
        }
        out
    };

    let mut nodes = vec![ClusterNode {
        parent: None,
        birth_lambda: 0.0,
        death_lambda: 0.0,
        size: n,
        children: Vec::new(),
        points: Vec::new(),
        stability: 0.0,
    }];
    let mut queue = VecDeque::new();
    if n > 0 {
        queue.push_back((0usize, root));
    }
    while let Some((cluster, node)) = queue.pop_front() {
        if node < n {
            // a lone point can only be the root of a one-point tree
            let birth = nodes[cluster].birth_lambda;
            nodes[cluster].points.push((node, birth));
            nodes[cluster].death_lambda = birth;
            continue;
        }
        let merge = &merges[node - n];
        let lambda = lambda_of(merge.distance);
        let (big, small): (Vec<usize>, Vec<usize>) = merge
            .children
            .iter()
            .partition(|&&c| size_of(c) >= min_cluster_size);
        for s in small {
            let pts = leaves(s);
            nodes[cluster]
                .points
                .extend(pts.into_iter().map(|p| (p, lambda)));
        }
        match big.len() {
            0 => nodes[cluster].death_lambda = lambda,
            1 => queue.push_back((cluster, big[0])),
            _ => {
                nodes[cluster].death_lambda = lambda;
                for child in big {
                    let id = nodes.len();
                    nodes.push(ClusterNode {
                        parent: Some(cluster),
                        birth_lambda: lambda,
                        death_lambda: lambda,
                        size: size_of(child),
                        children: Vec::new(),
                        points: Vec::new(),
                        stability: 0.0,
                    });
                    nodes[cluster].children.push(id);
                    queue.push_back((id, child));
                }
            }
        }
    }

    for c in 0..nodes.len() {
        let birth = nodes[c].birth_lambda;
        let from_points: f64 = nodes[c].points.iter().map(|&(_, l)| l - birth).sum();
        let from_children: f64 = nodes[c]
            .children
            .iter()
            .map(|&k| (nodes[k].birth_lambda - birth) * nodes[k].size as f64)
            .sum();
        nodes[c].stability = from_points + from_children;
    }

    Ok(CondensedTree {
        n_points: n,
        min_cluster_size,
        nodes,
    })
}

/// Excess-of-mass selection: a cluster is kept when its own stability
/// exceeds the best total its descendants can achieve. The root may be
/// selected, in which case every point lands in one cluster.
///
/// Returns selected cluster ids in ascending order; empty when the tree
/// holds fewer points than the minimum cluster size.
pub fn select_clusters_eom(tree: &CondensedTree) -> Vec<usize> {
    if tree.n_points == 0 || tree.nodes[0].size < tree.min_cluster_size {
        return Vec::new();
    }
    let k = tree.nodes.len();
    let mut best = vec![0.0; k];
    let mut keep = vec![false; k];
    for c in (0..k).rev() {
        let node = &tree.nodes[c];
        let child_sum: f64 = node.children.iter().map(|&ch| best[ch]).sum();
        if node.children.is_empty() || node.stability > child_sum {
            keep[c] = true;
            best[c] = node.stability;
        } else {
            best[c] = child_sum;
        }
    }
    let mut selected = Vec::new();
    let mut stack = vec![0];
    while let Some(c) = stack.pop() {
        if keep[c] {
            selected.push(c);
        } else {
            stack.extend(&tree.nodes[c].children);
        }
    }
    selected.sort_unstable();
    selected
}

/// Flat labeling from the excess-of-mass selection. Points outside every
/// selected subtree are noise; ids follow first appearance by sample index.
pub fn extract_clusters_eom(tree: &CondensedTree) -> HardLabeling {
    let mut labels = vec![None; tree.n_points];
    for (id, &cluster) in select_clusters_eom(tree).iter().enumerate() {
        for p in tree.subtree_points(cluster) {
            labels[p] = Some(id);
        }
    }
    HardLabeling::by_first_appearance(labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::distance::DistanceMatrix;
    use crate::clustering::mst::build_mst;

    fn line_mst(pos: &[f64]) -> MstEdgeList {
        let n = pos.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = (pos[i] - pos[j]).abs();
            }
        }
        build_mst(&DistanceMatrix::from_vec(n, data).unwrap())
    }

    #[test]
    fn lambda_caps_zero_distance() {
        assert_eq!(lambda_of(0.0), LAMBDA_CAP);
        assert_eq!(lambda_of(0.5), 2.0);
    }

    #[test]
    fn two_groups_split_from_root() {
        let pos = [0.0, 0.1, 0.2, 0.3, 10.0, 10.1, 10.2, 10.3];
        let tree = condense_tree(&line_mst(&pos), 3).unwrap();
        assert_eq!(tree.root().children, vec![1, 2]);
        assert_eq!(tree.nodes()[1].size, 4);
        assert_eq!(tree.nodes()[2].size, 4);
        for node in &tree.nodes()[1..] {
            assert!(node.size >= 3);
            assert!(node.stability >= 0.0);
        }
        let labels = extract_clusters_eom(&tree);
        assert_eq!(labels.to_raw(), vec![0, 0, 0, 0, 1, 1, 1, 1]);
    }

    #[test]
    fn small_single_blob_is_root_only() {
        let pos = [0.0, 0.1, 0.25, 0.3, 0.42];
        let tree = condense_tree(&line_mst(&pos), 3).unwrap();
        assert_eq!(tree.nodes().len(), 1);
        let labels = extract_clusters_eom(&tree);
        assert_eq!(labels.to_raw(), vec![0; 5]);
    }

    #[test]
    fn too_few_points_is_noise() {
        let tree = condense_tree(&line_mst(&[0.0, 1.0]), 3).unwrap();
        assert_eq!(extract_clusters_eom(&tree).to_raw(), vec![-1, -1]);
        let tree = condense_tree(&line_mst(&[0.0]), 2).unwrap();
        assert_eq!(extract_clusters_eom(&tree).to_raw(), vec![-1]);
    }

    #[test]
    fn outlier_falls_out_as_noise() {
        // three tight groups of 3 plus a far point that leaves the root first
        let pos = [0.0, 0.01, 0.02, 5.0, 5.01, 5.02, 10.0, 10.01, 10.02, 30.0];
        let tree = condense_tree(&line_mst(&pos), 3).unwrap();
        let labels = extract_clusters_eom(&tree);
        assert_eq!(labels.n_clusters(), 3);
        assert_eq!(labels.get(9), None);
        assert_eq!(tree.subtree_points(0).len(), 10);
        assert_eq!(tree.root().points, vec![(9, lambda_of(30.0 - 10.02))]);
    }

    #[test]
    fn rejects_tiny_min_cluster_size() {
        assert!(condense_tree(&line_mst(&[0.0, 1.0]), 1).is_err());
    }
}
