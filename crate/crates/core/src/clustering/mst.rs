use super::distance::DistanceMatrix;

/// Disjoint-set forest with union by size and path halving.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets holding `a` and `b` and returns the new root, or
    /// `None` if they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> Option<usize> {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return None;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        Some(a)
    }

    pub fn size_of(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MstEdge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Spanning tree over `0..n_nodes` as `n_nodes - 1` weighted edges.
#[derive(Debug, Clone, PartialEq)]
pub struct MstEdgeList {
    n_nodes: usize,
    edges: Vec<MstEdge>,
}

impl MstEdgeList {
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn edges(&self) -> &[MstEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Edges sorted by weight, ties by endpoints.
    pub fn sorted_edges(&self) -> Vec<MstEdge> {
        let mut e = self.edges.clone();
        e.sort_by(|a, b| {
            a.weight
                .total_cmp(&b.weight)
                .then(a.u.min(a.v).cmp(&b.u.min(b.v)))
                .then(a.u.max(a.v).cmp(&b.u.max(b.v)))
        });
        e
    }
}

/// Prim's algorithm on the dense complete graph, O(n^2).
///
/// Ties pick the lowest node index, so the tree is deterministic.
pub fn build_mst(dist: &DistanceMatrix) -> MstEdgeList {
    let n = dist.n();
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    if n == 0 {
        return MstEdgeList { n_nodes: 0, edges };
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut best_from = vec![0usize; n];
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let row = dist.row(current);
        let mut next = usize::MAX;
        let mut next_w = f64::INFINITY;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            if row[j] < best[j] {
                best[j] = row[j];
                best_from[j] = current;
            }
            if best[j] < next_w || next == usize::MAX {
                next_w = best[j];
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push(MstEdge {
            u: best_from[next],
            v: next,
            weight: next_w,
        });
        current = next;
    }
    MstEdgeList { n_nodes: n, edges }
}
