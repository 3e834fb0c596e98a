//! Flat DBSCAN for per-epoch features and HDBSCAN for hardening soft labels.
//!
//! Everything works on exact dense distance matrices.

pub mod condensed;
pub mod dbscan;
pub mod distance;
pub mod hdbscan;
pub mod mst;

pub use condensed::{
    condense_tree, extract_clusters_eom, select_clusters_eom, ClusterNode, CondensedTree,
    LAMBDA_CAP,
};
pub use dbscan::{dbscan, dbscan_with_distances};
pub use distance::{
    euclidean_unordered, pairwise_distances, pairwise_distances_unordered, sorted_sum,
    DistanceMatrix, Metric,
};
pub use hdbscan::{core_distances, hdbscan, hdbscan_with_distances, mutual_reachability};
pub use mst::{build_mst, MstEdge, MstEdgeList, UnionFind};
