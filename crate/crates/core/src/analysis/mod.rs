//! Feature importance, feature clustering and OWA breakdown reports.

mod breakdown;
mod cluster;
mod importance;
pub mod svg;

pub use breakdown::{compare_buckets, owa_breakdown, BucketCell, Bucketing, CellStat, OwaBreakdown, SeriesOwa};
pub use cluster::{
    cluster_features, correlation_distance, correlation_matrix, ward_linkage, Dendrogram, Merge, DEFAULT_CLUSTERS,
};
pub use importance::{
    cluster_importance, derive_seed, feature_importance, net_loss_with_features, permutation_importance,
    permutation_importance_with, ImportanceRecord, DEFAULT_REPEATS,
};
