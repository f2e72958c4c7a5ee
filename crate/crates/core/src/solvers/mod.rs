//! Partitioning procedures for the four problem statements, the covering
//! optimizer, and exhaustive oracles used as ground truth in tests.

mod assignment;
mod clustering;
mod covering;
pub mod oracle;
mod ranking;
mod rating;

pub use assignment::{solve_assignment, AssignmentRule, UNASSIGNED};
pub use clustering::{clustering_cost, profile_distance, solve_clustering, ClusteringMode};
pub use covering::{optimize_covering, CoverMode, CoveringInstance, CoveringSolution, SearchMode};
pub use ranking::{merge_trailing_classes, solve_ranking};
pub use rating::{absolute_from_thresholds, aggregate_absolute, solve_rating};
