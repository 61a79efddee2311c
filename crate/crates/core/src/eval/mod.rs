//! Toy datasets and desk-scale evaluation: geodesic-kernel MMD, mode
//! coverage and constraint-violation statistics.

mod metrics;
mod toy;

pub use metrics::{
    constraint_violation_stats, evaluate, geodesic_mmd, geodesic_mmd_biased, median_bandwidth, mode_coverage,
    nearest_neighbor_distance, ConstraintStat, EvalConfig, MetricReport, ModeCoverage, ViolationStats,
    METRIC_CSV_HEADER,
};
pub use toy::{generate_toy_dataset, MixtureComponent, ToyTaskSpec};
