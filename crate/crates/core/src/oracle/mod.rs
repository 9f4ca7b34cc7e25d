//! Dense-rod reference solutions, model fitting and model comparison.

mod banded;
pub mod compare;
pub mod equilibrium;
pub mod fit;
pub mod rod;

pub use compare::{
    compare_models, default_marker_points, error_report, oracle_truth, rod_loads, sample_centerline, ErrorReport,
    GroundTruth, MarkerError, ModelComparison,
};
pub use equilibrium::{
    dense_equilibrium, dense_equilibrium_with, rod_tendon_lengths, OracleOptions, OracleReport, RodLoads, RodTendon,
    TendonDrive,
};
pub use fit::{fit_model, CurveSample, FitResult};
pub use rod::DenseRod;
