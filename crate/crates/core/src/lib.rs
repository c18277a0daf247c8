//! k-means clustering for data with missing values.
//!
//! Rows are clustered on the features they actually have. The objective is
//! the within-cluster sum of squares over observed cells, cluster means are
//! taken over observed values only, and nothing is imputed. The optimizer is a
//! Hartigan-Wong transfer algorithm whose transfer costs are exact changes of
//! that masked objective.
//!
//! The crate also carries k-means++ seeding for masked rows, a jump statistic
//! for choosing `K`, reference complete-data and k-POD baselines, and a
//! simulator for labeled Gaussian clusters under several missingness
//! mechanisms.

pub mod baseline;
pub mod cluster;
pub mod dataset;
pub mod error;
pub mod hartigan;
pub mod init;
pub mod rng;
pub mod select;
pub mod simulate;

pub use cluster::{
    cluster_means, objective, partial_sq_distance, scaled_partial_sq_distance, Centers,
    ClusterState, FitResult, PartialDistance, Partition,
};
pub use dataset::MaskedDataset;
pub use error::{Error, Result};
pub use hartigan::{
    assign_initial, default_inits, delta_minus, delta_plus, fit, run_km_means, FitConfig,
    KmConfig, TransferDeltas,
};
pub use init::{kmeanspp_init, InitConfig, Weighting};
pub use select::{distortion, jump_statistic, select_k, KSweepResult, SweepConfig};
