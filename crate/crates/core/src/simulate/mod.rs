//! Labeled Gaussian cluster generator, missingness mechanisms, the adjusted
//! Rand index and a replicate harness.

mod ari;
mod generate;
pub mod harness;
mod missing;

pub use ari::{adjusted_rand, Contingency};
pub use generate::{generate_clusters, Separation, SimData, SimSpec};
pub use missing::{
    apply_mar, apply_mcar, apply_missingness, apply_nmar1, apply_nmar2, default_affected,
    mar_censored_count,
    MaskOutcome, Mechanism, MissingSpec,
};
