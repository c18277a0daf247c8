//! Reference methods: classic complete-data Hartigan-Wong k-means and the
//! k-POD imputation scheme built on it.

mod hw;
mod kpod;

pub use hw::kmeans_hw;
pub use kpod::{kpod, KpodConfig, KpodFit};
