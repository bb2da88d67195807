//! Symbolic covariance and correlation for interval-valued data.
//!
//! Intervals are stored as center and range. The eight covariance
//! definitions are selected with [`CovKind`]; each one pairs with a
//! micro-data weight model ([`WeightModel`]) that can be simulated,
//! recovered from aggregated data and tested for fit.

pub mod algebra;
pub mod error;
pub mod fit;
pub mod interval;
pub mod io;
pub mod kind;
pub mod matrix;
pub mod microdata;
pub mod population;
pub mod rng;
pub mod stats;
pub mod weights;

pub use algebra::AffineSpec;
pub use error::{Error, Result};
pub use fit::{ad_statistic, ad_test, qq_envelope, select_model, FitConfig, FitReport, ModelSelector};
pub use interval::{aggregate_microdata, validate_dataset, Interval, IntervalDataset, MicroTable};
pub use kind::CovKind;
pub use matrix::SymmetricMatrix;
pub use microdata::{recover_weights, simulate_macrodata, simulate_microdata, WeightTable};
pub use population::{
    expected_rr, pairwise_cor, pairwise_cov, population_cor_matrix, population_cov_matrix,
    PopulationParams,
};
pub use rng::RngSeed;
pub use stats::{
    limits_form_oracle, sample_cor_matrix, sample_cor_pair, sample_cov_matrix, sample_cov_pair,
    sample_mean,
};
pub use weights::{model_variance, sample_weight, Family, Scenario, WeightModel};
