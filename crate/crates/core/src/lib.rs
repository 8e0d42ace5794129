//! Equality tests for several high-dimensional covariance matrices of
//! stationary processes.
//!
//! The core statistic replaces the determinants of the classical Box's M
//! with scalar quadratic forms Ŝ_i = y·S_i·yᵀ, which stay positive and
//! cheap when the dimension far exceeds the sample sizes. Everything is
//! computed in O(n·p) streaming passes; no p×p matrix is ever formed on
//! the test path.
//!
//! Modules:
//! - [`statmath`]: chi-square CDF/survival/quantile kernel and a KS distance
//! - [`quadform`]: streaming quadratic forms and a small-p covariance oracle
//! - [`homtest`]: the ρL_k test, block tests, and the Box's M reference
//! - [`procsim`]: stationary-process generators with seeded substreams
//! - [`montecarlo`]: size/power scenarios, presets, distribution checks
//! - [`io`]: CSV ingestion and reproducible JSON result documents

pub mod error;
pub mod homtest;
pub mod io;
pub mod montecarlo;
pub mod procsim;
pub mod quadform;
pub mod statmath;

pub use error::{Error, Result};
pub use homtest::{
    block_tests, box_m, default_partition, dimension_condition, lk_test, BlockPartition,
    DecisionMode, MultiGroupData, TestResult,
};
pub use montecarlo::{run_scenario, scenario_presets, theorem31_check, RateEstimate, Scenario};
pub use procsim::{CovModel, InnovationLaw, SeededRng};
pub use quadform::{quad_form, GroupSample, SelectorVector};
pub use statmath::{DegreesOfFreedom, Probability};
