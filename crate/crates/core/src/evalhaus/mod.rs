//! Rational evaluation of infinitesimal parameters, grid sampling and
//! cloud-based distance estimates.

pub mod cloud;
pub mod distance;
pub mod evaluate;
pub mod lim0;
pub mod sample;
pub mod search;
pub mod tvector;

pub use cloud::{PointCloud, Points, SampleBox};
pub use distance::{directed_distance, hausdorff_estimate, HausdorffEstimate, KdTree};
pub use evaluate::{evaluate_formula, evaluate_suffix};
pub use lim0::{halving_schedule, lim0_estimate, Lim0Report, Lim0Step};
pub use sample::{lattice_accepts, sample_cloud, sample_cloud_with, sample_compiled, Compiled, EQUATION_SLACK};
pub use search::{find_small_params, SearchConfig, SearchOutcome, Verdict};
pub use tvector::TVector;
