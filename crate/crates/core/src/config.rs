use serde::{Deserialize, Serialize};

use crate::choice::CritRank;
use crate::exact::rational::{rat, serde_str};
use crate::exact::Rational;
use crate::verify::ThomMilnor;

/// Tunables of the choice pipeline and its verification. Every field has a
/// default, so a JSON config only needs the fields it overrides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub strategy: String,
    pub crit_rank: CritRank,
    /// Largest parameter `t_3` tried by the search.
    #[serde(with = "serde_str")]
    pub eta: Rational,
    pub big_k: u32,
    pub search_per_level: u32,
    pub search_budget: usize,
    /// Sampling grid step.
    #[serde(with = "serde_str")]
    pub grid: Rational,
    /// Grid of the strong-dimension precheck, as a multiple of `grid`.
    pub precheck_grid_factor: u32,
    pub precheck_fibers: usize,
    pub n_max: usize,
    pub linear_retries: usize,
    #[serde(with = "serde_str")]
    pub linear_delta0: Rational,
    /// Return the input unchanged when its sampled dimension is already at most `ell`.
    pub low_dim_shortcut: bool,
    pub seed: u64,
    /// Multiplies the grid-derived distance tolerance `2h`.
    pub tolerance_scale: f64,
    pub dim_tolerance: f64,
    /// Fibers sampled by the fiber-finiteness check.
    pub fiber_checks: usize,
    /// Fibers of the input that the output must meet.
    pub coverage_fibers: usize,
    pub slices: usize,
    pub thom_milnor: ThomMilnor,
    /// Start of the shared relaxation search in the closed approximation.
    #[serde(with = "serde_str")]
    pub closed_r0: Rational,
    pub closed_budget: usize,
    /// Points in the Lipschitz estimate grid per axis.
    pub lipschitz_grid: u32,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            strategy: "default".into(),
            crit_rank: CritRank::Lagrange,
            eta: rat(1, 4),
            big_k: 2,
            search_per_level: 4,
            search_budget: 48,
            grid: rat(1, 128),
            precheck_grid_factor: 2,
            precheck_fibers: 200,
            n_max: 64,
            linear_retries: 8,
            linear_delta0: rat(1, 64),
            low_dim_shortcut: false,
            seed: 0,
            tolerance_scale: 1.0,
            dim_tolerance: 0.3,
            fiber_checks: 200,
            coverage_fibers: 50,
            slices: 20,
            thom_milnor: ThomMilnor::default(),
            closed_r0: rat(1, 16),
            closed_budget: 16,
            lipschitz_grid: 17,
        }
    }
}

impl PipelineConfig {
    pub fn h(&self) -> f64 {
        crate::exact::rational::to_f64(&self.grid)
    }

    /// Distance tolerance: the error bar `2h` of two clouds, scaled.
    pub fn distance_tolerance(&self) -> f64 {
        2.0 * self.h() * self.tolerance_scale
    }
}
