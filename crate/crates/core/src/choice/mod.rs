//! Construction of semialgebraic choices.

mod closed;
mod crit;
mod linear;
mod map;
mod perturb;
mod pipeline;
mod tilde;

pub use closed::{approx_closed_basic, ClosedApprox};
pub use crit::{crit_expr, crit_polynomial, determinant, minors, partial_jacobian};
pub use linear::{generic_linear_change, identity, inverse, mat_mul, reversal, LinearChange, Matrix};
pub use perturb::{build_g, build_perturbed, strategy_by_name, DefaultStrategy, PerturbationStrategy, Perturbed};
pub use tilde::{a2, a3, build_tilde_s_ell, CritRank, TildeSEll};
pub use map::{choice_for_map, lipschitz_estimate, map_info, map_points, map_records, MapInfo};
pub use pipeline::{approximate_choice, approximate_choice_basic, default_box, projection_coords, ChoiceResult, PieceInfo};
