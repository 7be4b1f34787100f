//! Numerical checks of the properties a choice must have.

mod bounds;
mod checks;
mod components;
mod dimension;
mod fibers;
mod report;
mod run;

pub use bounds::{render_big, ThomMilnor};
pub use checks::{
    containment_record, coverage_record, diagram_record, dimension_record, fiber_record, hausdorff_record, slice_record,
    thom_milnor_record,
};
pub use components::{component_labels, count_components, min_link_radius, UnionFind};
pub use dimension::{box_dimension, box_dimension_default, default_scales};
pub use fibers::{fiber_clusters, fiber_slab, point_like_diameter, strong_dimension_check, FiberCheck, FiberStats};
pub use report::{Record, Report};
pub use run::{dilate, fiber_targets, negative_controls, shrink, verify_choice};
