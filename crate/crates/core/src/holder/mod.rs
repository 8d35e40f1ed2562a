//! Grids, sampled fields, finite differences and weighted Hölder norms.

mod diff;
mod field;
mod grid;
mod norms;

pub use diff::{finite_diff, fornberg_weights, AxisStencil, Differentiator};
pub use field::{Field, FIELD_HEADER_BYTES};
pub use grid::{SpatialGrid, DEFAULT_NODE_BUDGET};
pub use norms::{
    holder_seminorm, parabolic_seminorm, space_norm, sup_abs, sup_in_time_norm, weighted_sup_norm,
    DerivativeFamily, NormEntry, NormOptions, NormReport, NormVariant, ParabolicSeminorm, Term,
    FULL_PAIR_LIMIT,
};
