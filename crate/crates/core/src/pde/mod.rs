//! The linear backward equation `-∂_t w - tr(A D²w) + ⟨B, Dw⟩ = F`, its
//! forward Fokker–Planck dual, and decay diagnostics.

mod decay;
mod fpk;
mod functions;
mod grid_solver;
mod mc;
mod spec;

pub use decay::{verify_decay, DecayReport};
pub use fpk::{
    fpk_gradient_mass, mollified_delta, solve_fpk_grid, FpkOptions, FpkSolution, GradientMass, MASS_TOLERANCE,
    MAX_FPK_DIM,
};
pub use functions::{
    check_decay, probe_scalar_decay, probe_vector_decay, FnScalar, FnVector, Profile, SampledField, ScalarFn,
    VectorFn,
};
pub use grid_solver::{
    solve_grid, solver_times, stability_limit, Boundary, BoundaryInfluence, GridOptions, GridSolution, Transport, MAX_GRID_DIM,
};
pub use mc::{mc_partial, solve_mc, McEstimate, McOptions, McQuery, MIN_PATHS};
pub use spec::{DiagonalEntry, DiffusionSpec, LinearProblem, OffDiagonal, ScalarField, VectorField};
