//! The truncated Nash system
//! `-∂_t u^i - tr(A D²u^i) + H^i(𝒟u) + Σ_{j≠i} ∂_{p^j}H^j(𝒟u) D_ju^i = 0`,
//! `u^i(T) = G^i`, solved by Picard iteration of the linearized map `S`.

mod diagnostics;
mod game;
mod hamiltonian;
mod picard;

pub use diagnostics::{
    contraction_probe, dimension_stability, horizon_scan, mc_map_value, probe_pairs, uniqueness_probe,
    ContractionProbe, DimensionStability, HorizonScan, ScanOptions, ScanRow, StabilityPair, UniquenessReport,
    DEGENERATE_PAIR,
};
pub use game::GameSpec;
pub use hamiltonian::{probe_hamiltonian, Hamiltonian, MomentumCost, SeparableHamiltonian};
pub use picard::{
    assemble_drift, assemble_source, occupancy, picard_solve, picard_step, residual, triple_norm, InitialGuess,
    Iterate, NashDrift, NashSolution, NashSource, Occupancy, PicardIteration, PicardReport, PicardRun, Residual,
    TripleNorm,
};
