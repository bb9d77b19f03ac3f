//! The limit-shape construction: slope fields, the discrete functions `F`
//! and `G` with their correction series, the map `psi`, the repaired T-graph,
//! and the cut domain.

pub mod burgers;
pub mod cut;
pub mod fg;
pub mod psi;
pub mod solvers;

pub use burgers::{
    phi_from_slope, slope_from_phi, surface_tension, Phi0, ShapeError, TestShape,
};
pub use cut::{cut_domain, is_simply_connected, CutDomain, CutError, CutInput, CutParams, SampledMatching};
pub use fg::{FgField, LimitShape};
pub use psi::{build_psi, choose_lambda, correct_to_tgraph, CorrectionParams, EdgeClass, GammaEx, PsiMap, SegDuals};
pub use solvers::{
    beltrami_residual, cauchy_transform, riemann_map, solve_beltrami, solve_dbar, GridField,
    SolverError,
};
