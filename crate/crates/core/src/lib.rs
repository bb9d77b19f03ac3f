//! T-graphs for lozenge tilings.
//!
//! Builds T-graphs realizing a prescribed liquid limit shape, samples exact
//! uniform tilings through the wired spanning-tree correspondence, and checks
//! the geometric and fluctuation behaviour of the samples at desk scale.
//!
//! Module map:
//! - [`hexlattice`]: coordinates, bipartite structure and slope relations of
//!   the hexagonal lattice,
//! - [`tgraph`]: the T-graph data model and its weighted dimer graph,
//! - [`planar`]: the explicit whole-plane family of T-graphs,
//! - [`walk`]: the continuous-time martingale walk on a T-graph,
//! - [`ust`]: wired uniform spanning trees (Wilson) and the tree-to-dimer map,
//! - [`height`]: reference flows, height functions, winding,
//! - [`shape`]: limit-shape fields and the corrected T-graph construction,
//! - [`oracle`]: exact matching counts and inclusion probabilities,
//! - [`stats`]: the statistical verification harness.

pub mod geom;
pub mod height;
pub mod hexlattice;
pub mod oracle;
pub mod planar;
pub mod rng;
pub mod shape;
pub mod stats;
pub mod tgraph;
pub mod ust;
pub mod walk;

pub use num_complex::Complex64;
