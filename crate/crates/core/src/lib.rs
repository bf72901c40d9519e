//! Schrödinger eigenproblems on metric graphs with Kirchhoff vertex
//! conditions, plus certified pointwise envelopes for the eigenfunctions:
//! exponential tunneling bounds from a path metric, explicit supersolution
//! (landscape) bounds via the maximum principle, high-energy shooting
//! bounds, transition-window bounds, and heat-kernel uniform bounds.

pub mod agmon;
pub mod cases;
pub mod eigensolver;
pub mod envelope;
pub mod error;
pub mod graph;
pub mod local;
pub mod metric;
pub mod ode;
pub mod potential;
pub mod quad;
pub mod roots;
pub mod specdoc;
pub mod spectral;
pub mod torsion;
pub mod uniform;
pub mod verify;

pub use eigensolver::SolverConfig;
pub use envelope::{Envelope, Method, Provenance};
pub use error::{Error, Result};
pub use graph::{
    DoubledGraph, Edge, EdgeEnd, EdgeId, GraphBuilder, GraphConfig, GraphPath, GraphPoint,
    MetricGraph, PathSegment, VertexId,
};
pub use metric::{shortest_path, DistanceField, EdgeWeight, TableWeight, UnitWeight};
pub use potential::{EdgePotential, PotentialField};
pub use spectral::{
    assemble, classify_regions, solve_eigs, solve_extrapolated, DiscretizedHamiltonian,
    Eigenpair, RegionPartition,
};
