//! Numerical toolkit for principal eigenvalues of the negative Laplacian
//! under mixed absorbing/Robin/reflecting boundary conditions on 2D grid
//! domains, and for steady states of KPP-type reaction-diffusion equations
//! driven by those eigenvalues.
//!
//! The crate is organized around a small pipeline:
//!
//! * [`geometry`] builds and transforms masked grid domains with
//!   per-boundary-face parameters;
//! * [`operator`] assembles the five-point discretization with the boundary
//!   operator folded in via ghost values;
//! * [`eigen`] computes principal eigenpairs and the spectral constructions
//!   on top of them (exhaustion, localization scans, windowed spectrum
//!   probes, the wide/thin domain decomposition);
//! * [`reaction`] provides the reaction presets and classification checks;
//! * [`steady`] runs the semi-implicit parabolic flow to steady states and
//!   the existence/uniqueness/trigger experiments;
//! * [`analysis`] post-processes tail solutions by transverse Fourier
//!   decomposition and decay fits.
//!
//! All numerical paths are serial and deterministic: identical inputs give
//! bit-identical results.

pub mod analysis;
pub mod eigen;
pub mod error;
pub mod field;
pub mod geometry;
pub mod linalg;
pub mod operator;
pub mod radial;
pub mod reaction;
pub mod steady;

pub use eigen::{domain_eigenpair, domain_lambda, principal_eigenpair, EigenPair};
pub use error::{AnalysisError, EigenError, FlowError, GeometryError, OperatorError, ReactionError};
pub use field::Field;
pub use geometry::{
    build_bulb, build_comb, build_disk, build_rectangle, build_rectangle_sides, build_strip,
    connected_component, intersect_ball, translate_window, DomainModel, GridSpec,
};
pub use operator::{assemble, apply, rayleigh_quotient, SparseOperator};
pub use reaction::ReactionSpec;
pub use steady::{flow_to_steady, maximal_solution, minimal_solution, FlowResult, SteadyClass};
