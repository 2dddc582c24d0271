//! Information geometry on quotients of diffeomorphism groups by their
//! volume-preserving subgroups.
//!
//! The quotient `D(M)/D_mu(M)` is identified with the space of smooth
//! probability densities on `M`. This crate implements, at desk scale, the
//! geometry that the alpha-divergence family induces there:
//!
//! - spectral calculus on the circle `S^1 = R/Z` ([`circle`]);
//! - circle diffeomorphisms fixing `0`, with composition, inversion, flows
//!   and the square-root-Jacobian sphere embedding ([`diffeo`]);
//! - alpha-divergences, the Hellinger distance, the Fisher-Rao matrix and
//!   finite-difference recovery of metric and connection ([`divergence`]);
//! - the homogeneous `H^1` metric, the alpha-connection Christoffel maps,
//!   duality checks and a commutator curvature evaluator ([`connection`]);
//! - geodesic solvers for the generalized Proudman-Johnson family with
//!   closed forms at alpha in {-1, 0, 1} ([`geodesic`]);
//! - the n-dimensional flat-torus theory ([`torus`]).
//!
//! Everything is a pure function of immutable values; fields and
//! trajectories are freely shareable between threads.

pub mod circle;
pub mod connection;
pub mod diffeo;
pub mod divergence;
pub mod error;
pub mod geodesic;
pub mod torus;

pub use circle::{cumulative_integral, inverse_a, PeriodicField, PeriodicGrid};
pub use connection::{
    christoffel, covariant_derivative, curvature_eval, duality_residual, h1_inner, CurvatureReport,
};
pub use diffeo::{flow, flow_constant, CircleDiffeo, Density, DiffeoTrajectory, Interp};
pub use divergence::{
    alpha_divergence, alpha_divergence_diffeo, christoffel_from_divergence, fisher_rao_matrix,
    hellinger_distance, metric_from_divergence, AlphaParam, ParametricFamily,
};
pub use error::{Error, Result};
pub use geodesic::{
    affine_chart_phi, alpha0_density_geodesic, alpha1_solution, alpham1_breakdown_time,
    alpham1_solution, conserved_c, integrate_pj, inverse_phi, pj_rhs, VelocityTrajectory,
};
pub use torus::{
    advect_points, alpha1_solution_nd, geodesic_rhs_nd, h1_inner_nd, helmholtz_split,
    integrate_nd, nabla_alpha_identity, pjn_residual, Alpha1SolutionNd, TorusDensity, TorusField,
    TorusGrid, TorusTrajectory, TorusVectorField,
};
