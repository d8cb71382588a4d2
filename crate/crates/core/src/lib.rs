//! Feed-weight optimization and MIMO evaluation for antenna clusters.
//!
//! An antenna cluster is a group of closely spaced elements driven with
//! complex weights so that together they behave as one tunable antenna. This
//! crate builds radiation matrices from scattering parameters or far-field
//! patterns, finds the eigen-optimal weights at each frequency, and evaluates
//! the resulting multi-cluster device: TARC, total efficiency, loss
//! breakdown, envelope correlation and Rayleigh-fading ergodic capacity.

pub mod cli;
pub mod cluster;
pub mod ffpattern;
pub mod linalg;
pub mod mimoeval;
pub mod radmatrix;
pub mod synth;
pub mod touchstone;

pub use cluster::{
    cluster_efficiency, frequency_sweep, optimal_excitation, tarc, weighted_pattern, ClusterOperatingPoint,
    ExcitationVector,
};
pub use ffpattern::{integrate_overlap, mirror_pattern, FarFieldPattern, PatternSet, SphericalGrid, SymmetryPlane};
pub use radmatrix::{
    radiation_matrix_from_fields, radiation_matrix_from_s, ClusterDefinition, MatrixSource, RadiationMatrix, Scope,
};
pub use touchstone::{parse_touchstone, write_touchstone, DataFormat, Network};
