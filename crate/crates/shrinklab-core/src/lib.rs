//! Numerical laboratory for Lagrangian self-similar solutions (shrinkers and
//! expanders) in explicit gradient shrinking Kahler-Ricci solitons.
//!
//! The crate provides closed-form soliton backgrounds, discrete submanifold
//! geometry on periodic grids, the weighted volume functional and its
//! critical-point search, mean curvature flow with singularity rescaling,
//! drift-Laplacian spectral analysis, and end-to-end identity auditors.

pub mod audit;
pub mod background;
pub mod eigensolve;
pub mod error;
pub mod flow;
pub mod functional;
pub mod generate;
pub mod geometry;
pub mod grid;
pub mod immersion;
pub mod numerics;
pub mod report;
pub mod spectral;
pub mod suite;

pub use background::{c0_survey, soliton_residual, BackgroundJet, SolitonBackground};
pub use error::{Error, Result};
pub use geometry::{
    conformal_mean_curvature, gauss_consistency, induced_geometry, lagrangian_defect_norm,
    self_similar_residual, InducedGeometry, ResidualField,
};
pub use grid::ParamGrid;
pub use immersion::Immersion;
