//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point off manifold: |p| = {radius:.15}, deviates from the unit sphere beyond 1e-10")]
    PointOffManifold { radius: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("sample list needs at least {min} points, got {got}")]
    SampleTooSmall { min: usize, got: usize },

    #[error("grid too small: every periodic direction needs at least {min} nodes, got {got}")]
    GridTooSmall { min: usize, got: usize },

    #[error("degenerate immersion at node {node}: metric eigenvalue {eig:.3e} below floor {floor:.3e}")]
    DegenerateImmersion { node: usize, eig: f64, floor: f64 },

    #[error("node {node} lies off the unit sphere by {dev:.3e} (tolerance {tol:.1e})")]
    OffSphere { node: usize, dev: f64, tol: f64 },

    #[error("immersion has a non-finite coordinate at node {node}")]
    NonFinitePoint { node: usize },

    #[error("time step {dt:.3e} violates the parabolic stability bound {bound:.3e}")]
    StabilityBound { dt: f64, bound: f64 },

    #[error("rescale requires t < T: got t = {t}, T = {t_singular}")]
    RescaleTime { t: f64, t_singular: f64 },

    #[error("flow requires the flat background")]
    FlowNeedsFlat,

    #[error("rotation number {p}/{q} outside the closed-curve window (1/2, 1/sqrt(2)) or not reduced")]
    RotationWindow { p: u32, q: u32 },

    #[error("curve shooting failed to close: best gap {gap:.3e} after {iters} bisection steps")]
    ShootingFailed { gap: f64, iters: usize },

    #[error("eigensolver did not converge within {iters} iterations")]
    EigenNonConvergence { iters: usize },

    #[error("dense eigensolve limited to {max} nodes, grid has {got}")]
    EigenProblemTooLarge { max: usize, got: usize },

    #[error("operation requires lambda > 0, got {lambda}")]
    NonPositiveLambda { lambda: f64 },

    #[error("operation requires lambda != 0")]
    ZeroLambda,

    #[error("descent aborted: immersivity lost at iteration {iter}")]
    ImmersivityLost { iter: usize },

    #[error("unknown background id '{0}' (expected flat:<m> or sphere:<f0>)")]
    BackgroundId(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
