//! Ambient gradient shrinking Kahler-Ricci soliton backgrounds.
//!
//! Two explicit backgrounds are provided, both with closed-form jets so no
//! ambient quantity is ever finite-differenced:
//!
//! * flat Gaussian
//!   C^m with the standard Kahler structure and potential f(x) = |x|^2 / 2,
//!   so Hess f = g, Ric = 0 and the soliton identity Ric + Hess f = g holds
//!   exactly; the soliton constant C0 = R + |grad f|^2 - 2 f vanishes.
//! * round sphere
//!   the unit 2-sphere embedded in R^3, viewed as a complex curve with
//!   J_p v = p x v; here Ric = g, R = 2 and the potential is the constant f0,
//!   giving C0 = 2 - 2 f0.
//!
//! Embedding coordinates are Euclidean-orthonormal in both cases, so the
//! ambient metric on tangent vectors is the plain dot product.

use crate::error::{Error, Result};
use crate::numerics::{dot, AVec, ZERO4};

/// Tolerance for a point claiming to sit on the unit sphere chart.
pub const SPHERE_CHART_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolitonBackground {
    /// Flat C^m, coordinates interleaved as (x1, y1, ..., xm, ym), m <= 2.
    FlatGaussian { m: usize },
    /// Unit round 2-sphere in R^3 with constant potential `f0`.
    RoundSphere { f0: f64 },
}

/// Closed-form ambient data at a point: potential jet, curvature, complex
/// structure and metric, everything the submanifold calculus consumes.
#[derive(Debug, Clone)]
pub struct BackgroundJet {
    pub point: AVec,
    pub f: f64,
    pub grad_f: AVec,
    /// Hessian of f as a bilinear form on ambient vectors.
    pub hess_f: [[f64; 4]; 4],
    /// Ricci tensor as a bilinear form on ambient (tangent) vectors.
    pub ric: [[f64; 4]; 4],
    pub scalar_r: f64,
    /// Ambient metric in embedding coordinates (identity; tangent vectors of
    /// the sphere are evaluated through their R^3 representatives).
    pub metric: [[f64; 4]; 4],
}

impl SolitonBackground {
    pub fn parse_id(id: &str) -> Result<Self> {
        let mk_err = || Error::BackgroundId(id.to_string());
        let (kind, arg) = id.split_once(':').ok_or_else(mk_err)?;
        match kind {
            "flat" => {
                let m: usize = arg.parse().map_err(|_| mk_err())?;
                if m == 1 || m == 2 {
                    Ok(SolitonBackground::FlatGaussian { m })
                } else {
                    Err(mk_err())
                }
            }
            "sphere" => {
                let f0: f64 = arg.parse().map_err(|_| mk_err())?;
                Ok(SolitonBackground::RoundSphere { f0 })
            }
            _ => Err(mk_err()),
        }
    }

    pub fn id(&self) -> String {
        match self {
            SolitonBackground::FlatGaussian { m } => format!("flat:{m}"),
            SolitonBackground::RoundSphere { f0 } => format!("sphere:{f0}"),
        }
    }

    /// Complex dimension m.
    pub fn complex_dim(&self) -> usize {
        match self {
            SolitonBackground::FlatGaussian { m } => *m,
            SolitonBackground::RoundSphere { .. } => 1,
        }
    }

    /// Number of embedding coordinates carried per point.
    pub fn ambient_dim(&self) -> usize {
        match self {
            SolitonBackground::FlatGaussian { m } => 2 * m,
            SolitonBackground::RoundSphere { .. } => 3,
        }
    }

    /// Soliton constant C0 = R + |grad f|^2 - 2 f.
    pub fn c0(&self) -> f64 {
        match self {
            SolitonBackground::FlatGaussian { .. } => 0.0,
            SolitonBackground::RoundSphere { f0 } => 2.0 - 2.0 * f0,
        }
    }

    /// Global sectional curvature bound K0 (tight: 0 flat, 1 round sphere).
    pub fn k0(&self) -> f64 {
        match self {
            SolitonBackground::FlatGaussian { .. } => 0.0,
            SolitonBackground::RoundSphere { .. } => 1.0,
        }
    }

    /// Scalar curvature (constant on both backgrounds).
    pub fn scalar_curvature(&self) -> f64 {
        match self {
            SolitonBackground::FlatGaussian { .. } => 0.0,
            SolitonBackground::RoundSphere { .. } => 2.0,
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self, SolitonBackground::FlatGaussian { .. })
    }

    fn check_chart(&self, p: &AVec) -> Result<()> {
        match self {
            SolitonBackground::FlatGaussian { m } => {
                for d in 2 * m..4 {
                    if p[d] != 0.0 {
                        return Err(Error::DimensionMismatch {
                            expected: 2 * m,
                            got: d + 1,
                        });
                    }
                }
                Ok(())
            }
            SolitonBackground::RoundSphere { .. } => {
                if p[3] != 0.0 {
                    return Err(Error::DimensionMismatch {
                        expected: 3,
                        got: 4,
                    });
                }
                let r = dot(p, p).sqrt();
                if (r - 1.0).abs() > SPHERE_CHART_TOL {
                    return Err(Error::PointOffManifold { radius: r });
                }
                Ok(())
            }
        }
    }

    /// Potential value; panics never, but callers should have validated the
    /// chart when it matters.
    pub fn f(&self, p: &AVec) -> f64 {
        match self {
            SolitonBackground::FlatGaussian { .. } => 0.5 * dot(p, p),
            SolitonBackground::RoundSphere { f0 } => *f0,
        }
    }

    pub fn grad_f(&self, p: &AVec) -> AVec {
        match self {
            SolitonBackground::FlatGaussian { .. } => *p,
            SolitonBackground::RoundSphere { .. } => ZERO4,
        }
    }

    /// Full closed-form jet at a chart point.
    pub fn jet(&self, p: &AVec) -> Result<BackgroundJet> {
        self.check_chart(p)?;
        let mut metric = [[0.0; 4]; 4];
        let adim = self.ambient_dim();
        for (d, row) in metric.iter_mut().enumerate().take(adim) {
            row[d] = 1.0;
        }
        match self {
            SolitonBackground::FlatGaussian { .. } => Ok(BackgroundJet {
                point: *p,
                f: 0.5 * dot(p, p),
                grad_f: *p,
                hess_f: metric,
                ric: [[0.0; 4]; 4],
                scalar_r: 0.0,
                metric,
            }),
            SolitonBackground::RoundSphere { f0 } => {
                // Ric = g on tangent vectors; represented through the
                // tangential projector so arbitrary representatives contract
                // correctly.
                let mut ric = [[0.0; 4]; 4];
                for i in 0..3 {
                    for j in 0..3 {
                        ric[i][j] = if i == j { 1.0 } else { 0.0 };
                        ric[i][j] -= p[i] * p[j];
                    }
                }
                Ok(BackgroundJet {
                    point: *p,
                    f: *f0,
                    grad_f: ZERO4,
                    hess_f: [[0.0; 4]; 4],
                    ric,
                    scalar_r: 2.0,
                    metric,
                })
            }
        }
    }

    /// Complex structure applied to an ambient (tangent) vector at p.
    pub fn j_apply(&self, p: &AVec, v: &AVec) -> AVec {
        match self {
            SolitonBackground::FlatGaussian { .. } => [-v[1], v[0], -v[3], v[2]],
            SolitonBackground::RoundSphere { .. } => {
                // J_p v = p x v: a quarter turn in the tangent plane.
                [
                    p[1] * v[2] - p[2] * v[1],
                    p[2] * v[0] - p[0] * v[2],
                    p[0] * v[1] - p[1] * v[0],
                    0.0,
                ]
            }
        }
    }

    /// Kahler form omega(v, w) = g(J v, w).
    pub fn omega(&self, p: &AVec, v: &AVec, w: &AVec) -> f64 {
        dot(&self.j_apply(p, v), w)
    }

    /// Riemann tensor Rm(x, y, z, w) with the sign convention that
    /// Rm(x, y, x, y) equals the sectional curvature times |x ^ y|^2.
    pub fn riemann(&self, _p: &AVec, x: &AVec, y: &AVec, z: &AVec, w: &AVec) -> f64 {
        match self {
            SolitonBackground::FlatGaussian { .. } => 0.0,
            SolitonBackground::RoundSphere { .. } => dot(x, z) * dot(y, w) - dot(x, w) * dot(y, z),
        }
    }
}

/// Value of R + |grad f|^2 - 2 f at each sample, returned as
/// (mean, max |value - mean|). The deviation is the numerical witness that
/// the soliton constant really is constant.
pub fn c0_survey(bg: &SolitonBackground, sample: &[AVec]) -> Result<(f64, f64)> {
    if sample.len() < 2 {
        return Err(Error::SampleTooSmall {
            min: 2,
            got: sample.len(),
        });
    }
    let mut values = Vec::with_capacity(sample.len());
    for p in sample {
        let jet = bg.jet(p)?;
        values.push(jet.scalar_r + dot(&jet.grad_f, &jet.grad_f) - 2.0 * jet.f);
    }
    let mean = crate::numerics::pairwise_sum(&values) / values.len() as f64;
    let max_dev = values
        .iter()
        .map(|v| (v - mean).abs())
        .fold(0.0_f64, f64::max);
    Ok((mean, max_dev))
}

/// Sup norm of Ric + Hess f - g over the given points (entrywise, restricted
/// to tangent directions on the sphere).
pub fn soliton_residual(bg: &SolitonBackground, sample: &[AVec]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for p in sample {
        let jet = bg.jet(p)?;
        match bg {
            SolitonBackground::FlatGaussian { m } => {
                for i in 0..2 * m {
                    for j in 0..2 * m {
                        let r = jet.ric[i][j] + jet.hess_f[i][j] - jet.metric[i][j];
                        worst = worst.max(r.abs());
                    }
                }
            }
            SolitonBackground::RoundSphere { .. } => {
                // Evaluate on an orthonormal tangent basis at p.
                let basis = sphere_tangent_basis(p);
                for x in &basis {
                    for y in &basis {
                        let mut r = 0.0;
                        for i in 0..3 {
                            for j in 0..3 {
                                r += x[i] * (jet.ric[i][j] + jet.hess_f[i][j]) * y[j];
                            }
                        }
                        r -= dot(x, y);
                        worst = worst.max(r.abs());
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// Orthonormal basis of the tangent plane of the unit sphere at p.
pub fn sphere_tangent_basis(p: &AVec) -> [AVec; 2] {
    let seed = if p[0].abs() < 0.9 {
        [1.0, 0.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0, 0.0]
    };
    let mut e1 = seed;
    let pp = dot(&seed, p);
    for d in 0..4 {
        e1[d] -= pp * p[d];
    }
    let n1 = dot(&e1, &e1).sqrt();
    for d in 0..4 {
        e1[d] /= n1;
    }
    let e2 = [
        p[1] * e1[2] - p[2] * e1[1],
        p[2] * e1[0] - p[0] * e1[2],
        p[0] * e1[1] - p[1] * e1[0],
        0.0,
    ];
    [e1, e2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_flat_points(m: usize, count: usize, seed: u64) -> Vec<AVec> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let mut p = ZERO4;
                for slot in p.iter_mut().take(2 * m) {
                    *slot = rng.random_range(-2.0..2.0);
                }
                p
            })
            .collect()
    }

    fn random_sphere_points(count: usize, seed: u64) -> Vec<AVec> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| loop {
                let v = [
                    rng.random_range(-1.0..1.0_f64),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    0.0,
                ];
                let n = dot(&v, &v).sqrt();
                if n > 1e-3 {
                    break [v[0] / n, v[1] / n, v[2] / n, 0.0];
                }
            })
            .collect()
    }

    #[test]
    fn flat_jet_closed_forms() {
        let bg = SolitonBackground::FlatGaussian { m: 1 };
        let jet = bg.jet(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(jet.f, 0.5);
        assert_eq!(jet.grad_f, [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(jet.hess_f[0][0], 1.0);
        assert_eq!(jet.hess_f[1][1], 1.0);
        assert_eq!(jet.scalar_r, 0.0);
    }

    #[test]
    fn flat_soliton_identity_exact() {
        let bg = SolitonBackground::FlatGaussian { m: 2 };
        let pts = random_flat_points(2, 100, 1);
        assert!(soliton_residual(&bg, &pts).unwrap() < 1e-15);
    }

    #[test]
    fn sphere_jet_and_c0() {
        let bg = SolitonBackground::RoundSphere { f0: 1.0 };
        let pts = random_sphere_points(100, 2);
        for p in &pts {
            let jet = bg.jet(p).unwrap();
            assert_eq!(jet.grad_f, ZERO4);
            assert_eq!(jet.scalar_r, 2.0);
        }
        assert!((bg.c0() - 0.0).abs() < 1e-15);
        let (mean, dev) = c0_survey(&bg, &pts).unwrap();
        assert!(mean.abs() < 1e-13);
        assert!(dev < 1e-12);
    }

    #[test]
    fn sphere_c0_with_zero_offset() {
        let bg = SolitonBackground::RoundSphere { f0: 0.0 };
        let pts = random_sphere_points(50, 3);
        let (mean, dev) = c0_survey(&bg, &pts).unwrap();
        assert!((mean - 2.0).abs() < 1e-13);
        assert!(dev < 1e-12);
    }

    #[test]
    fn flat_c0_survey_zero() {
        let bg = SolitonBackground::FlatGaussian { m: 2 };
        let pts = random_flat_points(2, 100, 4);
        let (mean, dev) = c0_survey(&bg, &pts).unwrap();
        assert!(mean.abs() < 1e-13);
        assert!(dev < 1e-12);
    }

    #[test]
    fn sphere_soliton_identity() {
        let bg = SolitonBackground::RoundSphere { f0: 0.7 };
        let pts = random_sphere_points(60, 5);
        assert!(soliton_residual(&bg, &pts).unwrap() < 1e-12);
    }

    #[test]
    fn j_compatibility_and_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for bg in [
            SolitonBackground::FlatGaussian { m: 2 },
            SolitonBackground::RoundSphere { f0: 1.0 },
        ] {
            let pts = match bg {
                SolitonBackground::FlatGaussian { .. } => random_flat_points(2, 20, 7),
                SolitonBackground::RoundSphere { .. } => random_sphere_points(20, 8),
            };
            for p in &pts {
                // Tangent test vectors.
                let (v, w) = match bg {
                    SolitonBackground::FlatGaussian { .. } => {
                        let mut v = ZERO4;
                        let mut w = ZERO4;
                        for d in 0..4 {
                            v[d] = rng.random_range(-1.0..1.0);
                            w[d] = rng.random_range(-1.0..1.0);
                        }
                        (v, w)
                    }
                    SolitonBackground::RoundSphere { .. } => {
                        let [e1, e2] = sphere_tangent_basis(p);
                        let a: f64 = rng.random_range(-1.0..1.0);
                        let b: f64 = rng.random_range(-1.0..1.0);
                        let c: f64 = rng.random_range(-1.0..1.0);
                        let d: f64 = rng.random_range(-1.0..1.0);
                        let mut v = ZERO4;
                        let mut w = ZERO4;
                        for k in 0..4 {
                            v[k] = a * e1[k] + b * e2[k];
                            w[k] = c * e1[k] + d * e2[k];
                        }
                        (v, w)
                    }
                };
                let jv = bg.j_apply(p, &v);
                let jw = bg.j_apply(p, &w);
                assert!((dot(&jv, &jw) - dot(&v, &w)).abs() < 1e-12);
                let jjv = bg.j_apply(p, &jv);
                for d in 0..4 {
                    assert!((jjv[d] + v[d]).abs() < 1e-12);
                }
                // omega antisymmetry.
                assert!((bg.omega(p, &v, &w) + bg.omega(p, &w, &v)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn off_manifold_point_rejected() {
        let bg = SolitonBackground::RoundSphere { f0: 1.0 };
        let err = bg.jet(&[1.001, 0.0, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::PointOffManifold { .. }));
    }

    #[test]
    fn background_id_roundtrip() {
        for id in ["flat:1", "flat:2", "sphere:1", "sphere:0.5"] {
            let bg = SolitonBackground::parse_id(id).unwrap();
            assert_eq!(bg.id(), id);
        }
        assert!(SolitonBackground::parse_id("flat:3").is_err());
        assert!(SolitonBackground::parse_id("cigar:1").is_err());
    }

    #[test]
    fn scalar_curvature_nonnegative() {
        assert!(SolitonBackground::FlatGaussian { m: 1 }.scalar_curvature() >= 0.0);
        assert!(SolitonBackground::RoundSphere { f0: 2.0 }.scalar_curvature() >= 0.0);
    }
}
