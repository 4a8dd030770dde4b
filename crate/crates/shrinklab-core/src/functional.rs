//! The weighted volume functional, its first variation, the conformal-volume
//! identity, and the search for its critical points.
//!
//! Critical points of the weighted volume are exactly the self-similar
//! solutions H = lambda (grad f)^perp; for lambda < 0 they are saddle points
//! (volume grows along shape modes, shrinks along dilations), so a naive
//! gradient iteration runs away from them. `minimize` therefore drives the
//! self-similar residual itself to zero with a damped Gauss-Newton iteration
//! over normal perturbation fields, with a line search on the weighted
//! residual norm as its objective.

use crate::error::{Error, Result};
use crate::geometry::{induced_geometry, self_similar_residual, InducedGeometry};
use crate::immersion::Immersion;
use crate::numerics::{axpy, dot, pairwise_sum, AVec, ZERO4};
use nalgebra::{DMatrix, DVector};

/// Quadrature of exp(lambda f) d mu over the parameter torus; the periodic
/// trapezoid rule (a plain node sum) is spectrally accurate here.
pub fn weighted_volume(f: &Immersion, geo: &InducedGeometry, lambda: f64) -> f64 {
    let bg = f.background();
    let cell = f.grid().cell();
    let terms: Vec<f64> = (0..geo.nodes())
        .map(|node| (lambda * bg.f(f.point(node))).exp() * geo.sqrt_det[node] * cell)
        .collect();
    pairwise_sum(&terms)
}

/// Relative gap between the weighted volume and the Riemannian volume of the
/// conformally rescaled pullback metric, evaluated on the same quadrature
/// nodes. The identity is pointwise, so only rounding survives.
pub fn conformal_volume_identity(f: &Immersion, geo: &InducedGeometry, lambda: f64) -> f64 {
    let bg = f.background();
    let cell = f.grid().cell();
    let m = geo.m as f64;
    let lhs_terms: Vec<f64> = (0..geo.nodes())
        .map(|node| (lambda * bg.f(f.point(node))).exp() * geo.sqrt_det[node] * cell)
        .collect();
    let rhs_terms: Vec<f64> = (0..geo.nodes())
        .map(|node| {
            let scale = (2.0 * lambda * bg.f(f.point(node)) / m).exp();
            let g = &geo.metric[node];
            let det = if geo.m == 1 {
                scale * g[0]
            } else {
                (scale * g[0]) * (scale * g[2]) - (scale * g[1]) * (scale * g[1])
            };
            det.sqrt() * cell
        })
        .collect();
    let lhs = pairwise_sum(&lhs_terms);
    let rhs = pairwise_sum(&rhs_terms);
    (lhs - rhs).abs() / lhs.abs()
}

/// First variation of the weighted volume along a normal field, computed two
/// independent ways.
#[derive(Debug, Clone, Copy)]
pub struct VariationCheck {
    /// -int < H - lambda (grad f)^perp, V > exp(lambda f) d mu.
    pub analytic: f64,
    /// Centered difference of the weighted volume at s = +/- 1e-5.
    pub finite_difference: f64,
    pub gap: f64,
    /// Sup norm of the tangential part removed from the input field.
    pub projection_norm: f64,
}

impl VariationCheck {
    /// Agreement rule used by tests and audits: 1e-6 relative with an
    /// absolute floor so critical points (both routes near zero) pass.
    pub fn agrees(&self) -> bool {
        let scale = self
            .analytic
            .abs()
            .max(self.finite_difference.abs())
            .max(1e-2);
        self.gap <= 1e-6 * scale
    }
}

pub fn first_variation(f: &Immersion, lambda: f64, field: &[AVec]) -> Result<VariationCheck> {
    let geo = induced_geometry(f)?;
    if field.len() != geo.nodes() {
        return Err(Error::DimensionMismatch {
            expected: geo.nodes(),
            got: field.len(),
        });
    }
    let bg = f.background();
    let cell = f.grid().cell();
    // Project the field onto the normal bundle, recording how much was cut.
    let mut projection_norm = 0.0_f64;
    let normal: Vec<AVec> = (0..geo.nodes())
        .map(|node| {
            let (tan, perp) = geo.split_tangent(node, &field[node]);
            projection_norm = projection_norm.max(dot(&tan, &tan).sqrt());
            perp
        })
        .collect();

    let res = self_similar_residual(f, &geo, lambda);
    let terms: Vec<f64> = (0..geo.nodes())
        .map(|node| {
            -dot(&res.field[node], &normal[node])
                * (lambda * bg.f(f.point(node))).exp()
                * geo.sqrt_det[node]
                * cell
        })
        .collect();
    let analytic = pairwise_sum(&terms);

    let s = 1e-5;
    let volume_at = |sign: f64| -> Result<f64> {
        let pts = (0..geo.nodes())
            .map(|node| {
                let mut p = *f.point(node);
                axpy(&mut p, sign * s, &normal[node]);
                p
            })
            .collect();
        let shifted = f.with_points(pts)?;
        let g = induced_geometry(&shifted)?;
        Ok(weighted_volume(&shifted, &g, lambda))
    };
    let finite_difference = (volume_at(1.0)? - volume_at(-1.0)?) / (2.0 * s);
    Ok(VariationCheck {
        analytic,
        finite_difference,
        gap: (analytic - finite_difference).abs(),
        projection_norm,
    })
}

/// Configuration for the critical-point search.
#[derive(Debug, Clone, Copy)]
pub struct DescentConfig {
    /// Cap on the sup norm of a single update (keeps immersivity).
    pub step_size: f64,
    pub max_iters: usize,
    /// Stop when the self-similar residual sup norm falls below this.
    pub stop_tol: f64,
    pub line_search: bool,
}

impl Default for DescentConfig {
    fn default() -> Self {
        DescentConfig {
            step_size: 0.25,
            max_iters: 5000,
            stop_tol: 1e-4,
            line_search: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum MinimizeStatus {
    Converged,
    MaxIters,
    /// The line-search objective failed to decrease ten times in a row.
    Diverged,
    /// Immersivity was lost; the returned immersion is the last valid state.
    ImmersivityLost,
}

#[derive(Debug, Clone)]
pub struct MinimizeOutcome {
    pub immersion: Immersion,
    /// Per accepted iteration: (iteration, weighted volume, residual sup).
    pub history: Vec<(usize, f64, f64)>,
    pub status: MinimizeStatus,
    /// Lagrangian defect of the final state (reported, not constrained).
    pub final_defect: f64,
}

/// Normal frame spanned by J applied to the tangent frame (exact for
/// Lagrangian immersions), re-projected and normalized.
fn normal_frame(f: &Immersion, geo: &InducedGeometry) -> Vec<[AVec; 2]> {
    let bg = f.background();
    (0..geo.nodes())
        .map(|node| {
            let frame = geo.frame(node);
            let mut out = [ZERO4; 2];
            for k in 0..geo.m {
                let jv = bg.j_apply(f.point(node), &frame[k]);
                let (_, mut perp) = geo.split_tangent(node, &jv);
                // Orthogonalize within the normal frame for robustness off
                // the Lagrangian locus.
                for built in out.iter().take(k) {
                    let c = dot(&perp, built);
                    axpy(&mut perp, -c, built);
                }
                let n = dot(&perp, &perp).sqrt();
                if n > 1e-12 {
                    out[k] = crate::numerics::scale(&perp, 1.0 / n);
                }
            }
            out
        })
        .collect()
}

struct ResidualEval {
    vec: DVector<f64>,
}

/// Residual field projected on a fixed normal frame; the dof layout is
/// node * m + k.
fn residual_on_frame(
    f: &Immersion,
    lambda: f64,
    frame: &[[AVec; 2]],
    m: usize,
) -> Result<ResidualEval> {
    let geo = induced_geometry(f)?;
    let res = self_similar_residual(f, &geo, lambda);
    let mut vec = DVector::zeros(geo.nodes() * m);
    for node in 0..geo.nodes() {
        for k in 0..m {
            vec[node * m + k] = dot(&res.field[node], &frame[node][k]);
        }
    }
    let _ = res.sup;
    Ok(ResidualEval { vec })
}

fn displaced(
    f: &Immersion,
    frame: &[[AVec; 2]],
    m: usize,
    delta: &DVector<f64>,
    scale: f64,
) -> Result<Immersion> {
    let pts = (0..f.grid().nodes())
        .map(|node| {
            let mut p = *f.point(node);
            for k in 0..m {
                axpy(&mut p, scale * delta[node * m + k], &frame[node][k]);
            }
            p
        })
        .collect();
    f.with_points(pts)
}

/// Drive the immersion to a critical point of the weighted volume, i.e. to a
/// self-similar solution with H = lambda (grad f)^perp. Updates move only in
/// normal directions; the line-search objective is the squared residual norm
/// on the current normal frame.
pub fn minimize(f0: &Immersion, lambda: f64, cfg: &DescentConfig) -> Result<MinimizeOutcome> {
    if lambda == 0.0 {
        return Err(Error::ZeroLambda);
    }
    let m = f0.grid().dim();
    let nodes = f0.grid().nodes();
    let ndof = nodes * m;
    let mut current = f0.clone();
    let mut history = Vec::new();
    let mut bad_streak = 0usize;
    let mut status = MinimizeStatus::MaxIters;
    let mut mu = 1e-4_f64;

    for iter in 0..=cfg.max_iters {
        let geo = induced_geometry(&current)?;
        let res = self_similar_residual(&current, &geo, lambda);
        history.push((iter, weighted_volume(&current, &geo, lambda), res.sup));
        if res.sup < cfg.stop_tol {
            status = MinimizeStatus::Converged;
            break;
        }
        if iter == cfg.max_iters {
            break;
        }
        let frame = normal_frame(&current, &geo);
        let base = residual_on_frame(&current, lambda, &frame, m)?;
        let phi0 = base.vec.norm_squared();

        // Gauss-Newton step on the residual.
        let fd_eps = 1e-6 * (1.0 + geo.max_mean_curv);
        let delta = if m == 1 {
            // Dense finite-difference Jacobian with Levenberg damping.
            let mut jac = DMatrix::zeros(ndof, ndof);
            for col in 0..ndof {
                let mut e = DVector::zeros(ndof);
                e[col] = 1.0;
                let probe = displaced(&current, &frame, m, &e, fd_eps)?;
                let pr = residual_on_frame(&probe, lambda, &frame, m)?;
                for row in 0..ndof {
                    jac[(row, col)] = (pr.vec[row] - base.vec[row]) / fd_eps;
                }
            }
            let jt = jac.transpose();
            let mut lhs = &jt * &jac;
            let rhs = -(&jt * &base.vec);
            let dmax = (0..ndof).map(|i| lhs[(i, i)]).fold(0.0_f64, f64::max);
            for i in 0..ndof {
                lhs[(i, i)] += mu * dmax.max(1e-12);
            }
            match lhs.cholesky() {
                Some(ch) => ch.solve(&rhs),
                None => {
                    bad_streak += 1;
                    mu = (mu * 8.0).min(1e2);
                    if bad_streak >= 10 {
                        status = MinimizeStatus::Diverged;
                        break;
                    }
                    continue;
                }
            }
        } else {
            // Matrix-free GMRES on J delta = -r with finite-difference
            // Jacobian-vector products.
            let apply = |v: &DVector<f64>| -> Result<DVector<f64>> {
                let vn = v.amax();
                if vn == 0.0 {
                    return Ok(DVector::zeros(ndof));
                }
                let t = fd_eps / vn;
                let probe = displaced(&current, &frame, m, v, t)?;
                let pr = residual_on_frame(&probe, lambda, &frame, m)?;
                Ok((pr.vec - &base.vec) / t)
            };
            match gmres(&apply, &(-&base.vec), 120, 1e-8)? {
                Some(x) => x,
                None => {
                    bad_streak += 1;
                    if bad_streak >= 10 {
                        status = MinimizeStatus::Diverged;
                        break;
                    }
                    continue;
                }
            }
        };

        // Cap the step and backtrack on the residual-norm objective.
        let sup_delta = delta.amax();
        let cap = if sup_delta > cfg.step_size {
            cfg.step_size / sup_delta
        } else {
            1.0
        };
        let mut alpha = cap;
        let mut accepted = false;
        let tries = if cfg.line_search { 12 } else { 1 };
        for _ in 0..tries {
            match displaced(&current, &frame, m, &delta, alpha) {
                Ok(candidate) => match residual_on_frame(&candidate, lambda, &frame, m) {
                    Ok(eval) => {
                        if eval.vec.norm_squared() < phi0 || !cfg.line_search {
                            current = candidate;
                            accepted = true;
                            break;
                        }
                    }
                    Err(Error::DegenerateImmersion { .. }) => {}
                    Err(e) => return Err(e),
                },
                Err(e) => return Err(e),
            }
            alpha *= 0.5;
        }
        if accepted {
            bad_streak = 0;
            mu = (mu * 0.25).max(1e-8);
        } else {
            bad_streak += 1;
            mu = (mu * 8.0).min(1e2);
            if bad_streak >= 10 {
                // Distinguish a genuine stall from immersivity loss.
                status = if displaced(&current, &frame, m, &delta, cap)
                    .and_then(|c| induced_geometry(&c).map(|_| ()))
                    .is_err()
                {
                    MinimizeStatus::ImmersivityLost
                } else {
                    MinimizeStatus::Diverged
                };
                break;
            }
        }
    }

    let final_defect = match induced_geometry(&current) {
        Ok(geo) => crate::geometry::lagrangian_defect_norm(&geo),
        Err(_) => f64::NAN,
    };
    Ok(MinimizeOutcome {
        immersion: current,
        history,
        status,
        final_defect,
    })
}

/// Restarted GMRES with matvec-only access; returns None when no usable
/// candidate emerged.
fn gmres(
    apply: &dyn Fn(&DVector<f64>) -> Result<DVector<f64>>,
    rhs: &DVector<f64>,
    max_inner: usize,
    tol: f64,
) -> Result<Option<DVector<f64>>> {
    let n = rhs.len();
    let b_norm = rhs.norm();
    if b_norm == 0.0 {
        return Ok(Some(DVector::zeros(n)));
    }
    let mut x = DVector::zeros(n);
    for _restart in 0..2 {
        let r = rhs - apply(&x)?;
        let beta = r.norm();
        if beta <= tol * b_norm {
            return Ok(Some(x));
        }
        let inner = max_inner.min(n);
        let mut basis: Vec<DVector<f64>> = vec![r / beta];
        let mut h = DMatrix::zeros(inner + 1, inner);
        let mut cs = vec![0.0_f64; inner];
        let mut sn = vec![0.0_f64; inner];
        let mut g = DVector::zeros(inner + 1);
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..inner {
            let mut w = apply(&basis[k])?;
            for (i, q) in basis.iter().enumerate() {
                let hik = w.dot(q);
                h[(i, k)] = hik;
                w.axpy(-hik, q, 1.0);
            }
            let hkk = w.norm();
            h[(k + 1, k)] = hkk;
            for i in 0..k {
                let t = cs[i] * h[(i, k)] + sn[i] * h[(i + 1, k)];
                h[(i + 1, k)] = -sn[i] * h[(i, k)] + cs[i] * h[(i + 1, k)];
                h[(i, k)] = t;
            }
            let denom = (h[(k, k)] * h[(k, k)] + h[(k + 1, k)] * h[(k + 1, k)]).sqrt();
            if denom == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = h[(k, k)] / denom;
            sn[k] = h[(k + 1, k)] / denom;
            h[(k, k)] = denom;
            h[(k + 1, k)] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            if g[k + 1].abs() <= tol * b_norm || hkk < 1e-14 {
                break;
            }
            basis.push(w / hkk);
        }
        if k_used == 0 {
            return Ok(None);
        }
        let mut y = DVector::zeros(k_used);
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[(i, j)] * y[j];
            }
            y[i] = s / h[(i, i)];
        }
        for (j, q) in basis.iter().take(k_used).enumerate() {
            x.axpy(y[j], q, 1.0);
        }
        if g[k_used].abs() <= tol * b_norm {
            return Ok(Some(x));
        }
    }
    Ok(Some(x))
}
