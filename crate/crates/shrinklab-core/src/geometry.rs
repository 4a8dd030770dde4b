//! Induced submanifold geometry on a periodic grid: first and second
//! fundamental quantities, intrinsic curvature, the Lagrangian defect and the
//! self-similar residual H - lambda * (grad f)^perp.
//!
//! First derivatives use 6th-order central stencils; second derivatives use
//! the 4th-order 5-point stencil (mixed derivatives compose two first-order
//! passes). The geometry of closed-form test immersions then resolves well
//! below every audit tolerance at desk-scale grids.

use crate::error::{Error, Result};
use crate::grid::ParamGrid;
use crate::immersion::{Immersion, IMMERSIVITY_FLOOR};
use crate::numerics::{
    axpy, dot, scale, sub, sym2_det, sym2_eigvals, sym2_inv, AVec, Sym2, ZERO4,
};
use rayon::prelude::*;

/// Nodes below this count are processed sequentially.
const PAR_THRESHOLD: usize = 4096;

/// 6th-order first derivative of an ambient-vector field along `dir`.
pub fn d1_field(grid: &ParamGrid, field: &[AVec], dir: usize) -> Vec<AVec> {
    let inv = 1.0 / (60.0 * grid.h(dir));
    let stencil = |node: usize| -> AVec {
        let m3 = field[grid.shift(node, dir, -3)];
        let m2 = field[grid.shift(node, dir, -2)];
        let m1 = field[grid.shift(node, dir, -1)];
        let p1 = field[grid.shift(node, dir, 1)];
        let p2 = field[grid.shift(node, dir, 2)];
        let p3 = field[grid.shift(node, dir, 3)];
        let mut out = ZERO4;
        for d in 0..4 {
            out[d] = (-m3[d] + 9.0 * m2[d] - 45.0 * m1[d] + 45.0 * p1[d] - 9.0 * p2[d]
                + p3[d])
                * inv;
        }
        out
    };
    map_nodes(grid.nodes(), stencil)
}

/// 4th-order second derivative of an ambient-vector field along `dir`.
pub fn d2_field(grid: &ParamGrid, field: &[AVec], dir: usize) -> Vec<AVec> {
    let inv = 1.0 / (12.0 * grid.h(dir) * grid.h(dir));
    let stencil = |node: usize| -> AVec {
        let m2 = field[grid.shift(node, dir, -2)];
        let m1 = field[grid.shift(node, dir, -1)];
        let c0 = field[node];
        let p1 = field[grid.shift(node, dir, 1)];
        let p2 = field[grid.shift(node, dir, 2)];
        let mut out = ZERO4;
        for d in 0..4 {
            out[d] = (-m2[d] + 16.0 * m1[d] - 30.0 * c0[d] + 16.0 * p1[d] - p2[d]) * inv;
        }
        out
    };
    map_nodes(grid.nodes(), stencil)
}

/// 6th-order first derivative of a scalar field along `dir`.
pub fn d1_scalar(grid: &ParamGrid, field: &[f64], dir: usize) -> Vec<f64> {
    let inv = 1.0 / (60.0 * grid.h(dir));
    map_nodes(grid.nodes(), |node| {
        (-field[grid.shift(node, dir, -3)] + 9.0 * field[grid.shift(node, dir, -2)]
            - 45.0 * field[grid.shift(node, dir, -1)]
            + 45.0 * field[grid.shift(node, dir, 1)]
            - 9.0 * field[grid.shift(node, dir, 2)]
            + field[grid.shift(node, dir, 3)])
            * inv
    })
}

/// 4th-order second derivative of a scalar field along `dir`.
pub fn d2_scalar(grid: &ParamGrid, field: &[f64], dir: usize) -> Vec<f64> {
    let inv = 1.0 / (12.0 * grid.h(dir) * grid.h(dir));
    map_nodes(grid.nodes(), |node| {
        (-field[grid.shift(node, dir, -2)] + 16.0 * field[grid.shift(node, dir, -1)]
            - 30.0 * field[node]
            + 16.0 * field[grid.shift(node, dir, 1)]
            - field[grid.shift(node, dir, 2)])
            * inv
    })
}

fn map_nodes<T: Send>(nodes: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    if nodes >= PAR_THRESHOLD {
        (0..nodes).into_par_iter().map(f).collect()
    } else {
        (0..nodes).map(f).collect()
    }
}

/// Per-node induced geometry of an immersion.
#[derive(Debug, Clone)]
pub struct InducedGeometry {
    pub m: usize,
    /// Coordinate tangents F_* d_i.
    pub d1: Vec<[AVec; 2]>,
    /// Induced metric (g11, g12, g22); for m = 1 the trailing slots are (0, 1).
    pub metric: Vec<Sym2>,
    pub inv_metric: Vec<Sym2>,
    pub sqrt_det: Vec<f64>,
    /// Second fundamental form on coordinate pairs (A_00, A_01, A_11),
    /// normal-valued ambient vectors.
    pub a: Vec<[AVec; 3]>,
    /// Mean curvature vector H = g^{ij} A_ij.
    pub mean_curv: Vec<AVec>,
    /// Orthonormal frame coefficients: e_i = sum_c coef[i][c] * d_c.
    pub frame_coef: Vec<[[f64; 2]; 2]>,
    /// |A|^2 = g^{ik} g^{jl} <A_ij, A_kl>.
    pub norm_a_sq: Vec<f64>,
    /// Pullback Kahler form (F* omega)(d_1, d_2); identically 0 for m = 1.
    pub defect: Vec<f64>,
    /// Intrinsic Gauss curvature from second differences of the metric
    /// (m = 2 only; empty for curves, whose intrinsic curvature vanishes).
    pub gauss_k: Vec<f64>,
    /// Christoffel symbols Gamma^k_ij of the induced metric,
    /// layout k * 3 + ij with ij in {00 -> 0, 01 -> 1, 11 -> 2}.
    pub christoffels: Vec<[f64; 6]>,
    pub sup_a: f64,
    pub min_metric_eig: f64,
    pub max_mean_curv: f64,
}

impl InducedGeometry {
    pub fn nodes(&self) -> usize {
        self.metric.len()
    }

    /// Orthonormal frame vectors as ambient vectors at a node.
    pub fn frame(&self, node: usize) -> [AVec; 2] {
        let mut out = [ZERO4; 2];
        for i in 0..self.m {
            for c in 0..self.m {
                axpy(&mut out[i], self.frame_coef[node][i][c], &self.d1[node][c]);
            }
        }
        out
    }

    /// Split an ambient vector into tangential and normal parts at a node.
    pub fn split_tangent(&self, node: usize, v: &AVec) -> (AVec, AVec) {
        let mut tan = ZERO4;
        let gi = &self.inv_metric[node];
        let d1 = &self.d1[node];
        if self.m == 1 {
            let c = gi[0] * dot(v, &d1[0]);
            axpy(&mut tan, c, &d1[0]);
        } else {
            let p0 = dot(v, &d1[0]);
            let p1 = dot(v, &d1[1]);
            let c0 = gi[0] * p0 + gi[1] * p1;
            let c1 = gi[1] * p0 + gi[2] * p1;
            axpy(&mut tan, c0, &d1[0]);
            axpy(&mut tan, c1, &d1[1]);
        }
        (tan, sub(v, &tan))
    }

    /// Tangential trace of an ambient bilinear form at a node.
    pub fn tangential_trace(&self, node: usize, form: &[[f64; 4]; 4]) -> f64 {
        let frame = self.frame(node);
        let mut tr = 0.0;
        for e in frame.iter().take(self.m) {
            for (i, row) in form.iter().enumerate() {
                for (j, entry) in row.iter().enumerate() {
                    tr += e[i] * entry * e[j];
                }
            }
        }
        tr
    }
}

/// Lean geometry pass for flow stepping: mean curvature, immersivity and
/// curvature sup only (no Christoffels, intrinsic curvature or frames).
pub struct MeanCurvatureField {
    pub mean_curv: Vec<AVec>,
    pub min_metric_eig: f64,
    pub sup_a: f64,
}

pub fn mean_curvature_field(f: &Immersion) -> Result<MeanCurvatureField> {
    let grid = *f.grid();
    let bg = *f.background();
    let m = grid.dim();
    let nodes = grid.nodes();
    let pts = f.points();
    let d1a = d1_field(&grid, pts, 0);
    let d1b = if m == 2 {
        d1_field(&grid, pts, 1)
    } else {
        Vec::new()
    };
    let dd00 = d2_field(&grid, pts, 0);
    let (dd01, dd11) = if m == 2 {
        (d1_field(&grid, &d1a, 1), d2_field(&grid, pts, 1))
    } else {
        (Vec::new(), Vec::new())
    };
    let is_sphere = !bg.is_flat();
    let mut mean_curv = Vec::with_capacity(nodes);
    let mut min_eig = f64::INFINITY;
    let mut min_node = 0usize;
    let mut sup_a = 0.0_f64;
    for node in 0..nodes {
        let p = &pts[node];
        let (g, gi, eig);
        if m == 1 {
            let g11 = dot(&d1a[node], &d1a[node]);
            g = [g11, 0.0, 1.0];
            gi = [1.0 / g11, 0.0, 1.0];
            eig = g11;
        } else {
            let gg = [
                dot(&d1a[node], &d1a[node]),
                dot(&d1a[node], &d1b[node]),
                dot(&d1b[node], &d1b[node]),
            ];
            gi = sym2_inv(&gg);
            eig = sym2_eigvals(&gg).0;
            g = gg;
        }
        let _ = g;
        if eig < min_eig {
            min_eig = eig;
            min_node = node;
        }
        let mut s = if m == 1 {
            [dd00[node], ZERO4, ZERO4]
        } else {
            [dd00[node], dd01[node], dd11[node]]
        };
        if is_sphere {
            for sij in &mut s {
                let c = dot(sij, p);
                axpy(sij, -c, p);
            }
        }
        let pairs: usize = if m == 1 { 1 } else { 3 };
        let mut a = [ZERO4; 3];
        for k in 0..pairs {
            let mut v = s[k];
            if m == 1 {
                let c = gi[0] * dot(&v, &d1a[node]);
                axpy(&mut v, -c, &d1a[node]);
            } else {
                let p0 = dot(&v, &d1a[node]);
                let p1 = dot(&v, &d1b[node]);
                axpy(&mut v, -(gi[0] * p0 + gi[1] * p1), &d1a[node]);
                axpy(&mut v, -(gi[1] * p0 + gi[2] * p1), &d1b[node]);
            }
            a[k] = v;
        }
        let mut h = ZERO4;
        if m == 1 {
            axpy(&mut h, gi[0], &a[0]);
            sup_a = sup_a.max((gi[0] * gi[0] * dot(&a[0], &a[0])).max(0.0).sqrt());
        } else {
            axpy(&mut h, gi[0], &a[0]);
            axpy(&mut h, 2.0 * gi[1], &a[1]);
            axpy(&mut h, gi[2], &a[2]);
            let gmat = [[gi[0], gi[1]], [gi[1], gi[2]]];
            let mut total = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        for l in 0..2 {
                            total += gmat[i][k] * gmat[j][l] * dot(&a[i + j], &a[k + l]);
                        }
                    }
                }
            }
            sup_a = sup_a.max(total.max(0.0).sqrt());
        }
        mean_curv.push(h);
    }
    if !(min_eig > IMMERSIVITY_FLOOR) {
        return Err(Error::DegenerateImmersion {
            node: min_node,
            eig: min_eig,
            floor: IMMERSIVITY_FLOOR,
        });
    }
    Ok(MeanCurvatureField {
        mean_curv,
        min_metric_eig: min_eig,
        sup_a,
    })
}

/// Compute all induced quantities. Errors if the smallest metric eigenvalue
/// at any node falls below the immersivity floor.
pub fn induced_geometry(f: &Immersion) -> Result<InducedGeometry> {
    let grid = *f.grid();
    let bg = *f.background();
    let m = grid.dim();
    let nodes = grid.nodes();
    let pts = f.points();

    let d1a = d1_field(&grid, pts, 0);
    let d1b = if m == 2 {
        d1_field(&grid, pts, 1)
    } else {
        vec![ZERO4; nodes]
    };
    let dd00 = d2_field(&grid, pts, 0);
    let (dd01, dd11) = if m == 2 {
        (d1_field(&grid, &d1a, 1), d2_field(&grid, pts, 1))
    } else {
        (vec![ZERO4; nodes], vec![ZERO4; nodes])
    };

    // Metric, immersivity, and per-node algebra.
    let mut metric = vec![[0.0; 3]; nodes];
    let mut inv_metric = vec![[0.0; 3]; nodes];
    let mut sqrt_det = vec![0.0; nodes];
    let mut min_eig = f64::INFINITY;
    let mut min_node = 0usize;
    for node in 0..nodes {
        let g = if m == 1 {
            [dot(&d1a[node], &d1a[node]), 0.0, 1.0]
        } else {
            [
                dot(&d1a[node], &d1a[node]),
                dot(&d1a[node], &d1b[node]),
                dot(&d1b[node], &d1b[node]),
            ]
        };
        let eig = if m == 1 { g[0] } else { sym2_eigvals(&g).0 };
        if eig < min_eig {
            min_eig = eig;
            min_node = node;
        }
        metric[node] = g;
        inv_metric[node] = if m == 1 {
            [1.0 / g[0], 0.0, 1.0]
        } else {
            sym2_inv(&g)
        };
        sqrt_det[node] = if m == 1 {
            g[0].sqrt()
        } else {
            sym2_det(&g).sqrt()
        };
    }
    if !(min_eig > IMMERSIVITY_FLOOR) {
        return Err(Error::DegenerateImmersion {
            node: min_node,
            eig: min_eig,
            floor: IMMERSIVITY_FLOOR,
        });
    }

    let is_sphere = !bg.is_flat();
    let d1_pair: Vec<[AVec; 2]> = (0..nodes).map(|n| [d1a[n], d1b[n]]).collect();

    struct NodeOut {
        a: [AVec; 3],
        h: AVec,
        coef: [[f64; 2]; 2],
        asq: f64,
        defect: f64,
    }

    let per_node = |node: usize| -> NodeOut {
        let p = &pts[node];
        let g = &metric[node];
        let gi = &inv_metric[node];
        let d1 = &d1_pair[node];
        // Ambient covariant second derivatives: on the sphere project the raw
        // second derivative onto the ambient tangent plane first.
        let mut s = [dd00[node], dd01[node], dd11[node]];
        if is_sphere {
            for sij in &mut s {
                let c = dot(sij, p);
                axpy(sij, -c, p);
            }
        }
        // Second fundamental form = normal part of the covariant second
        // derivative; tangential projection via the induced metric.
        let mut a = [ZERO4; 3];
        let pairs: usize = if m == 1 { 1 } else { 3 };
        for k in 0..pairs {
            let mut v = s[k];
            if m == 1 {
                let c = gi[0] * dot(&v, &d1[0]);
                axpy(&mut v, -c, &d1[0]);
            } else {
                let p0 = dot(&v, &d1[0]);
                let p1 = dot(&v, &d1[1]);
                axpy(&mut v, -(gi[0] * p0 + gi[1] * p1), &d1[0]);
                axpy(&mut v, -(gi[1] * p0 + gi[2] * p1), &d1[1]);
            }
            a[k] = v;
        }
        // H = g^{ij} A_ij.
        let mut h = ZERO4;
        if m == 1 {
            axpy(&mut h, gi[0], &a[0]);
        } else {
            axpy(&mut h, gi[0], &a[0]);
            axpy(&mut h, 2.0 * gi[1], &a[1]);
            axpy(&mut h, gi[2], &a[2]);
        }
        // |A|^2 = g^{ik} g^{jl} <A_ij, A_kl>.
        let asq = if m == 1 {
            gi[0] * gi[0] * dot(&a[0], &a[0])
        } else {
            let gmat = [[gi[0], gi[1]], [gi[1], gi[2]]];
            let aij = |i: usize, j: usize| -> &AVec { &a[i + j] };
            let mut total = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        for l in 0..2 {
                            total += gmat[i][k] * gmat[j][l] * dot(aij(i, j), aij(k, l));
                        }
                    }
                }
            }
            total
        };
        // Gram-Schmidt frame coefficients in the coordinate basis.
        let coef = if m == 1 {
            [[1.0 / g[0].sqrt(), 0.0], [0.0, 0.0]]
        } else {
            let c00 = 1.0 / g[0].sqrt();
            let w_norm = (g[2] - g[1] * g[1] / g[0]).sqrt();
            [[c00, 0.0], [-g[1] / (g[0] * w_norm), 1.0 / w_norm]]
        };
        let defect = if m == 1 {
            0.0
        } else {
            bg.omega(p, &d1[0], &d1[1])
        };
        NodeOut {
            a,
            h,
            coef,
            asq,
            defect,
        }
    };

    let outs: Vec<NodeOut> = if nodes >= PAR_THRESHOLD {
        (0..nodes).into_par_iter().map(per_node).collect()
    } else {
        (0..nodes).map(per_node).collect()
    };

    let mut a = Vec::with_capacity(nodes);
    let mut mean_curv = Vec::with_capacity(nodes);
    let mut frame_coef = Vec::with_capacity(nodes);
    let mut norm_a_sq = Vec::with_capacity(nodes);
    let mut defect = Vec::with_capacity(nodes);
    let mut sup_a = 0.0_f64;
    let mut max_h = 0.0_f64;
    for out in outs {
        sup_a = sup_a.max(out.asq.max(0.0).sqrt());
        max_h = max_h.max(dot(&out.h, &out.h).sqrt());
        a.push(out.a);
        mean_curv.push(out.h);
        frame_coef.push(out.coef);
        norm_a_sq.push(out.asq);
        defect.push(out.defect);
    }

    // Christoffel symbols of the induced metric from metric derivatives.
    let g_fields: [Vec<f64>; 3] = [
        metric.iter().map(|g| g[0]).collect(),
        metric.iter().map(|g| g[1]).collect(),
        metric.iter().map(|g| g[2]).collect(),
    ];
    let mut dg: Vec<[Vec<f64>; 3]> = Vec::new(); // dg[dir][component]
    for dir in 0..m {
        dg.push([
            d1_scalar(&grid, &g_fields[0], dir),
            d1_scalar(&grid, &g_fields[1], dir),
            d1_scalar(&grid, &g_fields[2], dir),
        ]);
    }
    let mut christoffels = vec![[0.0; 6]; nodes];
    for node in 0..nodes {
        let gi = &inv_metric[node];
        if m == 1 {
            // Gamma^0_00 = g'/(2 g).
            christoffels[node][0] = 0.5 * gi[0] * dg[0][0][node];
        } else {
            let comp = |i: usize, j: usize| i + j; // metric component index
            let d = |l: usize, i: usize, j: usize| dg[l][comp(i, j)][node];
            let gimat = [[gi[0], gi[1]], [gi[1], gi[2]]];
            for k in 0..2 {
                for i in 0..2 {
                    for j in i..2 {
                        let mut v = 0.0;
                        for (l, gkl) in gimat[k].iter().enumerate() {
                            v += 0.5 * gkl * (d(i, j, l) + d(j, i, l) - d(l, i, j));
                        }
                        christoffels[node][k * 3 + i + j] = v;
                    }
                }
            }
        }
    }

    // Intrinsic Gauss curvature from second differences of the metric.
    let gauss_k = if m == 2 {
        gauss_curvature_from_metric(&grid, &g_fields)
    } else {
        Vec::new()
    };

    Ok(InducedGeometry {
        m,
        d1: d1_pair,
        metric,
        inv_metric,
        sqrt_det,
        a,
        mean_curv,
        frame_coef,
        norm_a_sq,
        defect,
        gauss_k,
        christoffels,
        sup_a,
        min_metric_eig: min_eig,
        max_mean_curv: max_h,
    })
}

/// Gauss curvature of a 2d periodic metric field (E, F, G) via the Brioschi
/// formula; exercised directly by synthetic-metric tests.
pub fn gauss_curvature_from_metric(grid: &ParamGrid, g: &[Vec<f64>; 3]) -> Vec<f64> {
    let e_u = d1_scalar(grid, &g[0], 0);
    let e_v = d1_scalar(grid, &g[0], 1);
    let f_u = d1_scalar(grid, &g[1], 0);
    let f_v = d1_scalar(grid, &g[1], 1);
    let g_u = d1_scalar(grid, &g[2], 0);
    let g_v = d1_scalar(grid, &g[2], 1);
    let e_vv = d2_scalar(grid, &g[0], 1);
    let g_uu = d2_scalar(grid, &g[2], 0);
    let f_uv = d1_scalar(grid, &f_u, 1);
    map_nodes(grid.nodes(), |n| {
        let (e, f, gg) = (g[0][n], g[1][n], g[2][n]);
        let det3 = |m: [[f64; 3]; 3]| -> f64 {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let m1 = det3([
            [
                -0.5 * e_vv[n] + f_uv[n] - 0.5 * g_uu[n],
                0.5 * e_u[n],
                f_u[n] - 0.5 * e_v[n],
            ],
            [f_v[n] - 0.5 * g_u[n], e, f],
            [0.5 * g_v[n], f, gg],
        ]);
        let m2 = det3([
            [0.0, 0.5 * e_v[n], 0.5 * g_u[n]],
            [0.5 * e_v[n], e, f],
            [0.5 * g_u[n], f, gg],
        ]);
        let det = e * gg - f * f;
        (m1 - m2) / (det * det)
    })
}

/// Max over nodes and index pairs of |(F* omega)(d_i, d_j)|.
pub fn lagrangian_defect_norm(geo: &InducedGeometry) -> f64 {
    geo.defect.iter().fold(0.0_f64, |acc, d| acc.max(d.abs()))
}

/// Residual field of the self-similar equation H = lambda * (grad f)^perp.
#[derive(Debug, Clone)]
pub struct ResidualField {
    pub field: Vec<AVec>,
    pub sup: f64,
    /// Root-mean-square with respect to the induced measure.
    pub l2: f64,
}

pub fn self_similar_residual(
    f: &Immersion,
    geo: &InducedGeometry,
    lambda: f64,
) -> ResidualField {
    let bg = f.background();
    let nodes = geo.nodes();
    let mut field = Vec::with_capacity(nodes);
    let mut sup = 0.0_f64;
    let mut num = Vec::with_capacity(nodes);
    let mut den = Vec::with_capacity(nodes);
    let cell = f.grid().cell();
    for node in 0..nodes {
        let grad = bg.grad_f(f.point(node));
        let (_, perp) = geo.split_tangent(node, &grad);
        let mut r = geo.mean_curv[node];
        axpy(&mut r, -lambda, &perp);
        let n2 = dot(&r, &r);
        sup = sup.max(n2.sqrt());
        num.push(n2 * geo.sqrt_det[node] * cell);
        den.push(geo.sqrt_det[node] * cell);
        field.push(r);
    }
    let l2 = (crate::numerics::pairwise_sum(&num) / crate::numerics::pairwise_sum(&den)).sqrt();
    ResidualField { field, sup, l2 }
}

/// Sup norm (in the rescaled metric) of the mean curvature of F with respect
/// to the conformal ambient metric exp(2 lambda f / m) g. Vanishing is the
/// minimal-immersion characterization of a self-similar solution.
pub fn conformal_mean_curvature(f: &Immersion, geo: &InducedGeometry, lambda: f64) -> f64 {
    let bg = f.background();
    let m = geo.m as f64;
    let mut sup = 0.0_f64;
    for node in 0..geo.nodes() {
        let jet_f = bg.f(f.point(node));
        let psi = lambda * jet_f / m;
        // grad psi = (lambda / m) grad f; conformal mean curvature
        // H_hat = exp(-2 psi) (H - m (grad psi)^perp).
        let grad = bg.grad_f(f.point(node));
        let (_, perp) = geo.split_tangent(node, &grad);
        let mut h_hat = geo.mean_curv[node];
        axpy(&mut h_hat, -lambda, &perp);
        let h_hat = scale(&h_hat, (-2.0 * psi).exp());
        // Norm in the conformal metric: |v|_hat = exp(psi) |v|.
        sup = sup.max(psi.exp() * dot(&h_hat, &h_hat).sqrt());
    }
    sup
}

/// Cross-check of the intrinsic Ricci curvature against the Gauss equation,
/// evaluated on both coordinate directions at every node (m = 2; returns 0
/// for curves where both sides vanish identically).
pub fn gauss_consistency(f: &Immersion, geo: &InducedGeometry) -> f64 {
    if geo.m == 1 {
        return 0.0;
    }
    let bg = f.background();
    let mut worst = 0.0_f64;
    for node in 0..geo.nodes() {
        let g = &geo.metric[node];
        let frame = geo.frame(node);
        let coef = &geo.frame_coef[node];
        let aij = |i: usize, j: usize| -> &AVec { &geo.a[node][i + j] };
        let h = &geo.mean_curv[node];
        let p = f.point(node);
        for x in 0..2 {
            let direct = geo.gauss_k[node] * g[x + x];
            let fx = &geo.d1[node][x];
            // A(d_x, e_i) in the orthonormal frame.
            let mut gauss = 0.0;
            for i in 0..2 {
                gauss += bg.riemann(p, fx, &frame[i], fx, &frame[i]);
                let mut a_xe = ZERO4;
                for c in 0..2 {
                    axpy(&mut a_xe, coef[i][c], aij(x, c));
                }
                gauss -= dot(&a_xe, &a_xe);
            }
            gauss += dot(aij(x, x), h);
            worst = worst.max((direct - gauss).abs());
        }
    }
    worst
}
