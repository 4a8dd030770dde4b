//! Drift Laplacian on the induced metric, its spectrum, the eigenvalue-1
//! identity satisfied by shrinkers, the Bakry-Emery curvature bound, and the
//! diameter lower-bound audit.
//!
//! The operator is assembled in generalized symmetric form: a stiffness
//! matrix realizing int <grad u, grad v> exp(-phi) d mu against a weighted
//! mass matrix, which guarantees a real nonnegative spectrum with constants
//! in the kernel. Curves use a conservative flux scheme with an averaged
//! (consistent + lumped) mass whose eigenvalues are 4th-order accurate for
//! smooth coefficients; 2d grids use bilinear elements with 2x2 Gauss
//! quadrature and a lumped mass.

use crate::eigensolve;
use crate::error::{Error, Result};
use crate::geometry::{
    d1_scalar, d2_scalar, lagrangian_defect_norm, self_similar_residual, InducedGeometry,
};
use crate::grid::ParamGrid;
use crate::immersion::Immersion;
use crate::numerics::{dot, pairwise_sum, sym2_pencil_min, CyclicTri, CyclicTriFactor, Sym2};
use serde::Serialize;

/// Assembled weighted Laplacian Delta_phi = Delta - grad(phi) . grad on the
/// induced metric, self-adjoint for the exp(-phi) d mu inner product.
pub struct DriftOperator {
    pub m: usize,
    grid: ParamGrid,
    pub phi: Vec<f64>,
    tri: Option<(CyclicTri, CyclicTri, CyclicTriFactor)>,
    sparse: Option<(Vec<Vec<(usize, f64)>>, Vec<f64>)>,
    /// Maximum asymmetry found before symmetrization.
    pub symmetry_gap: f64,
}

/// Assemble with phi = (f compose F) / 2, the drift weight of the shrinker
/// spectral theory.
pub fn assemble_drift(f: &Immersion, geo: &InducedGeometry) -> Result<DriftOperator> {
    let bg = f.background();
    let phi: Vec<f64> = (0..geo.nodes())
        .map(|node| 0.5 * bg.f(f.point(node)))
        .collect();
    assemble_with_phi(f, geo, phi)
}

/// Assemble the plain Laplace-Beltrami operator (phi = 0): used by the trace
/// identity and divergence-theorem audits.
pub fn assemble_laplacian(f: &Immersion, geo: &InducedGeometry) -> Result<DriftOperator> {
    assemble_with_phi(f, geo, vec![0.0; geo.nodes()])
}

fn assemble_with_phi(
    f: &Immersion,
    geo: &InducedGeometry,
    phi: Vec<f64>,
) -> Result<DriftOperator> {
    let grid = *f.grid();
    let nodes = grid.nodes();
    if geo.m == 1 {
        let h = grid.h(0);
        // Flux coefficient c = e^{-phi} sqrt(g) g^{11} and density
        // w = e^{-phi} sqrt(g).
        let c: Vec<f64> = (0..nodes)
            .map(|i| (-phi[i]).exp() * geo.sqrt_det[i] * geo.inv_metric[i][0])
            .collect();
        let w: Vec<f64> = (0..nodes)
            .map(|i| (-phi[i]).exp() * geo.sqrt_det[i])
            .collect();
        let mut stiff = CyclicTri::zeros(nodes);
        let mut mass = CyclicTri::zeros(nodes);
        for i in 0..nodes {
            let ip = (i + 1) % nodes;
            let im = (i + nodes - 1) % nodes;
            let ce_right = 0.5 * (c[i] + c[ip]);
            let ce_left = 0.5 * (c[im] + c[i]);
            stiff.diag[i] = (ce_left + ce_right) / h;
            stiff.off[i] = -ce_right / h;
            // Averaged consistent/lumped mass: 4th-order eigenvalues for
            // constant coefficients, 2nd-order otherwise.
            mass.diag[i] = h * (7.0 / 12.0 * w[i] + (w[im] + w[ip]) / 8.0);
            mass.off[i] = h * (w[i] + w[ip]) / 24.0;
        }
        let factor =
            CyclicTriFactor::new(&mass).ok_or(Error::EigenNonConvergence { iters: 0 })?;
        Ok(DriftOperator {
            m: 1,
            grid,
            phi,
            tri: Some((stiff, mass, factor)),
            sparse: None,
            symmetry_gap: 0.0,
        })
    } else {
        // Bilinear elements on the periodic quad grid, 2x2 Gauss points,
        // coefficient tensor C = e^{-phi} sqrt(det g) g^{ab} interpolated
        // bilinearly from the nodes.
        let (h1, h2) = (grid.h(0), grid.h(1));
        let n1 = grid.size(0);
        let n2 = grid.size(1);
        let coeff: Vec<Sym2> = (0..nodes)
            .map(|i| {
                let s = (-phi[i]).exp() * geo.sqrt_det[i];
                [
                    s * geo.inv_metric[i][0],
                    s * geo.inv_metric[i][1],
                    s * geo.inv_metric[i][2],
                ]
            })
            .collect();
        let w: Vec<f64> = (0..nodes)
            .map(|i| (-phi[i]).exp() * geo.sqrt_det[i])
            .collect();
        let mut rows: Vec<std::collections::BTreeMap<usize, f64>> =
            vec![std::collections::BTreeMap::new(); nodes];
        let gp = [
            0.5 - 0.5 / 3.0_f64.sqrt(),
            0.5 + 0.5 / 3.0_f64.sqrt(),
        ];
        for ei in 0..n1 {
            for ej in 0..n2 {
                let corner = [
                    grid.index(ei, ej),
                    grid.index((ei + 1) % n1, ej),
                    grid.index(ei, (ej + 1) % n2),
                    grid.index((ei + 1) % n1, (ej + 1) % n2),
                ];
                let shape_grad = |a: usize, xi: f64, eta: f64| -> [f64; 2] {
                    match a {
                        0 => [-(1.0 - eta) / h1, -(1.0 - xi) / h2],
                        1 => [(1.0 - eta) / h1, -xi / h2],
                        2 => [-eta / h1, (1.0 - xi) / h2],
                        _ => [eta / h1, xi / h2],
                    }
                };
                let shape = |a: usize, xi: f64, eta: f64| -> f64 {
                    match a {
                        0 => (1.0 - xi) * (1.0 - eta),
                        1 => xi * (1.0 - eta),
                        2 => (1.0 - xi) * eta,
                        _ => xi * eta,
                    }
                };
                let mut ke = [[0.0_f64; 4]; 4];
                for &xi in &gp {
                    for &eta in &gp {
                        let mut cgp = [0.0_f64; 3];
                        for a in 0..4 {
                            let s = shape(a, xi, eta);
                            for (ci, cv) in cgp.iter_mut().enumerate() {
                                *cv += s * coeff[corner[a]][ci];
                            }
                        }
                        for a in 0..4 {
                            let ga = shape_grad(a, xi, eta);
                            for b in 0..4 {
                                let gb = shape_grad(b, xi, eta);
                                let e = ga[0] * (cgp[0] * gb[0] + cgp[1] * gb[1])
                                    + ga[1] * (cgp[1] * gb[0] + cgp[2] * gb[1]);
                                ke[a][b] += 0.25 * e * h1 * h2;
                            }
                        }
                    }
                }
                for a in 0..4 {
                    for b in 0..4 {
                        *rows[corner[a]].entry(corner[b]).or_insert(0.0) += ke[a][b];
                    }
                }
            }
        }
        let stiff: Vec<Vec<(usize, f64)>> = rows
            .into_iter()
            .map(|r| r.into_iter().collect())
            .collect();
        // Symmetry audit.
        let mut gap = 0.0_f64;
        for (i, row) in stiff.iter().enumerate() {
            for &(j, v) in row {
                let back = stiff[j]
                    .iter()
                    .find(|&&(jj, _)| jj == i)
                    .map(|&(_, vv)| vv)
                    .unwrap_or(0.0);
                gap = gap.max((v - back).abs());
            }
        }
        let mass: Vec<f64> = (0..nodes).map(|i| w[i] * h1 * h2).collect();
        Ok(DriftOperator {
            m: 2,
            grid,
            phi,
            tri: None,
            sparse: Some((stiff, mass)),
            symmetry_gap: gap,
        })
    }
}

impl DriftOperator {
    pub fn nodes(&self) -> usize {
        self.grid.nodes()
    }

    /// Apply Delta_phi u = -M^{-1} S u nodewise.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = self.nodes();
        match (&self.tri, &self.sparse) {
            (Some((stiff, _, factor)), _) => {
                let mut su = vec![0.0; n];
                stiff.matvec(u, &mut su);
                let mut out = vec![0.0; n];
                factor.solve(&su, &mut out);
                for v in &mut out {
                    *v = -*v;
                }
                out
            }
            (_, Some((stiff, mass))) => (0..n)
                .map(|i| {
                    let s: f64 = stiff[i].iter().map(|&(j, v)| v * u[j]).sum();
                    -s / mass[i]
                })
                .collect(),
            _ => unreachable!(),
        }
    }

    /// Weighted inner product <u, v> with the exp(-phi) d mu mass.
    pub fn mass_ip(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.nodes();
        match (&self.tri, &self.sparse) {
            (Some((_, mass, _)), _) => {
                let mut mv = vec![0.0; n];
                mass.matvec(v, &mut mv);
                let terms: Vec<f64> = (0..n).map(|i| u[i] * mv[i]).collect();
                pairwise_sum(&terms)
            }
            (_, Some((_, mass))) => {
                let terms: Vec<f64> = (0..n).map(|i| u[i] * mass[i] * v[i]).collect();
                pairwise_sum(&terms)
            }
            _ => unreachable!(),
        }
    }

    /// Integral of Delta_phi u against exp(-phi) d mu: equals -1^T S u, which
    /// telescopes to rounding on the closed grid (discrete divergence
    /// theorem, exact by construction of the conservative assembly).
    pub fn integral_of_apply(&self, u: &[f64]) -> f64 {
        let n = self.nodes();
        match (&self.tri, &self.sparse) {
            (Some((stiff, _, _)), _) => {
                let mut su = vec![0.0; n];
                stiff.matvec(u, &mut su);
                -pairwise_sum(&su)
            }
            (_, Some((stiff, _))) => {
                let su: Vec<f64> = (0..n)
                    .map(|i| stiff[i].iter().map(|&(j, v)| v * u[j]).sum())
                    .collect();
                -pairwise_sum(&su)
            }
            _ => unreachable!(),
        }
    }

    /// Smallest `k` eigenpairs of -Delta_phi in the weighted inner product.
    pub fn spectrum_raw(&self, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        match (&self.tri, &self.sparse) {
            (Some((stiff, mass, _)), _) => eigensolve::lanczos_smallest(stiff, mass, k),
            (_, Some((stiff, mass))) => eigensolve::dense_smallest(stiff, mass, k),
            _ => unreachable!(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TargetMatch {
    /// Eigenvalue of -Delta_phi closest to 1.
    pub eigenvalue: f64,
    pub gap_to_one: f64,
    /// Weighted correlation of the eigenspace near that eigenvalue with the
    /// predicted eigenfunction (m/2 - C0/4) - phi.
    pub alignment: f64,
    /// Set when the predicted eigenfunction vanishes, i.e. the image lies in
    /// the level set { f = m - C0/2 }.
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub eigenfunctions: Vec<Vec<f64>>,
    pub target_match: TargetMatch,
}

/// Smallest `k` eigenpairs plus the eigenvalue-1 bookkeeping.
pub fn spectrum(f: &Immersion, op: &DriftOperator, k: usize) -> Result<SpectrumReport> {
    let (eigenvalues, eigenfunctions) = op.spectrum_raw(k)?;
    let bg = f.background();
    let m = op.m as f64;
    let target_fn: Vec<f64> = (0..op.nodes())
        .map(|i| (m / 2.0 - bg.c0() / 4.0) - op.phi[i])
        .collect();
    let sup_t = target_fn.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let degenerate = sup_t < 1e-8;
    let mut best = 0usize;
    for (i, ev) in eigenvalues.iter().enumerate() {
        if (ev - 1.0).abs() < (eigenvalues[best] - 1.0).abs() {
            best = i;
        }
    }
    let alignment = if degenerate || eigenvalues.is_empty() {
        0.0
    } else {
        let tnorm = op.mass_ip(&target_fn, &target_fn).sqrt();
        let mut captured = 0.0;
        for (i, ev) in eigenvalues.iter().enumerate() {
            if (ev - eigenvalues[best]).abs() < 0.05 {
                let c = op.mass_ip(&target_fn, &eigenfunctions[i]);
                captured += c * c;
            }
        }
        captured.sqrt() / tnorm
    };
    let target_match = TargetMatch {
        eigenvalue: *eigenvalues.get(best).unwrap_or(&f64::NAN),
        gap_to_one: (eigenvalues.get(best).unwrap_or(&f64::NAN) - 1.0).abs(),
        alignment,
        degenerate,
    };
    Ok(SpectrumReport {
        eigenvalues,
        eigenfunctions,
        target_match,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenIdentityReport {
    /// sup | Delta_phi u + u | for u = (m/2 - C0/4) - phi.
    pub residual_sup: f64,
    /// The predicted eigenfunction vanishes identically (level-set case).
    pub is_degenerate: bool,
    /// Context: how close the immersion is to an actual shrinker.
    pub shrinker_residual_sup: f64,
}

/// Residual of the identity Delta_phi u = -u for the shifted potential
/// u = (m/2 - C0/4) - phi, which holds exactly on shrinkers.
pub fn eigen_identity_check(f: &Immersion, geo: &InducedGeometry) -> Result<EigenIdentityReport> {
    let op = assemble_drift(f, geo)?;
    let bg = f.background();
    let m = op.m as f64;
    let u: Vec<f64> = (0..op.nodes())
        .map(|i| (m / 2.0 - bg.c0() / 4.0) - op.phi[i])
        .collect();
    let sup_u = u.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let lap = op.apply(&u);
    let residual_sup = (0..op.nodes())
        .map(|i| (lap[i] + u[i]).abs())
        .fold(0.0, f64::max);
    let res = self_similar_residual(f, geo, -0.5);
    Ok(EigenIdentityReport {
        residual_sup,
        is_degenerate: sup_u < 1e-8,
        shrinker_residual_sup: res.sup,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BakryEmeryReport {
    /// Minimum over nodes of the smallest generalized eigenvalue of
    /// Ric(F*g) + Hess phi against F*g.
    pub kappa_actual: f64,
    /// Worst entrywise gap between the intrinsic Hessian of phi and the
    /// ambient chain-rule route through Hess f and the second fundamental
    /// form.
    pub hessian_route_gap: f64,
    /// Per-node smallest generalized eigenvalue.
    pub field: Vec<f64>,
}

/// Bakry-Emery tensor Ric(F*g) + Hess_{F*g} phi with phi = (f o F)/2,
/// cross-checked through two routes for the Hessian.
pub fn bakry_emery(f: &Immersion, geo: &InducedGeometry) -> Result<BakryEmeryReport> {
    let bg = f.background();
    let grid = f.grid();
    let nodes = geo.nodes();
    let m = geo.m;
    let fof: Vec<f64> = (0..nodes).map(|i| bg.f(f.point(i))).collect();
    // Intrinsic Hessian of f o F: D_i D_j - Gamma^k_ij D_k, then halved.
    let d0 = d1_scalar(grid, &fof, 0);
    let d00 = d2_scalar(grid, &fof, 0);
    let (d1v, d01, d11) = if m == 2 {
        (
            d1_scalar(grid, &fof, 1),
            d1_scalar(grid, &d1_scalar(grid, &fof, 0), 1),
            d2_scalar(grid, &fof, 1),
        )
    } else {
        (vec![0.0; nodes], vec![0.0; nodes], vec![0.0; nodes])
    };
    let mut kappa_actual = f64::INFINITY;
    let mut gap = 0.0_f64;
    let mut field = Vec::with_capacity(nodes);
    for node in 0..nodes {
        let gm = &geo.christoffels[node];
        let hess_intr = |i: usize, j: usize| -> f64 {
            let dd = match (i, j) {
                (0, 0) => d00[node],
                (1, 1) => d11[node],
                _ => d01[node],
            };
            let mut v = dd;
            v -= gm[i + j] * d0[node];
            if m == 2 {
                v -= gm[3 + i + j] * d1v[node];
            }
            0.5 * v
        };
        // Chain route: (Hess_g f)(F_* d_i, F_* d_j) + <A_ij, grad f>, halved.
        let jet = bg.jet(f.point(node))?;
        let chain = |i: usize, j: usize| -> f64 {
            let di = &geo.d1[node][i];
            let dj = &geo.d1[node][j];
            let mut v = 0.0;
            for (a, row) in jet.hess_f.iter().enumerate() {
                for (b, e) in row.iter().enumerate() {
                    v += di[a] * e * dj[b];
                }
            }
            v += dot(&geo.a[node][i + j], &jet.grad_f);
            0.5 * v
        };
        let ric = |i: usize, j: usize| -> f64 {
            if m == 1 {
                0.0
            } else {
                geo.gauss_k[node] * geo.metric[node][i + j]
            }
        };
        if m == 1 {
            let b = ric(0, 0) + hess_intr(0, 0);
            gap = gap.max((hess_intr(0, 0) - chain(0, 0)).abs());
            let k = b / geo.metric[node][0];
            field.push(k);
            kappa_actual = kappa_actual.min(k);
        } else {
            let b: Sym2 = [
                ric(0, 0) + hess_intr(0, 0),
                ric(0, 1) + hess_intr(0, 1),
                ric(1, 1) + hess_intr(1, 1),
            ];
            for (i, j) in [(0usize, 0usize), (0, 1), (1, 1)] {
                gap = gap.max((hess_intr(i, j) - chain(i, j)).abs());
            }
            let k = sym2_pencil_min(&b, &geo.metric[node]);
            field.push(k);
            kappa_actual = kappa_actual.min(k);
        }
    }
    Ok(BakryEmeryReport {
        kappa_actual,
        hessian_route_gap: gap,
        field,
    })
}

/// Curvature floor kappa = 1/2 - m (K0 + A0^2) from the global bounds.
pub fn kappa_bound(m: usize, k0: f64, a0: f64) -> f64 {
    0.5 - m as f64 * (k0 + a0 * a0)
}

/// Diameter lower bound pi / sqrt(3/4 + (m/2)(K0 + A0^2)).
pub fn diameter_lower_bound(m: usize, k0: f64, a0: f64) -> f64 {
    std::f64::consts::PI / (0.75 + 0.5 * m as f64 * (k0 + a0 * a0)).sqrt()
}

/// Intrinsic diameter of (L, F*g). Curves: half the total length (exact).
/// Surfaces: all-pairs shortest paths on a dense-stencil graph (primitive
/// offsets within the 5x5 neighborhood, Simpson-weighted edge lengths),
/// maximized over a subsampled source set; documented overestimate <= 2%.
pub fn diameter(f: &Immersion, geo: &InducedGeometry) -> f64 {
    let grid = f.grid();
    if geo.m == 1 {
        let h = grid.h(0);
        let terms: Vec<f64> = geo.sqrt_det.iter().map(|s| s * h).collect();
        return 0.5 * pairwise_sum(&terms);
    }
    let n1 = grid.size(0);
    let n2 = grid.size(1);
    let nodes = grid.nodes();
    // Primitive directions of the 5x5 stencil (non-primitive offsets factor
    // through an intermediate node and never shorten a path).
    let dirs: Vec<(isize, isize)> = vec![
        (1, 0),
        (-1, 0),
        (0, 1),
        (0, -1),
        (1, 1),
        (1, -1),
        (-1, 1),
        (-1, -1),
        (2, 1),
        (2, -1),
        (-2, 1),
        (-2, -1),
        (1, 2),
        (1, -2),
        (-1, 2),
        (-1, -2),
    ];
    let seg_len = |from: usize, (da, db): (isize, isize)| -> f64 {
        let delta = [da as f64 * grid.h(0), db as f64 * grid.h(1)];
        let quad = |g: &Sym2| -> f64 {
            (g[0] * delta[0] * delta[0]
                + 2.0 * g[1] * delta[0] * delta[1]
                + g[2] * delta[1] * delta[1])
                .max(0.0)
                .sqrt()
        };
        let (i, j) = grid.split(from);
        let to = grid.index(
            ((i as isize + da).rem_euclid(n1 as isize)) as usize,
            ((j as isize + db).rem_euclid(n2 as isize)) as usize,
        );
        // Midpoint metric: average the nodal metrics adjacent to the segment
        // midpoint on the half-lattice.
        let gmid: Sym2 = {
            let mi2 = 2 * i as isize + da;
            let mj2 = 2 * j as isize + db;
            let mut acc = [0.0; 3];
            let mut count = 0.0;
            for (oi, oj) in [(0isize, 0isize), (mi2 % 2, 0), (0, mj2 % 2), (mi2 % 2, mj2 % 2)] {
                let ii = ((mi2 - oi).div_euclid(2)).rem_euclid(n1 as isize) as usize;
                let jj = ((mj2 - oj).div_euclid(2)).rem_euclid(n2 as isize) as usize;
                let g = &geo.metric[grid.index(ii, jj)];
                for (slot, gv) in acc.iter_mut().zip(g.iter()) {
                    *slot += gv;
                }
                count += 1.0;
            }
            [acc[0] / count, acc[1] / count, acc[2] / count]
        };
        // Simpson along the straight parameter segment.
        (quad(&geo.metric[from]) + 4.0 * quad(&gmid) + quad(&geo.metric[to])) / 6.0
    };

    // Precompute adjacency.
    let mut adj: Vec<Vec<(usize, f64)>> = Vec::with_capacity(nodes);
    for node in 0..nodes {
        let (i, j) = grid.split(node);
        let mut row = Vec::with_capacity(dirs.len());
        for &(da, db) in &dirs {
            let to = grid.index(
                ((i as isize + da).rem_euclid(n1 as isize)) as usize,
                ((j as isize + db).rem_euclid(n2 as isize)) as usize,
            );
            row.push((to, seg_len(node, (da, db))));
        }
        adj.push(row);
    }

    // Sources on a subsampled lattice (at most ~14 per direction).
    let stride1 = (n1 / 14).max(1);
    let stride2 = (n2 / 14).max(1);
    let mut best = 0.0_f64;
    let mut dist = vec![f64::INFINITY; nodes];
    let mut heap: std::collections::BinaryHeap<(std::cmp::Reverse<u64>, usize)> =
        std::collections::BinaryHeap::new();
    for si in (0..n1).step_by(stride1) {
        for sj in (0..n2).step_by(stride2) {
            let src = grid.index(si, sj);
            dist.iter_mut().for_each(|d| *d = f64::INFINITY);
            heap.clear();
            dist[src] = 0.0;
            heap.push((std::cmp::Reverse(0), src));
            while let Some((std::cmp::Reverse(dk), node)) = heap.pop() {
                let d = f64::from_bits(dk);
                if d > dist[node] {
                    continue;
                }
                for &(to, w) in &adj[node] {
                    let nd = d + w;
                    if nd < dist[to] {
                        dist[to] = nd;
                        heap.push((std::cmp::Reverse(nd.to_bits()), to));
                    }
                }
            }
            let far = dist.iter().cloned().fold(0.0, f64::max);
            best = best.max(far);
        }
    }
    best
}

#[derive(Debug, Clone, Serialize)]
pub struct DiameterAudit {
    pub bound: f64,
    pub diam: f64,
    /// Supremum over s in (0, 1) of 4 s (1-s) pi^2 / d^2 + s kappa.
    pub fll_sup: f64,
    pub kappa_actual: f64,
    pub kappa_bound: f64,
    pub k0: f64,
    pub a0: f64,
    pub degenerate: bool,
    pub shrinker_residual: f64,
    pub lagrangian_defect: f64,
    /// | (pi^2 / bound^2 + kappa/2) - 1 |: the algebraic identity tying the
    /// bound to the s = 1/2 slice of the eigenvalue estimate.
    pub s_half_identity_gap: f64,
    pub pass: bool,
}

/// Check diam(L, F*g) >= pi / sqrt(3/4 + (m/2)(K0 + A0^2)) with the tight
/// runtime constants, plus the spectral-gap inequality it derives from.
pub fn diameter_bound_audit(
    f: &Immersion,
    geo: &InducedGeometry,
    diam_tol: f64,
) -> Result<DiameterAudit> {
    let bg = f.background();
    let m = geo.m;
    let k0 = bg.k0();
    let a0 = geo.sup_a;
    let kappa = kappa_bound(m, k0, a0);
    let bound = diameter_lower_bound(m, k0, a0);
    let d = diameter(f, geo);
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let mut fll_sup = f64::NEG_INFINITY;
    let steps = 9999;
    for i in 1..=steps {
        let s = i as f64 * 1e-4;
        fll_sup = fll_sup.max(4.0 * s * (1.0 - s) * pi2 / (d * d) + s * kappa);
    }
    let s_half_identity_gap = (pi2 / (bound * bound) + 0.5 * kappa - 1.0).abs();
    let res = self_similar_residual(f, geo, -0.5);
    let be = bakry_emery(f, geo)?;
    // Degeneracy: the image sits in the level set { f = m - C0/2 }.
    let level = m as f64 - bg.c0() / 2.0;
    let dev = (0..geo.nodes())
        .map(|i| (bg.f(f.point(i)) - level).abs())
        .fold(0.0, f64::max);
    let pass = d >= bound * (1.0 - diam_tol) && fll_sup <= 1.0 + 1e-6;
    Ok(DiameterAudit {
        bound,
        diam: d,
        fll_sup,
        kappa_actual: be.kappa_actual,
        kappa_bound: kappa,
        k0,
        a0,
        degenerate: dev < 1e-8,
        shrinker_residual: res.sup,
        lagrangian_defect: lagrangian_defect_norm(geo),
        s_half_identity_gap,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::geometry::induced_geometry;
    use std::f64::consts::{PI, SQRT_2};

    #[test]
    fn drift_constants_in_kernel_and_symmetric() {
        let im = generate::abresch_langer(2, 3, 512).unwrap();
        let geo = induced_geometry(&im).unwrap();
        let op = assemble_drift(&im, &geo).unwrap();
        let ones = vec![1.0; op.nodes()];
        let lap = op.apply(&ones);
        let sup = lap.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        assert!(sup < 1e-10, "constant not in kernel: {sup}");

        let t = generate::product_torus(&[SQRT_2, 1.1], 24, 24).unwrap();
        let gt = induced_geometry(&t).unwrap();
        let opt = assemble_laplacian(&t, &gt).unwrap();
        assert!(opt.symmetry_gap < 1e-12);
        let lap2 = opt.apply(&vec![1.0; opt.nodes()]);
        assert!(lap2.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn circle_drift_spectrum_closed_form() {
        // Circle of radius sqrt 2: phi is constant, the operator reduces to
        // the arclength Laplacian with eigenvalues (k/sqrt 2)^2.
        let im = generate::circle(SQRT_2, 512).unwrap();
        let geo = induced_geometry(&im).unwrap();
        let op = assemble_drift(&im, &geo).unwrap();
        let report = spectrum(&im, &op, 7).unwrap();
        let exact = [0.0, 0.5, 0.5, 2.0, 2.0, 4.5, 4.5];
        for (i, e) in exact.iter().enumerate() {
            assert!(
                (report.eigenvalues[i] - e).abs() < 1e-4,
                "eig {i}: {} vs {e}",
                report.eigenvalues[i]
            );
        }
        assert!(report.target_match.degenerate);
        // Nonnegative spectrum.
        assert!(report.eigenvalues.iter().all(|&v| v >= -1e-8));
    }

    #[test]
    fn torus_spectrum_separates() {
        // Product torus: eigenvalues are sums of per-factor circle modes
        // (k1^2 + k2^2) / 2 for the Clifford-type torus.
        let im = generate::product_torus(&[SQRT_2, SQRT_2], 32, 32).unwrap();
        let geo = induced_geometry(&im).unwrap();
        let op = assemble_drift(&im, &geo).unwrap();
        let report = spectrum(&im, &op, 6).unwrap();
        let exact = [0.0, 0.5, 0.5, 0.5, 0.5, 1.0];
        for (i, e) in exact.iter().enumerate() {
            assert!(
                (report.eigenvalues[i] - e).abs() < 2e-2,
                "eig {i}: {} vs {e}",
                report.eigenvalues[i]
            );
        }
    }

    #[test]
    fn eigen_identity_on_shrinkers() {
        // Non-circular closed shrinker: identity holds with non-vanishing u.
        let im = generate::abresch_langer(2, 3, 2048).unwrap();
        let geo = induced_geometry(&im).unwrap();
        let rep = eigen_identity_check(&im, &geo).unwrap();
        assert!(!rep.is_degenerate);
        assert!(rep.residual_sup < 1e-3, "residual {}", rep.residual_sup);

        // Refinement: the residual decays at 2nd order.
        let im2 = generate::abresch_langer(2, 3, 4096).unwrap();
        let geo2 = induced_geometry(&im2).unwrap();
        let rep2 = eigen_identity_check(&im2, &geo2).unwrap();
        assert!(
            rep.residual_sup / rep2.residual_sup >= 3.5,
            "ratio {}",
            rep.residual_sup / rep2.residual_sup
        );

        // Degenerate cases: constant potential level sets.
        let c = generate::circle(SQRT_2, 256).unwrap();
        let gc = induced_geometry(&c).unwrap();
        assert!(eigen_identity_check(&c, &gc).unwrap().is_degenerate);
        let t = generate::product_torus(&[SQRT_2, SQRT_2], 32, 32).unwrap();
        let gt = induced_geometry(&t).unwrap();
        assert!(eigen_identity_check(&t, &gt).unwrap().is_degenerate);
    }

    #[test]
    fn eigenvalue_one_on_abresch_langer() {
        let im = generate::abresch_langer(2, 3, 2048).unwrap();
        let geo = induced_geometry(&im).unwrap();
        let op = assemble_drift(&im, &geo).unwrap();
        let report = spectrum(&im, &op, 10).unwrap();
        assert!(
            report.target_match.gap_to_one < 2e-2,
            "gap {}",
            report.target_match.gap_to_one
        );
        assert!(
            report.target_match.alignment >= 0.999,
            "alignment {}",
            report.target_match.alignment
        );
    }

    #[test]
    fn generic_torus_identity_fails_loudly() {
        // Contrapositive sanity: a non-shrinker has a large identity
        // residual compared with the shrinker-case floor.
        let im = generate::product_torus(&[1.0, 1.5], 32, 32).unwrap();
        let geo = induced_geometry(&im).unwrap();
        let rep = eigen_identity_check(&im, &geo).unwrap();
        assert!(!rep.is_degenerate);
        assert!(rep.residual_sup > 0.05, "residual {}", rep.residual_sup);
    }

    #[test]
    fn bakry_emery_cases() {
        // Clifford-type torus: tensor vanishes, floor is -3/2.
        let t = generate::product_torus(&[SQRT_2, SQRT_2], 32, 32).unwrap();
        let gt = induced_geometry(&t).unwrap();
        let bt = bakry_emery(&t, &gt).unwrap();
        assert!(bt.kappa_actual.abs() < 1e-4, "{}", bt.kappa_actual);
        assert!((kappa_bound(2, 0.0, gt.sup_a) + 1.5).abs() < 1e-4);
        assert!(bt.kappa_actual >= kappa_bound(2, 0.0, gt.sup_a));
        assert!(bt.hessian_route_gap < 1e-4, "{}", bt.hessian_route_gap);

        // Circle sqrt 2: equality case kappa = 0 on both sides.
        let c = generate::circle(SQRT_2, 512).unwrap();
        let gc = induced_geometry(&c).unwrap();
        let bc = bakry_emery(&c, &gc).unwrap();
        assert!(bc.kappa_actual.abs() < 1e-3);
        assert!(kappa_bound(1, 0.0, gc.sup_a).abs() < 1e-3);

        // Great circle: kappa_actual 0 >= -1/2.
        let g = generate::great_circle(256, 1.0).unwrap();
        let gg = induced_geometry(&g).unwrap();
        let bgc = bakry_emery(&g, &gg).unwrap();
        assert!(bgc.kappa_actual.abs() < 1e-6);
        assert!((kappa_bound(1, 1.0, gg.sup_a) + 0.5).abs() < 1e-6);
    }

    #[test]
    fn diameter_closed_forms() {
        let c = generate::circle(SQRT_2, 512).unwrap();
        let gc = induced_geometry(&c).unwrap();
        assert!((diameter(&c, &gc) - PI * SQRT_2).abs() < 1e-6);

        let g = generate::great_circle(512, 1.0).unwrap();
        let gg = induced_geometry(&g).unwrap();
        assert!((diameter(&g, &gg) - PI).abs() < 1e-6);

        let t = generate::product_torus(&[SQRT_2, SQRT_2], 64, 64).unwrap();
        let gt = induced_geometry(&t).unwrap();
        let d = diameter(&t, &gt);
        assert!(
            (d - 2.0 * PI).abs() <= 0.02 * 2.0 * PI,
            "diameter {d} vs {}",
            2.0 * PI
        );
    }

    #[test]
    fn diameter_bound_audit_rows() {
        let c = generate::circle(SQRT_2, 512).unwrap();
        let gc = induced_geometry(&c).unwrap();
        let a = diameter_bound_audit(&c, &gc, 0.02).unwrap();
        assert!((a.bound - PI).abs() < 1e-3, "bound {}", a.bound);
        assert!((a.diam - PI * SQRT_2).abs() < 1e-6);
        assert!(a.pass);
        assert!(a.fll_sup <= 1.0 + 1e-6);
        assert!(a.s_half_identity_gap < 1e-12);
        assert!(a.degenerate);

        let t = generate::product_torus(&[SQRT_2, SQRT_2], 64, 64).unwrap();
        let gt = induced_geometry(&t).unwrap();
        let at = diameter_bound_audit(&t, &gt, 0.02).unwrap();
        assert!(
            (at.bound - 2.0 * PI / 7.0_f64.sqrt()).abs() < 1e-3,
            "bound {}",
            at.bound
        );
        assert!(at.pass);

        let g = generate::great_circle(512, 1.0).unwrap();
        let gg = induced_geometry(&g).unwrap();
        let ag = diameter_bound_audit(&g, &gg, 0.02).unwrap();
        assert!((ag.bound - PI / 1.25_f64.sqrt()).abs() < 1e-6);
        assert!((ag.diam - PI).abs() < 1e-6);
        assert!(ag.pass);
    }
}
