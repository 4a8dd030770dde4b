//! Small numerical helpers: ambient 4-vectors, deterministic reductions,
//! symmetric 2x2 pencils and cyclic tridiagonal systems.
//!
//! Ambient points and vectors are stored as `[f64; 4]` with unused embedding
//! coordinates pinned to exactly 0.0, so full-width loops are valid for every
//! background.

/// Ambient vector in embedding coordinates (unused trailing slots are 0).
pub type AVec = [f64; 4];

pub const ZERO4: AVec = [0.0; 4];

#[inline]
pub fn dot(a: &AVec, b: &AVec) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

#[inline]
pub fn norm(a: &AVec) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn add(a: &AVec, b: &AVec) -> AVec {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

#[inline]
pub fn sub(a: &AVec, b: &AVec) -> AVec {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

#[inline]
pub fn scale(a: &AVec, s: f64) -> AVec {
    [a[0] * s, a[1] * s, a[2] * s, a[3] * s]
}

#[inline]
pub fn axpy(y: &mut AVec, alpha: f64, x: &AVec) {
    for d in 0..4 {
        y[d] += alpha * x[d];
    }
}

/// Deterministic pairwise summation; the reduction tree depends only on the
/// slice length, so results are reproducible regardless of thread count.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Symmetric 2x2 matrix stored as (a11, a12, a22).
pub type Sym2 = [f64; 3];

#[inline]
pub fn sym2_det(g: &Sym2) -> f64 {
    g[0] * g[2] - g[1] * g[1]
}

#[inline]
pub fn sym2_inv(g: &Sym2) -> Sym2 {
    let d = sym2_det(g);
    [g[2] / d, -g[1] / d, g[0] / d]
}

/// Eigenvalues of a symmetric 2x2 matrix, ascending.
pub fn sym2_eigvals(g: &Sym2) -> (f64, f64) {
    let tr = g[0] + g[2];
    let disc = ((g[0] - g[2]) * 0.5).hypot(g[1]);
    (tr * 0.5 - disc, tr * 0.5 + disc)
}

/// Smallest root kappa of det(b - kappa * g) = 0 for symmetric positive
/// definite g: the minimum of the generalized Rayleigh quotient.
pub fn sym2_pencil_min(b: &Sym2, g: &Sym2) -> f64 {
    // kappa^2 det(g) - kappa (b11 g22 + b22 g11 - 2 b12 g12) + det(b) = 0
    let a2 = sym2_det(g);
    let a1 = -(b[0] * g[2] + b[2] * g[0] - 2.0 * b[1] * g[1]);
    let a0 = sym2_det(b);
    let disc = (a1 * a1 - 4.0 * a2 * a0).max(0.0).sqrt();
    ((-a1 - disc) / (2.0 * a2)).min((-a1 + disc) / (2.0 * a2))
}

/// Symmetric cyclic tridiagonal matrix
/// (diagonal, super/sub-diagonal, and the periodic corner entry).
#[derive(Debug, Clone)]
pub struct CyclicTri {
    pub diag: Vec<f64>,
    /// off[i] couples i and i+1; off[n-1] is the corner coupling n-1 and 0.
    pub off: Vec<f64>,
}

impl CyclicTri {
    pub fn zeros(n: usize) -> Self {
        CyclicTri {
            diag: vec![0.0; n],
            off: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let ip = if i + 1 == n { 0 } else { i + 1 };
            let im = if i == 0 { n - 1 } else { i - 1 };
            y[i] = self.diag[i] * x[i] + self.off[i] * x[ip] + self.off[im] * x[im];
        }
    }

    /// y = alpha*A + beta*B entrywise (same sparsity).
    pub fn lin_comb(alpha: f64, a: &CyclicTri, beta: f64, b: &CyclicTri) -> CyclicTri {
        let n = a.len();
        let mut out = CyclicTri::zeros(n);
        for i in 0..n {
            out.diag[i] = alpha * a.diag[i] + beta * b.diag[i];
            out.off[i] = alpha * a.off[i] + beta * b.off[i];
        }
        out
    }
}

/// LU-style factorization of a cyclic tridiagonal system via the
/// Sherman-Morrison rank-one correction of a plain tridiagonal solve.
pub struct CyclicTriFactor {
    n: usize,
    // Thomas factorization of the modified (acyclic) tridiagonal matrix.
    low: Vec<f64>,
    dia: Vec<f64>,
    upp: Vec<f64>,
    /// Solution of the modified system against the correction vector u.
    z: Vec<f64>,
    /// Correction bookkeeping.
    gamma: f64,
    corner: f64,
}

impl CyclicTriFactor {
    pub fn new(m: &CyclicTri) -> Option<Self> {
        let n = m.len();
        assert!(n >= 3, "cyclic tridiagonal factor needs n >= 3");
        let corner = m.off[n - 1];
        let gamma = -m.diag[0];
        // Modified tridiagonal matrix: A' = A - u v^T with
        // u = (gamma, 0, ..., 0, corner), v = (1, 0, ..., 0, corner/gamma).
        let mut dia: Vec<f64> = m.diag.clone();
        dia[0] -= gamma;
        dia[n - 1] -= corner * corner / gamma;
        let low: Vec<f64> = m.off[..n - 1].to_vec(); // low[i] couples i and i+1
        let upp = low.clone();

        // Thomas forward elimination, stored for repeated solves.
        let mut d = vec![0.0_f64; n];
        let mut l = vec![0.0_f64; n - 1];
        d[0] = dia[0];
        if d[0] == 0.0 {
            return None;
        }
        for i in 1..n {
            l[i - 1] = low[i - 1] / d[i - 1];
            d[i] = dia[i] - l[i - 1] * upp[i - 1];
            if d[i] == 0.0 {
                return None;
            }
        }
        let mut fact = CyclicTriFactor {
            n,
            low: l,
            dia: d,
            upp,
            z: Vec::new(),
            gamma,
            corner,
        };
        let mut u = vec![0.0_f64; n];
        u[0] = gamma;
        u[n - 1] = corner;
        let mut z = vec![0.0_f64; n];
        fact.solve_modified(&u, &mut z);
        fact.z = z;
        Some(fact)
    }

    fn solve_modified(&self, rhs: &[f64], x: &mut [f64]) {
        let n = self.n;
        x[0] = rhs[0];
        for i in 1..n {
            x[i] = rhs[i] - self.low[i - 1] * x[i - 1];
        }
        x[n - 1] /= self.dia[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (x[i] - self.upp[i] * x[i + 1]) / self.dia[i];
        }
    }

    pub fn solve(&self, rhs: &[f64], x: &mut [f64]) {
        let n = self.n;
        self.solve_modified(rhs, x);
        // Sherman-Morrison correction: v = (1, 0, ..., 0, corner/gamma).
        let vx = x[0] + self.corner / self.gamma * x[n - 1];
        let vz = self.z[0] + self.corner / self.gamma * self.z[n - 1];
        let f = vx / (1.0 + vz);
        for i in 0..n {
            x[i] -= f * self.z[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_naive() {
        let xs: Vec<f64> = (0..1001).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-10);
    }

    #[test]
    fn pencil_min_identity_metric() {
        let b = [2.0, 0.5, 1.0];
        let g = [1.0, 0.0, 1.0];
        let (lo, _) = sym2_eigvals(&b);
        assert!((sym2_pencil_min(&b, &g) - lo).abs() < 1e-14);
    }

    #[test]
    fn cyclic_solve_roundtrip() {
        let n = 17;
        let mut m = CyclicTri::zeros(n);
        for i in 0..n {
            m.diag[i] = 4.0 + (i as f64 * 0.1).sin();
            m.off[i] = -1.0 + 0.05 * (i as f64).cos();
        }
        let f = CyclicTriFactor::new(&m).unwrap();
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).cos()).collect();
        let mut x = vec![0.0; n];
        f.solve(&rhs, &mut x);
        let mut back = vec![0.0; n];
        m.matvec(&x, &mut back);
        for i in 0..n {
            assert!((back[i] - rhs[i]).abs() < 1e-11, "entry {i}");
        }
    }
}
