//! Periodic parameter grids on the flat torus [0, 2*pi)^m, m = 1 or 2.

use crate::error::{Error, Result};
use std::f64::consts::TAU;

pub const MIN_NODES_PER_DIR: usize = 16;

/// Uniform periodic grid. Nodes are stored row-major: node = i * n2 + j for
/// m = 2, plain index for m = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamGrid {
    m: usize,
    n: [usize; 2],
}

impl ParamGrid {
    pub fn line(n: usize) -> Result<Self> {
        if n < MIN_NODES_PER_DIR {
            return Err(Error::GridTooSmall {
                min: MIN_NODES_PER_DIR,
                got: n,
            });
        }
        Ok(ParamGrid { m: 1, n: [n, 1] })
    }

    pub fn torus(n1: usize, n2: usize) -> Result<Self> {
        if n1.min(n2) < MIN_NODES_PER_DIR {
            return Err(Error::GridTooSmall {
                min: MIN_NODES_PER_DIR,
                got: n1.min(n2),
            });
        }
        Ok(ParamGrid { m: 2, n: [n1, n2] })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn size(&self, dir: usize) -> usize {
        self.n[dir]
    }

    pub fn nodes(&self) -> usize {
        self.n[0] * self.n[1]
    }

    /// Grid spacing 2*pi / n_dir.
    pub fn h(&self, dir: usize) -> f64 {
        TAU / self.n[dir] as f64
    }

    pub fn h_min(&self) -> f64 {
        if self.m == 1 {
            self.h(0)
        } else {
            self.h(0).min(self.h(1))
        }
    }

    /// Cell measure h1 * h2 (h for curves).
    pub fn cell(&self) -> f64 {
        if self.m == 1 {
            self.h(0)
        } else {
            self.h(0) * self.h(1)
        }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n[1] + j
    }

    #[inline]
    pub fn split(&self, node: usize) -> (usize, usize) {
        (node / self.n[1], node % self.n[1])
    }

    /// Parameter coordinates of a node.
    pub fn coords(&self, node: usize) -> [f64; 2] {
        let (i, j) = self.split(node);
        [i as f64 * self.h(0), if self.m == 2 { j as f64 * self.h(1) } else { 0.0 }]
    }

    /// Node shifted by `off` steps along `dir`, wrapping periodically.
    #[inline]
    pub fn shift(&self, node: usize, dir: usize, off: isize) -> usize {
        let (i, j) = self.split(node);
        let n = self.n[dir] as isize;
        let wrapped = |base: usize| -> usize {
            let mut v = base as isize + off;
            v = v.rem_euclid(n);
            v as usize
        };
        if dir == 0 {
            self.index(wrapped(i), j)
        } else {
            self.index(i, wrapped(j))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_arithmetic() {
        let g = ParamGrid::torus(16, 32).unwrap();
        let node = g.index(0, 31);
        assert_eq!(g.shift(node, 1, 1), g.index(0, 0));
        assert_eq!(g.shift(node, 0, -1), g.index(15, 31));
        assert_eq!(g.shift(node, 1, -33), g.index(0, 30));
    }

    #[test]
    fn too_small_rejected() {
        assert!(ParamGrid::line(8).is_err());
        assert!(ParamGrid::torus(16, 8).is_err());
    }

    #[test]
    fn coords_and_spacing() {
        let g = ParamGrid::line(16).unwrap();
        assert!((g.h(0) - TAU / 16.0).abs() < 1e-15);
        assert_eq!(g.coords(4)[0], 4.0 * g.h(0));
    }
}
