//! Immersions: a periodic grid of ambient points plus its background, with
//! the plain-text file format used by every command.
//!
//! File layout (one node per line, row-major, bit-exact round-trip):
//!
//! ```text
//! m=2
//! grid=64,64
//! background=flat:2
//! <u> <v> <x1> <y1> <x2> <y2>
//! ...
//! ```

use crate::background::SolitonBackground;
use crate::error::{Error, Result};
use crate::grid::ParamGrid;
use crate::numerics::{AVec, ZERO4};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Sphere-background nodes may drift off the unit sphere by at most this.
pub const SPHERE_NODE_TOL: f64 = 1e-8;

/// Floor for the smallest induced-metric eigenvalue (immersivity).
pub const IMMERSIVITY_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Immersion {
    grid: ParamGrid,
    background: SolitonBackground,
    points: Vec<AVec>,
}

impl Immersion {
    /// Build an immersion, validating point finiteness, intrinsic dimension
    /// against the background's complex dimension, and sphere chart fit.
    pub fn new(
        grid: ParamGrid,
        background: SolitonBackground,
        points: Vec<AVec>,
    ) -> Result<Self> {
        if grid.dim() != background.complex_dim() {
            return Err(Error::DimensionMismatch {
                expected: background.complex_dim(),
                got: grid.dim(),
            });
        }
        if points.len() != grid.nodes() {
            return Err(Error::DimensionMismatch {
                expected: grid.nodes(),
                got: points.len(),
            });
        }
        let adim = background.ambient_dim();
        for (node, p) in points.iter().enumerate() {
            for (d, c) in p.iter().enumerate() {
                if !c.is_finite() {
                    return Err(Error::NonFinitePoint { node });
                }
                if d >= adim && *c != 0.0 {
                    return Err(Error::DimensionMismatch {
                        expected: adim,
                        got: d + 1,
                    });
                }
            }
            if let SolitonBackground::RoundSphere { .. } = background {
                let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                if (r - 1.0).abs() > SPHERE_NODE_TOL {
                    return Err(Error::OffSphere {
                        node,
                        dev: (r - 1.0).abs(),
                        tol: SPHERE_NODE_TOL,
                    });
                }
            }
        }
        Ok(Immersion {
            grid,
            background,
            points,
        })
    }

    pub fn grid(&self) -> &ParamGrid {
        &self.grid
    }

    pub fn background(&self) -> &SolitonBackground {
        &self.background
    }

    pub fn points(&self) -> &[AVec] {
        &self.points
    }

    pub fn point(&self, node: usize) -> &AVec {
        &self.points[node]
    }

    /// Replace the point set, revalidating.
    pub fn with_points(&self, points: Vec<AVec>) -> Result<Self> {
        Immersion::new(self.grid, self.background, points)
    }

    /// Map every point through `map`, revalidating.
    pub fn map_points(&self, mut map: impl FnMut(&AVec) -> AVec) -> Result<Self> {
        let pts = self.points.iter().map(|p| map(p)).collect();
        self.with_points(pts)
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let adim = self.background.ambient_dim();
        writeln!(w, "m={}", self.grid.dim())?;
        if self.grid.dim() == 1 {
            writeln!(w, "grid={}", self.grid.size(0))?;
        } else {
            writeln!(w, "grid={},{}", self.grid.size(0), self.grid.size(1))?;
        }
        writeln!(w, "background={}", self.background.id())?;
        for node in 0..self.grid.nodes() {
            let c = self.grid.coords(node);
            if self.grid.dim() == 1 {
                write!(w, "{:.17e}", c[0])?;
            } else {
                write!(w, "{:.17e} {:.17e}", c[0], c[1])?;
            }
            for d in 0..adim {
                write!(w, " {:.17e}", self.points[node][d])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)?;
        Self::read_from(BufReader::new(file), &path.display().to_string())
    }

    pub fn read_from(r: impl BufRead, path: &str) -> Result<Self> {
        let perr = |line: usize, msg: String| Error::Parse {
            path: path.to_string(),
            line,
            msg,
        };
        let mut lines = r.lines().enumerate();
        let mut header = |key: &str| -> Result<String> {
            match lines.next() {
                Some((ln, Ok(text))) => {
                    let text = text.trim().to_string();
                    match text.strip_prefix(&format!("{key}=")) {
                        Some(v) => Ok(v.to_string()),
                        None => Err(perr(ln + 1, format!("expected '{key}=<value>'"))),
                    }
                }
                Some((ln, Err(e))) => Err(perr(ln + 1, e.to_string())),
                None => Err(perr(0, format!("missing header line '{key}='"))),
            }
        };
        let m: usize = header("m")?
            .parse()
            .map_err(|e| perr(1, format!("bad m: {e}")))?;
        let grid_str = header("grid")?;
        let grid = if m == 1 {
            let n: usize = grid_str
                .parse()
                .map_err(|e| perr(2, format!("bad grid: {e}")))?;
            ParamGrid::line(n)?
        } else if m == 2 {
            let (a, b) = grid_str
                .split_once(',')
                .ok_or_else(|| perr(2, "grid for m=2 needs 'n1,n2'".into()))?;
            let n1: usize = a
                .trim()
                .parse()
                .map_err(|e| perr(2, format!("bad grid: {e}")))?;
            let n2: usize = b
                .trim()
                .parse()
                .map_err(|e| perr(2, format!("bad grid: {e}")))?;
            ParamGrid::torus(n1, n2)?
        } else {
            return Err(perr(1, format!("m must be 1 or 2, got {m}")));
        };
        let background = SolitonBackground::parse_id(&header("background")?)?;
        let adim = background.ambient_dim();
        let expected_fields = m + adim;
        let mut points = vec![ZERO4; grid.nodes()];
        let mut count = 0usize;
        for (ln, line) in lines {
            let line = line.map_err(|e| perr(ln + 1, e.to_string()))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if count >= grid.nodes() {
                return Err(perr(ln + 1, "more node lines than grid nodes".into()));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != expected_fields {
                return Err(perr(
                    ln + 1,
                    format!("expected {expected_fields} fields, got {}", fields.len()),
                ));
            }
            for (d, field) in fields[m..].iter().enumerate() {
                points[count][d] = field
                    .parse()
                    .map_err(|e| perr(ln + 1, format!("bad coordinate '{field}': {e}")))?;
            }
            count += 1;
        }
        if count != grid.nodes() {
            return Err(perr(
                0,
                format!("expected {} node lines, got {count}", grid.nodes()),
            ));
        }
        Immersion::new(grid, background, points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ParamGrid;

    fn circle(r: f64, n: usize) -> Immersion {
        let grid = ParamGrid::line(n).unwrap();
        let pts = (0..n)
            .map(|i| {
                let u = i as f64 * grid.h(0);
                [r * u.cos(), r * u.sin(), 0.0, 0.0]
            })
            .collect();
        Immersion::new(grid, SolitonBackground::FlatGaussian { m: 1 }, pts).unwrap()
    }

    #[test]
    fn file_roundtrip_bit_exact() {
        let im = circle(std::f64::consts::SQRT_2, 32);
        let mut buf = Vec::new();
        im.write_to(&mut buf).unwrap();
        let back = Immersion::read_from(std::io::Cursor::new(&buf), "mem").unwrap();
        assert_eq!(im.points(), back.points());
        let mut buf2 = Vec::new();
        back.write_to(&mut buf2).unwrap();
        assert_eq!(buf, buf2, "serialized bytes must be identical");
    }

    #[test]
    fn rejects_wrong_field_count() {
        let text = "m=1\ngrid=16\nbackground=flat:1\n0.0 1.0\n";
        let err = Immersion::read_from(std::io::Cursor::new(text), "mem").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
    }

    #[test]
    fn rejects_off_sphere_nodes() {
        let grid = ParamGrid::line(16).unwrap();
        let mut pts: Vec<AVec> = (0..16)
            .map(|i| {
                let u = i as f64 * grid.h(0);
                [u.cos(), u.sin(), 0.0, 0.0]
            })
            .collect();
        pts[3][0] += 1e-6;
        let err = Immersion::new(grid, SolitonBackground::RoundSphere { f0: 1.0 }, pts)
            .unwrap_err();
        assert!(matches!(err, Error::OffSphere { node: 3, .. }), "{err}");
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let grid = ParamGrid::torus(16, 16).unwrap();
        let pts = vec![ZERO4; grid.nodes()];
        // m=2 grid on an m=1 background.
        let err = Immersion::new(grid, SolitonBackground::FlatGaussian { m: 1 }, pts)
            .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }), "{err}");
    }
}
