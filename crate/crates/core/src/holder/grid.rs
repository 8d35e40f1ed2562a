use alloc::vec::Vec;

use crate::{Error, Result, MAX_DIM};

/// Default cap on `M^N`.
pub const DEFAULT_NODE_BUDGET: usize = 16_000_000;

/// Uniform tensor grid on `[-L, L]^N` with `M` (odd) points per axis. Nodes
/// are numbered row-major with axis 0 varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    dim: usize,
    half_width: f64,
    points: usize,
    h: f64,
    strides: Vec<usize>,
    len: usize,
}

impl SpatialGrid {
    pub fn new(dim: usize, half_width: f64, points: usize) -> Result<Self> {
        Self::with_budget(dim, half_width, points, DEFAULT_NODE_BUDGET)
    }

    pub fn with_budget(dim: usize, half_width: f64, points: usize, budget: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::OutOfRange { what: "grid dimension", value: dim as f64 });
        }
        if points < 5 {
            return Err(Error::GridTooSmall { points, needed: 5 });
        }
        if points.is_multiple_of(2) {
            return Err(Error::invalid("M", "points per axis must be odd so the origin is a node"));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::OutOfRange { what: "grid half-width", value: half_width });
        }
        let mut len: usize = 1;
        for _ in 0..dim {
            len = len
                .checked_mul(points)
                .filter(|&n| n <= budget)
                .ok_or(Error::MemoryBudget { nodes: usize::MAX, budget })?;
        }
        let strides = (0..dim).map(|k| points.pow((dim - 1 - k) as u32)).collect();
        Ok(SpatialGrid {
            dim,
            half_width,
            points,
            h: 2.0 * half_width / (points - 1) as f64,
            strides,
            len,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `L`.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// `M`.
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Total node count `M^N`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    /// Coordinate of the `k`-th point along any axis.
    pub fn coord(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.h
    }

    /// Index along `axis` of a flat node number.
    pub fn axis_index(&self, node: usize, axis: usize) -> usize {
        (node / self.strides[axis]) % self.points
    }

    pub fn node(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    /// Writes the coordinates of `node` into `x[..dim]`.
    pub fn position(&self, node: usize, x: &mut [f64]) {
        for (k, xk) in x[..self.dim].iter_mut().enumerate() {
            *xk = self.coord(self.axis_index(node, k));
        }
    }

    pub fn origin(&self) -> usize {
        let c = self.points / 2;
        self.strides.iter().map(|s| c * s).sum()
    }

    /// Distance, in nodes, from `node` to the nearest face of the box.
    pub fn depth(&self, node: usize) -> usize {
        (0..self.dim)
            .map(|k| {
                let i = self.axis_index(node, k);
                i.min(self.points - 1 - i)
            })
            .min()
            .unwrap_or(0)
    }

    /// Number of nodes in a boundary collar covering `fraction` of the
    /// half-width on every face.
    pub fn collar_nodes(&self, fraction: f64) -> usize {
        libm::ceil(fraction * (self.points - 1) as f64 / 2.0 - 1e-9).max(0.0) as usize
    }

    /// Cell containing `x` along one axis and the local coordinate in it, or
    /// `None` outside the box.
    pub fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let s = (x + self.half_width) / self.h;
        if !(s >= -1e-12 && s <= (self.points - 1) as f64 + 1e-12) {
            return None;
        }
        let i = (libm::floor(s) as usize).min(self.points - 2);
        Some((i, (s - i as f64).clamp(0.0, 1.0)))
    }

    /// Same grid in another dimension.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Self::new(dim, self.half_width, self.points)
    }

    /// Multilinear interpolation of a node array at `x`.
    pub fn interpolate(&self, values: &[f64], x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        let mut base = 0usize;
        let mut frac = [0.0; MAX_DIM];
        for k in 0..self.dim {
            let (i, f) = self.locate(x[k]).ok_or(Error::OutOfRange { what: "interpolation point", value: x[k] })?;
            base += i * self.strides[k];
            frac[k] = f;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << self.dim) {
            let mut w = 1.0;
            let mut node = base;
            for k in 0..self.dim {
                if corner >> k & 1 == 1 {
                    w *= frac[k];
                    node += self.strides[k];
                } else {
                    w *= 1.0 - frac[k];
                }
            }
            if w != 0.0 {
                acc += w * values[node];
            }
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let g = SpatialGrid::new(3, 2.0, 5).unwrap();
        assert_eq!(g.len(), 125);
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.stride(0), 25);
        let n = g.node(&[1, 2, 3]);
        assert_eq!((g.axis_index(n, 0), g.axis_index(n, 1), g.axis_index(n, 2)), (1, 2, 3));
        let mut x = [0.0; 3];
        g.position(g.origin(), &mut x);
        assert_eq!(x, [0.0; 3]);
        assert_eq!(g.depth(n), 1);
    }

    #[test]
    fn rejects_bad_grids() {
        assert_eq!(SpatialGrid::new(1, 1.0, 3), Err(Error::GridTooSmall { points: 3, needed: 5 }));
        assert!(SpatialGrid::new(1, 1.0, 6).is_err());
        assert!(matches!(SpatialGrid::with_budget(3, 1.0, 101, 1000), Err(Error::MemoryBudget { .. })));
    }

    #[test]
    fn interpolation_is_exact_on_multilinear() {
        let g = SpatialGrid::new(2, 1.0, 5).unwrap();
        let mut v = alloc::vec![0.0; g.len()];
        let mut x = [0.0; 2];
        for (n, val) in v.iter_mut().enumerate() {
            g.position(n, &mut x);
            *val = 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[1];
        }
        let p = [0.3, -0.71];
        let exact = 1.0 + 0.6 + 0.71 + 0.5 * 0.3 * -0.71;
        assert!((g.interpolate(&v, &p).unwrap() - exact).abs() < 1e-14);
        assert!(g.interpolate(&v, &[1.5, 0.0]).is_err());
    }
}
