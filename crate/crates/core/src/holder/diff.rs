//! Finite-difference realization of `D^α`.
//!
//! Each axis derivative of order `m` uses a second-order stencil: 3 points
//! centered for `m ≤ 2`, 5 points centered for `m = 3`, and a one-sided
//! window of `m + 2` points where the centered stencil does not fit. Mixed
//! derivatives are composed in ascending axis order.

use alloc::vec::Vec;

use super::{Field, SpatialGrid};
use crate::weights::MultiIndex;
use crate::{Error, Result};

/// Fornberg weights for the `order`-th derivative at `x0` from nodes `z`.
pub fn fornberg_weights(x0: f64, z: &[f64], order: usize) -> Vec<f64> {
    let n = z.len();
    let mut c = alloc::vec![alloc::vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = z[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = z[i] - x0;
        for j in 0..i {
            let c3 = z[i] - z[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c.swap_remove(order)
}

/// Half-width of the centered stencil for a derivative order.
fn centered_reach(order: usize) -> usize {
    if order >= 3 {
        2
    } else {
        1
    }
}

/// Precomputed stencils for one derivative order along one axis.
#[derive(Debug, Clone)]
pub struct AxisStencil {
    order: usize,
    starts: Vec<usize>,
    weights: Vec<Vec<f64>>,
    one_sided: Vec<bool>,
}

impl AxisStencil {
    pub fn new(points: usize, h: f64, order: usize) -> Result<Self> {
        if order == 0 || order > 3 {
            return Err(Error::OrderTooHigh { order });
        }
        let reach = centered_reach(order);
        let side = order + 2;
        if points < side.max(2 * reach + 1) {
            return Err(Error::GridTooSmall { points, needed: side.max(2 * reach + 1) });
        }
        let mut starts = Vec::with_capacity(points);
        let mut weights = Vec::with_capacity(points);
        let mut one_sided = Vec::with_capacity(points);
        let scale = libm::pow(h, -(order as f64));
        for j in 0..points {
            let (start, len, os) = if j >= reach && j + reach < points {
                (j - reach, 2 * reach + 1, false)
            } else {
                let start = j.saturating_sub(side / 2).min(points - side);
                (start, side, true)
            };
            let z: Vec<f64> = (0..len).map(|q| (start + q) as f64 - j as f64).collect();
            let w = fornberg_weights(0.0, &z, order).into_iter().map(|c| c * scale).collect();
            starts.push(start);
            weights.push(w);
            one_sided.push(os);
        }
        Ok(AxisStencil { order, starts, weights, one_sided })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_one_sided(&self, j: usize) -> bool {
        self.one_sided[j]
    }

    /// Applies the stencil along `axis` of a node array.
    pub fn apply(&self, grid: &SpatialGrid, axis: usize, input: &[f64], out: &mut [f64]) {
        let stride = grid.stride(axis);
        crate::exec::fill(out, |n| {
            let j = grid.axis_index(n, axis);
            let base = n - j * stride + self.starts[j] * stride;
            self.weights[j].iter().enumerate().map(|(q, w)| w * input[base + q * stride]).sum()
        });
    }
}

/// Stencils for orders 1 to 3 on one grid, shared by all axes.
#[derive(Debug, Clone)]
pub struct Differentiator {
    grid: SpatialGrid,
    stencils: [AxisStencil; 3],
}

impl Differentiator {
    pub fn new(grid: &SpatialGrid) -> Result<Self> {
        let (m, h) = (grid.points(), grid.spacing());
        Ok(Differentiator {
            grid: grid.clone(),
            stencils: [AxisStencil::new(m, h, 1)?, AxisStencil::new(m, h, 2)?, AxisStencil::new(m, h, 3)?],
        })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn stencil(&self, order: usize) -> &AxisStencil {
        &self.stencils[order - 1]
    }

    fn check(&self, alpha: &MultiIndex) -> Result<()> {
        if let Some(c) = alpha.max_coord() {
            if c >= self.grid.dim() {
                return Err(Error::DimensionMismatch { expected: self.grid.dim(), found: c + 1 });
            }
        }
        Ok(())
    }

    /// `D^α` of one node array.
    pub fn apply(&self, values: &[f64], alpha: &MultiIndex) -> Result<Vec<f64>> {
        self.check(alpha)?;
        if values.len() != self.grid.len() {
            return Err(Error::DimensionMismatch { expected: self.grid.len(), found: values.len() });
        }
        let mut cur = values.to_vec();
        let mut next = alloc::vec![0.0; values.len()];
        for (axis, m) in alpha.entries() {
            self.stencil(m).apply(&self.grid, axis, &cur, &mut next);
            core::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// First derivative along one axis.
    pub fn partial(&self, values: &[f64], axis: usize, out: &mut [f64]) {
        self.stencils[0].apply(&self.grid, axis, values, out);
    }

    /// Whether any factor of `D^α` used a one-sided stencil at `node`.
    pub fn boundary_affected(&self, node: usize, alpha: &MultiIndex) -> bool {
        alpha
            .entries()
            .into_iter()
            .any(|(axis, m)| self.stencil(m).is_one_sided(self.grid.axis_index(node, axis)))
    }
}

/// `D^α` applied to every time slice of a field.
pub fn finite_diff(field: &Field, alpha: &MultiIndex) -> Result<Field> {
    let d = Differentiator::new(field.grid())?;
    let mut values = Vec::with_capacity(field.values().len());
    for s in field.slices() {
        values.extend(d.apply(s, alpha)?);
    }
    Field::new(field.grid().clone(), field.times().to_vec(), values, field.player())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fornberg_classic_weights() {
        let w = fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(w, alloc::vec![1.0, -2.0, 1.0]);
        let w = fornberg_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 3);
        for (a, b) in w.iter().zip([-0.5, 1.0, 0.0, -1.0, 0.5]) {
            assert!((a - b).abs() < 1e-14);
        }
        let w = fornberg_weights(0.0, &[0.0, 1.0, 2.0], 1);
        for (a, b) in w.iter().zip([-1.5, 2.0, -0.5]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn linear_and_bilinear_are_exact() {
        let g = SpatialGrid::new(2, 1.0, 9).unwrap();
        let f = Field::from_fn(g.clone(), alloc::vec![0.0], None, |_, x| x[0]).unwrap();
        let d = finite_diff(&f, &MultiIndex::unit(0)).unwrap();
        assert!(d.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
        let f = Field::from_fn(g, alloc::vec![0.0], None, |_, x| x[0] * x[1]).unwrap();
        let d = finite_diff(&f, &MultiIndex::new(&[0, 1]).unwrap()).unwrap();
        assert!(d.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn third_derivative_of_sine() {
        let err = |m: usize| {
            let g = SpatialGrid::new(1, 1.0, m).unwrap();
            let f = Field::from_fn(g.clone(), alloc::vec![0.0], None, |_, x| libm::sin(x[0])).unwrap();
            let d = finite_diff(&f, &MultiIndex::new(&[0, 0, 0]).unwrap()).unwrap();
            (d.slice(0)[g.origin()] + 1.0).abs()
        };
        let (e1, e2) = (err(21), err(41));
        assert!(e1 < 1e-2);
        assert!(libm::log2(e1 / e2) > 1.9);
    }

    #[test]
    fn boundary_flags() {
        let g = SpatialGrid::new(1, 1.0, 9).unwrap();
        let d = Differentiator::new(&g).unwrap();
        let a3 = MultiIndex::new(&[0, 0, 0]).unwrap();
        assert!(d.boundary_affected(1, &a3));
        assert!(!d.boundary_affected(2, &a3));
        assert!(!d.boundary_affected(1, &MultiIndex::unit(0)));
        assert!(d.boundary_affected(0, &MultiIndex::unit(0)));
    }
}
