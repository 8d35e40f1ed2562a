use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::holder::SpatialGrid;
use crate::{Error, Result, MAX_DIM};

/// A scalar function of `(t, x)`.
pub trait ScalarField: Sync {
    fn eval(&self, t: f64, x: &[f64]) -> f64;

    fn is_time_independent(&self) -> bool {
        false
    }

    /// Fills `out[node]` with the value at every grid node.
    fn sample(&self, t: f64, grid: &SpatialGrid, out: &mut [f64]) {
        let dim = grid.dim();
        crate::exec::fill(out, |n| {
            let mut x = [0.0; MAX_DIM];
            grid.position(n, &mut x);
            self.eval(t, &x[..dim])
        });
    }
}

/// A vector function of `(t, x)` with one component per axis.
pub trait VectorField: Sync {
    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]);

    fn is_time_independent(&self) -> bool {
        false
    }

    /// Whether every component vanishes identically.
    fn is_zero(&self) -> bool {
        false
    }

    /// Fills `out[k * grid.len() + node]` with component `k` at every node.
    fn sample(&self, t: f64, grid: &SpatialGrid, out: &mut [f64]) {
        let dim = grid.dim();
        let len = grid.len();
        let rows = crate::exec::map(len, |n| {
            let mut x = [0.0; MAX_DIM];
            let mut b = [0.0; MAX_DIM];
            grid.position(n, &mut x);
            self.eval(t, &x[..dim], &mut b[..dim]);
            b
        });
        for (n, b) in rows.iter().enumerate() {
            for k in 0..dim {
                out[k * len + n] = b[k];
            }
        }
    }
}

/// `A^{kk}(t, x^k) = base + time_slope·t + amplitude·sin(frequency·x^k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalEntry {
    pub base: f64,
    pub time_slope: f64,
    pub amplitude: f64,
    pub frequency: f64,
}

impl DiagonalEntry {
    pub fn constant(a: f64) -> Self {
        DiagonalEntry { base: a, time_slope: 0.0, amplitude: 0.0, frequency: 0.0 }
    }

    pub fn eval(&self, t: f64, xk: f64) -> f64 {
        self.base + self.time_slope * t + self.amplitude * libm::sin(self.frequency * xk)
    }

    pub fn depends_on_x(&self) -> bool {
        self.amplitude != 0.0 && self.frequency != 0.0
    }

    fn sup_on(&self, horizon: f64) -> f64 {
        (self.base + self.time_slope * horizon).abs().max(self.base.abs()) + self.amplitude.abs()
    }

    fn inf_on(&self, horizon: f64) -> f64 {
        (self.base + self.time_slope * horizon).min(self.base) - self.amplitude.abs()
    }
}

/// `A^{ij}(t) = A^{ji}(t) = value + time_slope·t` for `i ≠ j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffDiagonal {
    pub i: usize,
    pub j: usize,
    pub value: f64,
    pub time_slope: f64,
}

impl OffDiagonal {
    pub fn eval(&self, t: f64) -> f64 {
        self.value + self.time_slope * t
    }
}

/// The diffusion matrix `A(t, x)`: diagonal entries depend on `x` only
/// through their own coordinate, off-diagonal entries only on time.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionSpec {
    diagonal: Vec<DiagonalEntry>,
    off_diagonal: Vec<OffDiagonal>,
    floor: f64,
}

impl DiffusionSpec {
    pub fn new(diagonal: Vec<DiagonalEntry>, off_diagonal: Vec<OffDiagonal>, floor: f64) -> Result<Self> {
        let n = diagonal.len();
        if n == 0 || n > MAX_DIM {
            return Err(Error::OutOfRange { what: "diffusion dimension", value: n as f64 });
        }
        if !(floor > 0.0) {
            return Err(Error::OutOfRange { what: "ellipticity floor", value: floor });
        }
        let mut seen = Vec::new();
        for o in &off_diagonal {
            if o.i == o.j || o.i >= n || o.j >= n {
                return Err(Error::invalid("off_diagonal", alloc::format!("bad entry ({}, {})", o.i, o.j)));
            }
            let key = (o.i.min(o.j), o.i.max(o.j));
            if seen.contains(&key) {
                return Err(Error::invalid("off_diagonal", alloc::format!("duplicate entry {key:?}")));
            }
            seen.push(key);
        }
        Ok(DiffusionSpec { diagonal, off_diagonal, floor })
    }

    /// `A = a·I`.
    pub fn isotropic(dim: usize, a: f64) -> Result<Self> {
        Self::new(alloc::vec![DiagonalEntry::constant(a); dim], Vec::new(), a)
    }

    /// `A = diag(σ_k² / 2)`, the generator of `dX^k = σ_k dW^k`.
    pub fn from_volatility(sigma: &[f64]) -> Result<Self> {
        let diag: Vec<DiagonalEntry> = sigma.iter().map(|s| DiagonalEntry::constant(0.5 * s * s)).collect();
        let floor = diag.iter().map(|d| d.base).fold(f64::INFINITY, f64::min);
        Self::new(diag, Vec::new(), floor)
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[DiagonalEntry] {
        &self.diagonal
    }

    pub fn off_diagonal(&self) -> &[OffDiagonal] {
        &self.off_diagonal
    }

    /// `λ`.
    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn is_diagonal(&self) -> bool {
        self.off_diagonal.iter().all(|o| o.value == 0.0 && o.time_slope == 0.0)
    }

    pub fn is_constant(&self) -> bool {
        self.off_diagonal.iter().all(|o| o.time_slope == 0.0)
            && self.diagonal.iter().all(|d| d.time_slope == 0.0 && !d.depends_on_x())
    }

    pub fn entry(&self, t: f64, x: &[f64], i: usize, j: usize) -> f64 {
        if i == j {
            return self.diagonal[i].eval(t, x[i]);
        }
        self.off_diagonal
            .iter()
            .find(|o| (o.i == i && o.j == j) || (o.i == j && o.j == i))
            .map_or(0.0, |o| o.eval(t))
    }

    pub fn matrix(&self, t: f64, x: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.entry(t, x, i, j))
    }

    /// Upper bound for `sup ‖A(t, x)‖` on `[0, horizon]` (Gershgorin).
    pub fn sup_norm(&self, horizon: f64) -> f64 {
        (0..self.dim())
            .map(|i| {
                let off: f64 = self
                    .off_diagonal
                    .iter()
                    .filter(|o| o.i == i || o.j == i)
                    .map(|o| o.value.abs().max((o.value + o.time_slope * horizon).abs()))
                    .sum();
                self.diagonal[i].sup_on(horizon) + off
            })
            .fold(0.0, f64::max)
    }

    /// `c_A = max_{1 ≤ ℓ ≤ 3} sup_k ‖(D_k)^ℓ A^{kk}‖_∞`.
    pub fn derivative_bound(&self) -> f64 {
        self.diagonal
            .iter()
            .map(|d| {
                let f = d.frequency.abs();
                d.amplitude.abs() * f.max(f * f).max(f * f * f)
            })
            .fold(0.0, f64::max)
    }

    /// Checks `A ≥ λI` through the smallest eigenvalue on a fixed
    /// sample of `(t, x)`, including the worst case of every diagonal entry.
    pub fn validate(&self, horizon: f64) -> Result<()> {
        let n = self.dim();
        for d in &self.diagonal {
            if d.inf_on(horizon) < self.floor * (1.0 - 1e-12) {
                return Err(Error::NotPositiveDefinite { time: if d.time_slope < 0.0 { horizon } else { 0.0 } });
            }
        }
        let phases = [-1.3, -0.4, 0.0, 0.7, 1.9];
        for &t in &[0.0, 0.5 * horizon, horizon] {
            for (p, &ph) in phases.iter().enumerate() {
                let mut x = [0.0; MAX_DIM];
                for (k, xk) in x[..n].iter_mut().enumerate() {
                    *xk = ph + 0.37 * (k + p) as f64;
                }
                let low = self.matrix(t, &x[..n]).symmetric_eigenvalues().min();
                if !(low >= self.floor * (1.0 - 1e-9)) {
                    return Err(Error::NotPositiveDefinite { time: t });
                }
            }
        }
        Ok(())
    }
}

/// The backward problem `-∂_t w - tr(A D²w) + ⟨B, Dw⟩ = F` on `[start, horizon]`
/// with `w(horizon) = G`.
#[derive(Clone, Copy)]
pub struct LinearProblem<'a> {
    pub diffusion: &'a DiffusionSpec,
    pub drift: &'a dyn VectorField,
    pub source: &'a dyn ScalarField,
    pub terminal: &'a dyn ScalarField,
    pub start: f64,
    pub horizon: f64,
}

impl LinearProblem<'_> {
    pub fn dim(&self) -> usize {
        self.diffusion.dim()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start >= 0.0 && self.horizon > self.start) || !self.horizon.is_finite() {
            return Err(Error::invalid("horizon", alloc::format!("need 0 <= s < T, got [{}, {}]", self.start, self.horizon)));
        }
        self.diffusion.validate(self.horizon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_floor() {
        let d = DiffusionSpec::new(
            alloc::vec![DiagonalEntry { base: 1.0, time_slope: 0.0, amplitude: 0.2, frequency: 1.0 }; 2],
            alloc::vec![OffDiagonal { i: 0, j: 1, value: 0.3, time_slope: 0.0 }],
            0.4,
        )
        .unwrap();
        assert!(d.validate(1.0).is_ok());
        assert_eq!(d.entry(0.0, &[0.0, 0.0], 1, 0), 0.3);
        assert!((d.sup_norm(1.0) - 1.5).abs() < 1e-15);
        assert!((d.derivative_bound() - 0.2).abs() < 1e-15);
        let bad = DiffusionSpec::new(
            alloc::vec![DiagonalEntry::constant(0.5); 2],
            alloc::vec![OffDiagonal { i: 0, j: 1, value: 0.45, time_slope: 0.0 }],
            0.1,
        )
        .unwrap();
        assert!(matches!(bad.validate(1.0), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn rejects_malformed_entries() {
        let diag = alloc::vec![DiagonalEntry::constant(1.0); 2];
        assert!(DiffusionSpec::new(diag.clone(), alloc::vec![OffDiagonal { i: 1, j: 1, value: 0.1, time_slope: 0.0 }], 0.5).is_err());
        assert!(DiffusionSpec::new(diag, Vec::new(), 0.0).is_err());
    }
}
