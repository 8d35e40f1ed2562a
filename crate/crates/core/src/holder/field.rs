use alloc::vec::Vec;

use super::SpatialGrid;
use crate::{Error, Result, MAX_DIM};

/// A scalar function of `(t, x)` sampled on `times × grid`.
///
/// Values are stored slice by slice: `values[k * grid.len() + node]` is the
/// value at `times[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: SpatialGrid,
    times: Vec<f64>,
    values: Vec<f64>,
    player: Option<usize>,
}

impl Field {
    pub fn new(grid: SpatialGrid, times: Vec<f64>, values: Vec<f64>, player: Option<usize>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::TooFewTimeNodes { needed: 1, found: 0 });
        }
        if let Some(k) = (1..times.len()).find(|&k| !(times[k] > times[k - 1])) {
            return Err(Error::invalid("times", alloc::format!("time nodes must increase strictly (index {k})")));
        }
        if values.len() != times.len() * grid.len() {
            return Err(Error::DimensionMismatch { expected: times.len() * grid.len(), found: values.len() });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { time: times[pos / grid.len()], node: pos % grid.len() });
        }
        Ok(Field { grid, times, values, player })
    }

    /// A single time slice.
    pub fn stationary(grid: SpatialGrid, t: f64, values: Vec<f64>, player: Option<usize>) -> Result<Self> {
        Self::new(grid, alloc::vec![t], values, player)
    }

    pub fn zeros(grid: SpatialGrid, times: Vec<f64>, player: Option<usize>) -> Result<Self> {
        let n = grid.len() * times.len();
        Self::new(grid, times, alloc::vec![0.0; n], player)
    }

    /// Samples `f(t, x)` at every node.
    pub fn from_fn<F>(grid: SpatialGrid, times: Vec<f64>, player: Option<usize>, f: F) -> Result<Self>
    where
        F: Fn(f64, &[f64]) -> f64 + Sync + Send,
    {
        let len = grid.len();
        let dim = grid.dim();
        let mut values = alloc::vec![0.0; len * times.len()];
        for (k, chunk) in values.chunks_mut(len).enumerate() {
            let t = times[k];
            crate::exec::fill(chunk, |n| {
                let mut x = [0.0; MAX_DIM];
                grid.position(n, &mut x);
                f(t, &x[..dim])
            });
        }
        Self::new(grid, times, values, player)
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time_count(&self) -> usize {
        self.times.len()
    }

    pub fn player(&self) -> Option<usize> {
        self.player
    }

    pub fn with_player(mut self, player: Option<usize>) -> Self {
        self.player = player;
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        let n = self.grid.len();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn slices(&self) -> core::slice::Chunks<'_, f64> {
        self.values.chunks(self.grid.len())
    }

    pub fn last_slice(&self) -> &[f64] {
        self.slice(self.times.len() - 1)
    }

    pub fn first_slice(&self) -> &[f64] {
        self.slice(0)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn check_shape(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid || self.times != other.times {
            return Err(Error::DimensionMismatch { expected: self.values.len(), found: other.values.len() });
        }
        Ok(())
    }

    /// `self - other` on an identical grid and time axis.
    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.check_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Field { values, ..self.clone() })
    }

    /// `a·self + b·other`.
    pub fn axpby(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        self.check_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Ok(Field { values, ..self.clone() })
    }

    pub fn scale(&self, a: f64) -> Field {
        Field { values: self.values.iter().map(|v| a * v).collect(), ..self.clone() }
    }

    /// `sup |self - other|`.
    pub fn max_abs_diff(&self, other: &Field) -> Result<f64> {
        self.check_shape(other)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Index of the time node nearest to `t`.
    pub fn nearest_time(&self, t: f64) -> usize {
        let mut best = 0;
        for (k, &s) in self.times.iter().enumerate() {
            if (s - t).abs() < (self.times[best] - t).abs() {
                best = k;
            }
        }
        best
    }

    /// Multilinear interpolation in space, linear in time.
    pub fn interpolate(&self, t: f64, x: &[f64]) -> Result<f64> {
        let (t0, t1) = (self.times[0], self.times[self.times.len() - 1]);
        if !(t >= t0 - 1e-12 && t <= t1 + 1e-12) {
            return Err(Error::OutOfRange { what: "interpolation time", value: t });
        }
        if self.times.len() == 1 {
            return self.grid.interpolate(self.slice(0), x);
        }
        let k = self.times.partition_point(|&s| s <= t).clamp(1, self.times.len() - 1);
        let (a, b) = (self.times[k - 1], self.times[k]);
        let w = ((t - a) / (b - a)).clamp(0.0, 1.0);
        let va = self.grid.interpolate(self.slice(k - 1), x)?;
        if w == 0.0 {
            return Ok(va);
        }
        let vb = self.grid.interpolate(self.slice(k), x)?;
        Ok((1.0 - w) * va + w * vb)
    }

    /// Keeps only the listed time nodes.
    pub fn select_times(&self, keep: &[usize]) -> Result<Field> {
        let n = self.grid.len();
        let mut values = Vec::with_capacity(keep.len() * n);
        let mut times = Vec::with_capacity(keep.len());
        for &k in keep {
            times.push(self.times[k]);
            values.extend_from_slice(self.slice(k));
        }
        Field::new(self.grid.clone(), times, values, self.player)
    }
}

/// Bytes in the header written by [`Field::to_bytes`].
pub const FIELD_HEADER_BYTES: usize = 32;

impl Field {
    /// Flat little-endian layout: `N`, `M` (u64), `L` (f64), `K` (u64), then
    /// the `K · M^N` values slice by slice, nodes row-major. Times and the
    /// player index travel in a sidecar.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(FIELD_HEADER_BYTES + 8 * self.values.len());
        out.extend_from_slice(&(self.grid.dim() as u64).to_le_bytes());
        out.extend_from_slice(&(self.grid.points() as u64).to_le_bytes());
        out.extend_from_slice(&self.grid.half_width().to_le_bytes());
        out.extend_from_slice(&(self.times.len() as u64).to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Inverse of [`to_bytes`](Self::to_bytes).
    pub fn from_bytes(bytes: &[u8], times: Vec<f64>, player: Option<usize>) -> Result<Self> {
        let word = |k: usize| -> Result<[u8; 8]> {
            bytes
                .get(8 * k..8 * k + 8)
                .map(|b| b.try_into().expect("eight bytes"))
                .ok_or(Error::invalid("bytes", "truncated header"))
        };
        let dim = u64::from_le_bytes(word(0)?) as usize;
        let points = u64::from_le_bytes(word(1)?) as usize;
        let half_width = f64::from_le_bytes(word(2)?);
        let count = u64::from_le_bytes(word(3)?) as usize;
        if count != times.len() {
            return Err(Error::DimensionMismatch { expected: count, found: times.len() });
        }
        let grid = SpatialGrid::new(dim, half_width, points)?;
        let body = &bytes[FIELD_HEADER_BYTES..];
        if body.len() != 8 * count * grid.len() {
            return Err(Error::DimensionMismatch { expected: 8 * count * grid.len(), found: body.len() });
        }
        let values = body.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("eight bytes"))).collect();
        Field::new(grid, times, values, player)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks() {
        let g = SpatialGrid::new(1, 1.0, 5).unwrap();
        assert!(Field::new(g.clone(), alloc::vec![0.0, 0.0], alloc::vec![0.0; 10], None).is_err());
        assert!(Field::new(g.clone(), alloc::vec![0.0], alloc::vec![0.0; 4], None).is_err());
        let mut v = alloc::vec![0.0; 10];
        v[7] = f64::NAN;
        assert_eq!(
            Field::new(g.clone(), alloc::vec![0.0, 1.0], v, None),
            Err(Error::NonFinite { time: 1.0, node: 2 })
        );
    }

    #[test]
    fn space_time_interpolation() {
        let g = SpatialGrid::new(1, 1.0, 5).unwrap();
        let f = Field::from_fn(g, alloc::vec![0.0, 0.5, 1.0], Some(0), |t, x| t + 2.0 * x[0]).unwrap();
        assert!((f.interpolate(0.25, &[0.1]).unwrap() - 0.45).abs() < 1e-14);
        assert!(f.interpolate(1.5, &[0.0]).is_err());
        assert_eq!(f.nearest_time(0.6), 1);
    }

    #[test]
    fn bytes_round_trip() {
        let g = SpatialGrid::new(2, 1.5, 5).unwrap();
        let f = Field::from_fn(g, alloc::vec![0.0, 0.25], Some(1), |t, x| t - x[0] * x[1]).unwrap();
        let b = f.to_bytes();
        assert_eq!(b.len(), FIELD_HEADER_BYTES + 8 * 50);
        assert_eq!(Field::from_bytes(&b, alloc::vec![0.0, 0.25], Some(1)).unwrap(), f);
        assert!(Field::from_bytes(&b[..40], alloc::vec![0.0, 0.25], Some(1)).is_err());
        assert!(Field::from_bytes(&b, alloc::vec![0.0], Some(1)).is_err());
    }
}
