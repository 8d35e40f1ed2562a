//! Built-in coefficient families, closure adapters, grid-sampled fields and
//! sampled decay probes.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, Uniform};

use super::{ScalarField, VectorField};
use crate::holder::{Field, SpatialGrid};
use crate::weights::WeightSequence;
use crate::{Error, Result, MAX_DIM};

/// One-dimensional profiles with bounded derivatives of every order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// `exp(-y²/2)`.
    Gaussian,
    /// `tanh y`.
    Tanh,
    /// `cos y`.
    Cos,
}

impl Profile {
    pub fn eval(self, y: f64) -> f64 {
        match self {
            Profile::Gaussian => libm::exp(-0.5 * y * y),
            Profile::Tanh => libm::tanh(y),
            Profile::Cos => libm::cos(y),
        }
    }

    /// `max_{0 ≤ ℓ ≤ 3} sup |φ^{(ℓ)}|`.
    pub fn derivative_bound(self) -> f64 {
        match self {
            // φ''' peaks at about 1.38
            Profile::Gaussian => 1.38,
            // |tanh'''| is largest at the origin
            Profile::Tanh => 2.0,
            Profile::Cos => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarFn {
    Zero,
    Constant(f64),
    /// `x^k`.
    Coordinate(usize),
    /// `½ xᵀQx`, `Q` row-major and symmetric.
    Quadratic { dim: usize, q: Vec<f64> },
    /// `amplitude · exp(-|x - center|² / (2 variance))`.
    Gaussian { amplitude: f64, center: Vec<f64>, variance: f64 },
    /// `(1 + time_rate·t) Σ_j coeffs[j] φ(x^j)`.
    Separable { coeffs: Vec<f64>, profile: Profile, time_rate: f64 },
    /// `sin(Σ_k c_k x^k)`.
    Sine { coeffs: Vec<f64> },
}

impl ScalarFn {
    /// `c · Σ_j w_j φ(x^j)`; satisfies `‖D_j G‖_∞ ≤ c·C_φ·w_j` with no mixed
    /// derivatives.
    pub fn separable_decaying(weights: &[f64], c: f64, profile: Profile) -> Self {
        ScalarFn::Separable { coeffs: weights.iter().map(|w| c * w).collect(), profile, time_rate: 0.0 }
    }
}

impl ScalarField for ScalarFn {
    fn eval(&self, t: f64, x: &[f64]) -> f64 {
        match self {
            ScalarFn::Zero => 0.0,
            ScalarFn::Constant(c) => *c,
            ScalarFn::Coordinate(k) => x[*k],
            ScalarFn::Quadratic { dim, q } => {
                let mut s = 0.0;
                for i in 0..*dim {
                    for j in 0..*dim {
                        s += x[i] * q[i * dim + j] * x[j];
                    }
                }
                0.5 * s
            }
            ScalarFn::Gaussian { amplitude, center, variance } => {
                let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                amplitude * libm::exp(-0.5 * r2 / variance)
            }
            ScalarFn::Separable { coeffs, profile, time_rate } => {
                (1.0 + time_rate * t) * coeffs.iter().zip(x).map(|(c, y)| c * profile.eval(*y)).sum::<f64>()
            }
            ScalarFn::Sine { coeffs } => libm::sin(coeffs.iter().zip(x).map(|(c, y)| c * y).sum::<f64>()),
        }
    }

    fn is_time_independent(&self) -> bool {
        !matches!(self, ScalarFn::Separable { time_rate, .. } if *time_rate != 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum VectorFn {
    Zero,
    Constant(Vec<f64>),
    /// `B^i(x) = Σ_j C_{ij} φ(x^j)`, `C` row-major.
    Coupled { dim: usize, matrix: Vec<f64>, profile: Profile },
}

impl VectorFn {
    /// `C_{ij} = c_B β^{j - i}`, so that `‖D_j B^i‖_∞ ≤ c_B C_φ β^{j-i}`.
    pub fn coupled_decaying(beta: &WeightSequence, dim: usize, c_b: f64, profile: Profile) -> Result<Self> {
        if dim > beta.half_width() + 1 {
            return Err(Error::WindowTooSmall { needed: dim - 1, available: beta.half_width() });
        }
        let matrix = (0..dim * dim).map(|n| c_b * beta.at((n % dim) as i64 - (n / dim) as i64)).collect();
        Ok(VectorFn::Coupled { dim, matrix, profile })
    }
}

impl VectorField for VectorFn {
    fn eval(&self, _t: f64, x: &[f64], out: &mut [f64]) {
        match self {
            VectorFn::Zero => out.iter_mut().for_each(|o| *o = 0.0),
            VectorFn::Constant(b) => out.copy_from_slice(&b[..out.len()]),
            VectorFn::Coupled { dim, matrix, profile } => {
                let mut phi = [0.0; MAX_DIM];
                for j in 0..*dim {
                    phi[j] = profile.eval(x[j]);
                }
                for (i, o) in out.iter_mut().enumerate() {
                    *o = (0..*dim).map(|j| matrix[i * dim + j] * phi[j]).sum();
                }
            }
        }
    }

    fn is_time_independent(&self) -> bool {
        true
    }

    fn is_zero(&self) -> bool {
        match self {
            VectorFn::Zero => true,
            VectorFn::Constant(b) => b.iter().all(|v| *v == 0.0),
            VectorFn::Coupled { matrix, .. } => matrix.iter().all(|v| *v == 0.0),
        }
    }
}

/// Adapts a closure `(t, x) -> f64`.
pub struct FnScalar<F> {
    f: F,
    time_independent: bool,
}

impl<F: Fn(f64, &[f64]) -> f64 + Sync> FnScalar<F> {
    pub fn new(f: F) -> Self {
        FnScalar { f, time_independent: false }
    }

    pub fn stationary(f: F) -> Self {
        FnScalar { f, time_independent: true }
    }
}

impl<F: Fn(f64, &[f64]) -> f64 + Sync> ScalarField for FnScalar<F> {
    fn eval(&self, t: f64, x: &[f64]) -> f64 {
        (self.f)(t, x)
    }

    fn is_time_independent(&self) -> bool {
        self.time_independent
    }
}

/// Adapts a closure `(t, x, out)`.
pub struct FnVector<F> {
    f: F,
    time_independent: bool,
}

impl<F: Fn(f64, &[f64], &mut [f64]) + Sync> FnVector<F> {
    pub fn new(f: F) -> Self {
        FnVector { f, time_independent: false }
    }

    pub fn stationary(f: F) -> Self {
        FnVector { f, time_independent: true }
    }
}

impl<F: Fn(f64, &[f64], &mut [f64]) + Sync> VectorField for FnVector<F> {
    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.f)(t, x, out)
    }

    fn is_time_independent(&self) -> bool {
        self.time_independent
    }
}

/// A [`Field`] read as a function: exact at its own nodes and linear in
/// time between stored slices, multilinear in space elsewhere. Points
/// outside the box are clamped onto it.
pub struct SampledField<'a> {
    field: &'a Field,
}

impl<'a> SampledField<'a> {
    pub fn new(field: &'a Field) -> Self {
        SampledField { field }
    }

    /// Slice bracket and weight of the later slice for time `t`.
    pub(crate) fn bracket(times: &[f64], t: f64) -> (usize, usize, f64) {
        if times.len() == 1 || t <= times[0] {
            return (0, 0, 0.0);
        }
        let last = times.len() - 1;
        if t >= times[last] {
            return (last, last, 0.0);
        }
        let k = times.partition_point(|&s| s <= t).clamp(1, last);
        let w = (t - times[k - 1]) / (times[k] - times[k - 1]);
        (k - 1, k, w)
    }
}

impl ScalarField for SampledField<'_> {
    fn eval(&self, t: f64, x: &[f64]) -> f64 {
        let g = self.field.grid();
        let l = g.half_width();
        let mut y = [0.0; MAX_DIM];
        for (k, yk) in y[..g.dim()].iter_mut().enumerate() {
            *yk = x[k].clamp(-l, l);
        }
        let times = self.field.times();
        let t = t.clamp(times[0], times[times.len() - 1]);
        self.field.interpolate(t, &y[..g.dim()]).unwrap_or(f64::NAN)
    }

    fn sample(&self, t: f64, grid: &SpatialGrid, out: &mut [f64]) {
        if grid != self.field.grid() {
            let dim = grid.dim();
            crate::exec::fill(out, |n| {
                let mut x = [0.0; MAX_DIM];
                grid.position(n, &mut x);
                self.eval(t, &x[..dim])
            });
            return;
        }
        let (a, b, w) = Self::bracket(self.field.times(), t);
        let (sa, sb) = (self.field.slice(a), self.field.slice(b));
        if w == 0.0 {
            out.copy_from_slice(sa);
        } else {
            crate::exec::fill(out, |n| (1.0 - w) * sa[n] + w * sb[n]);
        }
    }
}

fn random_points(dim: usize, half_width: f64, count: usize, seed: u64) -> Vec<[f64; MAX_DIM]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = Uniform::new_inclusive(-half_width, half_width).expect("finite half-width");
    (0..count)
        .map(|_| {
            let mut x = [0.0; MAX_DIM];
            for xk in x[..dim].iter_mut() {
                *xk = u.sample(&mut rng);
            }
            x
        })
        .collect()
}

const PROBE_STEP: f64 = 1e-4;

/// Largest sampled `|D_j f(t, x)| / w_j` over `count` seeded random points
/// of `[-L, L]^N`, by central differences.
pub fn probe_scalar_decay(
    f: &dyn ScalarField,
    weights: &[f64],
    t: f64,
    half_width: f64,
    count: usize,
    seed: u64,
) -> f64 {
    let dim = weights.len();
    let mut worst: f64 = 0.0;
    for mut x in random_points(dim, half_width, count, seed) {
        for j in 0..dim {
            let x0 = x[j];
            x[j] = x0 + PROBE_STEP;
            let fp = f.eval(t, &x[..dim]);
            x[j] = x0 - PROBE_STEP;
            let fm = f.eval(t, &x[..dim]);
            x[j] = x0;
            worst = worst.max(((fp - fm) / (2.0 * PROBE_STEP)).abs() / weights[j]);
        }
    }
    worst
}

/// Largest sampled `|D_j B^i(t, x)| / β^{j-i}`.
pub fn probe_vector_decay(
    b: &dyn VectorField,
    beta: &WeightSequence,
    dim: usize,
    t: f64,
    half_width: f64,
    count: usize,
    seed: u64,
) -> Result<f64> {
    if dim > beta.half_width() + 1 {
        return Err(Error::WindowTooSmall { needed: dim - 1, available: beta.half_width() });
    }
    let mut worst: f64 = 0.0;
    let (mut bp, mut bm) = ([0.0; MAX_DIM], [0.0; MAX_DIM]);
    for mut x in random_points(dim, half_width, count, seed) {
        for j in 0..dim {
            let x0 = x[j];
            x[j] = x0 + PROBE_STEP;
            b.eval(t, &x[..dim], &mut bp[..dim]);
            x[j] = x0 - PROBE_STEP;
            b.eval(t, &x[..dim], &mut bm[..dim]);
            x[j] = x0;
            for i in 0..dim {
                let d = ((bp[i] - bm[i]) / (2.0 * PROBE_STEP)).abs();
                worst = worst.max(d / beta.at(j as i64 - i as i64));
            }
        }
    }
    Ok(worst)
}

/// Checks a sampled decay constant against its declared value with 10%
/// slack.
pub fn check_decay(measured: f64, declared: f64) -> Result<()> {
    if measured > 1.1 * declared {
        return Err(Error::invalid(
            "decay",
            alloc::format!("sampled decay constant {measured:.4e} exceeds the declared {declared:.4e}"),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightKind;

    #[test]
    fn quadratic_and_gaussian() {
        let q = ScalarFn::Quadratic { dim: 2, q: alloc::vec![2.0, 1.0, 1.0, 4.0] };
        assert!((q.eval(0.0, &[1.0, -1.0]) - 0.5 * (2.0 - 2.0 + 4.0)).abs() < 1e-15);
        let g = ScalarFn::Gaussian { amplitude: 1.0, center: alloc::vec![0.0], variance: 1.0 };
        assert_eq!(g.eval(0.0, &[0.0]), 1.0);
    }

    #[test]
    fn built_in_families_pass_their_probes() {
        let beta = WeightSequence::build(WeightKind::Polynomial { exponent: 3.0 }, 16).unwrap();
        let b = VectorFn::coupled_decaying(&beta, 3, 0.5, Profile::Tanh).unwrap();
        let measured = probe_vector_decay(&b, &beta, 3, 0.0, 3.0, 100, 7).unwrap();
        assert!(measured <= 0.5 * 1.0001);
        check_decay(measured, 0.5).unwrap();
        let w = beta.shift(0, 3).unwrap();
        let g = ScalarFn::separable_decaying(&w, 2.0, Profile::Cos);
        let measured = probe_scalar_decay(&g, &w, 0.0, 3.0, 100, 7);
        check_decay(measured, 2.0).unwrap();
        assert!(check_decay(2.5, 2.0).is_err());
    }

    #[test]
    fn sampled_field_is_exact_on_nodes() {
        let g = SpatialGrid::new(1, 1.0, 5).unwrap();
        let f = Field::from_fn(g.clone(), alloc::vec![0.0, 1.0], None, |t, x| t * x[0]).unwrap();
        let s = SampledField::new(&f);
        let mut out = alloc::vec![0.0; 5];
        s.sample(0.5, &g, &mut out);
        assert_eq!(out, alloc::vec![-0.5, -0.25, 0.0, 0.25, 0.5]);
        assert_eq!(s.eval(1.0, &[3.0]), 1.0);
    }
}
