//! Feynman–Kac Monte Carlo for the linear problem.
//!
//! `w(s, x) = E[G(X_T) + ∫_s^T F(t, X_t) dt]` with
//! `dX = -B(t, X) dt + σ(t, X) dW`, `σσᵀ = 2A`, discretized by
//! Euler–Maruyama. Path `p` of query `q` draws from its own ChaCha stream,
//! so estimates do not depend on how paths are scheduled.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use super::LinearProblem;
use crate::{Error, Result, MAX_DIM};

/// Smallest accepted path count.
pub const MIN_PATHS: usize = 1000;

/// 97.5% standard normal quantile.
const Z975: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    pub paths: usize,
    pub dt: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McQuery {
    pub t: f64,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_dev: f64,
    /// 95% confidence half-width `1.96 sd / √P`.
    pub half_width: f64,
    pub paths: usize,
}

/// Running mean and variance (Welford).
#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn estimate(&self) -> McEstimate {
        let var = if self.n > 1 { self.m2 / (self.n - 1) as f64 } else { 0.0 };
        let sd = libm::sqrt(var.max(0.0));
        McEstimate { value: self.mean, std_dev: sd, half_width: Z975 * sd / libm::sqrt(self.n as f64), paths: self.n }
    }
}

/// Volatility factor: diagonal when `A` is, Cholesky of `2A` otherwise.
enum Vol {
    Diagonal,
    Full,
}

fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One Euler–Maruyama payoff from `(t0, x0)`; the `rng` stream fixes the
/// Brownian increments.
fn payoff(problem: &LinearProblem<'_>, t0: f64, x0: &[f64], dt_req: f64, vol: &Vol, rng: &mut ChaCha8Rng) -> Result<f64> {
    let dim = problem.dim();
    let span = problem.horizon - t0;
    let steps = (libm::ceil(span / dt_req - 1e-9) as usize).max(1);
    let dt = span / steps as f64;
    let sq = libm::sqrt(dt);
    let mut x = [0.0; MAX_DIM];
    x[..dim].copy_from_slice(x0);
    let mut b = [0.0; MAX_DIM];
    let mut z = [0.0; MAX_DIM];
    let mut running = 0.0;
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        running += problem.source.eval(t, &x[..dim]) * dt;
        problem.drift.eval(t, &x[..dim], &mut b[..dim]);
        for zk in z[..dim].iter_mut() {
            *zk = StandardNormal.sample(rng);
        }
        match vol {
            Vol::Diagonal => {
                for i in 0..dim {
                    let a = problem.diffusion.diagonal()[i].eval(t, x[i]);
                    x[i] += -b[i] * dt + libm::sqrt(2.0 * a) * sq * z[i];
                }
            }
            Vol::Full => {
                let l = (problem.diffusion.matrix(t, &x[..dim]) * 2.0)
                    .cholesky()
                    .ok_or(Error::NotPositiveDefinite { time: t })?
                    .l();
                let mut dx = [0.0; MAX_DIM];
                for i in 0..dim {
                    dx[i] = -b[i] * dt + (0..=i).map(|j| l[(i, j)] * z[j]).sum::<f64>() * sq;
                }
                for i in 0..dim {
                    x[i] += dx[i];
                }
            }
        }
    }
    Ok(problem.terminal.eval(problem.horizon, &x[..dim]) + running)
}

fn check(problem: &LinearProblem<'_>, opts: &McOptions) -> Result<Vol> {
    problem.validate()?;
    if opts.paths < MIN_PATHS {
        return Err(Error::invalid("paths", alloc::format!("need at least {MIN_PATHS} paths, got {}", opts.paths)));
    }
    if !(opts.dt > 0.0) || opts.dt > problem.horizon - problem.start {
        return Err(Error::OutOfRange { what: "Monte Carlo time step", value: opts.dt });
    }
    let dim = problem.dim();
    let two_a: DMatrix<f64> = problem.diffusion.matrix(problem.start, &[0.0; MAX_DIM][..dim]) * 2.0;
    if two_a.cholesky().is_none() {
        return Err(Error::NotPositiveDefinite { time: problem.start });
    }
    Ok(if problem.diffusion.is_diagonal() { Vol::Diagonal } else { Vol::Full })
}

fn check_query(problem: &LinearProblem<'_>, q: &McQuery) -> Result<()> {
    if q.x.len() != problem.dim() {
        return Err(Error::DimensionMismatch { expected: problem.dim(), found: q.x.len() });
    }
    if !(q.t >= problem.start && q.t < problem.horizon) {
        return Err(Error::OutOfRange { what: "query time", value: q.t });
    }
    Ok(())
}

/// Estimates `w(t, x)` at each query with a 95% confidence half-width.
pub fn solve_mc(problem: &LinearProblem<'_>, queries: &[McQuery], opts: &McOptions) -> Result<Vec<McEstimate>> {
    let vol = check(problem, opts)?;
    let mut out = Vec::with_capacity(queries.len());
    for (qi, q) in queries.iter().enumerate() {
        check_query(problem, q)?;
        let samples = crate::exec::map(opts.paths, |p| {
            let mut rng = path_rng(opts.seed, ((qi as u64) << 40) | p as u64);
            payoff(problem, q.t, &q.x, opts.dt, &vol, &mut rng)
        });
        let mut acc = Welford::default();
        for s in samples {
            acc.push(s?);
        }
        out.push(acc.estimate());
    }
    Ok(out)
}

/// Central-difference estimate of `D_axis w(t, x)` with common random
/// numbers: the `+` and `-` paths share every Brownian increment.
pub fn mc_partial(
    problem: &LinearProblem<'_>,
    query: &McQuery,
    axis: usize,
    bump: f64,
    opts: &McOptions,
) -> Result<McEstimate> {
    let vol = check(problem, opts)?;
    check_query(problem, query)?;
    if axis >= problem.dim() || !(bump > 0.0) {
        return Err(Error::invalid("axis", "bad axis or bump"));
    }
    let samples = crate::exec::map(opts.paths, |p| -> Result<f64> {
        let (mut xp, mut xm) = (query.x.clone(), query.x.clone());
        xp[axis] += bump;
        xm[axis] -= bump;
        let up = payoff(problem, query.t, &xp, opts.dt, &vol, &mut path_rng(opts.seed, p as u64))?;
        let dn = payoff(problem, query.t, &xm, opts.dt, &vol, &mut path_rng(opts.seed, p as u64))?;
        Ok((up - dn) / (2.0 * bump))
    });
    let mut acc = Welford::default();
    for s in samples {
        acc.push(s?);
    }
    Ok(acc.estimate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::{DiffusionSpec, ScalarFn, VectorFn};

    fn problem<'a>(a: &'a DiffusionSpec, g: &'a ScalarFn) -> LinearProblem<'a> {
        LinearProblem { diffusion: a, drift: &VectorFn::Zero, source: &ScalarFn::Zero, terminal: g, start: 0.0, horizon: 0.25 }
    }

    #[test]
    fn martingale_and_constant_payoffs() {
        let a = DiffusionSpec::isotropic(1, 0.5).unwrap();
        let g = ScalarFn::Coordinate(0);
        let opts = McOptions { paths: 4000, dt: 0.05, seed: 3 };
        let q = [McQuery { t: 0.0, x: alloc::vec![0.0] }];
        let e = solve_mc(&problem(&a, &g), &q, &opts).unwrap()[0];
        assert!(e.value.abs() <= 3.0 * e.half_width);
        let c = ScalarFn::Constant(2.5);
        let e = solve_mc(&problem(&a, &c), &q, &opts).unwrap()[0];
        assert_eq!((e.value, e.half_width), (2.5, 0.0));
    }

    #[test]
    fn preconditions() {
        let a = DiffusionSpec::isotropic(1, 0.5).unwrap();
        let g = ScalarFn::Zero;
        let q = [McQuery { t: 0.0, x: alloc::vec![0.0] }];
        assert!(solve_mc(&problem(&a, &g), &q, &McOptions { paths: 10, dt: 0.05, seed: 0 }).is_err());
        assert!(solve_mc(&problem(&a, &g), &q, &McOptions { paths: 1000, dt: 0.0, seed: 0 }).is_err());
    }

    #[test]
    fn common_random_numbers_recover_a_linear_gradient() {
        let a = DiffusionSpec::isotropic(2, 0.5).unwrap();
        let g = ScalarFn::Quadratic { dim: 2, q: alloc::vec![1.0, 0.0, 0.0, 1.0] };
        let q = McQuery { t: 0.0, x: alloc::vec![0.3, -0.2] };
        let e = mc_partial(&problem(&a, &g), &q, 0, 1e-3, &McOptions { paths: 2000, dt: 0.05, seed: 1 }).unwrap();
        // each path contributes X_T^0, whose mean is x^0
        assert!((e.value - 0.3).abs() <= 3.0 * e.half_width, "{e:?}");
        assert!(e.half_width < 0.05);
    }
}
