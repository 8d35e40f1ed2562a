//! Forward Fokker–Planck solver
//! `∂_t ρ = Σ_{jk} D²_{jk}(A^{jk} ρ) + div(Bρ)` and the gradient-mass
//! diagnostic.
//!
//! The scheme is in flux form with zero flux through the faces of the box,
//! so mass changes only through rounding and negative-value clipping. The
//! advective flux `-Bρ` is upwinded.

use alloc::vec::Vec;

use super::{DiffusionSpec, VectorField};
use crate::holder::{Field, SpatialGrid};
use crate::stats::{fit_loglog, LineFit};
use crate::{Error, Result};

/// Largest dimension accepted by the density solver.
pub const MAX_FPK_DIM: usize = 2;

/// Allowed relative mass drift.
pub const MASS_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpkOptions {
    pub start: f64,
    pub horizon: f64,
    pub dt: f64,
    pub save_every: usize,
}

#[derive(Debug, Clone)]
pub struct FpkSolution {
    /// Density on absolute times `start..=horizon`.
    pub field: Field,
    pub start: f64,
    pub eps: f64,
    /// `h^N Σ ρ` at each stored slice.
    pub mass: Vec<f64>,
    pub max_mass_drift: f64,
    /// Total mass removed by clipping negative undershoot.
    pub clipped: f64,
    pub dt: f64,
}

/// Gaussian mollification `δ_y ⋆ η_ε` sampled and normalized to unit
/// discrete mass.
pub fn mollified_delta(grid: &SpatialGrid, y: &[f64], eps: f64) -> Vec<f64> {
    let dim = grid.dim();
    let mut x = [0.0; crate::MAX_DIM];
    let mut v: Vec<f64> = (0..grid.len())
        .map(|n| {
            grid.position(n, &mut x);
            let r2: f64 = (0..dim).map(|k| (x[k] - y[k]) * (x[k] - y[k])).sum();
            libm::exp(-0.5 * r2 / (eps * eps))
        })
        .collect();
    let mass = v.iter().sum::<f64>() * libm::pow(grid.spacing(), dim as f64);
    v.iter_mut().for_each(|r| *r /= mass);
    v
}

/// Evolves `ρ(start) = δ_y ⋆ η_ε` forward to `horizon`.
pub fn solve_fpk_grid(
    diffusion: &DiffusionSpec,
    drift: &dyn VectorField,
    y: &[f64],
    eps: f64,
    grid: &SpatialGrid,
    opts: &FpkOptions,
) -> Result<FpkSolution> {
    let dim = diffusion.dim();
    if dim > MAX_FPK_DIM {
        return Err(Error::OutOfRange { what: "density solver dimension", value: dim as f64 });
    }
    if grid.dim() != dim || y.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: grid.dim().min(y.len()) });
    }
    let h = grid.spacing();
    if !(eps >= 2.0 * h * (1.0 - 1e-12)) {
        return Err(Error::invalid("eps", alloc::format!("mollifier width {eps} is below 2h = {}", 2.0 * h)));
    }
    if !(opts.horizon > opts.start && opts.start >= 0.0) {
        return Err(Error::invalid("horizon", "need 0 <= s < T"));
    }
    diffusion.validate(opts.horizon)?;
    let limit = h * h / (2.0 * dim as f64 * diffusion.sup_norm(opts.horizon));
    if !(opts.dt > 0.0) || opts.dt > limit * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt: opts.dt, limit });
    }
    let span = opts.horizon - opts.start;
    let steps = (libm::ceil(span / opts.dt - 1e-9) as usize).max(1);
    let dt = span / steps as f64;
    let (m, len) = (grid.points(), grid.len());
    let cell = libm::pow(h, dim as f64);

    let mut rho = mollified_delta(grid, y, eps);
    let mut next = alloc::vec![0.0; len];
    let mut b = alloc::vec![0.0; dim * len];
    let mut a_diag = alloc::vec![0.0; dim * m];
    let mut grad: Vec<Vec<f64>> = if diffusion.is_diagonal() { Vec::new() } else { alloc::vec![alloc::vec![0.0; len]; dim] };
    let mut off = [[0.0; MAX_FPK_DIM]; MAX_FPK_DIM];

    let mut times = alloc::vec![opts.start];
    let mut saved = alloc::vec![rho.clone()];
    let mut mass = alloc::vec![rho.iter().sum::<f64>() * cell];
    let mut clipped = 0.0;
    let save_every = opts.save_every.max(1);

    for step in 0..steps {
        let t = opts.start + step as f64 * dt;
        if step == 0 || !drift.is_time_independent() {
            drift.sample(t, grid, &mut b);
        }
        for k in 0..dim {
            for j in 0..m {
                a_diag[k * m + j] = diffusion.diagonal()[k].eval(t, grid.coord(j));
            }
        }
        let rate = (0..len)
            .map(|n| {
                (0..dim)
                    .map(|k| 2.0 * a_diag[k * m + grid.axis_index(n, k)] / (h * h) + b[k * len + n].abs() / h)
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        if dt * rate > 1.0 + 1e-12 {
            return Err(Error::CflViolation { dt, limit: 1.0 / rate });
        }
        if !grad.is_empty() {
            for o in diffusion.off_diagonal() {
                off[o.i][o.j] = o.eval(t);
                off[o.j][o.i] = o.eval(t);
            }
            for (k, g) in grad.iter_mut().enumerate() {
                let s = grid.stride(k);
                let r = &rho;
                crate::exec::fill(g, |n| {
                    let j = grid.axis_index(n, k);
                    let hi = if j + 1 < m { r[n + s] } else { r[n] };
                    let lo = if j > 0 { r[n - s] } else { r[n] };
                    let w = if j > 0 && j + 1 < m { 2.0 } else { 1.0 };
                    (hi - lo) / (w * h)
                });
            }
        }
        {
            let (r, b, a_diag, grad, off) = (&rho, &b, &a_diag, &grad, &off);
            // flux through the face between nodes `lo` and `lo + stride` along axis k
            let face = |k: usize, jlo: usize, lo: usize| -> f64 {
                let hi = lo + grid.stride(k);
                let mut phi = (a_diag[k * m + jlo + 1] * r[hi] - a_diag[k * m + jlo] * r[lo]) / h;
                for (kk, g) in grad.iter().enumerate() {
                    if kk != k {
                        phi += off[k][kk] * 0.5 * (g[lo] + g[hi]);
                    }
                }
                let v = -0.5 * (b[k * len + lo] + b[k * len + hi]);
                phi - v * if v > 0.0 { r[lo] } else { r[hi] }
            };
            crate::exec::fill(&mut next, |n| {
                let mut acc = 0.0;
                for k in 0..dim {
                    let s = grid.stride(k);
                    let j = grid.axis_index(n, k);
                    if j + 1 < m {
                        acc += face(k, j, n);
                    }
                    if j > 0 {
                        acc -= face(k, j - 1, n - s);
                    }
                }
                r[n] + dt * acc / h
            });
        }
        for v in next.iter_mut() {
            if *v < 0.0 {
                clipped -= *v * cell;
                *v = 0.0;
            }
        }
        if let Some(node) = next.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { time: t + dt, node });
        }
        core::mem::swap(&mut rho, &mut next);
        if (step + 1) % save_every == 0 || step + 1 == steps {
            let mm = rho.iter().sum::<f64>() * cell;
            if (mm - 1.0).abs() > MASS_TOLERANCE {
                return Err(Error::MassDrift { drift: mm - 1.0 });
            }
            times.push(if step + 1 == steps { opts.horizon } else { opts.start + (step + 1) as f64 * dt });
            saved.push(rho.clone());
            mass.push(mm);
        }
    }
    let max_mass_drift = mass.iter().map(|m| (m - 1.0).abs()).fold(0.0, f64::max);
    let field = Field::new(grid.clone(), times, saved.concat(), None)?;
    Ok(FpkSolution { field, start: opts.start, eps, mass, max_mass_drift, clipped, dt })
}

#[derive(Debug, Clone)]
pub struct GradientMass {
    /// Elapsed times `t - s` of the stored slices.
    pub elapsed: Vec<f64>,
    /// `sup_k ∫ |D_k ρ(t, ·)|`.
    pub integrand: Vec<f64>,
    /// `∫_s^t sup_k ∫ |D_k ρ|`, trapezoidal in time.
    pub cumulative: Vec<f64>,
    /// Fit of `log cumulative` against `log(t - s)` on `fit_range`.
    pub fit: LineFit,
    /// `exp(intercept)`, the constant of `C (t - s)^slope`.
    pub constant: f64,
    pub fit_range: (f64, f64),
    pub fit_points: usize,
}

/// `∫ |D_k ρ|` as the discrete total variation along axis `k`.
fn gradient_mass(grid: &SpatialGrid, rho: &[f64], k: usize) -> f64 {
    let (m, s) = (grid.points(), grid.stride(k));
    let mut tv = 0.0;
    for n in 0..grid.len() {
        if grid.axis_index(n, k) + 1 < m {
            tv += (rho[n + s] - rho[n]).abs();
        }
    }
    tv * libm::pow(grid.spacing(), (grid.dim() - 1) as f64)
}

/// Gradient-mass curve of a density and its power-law fit. The default fit
/// window is `t - s ∈ [10ε², T - s]`.
pub fn fpk_gradient_mass(sol: &FpkSolution, fit_range: Option<(f64, f64)>) -> Result<GradientMass> {
    let field = &sol.field;
    let grid = field.grid();
    let elapsed: Vec<f64> = field.times().iter().map(|t| t - sol.start).collect();
    let integrand: Vec<f64> = field
        .slices()
        .map(|r| (0..grid.dim()).map(|k| gradient_mass(grid, r, k)).fold(0.0, f64::max))
        .collect();
    let mut cumulative = alloc::vec![0.0; integrand.len()];
    for i in 1..integrand.len() {
        cumulative[i] = cumulative[i - 1] + 0.5 * (integrand[i] + integrand[i - 1]) * (elapsed[i] - elapsed[i - 1]);
    }
    let range = fit_range.unwrap_or((10.0 * sol.eps * sol.eps, elapsed[elapsed.len() - 1]));
    let (xs, ys): (Vec<f64>, Vec<f64>) = elapsed
        .iter()
        .zip(&cumulative)
        .filter(|(t, c)| **t >= range.0 * (1.0 - 1e-12) && **t <= range.1 * (1.0 + 1e-12) && **c > 0.0)
        .map(|(t, c)| (*t, *c))
        .unzip();
    if xs.len() < 4 {
        return Err(Error::TooFewTimeNodes { needed: 4, found: xs.len() });
    }
    let fit = fit_loglog(&xs, &ys)?;
    Ok(GradientMass {
        constant: libm::exp(fit.intercept),
        fit,
        fit_points: xs.len(),
        fit_range: range,
        elapsed,
        integrand,
        cumulative,
    })
}

impl GradientMass {
    /// Cumulative integral at the stored time nearest to `t - s = tau`.
    pub fn cumulative_at(&self, tau: f64) -> f64 {
        let k = self
            .elapsed
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - tau).abs().total_cmp(&(b.1 - tau).abs()))
            .map_or(0, |(k, _)| k);
        self.cumulative[k]
    }
}
