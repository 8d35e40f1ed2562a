//! Explicit backward-in-time finite differences for the linear problem.

use alloc::vec::Vec;

use super::LinearProblem;
use crate::holder::{Field, SpatialGrid};
use crate::{Error, Result};

/// Largest state dimension the grid backend accepts.
pub const MAX_GRID_DIM: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Homogeneous Neumann, realized with mirrored ghost nodes.
    #[default]
    Neumann,
    /// Ghost value `3w₀ - 3w₁ + w₂`, exact for quadratics. Used for problems
    /// whose solutions grow at infinity (linear-quadratic games), where a
    /// zero normal derivative would be wrong.
    QuadraticExtrapolation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Transport {
    /// One-sided differences chosen by the sign of the drift; monotone.
    #[default]
    Upwind,
    /// Centered differences; second order and exact on quadratics, not
    /// monotone.
    Central,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    /// Requested time step; the solver uses the largest step `≤ dt` that
    /// divides the horizon evenly.
    pub dt: f64,
    pub boundary: Boundary,
    pub transport: Transport,
    /// Store every `save_every`-th time slice (the first and last are always
    /// stored).
    pub save_every: usize,
}

impl GridOptions {
    pub fn new(dt: f64) -> Self {
        GridOptions { dt, boundary: Boundary::Neumann, transport: Transport::Upwind, save_every: 1 }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_transport(mut self, transport: Transport) -> Self {
        self.transport = transport;
        self
    }

    pub fn saving_every(mut self, k: usize) -> Self {
        self.save_every = k.max(1);
        self
    }
}

/// Change of the solution over the horizon inside the outer 10% collar and
/// in the interior. A collar change comparable to the interior one means the
/// boundary condition is steering the solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryInfluence {
    pub collar: usize,
    pub collar_change: f64,
    pub interior_change: f64,
}

impl BoundaryInfluence {
    pub fn ratio(&self) -> f64 {
        if self.interior_change == 0.0 {
            if self.collar_change == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.collar_change / self.interior_change
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridSolution {
    pub field: Field,
    pub dt: f64,
    pub steps: usize,
    pub boundary_influence: BoundaryInfluence,
}

/// `h² / (2 N sup‖A‖)`.
pub fn stability_limit(problem: &LinearProblem<'_>, grid: &SpatialGrid) -> f64 {
    let h = grid.spacing();
    h * h / (2.0 * grid.dim() as f64 * problem.diffusion.sup_norm(problem.horizon))
}

/// Ascending time nodes stored by [`solve_grid`] on `[start, horizon]`.
pub fn solver_times(start: f64, horizon: f64, dt: f64, save_every: usize) -> Vec<f64> {
    let steps = (libm::ceil((horizon - start) / dt - 1e-9) as usize).max(1);
    let step = (horizon - start) / steps as f64;
    let save_every = save_every.max(1);
    let mut t = alloc::vec![horizon];
    for k in 0..steps {
        if (k + 1) % save_every == 0 || k + 1 == steps {
            t.push(if k + 1 == steps { start } else { horizon - (k + 1) as f64 * step });
        }
    }
    t.reverse();
    t
}

/// Neighbors of node `n` along an axis with stride `s`, ghost values from the
/// boundary rule.
#[inline]
fn neighbors(v: &[f64], n: usize, j: usize, m: usize, s: usize, bc: Boundary) -> (f64, f64, f64) {
    let c = v[n];
    let lo = if j > 0 {
        v[n - s]
    } else {
        match bc {
            Boundary::Neumann => v[n + s],
            Boundary::QuadraticExtrapolation => 3.0 * c - 3.0 * v[n + s] + v[n + 2 * s],
        }
    };
    let hi = if j + 1 < m {
        v[n + s]
    } else {
        match bc {
            Boundary::Neumann => v[n - s],
            Boundary::QuadraticExtrapolation => 3.0 * c - 3.0 * v[n - s] + v[n - 2 * s],
        }
    };
    (lo, c, hi)
}

fn central_first(grid: &SpatialGrid, v: &[f64], axis: usize, bc: Boundary, out: &mut [f64]) {
    let (m, s, h) = (grid.points(), grid.stride(axis), grid.spacing());
    crate::exec::fill(out, |n| {
        let (lo, _, hi) = neighbors(v, n, grid.axis_index(n, axis), m, s, bc);
        (hi - lo) / (2.0 * h)
    });
}

/// Solves the backward problem from `horizon` down to `start`.
pub fn solve_grid(problem: &LinearProblem<'_>, grid: &SpatialGrid, opts: &GridOptions) -> Result<GridSolution> {
    problem.validate()?;
    let dim = problem.dim();
    if grid.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: grid.dim() });
    }
    if dim > MAX_GRID_DIM {
        return Err(Error::OutOfRange { what: "grid backend dimension", value: dim as f64 });
    }
    let limit = stability_limit(problem, grid);
    if !(opts.dt > 0.0) || opts.dt > limit * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt: opts.dt, limit });
    }
    let span = problem.horizon - problem.start;
    let steps = (libm::ceil(span / opts.dt - 1e-9) as usize).max(1);
    let dt = span / steps as f64;
    let save_every = opts.save_every.max(1);

    let len = grid.len();
    let (m, h) = (grid.points(), grid.spacing());
    let bc = opts.boundary;
    let diffusion = problem.diffusion;
    let diag_static = diffusion.diagonal().iter().all(|d| d.time_slope == 0.0);
    let off: Vec<(usize, usize)> = diffusion
        .off_diagonal()
        .iter()
        .filter(|o| o.value != 0.0 || o.time_slope != 0.0)
        .map(|o| (o.i, o.j))
        .collect();

    let mut w = alloc::vec![0.0; len];
    problem.terminal.sample(problem.horizon, grid, &mut w);
    if let Some(node) = w.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { time: problem.horizon, node });
    }
    let terminal = w.clone();
    let mut next = alloc::vec![0.0; len];
    let mut saved_t = alloc::vec![problem.horizon];
    let mut saved: Vec<Vec<f64>> = alloc::vec![w.clone()];

    let drift_zero = problem.drift.is_zero();
    let mut b = if drift_zero { Vec::new() } else { alloc::vec![0.0; dim * len] };
    let mut f = alloc::vec![0.0; len];
    // a_diag[k * m + j] = A^{kk}(t, coord(j))
    let mut a_diag = alloc::vec![0.0; dim * m];
    let mut off_vals = alloc::vec![0.0; off.len()];
    let mut mixed: Vec<Vec<f64>> = off.iter().map(|_| alloc::vec![0.0; len]).collect();
    let mut d_first = if off.is_empty() { Vec::new() } else { alloc::vec![0.0; len] };

    for step in 0..steps {
        let t = problem.horizon - step as f64 * dt;
        if step == 0 || !diag_static {
            for k in 0..dim {
                for j in 0..m {
                    a_diag[k * m + j] = diffusion.diagonal()[k].eval(t, grid.coord(j));
                }
            }
        }
        for (p, o) in diffusion.off_diagonal().iter().filter(|o| o.value != 0.0 || o.time_slope != 0.0).enumerate() {
            off_vals[p] = o.eval(t);
        }
        if !drift_zero && (step == 0 || !problem.drift.is_time_independent()) {
            problem.drift.sample(t, grid, &mut b);
            if opts.transport == Transport::Upwind {
                // monotonicity of the explicit upwind step
                let rate = crate::exec::map(len, |n| {
                    (0..dim)
                        .map(|k| 2.0 * a_diag[k * m + grid.axis_index(n, k)] / (h * h) + b[k * len + n].abs() / h)
                        .sum::<f64>()
                })
                .into_iter()
                .fold(0.0, f64::max);
                if dt * rate > 1.0 + 1e-12 {
                    return Err(Error::CflViolation { dt, limit: 1.0 / rate });
                }
            }
        }
        if step == 0 || !problem.source.is_time_independent() {
            problem.source.sample(t, grid, &mut f);
        }
        for (p, &(i, j)) in off.iter().enumerate() {
            central_first(grid, &w, j, bc, &mut d_first);
            central_first(grid, &d_first, i, bc, &mut mixed[p]);
        }
        {
            let (w, b, f, a_diag, mixed, off_vals) = (&w, &b, &f, &a_diag, &mixed, &off_vals);
            let transport = opts.transport;
            crate::exec::fill(&mut next, |n| {
                let mut acc = f[n];
                for k in 0..dim {
                    let s = grid.stride(k);
                    let j = grid.axis_index(n, k);
                    let (lo, c, hi) = neighbors(w, n, j, m, s, bc);
                    acc += a_diag[k * m + j] * (hi - 2.0 * c + lo) / (h * h);
                    if !drift_zero {
                        let bk = b[k * len + n];
                        let dw = match transport {
                            Transport::Central => (hi - lo) / (2.0 * h),
                            Transport::Upwind if bk > 0.0 => (c - lo) / h,
                            Transport::Upwind => (hi - c) / h,
                        };
                        acc -= bk * dw;
                    }
                }
                for (p, mx) in mixed.iter().enumerate() {
                    acc += 2.0 * off_vals[p] * mx[n];
                }
                w[n] + dt * acc
            });
        }
        let t_new = problem.horizon - (step + 1) as f64 * dt;
        if let Some(node) = next.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { time: t_new, node });
        }
        core::mem::swap(&mut w, &mut next);
        if (step + 1) % save_every == 0 || step + 1 == steps {
            saved_t.push(if step + 1 == steps { problem.start } else { t_new });
            saved.push(w.clone());
        }
    }

    let collar = grid.collar_nodes(0.1).max(1);
    let (mut collar_change, mut interior_change) = (0.0f64, 0.0f64);
    for (n, (a, b)) in w.iter().zip(&terminal).enumerate() {
        let d = (a - b).abs();
        if grid.depth(n) < collar {
            collar_change = collar_change.max(d);
        } else {
            interior_change = interior_change.max(d);
        }
    }

    saved_t.reverse();
    saved.reverse();
    let values = saved.concat();
    let field = Field::new(grid.clone(), saved_t, values, None)?;
    Ok(GridSolution {
        field,
        dt,
        steps,
        boundary_influence: BoundaryInfluence { collar, collar_change, interior_change },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::{DiffusionSpec, ScalarFn, VectorFn};

    fn heat(m: usize, l: f64, dt_frac: f64) -> (f64, Field) {
        let a = DiffusionSpec::isotropic(1, 0.5).unwrap();
        let g = ScalarFn::Gaussian { amplitude: 1.0, center: alloc::vec![0.0], variance: 1.0 };
        let p = LinearProblem {
            diffusion: &a,
            drift: &VectorFn::Zero,
            source: &ScalarFn::Zero,
            terminal: &g,
            start: 0.0,
            horizon: 0.25,
        };
        let grid = SpatialGrid::new(1, l, m).unwrap();
        let dt = dt_frac * stability_limit(&p, &grid);
        let sol = solve_grid(&p, &grid, &GridOptions::new(dt)).unwrap();
        let mut err: f64 = 0.0;
        let s = sol.field.first_slice();
        for (n, v) in s.iter().enumerate() {
            let x = grid.coord(n);
            let exact = libm::exp(-x * x / (2.0 * 1.25)) / libm::sqrt(1.25);
            err = err.max((v - exact).abs());
        }
        (err, sol.field)
    }

    #[test]
    fn gaussian_heat_kernel() {
        let (e1, _) = heat(101, 6.0, 0.8);
        let (e2, _) = heat(201, 6.0, 0.8);
        assert!(e2 < 5e-3, "{e2}");
        assert!(libm::log2(e1 / e2) > 1.8, "{e1} {e2}");
    }

    #[test]
    fn constants_and_pure_source() {
        let a = DiffusionSpec::isotropic(2, 1.0).unwrap();
        let grid = SpatialGrid::new(2, 1.0, 11).unwrap();
        let p = LinearProblem {
            diffusion: &a,
            drift: &VectorFn::Zero,
            source: &ScalarFn::Zero,
            terminal: &ScalarFn::Constant(1.0),
            start: 0.0,
            horizon: 0.1,
        };
        let dt = stability_limit(&p, &grid);
        let sol = solve_grid(&p, &grid, &GridOptions::new(dt)).unwrap();
        assert!(sol.field.values().iter().all(|v| (v - 1.0).abs() < 1e-14));
        let p = LinearProblem { source: &ScalarFn::Constant(1.0), terminal: &ScalarFn::Zero, ..p };
        let sol = solve_grid(&p, &grid, &GridOptions::new(dt)).unwrap();
        for (k, t) in sol.field.times().iter().enumerate() {
            assert!(sol.field.slice(k).iter().all(|v| (v - (0.1 - t)).abs() < 1e-13));
        }
    }

    #[test]
    fn cfl_is_enforced() {
        let a = DiffusionSpec::isotropic(1, 0.5).unwrap();
        let grid = SpatialGrid::new(1, 1.0, 21).unwrap();
        let p = LinearProblem {
            diffusion: &a,
            drift: &VectorFn::Zero,
            source: &ScalarFn::Zero,
            terminal: &ScalarFn::Zero,
            start: 0.0,
            horizon: 0.1,
        };
        let lim = stability_limit(&p, &grid);
        assert!(matches!(solve_grid(&p, &grid, &GridOptions::new(1.5 * lim)), Err(Error::CflViolation { .. })));
        let strong = VectorFn::Constant(alloc::vec![100.0]);
        let p = LinearProblem { drift: &strong, ..p };
        assert!(matches!(solve_grid(&p, &grid, &GridOptions::new(lim)), Err(Error::CflViolation { .. })));
    }

    #[test]
    fn extrapolation_keeps_quadratics() {
        // w = ½x² + ½(T - t) solves -∂_t w - ½w'' = 0
        let a = DiffusionSpec::isotropic(1, 0.5).unwrap();
        let grid = SpatialGrid::new(1, 2.0, 21).unwrap();
        let q = ScalarFn::Quadratic { dim: 1, q: alloc::vec![1.0] };
        let p = LinearProblem {
            diffusion: &a,
            drift: &VectorFn::Zero,
            source: &ScalarFn::Zero,
            terminal: &q,
            start: 0.0,
            horizon: 0.2,
        };
        let opts = GridOptions::new(stability_limit(&p, &grid)).with_boundary(Boundary::QuadraticExtrapolation);
        let sol = solve_grid(&p, &grid, &opts).unwrap();
        for (n, v) in sol.field.first_slice().iter().enumerate() {
            let x = grid.coord(n);
            assert!((v - (0.5 * x * x + 0.5 * 0.2)).abs() < 1e-12);
        }
    }

    #[test]
    fn solver_times_match_saved_slices() {
        let a = DiffusionSpec::isotropic(1, 0.5).unwrap();
        let grid = SpatialGrid::new(1, 1.0, 11).unwrap();
        let p = LinearProblem {
            diffusion: &a,
            drift: &VectorFn::Zero,
            source: &ScalarFn::Zero,
            terminal: &ScalarFn::Zero,
            start: 0.05,
            horizon: 0.3,
        };
        for save in [1, 3] {
            let opts = GridOptions::new(0.007).saving_every(save);
            let sol = solve_grid(&p, &grid, &opts).unwrap();
            assert_eq!(sol.field.times(), &solver_times(0.05, 0.3, 0.007, save)[..]);
        }
    }
}
