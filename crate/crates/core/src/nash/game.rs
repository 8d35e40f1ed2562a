use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{Hamiltonian, MomentumCost, SeparableHamiltonian};
use crate::holder::SpatialGrid;
use crate::lq::{Layout, LqGameSpec};
use crate::pde::{solver_times, DiffusionSpec, GridOptions, ScalarField, ScalarFn, MAX_GRID_DIM};
use crate::weights::WeightSequence;
use crate::{Error, Result, MAX_DIM};

/// An `N`-player Nash system on `[0, T]`, discretized on a grid.
#[derive(Clone)]
pub struct GameSpec {
    pub diffusion: DiffusionSpec,
    pub hamiltonian: Arc<dyn Hamiltonian>,
    pub terminal: Vec<ScalarFn>,
    pub horizon: f64,
    pub beta: WeightSequence,
    pub layout: Layout,
    pub grid: SpatialGrid,
    pub solver: GridOptions,
    /// Nodes excluded on every face when norms, decay constants and
    /// residuals are measured.
    pub collar: usize,
    /// Configured `(R, R')`; exceeding it is recorded, never enforced.
    pub envelope: Option<(f64, f64)>,
}

impl core::fmt::Debug for GameSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("GameSpec")
            .field("players", &self.players())
            .field("horizon", &self.horizon)
            .field("grid", &self.grid)
            .field("solver", &self.solver)
            .finish_non_exhaustive()
    }
}

impl GameSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        diffusion: DiffusionSpec,
        hamiltonian: Arc<dyn Hamiltonian>,
        terminal: Vec<ScalarFn>,
        horizon: f64,
        beta: WeightSequence,
        layout: Layout,
        grid: SpatialGrid,
        solver: GridOptions,
    ) -> Result<Self> {
        let n = diffusion.dim();
        for found in [hamiltonian.players(), terminal.len(), grid.dim()] {
            if found != n {
                return Err(Error::DimensionMismatch { expected: n, found });
            }
        }
        if n > MAX_GRID_DIM {
            return Err(Error::OutOfRange { what: "grid backend dimension", value: n as f64 });
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::OutOfRange { what: "horizon", value: horizon });
        }
        // every player's shifted weights must fit in the window
        layout.shifted(&beta, n - 1, n)?;
        let collar = grid.collar_nodes(0.1);
        Ok(GameSpec {
            diffusion,
            hamiltonian,
            terminal,
            horizon,
            beta,
            layout,
            grid,
            solver: solver.saving_every(1),
            collar,
            envelope: None,
        })
    }

    /// The game whose value functions are `u^i = ½xᵀP_ix + r_i` for the
    /// Riccati flow of `lq` (with `MomentumCost::Quadratic`).
    pub fn from_lq(
        lq: &LqGameSpec,
        beta: WeightSequence,
        layout: Layout,
        momentum: MomentumCost,
        grid: SpatialGrid,
        solver: GridOptions,
    ) -> Result<Self> {
        let n = lq.players();
        let quad = |m: &nalgebra::DMatrix<f64>| ScalarFn::Quadratic { dim: n, q: m.transpose().iter().copied().collect() };
        let costs = (0..n).map(|i| quad(lq.running_cost(i))).collect();
        let terminal = (0..n).map(|i| quad(lq.terminal_cost(i))).collect();
        let h = SeparableHamiltonian::new(momentum, costs)?;
        GameSpec::new(
            DiffusionSpec::from_volatility(lq.sigma())?,
            Arc::new(h),
            terminal,
            lq.horizon(),
            beta,
            layout,
            grid,
            solver,
        )
    }

    /// All data zero: `u ≡ 0` is the solution.
    pub fn trivial(n: usize, beta: WeightSequence, grid: SpatialGrid, solver: GridOptions) -> Result<Self> {
        let h = SeparableHamiltonian::new(MomentumCost::Quadratic, alloc::vec![ScalarFn::Zero; n])?;
        GameSpec::new(
            DiffusionSpec::isotropic(n, 0.5)?,
            Arc::new(h),
            alloc::vec![ScalarFn::Zero; n],
            1.0,
            beta,
            Layout::Chain,
            grid,
            solver,
        )?
        .with_horizon(0.1)
    }

    pub fn players(&self) -> usize {
        self.diffusion.dim()
    }

    pub fn with_horizon(mut self, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::OutOfRange { what: "horizon", value: horizon });
        }
        self.horizon = horizon;
        Ok(self)
    }

    pub fn with_collar(mut self, collar: usize) -> Self {
        self.collar = collar;
        self
    }

    pub fn with_envelope(mut self, r: f64, r_prime: f64) -> Self {
        self.envelope = Some((r, r_prime));
        self
    }

    /// `β_i` on the player indices.
    pub fn weights(&self, i: usize) -> Result<Vec<f64>> {
        self.layout.shifted(&self.beta, i, self.players())
    }

    /// Time nodes of every field the Picard map produces.
    pub fn times(&self) -> Vec<f64> {
        solver_times(0.0, self.horizon, self.solver.dt, 1)
    }

    /// Largest sampled `|D²_{jk} G^i| / (β_i^j ∧ √(β_i^j β_i^k))` per player,
    /// by central differences at `count` seeded points of the box.
    pub fn terminal_decay(&self, count: usize, seed: u64) -> Result<Vec<f64>> {
        use rand_chacha::ChaCha8Rng;
        use rand_core::SeedableRng;
        use rand_distr::{Distribution, Uniform};

        let n = self.players();
        let l = self.grid.half_width();
        let u = Uniform::new_inclusive(-l, l).map_err(|_| Error::invalid("grid", "bad half-width"))?;
        let step = 1e-3;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let w = self.weights(i)?;
            let g = &self.terminal[i];
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i as u64);
            let mut worst: f64 = 0.0;
            for _ in 0..count {
                let mut x = [0.0; MAX_DIM];
                for xk in x[..n].iter_mut() {
                    *xk = u.sample(&mut rng);
                }
                for j in 0..n {
                    for k in j..n {
                        let f = |dj: f64, dk: f64| {
                            let mut y = x;
                            y[j] += dj;
                            y[k] += dk;
                            g.eval(self.horizon, &y[..n])
                        };
                        let d2 = (f(step, step) - f(step, -step) - f(-step, step) + f(-step, -step)) / (4.0 * step * step);
                        let weight = w[j].min(w[k]).min(libm::sqrt(w[j] * w[k]));
                        worst = worst.max(d2.abs() / weight);
                    }
                }
            }
            out.push(worst);
        }
        Ok(out)
    }
}
