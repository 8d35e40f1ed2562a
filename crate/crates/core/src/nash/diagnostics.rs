//! Contraction, horizon, uniqueness and dimension-stability experiments on
//! the Picard map.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, Uniform};

use super::picard::with_linear_problem;
use super::{assemble_drift, picard_solve, picard_step, triple_norm, GameSpec, InitialGuess, Iterate};
use crate::holder::{Differentiator, Field, SpatialGrid};
use crate::pde::{solve_mc, McEstimate, McOptions, McQuery, VectorField};
use crate::stats::spearman;
use crate::{Error, Result};

/// Smallest `⟦u - v⟧` accepted by [`contraction_probe`].
pub const DEGENERATE_PAIR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionProbe {
    pub numerator: f64,
    pub denominator: f64,
    /// `⟦S(u) - S(v)⟧ / ⟦u - v⟧`.
    pub ratio: f64,
    /// `max_i ‖⟨B_i[v] - B_i[u], D S(v)^i⟩‖_∞`, the source of the linear
    /// problem solved by `S(u)^i - S(v)^i` when `F^i` does not depend on `u`.
    pub linearized_source: f64,
}

/// `⟦S(u) - S(v)⟧ / ⟦u - v⟧`.
pub fn contraction_probe(game: &GameSpec, u: &Iterate, v: &Iterate) -> Result<ContractionProbe> {
    let denominator = triple_norm(game, &u.u, Some(&v.u))?.total();
    if !(denominator > DEGENERATE_PAIR) {
        return Err(Error::DegeneratePair { distance: denominator });
    }
    let su = picard_step(game, u)?;
    let sv = picard_step(game, v)?;
    let numerator = triple_norm(game, &su.u, Some(&sv.u))?.total();
    let linearized_source = linearized_source(game, u, v, &sv)?;
    Ok(ContractionProbe { numerator, denominator, ratio: numerator / denominator, linearized_source })
}

fn linearized_source(game: &GameSpec, u: &Iterate, v: &Iterate, sv: &Iterate) -> Result<f64> {
    let grid = &game.grid;
    let (n, len) = (game.players(), grid.len());
    let diff = Differentiator::new(grid)?;
    let mut worst: f64 = 0.0;
    let mut bu = alloc::vec![0.0; n * len];
    let mut bv = alloc::vec![0.0; n * len];
    let mut d = alloc::vec![0.0; len];
    for i in 0..n {
        let (du, dv) = (assemble_drift(game, u, i)?, assemble_drift(game, v, i)?);
        for (k, &t) in sv.times().iter().enumerate() {
            du.sample(t, grid, &mut bu);
            dv.sample(t, grid, &mut bv);
            let mut acc = alloc::vec![0.0; len];
            for j in 0..n {
                diff.partial(sv.u[i].slice(k), j, &mut d);
                for node in 0..len {
                    acc[node] += (bv[j * len + node] - bu[j * len + node]) * d[node];
                }
            }
            for (node, a) in acc.iter().enumerate() {
                if grid.depth(node) >= game.collar {
                    worst = worst.max(a.abs());
                }
            }
        }
    }
    Ok(worst)
}

/// Seeded pairs `(G + δφ_a, G + δφ_b)` around the terminal extension, where
/// each `φ^i(t, x) = (1 + c t/T) Σ_k (β_i)^k c_k sin(ω_k x^k + θ_k)` has
/// random coefficients.
pub fn probe_pairs(game: &GameSpec, count: usize, amplitude: f64, seed: u64) -> Result<Vec<(Iterate, Iterate)>> {
    let base = InitialGuess::Terminal.build(game)?;
    let n = game.players();
    let coeff = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
    let freq = Uniform::new_inclusive(0.5, 1.5).expect("valid range");
    let phase = Uniform::new(0.0, core::f64::consts::TAU).expect("valid range");
    let horizon = game.horizon;
    let perturbed = |stream: u64| -> Result<Iterate> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut fields = Vec::with_capacity(n);
        for i in 0..n {
            let w = game.weights(i)?;
            let ct = coeff.sample(&mut rng);
            let terms: Vec<(f64, f64, f64)> =
                (0..n).map(|k| (w[k] * coeff.sample(&mut rng), freq.sample(&mut rng), phase.sample(&mut rng))).collect();
            let b = &base.u[i];
            let mut values = b.values().to_vec();
            let len = game.grid.len();
            let mut x = [0.0; crate::MAX_DIM];
            for (k, &t) in b.times().iter().enumerate() {
                let scale = amplitude * (1.0 + ct * t / horizon);
                for node in 0..len {
                    game.grid.position(node, &mut x);
                    let phi: f64 = terms.iter().enumerate().map(|(j, (c, om, th))| c * libm::sin(om * x[j] + th)).sum();
                    values[k * len + node] += scale * phi;
                }
            }
            fields.push(Field::new(game.grid.clone(), b.times().to_vec(), values, Some(i))?);
        }
        Iterate::new(fields)
    };
    (0..count as u64).map(|p| Ok((perturbed(2 * p)?, perturbed(2 * p + 1)?))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub horizon: f64,
    pub ratios: Vec<f64>,
    pub mean_ratio: f64,
    pub max_ratio: f64,
    pub converged: bool,
    pub diverged: bool,
    pub iterations: usize,
}

impl ScanRow {
    pub fn contracts(&self) -> bool {
        self.converged && self.ratios.iter().all(|r| *r < 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorizonScan {
    pub rows: Vec<ScanRow>,
    /// Rank correlation between `T` and the mean probe ratio.
    pub spearman: f64,
    /// Largest `T` whose probes all contract and whose Picard run converged.
    pub last_contracting: Option<f64>,
    /// Smallest `T` that fails either test.
    pub first_failing: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub probes: usize,
    pub amplitude: f64,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { probes: 3, amplitude: 0.1, seed: 0, tol: 1e-6, max_iter: 30 }
    }
}

/// Contraction probes and a Picard attempt at each horizon.
pub fn horizon_scan(template: &GameSpec, horizons: &[f64], opts: &ScanOptions) -> Result<HorizonScan> {
    if horizons.is_empty() {
        return Err(Error::Empty("horizon list"));
    }
    if horizons.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("horizons", "horizons must be strictly ascending"));
    }
    if opts.probes < 3 {
        return Err(Error::invalid("probes", "need at least 3 probe pairs"));
    }
    let mut rows = Vec::with_capacity(horizons.len());
    for &t in horizons {
        let game = template.clone().with_horizon(t)?;
        let mut ratios = Vec::with_capacity(opts.probes);
        for (u, v) in probe_pairs(&game, opts.probes, opts.amplitude, opts.seed)? {
            let r = match contraction_probe(&game, &u, &v) {
                Ok(p) => p.ratio,
                Err(Error::DegeneratePair { .. }) => 0.0,
                Err(Error::PlayerSolve { .. } | Error::NonFinite { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            ratios.push(r);
        }
        let run = picard_solve(&game, &InitialGuess::Zero, opts.tol, opts.max_iter)?;
        let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
        rows.push(ScanRow {
            horizon: t,
            ratios,
            mean_ratio,
            max_ratio,
            converged: run.report.converged,
            diverged: run.report.diverged,
            iterations: run.report.iteration_count(),
        });
    }
    let ts: Vec<f64> = rows.iter().map(|r| r.horizon).collect();
    let means: Vec<f64> = rows.iter().map(|r| if r.mean_ratio.is_finite() { r.mean_ratio } else { f64::MAX }).collect();
    let spearman = if rows.len() >= 2 { spearman(&ts, &means)? } else { 0.0 };
    let last_contracting = rows.iter().filter(|r| r.contracts()).map(|r| r.horizon).next_back();
    let first_failing = rows.iter().find(|r| !r.contracts()).map(|r| r.horizon);
    Ok(HorizonScan { rows, spearman, last_contracting, first_failing })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniquenessReport {
    /// `max_i ‖u^i_a - u^i_b‖_∞`.
    pub difference: f64,
    pub iterations: (usize, usize),
}

/// Runs Picard from two starting points and compares the fixed points.
pub fn uniqueness_probe(
    game: &GameSpec,
    a: &InitialGuess,
    b: &InitialGuess,
    tol: f64,
    max_iter: usize,
) -> Result<UniquenessReport> {
    let (sa, ra) = picard_solve(game, a, tol, max_iter)?.into_solution()?;
    let (sb, rb) = picard_solve(game, b, tol, max_iter)?.into_solution()?;
    Ok(UniquenessReport {
        difference: sa.iterate().max_difference(&sb.iterate())?,
        iterations: (ra.iteration_count(), rb.iteration_count()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityPair {
    pub small: usize,
    pub large: usize,
    /// `max_{i < N_min} ‖u^i_N - u^i_{N'}‖_∞` on the shared coordinates.
    pub difference: f64,
    /// `Σ_{j ≥ N} β^j` over the window.
    pub tail: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionStability {
    pub pairs: Vec<StabilityPair>,
    /// `C = difference / tail` of the first pair.
    pub constant: f64,
    /// Every later pair satisfies `difference ≤ 2 C tail`.
    pub bounded: bool,
    /// Differences strictly decrease along the list.
    pub decreasing: bool,
}

/// `u` on a larger grid restricted to the coordinates of `small`, with the
/// extra coordinates at 0.
fn restrict(u: &Field, small: &SpatialGrid) -> Result<Vec<f64>> {
    let large = u.grid();
    if large.points() != small.points() || (large.half_width() - small.half_width()).abs() > 1e-12 {
        return Err(Error::invalid("grid", "games must share points and half-width per axis"));
    }
    let center = (large.points() - 1) / 2;
    let mut out = Vec::with_capacity(u.values().len() / large.len() * small.len());
    let mut idx = alloc::vec![center; large.dim()];
    for s in u.slices() {
        for node in 0..small.len() {
            for (k, v) in idx.iter_mut().enumerate().take(small.dim()) {
                *v = small.axis_index(node, k);
            }
            out.push(s[large.node(&idx)]);
        }
    }
    Ok(out)
}

/// Solves the game at each size in `sizes` and compares consecutive sizes on
/// the players `i < sizes[0]`.
pub fn dimension_stability(
    sizes: &[usize],
    build: &dyn Fn(usize) -> Result<GameSpec>,
    guess: &InitialGuess,
    tol: f64,
    max_iter: usize,
) -> Result<DimensionStability> {
    if sizes.len() < 2 || sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("sizes", "need at least two strictly ascending sizes"));
    }
    let keep = sizes[0];
    let mut solved = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let game = build(n)?;
        let (sol, _) = picard_solve(&game, guess, tol, max_iter)?.into_solution()?;
        solved.push((game, sol));
    }
    let mut pairs = Vec::new();
    for w in solved.windows(2) {
        let ((gs, ss), (_, sl)) = (&w[0], &w[1]);
        if ss.u[0].times() != sl.u[0].times() {
            return Err(Error::invalid("solver", "games must share the time step"));
        }
        let mut difference: f64 = 0.0;
        for i in 0..keep {
            let r = restrict(&sl.u[i], &gs.grid)?;
            for (a, b) in ss.u[i].values().iter().zip(&r) {
                difference = difference.max((a - b).abs());
            }
        }
        let n = gs.players();
        let tail: f64 = (n..=gs.beta.half_width()).map(|j| gs.beta.at(j as i64)).sum();
        pairs.push(StabilityPair { small: n, large: w[1].0.players(), difference, tail });
    }
    let constant = pairs[0].difference / pairs[0].tail;
    let bounded = pairs.iter().skip(1).all(|p| p.difference <= 2.0 * constant * p.tail);
    let decreasing = pairs.windows(2).all(|w| w[1].difference < w[0].difference);
    Ok(DimensionStability { pairs, constant, bounded, decreasing })
}

/// Pointwise Monte Carlo evaluation of `S(u)^i` through the Feynman–Kac
/// representation of player `i`'s linear problem.
pub fn mc_map_value(game: &GameSpec, it: &Iterate, i: usize, queries: &[McQuery], opts: &McOptions) -> Result<Vec<McEstimate>> {
    with_linear_problem(game, it, i, |p| solve_mc(p, queries, opts))
}
