//! The fixed-point map `S` and Picard iteration.
//!
//! Given `u`, each `w^i = S(u)^i` solves the linear problem
//! `-∂_t w - tr(A D²w) + ⟨B_i, Dw⟩ = -H^i(𝒟u^{-i}, 0)`, `w(T) = G^i`, with
//! `B^j_i = ∂_{p^j}H^j(𝒟u)` for `j ≠ i` and
//! `B^i_i = ∫₀¹ ∂_{p^i}H^i(𝒟u^{-i}, s D_iu^i) ds`. The split
//! `H^i(𝒟u) = H^i(𝒟u^{-i}, 0) + B^i_i D_iu^i` makes a fixed point of `S` a
//! solution of the Nash system.

use alloc::vec::Vec;

use super::GameSpec;
use crate::holder::{
    space_norm, DerivativeFamily, Differentiator, Field, NormOptions, NormVariant,
};
use crate::pde::{solve_grid, verify_decay, DecayReport, LinearProblem, SampledField, ScalarField, VectorField};
use crate::{Error, Result, MAX_DIM};

/// Gauss–Legendre nodes and weights on `[0, 1]`.
const GL8: [(f64, f64); 8] = {
    const X: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
    const W: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];
    [
        (0.5 - 0.5 * X[3], 0.5 * W[3]),
        (0.5 - 0.5 * X[2], 0.5 * W[2]),
        (0.5 - 0.5 * X[1], 0.5 * W[1]),
        (0.5 - 0.5 * X[0], 0.5 * W[0]),
        (0.5 + 0.5 * X[0], 0.5 * W[0]),
        (0.5 + 0.5 * X[1], 0.5 * W[1]),
        (0.5 + 0.5 * X[2], 0.5 * W[2]),
        (0.5 + 0.5 * X[3], 0.5 * W[3]),
    ]
};

/// A candidate `u` together with its diagonal gradients `D_j u^j`.
#[derive(Debug, Clone)]
pub struct Iterate {
    pub u: Vec<Field>,
    pub grads: Vec<Field>,
}

impl Iterate {
    pub fn new(u: Vec<Field>) -> Result<Self> {
        let first = u.first().ok_or(Error::Empty("value functions"))?;
        let grid = first.grid().clone();
        if u.len() != grid.dim() {
            return Err(Error::DimensionMismatch { expected: grid.dim(), found: u.len() });
        }
        let diff = Differentiator::new(&grid)?;
        let mut grads = Vec::with_capacity(u.len());
        for (j, f) in u.iter().enumerate() {
            if f.grid() != &grid || f.times() != first.times() {
                return Err(Error::invalid("u", "value functions must share one time-space grid"));
            }
            let mut values = alloc::vec![0.0; f.values().len()];
            for (s, out) in f.slices().zip(values.chunks_mut(grid.len())) {
                diff.partial(s, j, out);
            }
            grads.push(Field::new(grid.clone(), f.times().to_vec(), values, Some(j))?);
        }
        Ok(Iterate { u, grads })
    }

    pub fn players(&self) -> usize {
        self.u.len()
    }

    pub fn times(&self) -> &[f64] {
        self.u[0].times()
    }

    /// `max_i ‖u^i - v^i‖_∞`.
    pub fn max_difference(&self, other: &Iterate) -> Result<f64> {
        let mut d: f64 = 0.0;
        for (a, b) in self.u.iter().zip(&other.u) {
            d = d.max(a.max_abs_diff(b)?);
        }
        Ok(d)
    }
}

/// Starting point of a Picard run.
#[derive(Debug, Clone)]
pub enum InitialGuess {
    Zero,
    /// `u^i(t, ·) = G^i` for every `t`.
    Terminal,
    Fields(Vec<Field>),
}

impl InitialGuess {
    pub fn build(&self, game: &GameSpec) -> Result<Iterate> {
        let times = game.times();
        let fields = match self {
            InitialGuess::Zero => (0..game.players())
                .map(|i| Field::zeros(game.grid.clone(), times.clone(), Some(i)))
                .collect::<Result<Vec<_>>>()?,
            InitialGuess::Terminal => (0..game.players())
                .map(|i| {
                    let g = &game.terminal[i];
                    let t = game.horizon;
                    Field::from_fn(game.grid.clone(), times.clone(), Some(i), |_, x| g.eval(t, x))
                })
                .collect::<Result<Vec<_>>>()?,
            InitialGuess::Fields(f) => f.clone(),
        };
        Iterate::new(fields)
    }
}

/// Momenta `𝒟u(t, x)`, read from the gradient cache.
fn momenta_at(it: &Iterate, t: f64, x: &[f64], p: &mut [f64]) {
    for (j, g) in it.grads.iter().enumerate() {
        p[j] = SampledField::new(g).eval(t, x);
    }
}

/// Writes `B_i(t, x)` for momenta `p`.
fn drift_from_momenta(game: &GameSpec, i: usize, t: f64, x: &[f64], p: &[f64], out: &mut [f64]) {
    let h = &*game.hamiltonian;
    for (j, o) in out.iter_mut().enumerate() {
        if j != i {
            *o = h.momentum_derivative(j, t, x, p);
        }
    }
    let mut q = [0.0; MAX_DIM];
    q[..p.len()].copy_from_slice(p);
    let mut acc = 0.0;
    for &(s, w) in GL8.iter() {
        q[i] = s * p[i];
        acc += w * h.momentum_derivative(i, t, x, &q[..p.len()]);
    }
    out[i] = acc;
}

/// The drift `B_i[u]` of player `i`'s linear problem.
pub struct NashDrift<'a> {
    game: &'a GameSpec,
    it: &'a Iterate,
    player: usize,
}

impl VectorField for NashDrift<'_> {
    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) {
        let mut p = [0.0; MAX_DIM];
        let n = self.it.players();
        momenta_at(self.it, t, x, &mut p[..n]);
        drift_from_momenta(self.game, self.player, t, x, &p[..n], out);
    }

    fn sample(&self, t: f64, grid: &crate::holder::SpatialGrid, out: &mut [f64]) {
        let n = self.it.players();
        let len = grid.len();
        if grid != self.it.grads[0].grid() {
            let rows = crate::exec::map(len, |node| {
                let mut x = [0.0; MAX_DIM];
                let mut b = [0.0; MAX_DIM];
                grid.position(node, &mut x);
                self.eval(t, &x[..n], &mut b[..n]);
                b
            });
            for (node, b) in rows.iter().enumerate() {
                for k in 0..n {
                    out[k * len + node] = b[k];
                }
            }
            return;
        }
        let (a, b, w) = SampledField::bracket(self.it.times(), t);
        let rows = crate::exec::map(len, |node| {
            let mut x = [0.0; MAX_DIM];
            let mut p = [0.0; MAX_DIM];
            let mut out = [0.0; MAX_DIM];
            grid.position(node, &mut x);
            for (j, g) in self.it.grads.iter().enumerate() {
                let (ga, gb) = (g.slice(a)[node], g.slice(b)[node]);
                p[j] = if w == 0.0 { ga } else { (1.0 - w) * ga + w * gb };
            }
            drift_from_momenta(self.game, self.player, t, &x[..n], &p[..n], &mut out[..n]);
            out
        });
        for (node, b) in rows.iter().enumerate() {
            for k in 0..n {
                out[k * len + node] = b[k];
            }
        }
    }
}

/// `F^i = H^i(𝒟u^{-i}, 0)`, or its negative when used as the source of the
/// linear problem.
pub struct NashSource<'a> {
    game: &'a GameSpec,
    it: &'a Iterate,
    player: usize,
    sign: f64,
}

impl NashSource<'_> {
    fn at_momenta(&self, t: f64, x: &[f64], p: &mut [f64]) -> f64 {
        p[self.player] = 0.0;
        self.sign * self.game.hamiltonian.value(self.player, t, x, p)
    }
}

impl ScalarField for NashSource<'_> {
    fn eval(&self, t: f64, x: &[f64]) -> f64 {
        let mut p = [0.0; MAX_DIM];
        let n = self.it.players();
        momenta_at(self.it, t, x, &mut p[..n]);
        self.at_momenta(t, x, &mut p[..n])
    }

    fn sample(&self, t: f64, grid: &crate::holder::SpatialGrid, out: &mut [f64]) {
        let n = self.it.players();
        if grid != self.it.grads[0].grid() {
            crate::exec::fill(out, |node| {
                let mut x = [0.0; MAX_DIM];
                grid.position(node, &mut x);
                self.eval(t, &x[..n])
            });
            return;
        }
        let (a, b, w) = SampledField::bracket(self.it.times(), t);
        crate::exec::fill(out, |node| {
            let mut x = [0.0; MAX_DIM];
            let mut p = [0.0; MAX_DIM];
            grid.position(node, &mut x);
            for (j, g) in self.it.grads.iter().enumerate() {
                let (ga, gb) = (g.slice(a)[node], g.slice(b)[node]);
                p[j] = if w == 0.0 { ga } else { (1.0 - w) * ga + w * gb };
            }
            self.at_momenta(t, &x[..n], &mut p[..n])
        });
    }
}

fn check_player(it: &Iterate, i: usize) -> Result<()> {
    if i >= it.players() {
        return Err(Error::invalid("player", alloc::format!("player {i} outside 0..{}", it.players())));
    }
    Ok(())
}

/// `B_i[u]`.
pub fn assemble_drift<'a>(game: &'a GameSpec, it: &'a Iterate, i: usize) -> Result<NashDrift<'a>> {
    check_player(it, i)?;
    Ok(NashDrift { game, it, player: i })
}

/// `F^i[u] = H^i(𝒟u^{-i}, 0)`.
pub fn assemble_source<'a>(game: &'a GameSpec, it: &'a Iterate, i: usize) -> Result<NashSource<'a>> {
    check_player(it, i)?;
    Ok(NashSource { game, it, player: i, sign: 1.0 })
}

/// Player `i`'s linear problem with drift and source frozen at `u`.
pub(crate) fn with_linear_problem<R>(
    game: &GameSpec,
    it: &Iterate,
    i: usize,
    f: impl FnOnce(&LinearProblem<'_>) -> Result<R>,
) -> Result<R> {
    let drift = assemble_drift(game, it, i)?;
    let source = NashSource { sign: -1.0, ..assemble_source(game, it, i)? };
    let problem = LinearProblem {
        diffusion: &game.diffusion,
        drift: &drift,
        source: &source,
        terminal: &game.terminal[i],
        start: 0.0,
        horizon: game.horizon,
    };
    f(&problem)
}

/// `w = S(u)`: one linear solve per player, players in parallel.
pub fn picard_step(game: &GameSpec, it: &Iterate) -> Result<Iterate> {
    if it.players() != game.players() {
        return Err(Error::DimensionMismatch { expected: game.players(), found: it.players() });
    }
    let solved = crate::exec::map_coarse(game.players(), |i| {
        with_linear_problem(game, it, i, |p| solve_grid(p, &game.grid, &game.solver))
            .map(|s| s.field.with_player(Some(i)))
            .map_err(|e| Error::PlayerSolve { player: i, source: alloc::boxed::Box::new(e) })
    });
    Iterate::new(solved.into_iter().collect::<Result<Vec<_>>>()?)
}

/// The two halves of `⟦·⟧`: the `C⁰([0,T]; C^{2,1}_{β_i})` part and the
/// `C^{0,1}([0,T]; C^{2-}_{√β_i})` part, each maximized over players.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TripleNorm {
    pub space: f64,
    pub time: f64,
}

impl TripleNorm {
    pub fn total(&self) -> f64 {
        self.space + self.time
    }
}

/// `⟦a - b⟧` over the interior of the game's grid; `b = None` gives `⟦a⟧`.
pub fn triple_norm(game: &GameSpec, a: &[Field], b: Option<&[Field]>) -> Result<TripleNorm> {
    let diff = Differentiator::new(&game.grid)?;
    let opts = NormOptions::with_collar(game.collar);
    let mut out = TripleNorm::default();
    for (i, fa) in a.iter().enumerate() {
        let w = game.weights(i)?;
        let root: Vec<f64> = w.iter().map(|v| libm::sqrt(*v)).collect();
        let fb = b.map(|b| &b[i]);
        if let Some(fb) = fb {
            if fb.times() != fa.times() || fb.grid() != fa.grid() {
                return Err(Error::invalid("fields", "norms of differences need matching grids"));
            }
        }
        let slice = |k: usize| -> Vec<f64> {
            match fb {
                Some(fb) => fa.slice(k).iter().zip(fb.slice(k)).map(|(x, y)| x - y).collect(),
                None => fa.slice(k).to_vec(),
            }
        };
        let times = fa.times();
        let (mut space, mut time) = (0.0f64, 0.0f64);
        let mut prev: Option<Vec<f64>> = None;
        for k in 0..times.len() {
            let d = slice(k);
            let fam = DerivativeFamily::compute(&diff, &d, 2)?;
            space = space.max(space_norm(&diff, &fam, 2, 1.0, &w, NormVariant::Full, opts)?.total);
            if let Some(p) = &prev {
                let delta: Vec<f64> = d.iter().zip(p).map(|(x, y)| x - y).collect();
                let fam = DerivativeFamily::compute(&diff, &delta, 2)?;
                let q = space_norm(&diff, &fam, 2, 0.0, &root, NormVariant::Minus, opts)?.total;
                time = time.max(q / (times[k] - times[k - 1]));
            }
            prev = Some(d);
        }
        out.space = out.space.max(space);
        out.time = out.time.max(time);
    }
    Ok(out)
}

/// Where an iterate sits relative to the envelope `(R, R')`:
/// `R` bounds `C⁰([0,T]; C^{3-}_{β_i})`, `R'` bounds
/// `C^{0,1}([0,T]; C^{2-}_{√β_i})`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Occupancy {
    pub r: f64,
    pub r_prime: f64,
}

pub fn occupancy(game: &GameSpec, u: &[Field]) -> Result<Occupancy> {
    let diff = Differentiator::new(&game.grid)?;
    let opts = NormOptions::with_collar(game.collar);
    let mut out = Occupancy::default();
    for (i, f) in u.iter().enumerate() {
        let w = game.weights(i)?;
        let root: Vec<f64> = w.iter().map(|v| libm::sqrt(*v)).collect();
        let times = f.times();
        for k in 0..times.len() {
            let fam = DerivativeFamily::compute(&diff, f.slice(k), 3)?;
            out.r = out.r.max(space_norm(&diff, &fam, 3, 0.0, &w, NormVariant::Minus, opts)?.total);
            if k > 0 {
                let delta: Vec<f64> = f.slice(k).iter().zip(f.slice(k - 1)).map(|(x, y)| x - y).collect();
                let fam = DerivativeFamily::compute(&diff, &delta, 2)?;
                let q = space_norm(&diff, &fam, 2, 0.0, &root, NormVariant::Minus, opts)?.total;
                out.r_prime = out.r_prime.max(q / (times[k] - times[k - 1]));
            }
        }
    }
    Ok(out)
}

/// One sup-norm residual of the Nash system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub player: usize,
    pub sup: f64,
    pub time: f64,
    pub node: usize,
}

/// `-∂_t u^i - Σ A^{jk} D²_{jk}u^i + H^i(𝒟u) + Σ_{j≠i} ∂_{p^j}H^j(𝒟u) D_ju^i`
/// at interior nodes (depth `≥ collar`) and interior times, with central
/// differences in time.
pub fn residual(game: &GameSpec, u: &[Field]) -> Result<Vec<Residual>> {
    let n = game.players();
    if u.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: u.len() });
    }
    let times = u[0].times();
    if times.len() < 3 {
        return Err(Error::TooFewTimeNodes { needed: 3, found: times.len() });
    }
    let grid = &game.grid;
    let diff = Differentiator::new(grid)?;
    let h = &*game.hamiltonian;
    let mut out: Vec<Residual> = (0..n).map(|player| Residual { player, sup: 0.0, time: times[0], node: 0 }).collect();
    for k in 1..times.len() - 1 {
        let t = times[k];
        let dt = times[k + 1] - times[k - 1];
        // first[i][j] = D_j u^i
        let mut first: Vec<Vec<Vec<f64>>> = Vec::with_capacity(n);
        for f in u {
            let mut per = Vec::with_capacity(n);
            for j in 0..n {
                let mut d = alloc::vec![0.0; grid.len()];
                diff.partial(f.slice(k), j, &mut d);
                per.push(d);
            }
            first.push(per);
        }
        for i in 0..n {
            let f = &u[i];
            let second: Vec<((usize, usize), Vec<f64>)> = crate::weights::MultiIndex::all_of_order(n, 2)
                .into_iter()
                .map(|a| {
                    let c = a.coords();
                    diff.apply(f.slice(k), &a).map(|v| ((c[0], c[1]), v))
                })
                .collect::<Result<_>>()?;
            let (first, second) = (&first, &second);
            let values = crate::exec::map(grid.len(), |node| {
                if grid.depth(node) < game.collar {
                    return 0.0;
                }
                let mut x = [0.0; MAX_DIM];
                let mut p = [0.0; MAX_DIM];
                grid.position(node, &mut x);
                let x = &x[..n];
                for j in 0..n {
                    p[j] = first[j][j][node];
                }
                let p = &p[..n];
                let mut r = -(f.slice(k + 1)[node] - f.slice(k - 1)[node]) / dt;
                for ((a, b), d) in second {
                    let weight = if a == b { 1.0 } else { 2.0 };
                    r -= weight * game.diffusion.entry(t, x, *a, *b) * d[node];
                }
                r += h.value(i, t, x, p);
                for j in 0..n {
                    if j != i {
                        r += h.momentum_derivative(j, t, x, p) * first[i][j][node];
                    }
                }
                r
            });
            for (node, v) in values.iter().enumerate() {
                if v.abs() > out[i].sup {
                    out[i] = Residual { player: i, sup: v.abs(), time: t, node };
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct NashSolution {
    pub u: Vec<Field>,
    /// `D_i u^i`.
    pub grads: Vec<Field>,
    pub decay: Vec<DecayReport>,
    pub residuals: Vec<Residual>,
}

impl NashSolution {
    pub fn iterate(&self) -> Iterate {
        Iterate { u: self.u.clone(), grads: self.grads.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardIteration {
    pub index: usize,
    /// `⟦u_k - u_{k-1}⟧`.
    pub increment: TripleNorm,
    /// `⟦u_k - u_{k-1}⟧ / ⟦u_{k-1} - u_{k-2}⟧`.
    pub ratio: Option<f64>,
    pub occupancy: Occupancy,
    pub outside_envelope: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardReport {
    pub tol: f64,
    pub max_iter: usize,
    pub iterations: Vec<PicardIteration>,
    pub converged: bool,
    /// The increment grew three iterations in a row, or a solve overflowed.
    pub diverged: bool,
    /// Set when a linear solve produced non-finite values.
    pub failure: Option<Error>,
}

impl PicardReport {
    pub fn final_increment(&self) -> Option<f64> {
        self.iterations.last().map(|k| k.increment.total())
    }

    pub fn iteration_count(&self) -> usize {
        self.iterations.len()
    }
}

#[derive(Debug, Clone)]
pub struct PicardRun {
    pub report: PicardReport,
    pub solution: Option<NashSolution>,
}

impl PicardRun {
    /// The solution, or `NonConvergence` when the run did not reach `tol`.
    pub fn into_solution(self) -> Result<(NashSolution, PicardReport)> {
        match self.solution {
            Some(s) => Ok((s, self.report)),
            None => Err(Error::NonConvergence { iterations: self.report.iterations.len() }),
        }
    }
}

fn finalize(game: &GameSpec, it: Iterate) -> Result<NashSolution> {
    let decay = it
        .u
        .iter()
        .enumerate()
        .map(|(i, f)| verify_decay(f, &game.weights(i)?, game.collar))
        .collect::<Result<Vec<_>>>()?;
    let residuals = if it.times().len() >= 3 { residual(game, &it.u)? } else { Vec::new() };
    Ok(NashSolution { u: it.u, grads: it.grads, decay, residuals })
}

/// Iterates `u_{k+1} = S(u_k)` until `⟦u_{k+1} - u_k⟧ < tol`.
pub fn picard_solve(game: &GameSpec, u0: &InitialGuess, tol: f64, max_iter: usize) -> Result<PicardRun> {
    if !(tol > 0.0) {
        return Err(Error::OutOfRange { what: "Picard tolerance", value: tol });
    }
    let mut cur = u0.build(game)?;
    let mut report = PicardReport { tol, max_iter, iterations: Vec::new(), converged: false, diverged: false, failure: None };
    let mut growth = 0;
    for index in 1..=max_iter {
        let next = match picard_step(game, &cur) {
            Ok(n) => n,
            Err(e) if is_overflow(&e) => {
                report.diverged = true;
                report.failure = Some(e);
                return Ok(PicardRun { report, solution: None });
            }
            Err(e) => return Err(e),
        };
        let increment = triple_norm(game, &next.u, Some(&cur.u))?;
        let occ = occupancy(game, &next.u)?;
        let prev = report.iterations.last().map(|k| k.increment.total());
        let ratio = prev.map(|p| if p > 0.0 { increment.total() / p } else { 0.0 });
        growth = if prev.is_some_and(|p| increment.total() > p) { growth + 1 } else { 0 };
        let outside = game.envelope.is_some_and(|(r, rp)| occ.r > r || occ.r_prime > rp);
        report.iterations.push(PicardIteration { index, increment, ratio, occupancy: occ, outside_envelope: outside });
        cur = next;
        if !increment.total().is_finite() {
            report.diverged = true;
            return Ok(PicardRun { report, solution: None });
        }
        if increment.total() < tol {
            report.converged = true;
            return Ok(PicardRun { report, solution: Some(finalize(game, cur)?) });
        }
        if growth >= 3 {
            report.diverged = true;
            return Ok(PicardRun { report, solution: None });
        }
    }
    Ok(PicardRun { report, solution: None })
}

fn is_overflow(e: &Error) -> bool {
    match e {
        Error::NonFinite { .. } => true,
        Error::PlayerSolve { source, .. } => is_overflow(source),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holder::SpatialGrid;
    use crate::lq::{CouplingParams, Layout, LqGameSpec};
    use crate::nash::MomentumCost;
    use crate::pde::{Boundary, GridOptions, Transport};
    use crate::weights::{WeightKind, WeightSequence};

    fn beta() -> WeightSequence {
        WeightSequence::build(WeightKind::Polynomial { exponent: 3.0 }, 16).unwrap()
    }

    fn lq_game(n: usize, m: usize, momentum: MomentumCost) -> GameSpec {
        let lq = LqGameSpec::coupled(n, &beta(), &CouplingParams { horizon: 0.1, ..Default::default() }).unwrap();
        let grid = SpatialGrid::new(n, 3.0, m).unwrap();
        let h = grid.spacing();
        let opts = GridOptions::new(0.9 * h * h / (2.0 * n as f64 * 0.5))
            .with_boundary(Boundary::QuadraticExtrapolation)
            .with_transport(Transport::Central);
        GameSpec::from_lq(&lq, beta(), Layout::Chain, momentum, grid, opts).unwrap()
    }

    fn smooth_iterate(game: &GameSpec) -> Iterate {
        let u = (0..game.players())
            .map(|i| {
                Field::from_fn(game.grid.clone(), game.times(), Some(i), |t, x| {
                    libm::sin(0.7 * x[0] + 0.3 * i as f64) + 0.4 * x[1] * x[1] * (1.0 + t)
                })
                .unwrap()
            })
            .collect();
        Iterate::new(u).unwrap()
    }

    #[test]
    fn trivial_game_converges_at_once() {
        let grid = SpatialGrid::new(2, 2.0, 11).unwrap();
        let game = GameSpec::trivial(2, beta(), grid, GridOptions::new(0.02)).unwrap();
        let run = picard_solve(&game, &InitialGuess::Zero, 1e-10, 5).unwrap();
        assert!(run.report.converged);
        assert_eq!(run.report.iteration_count(), 1);
        let sol = run.solution.unwrap();
        assert!(sol.u.iter().all(|f| f.sup_norm() == 0.0));
        assert!(sol.residuals.iter().all(|r| r.sup == 0.0));
    }

    #[test]
    fn lq_drift_is_own_gradient_and_half_the_diagonal() {
        let game = lq_game(2, 31, MomentumCost::Quadratic);
        let it = smooth_iterate(&game);
        let len = game.grid.len();
        let mut b = alloc::vec![0.0; 2 * len];
        let k = 3;
        let t = it.times()[k];
        for i in 0..2 {
            assemble_drift(&game, &it, i).unwrap().sample(t, &game.grid, &mut b);
            for j in 0..2 {
                let factor = if i == j { 0.5 } else { 1.0 };
                for n in 0..len {
                    let expect = factor * it.grads[j].slice(k)[n];
                    assert!((b[j * len + n] - expect).abs() < 1e-13 * (1.0 + expect.abs()));
                }
            }
        }
        let zero = InitialGuess::Zero.build(&game).unwrap();
        assemble_drift(&game, &zero, 0).unwrap().sample(t, &game.grid, &mut b);
        assert!(b.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn source_split_identity() {
        let game = lq_game(2, 31, MomentumCost::Saturated { kappa: 3.0 });
        let it = smooth_iterate(&game);
        let h = &*game.hamiltonian;
        let mut x = [0.0; 2];
        for i in 0..2 {
            let src = assemble_source(&game, &it, i).unwrap();
            let drift = assemble_drift(&game, &it, i).unwrap();
            for n in (0..game.grid.len()).step_by(7) {
                game.grid.position(n, &mut x);
                let t = it.times()[2];
                let p = [it.grads[0].slice(2)[n], it.grads[1].slice(2)[n]];
                let mut b = [0.0; 2];
                drift.eval(t, &x, &mut b);
                let split = src.eval(t, &x) + b[i] * p[i];
                let err = (h.value(i, t, &x, &p) - split).abs();
                // exact up to the 8-node quadrature of the tanh profile
                assert!(err < 1e-9, "{err} at {p:?}");
            }
        }
    }

    #[test]
    fn saturation_matches_lq_drift_on_small_momenta() {
        let lq = lq_game(2, 11, MomentumCost::Quadratic);
        let sat = lq_game(2, 11, MomentumCost::Saturated { kappa: 200.0 });
        let it = smooth_iterate(&lq);
        let (mut a, mut b) = ([0.0; 2], [0.0; 2]);
        for x in [[0.1, 0.2], [-1.0, 0.5], [2.0, -2.0]] {
            assemble_drift(&lq, &it, 0).unwrap().eval(0.05, &x, &mut a);
            assemble_drift(&sat, &it, 0).unwrap().eval(0.05, &x, &mut b);
            for k in 0..2 {
                // |p| ≤ 4 here, so the deadband error is below 2|p|³/κ²
                assert!((a[k] - b[k]).abs() < 2.0 * 64.0 / 40000.0);
            }
        }
    }

    #[test]
    fn zero_data_is_a_fixed_point() {
        let grid = SpatialGrid::new(2, 2.0, 11).unwrap();
        let game = GameSpec::trivial(2, beta(), grid, GridOptions::new(0.02)).unwrap();
        let zero = InitialGuess::Zero.build(&game).unwrap();
        let s = picard_step(&game, &zero).unwrap();
        assert_eq!(s.max_difference(&zero).unwrap(), 0.0);
    }

    #[test]
    fn single_player_step_matches_a_direct_solve() {
        use crate::pde::{solve_grid, DiffusionSpec, FnScalar, FnVector, ScalarFn};
        let game = lq_game(1, 41, MomentumCost::Quadratic);
        let it = smooth_iterate_1d(&game);
        let s = picard_step(&game, &it).unwrap();
        // one player: -∂_t w - a w'' + ½ u' w' = ½ q x²
        let q = match &game.terminal[0] {
            ScalarFn::Quadratic { .. } => 1.0,
            _ => unreachable!(),
        };
        let g = it.grads[0].clone();
        let sampled = SampledField::new(&g);
        let drift = FnVector::new(|t: f64, x: &[f64], out: &mut [f64]| out[0] = 0.5 * sampled.eval(t, x));
        let source = FnScalar::new(|_t: f64, x: &[f64]| 0.5 * q * x[0] * x[0]);
        let a = DiffusionSpec::from_volatility(&[1.0]).unwrap();
        let p = LinearProblem {
            diffusion: &a,
            drift: &drift,
            source: &source,
            terminal: &game.terminal[0],
            start: 0.0,
            horizon: game.horizon,
        };
        let direct = solve_grid(&p, &game.grid, &game.solver).unwrap();
        assert!(direct.field.max_abs_diff(&s.u[0]).unwrap() < 1e-12);
    }

    fn smooth_iterate_1d(game: &GameSpec) -> Iterate {
        let u = Field::from_fn(game.grid.clone(), game.times(), Some(0), |t, x| libm::sin(x[0]) * (1.0 + t)).unwrap();
        Iterate::new(alloc::vec![u]).unwrap()
    }

    #[test]
    fn triple_norm_is_symmetric() {
        let game = lq_game(2, 11, MomentumCost::Quadratic);
        let a = smooth_iterate(&game);
        let b = InitialGuess::Terminal.build(&game).unwrap();
        let ab = triple_norm(&game, &a.u, Some(&b.u)).unwrap();
        let ba = triple_norm(&game, &b.u, Some(&a.u)).unwrap();
        assert_eq!(ab, ba);
        assert!(ab.total() > 0.0);
        assert_eq!(triple_norm(&game, &a.u, Some(&a.u)).unwrap().total(), 0.0);
    }
}
