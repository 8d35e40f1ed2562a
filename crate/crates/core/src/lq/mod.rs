//! Linear-quadratic Nash games solved through coupled Riccati ODEs.
//!
//! Player `i` controls `dX^i = α^i dt + σ_i dW^i` and pays
//! `E[∫ ½|α^i|² + ½XᵀQ_iX dt + ½X_TᵀΓ_iX_T]`, so
//! `H^i(x, p) = ½(p^i)² - ½xᵀQ_ix`. With `u^i = ½xᵀP_ix + r_i` the Nash
//! system reduces to
//!
//! ```text
//! Ṗ_i = P_i e_i e_iᵀ P_i - Q_i + Mᵀ E_i P_i + P_i E_i M,   ṙ_i = -tr(A P_i),
//! ```
//!
//! where row `j` of `M` is row `j` of `P_j`, `E_i = I - e_i e_iᵀ` and
//! `A = diag(σ²/2)`, with `P_i(T) = Γ_i`, `r_i(T) = 0`.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::holder::Field;
use crate::weights::WeightSequence;
use crate::{Error, Result, MAX_DIM};

/// Blow-up threshold on `max |P_i^{jk}|`.
pub const BLOW_UP: f64 = 1e6;

/// How player indices are arranged: on a line, or on a ring where the lag
/// between `i` and `j` is their cyclic distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Layout {
    #[default]
    Chain,
    Cycle,
}

impl Layout {
    /// `(β_i)^j` for `j = 0..n`.
    pub fn shifted(self, beta: &WeightSequence, i: usize, n: usize) -> Result<Vec<f64>> {
        match self {
            Layout::Chain => beta.shift(i, n),
            Layout::Cycle => beta.shift_cyclic(i, n),
        }
    }
}

/// Parameters of the coupled quadratic cost
/// `Q_i = q (e_i - κ w_i)(e_i - κ w_i)ᵀ`, `Γ_i = g (e_i - κ_T w_i)(e_i - κ_T w_i)ᵀ`
/// with `w_i^j = (β_i)^j` off the diagonal and `w_i^i = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingParams {
    pub q: f64,
    pub kappa: f64,
    pub g: f64,
    pub kappa_terminal: f64,
    pub sigma: f64,
    pub horizon: f64,
    pub layout: Layout,
}

impl Default for CouplingParams {
    fn default() -> Self {
        CouplingParams { q: 1.0, kappa: 0.5, g: 1.0, kappa_terminal: 0.5, sigma: 1.0, horizon: 0.2, layout: Layout::Chain }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LqGameSpec {
    n: usize,
    sigma: Vec<f64>,
    q: Vec<DMatrix<f64>>,
    gamma: Vec<DMatrix<f64>>,
    horizon: f64,
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn symmetrize(m: &mut DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

impl LqGameSpec {
    pub fn new(sigma: Vec<f64>, q: Vec<DMatrix<f64>>, gamma: Vec<DMatrix<f64>>, horizon: f64) -> Result<Self> {
        let n = sigma.len();
        if n == 0 {
            return Err(Error::Empty("players"));
        }
        if q.len() != n || gamma.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: q.len().min(gamma.len()) });
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::OutOfRange { what: "horizon", value: horizon });
        }
        if sigma.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::invalid("sigma", "volatilities must be positive"));
        }
        for m in q.iter().chain(&gamma) {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
            }
            if m.iter().any(|v| !v.is_finite()) || max_asymmetry(m) > 1e-12 {
                return Err(Error::invalid("cost", "cost matrices must be finite and symmetric"));
            }
        }
        Ok(LqGameSpec { n, sigma, q, gamma, horizon })
    }

    /// The coupled family: each player is pulled toward a `β`-weighted
    /// average of the others.
    pub fn coupled(n: usize, beta: &WeightSequence, p: &CouplingParams) -> Result<Self> {
        let mut q = Vec::with_capacity(n);
        let mut gamma = Vec::with_capacity(n);
        for i in 0..n {
            let w = p.layout.shifted(beta, i, n)?;
            let v = |kappa: f64| {
                nalgebra::DVector::from_fn(n, |j, _| if j == i { 1.0 } else { -kappa * w[j] })
            };
            let (a, b) = (v(p.kappa), v(p.kappa_terminal));
            q.push(&a * a.transpose() * p.q);
            gamma.push(&b * b.transpose() * p.g);
        }
        Self::new(alloc::vec![p.sigma; n], q, gamma, p.horizon)
    }

    pub fn players(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn running_cost(&self, i: usize) -> &DMatrix<f64> {
        &self.q[i]
    }

    pub fn terminal_cost(&self, i: usize) -> &DMatrix<f64> {
        &self.gamma[i]
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn with_horizon(mut self, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::OutOfRange { what: "horizon", value: horizon });
        }
        self.horizon = horizon;
        Ok(self)
    }

    /// `max |M^{jk}| / (β_i^j ∧ √(β_i^j β_i^k))` over all players and entries
    /// of the given matrices.
    fn decay_ratio(&self, beta: &WeightSequence, layout: Layout, mats: &[&DMatrix<f64>]) -> Result<f64> {
        let mut k: f64 = 0.0;
        for (i, m) in mats.iter().enumerate() {
            let w = layout.shifted(beta, i, self.n)?;
            for a in 0..self.n {
                for b in 0..self.n {
                    let weight = w[a].min(libm::sqrt(w[a] * w[b])).min(w[b]);
                    k = k.max(m[(a, b)].abs() / weight);
                }
            }
        }
        Ok(k)
    }

    /// Smallest `c` with `|Q_i^{jk}|, |Γ_i^{jk}| ≤ c (β^{i-j} ∧ √(β^{i-j} β^{i-k}))`.
    pub fn cost_decay(&self, beta: &WeightSequence, layout: Layout) -> Result<f64> {
        let q: Vec<&DMatrix<f64>> = self.q.iter().collect();
        let g: Vec<&DMatrix<f64>> = self.gamma.iter().collect();
        Ok(self.decay_ratio(beta, layout, &q)?.max(self.decay_ratio(beta, layout, &g)?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiState {
    pub t: f64,
    /// Value Hessians `P_i`.
    pub p: Vec<DMatrix<f64>>,
    /// Offsets `r_i`.
    pub r: Vec<f64>,
}

impl RiccatiState {
    pub fn terminal(spec: &LqGameSpec) -> Self {
        RiccatiState { t: spec.horizon, p: spec.gamma.clone(), r: alloc::vec![0.0; spec.n] }
    }

    pub fn max_entry(&self) -> f64 {
        self.p.iter().flat_map(|m| m.iter()).fold(0.0, |a: f64, v| a.max(v.abs()))
    }

    pub fn max_asymmetry(&self) -> f64 {
        self.p.iter().map(max_asymmetry).fold(0.0, f64::max)
    }

    fn axpy(&self, h: f64, d: &(Vec<DMatrix<f64>>, Vec<f64>)) -> RiccatiState {
        RiccatiState {
            t: self.t + h,
            p: self.p.iter().zip(&d.0).map(|(p, dp)| p + dp * h).collect(),
            r: self.r.iter().zip(&d.1).map(|(r, dr)| r + dr * h).collect(),
        }
    }
}

/// Forward-time derivatives `(Ṗ_i, ṙ_i)` at a state.
pub fn riccati_rhs(state: &RiccatiState, spec: &LqGameSpec) -> (Vec<DMatrix<f64>>, Vec<f64>) {
    let n = spec.n;
    let m = DMatrix::from_fn(n, n, |j, k| state.p[j][(j, k)]);
    let dp = (0..n)
        .map(|i| {
            let p = &state.p[i];
            let col = p.column(i);
            let mut e = m.clone();
            e.row_mut(i).fill(0.0);
            // Mᵀ E_i P_i with E_i M = M with row i zeroed
            let cross = e.transpose() * p;
            col * col.transpose() - &spec.q[i] + &cross + cross.transpose()
        })
        .collect();
    let dr = (0..n)
        .map(|i| -(0..n).map(|k| 0.5 * spec.sigma[k] * spec.sigma[k] * state.p[i][(k, k)]).sum::<f64>())
        .collect();
    (dp, dr)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiTrajectory {
    /// States at ascending times from `0` to `T`.
    pub states: Vec<RiccatiState>,
    pub dt: f64,
    /// `max |P_i(0)|` change when the step is halved.
    pub halving_change: f64,
}

fn integrate_steps(spec: &LqGameSpec, steps: usize) -> Result<Vec<RiccatiState>> {
    let h = spec.horizon / steps as f64;
    let mut s = RiccatiState::terminal(spec);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(s.clone());
    for k in 0..steps {
        let t_hi = spec.horizon - k as f64 * h;
        let k1 = riccati_rhs(&s, spec);
        let s2 = s.axpy(-0.5 * h, &k1);
        let k2 = riccati_rhs(&s2, spec);
        let s3 = s.axpy(-0.5 * h, &k2);
        let k3 = riccati_rhs(&s3, spec);
        let s4 = s.axpy(-h, &k3);
        let k4 = riccati_rhs(&s4, spec);
        let mut next = RiccatiState {
            t: spec.horizon - (k + 1) as f64 * h,
            p: (0..spec.n)
                .map(|i| &s.p[i] - (&k1.0[i] + &k2.0[i] * 2.0 + &k3.0[i] * 2.0 + &k4.0[i]) * (h / 6.0))
                .collect(),
            r: (0..spec.n).map(|i| s.r[i] - (k1.1[i] + 2.0 * k2.1[i] + 2.0 * k3.1[i] + k4.1[i]) * (h / 6.0)).collect(),
        };
        if k + 1 == steps {
            next.t = 0.0;
        }
        next.p.iter_mut().for_each(symmetrize);
        let big = next.max_entry();
        if !(big <= BLOW_UP) {
            return Err(Error::RiccatiBlowUp { t_lo: next.t, t_hi });
        }
        out.push(next.clone());
        s = next;
    }
    out.reverse();
    Ok(out)
}

/// RK4 backward from `T` with step at most `dt ≤ T/50`, plus a second run at
/// half the step for the error estimate.
pub fn riccati_integrate(spec: &LqGameSpec, dt: f64) -> Result<RiccatiTrajectory> {
    if !(dt > 0.0) || dt > spec.horizon / 50.0 * (1.0 + 1e-12) {
        return Err(Error::OutOfRange { what: "Riccati step (need dt <= T/50)", value: dt });
    }
    let steps = libm::ceil(spec.horizon / dt - 1e-9) as usize;
    let states = integrate_steps(spec, steps)?;
    let fine = integrate_steps(spec, 2 * steps)?;
    let halving_change = states[0]
        .p
        .iter()
        .zip(&fine[0].p)
        .map(|(a, b)| (a - b).amax())
        .fold(0.0, f64::max);
    Ok(RiccatiTrajectory { states, dt: spec.horizon / steps as f64, halving_change })
}

impl RiccatiTrajectory {
    pub fn horizon(&self) -> f64 {
        self.states[self.states.len() - 1].t
    }

    /// `(P_i(t), r_i(t))`, linear in `t` between stored nodes.
    pub fn at(&self, i: usize, t: f64) -> Result<(DMatrix<f64>, f64)> {
        let last = self.states.len() - 1;
        if !(t >= -1e-12 && t <= self.horizon() + 1e-12) {
            return Err(Error::OutOfRange { what: "trajectory time", value: t });
        }
        if i >= self.states[0].p.len() {
            return Err(Error::invalid("i", "player outside the game"));
        }
        let s = (t / self.dt).clamp(0.0, last as f64);
        let a = (libm::floor(s) as usize).min(last);
        let b = (a + 1).min(last);
        let w = s - a as f64;
        let (sa, sb) = (&self.states[a], &self.states[b]);
        if w == 0.0 || a == b {
            return Ok((sa.p[i].clone(), sa.r[i]));
        }
        Ok((&sa.p[i] * (1.0 - w) + &sb.p[i] * w, sa.r[i] * (1.0 - w) + sb.r[i] * w))
    }

    /// `K_P = max_{t,i,j,k} |P_i^{jk}(t)| / (β^{i-j} ∧ √(β^{i-j} β^{i-k}))`.
    pub fn decay_constant(&self, beta: &WeightSequence, layout: Layout) -> Result<f64> {
        let n = self.states[0].p.len();
        let shifted: Vec<Vec<f64>> = (0..n).map(|i| layout.shifted(beta, i, n)).collect::<Result<_>>()?;
        let mut k: f64 = 0.0;
        for s in &self.states {
            for (i, p) in s.p.iter().enumerate() {
                let w = &shifted[i];
                for a in 0..n {
                    for b in 0..n {
                        k = k.max(p[(a, b)].abs() / w[a].min(w[b]).min(libm::sqrt(w[a] * w[b])));
                    }
                }
            }
        }
        Ok(k)
    }

    /// Column names of [`row`](Self::row): `t`, then `P{i}_{j}{k}` for
    /// `j ≤ k`, then `r{i}`, player by player.
    pub fn columns(&self) -> Vec<alloc::string::String> {
        let n = self.states[0].p.len();
        let mut out = alloc::vec![alloc::string::String::from("t")];
        for i in 0..n {
            for j in 0..n {
                for k in j..n {
                    out.push(alloc::format!("P{i}_{j}_{k}"));
                }
            }
            out.push(alloc::format!("r{i}"));
        }
        out
    }

    pub fn row(&self, k: usize) -> Vec<f64> {
        let s = &self.states[k];
        let n = s.p.len();
        let mut out = alloc::vec![s.t];
        for i in 0..n {
            for j in 0..n {
                for l in j..n {
                    out.push(s.p[i][(j, l)]);
                }
            }
            out.push(s.r[i]);
        }
        out
    }
}

/// `u^i(t, x) = ½xᵀP_i(t)x + r_i(t)` and its gradient `P_i(t)x`.
pub fn lq_value(traj: &RiccatiTrajectory, i: usize, t: f64, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    let (p, r) = traj.at(i, t)?;
    if x.len() != p.nrows() {
        return Err(Error::DimensionMismatch { expected: p.nrows(), found: x.len() });
    }
    let xv = nalgebra::DVector::from_column_slice(x);
    let g = &p * &xv;
    Ok((0.5 * xv.dot(&g) + r, g.iter().copied().collect()))
}

/// Largest interior error of one player's sampled value function on one time
/// slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleRow {
    pub t: f64,
    pub player: usize,
    pub max_error: f64,
    /// Node attaining `max_error`.
    pub node: usize,
    /// Sampled and oracle values at the origin node.
    pub sampled_origin: f64,
    pub oracle_origin: f64,
}

/// Compares `u^i` with `½xᵀP_i(t)x + r_i(t)` on nodes at depth `≥ collar`,
/// one row per player and time slice.
pub fn oracle_errors(traj: &RiccatiTrajectory, u: &[Field], collar: usize) -> Result<Vec<OracleRow>> {
    let mut rows = Vec::new();
    for (i, f) in u.iter().enumerate() {
        let grid = f.grid();
        let n = grid.dim();
        let mut x = [0.0; MAX_DIM];
        for (k, &t) in f.times().iter().enumerate() {
            let (p, r) = traj.at(i, t)?;
            if p.nrows() != n {
                return Err(Error::DimensionMismatch { expected: p.nrows(), found: n });
            }
            let value = |x: &[f64]| {
                let mut q = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        q += x[a] * p[(a, b)] * x[b];
                    }
                }
                0.5 * q + r
            };
            let slice = f.slice(k);
            let mut row = OracleRow { t, player: i, max_error: 0.0, node: grid.origin(), sampled_origin: 0.0, oracle_origin: 0.0 };
            for (node, v) in slice.iter().enumerate() {
                if grid.depth(node) < collar {
                    continue;
                }
                grid.position(node, &mut x);
                let e = (v - value(&x[..n])).abs();
                if e > row.max_error {
                    row.max_error = e;
                    row.node = node;
                }
            }
            grid.position(grid.origin(), &mut x);
            row.sampled_origin = slice[grid.origin()];
            row.oracle_origin = value(&x[..n]);
            rows.push(row);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightKind;

    fn scalar_oracle(q: f64, g: f64, tau: f64) -> f64 {
        let k = libm::sqrt(q);
        let th = libm::tanh(k * tau);
        k * (g + k * th) / (k + g * th)
    }

    fn scalar(q: f64, g: f64, t: f64) -> LqGameSpec {
        let m = |v: f64| DMatrix::from_element(1, 1, v);
        LqGameSpec::new(alloc::vec![1.0], alloc::vec![m(q)], alloc::vec![m(g)], t).unwrap()
    }

    #[test]
    fn scalar_riccati_matches_closed_form() {
        let spec = scalar(2.0, 0.3, 1.0);
        let tr = riccati_integrate(&spec, 1e-3).unwrap();
        for s in tr.states.iter().step_by(100) {
            assert!((s.p[0][(0, 0)] - scalar_oracle(2.0, 0.3, 1.0 - s.t)).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let z = DMatrix::zeros(3, 3);
        let spec = LqGameSpec::new(alloc::vec![1.0; 3], alloc::vec![z.clone(); 3], alloc::vec![z; 3], 0.5).unwrap();
        let tr = riccati_integrate(&spec, 0.01).unwrap();
        assert!(tr.states.iter().all(|s| s.max_entry() == 0.0 && s.r.iter().all(|r| *r == 0.0)));
    }

    #[test]
    fn decoupled_costs_stay_diagonal() {
        let n = 3;
        let diag = |i: usize, v: f64| DMatrix::from_fn(n, n, |a, b| if a == i && b == i { v } else { 0.0 });
        let q = (0..n).map(|i| diag(i, 1.0 + i as f64)).collect();
        let g = (0..n).map(|i| diag(i, 0.5)).collect();
        let spec = LqGameSpec::new(alloc::vec![1.0; n], q, g, 0.5).unwrap();
        let tr = riccati_integrate(&spec, 0.005).unwrap();
        for s in &tr.states {
            for (i, p) in s.p.iter().enumerate() {
                for a in 0..n {
                    for b in 0..n {
                        if (a, b) != (i, i) {
                            assert_eq!(p[(a, b)], 0.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn fourth_order_refinement() {
        let beta = WeightSequence::build(WeightKind::Polynomial { exponent: 3.0 }, 16).unwrap();
        let spec = LqGameSpec::coupled(3, &beta, &CouplingParams { horizon: 1.0, q: 4.0, ..Default::default() }).unwrap();
        let p0 = |dt: f64| riccati_integrate(&spec, dt).unwrap().states[0].p.clone();
        let (a, b, c) = (p0(0.02), p0(0.01), p0(0.005));
        let d1 = a.iter().zip(&b).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max);
        let d2 = b.iter().zip(&c).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max);
        assert!(d1 / d2 > 12.0 && d1 / d2 < 20.0, "{}", d1 / d2);
    }

    #[test]
    fn negative_terminal_cost_blows_up() {
        // P' = q - P² in reverse time escapes to -∞ when P(T) < -√q
        let spec = scalar(1.0, -50.0, 1.0);
        match riccati_integrate(&spec, 1e-3) {
            Err(Error::RiccatiBlowUp { t_lo, t_hi }) => {
                // exact escape time τ* = atanh(1/50)
                let tau = libm::atanh(1.0 / 50.0);
                assert!(t_lo < 1.0 - tau + 1e-3 && t_hi > 1.0 - tau - 2e-3, "{t_lo} {t_hi}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn values_terminal_and_origin() {
        let beta = WeightSequence::build(WeightKind::Polynomial { exponent: 3.0 }, 16).unwrap();
        let spec = LqGameSpec::coupled(2, &beta, &CouplingParams::default()).unwrap();
        let tr = riccati_integrate(&spec, 0.002).unwrap();
        let x = [0.3, -0.7];
        let (u, g) = lq_value(&tr, 1, 0.2, &x).unwrap();
        let gm = spec.terminal_cost(1);
        let exact = 0.5 * (gm[(0, 0)] * x[0] * x[0] + 2.0 * gm[(0, 1)] * x[0] * x[1] + gm[(1, 1)] * x[1] * x[1]);
        assert_eq!(u, exact);
        assert_eq!(g[1], gm[(1, 0)] * x[0] + gm[(1, 1)] * x[1]);
        let (u0, g0) = lq_value(&tr, 0, 0.05, &[0.0, 0.0]).unwrap();
        assert_eq!(u0, tr.at(0, 0.05).unwrap().1);
        assert_eq!(g0, alloc::vec![0.0, 0.0]);
        assert!(lq_value(&tr, 0, 0.3, &x).is_err());
        assert!(tr.states.iter().all(|s| s.max_asymmetry() <= 1e-10));
    }

    #[test]
    fn rhs_is_the_quadratic_part_of_the_nash_equation() {
        // substitute u^i = ½xᵀP_ix into the Nash equation at random x and
        // compare the x-quadratic residual with ½xᵀṖ_ix
        let beta = WeightSequence::build(WeightKind::Polynomial { exponent: 3.0 }, 16).unwrap();
        let spec = LqGameSpec::coupled(3, &beta, &CouplingParams { q: 2.0, ..Default::default() }).unwrap();
        let p: Vec<DMatrix<f64>> = (0..3)
            .map(|i| DMatrix::from_fn(3, 3, |a, b| 0.3 + 0.1 * (a + b + i) as f64 + if a == b { 1.0 } else { 0.0 }))
            .collect();
        let state = RiccatiState { t: 0.0, p: p.clone(), r: alloc::vec![0.0; 3] };
        let (dp, _) = riccati_rhs(&state, &spec);
        let x = nalgebra::DVector::from_vec(alloc::vec![0.4, -1.1, 0.7]);
        for i in 0..3 {
            let grad = |j: usize| (&p[j] * &x)[j];
            let own = (&p[i] * &x).clone();
            let mut h = 0.5 * grad(i) * grad(i) - 0.5 * x.dot(&(&spec.q[i] * &x));
            for j in 0..3 {
                if j != i {
                    h += grad(j) * own[j];
                }
            }
            // -½xᵀṖx + H + Σ ... = 0
            assert!((0.5 * x.dot(&(&dp[i] * &x)) - h).abs() < 1e-12);
        }
    }

    #[test]
    fn coupled_costs_decay() {
        let beta = WeightSequence::build(WeightKind::Polynomial { exponent: 3.0 }, 16).unwrap();
        let p = CouplingParams::default();
        let spec = LqGameSpec::coupled(4, &beta, &p).unwrap();
        let c = spec.cost_decay(&beta, Layout::Chain).unwrap();
        assert!(c <= p.q.max(p.g) * (1.0 + p.kappa) * (1.0 + p.kappa));
        let a = riccati_integrate(&spec, 0.004).unwrap().decay_constant(&beta, Layout::Chain).unwrap();
        let b = riccati_integrate(&spec, 0.002).unwrap().decay_constant(&beta, Layout::Chain).unwrap();
        assert!((a - b).abs() / b < 1e-6);
    }

    #[test]
    fn oracle_errors_vanish_on_sampled_oracle() {
        let beta = crate::weights::WeightSequence::build(WeightKind::Polynomial { exponent: 3.0 }, 16).unwrap();
        let spec = LqGameSpec::coupled(2, &beta, &CouplingParams::default()).unwrap();
        let tr = riccati_integrate(&spec, 0.002).unwrap();
        let grid = crate::holder::SpatialGrid::new(2, 2.0, 9).unwrap();
        let times = alloc::vec![0.0, 0.1, 0.2];
        let u: Vec<Field> = (0..2)
            .map(|i| Field::from_fn(grid.clone(), times.clone(), Some(i), |t, x| lq_value(&tr, i, t, x).unwrap().0).unwrap())
            .collect();
        let rows = oracle_errors(&tr, &u, 1).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.max_error < 1e-13 && (r.sampled_origin - r.oracle_origin).abs() < 1e-13));
        let bumped = Field::new(grid, times, u[0].values().iter().map(|v| v + 0.5).collect(), Some(0)).unwrap();
        let rows = oracle_errors(&tr, &[bumped, u[1].clone()], 1).unwrap();
        assert!((rows[0].max_error - 0.5).abs() < 1e-12);
    }
}
