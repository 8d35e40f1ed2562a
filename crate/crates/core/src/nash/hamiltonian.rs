//! Hamiltonians `H^i(t, x, p)` read at the diagonal momenta `p = 𝒟u`.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, Uniform};

use crate::pde::{ScalarField, ScalarFn};
use crate::{Error, Result};

/// The Hamiltonians of an `N`-player game. Momentum slot `j` of `p` holds
/// `D_j u^j`.
pub trait Hamiltonian: Send + Sync {
    fn players(&self) -> usize;

    fn value(&self, i: usize, t: f64, x: &[f64], p: &[f64]) -> f64;

    /// `∂_{p^i} H^i`.
    fn momentum_derivative(&self, i: usize, t: f64, x: &[f64], p: &[f64]) -> f64;

    /// `∂²_{p^i p^i} H^i`.
    fn momentum_second(&self, i: usize, t: f64, x: &[f64], p: &[f64]) -> f64;

    /// `sup_p |∂_{p^i} H^i|` when it is finite.
    fn momentum_bound(&self) -> Option<f64> {
        None
    }
}

/// The momentum part `φ(p^i)` of a separable Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentumCost {
    /// `½ p²`.
    Quadratic,
    /// `½ ψ_κ(p)²` with `ψ_κ(p) = κ tanh(p / κ)`.
    Saturated { kappa: f64 },
}

impl MomentumCost {
    pub fn value(self, p: f64) -> f64 {
        match self {
            MomentumCost::Quadratic => 0.5 * p * p,
            MomentumCost::Saturated { kappa } => {
                let s = kappa * libm::tanh(p / kappa);
                0.5 * s * s
            }
        }
    }

    pub fn derivative(self, p: f64) -> f64 {
        match self {
            MomentumCost::Quadratic => p,
            MomentumCost::Saturated { kappa } => {
                let th = libm::tanh(p / kappa);
                kappa * th * (1.0 - th * th)
            }
        }
    }

    pub fn second(self, p: f64) -> f64 {
        match self {
            MomentumCost::Quadratic => 1.0,
            MomentumCost::Saturated { kappa } => {
                // d/dp [κ th (1 - th²)] with th' = (1 - th²)/κ
                let th = libm::tanh(p / kappa);
                (1.0 - th * th) * (1.0 - 3.0 * th * th)
            }
        }
    }

    /// `sup |φ'|`: `κ · 2/(3√3)` for the saturated family.
    pub fn derivative_bound(self) -> Option<f64> {
        match self {
            MomentumCost::Quadratic => None,
            MomentumCost::Saturated { kappa } => Some(kappa * 2.0 / (3.0 * libm::sqrt(3.0))),
        }
    }
}

/// `H^i(t, x, p) = φ(p^i) - f^i(t, x)`, where `f^i` is player `i`'s running
/// spatial cost.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableHamiltonian {
    pub momentum: MomentumCost,
    pub costs: Vec<ScalarFn>,
}

impl SeparableHamiltonian {
    pub fn new(momentum: MomentumCost, costs: Vec<ScalarFn>) -> Result<Self> {
        if costs.is_empty() {
            return Err(Error::Empty("running costs"));
        }
        if let MomentumCost::Saturated { kappa } = momentum {
            if !(kappa > 0.0) || !kappa.is_finite() {
                return Err(Error::OutOfRange { what: "saturation level", value: kappa });
            }
        }
        Ok(SeparableHamiltonian { momentum, costs })
    }
}

impl Hamiltonian for SeparableHamiltonian {
    fn players(&self) -> usize {
        self.costs.len()
    }

    fn value(&self, i: usize, t: f64, x: &[f64], p: &[f64]) -> f64 {
        self.momentum.value(p[i]) - self.costs[i].eval(t, x)
    }

    fn momentum_derivative(&self, i: usize, _t: f64, _x: &[f64], p: &[f64]) -> f64 {
        self.momentum.derivative(p[i])
    }

    fn momentum_second(&self, i: usize, _t: f64, _x: &[f64], p: &[f64]) -> f64 {
        self.momentum.second(p[i])
    }

    fn momentum_bound(&self) -> Option<f64> {
        self.momentum.derivative_bound()
    }
}

/// Largest relative disagreement between the analytic momentum derivatives
/// and central differences at `count` random points, relative to
/// `max(1, |analytic|)`.
pub fn probe_hamiltonian(h: &dyn Hamiltonian, count: usize, seed: u64) -> f64 {
    let n = h.players();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ux = Uniform::new(-2.0, 2.0).expect("valid range");
    let up = Uniform::new(-3.0, 3.0).expect("valid range");
    let ut = Uniform::new(0.0, 1.0).expect("valid range");
    let step = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let t = ut.sample(&mut rng);
        let x: Vec<f64> = (0..n).map(|_| ux.sample(&mut rng)).collect();
        let mut p: Vec<f64> = (0..n).map(|_| up.sample(&mut rng)).collect();
        for i in 0..n {
            let c = p[i];
            p[i] = c + step;
            let (vp, dp) = (h.value(i, t, &x, &p), h.momentum_derivative(i, t, &x, &p));
            p[i] = c - step;
            let (vm, dm) = (h.value(i, t, &x, &p), h.momentum_derivative(i, t, &x, &p));
            p[i] = c;
            let d = h.momentum_derivative(i, t, &x, &p);
            let d2 = h.momentum_second(i, t, &x, &p);
            worst = worst
                .max((d - (vp - vm) / (2.0 * step)).abs() / d.abs().max(1.0))
                .max((d2 - (dp - dm) / (2.0 * step)).abs() / d2.abs().max(1.0));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(n: usize, m: MomentumCost) -> SeparableHamiltonian {
        let costs = (0..n).map(|_| ScalarFn::Quadratic { dim: n, q: alloc::vec![0.5; n * n] }).collect();
        SeparableHamiltonian::new(m, costs).unwrap()
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        assert!(probe_hamiltonian(&quad(3, MomentumCost::Quadratic), 100, 7) < 1e-4);
        assert!(probe_hamiltonian(&quad(3, MomentumCost::Saturated { kappa: 1.5 }), 100, 7) < 1e-4);
    }

    #[test]
    fn saturation_is_bounded_and_invisible_for_small_momenta() {
        let s = MomentumCost::Saturated { kappa: 20.0 };
        let b = s.derivative_bound().unwrap();
        for k in -200..=200 {
            let p = k as f64;
            assert!(s.derivative(p).abs() <= b * (1.0 + 1e-12));
        }
        // ψψ' = p - 4p³/(3κ²) + O(p⁵/κ⁴)
        for k in 0..=10 {
            let p = k as f64;
            assert!((s.derivative(p) - p).abs() <= 2.0 * p * p * p / 400.0 + 1e-15);
        }
    }
}
