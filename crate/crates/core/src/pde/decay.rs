//! Measured decay constants of a solved field.

use alloc::vec::Vec;

use crate::holder::{sup_abs, Differentiator, Field};
use crate::weights::MultiIndex;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    /// `sup_j ‖D_j w‖ / β^j`.
    pub k1: f64,
    /// `sup_{jk} ‖D²_{jk} w‖ / (β^j ∧ √(β^j β^k))`.
    pub k2: f64,
    /// Third-order analogue; the weight is the smallest over every ordered
    /// pair drawn from the multi-index.
    pub k3: f64,
    /// `sup_j ‖∂_t D_j w‖ / √β^j`, by differences of consecutive slices.
    pub time_lipschitz_first: f64,
    /// `sup_{jk} ‖D²_{jk} w(s) - D²_{jk} w(t)‖ / (√β^j |s - t|)`.
    pub time_lipschitz_second: f64,
    /// `‖D_j w‖ / β^j` for each axis.
    pub k1_by_axis: Vec<f64>,
    /// Nodes excluded on every face.
    pub collar: usize,
    pub time_nodes: usize,
}

/// `β^j ∧ √(β^j β^k)` maximized over the labelings the multi-index allows,
/// i.e. the tightest weight any ordering of its coordinates certifies.
fn pair_weight(weights: &[f64], alpha: &MultiIndex) -> f64 {
    let c = alpha.coords();
    let mut w = f64::INFINITY;
    for a in 0..c.len() {
        for b in 0..c.len() {
            if a != b {
                let (bj, bk) = (weights[c[a]], weights[c[b]]);
                w = w.min(bj.min(libm::sqrt(bj * bk)));
            }
        }
    }
    if c.len() == 1 {
        weights[c[0]]
    } else {
        w
    }
}

/// `√β^j` with the same labeling rule.
fn root_weight(weights: &[f64], alpha: &MultiIndex) -> f64 {
    alpha.coords().iter().map(|&j| libm::sqrt(weights[j])).fold(f64::INFINITY, f64::min)
}

/// Computes the decay constants of `w` over nodes at depth `≥ collar`.
/// `weights[j]` is the weight attached to axis `j`, already shifted to the
/// player that owns `w`. Derivatives are taken slice by slice.
pub fn verify_decay(w: &Field, weights: &[f64], collar: usize) -> Result<DecayReport> {
    let grid = w.grid();
    let dim = grid.dim();
    if weights.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: weights.len() });
    }
    if weights.iter().any(|b| !(*b > 0.0)) {
        return Err(Error::invalid("weights", "weights must be positive"));
    }
    if 2 * collar + 1 > grid.points() {
        return Err(Error::GridTooSmall { points: grid.points(), needed: 2 * collar + 1 });
    }
    let diff = Differentiator::new(grid)?;
    let first: Vec<MultiIndex> = MultiIndex::all_of_order(dim, 1);
    let second: Vec<MultiIndex> = MultiIndex::all_of_order(dim, 2);
    let third: Vec<MultiIndex> = MultiIndex::all_of_order(dim, 3);
    let mut report = DecayReport {
        k1: 0.0,
        k2: 0.0,
        k3: 0.0,
        time_lipschitz_first: 0.0,
        time_lipschitz_second: 0.0,
        k1_by_axis: alloc::vec![0.0; dim],
        collar,
        time_nodes: w.time_count(),
    };
    let mut prev: Option<(f64, Vec<Vec<f64>>, Vec<Vec<f64>>)> = None;
    for (slice, &t) in w.slices().zip(w.times()) {
        let d1: Vec<Vec<f64>> = first.iter().map(|a| diff.apply(slice, a)).collect::<Result<_>>()?;
        let d2: Vec<Vec<f64>> = second.iter().map(|a| diff.apply(slice, a)).collect::<Result<_>>()?;
        for (j, (a, d)) in first.iter().zip(&d1).enumerate() {
            let q = sup_abs(grid, d, collar).0 / pair_weight(weights, a);
            report.k1_by_axis[j] = report.k1_by_axis[j].max(q);
            report.k1 = report.k1.max(q);
        }
        for (a, d) in second.iter().zip(&d2) {
            report.k2 = report.k2.max(sup_abs(grid, d, collar).0 / pair_weight(weights, a));
        }
        for a in &third {
            let d = diff.apply(slice, a)?;
            report.k3 = report.k3.max(sup_abs(grid, &d, collar).0 / pair_weight(weights, a));
        }
        if let Some((t0, p1, p2)) = &prev {
            let dt = t - t0;
            for ((a, now), before) in first.iter().zip(&d1).zip(p1) {
                let delta: Vec<f64> = now.iter().zip(before).map(|(x, y)| x - y).collect();
                let q = sup_abs(grid, &delta, collar).0 / (root_weight(weights, a) * dt);
                report.time_lipschitz_first = report.time_lipschitz_first.max(q);
            }
            for ((a, now), before) in second.iter().zip(&d2).zip(p2) {
                let delta: Vec<f64> = now.iter().zip(before).map(|(x, y)| x - y).collect();
                let q = sup_abs(grid, &delta, collar).0 / (root_weight(weights, a) * dt);
                report.time_lipschitz_second = report.time_lipschitz_second.max(q);
            }
        }
        prev = Some((t, d1, d2));
    }
    Ok(report)
}
