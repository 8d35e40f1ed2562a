//! Weighted sup norms, axis-aligned Hölder seminorms and the assembled
//! `C^{m+γ}_β` / `C^{m+γ−}_β` norms.

use alloc::vec::Vec;

use super::{Differentiator, Field, SpatialGrid};
use crate::weights::{multi_index_weight, MultiIndex};
use crate::{Error, Result};

/// Pair enumeration switches to a lag ladder above this many points per line.
pub const FULL_PAIR_LIMIT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NormOptions {
    /// Enumerate every node pair even on long lines.
    pub full_enumeration: bool,
    /// Nodes excluded on every face of the box.
    pub collar: usize,
}

impl NormOptions {
    pub fn with_collar(collar: usize) -> Self {
        NormOptions { collar, ..Default::default() }
    }
}

fn check_collar(grid: &SpatialGrid, collar: usize) -> Result<()> {
    if 2 * collar + 2 > grid.points() {
        return Err(Error::GridTooSmall { points: grid.points(), needed: 2 * collar + 2 });
    }
    Ok(())
}

/// `max |v|` over nodes at depth `≥ collar`, with the maximizing node.
pub fn sup_abs(grid: &SpatialGrid, values: &[f64], collar: usize) -> (f64, usize) {
    let mut best = (0.0, grid.origin());
    for (n, v) in values.iter().enumerate() {
        if v.abs() > best.0 && (collar == 0 || grid.depth(n) >= collar) {
            best = (v.abs(), n);
        }
    }
    best
}

/// `‖V‖_∞ / β^α` over all time–space nodes.
pub fn weighted_sup_norm(field: &Field, weights: &[f64], alpha: &MultiIndex) -> Result<f64> {
    Ok(field.sup_norm() / multi_index_weight(weights, alpha)?)
}

fn lags(n: usize, gamma: f64, full: bool) -> Vec<usize> {
    if gamma == 1.0 {
        // the Lipschitz quotient is maximized by neighbors
        return alloc::vec![1];
    }
    if full || n <= FULL_PAIR_LIMIT {
        return (1..n).collect();
    }
    let mut out = Vec::new();
    let mut l = 1;
    while l < n {
        out.push(l);
        l *= 2;
    }
    out
}

/// `[V]_γ` of one time slice: the largest quotient
/// `|V(y) - V(z)| / |y - z|^γ` over node pairs on lines parallel to an axis.
pub fn holder_seminorm(grid: &SpatialGrid, values: &[f64], gamma: f64, opts: NormOptions) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::OutOfRange { what: "Hölder exponent", value: gamma });
    }
    if values.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), found: values.len() });
    }
    check_collar(grid, opts.collar)?;
    let m = grid.points();
    let c = opts.collar;
    let n = m - 2 * c;
    let h = grid.spacing();
    let lag_set = lags(n, gamma, opts.full_enumeration);
    let denom: Vec<f64> = lag_set.iter().map(|&l| libm::pow(l as f64 * h, gamma)).collect();
    let mut best: f64 = 0.0;
    for axis in 0..grid.dim() {
        let stride = grid.stride(axis);
        let lines = grid.len() / m;
        let per_line = crate::exec::map(lines, |l| {
            let base = (l / stride) * stride * m + l % stride;
            if c > 0 && (0..grid.dim()).any(|k| k != axis && {
                let i = grid.axis_index(base, k);
                i < c || i + c >= m
            }) {
                return 0.0;
            }
            let at = |q: usize| values[base + (c + q) * stride];
            if gamma == 0.0 {
                let (lo, hi) = (0..n).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), q| {
                    let v = at(q);
                    (lo.min(v), hi.max(v))
                });
                return hi - lo;
            }
            let mut b: f64 = 0.0;
            for (li, &lag) in lag_set.iter().enumerate() {
                for q in 0..n - lag {
                    b = b.max((at(q + lag) - at(q)).abs() / denom[li]);
                }
            }
            b
        });
        best = per_line.into_iter().fold(best, f64::max);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolicSeminorm {
    /// `sup_x [V(·, x)]_{γ/2} / (β^α)^{1/2}`.
    pub time_part: f64,
    /// `sup_t [V(t, ·)]_γ / β^α`.
    pub space_part: f64,
}

impl ParabolicSeminorm {
    pub fn total(&self) -> f64 {
        self.time_part + self.space_part
    }
}

/// `[V]_{γ/2, γ; β, α}`.
pub fn parabolic_seminorm(
    field: &Field,
    gamma: f64,
    weights: &[f64],
    alpha: &MultiIndex,
    opts: NormOptions,
) -> Result<ParabolicSeminorm> {
    if field.time_count() < 2 {
        return Err(Error::TooFewTimeNodes { needed: 2, found: field.time_count() });
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::OutOfRange { what: "parabolic Hölder exponent", value: gamma });
    }
    let w = multi_index_weight(weights, alpha)?;
    let grid = field.grid();
    check_collar(grid, opts.collar)?;
    let times = field.times();
    let k = times.len();
    let tlags = lags(k, gamma / 2.0, opts.full_enumeration);
    let mut time_part: f64 = 0.0;
    for &lag in &tlags {
        for a in 0..k - lag {
            let (s0, s1) = (field.slice(a), field.slice(a + lag));
            let diff: Vec<f64> = s0.iter().zip(s1).map(|(x, y)| y - x).collect();
            let (d, _) = sup_abs(grid, &diff, opts.collar);
            time_part = time_part.max(d / libm::pow(times[a + lag] - times[a], gamma / 2.0));
        }
    }
    let mut space_part: f64 = 0.0;
    for s in field.slices() {
        space_part = space_part.max(holder_seminorm(grid, s, gamma, opts)?);
    }
    Ok(ParabolicSeminorm { time_part: time_part / libm::sqrt(w), space_part: space_part / w })
}

/// `D^α V` for every `|α| ≤ max_order` of a single time slice.
#[derive(Debug, Clone)]
pub struct DerivativeFamily {
    max_order: usize,
    entries: Vec<(MultiIndex, Vec<f64>)>,
}

impl DerivativeFamily {
    pub fn compute(diff: &Differentiator, values: &[f64], max_order: usize) -> Result<Self> {
        if max_order > crate::weights::MAX_ORDER {
            return Err(Error::OrderTooHigh { order: max_order });
        }
        let mut entries = Vec::new();
        for alpha in MultiIndex::all_up_to(diff.grid().dim(), max_order) {
            let v = if alpha.is_zero() { values.to_vec() } else { diff.apply(values, &alpha)? };
            entries.push((alpha, v));
        }
        Ok(DerivativeFamily { max_order, entries })
    }

    /// Builds a family from explicit entries (for instance analytic
    /// derivatives). Orders are not checked until a norm is requested.
    pub fn from_entries(entries: Vec<(MultiIndex, Vec<f64>)>) -> Self {
        let max_order = entries.iter().map(|(a, _)| a.order()).max().unwrap_or(0);
        DerivativeFamily { max_order, entries }
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn get(&self, alpha: &MultiIndex) -> Option<&[f64]> {
        self.entries.iter().find(|(a, _)| a == alpha).map(|(_, v)| v.as_slice())
    }

    pub fn entries(&self) -> &[(MultiIndex, Vec<f64>)] {
        &self.entries
    }

    /// Entrywise `self - other`.
    pub fn difference(&self, other: &DerivativeFamily) -> Result<DerivativeFamily> {
        if self.entries.len() != other.entries.len() {
            return Err(Error::DimensionMismatch { expected: self.entries.len(), found: other.entries.len() });
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|((a, x), (_, y))| (*a, x.iter().zip(y).map(|(p, q)| p - q).collect()))
            .collect();
        Ok(DerivativeFamily { max_order: self.max_order, entries })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormVariant {
    /// `C^{m+γ}_β`.
    Full,
    /// `C^{m+γ−}_β`: order-`m` terms weighted by predecessor weights.
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    /// `sup_{|α| = k} ‖D^α V‖_∞ / weight`.
    Sup,
    /// `sup_{|α| = k} [D^α V]_γ / weight`.
    Holder,
    /// `sup_{|α| = m} sup_{α'} (‖D^α V‖_∞ + [D^α V]_γ) / β^{α'}` in the minus
    /// variant.
    MinusTop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormEntry {
    pub term: Term,
    pub order: usize,
    /// Multi-index attaining the sup.
    pub alpha: MultiIndex,
    pub value: f64,
    /// The evaluation touched nodes where a one-sided stencil was used.
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormReport {
    pub variant: NormVariant,
    pub m: usize,
    pub gamma: f64,
    pub total: f64,
    pub entries: Vec<NormEntry>,
    /// Orders whose maxima were attained at one-sided boundary nodes.
    pub boundary_orders: Vec<usize>,
}

fn region_has_one_sided(alpha: &MultiIndex, collar: usize) -> bool {
    let reach = alpha.entries().iter().map(|&(_, m)| if m >= 3 { 2 } else { 1 }).max().unwrap_or(0);
    collar < reach
}

/// Assembles `‖V‖_{m+γ;β}` (or the minus variant) from derivative arrays of
/// one time slice.
pub fn space_norm(
    diff: &Differentiator,
    family: &DerivativeFamily,
    m: usize,
    gamma: f64,
    weights: &[f64],
    variant: NormVariant,
    opts: NormOptions,
) -> Result<NormReport> {
    if m > crate::weights::MAX_ORDER {
        return Err(Error::OrderTooHigh { order: m });
    }
    if variant == NormVariant::Minus && m == 0 {
        return Err(Error::invalid("m", "the minus variant needs m >= 1"));
    }
    let grid = diff.grid();
    let dim = grid.dim();
    let top_sup = if variant == NormVariant::Full { m } else { m - 1 };
    let mut entries = Vec::new();
    let mut boundary_orders = Vec::new();
    let get = |alpha: &MultiIndex| family.get(alpha).ok_or(Error::MissingDerivative { order: alpha.order() });

    for k in 0..=top_sup {
        let mut best = NormEntry { term: Term::Sup, order: k, alpha: MultiIndex::ZERO, value: 0.0, boundary: false };
        for alpha in MultiIndex::all_of_order(dim, k) {
            let (s, node) = sup_abs(grid, get(&alpha)?, opts.collar);
            let v = s / multi_index_weight(weights, &alpha)?;
            if v > best.value || best.alpha.order() != k {
                best = NormEntry {
                    term: Term::Sup,
                    order: k,
                    alpha,
                    value: v,
                    boundary: s > 0.0 && diff.boundary_affected(node, &alpha),
                };
            }
        }
        if best.boundary {
            boundary_orders.push(k);
        }
        entries.push(best);
    }
    {
        let mut best = NormEntry { term: Term::Holder, order: top_sup, alpha: MultiIndex::ZERO, value: 0.0, boundary: false };
        for alpha in MultiIndex::all_of_order(dim, top_sup) {
            let v = holder_seminorm(grid, get(&alpha)?, gamma, opts)? / multi_index_weight(weights, &alpha)?;
            if v > best.value || best.alpha.order() != top_sup {
                best = NormEntry {
                    term: Term::Holder,
                    order: top_sup,
                    alpha,
                    value: v,
                    boundary: region_has_one_sided(&alpha, opts.collar),
                };
            }
        }
        entries.push(best);
    }
    if variant == NormVariant::Minus {
        let mut best = NormEntry { term: Term::MinusTop, order: m, alpha: MultiIndex::ZERO, value: 0.0, boundary: false };
        for alpha in MultiIndex::all_of_order(dim, m) {
            let d = get(&alpha)?;
            let (s, node) = sup_abs(grid, d, opts.collar);
            let hol = holder_seminorm(grid, d, gamma, opts)?;
            let mut wmin = f64::INFINITY;
            for p in alpha.predecessors() {
                wmin = wmin.min(multi_index_weight(weights, &p)?);
            }
            let v = (s + hol) / wmin;
            if v > best.value || best.alpha.order() != m {
                best = NormEntry {
                    term: Term::MinusTop,
                    order: m,
                    alpha,
                    value: v,
                    boundary: s > 0.0 && diff.boundary_affected(node, &alpha),
                };
            }
        }
        if best.boundary {
            boundary_orders.push(m);
        }
        entries.push(best);
    }
    let total = entries.iter().map(|e| e.value).sum();
    Ok(NormReport { variant, m, gamma, total, entries, boundary_orders })
}

/// Norm of every time slice of a field; returns the report of the slice with
/// the largest total (the `C^0` in time norm).
pub fn sup_in_time_norm(
    field: &Field,
    m: usize,
    gamma: f64,
    weights: &[f64],
    variant: NormVariant,
    opts: NormOptions,
) -> Result<NormReport> {
    let diff = Differentiator::new(field.grid())?;
    let mut best: Option<NormReport> = None;
    for s in field.slices() {
        let fam = DerivativeFamily::compute(&diff, s, m)?;
        let r = space_norm(&diff, &fam, m, gamma, weights, variant, opts)?;
        if best.as_ref().is_none_or(|b| r.total > b.total) {
            best = Some(r);
        }
    }
    best.ok_or(Error::Empty("field has no time slices"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(m: usize) -> SpatialGrid {
        SpatialGrid::new(1, 1.0, m).unwrap()
    }

    #[test]
    fn seminorm_examples() {
        let g = grid1(41);
        let mut x = [0.0];
        let id: Vec<f64> = (0..g.len()).map(|n| { g.position(n, &mut x); x[0] }).collect();
        assert!((holder_seminorm(&g, &id, 1.0, NormOptions::default()).unwrap() - 1.0).abs() < 1e-12);
        assert!((holder_seminorm(&g, &id, 0.0, NormOptions::default()).unwrap() - 2.0).abs() < 1e-12);
        let c = alloc::vec![3.0; g.len()];
        for gamma in [0.0, 0.3, 1.0] {
            assert_eq!(holder_seminorm(&g, &c, gamma, NormOptions::default()).unwrap(), 0.0);
        }
        assert!(holder_seminorm(&g, &c, 1.5, NormOptions::default()).is_err());
    }

    #[test]
    fn lag_ladder_matches_full_enumeration_on_monotone_data() {
        let g = grid1(201);
        let mut x = [0.0];
        let v: Vec<f64> = (0..g.len()).map(|n| { g.position(n, &mut x); libm::sqrt(x[0] + 1.0) }).collect();
        let ladder = holder_seminorm(&g, &v, 0.5, NormOptions::default()).unwrap();
        let full = holder_seminorm(&g, &v, 0.5, NormOptions { full_enumeration: true, collar: 0 }).unwrap();
        assert!((ladder - full).abs() <= 1e-12 * full);
    }

    #[test]
    fn parabolic_linear_in_time() {
        let g = grid1(5);
        let times: Vec<f64> = (0..5).map(|k| k as f64 * 0.25).collect();
        let f = Field::from_fn(g, times, None, |t, _| t).unwrap();
        let p = parabolic_seminorm(&f, 0.5, &[1.0], &MultiIndex::ZERO, NormOptions::default()).unwrap();
        assert!((p.time_part - 1.0).abs() < 1e-12);
        assert_eq!(p.space_part, 0.0);
        let single = f.select_times(&[0]).unwrap();
        assert!(parabolic_seminorm(&single, 0.5, &[1.0], &MultiIndex::ZERO, NormOptions::default()).is_err());
    }

    #[test]
    fn order_zero_norm_is_sup_plus_seminorm() {
        let g = grid1(33);
        let f = Field::from_fn(g.clone(), alloc::vec![0.0], None, |_, x| libm::cos(x[0])).unwrap();
        let d = Differentiator::new(&g).unwrap();
        let fam = DerivativeFamily::compute(&d, f.slice(0), 0).unwrap();
        let r = space_norm(&d, &fam, 0, 0.5, &[1.0], NormVariant::Full, NormOptions::default()).unwrap();
        let expect = 1.0 + holder_seminorm(&g, f.slice(0), 0.5, NormOptions::default()).unwrap();
        assert!((r.total - expect).abs() < 1e-14);
        assert!(space_norm(&d, &fam, 1, 0.5, &[1.0], NormVariant::Full, NormOptions::default()).is_err());
    }

    #[test]
    fn weighted_sup_of_constant() {
        let g = SpatialGrid::new(3, 1.0, 5).unwrap();
        let f = Field::from_fn(g, alloc::vec![0.0], None, |_, _| 1.0).unwrap();
        let w = [1.0, 0.25, 0.04];
        let a = MultiIndex::new(&[1, 2]).unwrap();
        let expect = 1.0 / 0.25f64.min(0.04).min(libm::sqrt(0.25 * 0.04));
        assert!((weighted_sup_norm(&f, &w, &a).unwrap() - expect).abs() < 1e-12);
        assert_eq!(weighted_sup_norm(&f.scale(0.0), &w, &a).unwrap(), 0.0);
    }
}
