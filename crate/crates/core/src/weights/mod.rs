//! Weight sequences `β` on `Z`, their self-convolution, and the multi-index
//! weights `β^α` that scale every weighted norm.

mod multi_index;

pub use multi_index::{MultiIndex, MAX_ORDER};

use alloc::vec::Vec;

use crate::{Error, Result};

/// Smallest admissible window half-width.
pub const MIN_HALF_WIDTH: usize = 8;

/// Relative tail budget for the `ℓ^{1/2}` partial sum.
pub const TAIL_TOLERANCE: f64 = 1e-6;

/// Relative tolerance used for the evenness check on explicit tables.
const EVEN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightKind {
    /// `β^i = (1 + |i|)^{-a}`, `a > 2`.
    Polynomial { exponent: f64 },
    /// `β^i = r^{|i|} (1 + |i|)^{-a}`, `0 < r < 1`, `a > 1`.
    GeometricPolynomial { ratio: f64, exponent: f64 },
    /// Pure geometric `β^i = r^{|i|}`. Summable, but not c-self-controlled,
    /// which makes it the canonical negative control for certification.
    Geometric { ratio: f64 },
    /// Values supplied explicitly on `-W..=W`.
    Table,
}

impl WeightKind {
    pub fn name(&self) -> &'static str {
        match self {
            WeightKind::Polynomial { .. } => "polynomial",
            WeightKind::GeometricPolynomial { .. } => "geometric-polynomial",
            WeightKind::Geometric { .. } => "geometric",
            WeightKind::Table => "table",
        }
    }

    fn formula(&self, i: usize) -> f64 {
        let n = i as f64;
        match *self {
            WeightKind::Polynomial { exponent } => libm::pow(1.0 + n, -exponent),
            WeightKind::GeometricPolynomial { ratio, exponent } => {
                libm::pow(ratio, n) * libm::pow(1.0 + n, -exponent)
            }
            WeightKind::Geometric { ratio } => libm::pow(ratio, n),
            WeightKind::Table => f64::NAN,
        }
    }
}

/// Exponent `p` of the partial sums `Σ (β^i)^p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpExponent {
    Half,
    One,
}

impl LpExponent {
    pub fn from_f64(p: f64) -> Result<Self> {
        if p == 0.5 {
            Ok(LpExponent::Half)
        } else if p == 1.0 {
            Ok(LpExponent::One)
        } else {
            Err(Error::OutOfRange { what: "lp exponent", value: p })
        }
    }
}

/// A positive, even, non-increasing sequence stored on `|i| ≤ W`, normalized
/// so that `β^0 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence {
    kind: WeightKind,
    half_width: usize,
    // index `i` holds `β^i` for `i ≥ 0`; negative indices mirror.
    half: Vec<f64>,
}

impl WeightSequence {
    /// Builds a formula sequence on `|i| ≤ half_width`.
    pub fn build(kind: WeightKind, half_width: usize) -> Result<Self> {
        if half_width < MIN_HALF_WIDTH {
            return Err(Error::invalid("W", alloc::format!("need W >= {MIN_HALF_WIDTH}, got {half_width}")));
        }
        match kind {
            WeightKind::Polynomial { exponent } => {
                if !(exponent > 2.0) || !exponent.is_finite() {
                    return Err(Error::invalid(
                        "exponent",
                        alloc::format!("polynomial weights need a > 2 for square-root summability, got {exponent}"),
                    ));
                }
            }
            WeightKind::GeometricPolynomial { ratio, exponent } => {
                if !(ratio > 0.0 && ratio < 1.0) {
                    return Err(Error::invalid("ratio", alloc::format!("need 0 < r < 1, got {ratio}")));
                }
                if !(exponent > 1.0) || !exponent.is_finite() {
                    return Err(Error::invalid("exponent", alloc::format!("need a > 1, got {exponent}")));
                }
            }
            WeightKind::Geometric { ratio } => {
                if !(ratio > 0.0 && ratio < 1.0) {
                    return Err(Error::invalid("ratio", alloc::format!("need 0 < r < 1, got {ratio}")));
                }
            }
            WeightKind::Table => {
                return Err(Error::invalid("kind", "table sequences are built with from_table"));
            }
        }
        let half = (0..=half_width).map(|i| kind.formula(i)).collect();
        Ok(WeightSequence { kind, half_width, half })
    }

    /// Builds a table sequence from the `2W + 1` values on `-W..=W`.
    ///
    /// The table is checked for positivity, evenness and monotonicity in
    /// `|i|`, then rescaled so that the center value is 1.
    pub fn from_table(values: &[f64]) -> Result<Self> {
        if values.len().is_multiple_of(2) {
            return Err(Error::invalid("values", "table length must be odd (2W + 1 entries)"));
        }
        let w = values.len() / 2;
        if w < MIN_HALF_WIDTH {
            return Err(Error::invalid("W", alloc::format!("need W >= {MIN_HALF_WIDTH}, got {w}")));
        }
        if let Some(bad) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::invalid("values", alloc::format!("table entries must be positive and finite, found {bad}")));
        }
        let center = values[w];
        for i in 1..=w {
            let (l, r) = (values[w - i], values[w + i]);
            if (l - r).abs() > EVEN_TOL * l.max(r) {
                return Err(Error::invalid("values", alloc::format!("table is not even at |i| = {i}: {l} vs {r}")));
            }
        }
        let half: Vec<f64> = (0..=w).map(|i| values[w + i] / center).collect();
        if let Some(i) = (1..=w).find(|&i| half[i] > half[i - 1]) {
            return Err(Error::invalid("values", alloc::format!("table increases in |i| at i = {i}")));
        }
        Ok(WeightSequence { kind: WeightKind::Table, half_width: w, half })
    }

    /// The all-ones sequence on `|i| ≤ half_width` (not summable; used to
    /// collapse weighted norms to plain ones).
    pub fn ones(half_width: usize) -> Self {
        WeightSequence { kind: WeightKind::Table, half_width, half: alloc::vec![1.0; half_width + 1] }
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    /// `W`.
    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// `β^i`, or `None` outside the window.
    pub fn get(&self, i: i64) -> Option<f64> {
        self.half.get(i.unsigned_abs() as usize).copied()
    }

    /// `β^i` for `|i| ≤ W`.
    ///
    /// # Panics
    /// Outside the window.
    pub fn at(&self, i: i64) -> f64 {
        self.half[i.unsigned_abs() as usize]
    }

    /// Values on `-W..=W`.
    pub fn values(&self) -> Vec<f64> {
        let w = self.half_width as i64;
        (-w..=w).map(|i| self.at(i)).collect()
    }

    /// Values for `i = 0..=W`.
    pub fn half_values(&self) -> &[f64] {
        &self.half
    }

    /// `(β ⋆ β)^i` for `i = -W..=W`, by direct summation over the stored
    /// window.
    pub fn self_convolve(&self) -> Vec<f64> {
        let w = self.half_width as i64;
        let half: Vec<f64> = (0..=w).map(|i| self.conv_at(i)).collect();
        (-w..=w).map(|i| half[i.unsigned_abs() as usize]).collect()
    }

    fn conv_at(&self, i: i64) -> f64 {
        let w = self.half_width as i64;
        let lo = (i - w).max(-w);
        let hi = (i + w).min(w);
        (lo..=hi).map(|j| self.at(i - j) * self.at(j)).sum()
    }

    /// `Σ_{|i| ≤ W} (β^i)^p`.
    pub fn lp_norm(&self, p: LpExponent) -> f64 {
        let f = |b: f64| match p {
            LpExponent::Half => libm::sqrt(b),
            LpExponent::One => b,
        };
        f(self.half[0]) + 2.0 * self.half[1..].iter().map(|&b| f(b)).sum::<f64>()
    }

    /// Share of `Σ (β^i)^{1/2}` contributed by the outermost decade
    /// `|i| > 0.9 W` of the window.
    pub fn tail_fraction(&self) -> f64 {
        let cut = self.half_width - self.half_width.div_ceil(10);
        let tail: f64 = 2.0 * self.half[cut + 1..].iter().map(|&b| libm::sqrt(b)).sum::<f64>();
        tail / self.lp_norm(LpExponent::Half)
    }

    /// Whether the window captures the `ℓ^{1/2}` sum to [`TAIL_TOLERANCE`].
    pub fn is_tail_converged(&self) -> bool {
        self.tail_fraction() < TAIL_TOLERANCE
    }

    /// Checks `β ⋆ β ≤ cβ` on the window and estimates `c`.
    pub fn certify_csc(&self) -> CscCertificate {
        let w = self.half_width;
        let ratios: Vec<f64> = (0..=w).map(|i| self.conv_at(i as i64) / self.half[i]).collect();
        let guard = w.div_ceil(10);
        let interior = w - guard;
        let (argmax, c) = ratios[..=interior]
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, r)| if r > acc.1 { (i, r) } else { acc });
        let edge_ratio = ratios[w];
        let edge_contaminated = edge_ratio > 1.05 * c;
        let growth = ratios[interior] / ratios[interior / 2];
        let certified = !edge_contaminated && growth <= 1.0 + GROWTH_TOLERANCE;
        CscCertificate {
            c,
            half_width: w,
            guard,
            argmax,
            edge_ratio,
            growth,
            edge_contaminated,
            certified,
            ratios,
        }
    }

    /// `β_i` restricted to the ambient indices `0..n`: `(β_i)^j = β^{i-j}`.
    pub fn shift(&self, i: usize, n: usize) -> Result<Vec<f64>> {
        if i >= n {
            return Err(Error::invalid("i", alloc::format!("player {i} outside 0..{n}")));
        }
        if n - 1 > self.half_width {
            return Err(Error::WindowTooSmall { needed: n - 1, available: self.half_width });
        }
        Ok((0..n).map(|j| self.at(i as i64 - j as i64)).collect())
    }

    /// Cyclic variant of [`shift`](Self::shift) for periodic player layouts:
    /// the lag is the distance on `Z / nZ`.
    pub fn shift_cyclic(&self, i: usize, n: usize) -> Result<Vec<f64>> {
        if i >= n {
            return Err(Error::invalid("i", alloc::format!("player {i} outside 0..{n}")));
        }
        if n / 2 > self.half_width {
            return Err(Error::WindowTooSmall { needed: n / 2, available: self.half_width });
        }
        Ok((0..n)
            .map(|j| {
                let d = i.abs_diff(j);
                self.at(d.min(n - d) as i64)
            })
            .collect())
    }

    /// `β^α` for the sequence read as coordinate weights `β^0, β^1, ...`.
    pub fn multi_index_weight(&self, alpha: &MultiIndex) -> Result<f64> {
        if let Some(c) = alpha.max_coord() {
            if c > self.half_width {
                return Err(Error::WindowTooSmall { needed: c, available: self.half_width });
            }
        }
        multi_index_weight(&self.half, alpha)
    }
}

/// Allowed increase of the ratio `(β⋆β)^i / β^i` from half the interior
/// window to its end before the sequence is declared not self-controlled.
pub const GROWTH_TOLERANCE: f64 = 0.25;

/// Outcome of [`WeightSequence::certify_csc`]. Ratios are indexed by
/// `i = 0..=W` (the sequence is even).
#[derive(Debug, Clone, PartialEq)]
pub struct CscCertificate {
    /// Maximum of `(β⋆β)^i / β^i` over `|i| ≤ W - guard`.
    pub c: f64,
    pub half_width: usize,
    /// Outer sites excluded from the maximum.
    pub guard: usize,
    pub argmax: usize,
    /// Ratio at `|i| = W`.
    pub edge_ratio: f64,
    /// Ratio at the end of the interior over the ratio halfway there.
    pub growth: f64,
    pub edge_contaminated: bool,
    pub certified: bool,
    pub ratios: Vec<f64>,
}

impl CscCertificate {
    /// `(β⋆β)^0 / β^0`, a lower bound for any admissible `c`.
    pub fn lower_bound(&self) -> f64 {
        self.ratios[0]
    }
}

/// `β^α` for arbitrary positive coordinate weights `w[k]`.
///
/// `|α| = 0` gives 1. Otherwise the geometric mean `(Π_k w_k^{α^k})^{1/|α|}`
/// is capped by the minimum of `β^{α - e_k}` over the coordinates present in
/// `α`.
pub fn multi_index_weight(weights: &[f64], alpha: &MultiIndex) -> Result<f64> {
    if alpha.is_zero() {
        return Ok(1.0);
    }
    if let Some(c) = alpha.max_coord() {
        if c >= weights.len() {
            return Err(Error::DimensionMismatch { expected: weights.len(), found: c + 1 });
        }
    }
    let order = alpha.order() as f64;
    let log_mean = alpha.coords().iter().map(|&c| libm::log(weights[c])).sum::<f64>() / order;
    let mut out = libm::exp(log_mean);
    if alpha.order() == 1 {
        // exact, so that a single-coordinate weight reproduces w[k] bitwise
        out = weights[alpha.coords()[0]];
    }
    for p in alpha.predecessors() {
        out = out.min(multi_index_weight(weights, &p)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(a: f64, w: usize) -> WeightSequence {
        WeightSequence::build(WeightKind::Polynomial { exponent: a }, w).unwrap()
    }

    #[test]
    fn direct_formulas() {
        let b = poly(3.0, 32);
        assert_eq!(b.at(0), 1.0);
        assert!((b.at(2) - 1.0 / 27.0).abs() < 1e-15);
        assert_eq!(b.at(-5), b.at(5));
        let g = WeightSequence::build(WeightKind::GeometricPolynomial { ratio: 0.5, exponent: 2.0 }, 32).unwrap();
        assert!((g.at(1) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn rejects_inadmissible_parameters() {
        assert!(WeightSequence::build(WeightKind::Polynomial { exponent: 1.5 }, 32).is_err());
        assert!(WeightSequence::build(WeightKind::Polynomial { exponent: 2.0 }, 32).is_err());
        assert!(WeightSequence::build(WeightKind::Polynomial { exponent: 3.0 }, 7).is_err());
        assert!(WeightSequence::build(WeightKind::GeometricPolynomial { ratio: 1.0, exponent: 2.0 }, 32).is_err());
        assert!(WeightSequence::build(WeightKind::GeometricPolynomial { ratio: 0.5, exponent: 1.0 }, 32).is_err());
    }

    #[test]
    fn square_root_sum_diverges_below_exponent_two() {
        // partial sums of (1 + i)^{-a/2} keep growing with the window for a <= 2
        let s = |a: f64, w: usize| (0..=w).map(|i| libm::pow(1.0 + i as f64, -a / 2.0)).sum::<f64>();
        for a in [1.5, 2.0] {
            assert!(s(a, 4096) - s(a, 1024) > 1.0);
        }
        assert!(s(3.0, 4096) - s(3.0, 1024) < 0.1);
    }

    #[test]
    fn table_validation() {
        let mut v = alloc::vec![1e-9; 21];
        v[10] = 1.0;
        let t = WeightSequence::from_table(&v).unwrap();
        assert_eq!(t.half_width(), 10);
        v[0] = 2e-9;
        assert!(WeightSequence::from_table(&v).is_err());
        v[0] = -1e-9;
        v[20] = -1e-9;
        assert!(WeightSequence::from_table(&v).is_err());
        assert!(WeightSequence::from_table(&[1.0; 20]).is_err());
        let scaled: Vec<f64> = (-10i64..=10).map(|i| 4.0 / (1.0 + i.abs() as f64)).collect();
        let t = WeightSequence::from_table(&scaled).unwrap();
        assert_eq!(t.at(0), 1.0);
        assert!((t.at(3) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn convolution_at_origin_matches_zeta() {
        let c = poly(3.0, 64).self_convolve();
        assert!((c[64] - 1.034_686_12).abs() < 1e-7, "{}", c[64]);
        assert!(c.iter().all(|&x| x > 0.0));
        for i in 0..64 {
            assert_eq!(c[i], c[128 - i]);
        }
    }

    #[test]
    fn certificate_polynomial() {
        let cert = poly(3.0, 64).certify_csc();
        assert!(cert.certified && !cert.edge_contaminated);
        assert_eq!(cert.argmax, 8);
        assert!((cert.c - 2.912).abs() < 2e-3, "{}", cert.c);
        assert!((cert.ratios[1] - 2.086).abs() < 2e-3);
        assert!((cert.edge_ratio - 2.45).abs() < 1e-2);
        assert!(cert.c >= cert.lower_bound());
    }

    #[test]
    fn certificate_geometric_fails() {
        let b = WeightSequence::build(WeightKind::Geometric { ratio: 0.5 }, 64).unwrap();
        let cert = b.certify_csc();
        assert!(cert.edge_contaminated);
        assert!(!cert.certified);
        for i in 1..=64 {
            assert!(cert.ratios[i] > cert.ratios[i - 1]);
            // (β⋆β)^i ≥ (|i| + 1) r^{|i|}
            assert!(cert.ratios[i] >= i as f64 + 1.0);
        }
    }

    #[test]
    fn near_delta_table() {
        let mut v = alloc::vec![1e-9; 129];
        v[64] = 1.0;
        let t = WeightSequence::from_table(&v).unwrap();
        let conv = t.self_convolve();
        assert!((conv[64] - 1.0).abs() < 1e-6);
        assert!((t.lp_norm(LpExponent::One) - 1.0).abs() < 1e-6);
        // off-center, δ⋆δ picks up 2 β^0 β^i, so the ratio is 2 rather than 1
        let cert = t.certify_csc();
        assert!(cert.certified);
        assert!((cert.c - 2.0).abs() < 0.01, "{}", cert.c);
    }

    #[test]
    fn lp_sums() {
        let b = poly(3.0, 64);
        assert!((b.lp_norm(LpExponent::One) - 1.403_880_7).abs() < 1e-6);
        assert!(b.lp_norm(LpExponent::Half) >= b.lp_norm(LpExponent::One));
        assert!(LpExponent::from_f64(2.0).is_err());
        assert_eq!(LpExponent::from_f64(0.5), Ok(LpExponent::Half));
    }

    #[test]
    fn tail_diagnostic() {
        // polynomial a = 3 has a heavy square-root tail at desk-scale windows
        let b = poly(3.0, 64);
        assert!(b.tail_fraction() > 1e-3 && b.tail_fraction() < 0.05);
        assert!(!b.is_tail_converged());
        let g = WeightSequence::build(WeightKind::GeometricPolynomial { ratio: 0.5, exponent: 3.0 }, 64).unwrap();
        assert!(g.is_tail_converged());
    }

    #[test]
    fn shift_examples() {
        let b = poly(3.0, 32);
        let s0 = b.shift(0, 6).unwrap();
        for j in 0..6 {
            assert_eq!(s0[j], b.at(j as i64));
        }
        let s4 = b.shift(4, 6).unwrap();
        assert_eq!(s4[4], 1.0);
        assert_eq!(s4[1], 1.0 / 64.0);
        assert_eq!(b.shift(0, 40), Err(Error::WindowTooSmall { needed: 39, available: 32 }));
        let c = b.shift_cyclic(0, 6).unwrap();
        assert_eq!(c[5], b.at(1));
    }

    #[test]
    fn two_coordinate_weight() {
        let w = [1.0, 0.3, 0.02];
        let a = MultiIndex::new(&[1, 2]).unwrap();
        let expect = 0.3f64.min(0.02).min(libm::sqrt(0.3 * 0.02));
        assert!((multi_index_weight(&w, &a).unwrap() - expect).abs() < 1e-15);
        assert_eq!(multi_index_weight(&w, &MultiIndex::unit(1)).unwrap(), 0.3);
        assert_eq!(multi_index_weight(&w, &MultiIndex::ZERO).unwrap(), 1.0);
        assert!(multi_index_weight(&w, &MultiIndex::unit(3)).is_err());
    }
}
