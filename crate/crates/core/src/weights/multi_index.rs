use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// Highest derivative order the crate evaluates.
pub const MAX_ORDER: usize = 3;

/// A multi-index `α` with `|α| ≤ 3`, stored as the sorted multiset of the
/// coordinates it differentiates along (so `2e₀ + e₃` is `[0, 0, 3]`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MultiIndex {
    order: u8,
    coords: [usize; MAX_ORDER],
}

impl MultiIndex {
    pub const ZERO: MultiIndex = MultiIndex { order: 0, coords: [0; MAX_ORDER] };

    /// Builds `α` from a list of coordinates, repeated once per unit of
    /// multiplicity, in any order.
    pub fn new(coords: &[usize]) -> Result<Self> {
        if coords.len() > MAX_ORDER {
            return Err(Error::OrderTooHigh { order: coords.len() });
        }
        let mut out = [0; MAX_ORDER];
        out[..coords.len()].copy_from_slice(coords);
        out[..coords.len()].sort_unstable();
        Ok(MultiIndex { order: coords.len() as u8, coords: out })
    }

    /// Builds `α` from `(coordinate, multiplicity)` pairs.
    pub fn from_pairs(pairs: &[(usize, usize)]) -> Result<Self> {
        let order: usize = pairs.iter().map(|&(_, m)| m).sum();
        if order > MAX_ORDER {
            return Err(Error::OrderTooHigh { order });
        }
        let mut coords = Vec::with_capacity(order);
        for &(c, m) in pairs {
            coords.extend(std::iter::repeat_n(c, m));
        }
        Self::new(&coords)
    }

    pub fn unit(coord: usize) -> Self {
        MultiIndex { order: 1, coords: [coord, 0, 0] }
    }

    /// `|α|`.
    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn is_zero(&self) -> bool {
        self.order == 0
    }

    /// Coordinates with repetition, ascending.
    pub fn coords(&self) -> &[usize] {
        &self.coords[..self.order()]
    }

    pub fn multiplicity(&self, coord: usize) -> usize {
        self.coords().iter().filter(|&&c| c == coord).count()
    }

    /// Distinct `(coordinate, multiplicity)` pairs, ascending by coordinate.
    pub fn entries(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::with_capacity(MAX_ORDER);
        for &c in self.coords() {
            match out.last_mut() {
                Some((last, m)) if *last == c => *m += 1,
                _ => out.push((c, 1)),
            }
        }
        out
    }

    pub fn max_coord(&self) -> Option<usize> {
        self.coords().last().copied()
    }

    /// `α + e_coord`.
    pub fn with(&self, coord: usize) -> Result<Self> {
        let mut c = Vec::from(self.coords());
        c.push(coord);
        Self::new(&c)
    }

    /// The distinct multi-indices `α - e_k` for every `k` with `α^k ≥ 1`.
    pub fn predecessors(&self) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for (c, _) in self.entries() {
            let mut rest = Vec::from(self.coords());
            let pos = rest.iter().position(|&x| x == c).unwrap_or(0);
            rest.remove(pos);
            if let Ok(p) = Self::new(&rest) {
                out.push(p);
            }
        }
        out
    }

    /// The multi-indices `α + e_k`, `k < axes`, when `|α| < 3`.
    pub fn successors(&self, axes: usize) -> Vec<MultiIndex> {
        (0..axes).filter_map(|k| self.with(k).ok()).collect()
    }

    /// Componentwise `self ≤ other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.entries().iter().all(|&(c, m)| other.multiplicity(c) >= m)
    }

    /// Every multi-index of exactly the given order over `axes` coordinates,
    /// in lexicographic order of their sorted coordinate lists.
    pub fn all_of_order(axes: usize, order: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        if order > MAX_ORDER {
            return out;
        }
        let mut current = [0usize; MAX_ORDER];
        fn rec(
            axes: usize,
            order: usize,
            depth: usize,
            start: usize,
            current: &mut [usize; MAX_ORDER],
            out: &mut Vec<MultiIndex>,
        ) {
            if depth == order {
                out.push(MultiIndex { order: order as u8, coords: *current });
                return;
            }
            for c in start..axes {
                current[depth] = c;
                rec(axes, order, depth + 1, c, current, out);
            }
            current[depth] = 0;
        }
        rec(axes, order, 0, 0, &mut current, &mut out);
        out
    }

    /// Every multi-index with `|α| ≤ max_order`, ordered by order first.
    pub fn all_up_to(axes: usize, max_order: usize) -> Vec<MultiIndex> {
        (0..=max_order.min(MAX_ORDER))
            .flat_map(|k| Self::all_of_order(axes, k))
            .collect()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (n, (c, m)) in self.entries().into_iter().enumerate() {
            if n > 0 {
                f.write_str("+")?;
            }
            if m > 1 {
                write!(f, "{m}")?;
            }
            write!(f, "e{c}")?;
        }
        Ok(())
    }
}
