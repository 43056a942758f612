//! Product-factor decomposition of ±1 functions and connectivity of the
//! support of the reordered `(x, g(x))` distribution.
//!
//! A distribution on `{−1,1}^k` is connected when, for every split point i,
//! the bipartite graph between distinct prefixes (first i coordinates) and
//! suffixes with edges at support points is connected. For any g that
//! depends on all coordinates and is not a ±parity, placing two coordinates
//! of an indecomposable factor block first and last makes
//! `(x_1, …, x_{m-1}, g(x), x_m)` connected.

use crate::boolfn::BooleanFunction;
use crate::{Error, Result};
use serde::Serialize;

/// A finitely supported distribution on `{−1,1}^k` with exact rational
/// probabilities. Point bitmask bit `c` set means coordinate `c` is −1.
#[derive(Clone, Debug, Serialize)]
pub struct SupportDistribution {
    pub k: u32,
    pub points: Vec<u32>,
    /// Probabilities as reduced fractions, aligned with `points`.
    pub probs: Vec<(u64, u64)>,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl SupportDistribution {
    pub fn new(k: u32, points: Vec<u32>, probs: Vec<(u64, u64)>) -> Result<Self> {
        if points.len() != probs.len() || points.is_empty() {
            return Err(Error::DimensionMismatch(
                "support points and probabilities must align and be non-empty".into(),
            ));
        }
        let probs: Vec<(u64, u64)> = probs
            .into_iter()
            .map(|(n, d)| {
                let g = gcd(n, d).max(1);
                (n / g, d / g)
            })
            .collect();
        for &(n, d) in &probs {
            if n == 0 || d == 0 {
                return Err(Error::Precondition("probabilities must be positive".into()));
            }
        }
        // Exact sum check over the common denominator.
        let mut num: u128 = 0;
        let mut den: u128 = 1;
        for &(n, d) in &probs {
            num = num * d as u128 + n as u128 * den;
            den *= d as u128;
            let g = {
                let mut a = num;
                let mut b = den;
                while b != 0 {
                    let t = a % b;
                    a = b;
                    b = t;
                }
                a.max(1)
            };
            num /= g;
            den /= g;
        }
        if num != 1 || den != 1 {
            return Err(Error::Precondition(format!(
                "probabilities sum to {num}/{den}, not 1"
            )));
        }
        Ok(SupportDistribution { k, points, probs })
    }

    /// Uniform distribution over a set of points.
    pub fn uniform(k: u32, points: Vec<u32>) -> Result<Self> {
        let n = points.len() as u64;
        let probs = vec![(1, n); points.len()];
        Self::new(k, points, probs)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Checks connectivity of every prefix/suffix bipartite support graph.
/// Returns the first disconnected split (prefix length, 1-based) if any.
pub fn is_connected_distribution(d: &SupportDistribution) -> (bool, Option<u32>) {
    for i in 1..d.k {
        let prefix_mask = (1u32 << i) - 1;
        let mut xs: Vec<u32> = d.points.iter().map(|p| p & prefix_mask).collect();
        let mut ys: Vec<u32> = d.points.iter().map(|p| p >> i).collect();
        xs.sort_unstable();
        xs.dedup();
        ys.sort_unstable();
        ys.dedup();
        let mut uf = UnionFind::new(xs.len() + ys.len());
        for p in &d.points {
            let xi = xs.binary_search(&(p & prefix_mask)).unwrap();
            let yi = ys.binary_search(&(p >> i)).unwrap();
            uf.union(xi, xs.len() + yi);
        }
        let root = uf.find(0);
        let connected = (1..xs.len() + ys.len()).all(|v| uf.find(v) == root);
        if !connected {
            return (false, Some(i));
        }
    }
    (true, None)
}

/// Tests whether g factors multiplicatively (in the ±1 view) across the
/// bipartition `(a_mask, rest)`: the sign matrix must have rank one, i.e.
/// `g(x) ⊕ g(x∧¬A) ⊕ g(x∧A) ⊕ g(0) = 0` for every x.
fn splits_across(g: &BooleanFunction, a_mask: u32) -> bool {
    let base = g.eval(0);
    (0..g.table_len() as u32).all(|x| {
        g.eval(x) ^ g.eval(x & !a_mask) ^ g.eval(x & a_mask) ^ base == false
    })
}

/// Finest partition of the coordinates such that g is a product of ±1
/// functions on the blocks, found by recursive bipartition search.
pub fn decompose_product_factors(g: &BooleanFunction) -> Result<Vec<u32>> {
    let m = g.arity();
    if m > 6 {
        return Err(Error::SizeLimit { what: format!("factor search at arity {m}"), limit: 6 });
    }
    if m == 0 {
        return Ok(vec![]);
    }
    let full = ((1u64 << m) - 1) as u32;
    let mut blocks = Vec::new();
    let mut stack = vec![full];
    while let Some(block) = stack.pop() {
        if block.count_ones() <= 1 {
            blocks.push(block);
            continue;
        }
        // Try proper sub-splits containing the block's lowest coordinate.
        let low = block & block.wrapping_neg();
        let rest = block & !low;
        let mut found = None;
        let mut sub = rest;
        loop {
            let a = low | sub;
            if a != block && splits_across(g, a) {
                found = Some(a);
                break;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        match found {
            Some(a) => {
                stack.push(a);
                stack.push(block & !a);
            }
            None => blocks.push(block),
        }
    }
    blocks.sort_unstable_by_key(|b| b.trailing_zeros());
    Ok(blocks)
}

/// Result of the connectivity reordering.
#[derive(Clone, Debug, Serialize)]
pub struct ReorderedDistribution {
    /// Input coordinates in evaluation order: `order[0]` goes first,
    /// `order[m-1]` goes to the final slot after `g(x)`.
    pub order: Vec<usize>,
    pub distribution: SupportDistribution,
}

/// Reorders the inputs of g so that two coordinates of an indecomposable
/// block of size ≥ 2 occupy the first and last positions, then returns the
/// uniform distribution of `(x_{σ(1)}, …, x_{σ(m-1)}, g(x), x_{σ(m)})`.
///
/// Errors name the violated precondition: an irrelevant coordinate, or g
/// being a ±parity (every factor block a singleton).
pub fn reorder_for_connectivity(g: &BooleanFunction) -> Result<ReorderedDistribution> {
    let m = g.arity();
    for i in 0..m as usize {
        if !g.depends_on(i) {
            return Err(Error::IrrelevantCoordinate { index: i });
        }
    }
    let blocks = decompose_product_factors(g)?;
    let block = blocks
        .iter()
        .find(|b| b.count_ones() >= 2)
        .copied()
        .ok_or_else(|| {
            Error::Precondition(
                "g is a ±parity (all factor blocks are singletons); the reordered \
                 distribution cannot be connected"
                    .into(),
            )
        })?;
    let first = block.trailing_zeros() as usize;
    let last = (31 - block.leading_zeros()) as usize;
    let mut order = vec![first];
    order.extend((0..m as usize).filter(|&i| i != first && i != last));
    order.push(last);
    // Point layout: positions 0..m-1 are the reordered inputs except the
    // last; position m-1 carries g(x); position m carries the last input.
    let mut points = Vec::with_capacity(1 << m);
    for x in 0..(1u32 << m) {
        let mut p = 0u32;
        for (pos, &coord) in order.iter().take(m as usize - 1).enumerate() {
            p |= ((x >> coord) & 1) << pos;
        }
        p |= (g.eval(x) as u32) << (m - 1);
        p |= ((x >> order[m as usize - 1]) & 1) << m;
        points.push(p);
    }
    let distribution = SupportDistribution::uniform(m + 1, points)?;
    Ok(ReorderedDistribution { order, distribution })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn and2() -> BooleanFunction {
        BooleanFunction::and_set(2, 0b11).unwrap()
    }

    #[test]
    fn decompose_examples() {
        // XOR3 splits into singletons.
        let xor3 = BooleanFunction::parity(3, 0b111, false).unwrap();
        assert_eq!(decompose_product_factors(&xor3).unwrap(), vec![0b001, 0b010, 0b100]);
        // AND2 is indecomposable.
        assert_eq!(decompose_product_factors(&and2()).unwrap(), vec![0b11]);
        // x0 ⊕ AND(x1, x2): the pm view is a product of the dictator block
        // and the two-coordinate block.
        let g = BooleanFunction::from_fn(3, |x| {
            ((x & 1) == 1) ^ (((x >> 1) & 1 == 1) && ((x >> 2) & 1 == 1))
        })
        .unwrap();
        assert_eq!(decompose_product_factors(&g).unwrap(), vec![0b001, 0b110]);
        assert!(decompose_product_factors(
            &BooleanFunction::constant(7, false).unwrap()
        )
        .is_err());
    }

    #[test]
    fn factors_multiply_back() {
        // For every g at m = 3: the pm product of the block factors equals g
        // up to the forced constant, i.e. g(x) = c·∏ g(x restricted to block)
        // with c = g(0)^{ℓ-1} in the pm view.
        for bits in 0..256u64 {
            let g = BooleanFunction::from_bits_u64(3, bits).unwrap();
            let blocks = decompose_product_factors(&g).unwrap();
            let l = blocks.len() as u32;
            for x in 0..8u32 {
                let mut acc: i8 = 1;
                for &b in &blocks {
                    acc *= g.pm_i8(x & b);
                }
                let c = if (l as i32 - 1) % 2 == 1 { g.pm_i8(0) } else { 1 };
                assert_eq!(g.pm_i8(x), acc * c, "bits={bits:#x} x={x}");
            }
        }
    }

    #[test]
    fn reorder_and2() {
        let r = reorder_for_connectivity(&and2()).unwrap();
        assert_eq!(r.order, vec![0, 1]);
        // Points (x0, g, x1) for the 0/1 AND table.
        let expect: Vec<u32> = (0..4u32)
            .map(|x| {
                let mut p = x & 1;
                p |= (and2().eval(x) as u32) << 1;
                p |= ((x >> 1) & 1) << 2;
                p
            })
            .collect();
        assert_eq!(r.distribution.points, expect);
        let (ok, fail) = is_connected_distribution(&r.distribution);
        assert!(ok && fail.is_none());
    }

    #[test]
    fn xor_rejected_and_manual_xor_disconnected() {
        let xor2 = BooleanFunction::parity(2, 0b11, false).unwrap();
        assert!(matches!(
            reorder_for_connectivity(&xor2),
            Err(Error::Precondition(_))
        ));
        let padded = BooleanFunction::from_fn(3, |x| x & 1 == 1).unwrap();
        assert!(matches!(
            reorder_for_connectivity(&padded),
            Err(Error::IrrelevantCoordinate { index: 1 })
        ));
        // Manually built (x0, g, x1) for XOR2: two components of size 3 at
        // the first split.
        let points: Vec<u32> = (0..4u32)
            .map(|x| {
                let mut p = x & 1;
                p |= (xor2.eval(x) as u32) << 1;
                p |= ((x >> 1) & 1) << 2;
                p
            })
            .collect();
        let d = SupportDistribution::uniform(3, points).unwrap();
        let (ok, fail) = is_connected_distribution(&d);
        assert!(!ok);
        assert_eq!(fail, Some(1));
    }

    #[test]
    fn maj3_reorders_connected() {
        let maj3 = BooleanFunction::majority(3).unwrap();
        let r = reorder_for_connectivity(&maj3).unwrap();
        assert_eq!(r.order.len(), 3);
        let (ok, _) = is_connected_distribution(&r.distribution);
        assert!(ok);
    }

    #[test]
    fn exhaustive_sweep_small_arities() {
        // Every admissible g at m ∈ {2, 3} reorders to a connected
        // distribution; inadmissible ones are rejected with a diagnostic.
        for m in 2..=3u32 {
            for bits in 0..(1u64 << (1u32 << m)) {
                let g = BooleanFunction::from_bits_u64(m, bits).unwrap();
                if !g.depends_on_all() {
                    assert!(matches!(
                        reorder_for_connectivity(&g),
                        Err(Error::IrrelevantCoordinate { .. })
                    ));
                    continue;
                }
                if g.as_parity().is_some() {
                    assert!(reorder_for_connectivity(&g).is_err());
                    continue;
                }
                let r = reorder_for_connectivity(&g).unwrap();
                let (ok, fail) = is_connected_distribution(&r.distribution);
                assert!(ok, "m={m} bits={bits:#x} failed at {fail:?}");
            }
        }
    }

    #[test]
    fn sampled_sweep_m4() {
        use crate::rng::CounterRng;
        let mut rng = CounterRng::new(12, 0);
        let mut checked = 0;
        while checked < 500 {
            let bits = rng.next_u64() & 0xffff;
            let g = BooleanFunction::from_bits_u64(4, bits).unwrap();
            if !g.depends_on_all() || g.as_parity().is_some() {
                continue;
            }
            let r = reorder_for_connectivity(&g).unwrap();
            let (ok, _) = is_connected_distribution(&r.distribution);
            assert!(ok, "bits={bits:#x}");
            checked += 1;
        }
    }

    #[test]
    fn distribution_validation() {
        assert!(SupportDistribution::new(2, vec![0, 1], vec![(1, 2), (1, 3)]).is_err());
        assert!(SupportDistribution::new(2, vec![0, 1], vec![(1, 2), (1, 2)]).is_ok());
        assert!(SupportDistribution::new(2, vec![], vec![]).is_err());
        assert!(SupportDistribution::new(2, vec![0], vec![(0, 2)]).is_err());
    }
}
