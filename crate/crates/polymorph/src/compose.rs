//! Row/column compositions on input matrices and exact or sampled agreement
//! probabilities between the two composition orders.
//!
//! For an `n × m` bit matrix `Z`, the two sides are
//! `f0(g(row_1), …, g(row_n))` and `g(f_1(col_1), …, f_m(col_m))`.
//! Entry `(i, j)` (0-based) sits at bit `i·m + j`.

use crate::boolfn::BooleanFunction;
use crate::rng::CounterRng;
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

/// Exhaustive agreement enumerates `2^{n·m}` matrices; this caps the cost.
pub const MAX_EXHAUSTIVE_BITS: u32 = 28;

/// Default shard count for Monte-Carlo estimates. Results are bit-identical
/// for a fixed `(seed, shards)` pair, independent of thread count.
pub const DEFAULT_SHARDS: u64 = 64;

/// Which polymorphism variant a tuple of functions represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolymorphKind {
    /// One function: `f ∘ g^n = g ∘ f^m`.
    Plain,
    /// Outer/inner pair: `f0 ∘ g^n = g ∘ f1^m`.
    Skew,
    /// One function per column: `f0 ∘ g^n = g ∘ (f1, …, fm)`.
    Multi,
}

/// An `n × m` bit matrix packed into a word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InputMatrix {
    pub rows: u32,
    pub cols: u32,
    pub bits: u64,
}

impl InputMatrix {
    pub fn new(rows: u32, cols: u32, bits: u64) -> Result<Self> {
        let total = rows * cols;
        if total > 63 {
            return Err(Error::SizeLimit { what: format!("{rows}x{cols} matrix"), limit: 63 });
        }
        if total < 64 && bits >> total != 0 {
            return Err(Error::DimensionMismatch("matrix bits beyond n·m".into()));
        }
        Ok(InputMatrix { rows, cols, bits })
    }

    /// Row `i` as an m-bit value.
    #[inline]
    pub fn row(&self, i: u32) -> u32 {
        ((self.bits >> (i * self.cols)) & ((1u64 << self.cols) - 1)) as u32
    }

    /// Column `j` as an n-bit value.
    #[inline]
    pub fn col(&self, j: u32) -> u32 {
        let mut c = 0u32;
        for i in 0..self.rows {
            c |= (((self.bits >> (i * self.cols + j)) & 1) as u32) << i;
        }
        c
    }
}

/// Agreement probability report. Exhaustive reports carry the exact rational
/// `numerator / 2^{n·m}`; Monte-Carlo reports carry a 99%-confidence
/// Hoeffding halfwidth.
#[derive(Clone, Debug, Serialize)]
pub struct AgreementReport {
    pub probability: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numerator: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub denominator: Option<u64>,
    pub method: AgreementMethod,
    pub samples: u64,
    pub halfwidth: f64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgreementMethod {
    Exhaustive,
    MonteCarlo,
}

/// 99%-confidence Hoeffding radius: sqrt(ln(2/0.01) / (2·samples)).
pub fn hoeffding_halfwidth(samples: u64) -> f64 {
    ((2.0f64 / 0.01).ln() / (2.0 * samples as f64)).sqrt()
}

fn check_tuple(f0: &BooleanFunction, fs: &[BooleanFunction], g: &BooleanFunction) -> Result<(u32, u32)> {
    let n = f0.arity();
    let m = g.arity();
    if fs.len() != m as usize {
        return Err(Error::DimensionMismatch(format!(
            "expected {m} column functions, got {}",
            fs.len()
        )));
    }
    for f in fs {
        if f.arity() != n {
            return Err(Error::ArityMismatch(f.arity(), n));
        }
    }
    Ok((n, m))
}

/// Evaluates both composition sides on one matrix.
pub fn compose_sides(
    f0: &BooleanFunction,
    fs: &[BooleanFunction],
    g: &BooleanFunction,
    z: &InputMatrix,
) -> Result<(bool, bool)> {
    let (n, m) = check_tuple(f0, fs, g)?;
    if z.rows != n || z.cols != m {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, functions need {n}x{m}",
            z.rows, z.cols
        )));
    }
    let mut lhs_in = 0u32;
    for i in 0..n {
        lhs_in |= (g.eval(z.row(i)) as u32) << i;
    }
    let mut rhs_in = 0u32;
    for j in 0..m {
        rhs_in |= (fs[j as usize].eval(z.col(j)) as u32) << j;
    }
    Ok((f0.eval(lhs_in), g.eval(rhs_in)))
}

/// Precomputed evaluation context for scanning many matrices.
struct Scanner {
    n: u32,
    m: u32,
    /// g applied to every possible row value.
    g_rows: Vec<bool>,
}

impl Scanner {
    fn new(n: u32, m: u32, g: &BooleanFunction) -> Self {
        let g_rows = (0..(1u32 << m)).map(|r| g.eval(r)).collect();
        Scanner { n, m, g_rows }
    }

    #[inline]
    fn sides(
        &self,
        f0: &BooleanFunction,
        fs: &[BooleanFunction],
        g: &BooleanFunction,
        bits: u64,
    ) -> (bool, bool) {
        let row_mask = (1u64 << self.m) - 1;
        let mut lhs_in = 0u32;
        for i in 0..self.n {
            let row = ((bits >> (i * self.m)) & row_mask) as usize;
            lhs_in |= (self.g_rows[row] as u32) << i;
        }
        let mut rhs_in = 0u32;
        for j in 0..self.m {
            let mut col = 0u32;
            for i in 0..self.n {
                col |= (((bits >> (i * self.m + j)) & 1) as u32) << i;
            }
            rhs_in |= (fs[j as usize].eval(col) as u32) << j;
        }
        (f0.eval(lhs_in), g.eval(rhs_in))
    }
}

/// Exact agreement count over all `2^{n·m}` matrices. Parallelized over
/// chunks with a deterministic ordered sum.
pub fn agreement_exhaustive(
    f0: &BooleanFunction,
    fs: &[BooleanFunction],
    g: &BooleanFunction,
) -> Result<AgreementReport> {
    let (n, m) = check_tuple(f0, fs, g)?;
    let total_bits = n * m;
    if total_bits > MAX_EXHAUSTIVE_BITS {
        return Err(Error::SizeLimit {
            what: format!("exhaustive agreement over {total_bits} matrix bits"),
            limit: MAX_EXHAUSTIVE_BITS as u64,
        });
    }
    let scanner = Scanner::new(n, m, g);
    let total = 1u64 << total_bits;
    let chunk = 1u64 << total_bits.min(16);
    let chunks = total / chunk;
    let agree: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = 0u64;
            for bits in (c * chunk)..((c + 1) * chunk) {
                let (a, b) = scanner.sides(f0, fs, g, bits);
                acc += (a == b) as u64;
            }
            acc
        })
        .sum();
    Ok(AgreementReport {
        probability: agree as f64 / total as f64,
        numerator: Some(agree),
        denominator: Some(total),
        method: AgreementMethod::Exhaustive,
        samples: total,
        halfwidth: 0.0,
        seed: 0,
    })
}

/// Lists the disagreeing matrices (for small sizes); used by diagnostics and
/// the doctrinal-paradox check.
pub fn disagreement_matrices(
    f0: &BooleanFunction,
    fs: &[BooleanFunction],
    g: &BooleanFunction,
) -> Result<Vec<InputMatrix>> {
    let (n, m) = check_tuple(f0, fs, g)?;
    let total_bits = n * m;
    if total_bits > 24 {
        return Err(Error::SizeLimit {
            what: format!("disagreement listing over {total_bits} matrix bits"),
            limit: 24,
        });
    }
    let scanner = Scanner::new(n, m, g);
    let mut out = Vec::new();
    for bits in 0..(1u64 << total_bits) {
        let (a, b) = scanner.sides(f0, fs, g, bits);
        if a != b {
            out.push(InputMatrix { rows: n, cols: m, bits });
        }
    }
    Ok(out)
}

/// Unbiased Monte-Carlo agreement estimate with the default shard count.
pub fn agreement_monte_carlo(
    f0: &BooleanFunction,
    fs: &[BooleanFunction],
    g: &BooleanFunction,
    samples: u64,
    seed: u64,
) -> Result<AgreementReport> {
    agreement_monte_carlo_sharded(f0, fs, g, samples, seed, DEFAULT_SHARDS)
}

/// Monte-Carlo estimate with an explicit shard count. Output is a pure
/// function of `(seed, shards)`.
pub fn agreement_monte_carlo_sharded(
    f0: &BooleanFunction,
    fs: &[BooleanFunction],
    g: &BooleanFunction,
    samples: u64,
    seed: u64,
    shards: u64,
) -> Result<AgreementReport> {
    let (n, m) = check_tuple(f0, fs, g)?;
    if samples == 0 {
        return Err(Error::Precondition("samples must be ≥ 1".into()));
    }
    let shards = shards.max(1).min(samples);
    let scanner = Scanner::new(n, m, g);
    let total_bits = (n * m) as u64;
    let per_word = 64 / total_bits.max(1);
    let mask = if total_bits >= 64 { u64::MAX } else { (1u64 << total_bits) - 1 };
    let counts: Vec<u64> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let lo = s * samples / shards;
            let hi = (s + 1) * samples / shards;
            let mut rng = CounterRng::new(seed, s);
            let mut acc = 0u64;
            let mut k = 0;
            let mut word = 0u64;
            for _ in lo..hi {
                if k == 0 {
                    word = rng.next_u64();
                    k = per_word;
                }
                let bits = word & mask;
                word >>= total_bits.min(63);
                k -= 1;
                let (a, b) = scanner.sides(f0, fs, g, bits);
                acc += (a == b) as u64;
            }
            acc
        })
        .collect();
    let agree: u64 = counts.iter().sum();
    Ok(AgreementReport {
        probability: agree as f64 / samples as f64,
        numerator: None,
        denominator: None,
        method: AgreementMethod::MonteCarlo,
        samples,
        halfwidth: hoeffding_halfwidth(samples),
        seed,
    })
}

/// Expands the function list for a kind: plain repeats `f`, skew repeats
/// `f1`, multi passes through.
pub fn column_functions(
    kind: PolymorphKind,
    functions: &[BooleanFunction],
    m: u32,
) -> Result<(BooleanFunction, Vec<BooleanFunction>)> {
    match kind {
        PolymorphKind::Plain => {
            if functions.len() != 1 {
                return Err(Error::DimensionMismatch("plain kind takes exactly one f".into()));
            }
            Ok((functions[0].clone(), vec![functions[0].clone(); m as usize]))
        }
        PolymorphKind::Skew => {
            if functions.len() != 2 {
                return Err(Error::DimensionMismatch("skew kind takes (f0, f1)".into()));
            }
            Ok((functions[0].clone(), vec![functions[1].clone(); m as usize]))
        }
        PolymorphKind::Multi => {
            if functions.len() != m as usize + 1 {
                return Err(Error::DimensionMismatch(format!(
                    "multi kind takes f0 plus {m} column functions"
                )));
            }
            Ok((functions[0].clone(), functions[1..].to_vec()))
        }
    }
}

/// True iff the two sides agree on every matrix. Early-exits on the first
/// disagreement.
pub fn is_exact(
    kind: PolymorphKind,
    functions: &[BooleanFunction],
    g: &BooleanFunction,
) -> Result<bool> {
    let (f0, fs) = column_functions(kind, functions, g.arity())?;
    is_exact_tuple(&f0, &fs, g)
}

pub fn is_exact_tuple(
    f0: &BooleanFunction,
    fs: &[BooleanFunction],
    g: &BooleanFunction,
) -> Result<bool> {
    let (n, m) = check_tuple(f0, fs, g)?;
    let total_bits = n * m;
    if total_bits > MAX_EXHAUSTIVE_BITS {
        return Err(Error::SizeLimit {
            what: format!("exactness check over {total_bits} matrix bits"),
            limit: MAX_EXHAUSTIVE_BITS as u64,
        });
    }
    let scanner = Scanner::new(n, m, g);
    for bits in 0..(1u64 << total_bits) {
        let (a, b) = scanner.sides(f0, fs, g, bits);
        if a != b {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exactness of `f0 ∘ g^n = h ∘ (f1, …, fm)` (the two-outer-function form).
pub fn is_exact_fgh(
    f0: &BooleanFunction,
    fs: &[BooleanFunction],
    g: &BooleanFunction,
    h: &BooleanFunction,
) -> Result<bool> {
    let (n, m) = check_tuple(f0, fs, g)?;
    if h.arity() != m {
        return Err(Error::ArityMismatch(h.arity(), m));
    }
    let total_bits = n * m;
    if total_bits > MAX_EXHAUSTIVE_BITS {
        return Err(Error::SizeLimit {
            what: format!("exactness check over {total_bits} matrix bits"),
            limit: MAX_EXHAUSTIVE_BITS as u64,
        });
    }
    let scanner = Scanner::new(n, m, g);
    for bits in 0..(1u64 << total_bits) {
        let (a, _) = scanner.sides(f0, fs, g, bits);
        // Recompute the right side with h outside.
        let mut rhs_in = 0u32;
        for j in 0..m {
            let mut col = 0u32;
            for i in 0..n {
                col |= (((bits >> (i * m + j)) & 1) as u32) << i;
            }
            rhs_in |= (fs[j as usize].eval(col) as u32) << j;
        }
        if a != h.eval(rhs_in) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::BooleanFunction as Bf;

    fn and2() -> Bf {
        Bf::and_set(2, 0b11).unwrap()
    }

    fn maj3() -> Bf {
        Bf::majority(3).unwrap()
    }

    #[test]
    fn compose_sides_examples() {
        // Dictator: both sides equal g(row_0) for any g, Z.
        let g = Bf::from_bits_u64(2, 0b0110).unwrap();
        let f = Bf::dictator(3, 0).unwrap();
        let fs = vec![f.clone(), f.clone()];
        for bits in 0..64u64 {
            let z = InputMatrix::new(3, 2, bits).unwrap();
            let (a, b) = compose_sides(&f, &fs, &g, &z).unwrap();
            assert_eq!(a, b);
            assert_eq!(a, g.eval(z.row(0)));
        }
        // Doctrinal-paradox witness: rows (1,1),(1,0),(0,1) for (Maj3, AND2).
        let f = maj3();
        let fs = vec![f.clone(), f.clone()];
        let bits = 0b10_01_11u64; // row0 = 11, row1 = 01 (x1=1,x2=0), row2 = 10
        let z = InputMatrix::new(3, 2, bits).unwrap();
        assert_eq!(z.row(0), 0b11);
        assert_eq!(z.row(1), 0b01);
        assert_eq!(z.row(2), 0b10);
        let (a, b) = compose_sides(&f, &fs, &and2(), &z).unwrap();
        assert_eq!((a, b), (false, true));
    }

    #[test]
    fn maj3_and2_agreement_is_58_of_64() {
        let f = maj3();
        let fs = vec![f.clone(), f.clone()];
        let r = agreement_exhaustive(&f, &fs, &and2()).unwrap();
        assert_eq!(r.numerator, Some(58));
        assert_eq!(r.denominator, Some(64));
        assert_eq!(r.halfwidth, 0.0);
    }

    #[test]
    fn dictator_is_always_exact() {
        for gbits in 0..16u64 {
            let g = Bf::from_bits_u64(2, gbits).unwrap();
            for i in 0..3 {
                let f = Bf::dictator(3, i).unwrap();
                assert!(is_exact(PolymorphKind::Plain, &[f], &g).unwrap());
            }
        }
    }

    #[test]
    fn skew_or_and_nand() {
        // (f0, f1) = (OR_I, AND_I) with g = NAND is exact; with g = NOR the
        // roles swap.
        let nand = and2().negate();
        let nor = Bf::or_set(2, 0b11).unwrap().negate();
        let or3 = Bf::or_set(3, 0b111).unwrap();
        let and3 = Bf::and_set(3, 0b111).unwrap();
        assert!(is_exact(PolymorphKind::Skew, &[or3.clone(), and3.clone()], &nand).unwrap());
        assert!(is_exact(PolymorphKind::Skew, &[and3.clone(), or3.clone()], &nor).unwrap());
        assert!(!is_exact(PolymorphKind::Skew, &[or3.clone(), and3.clone()], &nor).unwrap());
        assert!(!is_exact(PolymorphKind::Skew, &[and3, or3], &nand).unwrap());
        // Plain (Maj3, AND2) is not exact.
        assert!(!is_exact(PolymorphKind::Plain, &[maj3()], &and2()).unwrap());
    }

    #[test]
    fn monte_carlo_brackets_exhaustive() {
        let f = maj3();
        let fs = [f.clone()];
        let r = agreement_monte_carlo(&f, &vec![f.clone(); 2], &and2(), 200_000, 1).unwrap();
        let _ = fs;
        assert!((r.probability - 58.0 / 64.0).abs() <= r.halfwidth);
        // Determinism for fixed (seed, shards).
        let r2 = agreement_monte_carlo(&f, &vec![f.clone(); 2], &and2(), 200_000, 1).unwrap();
        assert_eq!(r.probability, r2.probability);
    }

    #[test]
    fn size_limits() {
        let f = Bf::constant(8, false).unwrap();
        let g = Bf::constant(4, false).unwrap();
        let fs = vec![f.clone(); 4];
        assert!(matches!(
            agreement_exhaustive(&f, &fs, &g),
            Err(Error::SizeLimit { .. })
        ));
    }
}
