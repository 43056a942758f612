//! Boolean functions on `{0,1}^n` as truth tables, with Fourier-analytic
//! operations under arbitrary p-biased product measures.
//!
//! Conventions, fixed once for the whole crate:
//!
//! * Coordinates are 0-based in code. Input coordinate `i` is bit `i` of the
//!   table index, so coordinate 0 is the least significant bit.
//! * The canonical storage is the 0/1 truth table. The ±1 ("pm") view maps a
//!   stored bit `b` to the real value `(-1)^b`, i.e. `0 ↔ +1`, `1 ↔ -1`.
//! * Under the measure with `Pr[bit = 1] = p`, the orthonormal biased
//!   character basis uses the centered, unit-variance coordinate
//!   `((-1)^b - (1-2p)) / (2 sqrt(p(1-p)))`.

use crate::rng::CounterRng;
use crate::{Error, Result};
use std::fmt;

/// Largest supported arity; a table at this arity is 2^24 bits.
pub const MAX_ARITY: u32 = 24;

/// Which real-valued view of a 0/1 table an operation should use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum View {
    /// Raw table values `0.0 / 1.0`.
    ZeroOne,
    /// `(-1)^f`, so `0 ↔ +1` and `1 ↔ -1`.
    PmOne,
}

/// A Boolean function given by its truth table.
///
/// Immutable after construction; all operations are pure.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BooleanFunction {
    arity: u32,
    words: Vec<u64>,
}

impl fmt::Debug for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BooleanFunction(n={} table={})", self.arity, self.to_hex())
    }
}

fn words_for(arity: u32) -> usize {
    let bits = 1usize << arity;
    bits.div_ceil(64)
}

impl BooleanFunction {
    pub fn arity(&self) -> u32 {
        self.arity
    }

    /// Number of table entries, `2^n`.
    pub fn table_len(&self) -> usize {
        1usize << self.arity
    }

    fn check_arity(arity: u32) -> Result<()> {
        if arity > MAX_ARITY {
            return Err(Error::ArityTooLarge { arity, max: MAX_ARITY });
        }
        Ok(())
    }

    /// Builds a function from a predicate on table indices.
    pub fn from_fn(arity: u32, mut f: impl FnMut(u32) -> bool) -> Result<Self> {
        Self::check_arity(arity)?;
        let mut words = vec![0u64; words_for(arity)];
        for x in 0..(1u32 << arity) {
            if f(x) {
                words[(x >> 6) as usize] |= 1u64 << (x & 63);
            }
        }
        Ok(BooleanFunction { arity, words })
    }

    /// Builds a function of arity ≤ 6 directly from table bits.
    pub fn from_bits_u64(arity: u32, bits: u64) -> Result<Self> {
        if arity > 6 {
            return Err(Error::ArityTooLarge { arity, max: 6 });
        }
        let len = 1u32 << arity;
        let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        Ok(BooleanFunction { arity, words: vec![bits & mask] })
    }

    /// Table bits as one word, when the arity allows it.
    pub fn bits_u64(&self) -> Option<u64> {
        if self.arity <= 6 {
            Some(self.words[0])
        } else {
            None
        }
    }

    #[inline]
    pub fn eval(&self, x: u32) -> bool {
        debug_assert!((x as usize) < self.table_len());
        (self.words[(x >> 6) as usize] >> (x & 63)) & 1 == 1
    }

    /// ±1 view: `+1` for a 0 bit, `-1` for a 1 bit.
    #[inline]
    pub fn pm(&self, x: u32) -> f64 {
        if self.eval(x) {
            -1.0
        } else {
            1.0
        }
    }

    #[inline]
    pub fn pm_i8(&self, x: u32) -> i8 {
        if self.eval(x) {
            -1
        } else {
            1
        }
    }

    // ---- named constructors -------------------------------------------------

    pub fn constant(arity: u32, b: bool) -> Result<Self> {
        Self::from_fn(arity, |_| b)
    }

    pub fn dictator(arity: u32, i: usize) -> Result<Self> {
        if i >= arity as usize {
            return Err(Error::IndexOutOfRange { index: i, arity });
        }
        Self::from_fn(arity, |x| (x >> i) & 1 == 1)
    }

    pub fn anti_dictator(arity: u32, i: usize) -> Result<Self> {
        if i >= arity as usize {
            return Err(Error::IndexOutOfRange { index: i, arity });
        }
        Self::from_fn(arity, |x| (x >> i) & 1 == 0)
    }

    /// `⊕_{i∈I} x_i ⊕ a`.
    pub fn parity(arity: u32, i_set: u32, a: bool) -> Result<Self> {
        Self::check_set(arity, i_set)?;
        Self::from_fn(arity, |x| ((x & i_set).count_ones() & 1 == 1) ^ a)
    }

    /// `⋁_{i∈I} (x_i ⊕ flip_i)`; the empty OR is the constant 0.
    pub fn or_literals(arity: u32, i_set: u32, flips: u32) -> Result<Self> {
        Self::check_set(arity, i_set)?;
        Self::from_fn(arity, |x| (x ^ flips) & i_set != 0)
    }

    /// `⋀_{i∈I} (x_i ⊕ flip_i)`; the empty AND is the constant 1.
    pub fn and_literals(arity: u32, i_set: u32, flips: u32) -> Result<Self> {
        Self::check_set(arity, i_set)?;
        Self::from_fn(arity, |x| (x ^ flips) & i_set == i_set)
    }

    pub fn or_set(arity: u32, i_set: u32) -> Result<Self> {
        Self::or_literals(arity, i_set, 0)
    }

    pub fn and_set(arity: u32, i_set: u32) -> Result<Self> {
        Self::and_literals(arity, i_set, 0)
    }

    /// OR of `blocks` disjoint ANDs of `width` consecutive coordinates.
    pub fn tribes(width: u32, blocks: u32) -> Result<Self> {
        let mask = (1u32 << width) - 1;
        Self::from_fn(width * blocks, move |x| {
            (0..blocks).any(|b| (x >> (b * width)) & mask == mask)
        })
    }

    /// Majority on an odd arity; ties cannot occur.
    pub fn majority(arity: u32) -> Result<Self> {
        if arity % 2 == 0 {
            return Err(Error::Precondition(format!(
                "majority needs odd arity, got {arity}"
            )));
        }
        Self::from_fn(arity, |x| 2 * x.count_ones() > arity)
    }

    fn check_set(arity: u32, set: u32) -> Result<()> {
        Self::check_arity(arity)?;
        if arity < 32 && set >> arity != 0 {
            return Err(Error::IndexOutOfRange {
                index: (31 - set.leading_zeros()) as usize,
                arity,
            });
        }
        Ok(())
    }

    // ---- text format --------------------------------------------------------

    /// Parses the `n=<arity> table=<hex>` text format. The hex string encodes
    /// the table little-endian: the first hex digit pair is the low byte, and
    /// the bit for input index 0 is its least significant bit.
    pub fn parse(text: &str) -> Result<Self> {
        let mut arity: Option<u32> = None;
        let mut hex: Option<&str> = None;
        for tok in text.split_whitespace() {
            if let Some(v) = tok.strip_prefix("n=") {
                arity = Some(v.parse::<u32>().map_err(|_| Error::Parse {
                    token: tok.to_string(),
                    reason: "arity must be a non-negative integer".into(),
                })?);
            } else if let Some(v) = tok.strip_prefix("table=") {
                hex = Some(v);
            } else {
                return Err(Error::Parse {
                    token: tok.to_string(),
                    reason: "expected `n=<arity>` or `table=<hex>`".into(),
                });
            }
        }
        let arity = arity.ok_or_else(|| Error::Parse {
            token: text.trim().to_string(),
            reason: "missing `n=` field".into(),
        })?;
        let hex = hex.ok_or_else(|| Error::Parse {
            token: text.trim().to_string(),
            reason: "missing `table=` field".into(),
        })?;
        Self::from_hex(arity, hex)
    }

    pub fn from_hex(arity: u32, hex: &str) -> Result<Self> {
        Self::check_arity(arity)?;
        let bits = 1usize << arity;
        let digits = bits.div_ceil(4);
        if hex.len() != digits {
            return Err(Error::Parse {
                token: hex.to_string(),
                reason: format!("table needs exactly {digits} hex digits for n={arity}"),
            });
        }
        let mut words = vec![0u64; words_for(arity)];
        // Digit pairs from the front are bytes from the low end.
        let raw = hex.as_bytes();
        for (byte_idx, chunk) in raw.chunks(2).enumerate() {
            let mut val = 0u64;
            for &c in chunk {
                let d = (c as char).to_digit(16).ok_or_else(|| Error::Parse {
                    token: (c as char).to_string(),
                    reason: "not a hex digit".into(),
                })? as u64;
                val = val * 16 + d;
            }
            let shift = (byte_idx * 8) % 64;
            words[byte_idx / 8] |= val << shift;
        }
        // Reject set bits beyond the table length.
        let f = BooleanFunction { arity, words };
        if bits % 64 != 0 {
            let last = f.words[words_for(arity) - 1];
            if bits < 64 && last >> bits != 0 {
                return Err(Error::Parse {
                    token: hex.to_string(),
                    reason: "table has bits beyond 2^n".into(),
                });
            }
        }
        Ok(f)
    }

    /// Inverse of [`BooleanFunction::from_hex`]; round-trips byte-identically.
    pub fn to_hex(&self) -> String {
        let bits = self.table_len();
        let digits = bits.div_ceil(4);
        let mut out = String::with_capacity(digits);
        let mut remaining = digits;
        let mut byte_idx = 0;
        while remaining > 0 {
            let byte = (self.words[byte_idx / 8] >> ((byte_idx * 8) % 64)) & 0xff;
            if remaining == 1 {
                out.push(char::from_digit((byte & 0xf) as u32, 16).unwrap());
                remaining -= 1;
            } else {
                out.push(char::from_digit((byte >> 4) as u32, 16).unwrap());
                out.push(char::from_digit((byte & 0xf) as u32, 16).unwrap());
                remaining -= 2;
            }
            byte_idx += 1;
        }
        out
    }

    pub fn spec_string(&self) -> String {
        format!("n={} table={}", self.arity, self.to_hex())
    }

    // ---- structure ----------------------------------------------------------

    pub fn depends_on(&self, i: usize) -> bool {
        if i >= self.arity as usize {
            return false;
        }
        let step = 1u32 << i;
        for x in 0..(self.table_len() as u32) {
            if x & step == 0 && self.eval(x) != self.eval(x | step) {
                return true;
            }
        }
        false
    }

    /// Bitmask of coordinates the function depends on.
    pub fn dependent_set(&self) -> u32 {
        let mut mask = 0;
        for i in 0..self.arity as usize {
            if self.depends_on(i) {
                mask |= 1 << i;
            }
        }
        mask
    }

    pub fn depends_on_all(&self) -> bool {
        self.dependent_set() == ((1u64 << self.arity) - 1) as u32
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_constant(&self) -> Option<bool> {
        let ones = self.count_ones();
        if ones == 0 {
            Some(false)
        } else if ones == self.table_len() as u64 {
            Some(true)
        } else {
            None
        }
    }

    pub fn as_dictator(&self) -> Option<usize> {
        (0..self.arity as usize).find(|&i| {
            (0..self.table_len() as u32).all(|x| self.eval(x) == ((x >> i) & 1 == 1))
        })
    }

    pub fn as_anti_dictator(&self) -> Option<usize> {
        (0..self.arity as usize).find(|&i| {
            (0..self.table_len() as u32).all(|x| self.eval(x) == ((x >> i) & 1 == 0))
        })
    }

    /// If `f = ⊕_{i∈I} x_i ⊕ a`, returns `(I, a)`. Constants match with
    /// `I = ∅`.
    pub fn as_parity(&self) -> Option<(u32, bool)> {
        let a = self.eval(0);
        let mut i_set = 0u32;
        for i in 0..self.arity as usize {
            if self.eval(1 << i) != a {
                i_set |= 1 << i;
            }
        }
        let ok = (0..self.table_len() as u32)
            .all(|x| self.eval(x) == (((x & i_set).count_ones() & 1 == 1) ^ a));
        ok.then_some((i_set, a))
    }

    /// If `f = ⋁_{i∈I} (x_i ⊕ flip_i)`, returns `(I, flips)`.
    pub fn as_or_literals(&self) -> Option<(u32, u32)> {
        let i_set = self.dependent_set();
        // The zero set of an OR of literals is the subcube fixing I.
        let zero = (0..self.table_len() as u32).find(|&x| !self.eval(x))?;
        let flips = zero & i_set;
        let ok = (0..self.table_len() as u32)
            .all(|x| self.eval(x) == ((x ^ flips) & i_set != 0));
        ok.then_some((i_set, flips))
    }

    /// If `f = ⋀_{i∈I} (x_i ⊕ flip_i)`, returns `(I, flips)`; flips here mark
    /// negated literals, i.e. the single 1-point is `x = flips ^ i_set` on `I`.
    pub fn as_and_literals(&self) -> Option<(u32, u32)> {
        let i_set = self.dependent_set();
        let one = (0..self.table_len() as u32).find(|&x| self.eval(x))?;
        let flips = !one & i_set;
        let ok = (0..self.table_len() as u32)
            .all(|x| self.eval(x) == ((x ^ flips) & i_set == i_set));
        ok.then_some((i_set, flips))
    }

    pub fn as_or_set(&self) -> Option<u32> {
        match self.as_or_literals() {
            Some((i_set, 0)) => Some(i_set),
            _ => None,
        }
    }

    pub fn as_and_set(&self) -> Option<u32> {
        match self.as_and_literals() {
            Some((i_set, 0)) => Some(i_set),
            _ => None,
        }
    }

    /// `f(¬x) = ¬f(x)` for all x.
    pub fn is_odd(&self) -> bool {
        let full = (self.table_len() - 1) as u32;
        (0..self.table_len() as u32).all(|x| self.eval(x) != self.eval(x ^ full))
    }

    /// `f(¬x) = f(x)` for all x.
    pub fn is_even(&self) -> bool {
        let full = (self.table_len() - 1) as u32;
        (0..self.table_len() as u32).all(|x| self.eval(x) == self.eval(x ^ full))
    }

    pub fn negate(&self) -> Self {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        let bits = self.table_len();
        if bits % 64 != 0 {
            let last = words.last_mut().unwrap();
            *last &= (1u64 << (bits % 64)) - 1;
        }
        BooleanFunction { arity: self.arity, words }
    }

    /// `x ↦ f(¬x)`.
    pub fn flip_inputs(&self) -> Self {
        let full = (self.table_len() - 1) as u32;
        Self::from_fn(self.arity, |x| self.eval(x ^ full)).unwrap()
    }

    /// Drops coordinates outside `keep_mask`, compressing the survivors in
    /// increasing order. The function must not depend on dropped coordinates.
    pub fn project_to(&self, keep_mask: u32) -> Result<Self> {
        let dropped = self.dependent_set() & !keep_mask;
        if dropped != 0 {
            return Err(Error::Precondition(format!(
                "function depends on dropped coordinate {}",
                dropped.trailing_zeros()
            )));
        }
        let new_arity = keep_mask.count_ones();
        let kept: Vec<usize> = (0..self.arity as usize)
            .filter(|&i| keep_mask >> i & 1 == 1)
            .collect();
        Self::from_fn(new_arity, |y| {
            let mut x = 0u32;
            for (new_i, &old_i) in kept.iter().enumerate() {
                x |= ((y >> new_i) & 1) << old_i;
            }
            self.eval(x)
        })
    }

    /// Permutes input coordinates: new coordinate `k` reads old coordinate
    /// `perm[k]`.
    pub fn permute_inputs(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.arity as usize {
            return Err(Error::DimensionMismatch(format!(
                "permutation length {} vs arity {}",
                perm.len(),
                self.arity
            )));
        }
        Self::from_fn(self.arity, |y| {
            let mut x = 0u32;
            for (new_i, &old_i) in perm.iter().enumerate() {
                x |= ((y >> new_i) & 1) << old_i;
            }
            self.eval(x)
        })
    }

    // ---- restrictions -------------------------------------------------------

    /// Restricts the fixed coordinates to the given values; the result lives
    /// on the free coordinates, compressed in increasing order.
    pub fn restrict(&self, r: &Restriction) -> Result<Self> {
        if r.fixed >> self.arity != 0 && self.arity < 32 {
            return Err(Error::RestrictionMismatch);
        }
        if r.values & !r.fixed != 0 {
            return Err(Error::RestrictionMismatch);
        }
        let free: Vec<usize> = (0..self.arity as usize)
            .filter(|&i| r.fixed >> i & 1 == 0)
            .collect();
        let new_arity = free.len() as u32;
        Self::from_fn(new_arity, |y| {
            let mut x = r.values;
            for (new_i, &old_i) in free.iter().enumerate() {
                x |= ((y >> new_i) & 1) << old_i;
            }
            self.eval(x)
        })
    }

    /// Fixes a single coordinate.
    pub fn restrict_coord(&self, i: usize, value: bool) -> Result<Self> {
        if i >= self.arity as usize {
            return Err(Error::IndexOutOfRange { index: i, arity: self.arity });
        }
        self.restrict(&Restriction {
            fixed: 1 << i,
            values: (value as u32) << i,
        })
    }

    // ---- measure-dependent quantities ----------------------------------------

    /// `Pr_{μ_p}[f ≠ g]`.
    pub fn distance(&self, other: &Self, p: f64) -> Result<f64> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch(self.arity, other.arity));
        }
        let mut d = 0.0;
        for x in 0..self.table_len() as u32 {
            if self.eval(x) != other.eval(x) {
                d += mu_p_weight(x, self.arity, p);
            }
        }
        Ok(d)
    }

    /// Number of disagreeing points; `distance` at `p = 1/2` times `2^n`.
    pub fn hamming(&self, other: &Self) -> Result<u64> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch(self.arity, other.arity));
        }
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as u64)
            .sum())
    }

    /// `|E[(-1)^f · χ_S]|` under the uniform measure.
    pub fn character_correlation(&self, s_set: u32) -> f64 {
        let mut sum = 0i64;
        for x in 0..self.table_len() as u32 {
            let sign = (self.eval(x) as u32 + (x & s_set).count_ones()) & 1;
            sum += if sign == 0 { 1 } else { -1 };
        }
        (sum as f64 / self.table_len() as f64).abs()
    }

    /// Mean of the chosen view under `μ_p`.
    pub fn mean(&self, view: View, p: f64) -> f64 {
        let mut m = 0.0;
        for x in 0..self.table_len() as u32 {
            let v = match view {
                View::ZeroOne => self.eval(x) as u32 as f64,
                View::PmOne => self.pm(x),
            };
            m += v * mu_p_weight(x, self.arity, p);
        }
        m
    }
}

/// `μ_p` weight of one point.
pub fn mu_p_weight(x: u32, arity: u32, p: f64) -> f64 {
    let ones = x.count_ones();
    p.powi(ones as i32) * (1.0 - p).powi((arity - ones) as i32)
}

/// Clips a real to `[-1, 1]`.
pub fn clip(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

// ---- restrictions ------------------------------------------------------------

/// A partial assignment: `values` assigns exactly the coordinates in `fixed`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Restriction {
    /// Mask of fixed coordinates.
    pub fixed: u32,
    /// Assigned bits, a submask of `fixed`.
    pub values: u32,
}

impl Restriction {
    pub fn new(fixed: u32, values: u32) -> Result<Self> {
        if values & !fixed != 0 {
            return Err(Error::RestrictionMismatch);
        }
        Ok(Restriction { fixed, values })
    }

    pub fn empty() -> Self {
        Restriction { fixed: 0, values: 0 }
    }

    pub fn free_count(&self, arity: u32) -> u32 {
        arity - self.fixed.count_ones()
    }
}

/// p-random restriction: each coordinate stays free with probability
/// `p_free`, fixed coordinates get uniform bits. Deterministic given seed.
pub fn random_restriction(arity: u32, p_free: f64, seed: u64) -> Restriction {
    let mut rng = CounterRng::new(seed, 0x5e5);
    let mut fixed = 0u32;
    let mut values = 0u32;
    for i in 0..arity {
        if !rng.next_bool(p_free) {
            fixed |= 1 << i;
            if rng.next_bool(0.5) {
                values |= 1 << i;
            }
        }
    }
    Restriction { fixed, values }
}

// ---- correlated pairs ----------------------------------------------------------

/// One draw of the ρ-correlated pair under `μ_p`: `y` copies each coordinate
/// of `x` with probability ρ and resamples it from `μ_p` otherwise.
#[derive(Clone, Copy, Debug)]
pub struct NoisyPairSample {
    pub x: u32,
    pub y: u32,
    pub rho: f64,
    pub bias: f64,
}

pub fn sample_noisy_pair(arity: u32, rho: f64, p: f64, rng: &mut CounterRng) -> NoisyPairSample {
    let mut x = 0u32;
    let mut y = 0u32;
    for i in 0..arity {
        let xi = rng.next_bool(p);
        let yi = if rng.next_bool(rho) { xi } else { rng.next_bool(p) };
        x |= (xi as u32) << i;
        y |= (yi as u32) << i;
    }
    NoisyPairSample { x, y, rho, bias: p }
}

// ---- Fourier expansion ---------------------------------------------------------

/// Fourier expansion in the orthonormal p-biased character basis, indexed by
/// subset masks.
#[derive(Clone, Debug)]
pub struct FourierExpansion {
    arity: u32,
    bias: f64,
    coeffs: Vec<f64>,
}

impl FourierExpansion {
    pub fn arity(&self) -> u32 {
        self.arity
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn coeff(&self, s_set: u32) -> f64 {
        self.coeffs[s_set as usize]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Σ_S coeff(S)²; equals 1 for a ±1-valued function (Parseval).
    pub fn total_weight(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Fourier weight at exactly level `d`.
    pub fn weight_at_level(&self, d: u32) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(s, _)| (*s as u32).count_ones() == d)
            .map(|(_, c)| c * c)
            .sum()
    }

    pub fn degree(&self) -> u32 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.abs() > 1e-12)
            .map(|(s, _)| (s as u32).count_ones())
            .max()
            .unwrap_or(0)
    }

    /// Σ_{S∋i} coeff(S)².
    pub fn influence(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        let bit = 1usize << i;
        Ok(self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(s, _)| s & bit != 0)
            .map(|(_, c)| c * c)
            .sum())
    }

    /// Σ_{S∋i, |S|≤d} coeff(S)².
    pub fn low_degree_influence(&self, i: usize, d: u32) -> Result<f64> {
        self.check_index(i)?;
        let bit = 1usize << i;
        Ok(self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(s, _)| s & bit != 0 && (*s as u32).count_ones() <= d)
            .map(|(_, c)| c * c)
            .sum())
    }

    /// Σ_{S∋i} ρ^{|S|-1} coeff(S)².
    pub fn noisy_influence(&self, i: usize, rho: f64) -> Result<f64> {
        self.check_index(i)?;
        let bit = 1usize << i;
        Ok(self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(s, _)| s & bit != 0)
            .map(|(s, c)| rho.powi((s as u32).count_ones() as i32 - 1) * c * c)
            .sum())
    }

    /// Σ_S ρ^{|S|} coeff(S)².
    pub fn stability(&self, rho: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(s, c)| rho.powi((s as u32).count_ones() as i32) * c * c)
            .sum()
    }

    /// Scales level-d coefficients by ρ^d (the noise operator T_ρ).
    pub fn apply_noise(&self, rho: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(s, c)| rho.powi((s as u32).count_ones() as i32) * c)
            .collect();
        FourierExpansion { arity: self.arity, bias: self.bias, coeffs }
    }

    /// Point evaluation of the expansion at a 0/1 input.
    pub fn eval_at(&self, x: u32) -> f64 {
        let phi = coordinate_values(self.bias);
        let mut acc = 0.0;
        for (s, c) in self.coeffs.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            let mut basis = 1.0;
            let mut rem = s as u32;
            while rem != 0 {
                let i = rem.trailing_zeros();
                basis *= if (x >> i) & 1 == 1 { phi.1 } else { phi.0 };
                rem &= rem - 1;
            }
            acc += c * basis;
        }
        acc
    }

    /// Exact inverse: reconstructs the Boolean table. Fails if some value is
    /// not within 10⁻⁶ of the expected lattice.
    pub fn inverse(&self, view: View) -> Result<BooleanFunction> {
        let mut values = self.coeffs.clone();
        butterfly_inverse(&mut values, self.arity, self.bias);
        BooleanFunction::from_fn(self.arity, |x| {
            let v = values[x as usize];
            match view {
                View::ZeroOne => v > 0.5,
                View::PmOne => v < 0.0,
            }
        })
        .and_then(|f| {
            for (x, v) in values.iter().enumerate() {
                let expect = match view {
                    View::ZeroOne => f.eval(x as u32) as u32 as f64,
                    View::PmOne => f.pm(x as u32),
                };
                if (v - expect).abs() > 1e-6 {
                    return Err(Error::Precondition(format!(
                        "expansion is not Boolean in the {view:?} view at index {x}"
                    )));
                }
            }
            Ok(f)
        })
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.arity as usize {
            return Err(Error::IndexOutOfRange { index: i, arity: self.arity });
        }
        Ok(())
    }
}

/// Values of the orthonormal biased coordinate at bit 0 and bit 1.
fn coordinate_values(p: f64) -> (f64, f64) {
    ((p / (1.0 - p)).sqrt(), -((1.0 - p) / p).sqrt())
}

fn check_bias(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Precondition(format!("bias {p} outside (0,1)")));
    }
    Ok(())
}

/// In-place forward transform: values → biased-basis coefficients.
fn butterfly_forward(values: &mut [f64], arity: u32, p: f64) {
    let scale = (p * (1.0 - p)).sqrt();
    for j in 0..arity {
        let step = 1usize << j;
        let block = step << 1;
        let mut base = 0;
        while base < values.len() {
            for k in base..base + step {
                let f0 = values[k];
                let f1 = values[k + step];
                values[k] = (1.0 - p) * f0 + p * f1;
                values[k + step] = scale * (f0 - f1);
            }
            base += block;
        }
    }
}

fn butterfly_inverse(values: &mut [f64], arity: u32, p: f64) {
    let (phi0, phi1) = coordinate_values(p);
    for j in 0..arity {
        let step = 1usize << j;
        let block = step << 1;
        let mut base = 0;
        while base < values.len() {
            for k in base..base + step {
                let a = values[k];
                let c = values[k + step];
                values[k] = a + c * phi0;
                values[k + step] = a + c * phi1;
            }
            base += block;
        }
    }
}

/// Transform of an arbitrary real table (used for discrete derivatives).
pub fn fourier_of_values(values: &[f64], arity: u32, p: f64) -> Result<FourierExpansion> {
    check_bias(p)?;
    if values.len() != 1usize << arity {
        return Err(Error::DimensionMismatch(format!(
            "value table length {} vs 2^{arity}",
            values.len()
        )));
    }
    let mut coeffs = values.to_vec();
    butterfly_forward(&mut coeffs, arity, p);
    Ok(FourierExpansion { arity, bias: p, coeffs })
}

/// O(n·2^n) transform of a Boolean table in the chosen view.
pub fn fourier_transform(f: &BooleanFunction, view: View, p: f64) -> Result<FourierExpansion> {
    check_bias(p)?;
    let values: Vec<f64> = (0..f.table_len() as u32)
        .map(|x| match view {
            View::ZeroOne => f.eval(x) as u32 as f64,
            View::PmOne => f.pm(x),
        })
        .collect();
    fourier_of_values(&values, f.arity, p)
}

// ---- influence-family operations over Boolean functions ------------------------

/// Influence of coordinate `i` in the ±1 view: Σ_{S∋i} f̂(S)².
pub fn influence(f: &BooleanFunction, i: usize, p: f64) -> Result<f64> {
    fourier_transform(f, View::PmOne, p)?.influence(i)
}

pub fn low_degree_influence(f: &BooleanFunction, i: usize, d: u32, p: f64) -> Result<f64> {
    fourier_transform(f, View::PmOne, p)?.low_degree_influence(i, d)
}

/// Σ_{S∋i} ρ^{|S|-1} f̂(S)². Equals `p(1-p)·Stab_ρ(∂_i f)` where
/// `∂_i f = f_{i→1} - f_{i→0}` (the dual route is exercised in tests).
pub fn noisy_influence(f: &BooleanFunction, i: usize, rho: f64, p: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Precondition(format!("rho {rho} outside (0,1)")));
    }
    fourier_transform(f, View::PmOne, p)?.noisy_influence(i, rho)
}

/// `p(1-p)·Stab_ρ(∂_i f)` computed from the discrete derivative directly.
pub fn noisy_influence_via_derivative(
    f: &BooleanFunction,
    i: usize,
    rho: f64,
    p: f64,
) -> Result<f64> {
    if i >= f.arity as usize {
        return Err(Error::IndexOutOfRange { index: i, arity: f.arity });
    }
    let f1 = f.restrict_coord(i, true)?;
    let f0 = f.restrict_coord(i, false)?;
    let deriv: Vec<f64> = (0..f1.table_len() as u32)
        .map(|x| f1.pm(x) - f0.pm(x))
        .collect();
    let e = fourier_of_values(&deriv, f.arity - 1, p)?;
    Ok(p * (1.0 - p) * e.stability(rho))
}

/// Stab_ρ(f) in the ±1 view: Σ_S ρ^{|S|} f̂(S)².
pub fn noise_stability(f: &BooleanFunction, rho: f64, p: f64) -> Result<f64> {
    Ok(fourier_transform(f, View::PmOne, p)?.stability(rho))
}

/// `NS_ρ(f) = (1 - Stab_ρ(f)) / 2` for ±1-valued f.
pub fn noise_sensitivity(f: &BooleanFunction, rho: f64, p: f64) -> Result<f64> {
    Ok((1.0 - noise_stability(f, rho, p)?) / 2.0)
}

// ---- certificates (non-sensitive and sensitive inputs) --------------------------

/// A non-sensitive certificate: with the pivot coordinate reordered last,
/// `g(assignment, 0) = g(assignment, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AlphaCertificate {
    /// Pivot coordinate (0-based, in the original ordering).
    pub pivot: usize,
    /// Bits for the non-pivot coordinates, compressed in increasing order.
    pub assignment: u32,
}

/// A sensitive certificate: `g(assignment, x_pivot) = x_pivot ⊕ b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BetaCertificate {
    pub pivot: usize,
    pub assignment: u32,
    pub b: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct Certificates {
    /// `None` exactly when `g` is a parity (possibly shifted): every
    /// coordinate is sensitive at every input.
    pub alpha: Option<AlphaCertificate>,
    pub beta: BetaCertificate,
}

/// Expands a compressed non-pivot assignment into a full input with the pivot
/// bit set to `pivot_value`.
pub fn expand_assignment(assignment: u32, pivot: usize, pivot_value: bool, arity: u32) -> u32 {
    let mut x = 0u32;
    let mut k = 0;
    for i in 0..arity as usize {
        if i == pivot {
            x |= (pivot_value as u32) << i;
        } else {
            x |= ((assignment >> k) & 1) << i;
            k += 1;
        }
    }
    x
}

/// Finds the two certificates of a function that depends on all coordinates.
///
/// The pivot is the first coordinate admitting a non-sensitive assignment
/// (scanning pivots, then assignments, in increasing order); when none exists
/// the function is a possibly-shifted parity, `alpha` is `None`, and the beta
/// certificate uses the last coordinate as pivot.
pub fn find_certificates(g: &BooleanFunction) -> Result<Certificates> {
    let m = g.arity;
    if m == 0 {
        return Err(Error::Precondition("certificates need arity ≥ 1".into()));
    }
    for i in 0..m as usize {
        if !g.depends_on(i) {
            return Err(Error::IrrelevantCoordinate { index: i });
        }
    }
    let mut alpha = None;
    'outer: for pivot in 0..m as usize {
        for assignment in 0..(1u32 << (m - 1)) {
            let x0 = expand_assignment(assignment, pivot, false, m);
            let x1 = expand_assignment(assignment, pivot, true, m);
            if g.eval(x0) == g.eval(x1) {
                alpha = Some(AlphaCertificate { pivot, assignment });
                break 'outer;
            }
        }
    }
    let pivot = alpha.map_or(m as usize - 1, |a| a.pivot);
    let beta = (0..(1u32 << (m - 1)))
        .find_map(|assignment| {
            let x0 = expand_assignment(assignment, pivot, false, m);
            let x1 = expand_assignment(assignment, pivot, true, m);
            if g.eval(x0) != g.eval(x1) {
                Some(BetaCertificate { pivot, assignment, b: g.eval(x0) })
            } else {
                None
            }
        })
        .expect("dependence on the pivot guarantees a sensitive assignment");
    Ok(Certificates { alpha, beta })
}
