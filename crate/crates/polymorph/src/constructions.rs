//! Lifted sign/threshold lower-bound constructions: a one-dimensional
//! descriptor applied to normalized block sums, optionally piecewise with a
//! tabulated conditional-sign companion on the far slice, plus empirical
//! agreement sampling and exact Fourier decay measurements.
//!
//! Inputs live on `{−1,1}^{N·n}` packed into `u64` words with a stored 1 bit
//! meaning the value −1 (matching the crate-wide `(-1)^bit` view).

use crate::boolfn::{fourier_transform, BooleanFunction, View};
use crate::compose::{hoeffding_halfwidth, AgreementMethod, AgreementReport};
use crate::gaussian::{gamma_estimate, gaussian_analog, DOMAIN_CUT};
use crate::rng::{stream_word, CounterRng};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

/// One-dimensional inner descriptor: `q(t) = +1` iff `t ≥ θ` (sign is
/// `θ = 0`; ties resolve to +1 everywhere).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum InnerSpec {
    Sign,
    Threshold(f64),
}

impl InnerSpec {
    fn theta(&self) -> f64 {
        match self {
            InnerSpec::Sign => 0.0,
            InnerSpec::Threshold(t) => *t,
        }
    }
}

/// Tabulated sign of the conditional mean `γ(x)` on a uniform grid over
/// `[-8, 8]`, with linear interpolation between grid values.
#[derive(Clone, Debug)]
pub struct Q0Table {
    values: Vec<f64>,
}

pub const Q0_GRID_POINTS: usize = 512;
const Q0_GAMMA_SAMPLES: u64 = 50_000;

impl Q0Table {
    fn grid_x(k: usize) -> f64 {
        -DOMAIN_CUT + 2.0 * DOMAIN_CUT * k as f64 / (Q0_GRID_POINTS - 1) as f64
    }

    /// Builds the table from seeded conditional Monte Carlo.
    pub fn build(g: &BooleanFunction, seed: u64) -> Result<Self> {
        let analog = gaussian_analog(g)?;
        let values = (0..Q0_GRID_POINTS)
            .into_par_iter()
            .map(|k| gamma_estimate(&analog, g, Self::grid_x(k), Q0_GAMMA_SAMPLES, seed, k as u64))
            .collect();
        Ok(Q0Table { values })
    }

    /// Interpolated γ at `x` (clamped to the grid range).
    pub fn gamma(&self, x: f64) -> f64 {
        let step = 2.0 * DOMAIN_CUT / (Q0_GRID_POINTS - 1) as f64;
        let pos = (x + DOMAIN_CUT) / step;
        if pos <= 0.0 {
            return self.values[0];
        }
        let k = pos.floor() as usize;
        if k + 1 >= Q0_GRID_POINTS {
            return *self.values.last().unwrap();
        }
        let frac = pos - k as f64;
        self.values[k] * (1.0 - frac) + self.values[k + 1] * frac
    }

    /// Sign of the interpolated γ, ties to +1.
    pub fn sign(&self, x: f64) -> i8 {
        if self.gamma(x) >= 0.0 {
            1
        } else {
            -1
        }
    }
}

/// A lifted construction: `inner` applied to the normalized sum of all
/// `N·n` coordinates, optionally replaced by the tabulated conditional sign
/// on the far side of the `(E[g]/2)·N·n` slice.
#[derive(Clone, Debug)]
pub struct LiftedConstruction {
    pub inner: InnerSpec,
    pub n_inner: u32,
    pub block: u32,
    /// Present only for unbalanced `g`: the slice boundary and the
    /// standardization constants for the companion lookup.
    piecewise: Option<Piecewise>,
}

#[derive(Clone, Debug)]
struct Piecewise {
    /// pm mean of `g`.
    mu: f64,
    q0: Q0Table,
}

impl LiftedConstruction {
    pub fn total_arity(&self) -> u32 {
        self.block * self.n_inner
    }

    fn words(&self) -> usize {
        (self.total_arity() as usize).div_ceil(64)
    }

    /// pm sum of a packed ±1 vector (bit 1 ↔ −1).
    fn pm_sum(&self, bits: &[u64]) -> i64 {
        let ones: i64 = bits.iter().map(|w| w.count_ones() as i64).sum();
        self.total_arity() as i64 - 2 * ones
    }

    /// Evaluates the construction on a packed input.
    pub fn eval_pm(&self, bits: &[u64]) -> i8 {
        let d = self.total_arity() as f64;
        let total = self.pm_sum(bits) as f64;
        let t = total / d.sqrt();
        match &self.piecewise {
            None => self.inner_value(t),
            Some(pw) => {
                // The near-balanced region (closed on the inner side) holds
                // the lifted descriptor; the far region consults the
                // standardized conditional sign.
                let threshold = pw.mu / 2.0 * d;
                let near = if pw.mu < 0.0 { total >= threshold } else { total <= threshold };
                if near {
                    self.inner_value(t)
                } else {
                    let u = (t - pw.mu * d.sqrt()) / (1.0 - pw.mu * pw.mu).sqrt();
                    pw.q0.sign(u)
                }
            }
        }
    }

    fn inner_value(&self, t: f64) -> i8 {
        if t >= self.inner.theta() {
            1
        } else {
            -1
        }
    }

    /// Materializes the truth table (the stored bit is 1 where the pm value
    /// is −1). Only for total arity ≤ 24.
    pub fn materialize(&self) -> Result<BooleanFunction> {
        let d = self.total_arity();
        if d > crate::boolfn::MAX_ARITY {
            return Err(Error::ArityTooLarge { arity: d, max: crate::boolfn::MAX_ARITY });
        }
        BooleanFunction::from_fn(d, |x| self.eval_pm(&[x as u64]) == -1)
    }
}

/// Lifts the descriptor to `{−1,1}^{N·n}`, evaluating it on the normalized
/// total sum (for `q = sgn` this is the majority of all `N·n` bits; at
/// `N·n = 1` it is the identity on one coordinate).
pub fn lift_inner(inner: InnerSpec, n_inner: u32, block: u32) -> Result<LiftedConstruction> {
    if block == 0 || n_inner == 0 {
        return Err(Error::Precondition("block size and inner dimension must be ≥ 1".into()));
    }
    Ok(LiftedConstruction { inner, n_inner, block, piecewise: None })
}

/// Builds the lower-bound function for `g`: the lifted descriptor on the
/// near-balanced slice and the tabulated conditional sign beyond it. For
/// balanced `g` the descriptor is used everywhere. The direction of the
/// slice test mirrors with the sign of `E[g]`.
pub fn build_lower_bound_function(
    g: &BooleanFunction,
    inner: InnerSpec,
    n_inner: u32,
    block: u32,
    seed: u64,
) -> Result<LiftedConstruction> {
    if g.is_constant().is_some() {
        return Err(Error::Precondition("lower-bound construction needs non-constant g".into()));
    }
    let mut c = lift_inner(inner, n_inner, block)?;
    let mu = g.mean(View::PmOne, 0.5);
    if mu.abs() > 1e-12 {
        c.piecewise = Some(Piecewise { mu, q0: Q0Table::build(g, seed)? });
    }
    Ok(c)
}

/// Bitsliced evaluation of `g` across all rows at once: `cols[j]` holds one
/// word of column `j`; the result word has the row outputs.
fn g_rows_word(g: &BooleanFunction, cols: &[u64]) -> u64 {
    let m = g.arity();
    let mut out = 0u64;
    for v in 0..(1u32 << m) {
        if !g.eval(v) {
            continue;
        }
        let mut term = u64::MAX;
        for (j, &w) in cols.iter().enumerate() {
            term &= if (v >> j) & 1 == 1 { w } else { !w };
        }
        out |= term;
    }
    out
}

/// Monte-Carlo agreement of the construction with `g` over uniform
/// `(N·n) × m` matrices; sharded, deterministic for a fixed seed.
pub fn empirical_agreement(
    g: &BooleanFunction,
    construction: &LiftedConstruction,
    samples: u64,
    seed: u64,
) -> Result<AgreementReport> {
    if samples == 0 {
        return Err(Error::Precondition("samples must be ≥ 1".into()));
    }
    let m = g.arity() as usize;
    let words = construction.words();
    let d = construction.total_arity() as usize;
    let last_mask = if d % 64 == 0 { u64::MAX } else { (1u64 << (d % 64)) - 1 };
    let shards = 64u64.min(samples);
    let counts: Vec<u64> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let lo = s * samples / shards;
            let hi = (s + 1) * samples / shards;
            let mut rng = CounterRng::new(seed, s);
            let mut cols: Vec<Vec<u64>> = vec![vec![0u64; words]; m];
            let mut rows = vec![0u64; words];
            let mut col_word = vec![0u64; m];
            let mut acc = 0u64;
            for _ in lo..hi {
                for col in cols.iter_mut() {
                    for (wi, w) in col.iter_mut().enumerate() {
                        *w = rng.next_u64();
                        if wi + 1 == words {
                            *w &= last_mask;
                        }
                    }
                }
                for wi in 0..words {
                    for (j, col) in cols.iter().enumerate() {
                        col_word[j] = col[wi];
                    }
                    rows[wi] = g_rows_word(g, &col_word);
                    if wi + 1 == words {
                        rows[wi] &= last_mask;
                    }
                }
                let lhs = construction.eval_pm(&rows);
                let mut rhs_idx = 0u32;
                for (j, col) in cols.iter().enumerate() {
                    if construction.eval_pm(col) == -1 {
                        rhs_idx |= 1 << j;
                    }
                }
                let rhs = g.pm_i8(rhs_idx);
                acc += (lhs == rhs) as u64;
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

/// One row of the Fourier decay table.
#[derive(Clone, Debug, Serialize)]
pub struct DecayRow {
    pub block: u32,
    /// Maximum |coefficient| at levels 1..=L.
    pub max_abs_per_level: Vec<f64>,
}

/// Exact low-level Fourier maxima of the lifted descriptor for each block
/// size. The level-1 maximum must shrink roughly like `1/√2` per doubling.
pub fn fourier_decay_series(
    inner: InnerSpec,
    n_inner: u32,
    levels: u32,
    blocks: &[u32],
) -> Result<Vec<DecayRow>> {
    let mut out = Vec::new();
    for &block in blocks {
        let c = lift_inner(inner, n_inner, block)?;
        let f = c.materialize()?;
        let e = fourier_transform(&f, View::PmOne, 0.5)?;
        let mut maxima = vec![0.0f64; levels as usize];
        for (s, coeff) in e.coeffs().iter().enumerate() {
            let lvl = (s as u32).count_ones();
            if lvl >= 1 && lvl <= levels {
                let slot = &mut maxima[(lvl - 1) as usize];
                if coeff.abs() > *slot {
                    *slot = coeff.abs();
                }
            }
        }
        out.push(DecayRow { block, max_abs_per_level: maxima });
    }
    Ok(out)
}

/// Randomized rounding of a fractional value in `[-1, 1]` to ±1 with
/// matching expectation; deterministic per `(seed, input)`.
pub fn boolean_round(value: f64, seed: u64, input: u64) -> Result<i8> {
    if !(-1.0..=1.0).contains(&value) {
        return Err(Error::ValueOutOfRange(value));
    }
    let u = (stream_word(seed, 0xb001, input) >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    Ok(if u < (1.0 + value) / 2.0 { 1 } else { -1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::{agreement_exhaustive, PolymorphKind};

    fn and2() -> BooleanFunction {
        BooleanFunction::and_set(2, 0b11).unwrap()
    }

    fn xor2() -> BooleanFunction {
        BooleanFunction::parity(2, 0b11, false).unwrap()
    }

    #[test]
    fn lift_examples() {
        // sgn on one coordinate is the identity (dictator).
        let c = lift_inner(InnerSpec::Sign, 1, 1).unwrap();
        let f = c.materialize().unwrap();
        assert_eq!(f.as_dictator(), Some(0));
        // sgn of a 3-bit sum is Maj3.
        let c = lift_inner(InnerSpec::Sign, 1, 3).unwrap();
        assert_eq!(c.materialize().unwrap(), BooleanFunction::majority(3).unwrap());
        // Threshold at +∞ is the constant −1 (table all ones).
        let c = lift_inner(InnerSpec::Threshold(f64::INFINITY), 1, 3).unwrap();
        assert_eq!(c.materialize().unwrap().is_constant(), Some(true));
        assert!(lift_inner(InnerSpec::Sign, 0, 3).is_err());
    }

    #[test]
    fn balanced_g_is_pure_descriptor_and_odd() {
        // XOR2 is balanced: the construction is the descriptor everywhere,
        // and for sgn with odd N·n it is odd.
        let c = build_lower_bound_function(&xor2(), InnerSpec::Sign, 1, 5, 0).unwrap();
        assert!(c.piecewise.is_none());
        let f = c.materialize().unwrap();
        let full = (f.table_len() - 1) as u32;
        for x in 0..f.table_len() as u32 {
            assert_eq!(f.eval(x), !f.eval(x ^ full));
        }
    }

    #[test]
    fn piecewise_regions_for_unbalanced_g() {
        // 0/1 AND2 has pm mean +1/2, so the far region is large positive
        // sums; all outputs are ±1 by construction.
        let c = build_lower_bound_function(&and2(), InnerSpec::Sign, 1, 5, 0).unwrap();
        assert!(c.piecewise.is_some());
        let f = c.materialize().unwrap();
        // All-zero bits input: pm sum +5 > 5/4 ⇒ far region; the
        // standardized coordinate is large positive where γ > 0.
        assert_eq!(c.eval_pm(&[0]), 1);
        // All-one bits: pm sum −5, near region, sign −1.
        assert_eq!(c.eval_pm(&[0b11111]), -1);
        let _ = f;
    }

    #[test]
    fn block_symmetry_sampled() {
        let c = build_lower_bound_function(&and2(), InnerSpec::Sign, 1, 8, 0).unwrap();
        let mut rng = CounterRng::new(4, 0);
        for _ in 0..200 {
            let x = rng.next_u64() & 0xff;
            // Rotate bits within the 8-bit block: a permutation of coordinates.
            let rot = ((x << 3) | (x >> 5)) & 0xff;
            assert_eq!(c.eval_pm(&[x]), c.eval_pm(&[rot]));
        }
    }

    #[test]
    fn degenerate_block_matches_exhaustive() {
        // N = 1, n = 1 with g = AND2: the construction collapses to a
        // one-variable function and the sampled agreement must match the
        // exhaustive value exactly (it is an exact polymorphism here).
        let c = build_lower_bound_function(&and2(), InnerSpec::Sign, 1, 1, 0).unwrap();
        let f = c.materialize().unwrap();
        assert_eq!(f.as_dictator(), Some(0));
        let fs = vec![f.clone(), f.clone()];
        let exact = agreement_exhaustive(&f, &fs, &and2()).unwrap();
        assert_eq!(exact.probability, 1.0);
        let mc = empirical_agreement(&and2(), &c, 10_000, 7).unwrap();
        assert_eq!(mc.probability, 1.0);
        let _ = PolymorphKind::Plain;
    }

    #[test]
    fn xor_construction_agreement_is_half() {
        // Parity of majorities decorrelates slowly (the finite-size excess
        // decays like 0.29/√N), so a large block keeps the limit inside the
        // Monte-Carlo band.
        let c = build_lower_bound_function(&xor2(), InnerSpec::Sign, 1, 2048, 0).unwrap();
        let rep = empirical_agreement(&xor2(), &c, 100_000, 3).unwrap();
        assert!(
            (rep.probability - 0.5).abs() < 5.0 * rep.halfwidth,
            "p = {}",
            rep.probability
        );
    }

    #[test]
    fn decay_series_ratios() {
        let rows = fourier_decay_series(InnerSpec::Sign, 1, 1, &[1, 4, 8, 16]).unwrap();
        assert!((rows[0].max_abs_per_level[0] - 1.0).abs() < 1e-12);
        let l1: Vec<f64> = rows[1..].iter().map(|r| r.max_abs_per_level[0]).collect();
        // Frozen combinatorial values: 3/8, 70/256, 12870/65536.
        assert!((l1[0] - 0.375).abs() < 1e-12);
        assert!((l1[1] - 0.2734375).abs() < 1e-12);
        assert!((l1[2] - 0.196380615234375).abs() < 1e-12);
        for w in l1.windows(2) {
            let ratio = w[1] / w[0];
            assert!((0.57..=0.85).contains(&ratio), "ratio {ratio}");
        }
        // Maj3 cross-check: level-1 coefficient 1/2.
        let rows = fourier_decay_series(InnerSpec::Sign, 1, 1, &[3]).unwrap();
        assert!((rows[0].max_abs_per_level[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rounding_properties() {
        assert_eq!(boolean_round(1.0, 0, 42).unwrap(), 1);
        assert_eq!(boolean_round(-1.0, 0, 42).unwrap(), -1);
        assert!(boolean_round(1.5, 0, 0).is_err());
        // Value 0 rounds to ±1 with equal probability over inputs.
        let mut plus = 0;
        for input in 0..10_000u64 {
            if boolean_round(0.0, 9, input).unwrap() == 1 {
                plus += 1;
            }
        }
        assert!((plus as f64 - 5000.0).abs() < 3.0 * 50.0);
        // Pointwise expectation tracks the fractional value over seeds.
        for &v in &[-0.6, 0.2, 0.9] {
            let mut acc = 0.0;
            let trials = 10_000;
            for seed in 0..trials {
                acc += boolean_round(v, seed, 1234).unwrap() as f64;
            }
            let se = (1.0f64 - v * v).sqrt() / (trials as f64).sqrt();
            assert!((acc / trials as f64 - v).abs() < 4.0 * se, "v={v}");
        }
        // Determinism per (seed, input).
        assert_eq!(boolean_round(0.3, 5, 77).unwrap(), boolean_round(0.3, 5, 77).unwrap());
    }

    #[test]
    fn q0_table_sign_matches_known_crossing() {
        // For 0/1 AND2 (pm mean +1/2) the conditional mean crosses zero at
        // −0.9084…; the tabulated sign must flip there.
        let q0 = Q0Table::build(&and2(), 0).unwrap();
        assert_eq!(q0.sign(0.0), 1);
        assert_eq!(q0.sign(-2.0), -1);
        assert_eq!(q0.sign(-0.7), 1);
        assert_eq!(q0.sign(-1.1), -1);
    }
}
