//! Classification of exact polymorphism solutions: brute-force enumeration,
//! template-family generation, case matching with extracted parameters, and
//! the exact multilinear identity engine.
//!
//! The three solution shapes are `plain` (one `f`), `skew` (`f0, f1`), and
//! `multi` (`f0, f1, …, fm`). For each, `enumerate_exact` is the oracle and
//! `generate_family` instantiates the structural case list; the two must
//! produce identical sets, and `match_case` must label every solution.

pub mod poly;

pub use poly::{
    poly_compose_identity, poly_compose_identity_boolean, product_form_decompose, ComposeIdentity,
    Dyadic, MultilinearPoly, ProductForm,
};

use crate::boolfn::BooleanFunction;
use crate::compose::{self, PolymorphKind};
use crate::{Error, Result};
use serde::Serialize;
use std::collections::BTreeSet;

/// A reconstructible function handle: arity plus hex table.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct FnSpec {
    pub n: u32,
    pub table: String,
}

impl FnSpec {
    pub fn of(f: &BooleanFunction) -> Self {
        FnSpec { n: f.arity(), table: f.to_hex() }
    }

    pub fn build(&self) -> Result<BooleanFunction> {
        BooleanFunction::from_hex(self.n, &self.table)
    }
}

/// One exact solution, in the layout `match_case` takes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Solution {
    Plain(BooleanFunction),
    Skew(BooleanFunction, BooleanFunction),
    Multi(Vec<BooleanFunction>),
}

impl Solution {
    pub fn functions(&self) -> Vec<BooleanFunction> {
        match self {
            Solution::Plain(f) => vec![f.clone()],
            Solution::Skew(f0, f1) => vec![f0.clone(), f1.clone()],
            Solution::Multi(fs) => fs.clone(),
        }
    }

    pub fn kind(&self) -> PolymorphKind {
        match self {
            Solution::Plain(_) => PolymorphKind::Plain,
            Solution::Skew(..) => PolymorphKind::Skew,
            Solution::Multi(_) => PolymorphKind::Multi,
        }
    }
}

/// Tagged classification outcome. Index sets are coordinate bitmasks in the
/// original orderings; `frees` carries functions the matched case leaves
/// unconstrained, so re-instantiating a label always reproduces the input
/// truth tables bit-exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum CaseLabel {
    // ---- plain ----
    FConstant { b: bool },
    FDictator { i: usize },
    FAntiDictator { i: usize },
    PlainXor { i_set: u32, a: bool, j_set: u32, b: bool },
    PlainOr { i_set: u32, j_set: u32 },
    PlainAnd { i_set: u32, j_set: u32 },
    GConstant { b: bool, f: FnSpec },
    GDictator { j: usize, f: FnSpec },
    GAntiDictator { j: usize, f: FnSpec },
    // ---- skew ----
    SkewGConstant { b: bool, f0: FnSpec, f1: FnSpec },
    SkewConstPair { a0: bool, a1: bool },
    SkewGDictator { j: usize, f: FnSpec },
    SkewGAntiDictator { j: usize, f1: FnSpec },
    SkewDictPair { i: usize },
    SkewAntiDictPair { i: usize },
    SkewMixedDict { i: usize },
    SkewXor { i_set: u32, a0: bool, a1: bool, j_set: u32, b: bool },
    SkewOr { i_set: u32, j_set: u32 },
    SkewAnd { i_set: u32, j_set: u32 },
    SkewOrAnd { i_set: u32, j_set: u32 },
    SkewAndOr { i_set: u32, j_set: u32 },
    // ---- multi ----
    MultiGConstant { b: bool, f0: FnSpec, frees: Vec<(usize, FnSpec)> },
    MultiCertificate { j_set: u32, b: Vec<bool>, b0: bool, frees: Vec<(usize, FnSpec)> },
    MultiGDictator { j: usize, f: FnSpec, frees: Vec<(usize, FnSpec)> },
    MultiGAntiDictator { j: usize, fj: FnSpec, frees: Vec<(usize, FnSpec)> },
    MultiDictShift { i: usize, a0: bool, a: Vec<(usize, bool)>, frees: Vec<(usize, FnSpec)> },
    MultiXor { i_set: u32, a0: bool, a: Vec<(usize, bool)>, b: bool, frees: Vec<(usize, FnSpec)> },
    MultiOrFlips { i_set: u32, flips: Vec<(usize, bool)>, frees: Vec<(usize, FnSpec)> },
    MultiAndFlips { i_set: u32, flips: Vec<(usize, bool)>, frees: Vec<(usize, FnSpec)> },
    // ---- f0∘g = h∘(f1..fm) ----
    Fgh { params: FghParams },
    Unclassified,
}

impl CaseLabel {
    pub fn name(&self) -> &'static str {
        match self {
            CaseLabel::FConstant { .. } => "f-constant",
            CaseLabel::FDictator { .. } => "f-dictator",
            CaseLabel::FAntiDictator { .. } => "f-anti-dictator",
            CaseLabel::PlainXor { .. } => "xor-family",
            CaseLabel::PlainOr { .. } => "or-family",
            CaseLabel::PlainAnd { .. } => "and-family",
            CaseLabel::GConstant { .. } => "g-constant",
            CaseLabel::GDictator { .. } => "g-dictator",
            CaseLabel::GAntiDictator { .. } => "g-anti-dictator",
            CaseLabel::SkewGConstant { .. } => "skew-g-constant",
            CaseLabel::SkewConstPair { .. } => "skew-constants",
            CaseLabel::SkewGDictator { .. } => "skew-g-dictator",
            CaseLabel::SkewGAntiDictator { .. } => "skew-g-anti-dictator",
            CaseLabel::SkewDictPair { .. } => "skew-dictators",
            CaseLabel::SkewAntiDictPair { .. } => "skew-anti-dictators",
            CaseLabel::SkewMixedDict { .. } => "skew-mixed-dictator",
            CaseLabel::SkewXor { .. } => "skew-xor-family",
            CaseLabel::SkewOr { .. } => "skew-or-family",
            CaseLabel::SkewAnd { .. } => "skew-and-family",
            CaseLabel::SkewOrAnd { .. } => "skew-or-and-family",
            CaseLabel::SkewAndOr { .. } => "skew-and-or-family",
            CaseLabel::MultiGConstant { .. } => "multi-g-constant",
            CaseLabel::MultiCertificate { .. } => "multi-certificate",
            CaseLabel::MultiGDictator { .. } => "multi-g-dictator",
            CaseLabel::MultiGAntiDictator { .. } => "multi-g-anti-dictator",
            CaseLabel::MultiDictShift { .. } => "multi-dictator-shift",
            CaseLabel::MultiXor { .. } => "multi-xor-family",
            CaseLabel::MultiOrFlips { .. } => "multi-or-family",
            CaseLabel::MultiAndFlips { .. } => "multi-and-family",
            CaseLabel::Fgh { .. } => "fgh",
            CaseLabel::Unclassified => "unclassified",
        }
    }
}

/// Shifted-parity exponent: `x^{⊕k}` is `x` when `k` is odd (also for
/// negative `k`), else `0`.
fn xor_pow(x: bool, k: i64) -> bool {
    x && (k.rem_euclid(2) == 1)
}

fn all_point(n: u32, b: bool) -> u32 {
    if b {
        ((1u64 << n) - 1) as u32
    } else {
        0
    }
}

// ------------------------------------------------------------------------
// match_case
// ------------------------------------------------------------------------

/// Labels an exact solution with its structural case and parameters.
/// Errors with `NotExact` when the tuple is not a solution at all.
pub fn match_case(
    kind: PolymorphKind,
    functions: &[BooleanFunction],
    g: &BooleanFunction,
) -> Result<CaseLabel> {
    if !compose::is_exact(kind, functions, g)? {
        return Err(Error::NotExact);
    }
    let label = match kind {
        PolymorphKind::Plain => match_plain(&functions[0], g),
        PolymorphKind::Skew => match_skew(&functions[0], &functions[1], g),
        PolymorphKind::Multi => match_multi(&functions[0], &functions[1..], g),
    };
    debug_assert!(
        matches!(label, CaseLabel::Unclassified)
            || reinstantiate(kind, &label, functions[0].arity(), g)
                .map(|r| r == functions)
                .unwrap_or(false),
        "label must reproduce its inputs: {label:?}"
    );
    Ok(label)
}

fn match_plain(f: &BooleanFunction, g: &BooleanFunction) -> CaseLabel {
    if let Some(b) = g.is_constant() {
        return CaseLabel::GConstant { b, f: FnSpec::of(f) };
    }
    if let Some(b) = f.is_constant() {
        return CaseLabel::FConstant { b };
    }
    if let Some(i) = f.as_dictator() {
        return CaseLabel::FDictator { i };
    }
    if g.is_odd() {
        if let Some(i) = f.as_anti_dictator() {
            return CaseLabel::FAntiDictator { i };
        }
    }
    let dep = g.dependent_set();
    if dep.count_ones() == 1 {
        let j = dep.trailing_zeros() as usize;
        if g == &BooleanFunction::dictator(g.arity(), j).unwrap() {
            return CaseLabel::GDictator { j, f: FnSpec::of(f) };
        }
        if g == &BooleanFunction::anti_dictator(g.arity(), j).unwrap() && f.is_odd() {
            return CaseLabel::GAntiDictator { j, f: FnSpec::of(f) };
        }
    }
    if let (Some((j_set, b)), Some((i_set, a))) = (g.as_parity(), f.as_parity()) {
        let cond = xor_pow(a, j_set.count_ones() as i64 - 1)
            == xor_pow(b, i_set.count_ones() as i64 - 1);
        if cond {
            return CaseLabel::PlainXor { i_set, a, j_set, b };
        }
    }
    if let (Some(j_set), Some(i_set)) = (g.as_or_set(), f.as_or_set()) {
        return CaseLabel::PlainOr { i_set, j_set };
    }
    if let (Some(j_set), Some(i_set)) = (g.as_and_set(), f.as_and_set()) {
        return CaseLabel::PlainAnd { i_set, j_set };
    }
    CaseLabel::Unclassified
}

fn match_skew(f0: &BooleanFunction, f1: &BooleanFunction, g: &BooleanFunction) -> CaseLabel {
    if let Some(b) = g.is_constant() {
        return CaseLabel::SkewGConstant { b, f0: FnSpec::of(f0), f1: FnSpec::of(f1) };
    }
    if let (Some(a0), Some(a1)) = (f0.is_constant(), f1.is_constant()) {
        return CaseLabel::SkewConstPair { a0, a1 };
    }
    let dep = g.dependent_set();
    if dep.count_ones() == 1 {
        let j = dep.trailing_zeros() as usize;
        if g == &BooleanFunction::dictator(g.arity(), j).unwrap() {
            return CaseLabel::SkewGDictator { j, f: FnSpec::of(f0) };
        }
        if g == &BooleanFunction::anti_dictator(g.arity(), j).unwrap() {
            return CaseLabel::SkewGAntiDictator { j, f1: FnSpec::of(f1) };
        }
    }
    if let (Some(i0), Some(i1)) = (f0.as_dictator(), f1.as_dictator()) {
        if i0 == i1 {
            return CaseLabel::SkewDictPair { i: i0 };
        }
    }
    if g.is_odd() {
        if let (Some(i0), Some(i1)) = (f0.as_anti_dictator(), f1.as_anti_dictator()) {
            if i0 == i1 {
                return CaseLabel::SkewAntiDictPair { i: i0 };
            }
        }
    }
    if g.is_even() {
        if let (Some(i0), Some(i1)) = (f0.as_dictator(), f1.as_anti_dictator()) {
            if i0 == i1 {
                return CaseLabel::SkewMixedDict { i: i0 };
            }
        }
    }
    if let (Some((j_set, b)), Some((i0, a0)), Some((i1, a1))) =
        (g.as_parity(), f0.as_parity(), f1.as_parity())
    {
        if i0 == i1 {
            let cond = (a0 ^ xor_pow(b, i0.count_ones() as i64 - 1))
                == xor_pow(a1, j_set.count_ones() as i64);
            if cond {
                return CaseLabel::SkewXor { i_set: i0, a0, a1, j_set, b };
            }
        }
    }
    if let (Some(j_set), Some(i0), Some(i1)) = (g.as_or_set(), f0.as_or_set(), f1.as_or_set()) {
        if i0 == i1 {
            return CaseLabel::SkewOr { i_set: i0, j_set };
        }
    }
    if let (Some(j_set), Some(i0), Some(i1)) = (g.as_and_set(), f0.as_and_set(), f1.as_and_set()) {
        if i0 == i1 {
            return CaseLabel::SkewAnd { i_set: i0, j_set };
        }
    }
    // g = ⋁_J ¬x_j pairs OR with AND; g = ⋀_J ¬x_j the other way around.
    if let Some((j_set, flips)) = g.as_or_literals() {
        if flips == j_set {
            if let (Some(i0), Some(i1)) = (f0.as_or_set(), f1.as_and_set()) {
                if i0 == i1 {
                    return CaseLabel::SkewOrAnd { i_set: i0, j_set };
                }
            }
        }
    }
    if let Some((j_set, flips)) = g.as_and_literals() {
        if flips == j_set {
            if let (Some(i0), Some(i1)) = (f0.as_and_set(), f1.as_or_set()) {
                if i0 == i1 {
                    return CaseLabel::SkewAndOr { i_set: i0, j_set };
                }
            }
        }
    }
    CaseLabel::Unclassified
}

fn frees_outside(fs: &[BooleanFunction], covered: u32) -> Vec<(usize, FnSpec)> {
    fs.iter()
        .enumerate()
        .filter(|(j, _)| covered >> j & 1 == 0)
        .map(|(j, f)| (j, FnSpec::of(f)))
        .collect()
}

fn match_multi(f0: &BooleanFunction, fs: &[BooleanFunction], g: &BooleanFunction) -> CaseLabel {
    let m = g.arity() as usize;
    if let Some(b) = g.is_constant() {
        return CaseLabel::MultiGConstant {
            b,
            f0: FnSpec::of(f0),
            frees: frees_outside(fs, 0),
        };
    }
    let dep = g.dependent_set();
    if let Some(b0) = f0.is_constant() {
        // The all-constant column set always certifies; pick the minimal
        // certifying sub-assignment (ordered by size, then mask).
        let mut j_all = 0u32;
        let mut vals = vec![false; m];
        for (j, fj) in fs.iter().enumerate() {
            if let Some(bj) = fj.is_constant() {
                j_all |= 1 << j;
                vals[j] = bj;
            }
        }
        let mut candidates: Vec<u32> = submasks(j_all).collect();
        candidates.sort_by_key(|s| (s.count_ones(), *s));
        for j_set in candidates {
            if j_set == 0 {
                continue;
            }
            if subcube_constant(g, j_set, &vals) == Some(b0) {
                let b = (0..m).filter(|j| j_set >> j & 1 == 1).map(|j| vals[j]).collect();
                return CaseLabel::MultiCertificate {
                    j_set,
                    b,
                    b0,
                    frees: frees_outside(fs, j_set),
                };
            }
        }
        return CaseLabel::Unclassified;
    }
    if dep.count_ones() == 1 {
        let j = dep.trailing_zeros() as usize;
        if g == &BooleanFunction::dictator(g.arity(), j).unwrap() {
            return CaseLabel::MultiGDictator {
                j,
                f: FnSpec::of(f0),
                frees: frees_outside(fs, 1 << j),
            };
        }
        if g == &BooleanFunction::anti_dictator(g.arity(), j).unwrap() {
            return CaseLabel::MultiGAntiDictator {
                j,
                fj: FnSpec::of(&fs[j]),
                frees: frees_outside(fs, 1 << j),
            };
        }
    }
    // Common dictator coordinate with per-column shifts.
    if let Some((i, a0)) = as_signed_dictator(f0) {
        let mut a = Vec::new();
        let mut ok = true;
        let mut flip_mask = 0u32;
        for j in 0..m {
            if dep >> j & 1 == 0 {
                continue;
            }
            match as_signed_dictator(&fs[j]) {
                Some((ij, aj)) if ij == i => {
                    a.push((j, aj));
                    if aj {
                        flip_mask |= 1 << j;
                    }
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && shift_identity_holds(g, flip_mask, a0) {
            return CaseLabel::MultiDictShift { i, a0, a, frees: frees_outside(fs, dep) };
        }
    }
    if let Some((j_set, b)) = g.as_parity() {
        if let Some((i_set, a0)) = f0.as_parity() {
            let mut a = Vec::new();
            let mut ok = true;
            let mut xors = false;
            for j in 0..m {
                if j_set >> j & 1 == 0 {
                    continue;
                }
                match fs[j].as_parity() {
                    Some((ij, aj)) if ij == i_set => {
                        a.push((j, aj));
                        xors ^= aj;
                    }
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            let cond = (a0 ^ xor_pow(b, i_set.count_ones() as i64 - 1)) == xors;
            if ok && cond {
                return CaseLabel::MultiXor { i_set, a0, a, b, frees: frees_outside(fs, j_set) };
            }
        }
    }
    if let Some((j_set, g_flips)) = g.as_or_literals() {
        if let Some(i_set) = f0.as_or_set() {
            if multi_flip_columns_match(fs, j_set, g_flips, i_set, true) {
                let flips = mask_to_pairs(j_set, g_flips);
                return CaseLabel::MultiOrFlips { i_set, flips, frees: frees_outside(fs, j_set) };
            }
        }
    }
    if let Some((j_set, g_flips)) = g.as_and_literals() {
        if let Some(i_set) = f0.as_and_set() {
            if multi_flip_columns_match(fs, j_set, g_flips, i_set, false) {
                let flips = mask_to_pairs(j_set, g_flips);
                return CaseLabel::MultiAndFlips { i_set, flips, frees: frees_outside(fs, j_set) };
            }
        }
    }
    CaseLabel::Unclassified
}

/// `f = x_i ⊕ a` detector.
fn as_signed_dictator(f: &BooleanFunction) -> Option<(usize, bool)> {
    if let Some(i) = f.as_dictator() {
        return Some((i, false));
    }
    f.as_anti_dictator().map(|i| (i, true))
}

fn mask_to_pairs(j_set: u32, flips: u32) -> Vec<(usize, bool)> {
    (0..32)
        .filter(|j| j_set >> j & 1 == 1)
        .map(|j| (j as usize, flips >> j & 1 == 1))
        .collect()
}

fn multi_flip_columns_match(
    fs: &[BooleanFunction],
    j_set: u32,
    g_flips: u32,
    i_set: u32,
    or_side: bool,
) -> bool {
    for (j, fj) in fs.iter().enumerate() {
        if j_set >> j & 1 == 0 {
            continue;
        }
        let flipped = g_flips >> j & 1 == 1;
        let want_or = or_side ^ flipped;
        let got = if want_or { fj.as_or_set() } else { fj.as_and_set() };
        if got != Some(i_set) {
            return false;
        }
    }
    true
}

/// `g(x ⊕ a) = g(x) ⊕ a0` for all x.
fn shift_identity_holds(g: &BooleanFunction, a_mask: u32, a0: bool) -> bool {
    (0..g.table_len() as u32).all(|x| g.eval(x ^ a_mask) == (g.eval(x) ^ a0))
}

/// True when g restricted to the subcube fixing `x_j = vals[j]` for `j` in
/// `j_set` is everywhere the same value; returns that value.
fn subcube_constant(g: &BooleanFunction, j_set: u32, vals: &[bool]) -> Option<bool> {
    let m = g.arity();
    let mut fixed_bits = 0u32;
    for j in 0..m as usize {
        if j_set >> j & 1 == 1 && vals[j] {
            fixed_bits |= 1 << j;
        }
    }
    let mut value = None;
    for x in 0..(1u32 << m) {
        if x & j_set != fixed_bits {
            continue;
        }
        match value {
            None => value = Some(g.eval(x)),
            Some(v) => {
                if g.eval(x) != v {
                    return None;
                }
            }
        }
    }
    value
}

/// Iterates all submasks of `mask`, including 0 and `mask` itself.
fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut cur = 0u32;
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = cur;
        if cur == mask {
            done = true;
        } else {
            cur = (cur.wrapping_sub(mask)) & mask;
        }
        Some(out)
    })
}

// ------------------------------------------------------------------------
// reinstantiate
// ------------------------------------------------------------------------

/// Rebuilds the full function tuple a label describes, in the layout
/// `match_case` takes. `n` is the column-function arity.
pub fn reinstantiate(
    kind: PolymorphKind,
    label: &CaseLabel,
    n: u32,
    g: &BooleanFunction,
) -> Result<Vec<BooleanFunction>> {
    let m = g.arity() as usize;
    let fill = |frees: &[(usize, FnSpec)],
                assigned: Vec<Option<BooleanFunction>>|
     -> Result<Vec<BooleanFunction>> {
        let mut out = assigned;
        for (j, spec) in frees {
            out[*j] = Some(spec.build()?);
        }
        out.into_iter()
            .map(|f| f.ok_or_else(|| Error::Precondition("label misses a column function".into())))
            .collect()
    };
    match (kind, label) {
        (PolymorphKind::Plain, CaseLabel::FConstant { b }) => {
            Ok(vec![BooleanFunction::constant(n, *b)?])
        }
        (PolymorphKind::Plain, CaseLabel::FDictator { i }) => {
            Ok(vec![BooleanFunction::dictator(n, *i)?])
        }
        (PolymorphKind::Plain, CaseLabel::FAntiDictator { i }) => {
            Ok(vec![BooleanFunction::anti_dictator(n, *i)?])
        }
        (PolymorphKind::Plain, CaseLabel::PlainXor { i_set, a, .. }) => {
            Ok(vec![BooleanFunction::parity(n, *i_set, *a)?])
        }
        (PolymorphKind::Plain, CaseLabel::PlainOr { i_set, .. }) => {
            Ok(vec![BooleanFunction::or_set(n, *i_set)?])
        }
        (PolymorphKind::Plain, CaseLabel::PlainAnd { i_set, .. }) => {
            Ok(vec![BooleanFunction::and_set(n, *i_set)?])
        }
        (
            PolymorphKind::Plain,
            CaseLabel::GConstant { f, .. }
            | CaseLabel::GDictator { f, .. }
            | CaseLabel::GAntiDictator { f, .. },
        ) => Ok(vec![f.build()?]),
        (PolymorphKind::Skew, CaseLabel::SkewGConstant { f0, f1, .. }) => {
            Ok(vec![f0.build()?, f1.build()?])
        }
        (PolymorphKind::Skew, CaseLabel::SkewConstPair { a0, a1 }) => Ok(vec![
            BooleanFunction::constant(n, *a0)?,
            BooleanFunction::constant(n, *a1)?,
        ]),
        (PolymorphKind::Skew, CaseLabel::SkewGDictator { f, .. }) => {
            Ok(vec![f.build()?, f.build()?])
        }
        (PolymorphKind::Skew, CaseLabel::SkewGAntiDictator { f1, .. }) => {
            let f1 = f1.build()?;
            Ok(vec![f1.flip_inputs().negate(), f1])
        }
        (PolymorphKind::Skew, CaseLabel::SkewDictPair { i }) => {
            let d = BooleanFunction::dictator(n, *i)?;
            Ok(vec![d.clone(), d])
        }
        (PolymorphKind::Skew, CaseLabel::SkewAntiDictPair { i }) => {
            let d = BooleanFunction::anti_dictator(n, *i)?;
            Ok(vec![d.clone(), d])
        }
        (PolymorphKind::Skew, CaseLabel::SkewMixedDict { i }) => Ok(vec![
            BooleanFunction::dictator(n, *i)?,
            BooleanFunction::anti_dictator(n, *i)?,
        ]),
        (PolymorphKind::Skew, CaseLabel::SkewXor { i_set, a0, a1, .. }) => Ok(vec![
            BooleanFunction::parity(n, *i_set, *a0)?,
            BooleanFunction::parity(n, *i_set, *a1)?,
        ]),
        (PolymorphKind::Skew, CaseLabel::SkewOr { i_set, .. }) => {
            let f = BooleanFunction::or_set(n, *i_set)?;
            Ok(vec![f.clone(), f])
        }
        (PolymorphKind::Skew, CaseLabel::SkewAnd { i_set, .. }) => {
            let f = BooleanFunction::and_set(n, *i_set)?;
            Ok(vec![f.clone(), f])
        }
        (PolymorphKind::Skew, CaseLabel::SkewOrAnd { i_set, .. }) => Ok(vec![
            BooleanFunction::or_set(n, *i_set)?,
            BooleanFunction::and_set(n, *i_set)?,
        ]),
        (PolymorphKind::Skew, CaseLabel::SkewAndOr { i_set, .. }) => Ok(vec![
            BooleanFunction::and_set(n, *i_set)?,
            BooleanFunction::or_set(n, *i_set)?,
        ]),
        (PolymorphKind::Multi, CaseLabel::MultiGConstant { f0, frees, .. }) => {
            let mut out = vec![f0.build()?];
            out.extend(fill(frees, vec![None; m])?);
            Ok(out)
        }
        (PolymorphKind::Multi, CaseLabel::MultiCertificate { j_set, b, b0, frees }) => {
            let mut assigned = vec![None; m];
            let mut it = b.iter();
            for j in 0..m {
                if j_set >> j & 1 == 1 {
                    assigned[j] = Some(BooleanFunction::constant(n, *it.next().unwrap())?);
                }
            }
            let mut out = vec![BooleanFunction::constant(n, *b0)?];
            out.extend(fill(frees, assigned)?);
            Ok(out)
        }
        (PolymorphKind::Multi, CaseLabel::MultiGDictator { j, f, frees }) => {
            let f = f.build()?;
            let mut assigned = vec![None; m];
            assigned[*j] = Some(f.clone());
            let mut out = vec![f];
            out.extend(fill(frees, assigned)?);
            Ok(out)
        }
        (PolymorphKind::Multi, CaseLabel::MultiGAntiDictator { j, fj, frees }) => {
            let fj = fj.build()?;
            let mut assigned = vec![None; m];
            assigned[*j] = Some(fj.clone());
            let mut out = vec![fj.flip_inputs().negate()];
            out.extend(fill(frees, assigned)?);
            Ok(out)
        }
        (PolymorphKind::Multi, CaseLabel::MultiDictShift { i, a0, a, frees }) => {
            let build = |aj: bool| -> Result<BooleanFunction> {
                if aj {
                    BooleanFunction::anti_dictator(n, *i)
                } else {
                    BooleanFunction::dictator(n, *i)
                }
            };
            let mut assigned = vec![None; m];
            for (j, aj) in a {
                assigned[*j] = Some(build(*aj)?);
            }
            let mut out = vec![build(*a0)?];
            out.extend(fill(frees, assigned)?);
            Ok(out)
        }
        (PolymorphKind::Multi, CaseLabel::MultiXor { i_set, a0, a, frees, .. }) => {
            let mut assigned = vec![None; m];
            for (j, aj) in a {
                assigned[*j] = Some(BooleanFunction::parity(n, *i_set, *aj)?);
            }
            let mut out = vec![BooleanFunction::parity(n, *i_set, *a0)?];
            out.extend(fill(frees, assigned)?);
            Ok(out)
        }
        (PolymorphKind::Multi, CaseLabel::MultiOrFlips { i_set, flips, frees }) => {
            let mut assigned = vec![None; m];
            for (j, flip) in flips {
                assigned[*j] = Some(if *flip {
                    BooleanFunction::and_set(n, *i_set)?
                } else {
                    BooleanFunction::or_set(n, *i_set)?
                });
            }
            let mut out = vec![BooleanFunction::or_set(n, *i_set)?];
            out.extend(fill(frees, assigned)?);
            Ok(out)
        }
        (PolymorphKind::Multi, CaseLabel::MultiAndFlips { i_set, flips, frees }) => {
            let mut assigned = vec![None; m];
            for (j, flip) in flips {
                assigned[*j] = Some(if *flip {
                    BooleanFunction::or_set(n, *i_set)?
                } else {
                    BooleanFunction::and_set(n, *i_set)?
                });
            }
            let mut out = vec![BooleanFunction::and_set(n, *i_set)?];
            out.extend(fill(frees, assigned)?);
            Ok(out)
        }
        _ => Err(Error::Precondition(format!(
            "label {} does not belong to kind {kind:?}",
            label.name()
        ))),
    }
}

// ------------------------------------------------------------------------
// enumerate_exact
// ------------------------------------------------------------------------

fn all_functions(n: u32) -> Result<Vec<BooleanFunction>> {
    if (1u32 << n) > 16 {
        return Err(Error::SizeLimit {
            what: format!("enumeration of all functions at arity {n}"),
            limit: 16,
        });
    }
    (0..(1u64 << (1u32 << n)))
        .map(|bits| BooleanFunction::from_bits_u64(n, bits))
        .collect()
}

/// Brute-force oracle: every tuple passing the exactness check, in ascending
/// truth-table order.
pub fn enumerate_exact(
    kind: PolymorphKind,
    g: &BooleanFunction,
    n: u32,
) -> Result<Vec<Solution>> {
    let m = g.arity();
    let mut out = Vec::new();
    match kind {
        PolymorphKind::Plain => {
            for f in all_functions(n)? {
                if compose::is_exact(kind, std::slice::from_ref(&f), g)? {
                    out.push(Solution::Plain(f));
                }
            }
        }
        PolymorphKind::Skew => {
            if n > 3 {
                return Err(Error::SizeLimit {
                    what: format!("skew enumeration at arity {n}"),
                    limit: 3,
                });
            }
            let fs = all_functions(n)?;
            for f0 in &fs {
                for f1 in &fs {
                    if compose::is_exact(kind, &[f0.clone(), f1.clone()], g)? {
                        out.push(Solution::Skew(f0.clone(), f1.clone()));
                    }
                }
            }
        }
        PolymorphKind::Multi => {
            if m > 2 || n > 2 {
                return Err(Error::SizeLimit {
                    what: format!("multi enumeration at m={m}, n={n}"),
                    limit: 2,
                });
            }
            let fs = all_functions(n)?;
            let mut tuple = vec![fs[0].clone(); m as usize + 1];
            enumerate_multi_rec(&fs, g, &mut tuple, 0, &mut out)?;
        }
    }
    Ok(out)
}

fn enumerate_multi_rec(
    fs: &[BooleanFunction],
    g: &BooleanFunction,
    tuple: &mut Vec<BooleanFunction>,
    pos: usize,
    out: &mut Vec<Solution>,
) -> Result<()> {
    if pos == tuple.len() {
        if compose::is_exact(PolymorphKind::Multi, tuple, g)? {
            out.push(Solution::Multi(tuple.clone()));
        }
        return Ok(());
    }
    for f in fs {
        tuple[pos] = f.clone();
        enumerate_multi_rec(fs, g, tuple, pos + 1, out)?;
    }
    Ok(())
}

// ------------------------------------------------------------------------
// generate_family
// ------------------------------------------------------------------------

/// Instantiates every structural case applicable to `g`, verifies each
/// candidate tuple for exactness, and returns the deduplicated set (sorted).
pub fn generate_family(
    kind: PolymorphKind,
    g: &BooleanFunction,
    n: u32,
) -> Result<Vec<Solution>> {
    let m = g.arity();
    if n > 4 || m > 4 {
        return Err(Error::SizeLimit {
            what: format!("template generation at n={n}, m={m}"),
            limit: 4,
        });
    }
    let mut set: BTreeSet<Solution> = BTreeSet::new();
    let mut push = |sol: Solution| -> Result<()> {
        let fns = sol.functions();
        if compose::is_exact(kind, &fns, g)? {
            set.insert(sol);
        }
        Ok(())
    };
    match kind {
        PolymorphKind::Plain => generate_plain(g, n, &mut push)?,
        PolymorphKind::Skew => generate_skew(g, n, &mut push)?,
        PolymorphKind::Multi => generate_multi(g, n, &mut push)?,
    }
    Ok(set.into_iter().collect())
}

fn generate_plain(
    g: &BooleanFunction,
    n: u32,
    push: &mut impl FnMut(Solution) -> Result<()>,
) -> Result<()> {
    let m = g.arity();
    // Trivial families available for every g.
    for b in [false, true] {
        if g.eval(all_point(m, b)) == b {
            push(Solution::Plain(BooleanFunction::constant(n, b)?))?;
        }
    }
    for i in 0..n as usize {
        push(Solution::Plain(BooleanFunction::dictator(n, i)?))?;
        if g.is_odd() {
            push(Solution::Plain(BooleanFunction::anti_dictator(n, i)?))?;
        }
    }
    if let Some(b) = g.is_constant() {
        for f in all_functions(n)? {
            if f.eval(all_point(n, b)) == b {
                push(Solution::Plain(f))?;
            }
        }
    }
    let dep = g.dependent_set();
    if dep.count_ones() == 1 {
        let j = dep.trailing_zeros() as usize;
        if g == &BooleanFunction::dictator(m, j)? {
            for f in all_functions(n)? {
                push(Solution::Plain(f))?;
            }
        } else if g == &BooleanFunction::anti_dictator(m, j)? {
            for f in all_functions(n)? {
                if f.is_odd() {
                    push(Solution::Plain(f))?;
                }
            }
        }
    }
    if let Some((j_set, b)) = g.as_parity() {
        for i_set in 0..(1u32 << n) {
            for a in [false, true] {
                let cond = xor_pow(a, j_set.count_ones() as i64 - 1)
                    == xor_pow(b, i_set.count_ones() as i64 - 1);
                if cond {
                    push(Solution::Plain(BooleanFunction::parity(n, i_set, a)?))?;
                }
            }
        }
    }
    if g.as_or_set().is_some() {
        for i_set in 0..(1u32 << n) {
            push(Solution::Plain(BooleanFunction::or_set(n, i_set)?))?;
        }
    }
    if g.as_and_set().is_some() {
        for i_set in 0..(1u32 << n) {
            push(Solution::Plain(BooleanFunction::and_set(n, i_set)?))?;
        }
    }
    Ok(())
}

fn generate_skew(
    g: &BooleanFunction,
    n: u32,
    push: &mut impl FnMut(Solution) -> Result<()>,
) -> Result<()> {
    let m = g.arity();
    for a1 in [false, true] {
        let a0 = g.eval(all_point(m, a1));
        push(Solution::Skew(
            BooleanFunction::constant(n, a0)?,
            BooleanFunction::constant(n, a1)?,
        ))?;
    }
    for i in 0..n as usize {
        let d = BooleanFunction::dictator(n, i)?;
        let ad = BooleanFunction::anti_dictator(n, i)?;
        push(Solution::Skew(d.clone(), d.clone()))?;
        if g.is_odd() {
            push(Solution::Skew(ad.clone(), ad.clone()))?;
        }
        if g.is_even() {
            push(Solution::Skew(d, ad))?;
        }
    }
    if let Some(b) = g.is_constant() {
        for f0 in all_functions(n)? {
            if f0.eval(all_point(n, b)) != b {
                continue;
            }
            for f1 in all_functions(n)? {
                push(Solution::Skew(f0.clone(), f1))?;
            }
        }
    }
    let dep = g.dependent_set();
    if dep.count_ones() == 1 {
        let j = dep.trailing_zeros() as usize;
        if g == &BooleanFunction::dictator(m, j)? {
            for f in all_functions(n)? {
                push(Solution::Skew(f.clone(), f))?;
            }
        } else if g == &BooleanFunction::anti_dictator(m, j)? {
            for f1 in all_functions(n)? {
                push(Solution::Skew(f1.flip_inputs().negate(), f1))?;
            }
        }
    }
    if let Some((j_set, b)) = g.as_parity() {
        for i_set in 0..(1u32 << n) {
            for a0 in [false, true] {
                for a1 in [false, true] {
                    let cond = (a0 ^ xor_pow(b, i_set.count_ones() as i64 - 1))
                        == xor_pow(a1, j_set.count_ones() as i64);
                    if cond {
                        push(Solution::Skew(
                            BooleanFunction::parity(n, i_set, a0)?,
                            BooleanFunction::parity(n, i_set, a1)?,
                        ))?;
                    }
                }
            }
        }
    }
    if g.as_or_set().is_some() {
        for i_set in 0..(1u32 << n) {
            let f = BooleanFunction::or_set(n, i_set)?;
            push(Solution::Skew(f.clone(), f))?;
        }
    }
    if g.as_and_set().is_some() {
        for i_set in 0..(1u32 << n) {
            let f = BooleanFunction::and_set(n, i_set)?;
            push(Solution::Skew(f.clone(), f))?;
        }
    }
    if let Some((j_set, flips)) = g.as_or_literals() {
        if flips == j_set {
            for i_set in 0..(1u32 << n) {
                push(Solution::Skew(
                    BooleanFunction::or_set(n, i_set)?,
                    BooleanFunction::and_set(n, i_set)?,
                ))?;
            }
        }
    }
    if let Some((j_set, flips)) = g.as_and_literals() {
        if flips == j_set {
            for i_set in 0..(1u32 << n) {
                push(Solution::Skew(
                    BooleanFunction::and_set(n, i_set)?,
                    BooleanFunction::or_set(n, i_set)?,
                ))?;
            }
        }
    }
    Ok(())
}

/// Expands the free (unconstrained) column positions over all functions.
fn expand_frees(
    f0: BooleanFunction,
    assigned: Vec<Option<BooleanFunction>>,
    n: u32,
    push: &mut impl FnMut(Solution) -> Result<()>,
) -> Result<()> {
    let free_positions: Vec<usize> = assigned
        .iter()
        .enumerate()
        .filter(|(_, f)| f.is_none())
        .map(|(j, _)| j)
        .collect();
    let choices = all_functions(n)?;
    let mut tuple: Vec<BooleanFunction> = Vec::with_capacity(assigned.len() + 1);
    tuple.push(f0);
    for f in &assigned {
        tuple.push(f.clone().unwrap_or_else(|| choices[0].clone()));
    }
    expand_frees_rec(&free_positions, &choices, &mut tuple, 0, push)
}

fn expand_frees_rec(
    free_positions: &[usize],
    choices: &[BooleanFunction],
    tuple: &mut Vec<BooleanFunction>,
    k: usize,
    push: &mut impl FnMut(Solution) -> Result<()>,
) -> Result<()> {
    if k == free_positions.len() {
        return push(Solution::Multi(tuple.clone()));
    }
    for f in choices {
        tuple[free_positions[k] + 1] = f.clone();
        expand_frees_rec(free_positions, choices, tuple, k + 1, push)?;
    }
    Ok(())
}

fn generate_multi(
    g: &BooleanFunction,
    n: u32,
    push: &mut impl FnMut(Solution) -> Result<()>,
) -> Result<()> {
    let m = g.arity() as usize;
    if m > 2 || n > 2 {
        return Err(Error::SizeLimit {
            what: format!("multi template generation at m={m}, n={n}"),
            limit: 2,
        });
    }
    if let Some(b) = g.is_constant() {
        for f0 in all_functions(n)? {
            if f0.eval(all_point(n, b)) == b {
                expand_frees(f0, vec![None; m], n, push)?;
            }
        }
        return Ok(());
    }
    let dep = g.dependent_set();
    // Certificate case: every (J, b_J) whose subcube is monochromatic.
    for j_set in 1..(1u32 << m) {
        let positions: Vec<usize> = (0..m).filter(|j| j_set >> j & 1 == 1).collect();
        for combo in 0..(1u32 << positions.len()) {
            let mut vals = vec![false; m];
            for (k, &j) in positions.iter().enumerate() {
                vals[j] = combo >> k & 1 == 1;
            }
            if let Some(b0) = subcube_constant(g, j_set, &vals) {
                let mut assigned: Vec<Option<BooleanFunction>> = vec![None; m];
                for &j in &positions {
                    assigned[j] = Some(BooleanFunction::constant(n, vals[j])?);
                }
                expand_frees(BooleanFunction::constant(n, b0)?, assigned, n, push)?;
            }
        }
    }
    if dep.count_ones() == 1 {
        let j = dep.trailing_zeros() as usize;
        if g == &BooleanFunction::dictator(m as u32, j)? {
            for f in all_functions(n)? {
                let mut assigned = vec![None; m];
                assigned[j] = Some(f.clone());
                expand_frees(f, assigned, n, push)?;
            }
        } else if g == &BooleanFunction::anti_dictator(m as u32, j)? {
            for fj in all_functions(n)? {
                let mut assigned = vec![None; m];
                assigned[j] = Some(fj.clone());
                expand_frees(fj.flip_inputs().negate(), assigned, n, push)?;
            }
        }
    }
    // Common dictator coordinate with shifts satisfying g(x⊕a) = g(x)⊕a0.
    for i in 0..n as usize {
        let dep_positions: Vec<usize> = (0..m).filter(|j| dep >> j & 1 == 1).collect();
        for combo in 0..(1u32 << dep_positions.len()) {
            let mut flip_mask = 0u32;
            for (k, &j) in dep_positions.iter().enumerate() {
                if combo >> k & 1 == 1 {
                    flip_mask |= 1 << j;
                }
            }
            for a0 in [false, true] {
                if !shift_identity_holds(g, flip_mask, a0) {
                    continue;
                }
                let build = |aj: bool| -> Result<BooleanFunction> {
                    if aj {
                        BooleanFunction::anti_dictator(n, i)
                    } else {
                        BooleanFunction::dictator(n, i)
                    }
                };
                let mut assigned = vec![None; m];
                for &j in &dep_positions {
                    assigned[j] = Some(build(flip_mask >> j & 1 == 1)?);
                }
                expand_frees(build(a0)?, assigned, n, push)?;
            }
        }
    }
    if let Some((j_set, b)) = g.as_parity() {
        let positions: Vec<usize> = (0..m).filter(|j| j_set >> j & 1 == 1).collect();
        for i_set in 0..(1u32 << n) {
            for combo in 0..(1u32 << positions.len()) {
                let mut xors = false;
                let mut assigned = vec![None; m];
                for (k, &j) in positions.iter().enumerate() {
                    let aj = combo >> k & 1 == 1;
                    xors ^= aj;
                    assigned[j] = Some(BooleanFunction::parity(n, i_set, aj)?);
                }
                let a0 = xors ^ xor_pow(b, i_set.count_ones() as i64 - 1);
                expand_frees(BooleanFunction::parity(n, i_set, a0)?, assigned, n, push)?;
            }
        }
    }
    if let Some((j_set, g_flips)) = g.as_or_literals() {
        for i_set in 0..(1u32 << n) {
            let mut assigned = vec![None; m];
            for j in 0..m {
                if j_set >> j & 1 == 1 {
                    assigned[j] = Some(if g_flips >> j & 1 == 1 {
                        BooleanFunction::and_set(n, i_set)?
                    } else {
                        BooleanFunction::or_set(n, i_set)?
                    });
                }
            }
            expand_frees(BooleanFunction::or_set(n, i_set)?, assigned, n, push)?;
        }
    }
    if let Some((j_set, g_flips)) = g.as_and_literals() {
        for i_set in 0..(1u32 << n) {
            let mut assigned = vec![None; m];
            for j in 0..m {
                if j_set >> j & 1 == 1 {
                    assigned[j] = Some(if g_flips >> j & 1 == 1 {
                        BooleanFunction::or_set(n, i_set)?
                    } else {
                        BooleanFunction::and_set(n, i_set)?
                    });
                }
            }
            expand_frees(BooleanFunction::and_set(n, i_set)?, assigned, n, push)?;
        }
    }
    Ok(())
}

// ------------------------------------------------------------------------
// fgh matching (f0 ∘ g^n = h ∘ (f1, …, fm))
// ------------------------------------------------------------------------

/// Which structural case of the two-outer-function classification matched.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "fgh_case", rename_all = "kebab-case")]
pub enum FghCase {
    /// (i) `f0` constant and `H = f0`.
    F0Constant { c: bool },
    /// (ii) `g` and `H` constants with `f0(g, …, g) = H`.
    GHConstant { g_value: bool, h_value: bool },
    /// (iii) `g = γ·y_j`, `H = η·y_j`, `f0(γx) = η·f_j(x)`.
    GHDictator { j: usize, gamma: i8, eta: i8 },
    /// (iv) `f_j = φ_j·x_i` for `j ∈ K ∪ {0}` with `φ0·g(y) = H(φ·y)`.
    FDictators { i: usize, phi0: i8, phi: Vec<(usize, i8)> },
    /// (v)(a) parity family: `g = γ·y_K`, `H = η·y_K`, `f_j = φ_j·x_U`.
    ProdXor { k_set: u32, u_set: u32, gamma: i8, eta: i8, phi0: i8, phi: Vec<(usize, i8)> },
    /// (v)(b) literal-product family with signs `κ_j, B_j ∈ {−1,1}`.
    ProdAnd {
        k_set: u32,
        u_set: u32,
        kappa0: i8,
        b0: i8,
        kappa: Vec<(usize, i8)>,
        bees: Vec<(usize, i8)>,
    },
}

/// Fgh label: the matched case plus the complete tuple (for bit-exact
/// re-instantiation; the theorem leaves parts of the tuple unconstrained).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FghParams {
    pub case: FghCase,
    pub f0: FnSpec,
    pub fs: Vec<FnSpec>,
    pub g: FnSpec,
    pub h: FnSpec,
}

/// Sign relating two functions in the pm view: `+1` if equal, `-1` if
/// negations, else `None`.
fn relation_sign(f: &BooleanFunction, g: &BooleanFunction) -> Option<i8> {
    if f == g {
        Some(1)
    } else if *f == g.negate() {
        Some(-1)
    } else {
        None
    }
}

/// Classifies an exact solution of `f0 ∘ g^n = h ∘ (f1, …, fm)`.
pub fn match_fgh_case(
    f0: &BooleanFunction,
    fs: &[BooleanFunction],
    g: &BooleanFunction,
    h: &BooleanFunction,
) -> Result<CaseLabel> {
    if !compose::is_exact_fgh(f0, fs, g, h)? {
        return Err(Error::NotExact);
    }
    let m = g.arity() as usize;
    let case = classify_fgh(f0, fs, g, h, m);
    Ok(match case {
        Some(case) => CaseLabel::Fgh {
            params: FghParams {
                case,
                f0: FnSpec::of(f0),
                fs: fs.iter().map(FnSpec::of).collect(),
                g: FnSpec::of(g),
                h: FnSpec::of(h),
            },
        },
        None => CaseLabel::Unclassified,
    })
}

fn classify_fgh(
    f0: &BooleanFunction,
    fs: &[BooleanFunction],
    g: &BooleanFunction,
    h: &BooleanFunction,
    m: usize,
) -> Option<FghCase> {
    // J: columns with non-constant f_j. H: h with the other columns fixed to
    // the constants' values.
    let mut j_mask = 0u32;
    let mut fixed = crate::boolfn::Restriction::empty();
    for (j, fj) in fs.iter().enumerate() {
        match fj.is_constant() {
            Some(c) => {
                fixed.fixed |= 1 << j;
                if c {
                    fixed.values |= 1 << j;
                }
            }
            None => j_mask |= 1 << j,
        }
    }
    let h_restricted = h.restrict(&fixed).ok()?;
    // (i) f0 constant.
    if let Some(c) = f0.is_constant() {
        return (h_restricted.is_constant() == Some(c)).then_some(FghCase::F0Constant { c });
    }
    // g depends only on J from here on.
    if g.dependent_set() & !j_mask != 0 {
        return None;
    }
    // K: coordinates g and H together depend on (original column indices).
    let j_positions: Vec<usize> = (0..m).filter(|j| j_mask >> j & 1 == 1).collect();
    let mut k_mask_orig = g.dependent_set();
    for (pos, &j) in j_positions.iter().enumerate() {
        if h_restricted.depends_on(pos) {
            k_mask_orig |= 1 << j;
        }
    }
    if k_mask_orig == 0 {
        let g_value = g.is_constant()?;
        let h_value = h_restricted.is_constant()?;
        let point = all_point(f0.arity(), g_value);
        return (f0.eval(point) == h_value).then_some(FghCase::GHConstant { g_value, h_value });
    }
    if k_mask_orig.count_ones() == 1 {
        let j = k_mask_orig.trailing_zeros() as usize;
        let pos = j_positions.iter().position(|&jj| jj == j)?;
        let gamma = relation_sign(g, &BooleanFunction::dictator(g.arity(), j).ok()?)?;
        let eta = relation_sign(
            &h_restricted,
            &BooleanFunction::dictator(h_restricted.arity(), pos).ok()?,
        )?;
        // f0(γ x) = η f_j(x)
        let lhs = if gamma == 1 { f0.clone() } else { f0.flip_inputs() };
        let rhs = if eta == 1 { fs[j].clone() } else { fs[j].negate() };
        return (lhs == rhs).then_some(FghCase::GHDictator { j, gamma, eta });
    }
    // |K| ≥ 2: all of f0 and f_j (j ∈ K) live on a common U.
    let u_set = f0.dependent_set();
    if u_set.count_ones() == 1 {
        let i = u_set.trailing_zeros() as usize;
        let dict = BooleanFunction::dictator(f0.arity(), i).ok()?;
        let phi0 = relation_sign(f0, &dict)?;
        let mut phi = Vec::new();
        let mut flip_bits_h = 0u32;
        for &j in &j_positions {
            if k_mask_orig >> j & 1 == 0 {
                continue;
            }
            let pj = relation_sign(&fs[j], &dict)?;
            phi.push((j, pj));
            if pj == -1 {
                let pos = j_positions.iter().position(|&jj| jj == j).unwrap();
                flip_bits_h |= 1 << pos;
            }
        }
        // φ0·g(y) = H(φ·y): multiplying a pm argument by −1 is flipping the
        // corresponding 0/1 input bit.
        let ok = (0..g.table_len() as u32).all(|w| {
            let lhs_is_minus_one = (g.pm_i8(w) * phi0) == -1;
            let mut v = 0u32;
            for (pos, &j) in j_positions.iter().enumerate() {
                v |= ((w >> j) & 1) << pos;
            }
            let rhs_is_minus_one = h_restricted.eval(v ^ flip_bits_h);
            lhs_is_minus_one == rhs_is_minus_one
        });
        return ok.then_some(FghCase::FDictators { i, phi0, phi });
    }
    // |U| ≥ 2: product forms.
    match product_form_decompose(f0) {
        ProductForm::Parity { negated, s_set } if s_set == u_set => {
            let phi0: i8 = if negated { -1 } else { 1 };
            let (g_set, g_neg) = g.as_parity()?;
            if g_set != k_mask_orig {
                return None;
            }
            let (h_set, h_neg) = h_restricted.as_parity()?;
            let mut k_pos_mask = 0u32;
            for (pos, &j) in j_positions.iter().enumerate() {
                if k_mask_orig >> j & 1 == 1 {
                    k_pos_mask |= 1 << pos;
                }
            }
            if h_set != k_pos_mask {
                return None;
            }
            let gamma: i8 = if g_neg { -1 } else { 1 };
            let eta: i8 = if h_neg { -1 } else { 1 };
            let mut phi = Vec::new();
            let mut prod: i8 = 1;
            for &j in &j_positions {
                if k_mask_orig >> j & 1 == 0 {
                    continue;
                }
                match product_form_decompose(&fs[j]) {
                    ProductForm::Parity { negated, s_set } if s_set == u_set => {
                        let pj: i8 = if negated { -1 } else { 1 };
                        phi.push((j, pj));
                        prod *= pj;
                    }
                    _ => return None,
                }
            }
            let gamma_pow = if u_set.count_ones() % 2 == 1 { gamma } else { 1 };
            (phi0 * gamma_pow == eta * prod).then_some(FghCase::ProdXor {
                k_set: k_mask_orig,
                u_set,
                gamma,
                eta,
                phi0,
                phi,
            })
        }
        ProductForm::SinglePoint { point, value } => {
            // f0 = 2B0 ∏_{i∈U} (1+κ0 x_i)/2 − B0: the special point has every
            // pm coordinate equal to κ0 (a stored 1 bit means −1).
            let kappa0 = uniform_point_sign(point, u_set)?;
            let b0 = value;
            let mut kappa = Vec::new();
            let mut bees = Vec::new();
            for &j in &j_positions {
                if k_mask_orig >> j & 1 == 0 {
                    continue;
                }
                match product_form_decompose(&fs[j]) {
                    ProductForm::SinglePoint { point, value } => {
                        if fs[j].dependent_set() != u_set {
                            return None;
                        }
                        kappa.push((j, uniform_point_sign(point, u_set)?));
                        bees.push((j, value));
                    }
                    _ => return None,
                }
            }
            // g's special point carries the κ_j pattern with value κ0; H's
            // carries the B_j pattern with value B0.
            match product_form_decompose(g) {
                ProductForm::SinglePoint { point, value } if value == kappa0 => {
                    if g.dependent_set() != k_mask_orig {
                        return None;
                    }
                    for &(j, kj) in &kappa {
                        let sign: i8 = if (point >> j) & 1 == 1 { -1 } else { 1 };
                        if sign != kj {
                            return None;
                        }
                    }
                }
                _ => return None,
            }
            match product_form_decompose(&h_restricted) {
                ProductForm::SinglePoint { point, value } if value == b0 => {
                    for &(j, bj) in &bees {
                        let pos = j_positions.iter().position(|&jj| jj == j).unwrap();
                        let sign: i8 = if (point >> pos) & 1 == 1 { -1 } else { 1 };
                        if sign != bj {
                            return None;
                        }
                    }
                }
                _ => return None,
            }
            Some(FghCase::ProdAnd { k_set: k_mask_orig, u_set, kappa0, b0, kappa, bees })
        }
        _ => None,
    }
}

/// If all coordinates of `point` within `mask` agree, the common pm sign.
fn uniform_point_sign(point: u32, mask: u32) -> Option<i8> {
    if point & mask == 0 {
        Some(1)
    } else if point & mask == mask {
        Some(-1)
    } else {
        None
    }
}

// ------------------------------------------------------------------------
// nearest structure distance and stability scan
// ------------------------------------------------------------------------

/// The skew template element nearest to `f` in uniform-measure distance.
#[derive(Clone, Debug, Serialize)]
pub struct NearestStructure {
    /// `Pr_{1/2}[f ≠ f1]` as an exact rational over `2^n`.
    pub epsilon_numerator: u64,
    pub epsilon_denominator: u64,
    pub epsilon: f64,
    /// Paired `μ_p` distance to the witness `f0`.
    pub d0: f64,
    pub witness_f0: FnSpec,
    pub witness_f1: FnSpec,
    pub witness_case: CaseLabel,
}

/// Minimizes `Pr_{1/2}[f ≠ f1]` over the skew template family of `g`.
/// Ties resolve to the first template in the family's deterministic order.
pub fn nearest_structure_distance(
    f: &BooleanFunction,
    g: &BooleanFunction,
    p: f64,
) -> Result<NearestStructure> {
    let templates = generate_family(PolymorphKind::Skew, g, f.arity())?;
    nearest_from_templates(f, g, p, &templates)
}

/// Same, against a precomputed template list (used by scans).
pub fn nearest_from_templates(
    f: &BooleanFunction,
    g: &BooleanFunction,
    p: f64,
    templates: &[Solution],
) -> Result<NearestStructure> {
    let denom = f.table_len() as u64;
    let mut best: Option<(u64, &BooleanFunction, &BooleanFunction)> = None;
    for sol in templates {
        let Solution::Skew(f0, f1) = sol else { continue };
        let d = f.hamming(f1)?;
        if best.map_or(true, |(b, _, _)| d < b) {
            best = Some((d, f0, f1));
        }
    }
    let (num, f0, f1) =
        best.ok_or_else(|| Error::Precondition("skew template family is empty".into()))?;
    let witness_case = match_case(PolymorphKind::Skew, &[f0.clone(), f1.clone()], g)?;
    Ok(NearestStructure {
        epsilon_numerator: num,
        epsilon_denominator: denom,
        epsilon: num as f64 / denom as f64,
        d0: f.distance(f0, p)?,
        witness_f0: FnSpec::of(f0),
        witness_f1: FnSpec::of(f1),
        witness_case,
    })
}

/// One row of the stability scan: agreement deficit δ and nearest-structure
/// distance ε for a single candidate `f`.
#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub f: FnSpec,
    pub delta_numerator: u64,
    pub delta_denominator: u64,
    pub delta: f64,
    pub epsilon: f64,
    pub witness_case: CaseLabel,
}

/// Scans every `f` at arity `n` against `g`: δ_f is the disagreement
/// fraction of the plain composition, ε_f the distance to the nearest skew
/// template. Rows with δ = 0 must show ε = 0.
pub fn stability_scan(g: &BooleanFunction, n: u32) -> Result<Vec<ScanRow>> {
    let m = g.arity();
    if n * m > compose::MAX_EXHAUSTIVE_BITS {
        return Err(Error::SizeLimit {
            what: format!("scan over {} matrix bits", n * m),
            limit: compose::MAX_EXHAUSTIVE_BITS as u64,
        });
    }
    // Default scan bias: the mean of g, falling back to 1/2 for constants.
    let ones = g.count_ones();
    let p = if ones == 0 || ones == g.table_len() as u64 {
        0.5
    } else {
        ones as f64 / g.table_len() as f64
    };
    let templates = generate_family(PolymorphKind::Skew, g, n)?;
    let mut rows = Vec::new();
    for f in all_functions(n)? {
        let fs = vec![f.clone(); m as usize];
        let rep = compose::agreement_exhaustive(&f, &fs, g)?;
        let total = rep.denominator.unwrap();
        let delta_num = total - rep.numerator.unwrap();
        let near = nearest_from_templates(&f, g, p, &templates)?;
        rows.push(ScanRow {
            f: FnSpec::of(&f),
            delta_numerator: delta_num,
            delta_denominator: total,
            delta: delta_num as f64 / total as f64,
            epsilon: near.epsilon,
            witness_case: near.witness_case,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests;
