//! Exact multilinear-polynomial arithmetic over dyadic rationals, and the
//! composition identity `f0 ∘ g^n = h ∘ (f1, …, fm)` checked coefficient by
//! coefficient.
//!
//! Fourier coefficients of Boolean functions are dyadic (`k / 2^n`), so
//! integer numerators with power-of-two denominators are exact here.

use crate::boolfn::BooleanFunction;
use crate::{Error, Result};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// A dyadic rational `num / 2^exp`, normalized so `num` is odd or zero.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub struct Dyadic {
    num: i64,
    exp: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, exp: 0 };

    pub fn new(num: i64, exp: u32) -> Self {
        Dyadic { num, exp }.normalize()
    }

    pub fn from_int(v: i64) -> Self {
        Dyadic { num: v, exp: 0 }
    }

    fn normalize(mut self) -> Self {
        if self.num == 0 {
            return Dyadic::ZERO;
        }
        while self.exp > 0 && self.num % 2 == 0 {
            self.num /= 2;
            self.exp -= 1;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / (1u64 << self.exp.min(62)) as f64
    }

    pub fn numerator(&self) -> i64 {
        self.num
    }

    pub fn log2_denominator(&self) -> u32 {
        self.exp
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        let exp = self.exp.max(rhs.exp);
        let a = self.num << (exp - self.exp);
        let b = rhs.num << (exp - rhs.exp);
        Dyadic { num: a + b, exp }.normalize()
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        self + (-rhs)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { num: -self.num, exp: self.exp }
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Dyadic) -> Dyadic {
        let num = self
            .num
            .checked_mul(rhs.num)
            .expect("dyadic numerator overflow");
        Dyadic { num, exp: self.exp + rhs.exp }.normalize()
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/2^{}", self.num, self.exp)
        }
    }
}

/// A multilinear polynomial in `vars` variables with exact dyadic
/// coefficients, dense over subset masks. No variable is ever squared by
/// construction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultilinearPoly {
    vars: u32,
    coeffs: Vec<Dyadic>,
}

impl MultilinearPoly {
    pub fn zero(vars: u32) -> Self {
        MultilinearPoly { vars, coeffs: vec![Dyadic::ZERO; 1 << vars] }
    }

    pub fn constant(vars: u32, c: Dyadic) -> Self {
        let mut p = Self::zero(vars);
        p.coeffs[0] = c;
        p
    }

    pub fn vars(&self) -> u32 {
        self.vars
    }

    pub fn coeff(&self, mask: u32) -> Dyadic {
        self.coeffs[mask as usize]
    }

    pub fn set_coeff(&mut self, mask: u32, c: Dyadic) {
        self.coeffs[mask as usize] = c;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Dyadic::is_zero)
    }

    /// Nonzero terms as `(mask, coefficient)` pairs, ascending by mask.
    pub fn terms(&self) -> Vec<(u32, Dyadic)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| (m as u32, *c))
            .collect()
    }

    /// Exact Fourier expansion of the ±1 view of `f` as a multilinear
    /// polynomial in the ±1 input variables.
    pub fn from_boolean_pm(f: &BooleanFunction) -> Self {
        let n = f.arity();
        // Integer Walsh-Hadamard transform of the ±1 table, then divide by 2^n.
        let mut vals: Vec<i64> = (0..f.table_len() as u32).map(|x| f.pm_i8(x) as i64).collect();
        let mut h = 1usize;
        while h < vals.len() {
            let mut base = 0;
            while base < vals.len() {
                for k in base..base + h {
                    let a = vals[k];
                    let b = vals[k + h];
                    vals[k] = a + b;
                    vals[k + h] = a - b;
                }
                base += 2 * h;
            }
            h *= 2;
        }
        MultilinearPoly {
            vars: n,
            coeffs: vals.into_iter().map(|v| Dyadic::new(v, n)).collect(),
        }
    }

    /// Evaluates at a ±1 point given as a bitmask (bit set ⇔ value −1).
    pub fn eval_pm_point(&self, point: u32) -> Dyadic {
        let mut acc = Dyadic::ZERO;
        for (mask, c) in self.terms() {
            let sign = (mask & point).count_ones() & 1;
            acc = acc + if sign == 0 { c } else { -c };
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.vars, other.vars);
        MultilinearPoly {
            vars: self.vars,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| *a + *b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.vars, other.vars);
        MultilinearPoly {
            vars: self.vars,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| *a - *b)
                .collect(),
        }
    }

    pub fn scale(&self, c: Dyadic) -> Self {
        MultilinearPoly {
            vars: self.vars,
            coeffs: self.coeffs.iter().map(|a| *a * c).collect(),
        }
    }

    /// Product of polynomials over disjoint variable sets (so the result
    /// stays multilinear). Panics if supports overlap.
    pub fn mul_disjoint(&self, other: &Self) -> Self {
        assert_eq!(self.vars, other.vars);
        let mut out = Self::zero(self.vars);
        for (ma, ca) in self.terms() {
            for (mb, cb) in other.terms() {
                assert_eq!(ma & mb, 0, "variable sets must be disjoint");
                let m = (ma | mb) as usize;
                out.coeffs[m] = out.coeffs[m] + ca * cb;
            }
        }
        out
    }

    /// Substitutes: variable `k` of `self` becomes the polynomial `args[k]`.
    /// All `args` must live on the same variable space and pairwise-disjoint
    /// supports per monomial of `self` (rows/columns of a matrix qualify).
    pub fn compose(&self, args: &[MultilinearPoly], out_vars: u32) -> Self {
        let mut acc = Self::zero(out_vars);
        for (mask, c) in self.terms() {
            let mut prod = Self::constant(out_vars, Dyadic::ONE);
            let mut rem = mask;
            while rem != 0 {
                let k = rem.trailing_zeros() as usize;
                rem &= rem - 1;
                prod = prod.mul_disjoint(&args[k]);
            }
            acc = acc.add(&prod.scale(c));
        }
        acc
    }
}

/// Relabels a polynomial on `m` variables into the `n·m`-variable matrix
/// space, sending variable `j` to `z_{row, j}` (bit `row·m + j`).
fn embed_row(g: &MultilinearPoly, row: u32, m: u32, out_vars: u32) -> MultilinearPoly {
    let mut out = MultilinearPoly::zero(out_vars);
    for (mask, c) in g.terms() {
        out.set_coeff(mask << (row * m), c);
    }
    out
}

/// Same for columns: variable `i` goes to `z_{i, col}`.
fn embed_col(f: &MultilinearPoly, col: u32, m: u32, out_vars: u32) -> MultilinearPoly {
    let mut out = MultilinearPoly::zero(out_vars);
    for (mask, c) in f.terms() {
        let mut zmask = 0u32;
        let mut rem = mask;
        while rem != 0 {
            let i = rem.trailing_zeros();
            rem &= rem - 1;
            zmask |= 1 << (i * m + col);
        }
        out.set_coeff(zmask, c);
    }
    out
}

/// Outcome of the composition identity check: both sides expanded in the
/// matrix variables `z_{ij}`, plus their difference.
#[derive(Clone, Debug)]
pub struct ComposeIdentity {
    pub holds: bool,
    pub difference: MultilinearPoly,
}

/// Expands `f0(g(row_1), …, g(row_n))` and `h(f_1(col_1), …, f_m(col_m))` as
/// exact multilinear polynomials in the `n·m` matrix variables and compares
/// them coefficient-wise. Rows and columns use disjoint variables, so both
/// sides stay multilinear.
pub fn poly_compose_identity(
    f0: &MultilinearPoly,
    fs: &[MultilinearPoly],
    g: &MultilinearPoly,
    h: &MultilinearPoly,
) -> Result<ComposeIdentity> {
    let n = f0.vars();
    let m = g.vars();
    if h.vars() != m {
        return Err(Error::DimensionMismatch(format!(
            "h has {} variables, g has {m}",
            h.vars()
        )));
    }
    if fs.len() != m as usize {
        return Err(Error::DimensionMismatch(format!(
            "expected {m} column polynomials, got {}",
            fs.len()
        )));
    }
    for f in fs {
        if f.vars() != n {
            return Err(Error::DimensionMismatch(format!(
                "column polynomial has {} variables, f0 has {n}",
                f.vars()
            )));
        }
    }
    let total = n * m;
    if total > 16 {
        return Err(Error::SizeLimit {
            what: format!("polynomial identity over {total} matrix variables"),
            limit: 16,
        });
    }
    let rows: Vec<MultilinearPoly> = (0..n).map(|i| embed_row(g, i, m, total)).collect();
    let lhs = f0.compose(&rows, total);
    let cols: Vec<MultilinearPoly> = (0..m)
        .map(|j| embed_col(&fs[j as usize], j, m, total))
        .collect();
    let rhs = h.compose(&cols, total);
    let difference = lhs.sub(&rhs);
    Ok(ComposeIdentity { holds: difference.is_zero(), difference })
}

/// Convenience wrapper taking Boolean functions (±1 multilinear extensions).
pub fn poly_compose_identity_boolean(
    f0: &BooleanFunction,
    fs: &[BooleanFunction],
    g: &BooleanFunction,
    h: &BooleanFunction,
) -> Result<ComposeIdentity> {
    let f0p = MultilinearPoly::from_boolean_pm(f0);
    let fsp: Vec<MultilinearPoly> = fs.iter().map(MultilinearPoly::from_boolean_pm).collect();
    let gp = MultilinearPoly::from_boolean_pm(g);
    let hp = MultilinearPoly::from_boolean_pm(h);
    poly_compose_identity(&f0p, &fsp, &gp, &hp)
}

/// Structural form of a ±1-valued function used by the product-form cases.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductForm {
    /// `f = sign · ∏_{i∈S} x_i` in the ±1 view.
    Parity { negated: bool, s_set: u32 },
    /// `f` takes `value` at exactly the input with table index `point` and
    /// `-value` everywhere else (an AND/OR of literals over all coordinates).
    SinglePoint { point: u32, value: i8 },
    NotOfForm,
}

/// Decomposes the ±1 view of `f`. Parities win when both forms apply
/// (possible only at arity ≤ 1).
pub fn product_form_decompose(f: &BooleanFunction) -> ProductForm {
    if let Some((s_set, a)) = f.as_parity() {
        return ProductForm::Parity { negated: a, s_set };
    }
    let ones = f.count_ones();
    let len = f.table_len() as u64;
    if ones == 1 {
        let point = (0..f.table_len() as u32).find(|&x| f.eval(x)).unwrap();
        return ProductForm::SinglePoint { point, value: -1 };
    }
    if ones == len - 1 {
        let point = (0..f.table_len() as u32).find(|&x| !f.eval(x)).unwrap();
        return ProductForm::SinglePoint { point, value: 1 };
    }
    ProductForm::NotOfForm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::BooleanFunction as Bf;

    #[test]
    fn dyadic_arithmetic() {
        let a = Dyadic::new(6, 3); // 3/4
        assert_eq!(a, Dyadic::new(3, 2));
        assert_eq!((a + Dyadic::new(1, 2)).to_f64(), 1.0);
        assert_eq!((a * Dyadic::new(1, 1)).to_f64(), 0.375);
        assert_eq!((a - a), Dyadic::ZERO);
        assert_eq!(format!("{}", Dyadic::new(3, 2)), "3/2^2");
    }

    #[test]
    fn boolean_expansion_is_exact() {
        let maj3 = Bf::majority(3).unwrap();
        let p = MultilinearPoly::from_boolean_pm(&maj3);
        assert_eq!(p.coeff(0b001), Dyadic::new(1, 1));
        assert_eq!(p.coeff(0b111), Dyadic::new(-1, 1));
        assert_eq!(p.coeff(0b011), Dyadic::ZERO);
        // Evaluation at ±1 points reproduces the table.
        for x in 0..8u32 {
            assert_eq!(p.eval_pm_point(x), Dyadic::from_int(maj3.pm_i8(x) as i64));
        }
    }

    #[test]
    fn identity_xor_family_holds() {
        // g = h = y1·y2 and every f = x1·x2 (n = m = 2).
        let prod2 = Bf::parity(2, 0b11, false).unwrap();
        let r = poly_compose_identity_boolean(
            &prod2,
            &[prod2.clone(), prod2.clone()],
            &prod2,
            &prod2,
        )
        .unwrap();
        assert!(r.holds);
    }

    #[test]
    fn identity_and_family_holds() {
        // Boolean AND-family forms with matching constants: g = h = min,
        // f's = min over two coordinates (0/1 OR tables in storage).
        let or2 = Bf::or_set(2, 0b11).unwrap();
        let r = poly_compose_identity_boolean(&or2, &[or2.clone(), or2.clone()], &or2, &or2)
            .unwrap();
        assert!(r.holds);
    }

    #[test]
    fn identity_mismatch_has_nonzero_difference() {
        // f0 reads x1, column functions read x2: sides differ.
        let f0 = Bf::dictator(2, 0).unwrap();
        let f1 = Bf::dictator(2, 1).unwrap();
        let maj3 = Bf::majority(3).unwrap();
        let r = poly_compose_identity_boolean(
            &f0,
            &[f1.clone(), f1.clone(), f1.clone()],
            &maj3,
            &maj3,
        )
        .unwrap();
        assert!(!r.holds);
        assert!(!r.difference.is_zero());
    }

    #[test]
    fn identity_agrees_with_exhaustive_boolean_check() {
        // Over all (f0, f1, f2, g, h) on n=1, m=2 the polynomial identity and
        // the pointwise Boolean check must coincide.
        let fs: Vec<Bf> = (0..4).map(|b| Bf::from_bits_u64(1, b).unwrap()).collect();
        let gs: Vec<Bf> = (0..16).map(|b| Bf::from_bits_u64(2, b).unwrap()).collect();
        let mut checked = 0;
        for f0 in &fs {
            for f1 in &fs {
                for f2 in &fs {
                    for g in &gs {
                        for h in &gs {
                            let cols = [f1.clone(), f2.clone()];
                            let poly =
                                poly_compose_identity_boolean(f0, &cols, g, h).unwrap().holds;
                            let exact =
                                crate::compose::is_exact_fgh(f0, &cols, g, h).unwrap();
                            assert_eq!(poly, exact);
                            checked += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(checked, 16384);
    }

    #[test]
    fn product_form_cases() {
        let prod3 = Bf::parity(3, 0b111, false).unwrap();
        assert_eq!(
            product_form_decompose(&prod3),
            ProductForm::Parity { negated: false, s_set: 0b111 }
        );
        // 0/1 OR's ±1 view is +1 only at the all-zero input.
        let or2 = Bf::or_set(2, 0b11).unwrap();
        assert_eq!(
            product_form_decompose(&or2),
            ProductForm::SinglePoint { point: 0, value: 1 }
        );
        let and2 = Bf::and_set(2, 0b11).unwrap();
        assert_eq!(
            product_form_decompose(&and2),
            ProductForm::SinglePoint { point: 0b11, value: -1 }
        );
        let maj3 = Bf::majority(3).unwrap();
        assert_eq!(product_form_decompose(&maj3), ProductForm::NotOfForm);
    }

    #[test]
    fn product_form_matches_direct_constructions_exhaustively() {
        // For n ≤ 4: Parity/SinglePoint ⇔ f ∈ {±χ_S} ∪ {AND/OR of literals
        // over all coordinates}.
        for n in 1..=4u32 {
            let mut expected = std::collections::BTreeSet::new();
            for s in 0..(1u32 << n) {
                expected.insert(Bf::parity(n, s, false).unwrap());
                expected.insert(Bf::parity(n, s, true).unwrap());
            }
            let full = (1u32 << n) - 1;
            for flips in 0..(1u32 << n) {
                expected.insert(Bf::and_literals(n, full, flips).unwrap());
                expected.insert(Bf::or_literals(n, full, flips).unwrap());
            }
            for t in 0..(1u64 << (1 << n)) {
                let f = Bf::from_bits_u64(n, t).unwrap();
                let form = product_form_decompose(&f);
                let structured = !matches!(form, ProductForm::NotOfForm);
                assert_eq!(structured, expected.contains(&f), "n={n} t={t:#x}");
            }
        }
    }
}
