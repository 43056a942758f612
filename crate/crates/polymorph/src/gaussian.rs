//! The Gaussian analog of the distribution `(g(x), x)` and numerical
//! list-decoding threshold bounds: the arcsin/stability upper bound, the
//! closed-form nested integral for binary AND, and sign-rule Monte-Carlo
//! lower estimates.
//!
//! The analog of a non-constant `g` is the `(m+1)`-variate Gaussian with
//! standard coordinates in which `G_1, …, G_m` are independent and
//! `E[G_0 G_j] = ĝ({j}) / sqrt(1 - ĝ(∅)²)` (±1-view Fourier coefficients at
//! bias 1/2).

use crate::boolfn::{fourier_transform, BooleanFunction, View};
use crate::rng::CounterRng;
use crate::{Error, Result};
use serde::Serialize;

/// Truncation point for Gaussian-weighted integrals; the tail mass beyond it
/// is below 1e-15 per side and is charged to the error bound.
pub const DOMAIN_CUT: f64 = 8.0;

// ---- complementary error function ------------------------------------------------

// The erfc implementation below follows the FreeBSD msun s_erf.c rational
// approximations as adapted in Go's math/erf.go.
//
// ====================================================
// Copyright (C) 1993 by Sun Microsystems, Inc. All rights reserved.
//
// Developed at SunPro, a Sun Microsystems, Inc. business.
// Permission to use, copy, modify, and distribute this
// software is freely granted, provided that this notice
// is preserved.
// ====================================================

const ERX: f64 = 8.450629115104675e-01;
// |x| < 0.84375
const PP0: f64 = 1.28379167095512558561e-01;
const PP1: f64 = -3.25042107247001499370e-01;
const PP2: f64 = -2.84817495755985104766e-02;
const PP3: f64 = -5.77027029648944159157e-03;
const PP4: f64 = -2.37630166566501626084e-05;
const QQ1: f64 = 3.97917223959155352819e-01;
const QQ2: f64 = 6.50222499887672944485e-02;
const QQ3: f64 = 5.08130628187576562776e-03;
const QQ4: f64 = 1.32494738004321644526e-04;
const QQ5: f64 = -3.96022827877536812320e-06;
// 0.84375 <= |x| < 1.25
const PA0: f64 = -2.36211856075265944077e-03;
const PA1: f64 = 4.14856118683748331666e-01;
const PA2: f64 = -3.72207876035701323847e-01;
const PA3: f64 = 3.18346619901161753674e-01;
const PA4: f64 = -1.10894694282396677476e-01;
const PA5: f64 = 3.54783043256182359371e-02;
const PA6: f64 = -2.16637559486879084300e-03;
const QA1: f64 = 1.06420880400844228286e-01;
const QA2: f64 = 5.40397917702171048937e-01;
const QA3: f64 = 7.18286544141962662868e-02;
const QA4: f64 = 1.26171219808761642112e-01;
const QA5: f64 = 1.36370839120290507362e-02;
const QA6: f64 = 1.19844998467991074170e-02;
// 1.25 <= |x| < 1/0.35
const RA0: f64 = -9.86494403484714822705e-03;
const RA1: f64 = -6.93858572707181764372e-01;
const RA2: f64 = -1.05586262253232909814e+01;
const RA3: f64 = -6.23753324503260060396e+01;
const RA4: f64 = -1.62396669462573470355e+02;
const RA5: f64 = -1.84605092906711035994e+02;
const RA6: f64 = -8.12874355063065934246e+01;
const RA7: f64 = -9.81432934416914548592e+00;
const SA1: f64 = 1.96512716674392571292e+01;
const SA2: f64 = 1.37657754143519042600e+02;
const SA3: f64 = 4.34565877475229228821e+02;
const SA4: f64 = 6.45387271733267880336e+02;
const SA5: f64 = 4.29008140027567833386e+02;
const SA6: f64 = 1.08635005541779435134e+02;
const SA7: f64 = 6.57024977031928170135e+00;
const SA8: f64 = -6.04244152148580987438e-02;
// |x| >= 1/0.35
const RB0: f64 = -9.86494292470009928597e-03;
const RB1: f64 = -7.99283237680523006574e-01;
const RB2: f64 = -1.77579549177547519889e+01;
const RB3: f64 = -1.60636384855821916062e+02;
const RB4: f64 = -6.37566443368389627722e+02;
const RB5: f64 = -1.02509513161107724954e+03;
const RB6: f64 = -4.83519191608651397019e+02;
const SB1: f64 = 3.03380607434824582924e+01;
const SB2: f64 = 3.25792512996573918826e+02;
const SB3: f64 = 1.53672958608443695994e+03;
const SB4: f64 = 3.19985821950859553908e+03;
const SB5: f64 = 2.55305040643316442583e+03;
const SB6: f64 = 4.74528541206955367215e+02;
const SB7: f64 = -2.24409524465858183362e+01;

/// Complementary error function to near machine precision.
pub fn erfc(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_infinite() {
        return if x > 0.0 { 0.0 } else { 2.0 };
    }
    let sign = x < 0.0;
    let x = x.abs();
    if x < 0.84375 {
        let temp = if x < 3.725290298461914e-09 {
            x + 0.1283791670955126 * x
        } else {
            let z = x * x;
            let r = PP0 + z * (PP1 + z * (PP2 + z * (PP3 + z * PP4)));
            let s = 1.0 + z * (QQ1 + z * (QQ2 + z * (QQ3 + z * (QQ4 + z * QQ5))));
            let y = r / s;
            if x < 0.25 {
                x + x * y
            } else {
                let r = x * y + (x - 0.5);
                return if sign { 1.0 + (0.5 + r) } else { 0.5 - r };
            }
        };
        return if sign { 1.0 + temp } else { 1.0 - temp };
    }
    if x < 1.25 {
        let s = x - 1.0;
        let p = PA0 + s * (PA1 + s * (PA2 + s * (PA3 + s * (PA4 + s * (PA5 + s * PA6)))));
        let q = 1.0 + s * (QA1 + s * (QA2 + s * (QA3 + s * (QA4 + s * (QA5 + s * QA6)))));
        return if sign { 1.0 + ERX + p / q } else { 1.0 - ERX - p / q };
    }
    if x < 28.0 {
        let s = 1.0 / (x * x);
        let (r, big_s) = if x < 1.0 / 0.35 {
            (
                RA0 + s * (RA1 + s * (RA2 + s * (RA3 + s * (RA4 + s * (RA5 + s * (RA6 + s * RA7)))))),
                1.0 + s
                    * (SA1
                        + s * (SA2
                            + s * (SA3 + s * (SA4 + s * (SA5 + s * (SA6 + s * (SA7 + s * SA8))))))),
            )
        } else {
            if sign && x > 6.0 {
                return 2.0 - TINY;
            }
            (
                RB0 + s * (RB1 + s * (RB2 + s * (RB3 + s * (RB4 + s * (RB5 + s * RB6))))),
                1.0 + s
                    * (SB1 + s * (SB2 + s * (SB3 + s * (SB4 + s * (SB5 + s * (SB6 + s * SB7)))))),
            )
        };
        // Split x into a high part with the low mantissa word cleared.
        let z = f64::from_bits(x.to_bits() & 0xffff_ffff_0000_0000);
        let t = (-z * z - 0.5625).exp() * ((z - x) * (z + x) + r / big_s).exp();
        return if sign { 2.0 - t / x } else { t / x };
    }
    if sign {
        2.0 - TINY
    } else {
        TINY * TINY
    }
}

/// `Φᶜ(t) = Pr[N(0,1) > t]`.
pub fn normal_ccdf(t: f64) -> f64 {
    0.5 * erfc(t / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

// ---- adaptive Gauss-Kronrod quadrature ----------------------------------------------

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (k, &x) in XGK.iter().enumerate().take(7) {
        let lo = f(c - h * x);
        let hi = f(c + h * x);
        kronrod += WGK[k] * (lo + hi);
        if k % 2 == 1 {
            gauss += WG[k / 2] * (lo + hi);
        }
    }
    let value = kronrod * h;
    let err = ((kronrod - gauss) * h).abs();
    (value, err)
}

/// Adaptive bisection on `[a, b]` until the summed error estimate drops
/// below `tol`. `initial` forces a uniform pre-split (panel-doubling checks
/// pass a larger value).
pub fn adaptive_gk(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    initial: usize,
) -> Result<(f64, f64, usize)> {
    const MAX_PANELS: usize = 20_000;
    let initial = initial.max(1);
    let mut segs: Vec<(f64, f64, f64, f64)> = Vec::new();
    let step = (b - a) / initial as f64;
    for k in 0..initial {
        let lo = a + step * k as f64;
        let hi = if k + 1 == initial { b } else { a + step * (k + 1) as f64 };
        let (v, e) = gk15(f, lo, hi);
        segs.push((lo, hi, v, e));
    }
    loop {
        let total_err: f64 = segs.iter().map(|s| s.3).sum();
        if total_err <= tol {
            let value = segs.iter().map(|s| s.2).sum();
            return Ok((value, total_err, segs.len()));
        }
        if segs.len() >= MAX_PANELS {
            return Err(Error::ToleranceNotReached { tol });
        }
        // Split the worst panel.
        let (idx, _) = segs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .3.partial_cmp(&b.1 .3).unwrap())
            .unwrap();
        let (lo, hi, _, _) = segs.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        segs.push((lo, mid, v1, e1));
        segs.push((mid, hi, v2, e2));
    }
}

// ---- Gaussian analog ---------------------------------------------------------------

/// Correlation vector of the Gaussian analog of `g`.
#[derive(Clone, Debug, Serialize)]
pub struct GaussianAnalog {
    pub m: u32,
    /// `ρ_j = ĝ({j}) / sqrt(1 - ĝ(∅)²)`.
    pub rho: Vec<f64>,
    /// `a² = Σ ρ_j² ∈ [0, 1]`; the conditional covariance `I - ρρᵀ` is PSD.
    pub a_squared: f64,
}

pub fn gaussian_analog(g: &BooleanFunction) -> Result<GaussianAnalog> {
    if g.is_constant().is_some() {
        return Err(Error::Precondition("gaussian analog needs a non-constant g".into()));
    }
    let e = fourier_transform(g, View::PmOne, 0.5)?;
    let mean = e.coeff(0);
    let denom = (1.0 - mean * mean).sqrt();
    let rho: Vec<f64> = (0..g.arity() as usize)
        .map(|j| e.coeff(1 << j) / denom)
        .collect();
    let a_squared: f64 = rho.iter().map(|r| r * r).sum();
    if a_squared > 1.0 + 1e-9 {
        return Err(Error::NotPsd);
    }
    Ok(GaussianAnalog { m: g.arity(), rho, a_squared: a_squared.min(1.0) })
}

impl GaussianAnalog {
    /// Draws `(G_1, …, G_m) | G_0 = x`: mean `ρ·x`, covariance `I - ρρᵀ`,
    /// using the symmetric square root `I - cρρᵀ`.
    pub fn conditional_sample(&self, x: f64, rng: &mut CounterRng, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.m as usize);
        rng.fill_normals(out);
        let c = if self.a_squared > 1e-15 {
            (1.0 - (1.0 - self.a_squared).max(0.0).sqrt()) / self.a_squared
        } else {
            0.0
        };
        let dot: f64 = self.rho.iter().zip(out.iter()).map(|(r, z)| r * z).sum();
        for (j, v) in out.iter_mut().enumerate() {
            *v = self.rho[j] * x + (*v - c * dot * self.rho[j]);
        }
    }
}

/// Seeded convenience wrapper around [`GaussianAnalog::conditional_sample`].
pub fn conditional_sampler(analog: &GaussianAnalog, x: f64, seed: u64) -> Vec<f64> {
    let mut rng = CounterRng::new(seed, 0xc0);
    let mut out = vec![0.0; analog.m as usize];
    analog.conditional_sample(x, &mut rng, &mut out);
    out
}

// ---- threshold estimates -------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdKind {
    UpperBorell,
    SAndQuadrature,
    LowerSignMc,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "detail", rename_all = "kebab-case")]
pub enum ThresholdDetails {
    Borell { rho: f64, a_squared: f64 },
    Quadrature { panels: usize, inner_tol: f64, crossing: f64 },
    SignMc { grid: usize, samples: u64, seed: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdEstimate {
    pub value: f64,
    pub kind: ThresholdKind,
    pub error_bound: f64,
    pub details: ThresholdDetails,
}

/// Arcsin/stability upper bound:
/// `1/2 + 1/2·sqrt(Σ_S ĝ(S)² ρ^{|S|})` with `ρ = (2/π)·asin(a²)` and
/// `a² = ‖g^{=1}‖² / ‖g^{≥1}‖²`. Strictly below 1 for admissible g.
pub fn borell_upper_bound(g: &BooleanFunction) -> Result<ThresholdEstimate> {
    if !g.depends_on_all() || g.arity() == 0 {
        let index = (0..g.arity() as usize)
            .find(|&i| !g.depends_on(i))
            .unwrap_or(0);
        return Err(Error::IrrelevantCoordinate { index });
    }
    if g.as_parity().is_some() {
        return Err(Error::Precondition(
            "upper bound excludes ±parity (no non-trivial list-decoding threshold)".into(),
        ));
    }
    let e = fourier_transform(g, View::PmOne, 0.5)?;
    let level1 = e.weight_at_level(1);
    let ge1 = 1.0 - e.coeff(0) * e.coeff(0);
    let a_squared = level1 / ge1;
    let rho = std::f64::consts::FRAC_2_PI * a_squared.asin();
    let value = 0.5 + 0.5 * e.stability(rho).sqrt();
    debug_assert!(value < 1.0);
    Ok(ThresholdEstimate {
        value,
        kind: ThresholdKind::UpperBorell,
        error_bound: 1e-12,
        details: ThresholdDetails::Borell { rho, a_squared },
    })
}

/// Inner integrand of the binary-AND threshold at outer point `x`:
/// `2·E_{y∼N}[Φᶜ(-x-y)·Φᶜ(-x+y)] - 1`, with certified absolute error.
pub fn sand_inner(x: f64, tol: f64) -> Result<(f64, f64)> {
    let mut f = |y: f64| normal_pdf(y) * normal_ccdf(-x - y) * normal_ccdf(-x + y);
    let (v, err, _) = adaptive_gk(&mut f, -DOMAIN_CUT, DOMAIN_CUT, tol / 2.0, 4)?;
    Ok((2.0 * v - 1.0, 2.0 * err))
}

/// Nested adaptive quadrature for the binary-AND threshold
/// `1/2 + 1/2·E_x|inner(x)|`, split at the inner integrand's sign crossing
/// so both outer pieces are smooth. Certified absolute error ≤ `abs_tol`.
pub fn s_and_quadrature(abs_tol: f64) -> Result<ThresholdEstimate> {
    s_and_quadrature_with(abs_tol, 4)
}

/// Same with a forced initial panel count (panel-doubling stability checks).
pub fn s_and_quadrature_with(abs_tol: f64, initial_panels: usize) -> Result<ThresholdEstimate> {
    if abs_tol < 1e-12 {
        return Err(Error::Precondition(format!(
            "tolerance {abs_tol:e} below the supported 1e-12"
        )));
    }
    // Error budget for E = E_x|inner(x)|: the final value halves it.
    let inner_tol = abs_tol / 2.0;
    let outer_tol = abs_tol / 2.0;
    // Locate the sign crossing of the inner integrand by bisection.
    let crossing = {
        let mut lo = 0.0f64;
        let mut hi = 2.0f64;
        // inner(0) = -2/3 < 0 and inner(2) > 0.
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let (v, _) = sand_inner(mid, 1e-13)?;
            if v < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let mut panels = 0usize;
    let eval = |x: f64, sign: f64| -> f64 {
        let (v, _) = sand_inner(x, inner_tol).expect("inner quadrature within budget");
        sign * normal_pdf(x) * v
    };
    let (neg_part, err1, p1) = adaptive_gk(
        &mut |x| eval(x, -1.0),
        -DOMAIN_CUT,
        crossing,
        outer_tol / 2.0,
        initial_panels,
    )?;
    panels += p1;
    let (pos_part, err2, p2) = adaptive_gk(
        &mut |x| eval(x, 1.0),
        crossing,
        DOMAIN_CUT,
        outer_tol / 2.0,
        initial_panels,
    )?;
    panels += p2;
    let tails = 4.0 * normal_ccdf(DOMAIN_CUT);
    let e_abs = neg_part + pos_part;
    let error_bound = 0.5 * (err1 + err2 + inner_tol + tails);
    Ok(ThresholdEstimate {
        value: 0.5 + 0.5 * e_abs,
        kind: ThresholdKind::SAndQuadrature,
        error_bound,
        details: ThresholdDetails::Quadrature { panels, inner_tol, crossing },
    })
}

// ---- Gauss-Hermite grid ----------------------------------------------------------------

/// Nodes and weights for ∫ e^{-t²} h(t) dt (physicists' convention),
/// computed by Newton iteration on the recurrence.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let pim4 = 0.7511255444649425; // π^{-1/4}
    let mut z = 0.0f64;
    for i in 0..(n + 1) / 2 {
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / j as f64).sqrt() * p2 - ((j as f64 - 1.0) / j as f64).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    (nodes, weights)
}

// ---- sign-rule lower estimate --------------------------------------------------------------

/// Evaluates `g` in the pm view at the sign pattern of a Gaussian vector
/// (stored bit 1 ↔ negative coordinate; the tie sgn(0) = +1).
fn g_pm_at_signs(g: &BooleanFunction, gs: &[f64]) -> f64 {
    let mut idx = 0u32;
    for (j, &v) in gs.iter().enumerate() {
        if v < 0.0 {
            idx |= 1 << j;
        }
    }
    g.pm(idx)
}

/// The conditional mean `γ(x) = E[g(sgn(G_1)), …, sgn(G_m)) | G_0 = x]`
/// estimated by seeded conditional Monte Carlo.
pub fn gamma_estimate(
    analog: &GaussianAnalog,
    g: &BooleanFunction,
    x: f64,
    samples: u64,
    seed: u64,
    stream: u64,
) -> f64 {
    let mut rng = CounterRng::new(seed, stream);
    let mut buf = vec![0.0; analog.m as usize];
    let mut acc = 0.0;
    for _ in 0..samples {
        analog.conditional_sample(x, &mut rng, &mut buf);
        acc += g_pm_at_signs(g, &buf);
    }
    acc / samples as f64
}

/// Sign-rule lower estimate of the threshold.
///
/// Unbalanced `g`: `1/2 + 1/2·E_x|γ(x)|` over a Gauss-Hermite grid of
/// `grid` points with `mc_samples` conditional draws per point. Balanced
/// `g`: `1/2 + 1/2·E[sgn(G_0)·g(sgn(G_1), …)]` by plain Monte Carlo.
/// `error_bound` is propagated from per-point standard errors.
pub fn s_sign_lower_estimate(
    g: &BooleanFunction,
    grid: usize,
    mc_samples: u64,
    seed: u64,
) -> Result<ThresholdEstimate> {
    let analog = gaussian_analog(g)?;
    let mean = g.mean(View::PmOne, 0.5);
    if mean.abs() > 1e-12 {
        let (nodes, weights) = gauss_hermite(grid.max(8));
        let wsum: f64 = weights.iter().sum();
        let mut expectation = 0.0;
        let mut var_acc = 0.0;
        for (i, (&t, &w)) in nodes.iter().zip(weights.iter()).enumerate() {
            let x = std::f64::consts::SQRT_2 * t;
            let gamma = gamma_estimate(&analog, g, x, mc_samples, seed, i as u64);
            let wn = w / wsum;
            expectation += wn * gamma.abs();
            let se2 = (1.0 - gamma * gamma).max(0.0) / mc_samples as f64;
            var_acc += wn * wn * se2;
        }
        Ok(ThresholdEstimate {
            value: 0.5 + 0.5 * expectation,
            kind: ThresholdKind::LowerSignMc,
            error_bound: 0.5 * var_acc.sqrt(),
            details: ThresholdDetails::SignMc { grid: nodes.len(), samples: mc_samples, seed },
        })
    } else {
        let mut rng = CounterRng::new(seed, 0xba1a);
        let mut buf = vec![0.0; analog.m as usize];
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for _ in 0..mc_samples {
            let x = rng.next_normal_pair().0;
            analog.conditional_sample(x, &mut rng, &mut buf);
            let q0 = if x < 0.0 { -1.0 } else { 1.0 };
            let v = q0 * g_pm_at_signs(g, &buf);
            acc += v;
            acc2 += v * v;
        }
        let mean_v = acc / mc_samples as f64;
        let var = (acc2 / mc_samples as f64 - mean_v * mean_v).max(0.0);
        Ok(ThresholdEstimate {
            value: 0.5 + 0.5 * mean_v,
            kind: ThresholdKind::LowerSignMc,
            error_bound: 0.5 * (var / mc_samples as f64).sqrt(),
            details: ThresholdDetails::SignMc { grid: 0, samples: mc_samples, seed },
        })
    }
}
