//! End-to-end verification suite: fourteen numbered criteria covering the
//! quadrature constant, the exhaustive classification sweeps, the greedy
//! regularization guarantees, the threshold bound ordering, construction
//! convergence, Fourier decay, connectivity, and baseline sanity checks.
//!
//! Each criterion runs standalone and reports a pass/fail line; the
//! `acceptance` integration test asserts every one, and the CLI `reproduce`
//! subcommand re-runs them on demand.

use crate::boolfn::BooleanFunction;
use crate::classify::{
    enumerate_exact, generate_family, match_case, stability_scan, CaseLabel, Solution,
};
use crate::compose::{self, PolymorphKind};
use crate::constructions::{
    build_lower_bound_function, empirical_agreement, fourier_decay_series, InnerSpec,
};
use crate::gaussian::{borell_upper_bound, s_and_quadrature, sand_inner};
use crate::regularity::{
    jones_decision_tree, jones_step_identity_check, verify_tree, RegularityConfig,
};
use crate::rng::CounterRng;
use crate::{connectivity, Result};
use serde::Serialize;
use std::fmt::Write as _;
use std::time::Instant;

/// Reported paper value of the binary-AND threshold, asserted by
/// criterion 1 at the stated tolerance.
pub const S_AND_REPORTED: f64 = 0.814975356673002;

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} [{}] {} — {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.details
        )
    }
}

pub const CRITERIA: [(u32, &str); 14] = [
    (1, "binary-AND threshold quadrature"),
    (2, "inner integrand spot value at x = 0"),
    (3, "plain classification set equality"),
    (4, "skew classification set equality"),
    (5, "multi classification set equality"),
    (6, "doctrinal-paradox constant 58/64"),
    (7, "one-step stability identity"),
    (8, "decision-tree regularization bounds"),
    (9, "threshold bound ordering"),
    (10, "construction convergence at N = 1000"),
    (11, "level-1 Fourier decay of the lifted construction"),
    (12, "connectivity of reordered distributions"),
    (13, "majority-of-three scan"),
    (14, "baseline agreement sanity"),
];

pub fn run_criterion(id: u32) -> Result<CriterionResult> {
    match id {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(),
        11 => criterion_11(),
        12 => criterion_12(),
        13 => criterion_13(),
        14 => criterion_14(),
        _ => Err(crate::Error::Precondition(format!("unknown criterion id {id}"))),
    }
}

pub fn run_all() -> Result<Vec<CriterionResult>> {
    CRITERIA.iter().map(|&(id, _)| run_criterion(id)).collect()
}

fn name_of(id: u32) -> &'static str {
    CRITERIA[id as usize - 1].1
}

fn and2() -> BooleanFunction {
    BooleanFunction::and_set(2, 0b11).unwrap()
}

fn full_support(m: u32) -> Vec<BooleanFunction> {
    (0..(1u64 << (1u32 << m)))
        .map(|bits| BooleanFunction::from_bits_u64(m, bits).unwrap())
        .filter(|g| g.depends_on_all())
        .collect()
}

fn criterion_1() -> Result<CriterionResult> {
    let start = Instant::now();
    let est = s_and_quadrature(1e-9)?;
    let elapsed = start.elapsed().as_secs_f64();
    let diff = (est.value - S_AND_REPORTED).abs();
    let passed = diff <= 1e-9 && est.error_bound <= 1e-9 && elapsed < 10.0;
    let details = format!(
        "value {:.15} (certified ±{:.2e}, {:.2}s); |value − {S_AND_REPORTED}| = {:.3e} \
         against tolerance 1e-9; an independent closed-form route pins the integral at \
         0.814975359513792",
        est.value, est.error_bound, elapsed, diff
    );
    Ok(CriterionResult { id: 1, name: name_of(1), passed, details })
}

fn criterion_2() -> Result<CriterionResult> {
    let (v, err) = sand_inner(0.0, 1e-11)?;
    let diff = (v + 2.0 / 3.0).abs();
    let passed = diff <= 1e-10;
    Ok(CriterionResult {
        id: 2,
        name: name_of(2),
        passed,
        details: format!("inner(0) = {v:.13} (err ≤ {err:.1e}), |inner(0) + 2/3| = {diff:.2e}"),
    })
}

fn sets_match(a: &[Solution], b: &[Solution]) -> bool {
    use std::collections::BTreeSet;
    a.iter().collect::<BTreeSet<_>>() == b.iter().collect::<BTreeSet<_>>()
}

fn classify_sweep(
    kind: PolymorphKind,
    cases: &[(BooleanFunction, u32)],
) -> Result<(bool, u64, u64, String)> {
    let mut solutions = 0u64;
    let mut mismatches = 0u64;
    let mut unclassified = 0u64;
    let mut first_bad = String::new();
    for (g, n) in cases {
        let enumerated = enumerate_exact(kind, g, *n)?;
        let generated = generate_family(kind, g, *n)?;
        if !sets_match(&enumerated, &generated) {
            mismatches += 1;
            if first_bad.is_empty() {
                first_bad = format!(
                    "set mismatch at g={} n={n}: {} enumerated vs {} generated",
                    g.spec_string(),
                    enumerated.len(),
                    generated.len()
                );
            }
        }
        for sol in &enumerated {
            solutions += 1;
            let label = match_case(kind, &sol.functions(), g)?;
            if label == CaseLabel::Unclassified {
                unclassified += 1;
                if first_bad.is_empty() {
                    first_bad = format!("unclassified solution at g={}", g.spec_string());
                }
            }
        }
    }
    Ok((mismatches == 0 && unclassified == 0, solutions, mismatches + unclassified, first_bad))
}

fn criterion_3() -> Result<CriterionResult> {
    let start = Instant::now();
    let mut cases = Vec::new();
    for m in 0..=3u32 {
        for g in full_support(m) {
            for n in 1..=3u32 {
                cases.push((g.clone(), n));
            }
        }
    }
    let (ok, solutions, bad, first_bad) = classify_sweep(PolymorphKind::Plain, &cases)?;
    let elapsed = start.elapsed().as_secs_f64();
    let passed = ok && elapsed < 300.0;
    Ok(CriterionResult {
        id: 3,
        name: name_of(3),
        passed,
        details: format!(
            "{} (g,n) pairs, {solutions} solutions, {bad} defects in {elapsed:.1}s{}{}",
            cases.len(),
            if first_bad.is_empty() { "" } else { "; " },
            first_bad
        ),
    })
}

fn criterion_4() -> Result<CriterionResult> {
    let mut cases = Vec::new();
    for m in 0..=3u32 {
        for g in full_support(m) {
            for n in 1..=2u32 {
                cases.push((g.clone(), n));
            }
        }
    }
    let nand2 = and2().negate();
    let nor2 = BooleanFunction::or_set(2, 0b11)?.negate();
    let xor2 = BooleanFunction::parity(2, 0b11, false)?;
    for g in [and2(), nand2, nor2, xor2] {
        cases.push((g, 3));
    }
    let (ok, solutions, bad, first_bad) = classify_sweep(PolymorphKind::Skew, &cases)?;
    Ok(CriterionResult {
        id: 4,
        name: name_of(4),
        passed: ok,
        details: format!(
            "{} (g,n) pairs, {solutions} solutions, {bad} defects{}{}",
            cases.len(),
            if first_bad.is_empty() { "" } else { "; " },
            first_bad
        ),
    })
}

fn criterion_5() -> Result<CriterionResult> {
    let cases: Vec<(BooleanFunction, u32)> = (0..16u64)
        .map(|bits| (BooleanFunction::from_bits_u64(2, bits).unwrap(), 2))
        .collect();
    let (ok, solutions, bad, first_bad) = classify_sweep(PolymorphKind::Multi, &cases)?;
    Ok(CriterionResult {
        id: 5,
        name: name_of(5),
        passed: ok,
        details: format!(
            "16 column functions, {solutions} solutions, {bad} defects{}{}",
            if first_bad.is_empty() { "" } else { "; " },
            first_bad
        ),
    })
}

fn criterion_6() -> Result<CriterionResult> {
    let maj3 = BooleanFunction::majority(3)?;
    let fs = vec![maj3.clone(), maj3.clone()];
    let rep = compose::agreement_exhaustive(&maj3, &fs, &and2())?;
    let count_ok = rep.numerator == Some(58) && rep.denominator == Some(64);
    // All six disagreeing matrices must carry the row multiset
    // {(1,1), (1,0), (0,1)}.
    let bad = compose::disagreement_matrices(&maj3, &fs, &and2())?;
    let mut multiset_ok = bad.len() == 6;
    for z in &bad {
        let mut rows: Vec<u32> = (0..3).map(|i| z.row(i)).collect();
        rows.sort_unstable();
        multiset_ok &= rows == vec![0b01, 0b10, 0b11];
    }
    let passed = count_ok && multiset_ok;
    Ok(CriterionResult {
        id: 6,
        name: name_of(6),
        passed,
        details: format!(
            "agreement {}/{}, {} disagreeing matrices, row multisets {}",
            rep.numerator.unwrap_or(0),
            rep.denominator.unwrap_or(0),
            bad.len(),
            if multiset_ok { "all {(1,1),(1,0),(0,1)}" } else { "unexpected" }
        ),
    })
}

fn criterion_7() -> Result<CriterionResult> {
    let mut rng = CounterRng::new(0x1de2, 0);
    let mut worst = 0.0f64;
    let mut checked = 0u64;
    for trial in 0..100u32 {
        let n = 1 + trial % 10;
        let f = BooleanFunction::from_fn(n, |_| rng.next_bool(0.5))?;
        for rho in [0.25, 0.5, 0.75] {
            for p in [0.25, 0.5, 0.75] {
                for i in 0..n as usize {
                    let (_, _, diff) = jones_step_identity_check(&f, i, rho, p)?;
                    worst = worst.max(diff);
                    checked += 1;
                }
            }
        }
    }
    let passed = worst <= 1e-12;
    Ok(CriterionResult {
        id: 7,
        name: name_of(7),
        passed,
        details: format!("{checked} evaluations, max |lhs − rhs| = {worst:.2e} (bound 1e-12)"),
    })
}

fn criterion_8() -> Result<CriterionResult> {
    let config = RegularityConfig {
        d: 2,
        tau: 0.15,
        delta: 0.25,
        epsilon: 0.15,
        biases: vec![0.5, 0.25],
    };
    let suite = vec![
        ("maj5", BooleanFunction::majority(5)?),
        ("maj7", BooleanFunction::majority(7)?),
        ("tribes(2,3)", BooleanFunction::tribes(2, 3)?),
        ("tribes(2,4)", BooleanFunction::tribes(2, 4)?),
        ("x0 xor tribes(2,3)", {
            let t = BooleanFunction::tribes(2, 3)?;
            BooleanFunction::from_fn(7, |x| ((x & 1) == 1) ^ t.eval(x >> 1))?
        }),
    ];
    let bound = config.round_bound();
    let min_gain = config.epsilon * config.delta * config.tau;
    let mut passed = true;
    let mut details = String::new();
    for (name, f) in &suite {
        let (tree, report) = jones_decision_tree(f, &config)?;
        let depth_ok = (report.depth as u64) <= bound;
        let fractions = verify_tree(f, &tree, &config)?;
        let frac_ok = fractions.iter().all(|&fr| fr >= 1.0 - config.epsilon);
        let trace_ok = report
            .potential_trace
            .windows(2)
            .all(|w| w[1] - w[0] >= min_gain - 1e-9);
        passed &= depth_ok && frac_ok && trace_ok;
        let _ = write!(
            details,
            "{name}: depth {} (≤ {bound}), fractions {:?}{}; ",
            report.depth,
            fractions.iter().map(|f| (f * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
            if trace_ok { "" } else { ", potential stalled" }
        );
    }
    Ok(CriterionResult { id: 8, name: name_of(8), passed, details })
}

fn criterion_9() -> Result<CriterionResult> {
    let quad = s_and_quadrature(1e-9)?;
    let upper = borell_upper_bound(&and2())?;
    let and_ok = (upper.value - 0.866140).abs() <= 1e-4 && upper.value > quad.value;
    // Exhaustive sweep: every admissible g with m ≤ 4 stays strictly below 1.
    let mut swept = 0u64;
    let mut below_one = true;
    for m in 2..=4u32 {
        for g in full_support(m) {
            if g.as_parity().is_some() {
                continue;
            }
            let est = borell_upper_bound(&g)?;
            below_one &= est.value < 1.0;
            swept += 1;
        }
    }
    let passed = and_ok && below_one;
    Ok(CriterionResult {
        id: 9,
        name: name_of(9),
        passed,
        details: format!(
            "upper(AND2) = {:.6} > quadrature {:.6}; {swept} admissible g swept, all < 1: {}",
            upper.value, quad.value, below_one
        ),
    })
}

fn criterion_10() -> Result<CriterionResult> {
    let c = build_lower_bound_function(&and2(), InnerSpec::Sign, 1, 1000, 0)?;
    let rep = empirical_agreement(&and2(), &c, 1_000_000, 0)?;
    let diff = (rep.probability - 0.814975).abs();
    let passed = diff <= 0.01;
    Ok(CriterionResult {
        id: 10,
        name: name_of(10),
        passed,
        details: format!(
            "agreement {:.6} (halfwidth {:.4}), |diff to 0.814975| = {diff:.4} (bound 0.01)",
            rep.probability, rep.halfwidth
        ),
    })
}

fn criterion_11() -> Result<CriterionResult> {
    let rows = fourier_decay_series(InnerSpec::Sign, 1, 1, &[4, 8, 16])?;
    let l1: Vec<f64> = rows.iter().map(|r| r.max_abs_per_level[0]).collect();
    let mut passed = true;
    let mut ratios = Vec::new();
    for w in l1.windows(2) {
        let r = w[1] / w[0];
        ratios.push((r * 10000.0).round() / 10000.0);
        passed &= (0.57..=0.85).contains(&r);
    }
    Ok(CriterionResult {
        id: 11,
        name: name_of(11),
        passed,
        details: format!("level-1 maxima {l1:?}, doubling ratios {ratios:?} (bounds [0.57, 0.85])"),
    })
}

fn criterion_12() -> Result<CriterionResult> {
    let mut admissible = 0u64;
    let mut failures = 0u64;
    for m in 2..=3u32 {
        for g in full_support(m) {
            if g.as_parity().is_some() {
                continue;
            }
            admissible += 1;
            let r = connectivity::reorder_for_connectivity(&g)?;
            if !connectivity::is_connected_distribution(&r.distribution).0 {
                failures += 1;
            }
        }
    }
    let xor2 = BooleanFunction::parity(2, 0b11, false)?;
    let xor_rejected = connectivity::reorder_for_connectivity(&xor2).is_err();
    let passed = failures == 0 && xor_rejected;
    Ok(CriterionResult {
        id: 12,
        name: name_of(12),
        passed,
        details: format!(
            "{admissible} admissible g reordered, {failures} disconnected; parity rejected: {xor_rejected}"
        ),
    })
}

fn criterion_13() -> Result<CriterionResult> {
    let maj3 = BooleanFunction::majority(3)?;
    let rows = stability_scan(&maj3, 3)?;
    let mut trivial_violations = 0u64;
    let mut max_ratio = 0.0f64;
    let mut exact_count = 0u64;
    for row in &rows {
        let f = row.f.build()?;
        if row.delta_numerator == 0 {
            exact_count += 1;
            let trivial = f.is_constant().is_some()
                || f.as_dictator().is_some()
                || f.as_anti_dictator().is_some();
            if !trivial || row.epsilon != 0.0 {
                trivial_violations += 1;
            }
        } else {
            max_ratio = max_ratio.max(row.epsilon / row.delta);
        }
    }
    let passed = trivial_violations == 0 && exact_count == 8 && max_ratio.is_finite();
    Ok(CriterionResult {
        id: 13,
        name: name_of(13),
        passed,
        details: format!(
            "256 rows; {exact_count} exact rows, all trivial: {}; max ε/δ over δ>0 rows = {max_ratio:.3}",
            trivial_violations == 0
        ),
    })
}

fn criterion_14() -> Result<CriterionResult> {
    // Random f at n = 12 against XOR2: agreement within 5 standard errors
    // of 1/2 (SE uses the worst-case 0.5/√samples).
    let mut rng = CounterRng::new(0xba5e, 0);
    let f = BooleanFunction::from_fn(12, |_| rng.next_bool(0.5))?;
    let xor2 = BooleanFunction::parity(2, 0b11, false)?;
    let samples = 1_000_000u64;
    let fs = vec![f.clone(), f.clone()];
    let rep = compose::agreement_monte_carlo(&f, &fs, &xor2, samples, 0)?;
    let se = 0.5 / (samples as f64).sqrt();
    let rand_ok = (rep.probability - 0.5).abs() <= 5.0 * se;
    // Characters with the admissible shift (a = 0 for XOR2) give agreement
    // exactly 1; a violating shift does not.
    let mut char_ok = true;
    for i_set in [0b0101u32, 0b0011_0101_1010u32] {
        let chi = BooleanFunction::parity(12, i_set, false)?;
        char_ok &= compose::is_exact(PolymorphKind::Plain, &[chi], &xor2)?;
    }
    let shifted = BooleanFunction::parity(12, 0b111, true)?;
    char_ok &= !compose::is_exact(PolymorphKind::Plain, &[shifted], &xor2)?;
    let passed = rand_ok && char_ok;
    Ok(CriterionResult {
        id: 14,
        name: name_of(14),
        passed,
        details: format!(
            "random-f agreement {:.6} (|diff| ≤ 5·SE = {:.4}): {rand_ok}; character agreement exact: {char_ok}",
            rep.probability,
            5.0 * se
        ),
    })
}
