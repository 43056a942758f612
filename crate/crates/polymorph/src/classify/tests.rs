use super::*;
use crate::boolfn::BooleanFunction as Bf;

fn and2() -> Bf {
    Bf::and_set(2, 0b11).unwrap()
}

fn or2() -> Bf {
    Bf::or_set(2, 0b11).unwrap()
}

fn xor2() -> Bf {
    Bf::parity(2, 0b11, false).unwrap()
}

fn nand2() -> Bf {
    and2().negate()
}

fn nor2() -> Bf {
    or2().negate()
}

fn maj3() -> Bf {
    Bf::majority(3).unwrap()
}

fn set_eq(a: &[Solution], b: &[Solution]) -> bool {
    let sa: BTreeSet<_> = a.iter().cloned().collect();
    let sb: BTreeSet<_> = b.iter().cloned().collect();
    sa == sb
}

/// All functions of arity m that depend on every coordinate.
fn full_support_functions(m: u32) -> Vec<Bf> {
    (0..(1u64 << (1u32 << m)))
        .map(|bits| Bf::from_bits_u64(m, bits).unwrap())
        .filter(|g| g.depends_on_all())
        .collect()
}

#[test]
fn match_case_examples() {
    // f = AND over {0,1}, g = AND2 → and-family.
    let f = Bf::and_set(3, 0b011).unwrap();
    let label = match_case(PolymorphKind::Plain, &[f], &and2()).unwrap();
    assert_eq!(label, CaseLabel::PlainAnd { i_set: 0b011, j_set: 0b11 });
    // Skew (f0, f1) = (OR_I, AND_I) with g = NAND2 → or/and-mixed family.
    let f0 = Bf::or_set(2, 0b11).unwrap();
    let f1 = Bf::and_set(2, 0b11).unwrap();
    let label = match_case(PolymorphKind::Skew, &[f0, f1], &nand2()).unwrap();
    assert_eq!(label, CaseLabel::SkewOrAnd { i_set: 0b11, j_set: 0b11 });
    // Multi f0 = f1 = 0 constant, f2 arbitrary, g = AND2 → certificate with
    // the minimal pinned set {0}.
    let f0 = Bf::constant(2, false).unwrap();
    let f1 = Bf::constant(2, false).unwrap();
    let f2 = Bf::parity(2, 0b01, false).unwrap();
    let label =
        match_case(PolymorphKind::Multi, &[f0, f1, f2.clone()], &and2()).unwrap();
    assert_eq!(
        label,
        CaseLabel::MultiCertificate {
            j_set: 0b01,
            b: vec![false],
            b0: false,
            frees: vec![(1, FnSpec::of(&f2))],
        }
    );
    // Not-a-solution is rejected.
    assert!(matches!(
        match_case(PolymorphKind::Plain, &[maj3()], &and2()),
        Err(Error::NotExact)
    ));
}

#[test]
fn generate_family_examples() {
    // g = Maj3, n = 2: exactly constants, dictators, anti-dictators.
    let fam = generate_family(PolymorphKind::Plain, &maj3(), 2).unwrap();
    let expect: BTreeSet<Solution> = [
        Bf::constant(2, false).unwrap(),
        Bf::constant(2, true).unwrap(),
        Bf::dictator(2, 0).unwrap(),
        Bf::dictator(2, 1).unwrap(),
        Bf::anti_dictator(2, 0).unwrap(),
        Bf::anti_dictator(2, 1).unwrap(),
    ]
    .into_iter()
    .map(Solution::Plain)
    .collect();
    assert_eq!(fam.iter().cloned().collect::<BTreeSet<_>>(), expect);
    // g = AND2, n = 1: {0, 1, x1}.
    let fam = generate_family(PolymorphKind::Plain, &and2(), 1).unwrap();
    assert_eq!(fam.len(), 3);
    // g = XOR2, n = 2: parities with zero shift only (the shift condition
    // forces a = 0 when b = 0 and |J| = 2).
    let fam = generate_family(PolymorphKind::Plain, &xor2(), 2).unwrap();
    let expect: BTreeSet<Solution> = (0..4u32)
        .map(|i_set| Solution::Plain(Bf::parity(2, i_set, false).unwrap()))
        .collect();
    assert_eq!(fam.iter().cloned().collect::<BTreeSet<_>>(), expect);
}

#[test]
fn enumerate_equals_generate_plain_spotchecks() {
    for g in [and2(), or2(), xor2(), nand2(), nor2(), maj3()] {
        for n in 1..=3u32 {
            let e = enumerate_exact(PolymorphKind::Plain, &g, n).unwrap();
            let f = generate_family(PolymorphKind::Plain, &g, n).unwrap();
            assert!(set_eq(&e, &f), "plain mismatch for g={g:?} n={n}");
        }
    }
    // NAND2 admits only dictators as plain polymorphisms.
    let e = enumerate_exact(PolymorphKind::Plain, &nand2(), 2).unwrap();
    let dicts: BTreeSet<Solution> = (0..2)
        .map(|i| Solution::Plain(Bf::dictator(2, i).unwrap()))
        .collect();
    assert_eq!(e.iter().cloned().collect::<BTreeSet<_>>(), dicts);
}

#[test]
fn enumerate_equals_generate_skew_spotchecks() {
    for g in [and2(), nand2(), nor2(), xor2()] {
        for n in 1..=2u32 {
            let e = enumerate_exact(PolymorphKind::Skew, &g, n).unwrap();
            let f = generate_family(PolymorphKind::Skew, &g, n).unwrap();
            assert!(set_eq(&e, &f), "skew mismatch for g={g:?} n={n}");
        }
    }
}

#[test]
fn enumerate_equals_generate_multi_spotchecks() {
    for g in [and2(), xor2(), Bf::dictator(2, 0).unwrap(), Bf::constant(2, true).unwrap()] {
        let e = enumerate_exact(PolymorphKind::Multi, &g, 2).unwrap();
        let f = generate_family(PolymorphKind::Multi, &g, 2).unwrap();
        assert!(set_eq(&e, &f), "multi mismatch for g={g:?}");
    }
}

#[test]
fn every_enumerated_solution_matches_and_reinstantiates() {
    // Plain and skew at n=2 over all full-support g with m ≤ 2, multi over
    // all m=2 g; each label re-generates the tuple bit-exactly (also checked
    // by a debug assertion inside match_case).
    let mut gs: Vec<Bf> = full_support_functions(1);
    gs.extend(full_support_functions(2));
    for g in &gs {
        for sol in enumerate_exact(PolymorphKind::Plain, g, 2).unwrap() {
            let fns = sol.functions();
            let label = match_case(PolymorphKind::Plain, &fns, g).unwrap();
            assert_ne!(label, CaseLabel::Unclassified, "g={g:?} f={fns:?}");
            assert_eq!(reinstantiate(PolymorphKind::Plain, &label, 2, g).unwrap(), fns);
        }
        for sol in enumerate_exact(PolymorphKind::Skew, g, 2).unwrap() {
            let fns = sol.functions();
            let label = match_case(PolymorphKind::Skew, &fns, g).unwrap();
            assert_ne!(label, CaseLabel::Unclassified, "g={g:?} fns={fns:?}");
            assert_eq!(reinstantiate(PolymorphKind::Skew, &label, 2, g).unwrap(), fns);
        }
    }
    for bits in 0..16u64 {
        let g = Bf::from_bits_u64(2, bits).unwrap();
        for sol in enumerate_exact(PolymorphKind::Multi, &g, 1).unwrap() {
            let fns = sol.functions();
            let label = match_case(PolymorphKind::Multi, &fns, &g).unwrap();
            assert_ne!(label, CaseLabel::Unclassified, "g={g:?} fns={fns:?}");
            assert_eq!(reinstantiate(PolymorphKind::Multi, &label, 1, &g).unwrap(), fns);
        }
    }
}

#[test]
fn fgh_match_examples() {
    // (i) f0 constant with H equal: h = OR pinned at a constant-1 column.
    let f0 = Bf::constant(2, true).unwrap();
    let f1 = Bf::constant(2, true).unwrap();
    let f2 = Bf::parity(2, 0b01, false).unwrap();
    let g = and2();
    let h = or2();
    let label = match_fgh_case(&f0, &[f1, f2], &g, &h).unwrap();
    match label {
        CaseLabel::Fgh { params } => {
            assert_eq!(params.case, FghCase::F0Constant { c: true })
        }
        other => panic!("unexpected label {other:?}"),
    }
    // (iii) g = y_0, h = ¬y_0, f0 = ¬f_0(x).
    let g = Bf::dictator(2, 0).unwrap();
    let h = Bf::anti_dictator(2, 0).unwrap();
    let fj = Bf::parity(2, 0b11, false).unwrap();
    let f0 = fj.negate();
    let free = Bf::parity(2, 0b10, true).unwrap();
    let label = match_fgh_case(&f0, &[fj, free], &g, &h).unwrap();
    match label {
        CaseLabel::Fgh { params } => {
            assert_eq!(params.case, FghCase::GHDictator { j: 0, gamma: 1, eta: -1 })
        }
        other => panic!("unexpected label {other:?}"),
    }
    // (v)(a) parity family: g = h = y0·y1, f's = x0·x1.
    let prod = xor2();
    let label = match_fgh_case(&prod, &[prod.clone(), prod.clone()], &prod, &prod).unwrap();
    match label {
        CaseLabel::Fgh { params } => match params.case {
            FghCase::ProdXor { k_set, u_set, gamma, eta, phi0, .. } => {
                assert_eq!((k_set, u_set), (0b11, 0b11));
                assert_eq!((gamma, eta, phi0), (1, 1, 1));
            }
            other => panic!("unexpected case {other:?}"),
        },
        other => panic!("unexpected label {other:?}"),
    }
    // (v)(b) literal-product family: the pm view of the 0/1 OR table is min,
    // which solves with g = h = or2.
    let label = match_fgh_case(&or2(), &[or2(), or2()], &or2(), &or2()).unwrap();
    match label {
        CaseLabel::Fgh { params } => match params.case {
            FghCase::ProdAnd { k_set, u_set, .. } => {
                assert_eq!((k_set, u_set), (0b11, 0b11));
            }
            other => panic!("unexpected case {other:?}"),
        },
        other => panic!("unexpected label {other:?}"),
    }
}

#[test]
fn fgh_exhaustive_n1_m2_never_unclassified() {
    let fs1: Vec<Bf> = (0..4).map(|b| Bf::from_bits_u64(1, b).unwrap()).collect();
    let gs: Vec<Bf> = (0..16).map(|b| Bf::from_bits_u64(2, b).unwrap()).collect();
    let mut solutions = 0u32;
    for f0 in &fs1 {
        for f1 in &fs1 {
            for f2 in &fs1 {
                for g in &gs {
                    for h in &gs {
                        let cols = [f1.clone(), f2.clone()];
                        if !crate::compose::is_exact_fgh(f0, &cols, g, h).unwrap() {
                            continue;
                        }
                        solutions += 1;
                        let label = match_fgh_case(f0, &cols, g, h).unwrap();
                        assert_ne!(
                            label,
                            CaseLabel::Unclassified,
                            "f0={f0:?} f1={f1:?} f2={f2:?} g={g:?} h={h:?}"
                        );
                    }
                }
            }
        }
    }
    assert!(solutions > 0);
}

#[test]
fn fgh_curated_n2_m2_never_unclassified() {
    let named = [
        and2(),
        or2(),
        xor2(),
        nand2(),
        nor2(),
        xor2().negate(),
        Bf::dictator(2, 1).unwrap(),
        Bf::anti_dictator(2, 0).unwrap(),
    ];
    let fs2: Vec<Bf> = (0..16).map(|b| Bf::from_bits_u64(2, b).unwrap()).collect();
    let mut solutions = 0u32;
    for g in &named {
        for h in &named {
            for f0 in &fs2 {
                for f1 in &fs2 {
                    for f2 in &fs2 {
                        let cols = [f1.clone(), f2.clone()];
                        if !crate::compose::is_exact_fgh(f0, &cols, g, h).unwrap() {
                            continue;
                        }
                        solutions += 1;
                        let label = match_fgh_case(f0, &cols, g, h).unwrap();
                        assert_ne!(
                            label,
                            CaseLabel::Unclassified,
                            "f0={f0:?} f1={f1:?} f2={f2:?} g={g:?} h={h:?}"
                        );
                    }
                }
            }
        }
    }
    assert!(solutions > 0);
}

#[test]
fn nearest_structure_examples() {
    // f = AND over I, g = AND2 → distance 0.
    let f = Bf::and_set(3, 0b101).unwrap();
    let near = nearest_structure_distance(&f, &and2(), 0.25).unwrap();
    assert_eq!(near.epsilon_numerator, 0);
    // f = Maj3, g = AND2 → 1/4. Dictators and two-variable ANDs tie at
    // distance 2/8; the deterministic template order selects an AND.
    let near = nearest_structure_distance(&maj3(), &and2(), 0.25).unwrap();
    assert_eq!((near.epsilon_numerator, near.epsilon_denominator), (2, 8));
    let w1 = near.witness_f1.build().unwrap();
    assert_eq!(maj3().hamming(&w1).unwrap(), 2);
    assert!(matches!(
        near.witness_case,
        CaseLabel::SkewAnd { .. } | CaseLabel::SkewDictPair { .. }
    ));
    // f = ¬x0, g = AND2: cross-check the sweep against a direct minimum over
    // the enumerated skew solutions (independent oracle).
    let f = Bf::anti_dictator(3, 0).unwrap();
    let near = nearest_structure_distance(&f, &and2(), 0.25).unwrap();
    let mut oracle = u64::MAX;
    for sol in enumerate_exact(PolymorphKind::Skew, &and2(), 3).unwrap() {
        let Solution::Skew(_, f1) = sol else { continue };
        oracle = oracle.min(f.hamming(&f1).unwrap());
    }
    assert_eq!(near.epsilon_numerator, oracle);
    assert_eq!(oracle, 4); // distance 1/2 at n = 3
}

#[test]
fn stability_scan_maj3_and2_row() {
    let rows = stability_scan(&and2(), 3).unwrap();
    let maj_hex = maj3().to_hex();
    let row = rows.iter().find(|r| r.f.table == maj_hex).unwrap();
    assert_eq!((row.delta_numerator, row.delta_denominator), (6, 64));
    assert!((row.epsilon - 0.25).abs() < 1e-12);
    // Dictator rows are exactly (0, 0).
    let dict_hex = Bf::dictator(3, 0).unwrap().to_hex();
    let row = rows.iter().find(|r| r.f.table == dict_hex).unwrap();
    assert_eq!(row.delta_numerator, 0);
    assert_eq!(row.epsilon, 0.0);
    // δ = 0 forces ε = 0 on every row.
    for r in &rows {
        if r.delta_numerator == 0 {
            assert_eq!(r.epsilon, 0.0, "f={}", r.f.table);
        }
    }
}

#[test]
fn size_limit_errors() {
    assert!(matches!(
        enumerate_exact(PolymorphKind::Plain, &and2(), 5),
        Err(Error::SizeLimit { .. })
    ));
    assert!(matches!(
        enumerate_exact(PolymorphKind::Skew, &and2(), 4),
        Err(Error::SizeLimit { .. })
    ));
    assert!(matches!(
        enumerate_exact(PolymorphKind::Multi, &maj3(), 2),
        Err(Error::SizeLimit { .. })
    ));
    assert!(matches!(
        generate_family(PolymorphKind::Plain, &and2(), 5),
        Err(Error::SizeLimit { .. })
    ));
}

#[test]
fn submask_iteration() {
    let subs: Vec<u32> = submasks(0b101).collect();
    assert_eq!(subs, vec![0b000, 0b001, 0b100, 0b101]);
    let subs: Vec<u32> = submasks(0).collect();
    assert_eq!(subs, vec![0]);
}
