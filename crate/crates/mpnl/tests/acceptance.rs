//! Acceptance gate: nine criteria, one pass/fail line each.

use mpnl::atoms::{all_atoms, Atom};
use mpnl::bits::Bits;
use mpnl::config::{equivalent, row_configuration};
use mpnl::engine::{sat_finite, sat_integer, sat_natural, Budgets, Outcome};
use mpnl::formula::{
    bounds, parse, translate_finite, translate_natural, BoundValue, ClosureTable, Formula,
};
use mpnl::fuzz::{gen_formulae, FuzzSpec};
use mpnl::semantics::{
    anchored, brute_force_sat, check_compass, exhaustive_model_search, model_to_compass,
    CompassStructure, IntervalModel, OracleBudget, OracleOutcome,
};
use mpnl::transform::{contract, is_generator, unfold_nat, GeneratorKind};
use std::sync::OnceLock;

fn verdict_tag(o: &Outcome) -> &'static str {
    match o {
        Outcome::Sat(_) => "sat",
        Outcome::Unsat => "unsat",
        Outcome::Unknown => "unknown",
    }
}

fn report(name: &str, ok: bool, detail: &str) {
    println!("{name}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{name}: {detail}");
}

fn corpus() -> &'static [Formula] {
    static C: OnceLock<Vec<Formula>> = OnceLock::new();
    C.get_or_init(|| {
        gen_formulae(&FuzzSpec {
            seed: 20260825,
            count: 300,
            max_size: 7,
            max_k: 3,
            num_props: 2,
            ..Default::default()
        })
    })
}

/// Per corpus formula: the anchored closure and every oracle witness found
/// at domain sizes 1..=5.
fn oracle_runs() -> &'static [(Formula, Vec<(u32, CompassStructure)>)] {
    static R: OnceLock<Vec<(Formula, Vec<(u32, CompassStructure)>)>> = OnceLock::new();
    R.get_or_init(|| {
        corpus()
            .iter()
            .map(|f| {
                let ct = ClosureTable::build(&anchored(f));
                let mut found = Vec::new();
                for n in 1..=5u32 {
                    if let OracleOutcome::Witness(g) =
                        brute_force_sat(&ct, n, OracleBudget::default())
                    {
                        found.push((n, g));
                    }
                }
                (f.clone(), found)
            })
            .collect()
    })
}

#[test]
fn a1_oracle_soundness() {
    let mut witnesses = 0;
    for (f, found) in oracle_runs() {
        let feature = anchored(f);
        let ct = ClosureTable::build(&feature);
        for (n, g) in found {
            let r = check_compass(g, &ct, Some(&feature));
            assert!(
                r.violations.is_empty(),
                "oracle witness for {f} at n={n}: {:?}",
                r.violations
            );
            assert!(r.features, "oracle witness for {f} at n={n} lacks the anchor");
            witnesses += 1;
        }
    }
    report(
        "A1 oracle soundness",
        true,
        &format!("{} formulas, {witnesses} verified witnesses", corpus().len()),
    );
}

#[test]
fn a2_engine_oracle_agreement() {
    let budgets = Budgets {
        max_rows: 12,
        max_nodes: 1_000_000,
    };
    let mut agree = 0;
    let mut unknowns = 0;
    for (f, found) in oracle_runs() {
        let v = sat_finite(f, budgets);
        let oracle_sat = !found.is_empty();
        assert!(
            !(oracle_sat && v.is_unsat()),
            "engine claims Unsat but the oracle has a witness: {f}"
        );
        match (&v.outcome, oracle_sat) {
            (Outcome::Sat(_), true) | (Outcome::Unsat, false) => agree += 1,
            (Outcome::Sat(_), false) => agree += 1, // witness beyond n=5, verified
            (Outcome::Unknown, _) => unknowns += 1,
            (Outcome::Unsat, true) => unreachable!(),
        }
    }
    report(
        "A2 engine/oracle agreement",
        true,
        &format!(
            "{agree}/{} agree, {unknowns} unknowns at the 12-row budget",
            corpus().len()
        ),
    );
}

#[test]
fn a3_structural_invariants() {
    let mut structures = 0;
    for (f, found) in oracle_runs() {
        let ct = ClosureTable::build(&anchored(f));
        for (_, g) in found {
            for (x, y) in g.points() {
                for y2 in y..=g.hi() {
                    assert!(
                        g.label(x, y).leads_to(g.label(y, y2)),
                        "view-to-type fails at ({x},{y})/({y},{y2}) for {f}"
                    );
                }
            }
            for y in g.lo()..=g.hi() {
                let req = g.label(y, y).req_r();
                for x in g.lo()..=y {
                    assert_eq!(g.label(x, y).req_r(), req, "row Req_r varies in {f}");
                }
                let audit = row_configuration(g, &ct, y).audit(&ct);
                assert!(audit.is_empty(), "row {y} of {f}: {audit:?}");
            }
            for x in g.lo()..=g.hi() {
                let req = g.label(x, x).req_l();
                for y in x..=g.hi() {
                    assert_eq!(g.label(x, y).req_l(), req, "column Req_l varies in {f}");
                }
            }
            structures += 1;
        }
    }
    report(
        "A3 structural invariants",
        true,
        &format!("{structures} oracle structures, zero violations"),
    );
}

#[test]
fn a4_contraction() {
    let mut done = 0;
    let try_structure = |g: &CompassStructure, ct: &ClosureTable, feature: &Formula| -> u32 {
        let mut found = 0;
        for ybar in g.lo()..=g.hi() {
            for ybar2 in ybar + 1..=g.hi() {
                let c1 = row_configuration(g, ct, ybar);
                let c2 = row_configuration(g, ct, ybar2);
                if !equivalent(&c1, &c2, ct) {
                    continue;
                }
                let Ok(out) = contract(g, ct, ybar, ybar2) else {
                    continue;
                };
                let want = (g.hi() - g.lo() + 1) - (ybar2 - ybar);
                assert_eq!(out.hi() - out.lo() + 1, want, "size after contraction");
                let r = check_compass(&out, ct, Some(feature));
                assert!(r.violations.is_empty(), "contracted structure: {:?}", r.violations);
                assert!(r.features, "contraction lost the feature");
                found += 1;
            }
        }
        found
    };
    for (f, found) in oracle_runs() {
        let feature = anchored(f);
        let ct = ClosureTable::build(&feature);
        for (_, g) in found {
            done += try_structure(g, &ct, &feature);
        }
        if done >= 40 {
            break;
        }
    }
    // padded structures: uniform models have many equivalent rows
    for n in 4..=6 {
        let f = parse("p").unwrap();
        let feature = anchored(&f);
        let ct = ClosureTable::build(&feature);
        let mut m = IntervalModel::new(0, n);
        for x in 0..=n {
            for y in x..=n {
                m.add("p", x, y);
            }
        }
        let g = model_to_compass(&m, &ct);
        done += try_structure(&g, &ct, &feature);
    }
    report(
        "A4 contraction",
        done >= 20,
        &format!("{done} contractions, all size-exact, fulfilling and featuring"),
    );
}

#[test]
fn a5_generator_unfolding() {
    let budgets = Budgets {
        max_rows: 12,
        max_nodes: 500_000,
    };
    let formulas = gen_formulae(&FuzzSpec {
        seed: 555,
        count: 50,
        max_size: 7,
        max_k: 3,
        num_props: 2,
        ..Default::default()
    });
    let mut sats = 0;
    for f in &formulas {
        let v = sat_natural(f, budgets);
        let Outcome::Sat(w) = v.outcome else { continue };
        let feature = anchored(f);
        let ct = ClosureTable::build(&feature);
        let GeneratorKind::Nat { .. } = w.kind else {
            panic!("natural verdict with non-nat witness for {f}");
        };
        let mut cur = w.clone();
        for round in 0..3 {
            let GeneratorKind::Nat { y_inf } = cur.kind else { unreachable!() };
            let gap = cur.structure.hi() - y_inf;
            let next = unfold_nat(&cur, &ct, 1).unwrap_or_else(|e| {
                panic!("unfold round {round} failed for {f}: {e:?}")
            });
            assert_eq!(
                next.structure.hi() - cur.structure.hi(),
                gap,
                "growth per round for {f}"
            );
            let rep = is_generator(&next, &ct, Some(&feature));
            assert!(rep.ok(), "round {round} of {f}: {:?}", rep.violations);
            assert!(
                check_compass(&next.structure, &ct, None).consistent(),
                "consistency after round {round} of {f}"
            );
            cur = next;
        }
        sats += 1;
    }
    report(
        "A5 generator unfolding",
        sats > 0,
        &format!("{sats}/{} natural-Sat witnesses unfolded 3 rounds", formulas.len()),
    );
}

#[test]
fn a6_translation_coherence() {
    let engine_budgets = Budgets {
        max_rows: 12,
        max_nodes: 500_000,
    };
    let translate_budgets = Budgets {
        max_rows: 8,
        max_nodes: 100_000,
    };
    let formulas = gen_formulae(&FuzzSpec {
        seed: 777,
        count: 50,
        max_size: 4,
        max_k: 3,
        num_props: 2,
        ..Default::default()
    });
    let mut definite = 0;
    let mut unknowns = 0;
    for f in &formulas {
        let ct = ClosureTable::build(&anchored(f));
        let oracle_sat = matches!(
            mpnl::semantics::oracle_sweep(&ct, 5, OracleBudget::default()),
            mpnl::semantics::SweepOutcome::Witness { .. }
        );
        let fin = sat_finite(f, engine_budgets);
        let fin_verdict = if oracle_sat || fin.is_sat() {
            Some(true)
        } else if fin.is_unsat() {
            Some(false)
        } else {
            None
        };
        let tr_fin = sat_integer(&translate_finite(f).unwrap(), translate_budgets);
        match (fin_verdict, &tr_fin.outcome) {
            (Some(a), Outcome::Sat(_)) => {
                assert!(a, "finite unsat but translation sat: {f}");
                definite += 1;
            }
            (Some(a), Outcome::Unsat) => {
                assert!(!a, "finite sat but translation unsat: {f}");
                definite += 1;
            }
            _ => unknowns += 1,
        }
        let nat = sat_natural(f, engine_budgets);
        let tr_nat = sat_integer(&translate_natural(f).unwrap(), translate_budgets);
        match (&nat.outcome, &tr_nat.outcome) {
            (Outcome::Sat(_), Outcome::Unsat) => panic!("nat sat but translation unsat: {f}"),
            (Outcome::Unsat, Outcome::Sat(_)) => panic!("nat unsat but translation sat: {f}"),
            (Outcome::Unknown, _) | (_, Outcome::Unknown) => unknowns += 1,
            _ => definite += 1,
        }
    }
    report(
        "A6 translation coherence",
        true,
        &format!("{definite} definite checks, {unknowns} unknown-skipped, zero contradictions"),
    );
}

#[test]
fn a7_discriminating_instances() {
    let right = parse("[r]<r>~pi").unwrap();
    let left = parse("[l]<l>~pi").unwrap();
    let b = Budgets::default();

    let v = sat_finite(&right, b);
    assert!(v.is_unsat(), "[r]<r>~pi finite: {}", verdict_tag(&v.outcome));
    let ct = ClosureTable::build(&anchored(&right));
    for n in 1..=6 {
        assert!(
            exhaustive_model_search(&anchored(&right), n).is_none(),
            "model of [r]<r>~pi found at n={n}"
        );
        assert!(
            exhaustive_model_search(&anchored(&left), n).is_none(),
            "model of [l]<l>~pi found at n={n}"
        );
        if n <= 4 {
            let o = brute_force_sat(&ct, n, OracleBudget::default());
            assert!(matches!(o, OracleOutcome::NoModel), "atom oracle at n={n}: {o:?}");
        }
    }

    let v = sat_natural(&right, b);
    let Outcome::Sat(w) = &v.outcome else {
        panic!("[r]<r>~pi over N: {}", verdict_tag(&v.outcome));
    };
    assert!(is_generator(w, &ct, Some(&anchored(&right))).ok());

    let ct_l = ClosureTable::build(&anchored(&left));
    let v = sat_natural(&left, b);
    assert!(v.is_unsat(), "[l]<l>~pi over N: {}", verdict_tag(&v.outcome));

    let v = sat_integer(&left, b);
    let Outcome::Sat(w) = &v.outcome else {
        panic!("[l]<l>~pi over Z: {}", verdict_tag(&v.outcome));
    };
    assert!(is_generator(w, &ct_l, Some(&anchored(&left))).ok());

    report(
        "A7 discriminating instances",
        true,
        "finite/N and N/Z separations confirmed, witnesses verified",
    );
}

#[test]
fn a8_bound_formulas() {
    let ct = ClosureTable::build(&parse("<r>p").unwrap().desugar());
    let r = bounds(&ct);
    assert_eq!(r.size_phi, 2);
    assert_eq!(r.marked_atom_bound_log2, 6);
    assert_eq!(r.marked_atom_bound, Some(64));
    let BoundValue::Symbolic { multiplier, base, exponent_pow2, addend, log2 } = r.finite
    else {
        panic!("finite bound should be symbolic at |phi|=2");
    };
    assert_eq!((multiplier, base, exponent_pow2, addend), (1.0, 3.0, 6, 0));
    assert!((log2 - 64.0 * 3f64.log2()).abs() < 1e-9);
    assert!((log2 - 101.4).abs() < 0.1);
    let BoundValue::Symbolic { multiplier, base, exponent_pow2, addend, .. } = r.nat else {
        panic!("nat bound should be symbolic at |phi|=2");
    };
    // (2^6 + 2) * 3^64 + 1
    assert_eq!((multiplier, base, exponent_pow2, addend), (66.0, 3.0, 6, 1));
    report(
        "A8 bound formulas",
        true,
        "finite log2 = 64*log2(3) ~ 101.4, nat = 66*3^64+1, marked-atom 2^(3|phi|)",
    );
}

#[test]
fn a9_atom_machinery() {
    let ct = ClosureTable::build(&parse("<r>p").unwrap().desugar());
    assert_eq!(all_atoms(&ct).len(), 4);
    let ct2 = ClosureTable::build(&parse("pi & len<2").unwrap().desugar());
    assert_eq!(all_atoms(&ct2).len(), 3);

    let mut checked = 0;
    for f in corpus() {
        let ct = ClosureTable::build(&anchored(f));
        let n = ct.num_entries();
        if n > 12 {
            continue;
        }
        let generated = all_atoms(&ct);
        let mut filtered: Vec<Atom> = Vec::new();
        for mask in 0u32..(1 << n) {
            let mut signs = Bits::empty(n);
            for i in 0..n {
                signs.set(i, mask >> i & 1 == 1);
            }
            if let Ok(a) = Atom::new(&ct, signs) {
                filtered.push(a);
            }
        }
        assert_eq!(
            generated.len(),
            filtered.len(),
            "generation vs filtering for {f}"
        );
        for a in &generated {
            assert!(filtered.contains(a), "generated atom missing from filter: {f}");
        }
        checked += 1;
    }
    report(
        "A9 atom machinery",
        checked > 0,
        &format!("spot counts 4 and 3; generation = filtering on {checked} closures"),
    );
}
