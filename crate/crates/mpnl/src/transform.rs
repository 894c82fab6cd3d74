//! Structure transformations: contraction of equivalent row pairs, iterated
//! shrinking, generator recognition for ℕ and ℤ, and ℕ-generator unfolding.

use crate::atoms::Atom;
use crate::config::{equivalent, mark, row_configuration, ColumnState};
use crate::formula::{ClosureTable, Formula, Lit};
use crate::semantics::{check_compass, CompassStructure};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("rows {0} and {1} are not contractible")]
    RowsNotContractible(i64, i64),
    #[error("input structure is not fulfilling")]
    NotFulfilling,
    #[error("repair of ◇_l-requests failed: {0}")]
    RepairFailed(String),
    #[error("generator conditions violated: {0:?}")]
    NotAGenerator(Vec<String>),
    #[error("unfolding requires y_max − y_inf ≥ 1")]
    NoGrowth,
    #[error("no column of row y_inf carries the marked atom of column {0} at y_max")]
    MissingUnfoldMatch(i64),
}

/// A finite structure together with the boundary anchors that certify its
/// unfolding into an infinite fulfilling structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    Finite,
    Nat { y_inf: i64 },
    Int { y_past: i64, y_fut: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorWitness {
    pub structure: CompassStructure,
    pub kind: GeneratorKind,
}

impl GeneratorWitness {
    pub fn to_json(&self, ct: &ClosureTable) -> serde_json::Value {
        let mut j = self.structure.to_json(ct);
        let obj = j.as_object_mut().unwrap();
        match &self.kind {
            GeneratorKind::Finite => {
                obj.insert("kind".into(), "finite".into());
            }
            GeneratorKind::Nat { y_inf } => {
                obj.insert("kind".into(), "nat".into());
                obj.insert("y_inf".into(), (*y_inf).into());
            }
            GeneratorKind::Int { y_past, y_fut } => {
                obj.insert("kind".into(), "int".into());
                obj.insert("y_past".into(), (*y_past).into());
                obj.insert("y_fut".into(), (*y_fut).into());
            }
        }
        j
    }
}

/// Contracts the structure over an equivalent row pair ȳ < ȳ', producing a
/// fulfilling structure smaller by exactly ȳ' − ȳ.
pub fn contract(
    g: &CompassStructure,
    ct: &ClosureTable,
    ybar: i64,
    ybar2: i64,
) -> Result<CompassStructure, TransformError> {
    contract_filtered(g, ct, ybar, ybar2, None)
}

/// Low columns labeled with witness copies; the only revision candidates
/// of the repair pass.
struct SaturatedGroup {
    spare: Vec<i64>,
}

/// Contraction with an optional veto on witness columns (used to preserve
/// selected triples when shrinking generators).
pub fn contract_filtered(
    g: &CompassStructure,
    ct: &ClosureTable,
    ybar: i64,
    ybar2: i64,
    witness_veto: Option<&dyn Fn(i64) -> bool>,
) -> Result<CompassStructure, TransformError> {
    assert!(g.lo() <= ybar && ybar < ybar2 && ybar2 <= g.hi());
    let c1 = row_configuration(g, ct, ybar);
    let c2 = row_configuration(g, ct, ybar2);
    if !equivalent(&c1, &c2, ct) {
        return Err(TransformError::RowsNotContractible(ybar, ybar2));
    }
    let d = ybar2 - ybar;
    let (lo, hi2) = (g.lo(), g.hi() - d);
    let kphi = ct.k_phi() as i64;
    let mut labels: BTreeMap<(i64, i64), Atom> = BTreeMap::new();

    // step 1: rows up to ȳ are untouched
    for y in lo..=ybar {
        for x in lo..=y {
            labels.insert((x, y), g.label(x, y).clone());
        }
    }
    // step 2: near-diagonal columns shift down by d
    for y in ybar + 1..=hi2 {
        for x in (ybar - kphi + 1).max(lo)..=y {
            labels.insert((x, y), g.label(x + d, y + d).clone());
        }
    }
    // steps 3-5: far columns, grouped by marked atom
    struct Group {
        low: Vec<i64>,
        high: Vec<i64>,
    }
    let mut groups: BTreeMap<ColumnState, Group> = BTreeMap::new();
    for x in lo..=ybar - kphi {
        groups
            .entry(mark(g, ct, x, ybar))
            .or_insert_with(|| Group {
                low: Vec::new(),
                high: Vec::new(),
            })
            .low
            .push(x);
    }
    for x in lo..=ybar2 - kphi {
        groups
            .entry(mark(g, ct, x, ybar2))
            .or_insert_with(|| Group {
                low: Vec::new(),
                high: Vec::new(),
            })
            .high
            .push(x);
    }
    let tail = g.hi() - ybar2;
    let mut saturated: BTreeMap<ColumnState, SaturatedGroup> = BTreeMap::new();
    for (s, grp) in &groups {
        if grp.low.is_empty() {
            continue; // the high columns vanish with the removed band
        }
        if grp.low.len() == grp.high.len() {
            // step 3: bijective matching of equal-count triples
            for (&x, &x2) in grp.low.iter().zip(&grp.high) {
                for i in 1..=tail {
                    labels.insert((x, ybar + i), g.label(x2, ybar2 + i).clone());
                }
            }
            continue;
        }
        // steps 4-5 need a witness column on the high row
        let witness = grp
            .high
            .iter()
            .copied()
            .find(|&x2| witness_veto.map_or(true, |veto| !veto(x2)))
            .ok_or(TransformError::RowsNotContractible(ybar, ybar2))?;
        // minimal rows realizing the pending requests of the witness column
        let mut essential_rows: Vec<i64> = Vec::new();
        for i in s.psi.iter_ones() {
            let op = ct.diamond_operand(i as u32);
            if essential_rows.iter().any(|&y2| g.label(witness, y2).satisfies(op)) {
                continue;
            }
            let y2 = (ybar2 + 1..=g.hi())
                .find(|&y2| g.label(witness, y2).satisfies(op))
                .ok_or(TransformError::NotFulfilling)?;
            essential_rows.push(y2);
        }
        essential_rows.sort_unstable();
        // blocked columns: same-state columns serving the ◇_l-requests of
        // the essential rows
        let mut blocked_high: Vec<i64> = Vec::new();
        for &yrow in &essential_rows {
            for li in g.label(yrow, yrow).req_l().iter_ones() {
                let op = ct.diamond_operand(li as u32);
                if blocked_high.iter().any(|&b| g.label(b, yrow).satisfies(op)) {
                    continue;
                }
                if let Some(x2) = grp
                    .high
                    .iter()
                    .copied()
                    .find(|&x2| g.label(x2, yrow).satisfies(op))
                {
                    blocked_high.push(x2);
                }
            }
        }
        blocked_high.sort_unstable();
        blocked_high.dedup();
        if grp.low.len() < blocked_high.len() {
            return Err(TransformError::RowsNotContractible(ybar, ybar2));
        }
        let blocked_low: Vec<i64> = grp.low[..blocked_high.len()].to_vec();
        for (&x, &x2) in blocked_low.iter().zip(&blocked_high) {
            for i in 1..=tail {
                labels.insert((x, ybar + i), g.label(x2, ybar2 + i).clone());
            }
        }
        // step 5: every remaining column copies the witness
        let spare: Vec<i64> = grp.low[blocked_high.len()..].to_vec();
        for &x in &spare {
            for i in 1..=tail {
                labels.insert((x, ybar + i), g.label(witness, ybar2 + i).clone());
            }
        }
        saturated.insert(s.clone(), SaturatedGroup { spare });
    }
    let mut out = CompassStructure::from_fn(lo, hi2, |x, y| {
        labels
            .remove(&(x, y))
            .unwrap_or_else(|| panic!("contraction left ({x},{y}) unlabeled"))
    });
    repair_left_requests(&mut out, g, ct, ybar, ybar2, &saturated)?;
    Ok(out)
}

/// The a)/b) repair pass: revises witness-copy labels so that every
/// ◇_l-request of the rows above ȳ is fulfilled again.
fn repair_left_requests(
    out: &mut CompassStructure,
    g: &CompassStructure,
    ct: &ClosureTable,
    ybar: i64,
    ybar2: i64,
    saturated: &BTreeMap<ColumnState, SaturatedGroup>,
) -> Result<(), TransformError> {
    let d = ybar2 - ybar;
    let kphi = ct.k_phi() as i64;
    let row_requests = |out: &CompassStructure, y: i64| -> Vec<Lit> {
        out.label(y, y)
            .req_l()
            .iter_ones()
            .map(|i| ct.diamond_operand(i as u32))
            .collect()
    };
    let fulfilled_on_row = |out: &CompassStructure, y: i64, op: Lit| -> bool {
        (out.lo()..=y).any(|z| out.label(z, y).satisfies(op))
    };
    let column_requests_ok = |out: &CompassStructure, x: i64| -> bool {
        out.label(x, x).req_r().iter_ones().all(|i| {
            let op = ct.diamond_operand(i as u32);
            (x..=out.hi()).any(|z| out.label(x, z).satisfies(op))
        })
    };
    for y in ybar + 1..=out.hi() {
        let requests = row_requests(out, y);
        for &psi in &requests {
            if fulfilled_on_row(out, y, psi) {
                continue;
            }
            let before: Vec<Lit> = requests
                .iter()
                .copied()
                .filter(|&op| fulfilled_on_row(out, y, op))
                .collect();
            // witnesses of ψ in the original structure on the shifted row
            let mut done = false;
            'witnesses: for x2 in g.lo()..=ybar2 - kphi {
                if !g.label(x2, y + d).satisfies(psi) {
                    continue;
                }
                let s = mark(g, ct, x2, ybar2);
                let Some(sg) = saturated.get(&s) else { continue };
                for &xj in &sg.spare {
                    let old = out.label(xj, y).clone();
                    out.set_label(xj, y, g.label(x2, y + d).clone());
                    let ok = fulfilled_on_row(out, y, psi)
                        && before.iter().all(|&op| fulfilled_on_row(out, y, op))
                        && column_requests_ok(out, xj);
                    if ok {
                        done = true;
                        break 'witnesses;
                    }
                    out.set_label(xj, y, old);
                }
            }
            if !done {
                return Err(TransformError::RepairFailed(format!(
                    "row {y}, request {}",
                    ct.lit_string(psi)
                )));
            }
        }
    }
    Ok(())
}

/// Repeatedly contracts the first contractible row pair until all row
/// configurations are pairwise non-equivalent.
pub fn shrink_to_core(g: &CompassStructure, ct: &ClosureTable) -> CompassStructure {
    let mut cur = g.clone();
    'outer: loop {
        for ybar in cur.lo()..=cur.hi() {
            for ybar2 in ybar + 1..=cur.hi() {
                if let Ok(next) = contract(&cur, ct, ybar, ybar2) {
                    cur = next;
                    continue 'outer;
                }
            }
        }
        return cur;
    }
}

#[derive(Clone, Debug)]
pub struct GeneratorReport {
    pub violations: Vec<String>,
}

impl GeneratorReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn left_requests_fulfilled(
    g: &CompassStructure,
    ct: &ClosureTable,
    x: i64,
    y: i64,
    out: &mut Vec<String>,
) {
    for i in g.label(x, y).req_l().iter_ones() {
        let op = ct.diamond_operand(i as u32);
        if !(g.lo()..=x).any(|z| g.label(z, x).satisfies(op)) {
            out.push(format!(
                "◇_l-request {} of ({x},{y}) unfulfilled",
                ct.lit_string(op)
            ));
        }
    }
}

/// Checks the generator conditions of the witness's kind; `feature`, when
/// given, must be featured (over ℤ: at the origin's point interval).
pub fn is_generator(
    w: &GeneratorWitness,
    ct: &ClosureTable,
    feature: Option<&Formula>,
) -> GeneratorReport {
    let g = &w.structure;
    let mut v = Vec::new();
    let kphi = ct.k_phi() as i64;
    match &w.kind {
        GeneratorKind::Finite => {
            let rep = check_compass(g, ct, feature);
            for viol in rep.violations {
                v.push(format!("{viol:?}"));
            }
            if feature.is_some() && !rep.features {
                v.push("feature formula missing from all labels".to_string());
            }
        }
        GeneratorKind::Nat { y_inf } => {
            let y_inf = *y_inf;
            if !(g.lo() <= y_inf && y_inf <= g.hi()) {
                v.push(format!("y_inf = {y_inf} outside the domain"));
            } else {
                if g.hi() - y_inf < kphi {
                    v.push(format!("y_max − y_inf = {} < k_φ", g.hi() - y_inf));
                }
                for (x, y) in g.points() {
                    left_requests_fulfilled(g, ct, x, y, &mut v);
                }
                let c_max = row_configuration(g, ct, g.hi());
                let c_inf = row_configuration(g, ct, y_inf);
                if !c_max.ma_subset(&c_inf) {
                    v.push("a triple of row y_max is missing from row y_inf".to_string());
                }
                for x in g.lo()..=y_inf {
                    if !mark(g, ct, x, g.hi()).psi.is_empty() {
                        v.push(format!("𝓜({x},y_max) has pending ◇_r-requests"));
                    }
                }
            }
            if let Some(f) = feature {
                let lit = ct.lookup(&f.desugar());
                let featured = lit.map_or(false, |l| g.points().any(|(x, y)| g.label(x, y).satisfies(l)));
                if !featured {
                    v.push("feature formula missing from all labels".to_string());
                }
            }
        }
        GeneratorKind::Int { y_past, y_fut } => {
            let (y_past, y_fut) = (*y_past, *y_fut);
            if !(y_past < 0 && 0 < y_fut) {
                v.push(format!("anchors not ordered: y_past = {y_past}, y_fut = {y_fut}"));
            }
            if y_past - g.lo() < kphi {
                v.push(format!("y_past − y_min = {} < k_φ", y_past - g.lo()));
            }
            if g.hi() - y_fut < kphi {
                v.push(format!("y_max − y_fut = {} < k_φ", g.hi() - y_fut));
            }
            if v.is_empty() {
                for y in y_past..=g.hi() {
                    left_requests_fulfilled(g, ct, y, y, &mut v);
                }
                let c_max = row_configuration(g, ct, g.hi());
                let c_fut = row_configuration(g, ct, y_fut);
                if !c_max.ma_subset(&c_fut) {
                    v.push("a triple of row y_max is missing from row y_fut".to_string());
                }
                for x in g.lo()..=y_fut {
                    if !mark(g, ct, x, g.hi()).psi.is_empty() {
                        v.push(format!("𝓜({x},y_max) has pending ◇_r-requests"));
                    }
                }
                let c_past = row_configuration(g, ct, y_past);
                let realized: Vec<ColumnState> =
                    (y_past..=0).map(|x| mark(g, ct, x, 0)).collect();
                for (s, _) in c_past.iter() {
                    if !realized.contains(s) {
                        v.push(format!(
                            "a triple of row y_past is not realized on row 0 (h = {})",
                            s.h
                        ));
                    }
                }
                if let Some(f) = feature {
                    let lit = ct.lookup(&f.desugar());
                    if !lit.map_or(false, |l| g.label(0, 0).satisfies(l)) {
                        v.push("feature formula missing at (0,0)".to_string());
                    }
                }
            }
        }
    }
    GeneratorReport { violations: v }
}

/// One unfolding round of an ℕ-compass generator: extends the domain by
/// y_max − y_inf and labels the new band by the four construction clauses.
fn unfold_nat_round(
    w: &GeneratorWitness,
    ct: &ClosureTable,
) -> Result<GeneratorWitness, TransformError> {
    let GeneratorKind::Nat { y_inf } = w.kind else {
        panic!("unfold_nat requires a ℕ-generator witness");
    };
    let report = is_generator(w, ct, None);
    if !report.ok() {
        return Err(TransformError::NotAGenerator(report.violations));
    }
    let g = &w.structure;
    let (lo, y_max) = (g.lo(), g.hi());
    let d = y_max - y_inf;
    if d < 1 {
        return Err(TransformError::NoGrowth);
    }
    let kphi = ct.k_phi() as i64;
    // clause-4 matching: the least column of row y_inf with a given mark
    let mut inf_marks: BTreeMap<ColumnState, i64> = BTreeMap::new();
    for x in (lo..=y_inf).rev() {
        inf_marks.insert(mark(g, ct, x, y_inf), x);
    }
    let mut match_of: BTreeMap<i64, i64> = BTreeMap::new();
    for x in (y_inf - kphi + 1).max(lo)..=y_max - kphi {
        let m = mark(g, ct, x, y_max);
        let x2 = *inf_marks
            .get(&m)
            .ok_or(TransformError::MissingUnfoldMatch(x))?;
        match_of.insert(x, x2);
    }
    let structure = CompassStructure::from_fn(lo, y_max + d, |x, y| {
        if y <= y_max {
            g.label(x, y).clone()
        } else if x > y_max - kphi {
            g.label(x - d, y - d).clone()
        } else if x <= y_inf - kphi {
            g.label(x, y - d).clone()
        } else {
            g.label(match_of[&x], y - d).clone()
        }
    });
    Ok(GeneratorWitness {
        structure,
        kind: GeneratorKind::Nat { y_inf: y_max },
    })
}

/// Performs `steps` unfolding rounds, re-checking the generator conditions
/// after each round.
pub fn unfold_nat(
    w: &GeneratorWitness,
    ct: &ClosureTable,
    steps: u32,
) -> Result<GeneratorWitness, TransformError> {
    assert!(steps >= 1);
    let mut cur = w.clone();
    for _ in 0..steps {
        cur = unfold_nat_round(&cur, ct)?;
        let report = is_generator(&cur, ct, None);
        if !report.ok() {
            return Err(TransformError::NotAGenerator(report.violations));
        }
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RowConfig;
    use crate::formula::parse;
    use crate::semantics::{
        anchored, brute_force_sat, model_to_compass, IntervalModel, OracleBudget, OracleOutcome,
    };

    fn table(src: &str) -> ClosureTable {
        ClosureTable::build(&anchored(&parse(src).unwrap()))
    }

    fn witness(ct: &ClosureTable, n: u32) -> CompassStructure {
        match brute_force_sat(ct, n, OracleBudget::default()) {
            OracleOutcome::Witness(g) => g,
            other => panic!("no witness: {other:?}"),
        }
    }

    fn first_equivalent_pair(
        g: &CompassStructure,
        ct: &ClosureTable,
    ) -> Option<(i64, i64)> {
        let rows: Vec<RowConfig> =
            (g.lo()..=g.hi()).map(|y| row_configuration(g, ct, y)).collect();
        for i in 0..rows.len() {
            for j in i + 1..rows.len() {
                if equivalent(&rows[i], &rows[j], ct) {
                    return Some((g.lo() + i as i64, g.lo() + j as i64));
                }
            }
        }
        None
    }

    #[test]
    fn contract_shrinks_exactly_and_stays_fulfilling() {
        let src = "~len<1";
        let ct = table(src);
        let g = witness(&ct, 5);
        let (ybar, ybar2) = first_equivalent_pair(&g, &ct).expect("no equivalent rows");
        let small = contract(&g, &ct, ybar, ybar2).unwrap();
        assert_eq!(
            small.num_points() as i64,
            (g.hi() - g.lo() + 1 - (ybar2 - ybar)) * (g.hi() - g.lo() + 2 - (ybar2 - ybar)) / 2
        );
        let rep = check_compass(&small, &ct, None);
        assert!(rep.fulfilling(), "violations: {:?}", rep.violations);
        assert!(small.label(0, 0).satisfies(ct.root()));
        // rows up to ȳ are label-identical
        for y in small.lo()..=ybar {
            for x in small.lo()..=y {
                assert_eq!(small.label(x, y), g.label(x, y));
            }
        }
    }

    #[test]
    fn non_equivalent_rows_rejected() {
        let ct = table("~len<2");
        let g = witness(&ct, 3);
        // rows 0 and 1 differ in their diagonal states' pending requests
        let c0 = row_configuration(&g, &ct, 0);
        let c1 = row_configuration(&g, &ct, 1);
        if !equivalent(&c0, &c1, &ct) {
            assert!(matches!(
                contract(&g, &ct, 0, 1),
                Err(TransformError::RowsNotContractible(0, 1))
            ));
        }
    }

    #[test]
    fn shrink_is_idempotent_in_size() {
        let ct = table("~len<1");
        let g = witness(&ct, 6);
        let core = shrink_to_core(&g, &ct);
        let again = shrink_to_core(&core, &ct);
        assert_eq!(core.num_points(), again.num_points());
        assert!(check_compass(&core, &ct, None).fulfilling());
    }

    #[test]
    fn all_distinct_configurations_unchanged() {
        let ct = table("p");
        let g = witness(&ct, 1);
        let core = shrink_to_core(&g, &ct);
        assert_eq!(core, g);
    }

    fn nat_generator_example() -> (ClosureTable, GeneratorWitness) {
        // V(p) = {[2,2]} over [0,5]: rows 4 and 5 realize the same triples
        let ct = table("p");
        let mut m = IntervalModel::new(0, 5);
        m.add("p", 2, 2);
        let structure = model_to_compass(&m, &ct);
        let w = GeneratorWitness {
            structure,
            kind: GeneratorKind::Nat { y_inf: 4 },
        };
        (ct, w)
    }

    #[test]
    fn nat_generator_recognized() {
        let (ct, w) = nat_generator_example();
        let rep = is_generator(&w, &ct, Some(&anchored(&parse("p").unwrap())));
        assert!(rep.ok(), "violations: {:?}", rep.violations);
        // anchor gap violation when y_inf is pushed to the top
        let bad = GeneratorWitness {
            kind: GeneratorKind::Nat { y_inf: 5 },
            ..w.clone()
        };
        // k_φ = 0 keeps the gap condition trivially satisfied; pending
        // requests and triple coverage still hold, so sanity-check via a
        // witness with y_inf misplaced low instead
        let low = GeneratorWitness {
            kind: GeneratorKind::Nat { y_inf: 0 },
            ..w
        };
        let rep = is_generator(&low, &ct, None);
        assert!(!rep.ok());
        let _ = bad;
    }

    #[test]
    fn unfold_grows_by_the_gap_each_round() {
        let (ct, w) = nat_generator_example();
        let mut cur = w;
        for _ in 0..3 {
            let prev_hi = cur.structure.hi();
            cur = unfold_nat(&cur, &ct, 1).unwrap();
            assert_eq!(cur.structure.hi(), prev_hi + 1);
            assert!(check_compass(&cur.structure, &ct, None).consistent());
            assert!(is_generator(&cur, &ct, None).ok());
        }
    }

    #[test]
    fn unfold_clause_two_copies_pointwise() {
        let (ct, w) = nat_generator_example();
        let g0 = w.structure.clone();
        let out = unfold_nat(&w, &ct, 1).unwrap().structure;
        let (y_max, d) = (g0.hi(), 1);
        for y in y_max + 1..=out.hi() {
            for x in (y_max - ct.k_phi() as i64 + 1).max(out.lo())..=y {
                assert_eq!(out.label(x, y), g0.label(x - d, y - d));
            }
        }
    }

    fn int_generator_example() -> (ClosureTable, GeneratorWitness) {
        // ◇_r◇_r(len<1 ∨ ¬len<1) holds everywhere; every row looks alike
        let ct = table("true");
        let m = IntervalModel::new(-3, 3);
        let structure = model_to_compass(&m, &ct);
        let w = GeneratorWitness {
            structure,
            kind: GeneratorKind::Int {
                y_past: -1,
                y_fut: 1,
            },
        };
        (ct, w)
    }

    #[test]
    fn int_generator_recognized() {
        let (ct, w) = int_generator_example();
        let rep = is_generator(&w, &ct, Some(&anchored(&parse("true").unwrap())));
        assert!(rep.ok(), "violations: {:?}", rep.violations);
        // y_past on the wrong side of 0 is rejected
        let bad = GeneratorWitness {
            kind: GeneratorKind::Int {
                y_past: 1,
                y_fut: 2,
            },
            ..w
        };
        assert!(!is_generator(&bad, &ct, None).ok());
    }

    #[test]
    fn generator_json_carries_anchors() {
        let (ct, w) = nat_generator_example();
        let j = w.to_json(&ct);
        assert_eq!(j["kind"], "nat");
        assert_eq!(j["y_inf"], 4);
        let (ct, w) = int_generator_example();
        let j = w.to_json(&ct);
        assert_eq!(j["kind"], "int");
        assert_eq!(j["y_past"], -1);
        assert_eq!(j["y_fut"], 1);
    }
}
