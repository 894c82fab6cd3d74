//! Differential testing: random formulas checked against the brute-force
//! oracle, with greedy shrinking of any disagreement.

use crate::engine::{sat_finite_with, sat_integer_with, Budgets, EngineOptions, Outcome};
use crate::formula::{translate_finite, ClosureTable, Formula};
use crate::fuzz::{gen_formulae, FuzzSpec};
use crate::semantics::{anchored, oracle_sweep, OracleBudget, SweepOutcome};
use serde_json::json;

const SWEEP_N: u32 = 5;

#[derive(Clone, Debug)]
pub struct DiffEntry {
    pub index: usize,
    pub formula: String,
    pub oracle: String,
    pub engine: String,
    pub translated: Option<String>,
    pub disagreement: Option<String>,
    pub minimized: Option<String>,
}

#[derive(Clone, Debug)]
pub struct DiffReport {
    pub seed: u64,
    pub entries: Vec<DiffEntry>,
    pub disagreements: usize,
    pub unknowns: usize,
}

impl DiffReport {
    pub fn ok(&self) -> bool {
        self.disagreements == 0
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "seed": self.seed,
            "checked": self.entries.len(),
            "disagreements": self.disagreements,
            "unknowns": self.unknowns,
            "entries": self.entries.iter().map(|e| json!({
                "index": e.index,
                "formula": e.formula,
                "oracle": e.oracle,
                "engine": e.engine,
                "translated": e.translated,
                "disagreement": e.disagreement,
                "minimized": e.minimized,
            })).collect::<Vec<_>>(),
        })
    }
}

fn outcome_str(o: &Outcome) -> &'static str {
    match o {
        Outcome::Sat(_) => "sat",
        Outcome::Unsat => "unsat",
        Outcome::Unknown => "unknown",
    }
}

struct Checker {
    budgets: Budgets,
    translate: bool,
    opts: EngineOptions,
}

struct CheckResult {
    oracle: String,
    engine: String,
    translated: Option<String>,
    disagreement: Option<String>,
}

impl Checker {
    fn check(&self, f: &Formula) -> CheckResult {
        let ct = ClosureTable::build(&anchored(f));
        let sweep = oracle_sweep(&ct, SWEEP_N, OracleBudget::default());
        let engine = sat_finite_with(f, self.budgets, self.opts);
        let oracle_s = match &sweep {
            SweepOutcome::Witness { n, .. } => format!("sat(n={n})"),
            SweepOutcome::NoModel => format!("nomodel(n<={SWEEP_N})"),
            SweepOutcome::Budget => "budget".to_string(),
        };
        let engine_s = outcome_str(&engine.outcome).to_string();
        let mut disagreement = None;
        if matches!(sweep, SweepOutcome::Witness { .. }) && engine.is_unsat() {
            disagreement = Some("oracle sat but engine unsat".to_string());
        }
        let mut translated = None;
        if self.translate {
            if let Ok(tr) = translate_finite(f) {
                let tv = sat_integer_with(&tr, self.budgets, self.opts);
                translated = Some(outcome_str(&tv.outcome).to_string());
                let finite_sat = matches!(sweep, SweepOutcome::Witness { .. })
                    || matches!(engine.outcome, Outcome::Sat(_));
                if finite_sat && tv.is_unsat() {
                    disagreement
                        .get_or_insert("finite sat but translation unsat over Z".to_string());
                }
                if engine.is_unsat() && matches!(tv.outcome, Outcome::Sat(_)) {
                    disagreement
                        .get_or_insert("finite unsat but translation sat over Z".to_string());
                }
            }
        }
        CheckResult {
            oracle: oracle_s,
            engine: engine_s,
            translated,
            disagreement,
        }
    }

    fn disagrees(&self, f: &Formula) -> bool {
        self.check(f).disagreement.is_some()
    }
}

// simplification measure: shrinking must strictly decrease it
fn measure(f: &Formula) -> u64 {
    fn free_leaves(f: &Formula) -> u64 {
        match f {
            Formula::True | Formula::False => 0,
            Formula::Neg(c)
            | Formula::DiamondR(c)
            | Formula::DiamondL(c)
            | Formula::BoxR(c)
            | Formula::BoxL(c) => free_leaves(c),
            Formula::Or(a, b) | Formula::And(a, b) | Formula::Implies(a, b) => {
                free_leaves(a) + free_leaves(b)
            }
            _ => 1,
        }
    }
    2 * f.node_count() + free_leaves(f)
}

/// All single-step simplifications: promote a child over its parent, or
/// replace a subterm by ⊤/⊥.
fn one_step(f: &Formula) -> Vec<Formula> {
    let mut out = Vec::new();
    match f {
        Formula::Neg(c)
        | Formula::DiamondR(c)
        | Formula::DiamondL(c)
        | Formula::BoxR(c)
        | Formula::BoxL(c) => out.push((**c).clone()),
        Formula::Or(a, b) | Formula::And(a, b) | Formula::Implies(a, b) => {
            out.push((**a).clone());
            out.push((**b).clone());
        }
        _ => {}
    }
    if !matches!(f, Formula::True | Formula::False) {
        out.push(Formula::True);
        out.push(Formula::False);
    }
    let rebuild = |c: &Formula, make: &dyn Fn(Formula) -> Formula, out: &mut Vec<Formula>| {
        for c2 in one_step(c) {
            out.push(make(c2));
        }
    };
    match f {
        Formula::Neg(c) => rebuild(c, &Formula::neg, &mut out),
        Formula::DiamondR(c) => rebuild(c, &Formula::diamond_r, &mut out),
        Formula::DiamondL(c) => rebuild(c, &Formula::diamond_l, &mut out),
        Formula::BoxR(c) => rebuild(c, &Formula::box_r, &mut out),
        Formula::BoxL(c) => rebuild(c, &Formula::box_l, &mut out),
        Formula::Or(a, b) => {
            for a2 in one_step(a) {
                out.push(Formula::or(a2, (**b).clone()));
            }
            for b2 in one_step(b) {
                out.push(Formula::or((**a).clone(), b2));
            }
        }
        Formula::And(a, b) => {
            for a2 in one_step(a) {
                out.push(Formula::and(a2, (**b).clone()));
            }
            for b2 in one_step(b) {
                out.push(Formula::and((**a).clone(), b2));
            }
        }
        Formula::Implies(a, b) => {
            for a2 in one_step(a) {
                out.push(Formula::implies(a2, (**b).clone()));
            }
            for b2 in one_step(b) {
                out.push(Formula::implies((**a).clone(), b2));
            }
        }
        _ => {}
    }
    out
}

fn shrink(f: &Formula, still_bad: &dyn Fn(&Formula) -> bool) -> Formula {
    let mut cur = f.clone();
    loop {
        let m = measure(&cur);
        let next = one_step(&cur)
            .into_iter()
            .find(|c| measure(c) < m && still_bad(c));
        match next {
            Some(c) => cur = c,
            None => return cur,
        }
    }
}

pub fn run_diff(spec: &FuzzSpec, budgets: Budgets, translate: bool) -> DiffReport {
    run_diff_with(spec, budgets, translate, EngineOptions::default())
}

#[doc(hidden)]
pub fn run_diff_with(
    spec: &FuzzSpec,
    budgets: Budgets,
    translate: bool,
    opts: EngineOptions,
) -> DiffReport {
    let checker = Checker {
        budgets,
        translate,
        opts,
    };
    let mut entries = Vec::new();
    let mut disagreements = 0;
    let mut unknowns = 0;
    for (index, f) in gen_formulae(spec).into_iter().enumerate() {
        let r = checker.check(&f);
        if r.engine == "unknown" || r.oracle == "budget" {
            unknowns += 1;
        }
        let minimized = r.disagreement.as_ref().map(|_| {
            disagreements += 1;
            shrink(&f, &|g| checker.disagrees(g)).to_string()
        });
        entries.push(DiffEntry {
            index,
            formula: f.to_string(),
            oracle: r.oracle,
            engine: r.engine,
            translated: r.translated,
            disagreement: r.disagreement,
            minimized,
        });
    }
    DiffReport {
        seed: spec.seed,
        entries,
        disagreements,
        unknowns,
    }
}
