//! Explicit interval models, the truth relation, compass structures and
//! their verifier, and the model↔compass correspondence.

mod oracle;

pub use oracle::{
    anchored, brute_force_sat, exhaustive_model_search, oracle_sweep, OracleBudget, OracleOutcome,
    SweepOutcome,
};

use crate::atoms::Atom;
use crate::bits::Bits;
use crate::formula::{ClosureTable, Entry, Formula, Lit};
use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// A model over the integer range [lo, hi] with a valuation mapping
/// propositions to sets of intervals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalModel {
    lo: i64,
    hi: i64,
    valuation: BTreeMap<String, BTreeSet<(i64, i64)>>,
}

impl IntervalModel {
    pub fn new(lo: i64, hi: i64) -> IntervalModel {
        assert!(lo <= hi);
        IntervalModel {
            lo,
            hi,
            valuation: BTreeMap::new(),
        }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        self.lo <= x && x <= y && y <= self.hi
    }

    pub fn add(&mut self, prop: &str, x: i64, y: i64) {
        assert!(self.contains(x, y), "interval [{x},{y}] out of domain");
        self.valuation
            .entry(prop.to_string())
            .or_default()
            .insert((x, y));
    }

    pub fn holds_prop(&self, prop: &str, x: i64, y: i64) -> bool {
        self.valuation
            .get(prop)
            .map_or(false, |s| s.contains(&(x, y)))
    }
}

/// Truth of closure entries in a model, memoized per (interval, entry).
pub struct Evaluator<'a> {
    m: &'a IntervalModel,
    ct: &'a ClosureTable,
    memo: RefCell<HashMap<(i64, i64, u32), bool>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(m: &'a IntervalModel, ct: &'a ClosureTable) -> Evaluator<'a> {
        Evaluator {
            m,
            ct,
            memo: RefCell::new(HashMap::new()),
        }
    }

    pub fn holds(&self, x: i64, y: i64, l: Lit) -> bool {
        self.entry_holds(x, y, l.index) == l.positive
    }

    fn entry_holds(&self, x: i64, y: i64, i: u32) -> bool {
        assert!(self.m.contains(x, y), "interval [{x},{y}] out of domain");
        if let Some(&v) = self.memo.borrow().get(&(x, y, i)) {
            return v;
        }
        let v = match self.ct.entry(i) {
            Entry::Prop(p) => self.m.holds_prop(p, x, y),
            Entry::LenLt(k) => ((y - x) as u64) < *k,
            Entry::Or(a, b) => {
                let (a, b) = (*a, *b);
                self.holds(x, y, a) || self.holds(x, y, b)
            }
            Entry::DiamondR(c) => {
                let c = *c;
                (y..=self.m.hi).any(|z| self.holds(y, z, c))
            }
            Entry::DiamondL(c) => {
                let c = *c;
                (self.m.lo..=x).any(|z| self.holds(z, x, c))
            }
        };
        self.memo.borrow_mut().insert((x, y, i), v);
        v
    }
}

/// Truth of a core-grammar formula at an interval of the model.
pub fn eval(m: &IntervalModel, x: i64, y: i64, f: &Formula) -> bool {
    let ct = ClosureTable::build(f);
    Evaluator::new(m, &ct).holds(x, y, ct.root())
}

/// The type of an interval: the atom collecting exactly the closure
/// formulae true there.
pub fn type_of(m: &IntervalModel, ct: &ClosureTable, x: i64, y: i64) -> Atom {
    let ev = Evaluator::new(m, ct);
    type_of_with(&ev, ct, x, y)
}

fn type_of_with(ev: &Evaluator, ct: &ClosureTable, x: i64, y: i64) -> Atom {
    let n = ct.num_entries();
    let mut signs = Bits::empty(n);
    for i in 0..n as u32 {
        signs.set(i as usize, ev.entry_holds(x, y, i));
    }
    Atom::new(ct, signs).expect("interval types satisfy the atom conditions")
}

/// The half-grid of intervals over [lo, hi], each point (x,y) with x ≤ y
/// labeled by an atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompassStructure {
    lo: i64,
    hi: i64,
    labels: Vec<Atom>,
}

fn grid_len(lo: i64, hi: i64) -> usize {
    let m = (hi - lo + 1) as usize;
    m * (m + 1) / 2
}

impl CompassStructure {
    pub fn new(lo: i64, hi: i64, labels: Vec<Atom>) -> CompassStructure {
        assert!(lo <= hi);
        assert_eq!(labels.len(), grid_len(lo, hi));
        CompassStructure { lo, hi, labels }
    }

    /// Builds the structure by calling `label` on every grid point, rows
    /// bottom-up, left to right.
    pub fn from_fn(lo: i64, hi: i64, mut label: impl FnMut(i64, i64) -> Atom) -> CompassStructure {
        let mut labels = Vec::with_capacity(grid_len(lo, hi));
        for y in lo..=hi {
            for x in lo..=y {
                labels.push(label(x, y));
            }
        }
        CompassStructure { lo, hi, labels }
    }

    fn idx(&self, x: i64, y: i64) -> usize {
        assert!(self.lo <= x && x <= y && y <= self.hi, "({x},{y}) out of grid");
        let dy = (y - self.lo) as usize;
        let dx = (x - self.lo) as usize;
        dy * (dy + 1) / 2 + dx
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn label(&self, x: i64, y: i64) -> &Atom {
        &self.labels[self.idx(x, y)]
    }

    pub fn set_label(&mut self, x: i64, y: i64, a: Atom) {
        let i = self.idx(x, y);
        self.labels[i] = a;
    }

    /// Grid points, rows bottom-up, left to right.
    pub fn points(&self) -> impl Iterator<Item = (i64, i64)> {
        let (lo, hi) = (self.lo, self.hi);
        (lo..=hi).flat_map(move |y| (lo..=y).map(move |x| (x, y)))
    }

    pub fn num_points(&self) -> usize {
        self.labels.len()
    }

    pub fn to_json(&self, ct: &ClosureTable) -> serde_json::Value {
        let labels: Vec<serde_json::Value> = self
            .points()
            .map(|(x, y)| {
                serde_json::json!({
                    "x": x,
                    "y": y,
                    "atom": self.label(x, y).render(ct),
                })
            })
            .collect();
        serde_json::json!({ "lo": self.lo, "hi": self.hi, "labels": labels })
    }

    /// DOT rendering of the half-grid; atoms appear as node tooltips.
    pub fn to_dot(&self, ct: &ClosureTable) -> String {
        let mut out = String::from("graph compass {\n  node [shape=point width=0.12];\n");
        for (x, y) in self.points() {
            let tip = self.label(x, y).render(ct).join(", ");
            out.push_str(&format!(
                "  \"p{x}_{y}\" [pos=\"{x},{y}!\" tooltip=\"{tip}\"];\n"
            ));
        }
        for (x, y) in self.points() {
            if y < self.hi {
                out.push_str(&format!("  \"p{x}_{y}\" -- \"p{x}_{}\";\n", y + 1));
            }
            if x < y {
                out.push_str(&format!("  \"p{x}_{y}\" -- \"p{}_{y}\";\n", x + 1));
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Labels every interval of the model with its type.
pub fn model_to_compass(m: &IntervalModel, ct: &ClosureTable) -> CompassStructure {
    let ev = Evaluator::new(m, ct);
    CompassStructure::from_fn(m.lo, m.hi, |x, y| type_of_with(&ev, ct, x, y))
}

/// Reads a valuation off the labels: V(p) = {[x,y] | p ∈ L(x,y)}.
pub fn compass_to_model(g: &CompassStructure, ct: &ClosureTable) -> IntervalModel {
    let mut m = IntervalModel::new(g.lo, g.hi);
    for (x, y) in g.points() {
        for &i in ct.prop_entries() {
            if g.label(x, y).contains_entry(i) {
                if let Entry::Prop(p) = ct.entry(i) {
                    let p = p.clone();
                    m.add(&p, x, y);
                }
            }
        }
    }
    m
}

/// A single verifier finding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// leads_to fails between (x,y) and (y,y2).
    Temporal { x: i64, y: i64, y2: i64 },
    /// A len sign disagrees with the actual distance y − x.
    Length { x: i64, y: i64, k: u64 },
    /// ◇_rψ at (x,y) has no witness row in column y.
    UnfulfilledRight { x: i64, y: i64, psi: String },
    /// ◇_lψ at (x,y) has no witness column in row x.
    UnfulfilledLeft { x: i64, y: i64, psi: String },
}

#[derive(Clone, Debug)]
pub struct CompassReport {
    pub violations: Vec<Violation>,
    pub features: bool,
}

impl CompassReport {
    pub fn consistent(&self) -> bool {
        self.violations
            .iter()
            .all(|v| matches!(v, Violation::UnfulfilledRight { .. } | Violation::UnfulfilledLeft { .. }))
    }

    pub fn fulfilling(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks temporal consistency, length consistency and fulfillment of all
/// diamond requests; `feature`, when given, is looked up in the labels.
pub fn check_compass(
    g: &CompassStructure,
    ct: &ClosureTable,
    feature: Option<&Formula>,
) -> CompassReport {
    let mut violations = Vec::new();
    for (x, y) in g.points() {
        let a = g.label(x, y);
        // meeting pairs [x,y], [y,y2]
        for y2 in y..=g.hi() {
            if !a.leads_to(g.label(y, y2)) {
                violations.push(Violation::Temporal { x, y, y2 });
            }
        }
        let d = (y - x) as u64;
        for &(k, i) in ct.len_entries() {
            if a.contains_entry(i) != (d < k) {
                violations.push(Violation::Length { x, y, k });
            }
        }
        for i in a.req_r().iter_ones() {
            let op = ct.diamond_operand(i as u32);
            if !(y..=g.hi()).any(|z| g.label(y, z).satisfies(op)) {
                violations.push(Violation::UnfulfilledRight {
                    x,
                    y,
                    psi: ct.lit_string(op),
                });
            }
        }
        for i in a.req_l().iter_ones() {
            let op = ct.diamond_operand(i as u32);
            if !(g.lo()..=x).any(|z| g.label(z, x).satisfies(op)) {
                violations.push(Violation::UnfulfilledLeft {
                    x,
                    y,
                    psi: ct.lit_string(op),
                });
            }
        }
    }
    let features = feature
        .and_then(|f| ct.lookup(&f.desugar()))
        .map_or(false, |l| g.points().any(|(x, y)| g.label(x, y).satisfies(l)));
    CompassReport {
        violations,
        features,
    }
}
