//! Brute-force satisfiability oracle: backtracking search over atom
//! labelings of the compass grid, with constraint propagation.

use super::{check_compass, CompassStructure, Evaluator, IntervalModel};
use crate::atoms::{generate_atoms, Atom, AtomConstraints};
use crate::bits::Bits;
use crate::formula::{ClosureTable, Formula};

#[derive(Clone, Copy, Debug)]
pub struct OracleBudget {
    pub max_nodes: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_nodes: 5_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub enum OracleOutcome {
    Witness(CompassStructure),
    NoModel,
    Budget,
}

/// The anchored form ◇_r◇_r f: featured at the least diagonal point, it
/// makes "satisfiable somewhere" a local condition there.
pub fn anchored(f: &Formula) -> Formula {
    Formula::diamond_r(Formula::diamond_r(f.desugar()))
}

struct Search<'a> {
    ct: &'a ClosureTable,
    hi: i64,
    labels: Vec<Atom>,
    /// Per column: ◇_r entries requested somewhere in the column and not
    /// yet witnessed by a placed row.
    pending: Vec<Bits>,
    nodes: u64,
    max_nodes: u64,
}

enum Found {
    Yes,
    No,
    Budget,
}

impl<'a> Search<'a> {
    fn label(&self, x: i64, y: i64) -> &Atom {
        let (dx, dy) = (x as usize, y as usize);
        &self.labels[dy * (dy + 1) / 2 + dx]
    }

    fn run(&mut self, x: i64, y: i64) -> Found {
        let h = ((y - x) as u64).min(self.ct.len_class_bound());
        let mut cons = AtomConstraints {
            length_class: Some(h),
            ..Default::default()
        };
        // temporal consistency against the placed part of row x:
        // Obs_r(G) ⊆ Req_r(L(z,x)) and Obs_l(L(z,x)) ⊆ Req_l(G)
        let placed_to = if x == y { x - 1 } else { x };
        let mut within: Option<Bits> = None;
        let mut must = Vec::new();
        for z in 0..=placed_to {
            let a = self.label(z, x);
            within = Some(match within {
                None => a.req_r().clone(),
                Some(w) => w.intersect(a.req_r()),
            });
            for i in a.obs_l().iter_ones() {
                must.push(crate::formula::Lit {
                    index: i as u32,
                    positive: true,
                });
            }
        }
        cons.obs_r_within = within;
        if (x, y) == (0, 0) {
            must.push(self.ct.root());
        }
        must.sort();
        must.dedup();
        cons.must = must;

        for g in generate_atoms(self.ct, &cons) {
            self.nodes += 1;
            if self.nodes > self.max_nodes {
                return Found::Budget;
            }
            // the point interval meets itself
            if x == y && !g.leads_to(&g) {
                continue;
            }
            // ◇_l requests of (x,y) refer to row x, which is complete once
            // this point is placed: prune exactly
            let left_ok = g.req_l().iter_ones().all(|i| {
                let op = self.ct.diamond_operand(i as u32);
                (0..=placed_to).any(|z| self.label(z, x).satisfies(op))
                    || (x == y && g.satisfies(op))
            });
            if !left_ok {
                continue;
            }
            let saved_pending = self.pending.clone();
            self.pending[y as usize] = self.pending[y as usize].union(g.req_r());
            self.pending[x as usize] = self.pending[x as usize].minus(g.obs_r());
            let column_done = y == self.hi;
            if !(column_done && !self.pending[x as usize].is_empty()) {
                self.labels.push(g);
                let next = if x == y { (0, y + 1) } else { (x + 1, y) };
                let res = if next.1 > self.hi {
                    Found::Yes
                } else {
                    self.run(next.0, next.1)
                };
                match res {
                    Found::No => {
                        self.labels.pop();
                    }
                    done => return done,
                }
            }
            self.pending = saved_pending;
        }
        Found::No
    }
}

/// Searches for a fulfilling compass structure over exactly `n` points
/// featuring ◇_r◇_r f at (0,0). The closure table must be built from
/// [`anchored`]`(f)`.
pub fn brute_force_sat(ct: &ClosureTable, n: u32, budget: OracleBudget) -> OracleOutcome {
    assert!(n >= 1);
    let hi = (n - 1) as i64;
    let mut s = Search {
        ct,
        hi,
        labels: Vec::new(),
        pending: vec![Bits::empty(ct.num_entries()); n as usize],
        nodes: 0,
        max_nodes: budget.max_nodes,
    };
    match s.run(0, 0) {
        Found::Budget => OracleOutcome::Budget,
        Found::No => OracleOutcome::NoModel,
        Found::Yes => {
            let g = CompassStructure::new(0, hi, s.labels);
            let report = check_compass(&g, ct, None);
            assert!(
                report.fulfilling() && g.label(0, 0).satisfies(ct.root()),
                "oracle produced an unverified structure"
            );
            OracleOutcome::Witness(g)
        }
    }
}

/// Exhausts every valuation of the formula's propositions over the n-point
/// domain and evaluates directly, returning a satisfying model if one
/// exists. Fully independent of the atom machinery, so it doubles as a
/// cross-check for [`brute_force_sat`]; only usable while
/// propositions x intervals stays small.
pub fn exhaustive_model_search(f: &Formula, n: u32) -> Option<IntervalModel> {
    assert!(n >= 1);
    let hi = (n - 1) as i64;
    let core = f.desugar();
    let ct = ClosureTable::build(&core);
    let props = core.props();
    let mut cells = Vec::new();
    for x in 0..=hi {
        for y in x..=hi {
            for p in &props {
                cells.push((p.as_str(), x, y));
            }
        }
    }
    assert!(cells.len() <= 24, "valuation space too large to exhaust");
    for mask in 0u64..1u64 << cells.len() {
        let mut m = IntervalModel::new(0, hi);
        for (i, (p, x, y)) in cells.iter().enumerate() {
            if mask >> i & 1 == 1 {
                m.add(p, *x, *y);
            }
        }
        let ev = Evaluator::new(&m, &ct);
        if (0..=hi).any(|x| (x..=hi).any(|y| ev.holds(x, y, ct.root()))) {
            return Some(m);
        }
    }
    None
}

#[derive(Clone, Debug)]
pub enum SweepOutcome {
    Witness { n: u32, structure: CompassStructure },
    NoModel,
    Budget,
}

/// Sweeps domain sizes 1..=max_n (finite satisfiability is not monotone in
/// the domain size, so every n is tried).
pub fn oracle_sweep(ct: &ClosureTable, max_n: u32, budget: OracleBudget) -> SweepOutcome {
    let mut truncated = false;
    for n in 1..=max_n {
        match brute_force_sat(ct, n, budget) {
            OracleOutcome::Witness(structure) => return SweepOutcome::Witness { n, structure },
            OracleOutcome::NoModel => {}
            OracleOutcome::Budget => truncated = true,
        }
    }
    if truncated {
        SweepOutcome::Budget
    } else {
        SweepOutcome::NoModel
    }
}
