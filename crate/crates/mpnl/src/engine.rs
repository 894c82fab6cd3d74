//! Row-stepping decision procedures for finite orders, ℕ and ℤ: a
//! memoized DFS over horizontal configurations, with the pseudocode's
//! guessed sets turned into explicit choice points.

use crate::atoms::{generate_atoms, Atom, AtomConstraints};
use crate::bits::Bits;
use crate::config::ColumnState;
use crate::formula::{ClosureTable, Formula};
use crate::semantics::{anchored, check_compass, CompassStructure};
use crate::transform::{is_generator, GeneratorKind, GeneratorWitness};
use std::collections::{BTreeMap, BTreeSet, HashMap};

#[derive(Clone, Copy, Debug)]
pub struct Budgets {
    /// Rows added within a single phase.
    pub max_rows: u32,
    pub max_nodes: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            max_rows: 64,
            max_nodes: 10_000_000,
        }
    }
}

/// Test fixture knobs; not part of the public surface.
#[doc(hidden)]
#[derive(Clone, Copy, Debug, Default)]
pub struct EngineOptions {
    /// Corrupts one →_R constraint (Obs_r(G) ⊆ R becomes R ⊆ Obs_r(G)),
    /// for mutation-testing the differential harness.
    pub flip_obs_r: bool,
    pub disable_memo: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub nodes: u64,
    pub rows: u32,
    pub memo_hits: u64,
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Sat(GeneratorWitness),
    Unsat,
    Unknown,
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub outcome: Outcome,
    pub stats: Stats,
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self.outcome, Outcome::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self.outcome, Outcome::Unsat)
    }

    pub fn to_json(&self, ct: &ClosureTable) -> serde_json::Value {
        let (outcome, witness) = match &self.outcome {
            Outcome::Sat(w) => ("sat", w.to_json(ct)),
            Outcome::Unsat => ("unsat", serde_json::Value::Null),
            Outcome::Unknown => ("unknown", serde_json::Value::Null),
        };
        serde_json::json!({
            "outcome": outcome,
            "witness": witness,
            "stats": {
                "nodes": self.stats.nodes,
                "rows": self.stats.rows,
                "memo_hits": self.stats.memo_hits,
            },
        })
    }
}

/// Turns a row trace into an explicit structure; row i of the trace holds
/// the atoms of columns lo..=lo+i.
pub fn extract_witness(trace: &[Vec<Atom>], lo: i64) -> CompassStructure {
    let hi = lo + trace.len() as i64 - 1;
    CompassStructure::from_fn(lo, hi, |x, y| {
        trace[(y - lo) as usize][(x - lo) as usize].clone()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Domain {
    Finite,
    Natural,
    Integer,
}

#[derive(Clone, Debug)]
enum Phase {
    Rows,
    ZeroToInf,
    InfToMax {
        y_inf: usize,
        c_inf: BTreeSet<ColumnState>,
    },
    MinToPast,
    PastToZero {
        i_past: usize,
        past: BTreeSet<ColumnState>,
    },
    ZeroToFut {
        i_past: usize,
        i_zero: usize,
    },
    FutToMax {
        i_past: usize,
        i_zero: usize,
        i_fut: usize,
        fut: BTreeSet<ColumnState>,
    },
}

type CappedConfig = Vec<(ColumnState, u64)>;
type MemoKey = (u8, Vec<CappedConfig>, u64);

struct Search<'a> {
    ct: &'a ClosureTable,
    feature: &'a Formula,
    budgets: Budgets,
    opts: EngineOptions,
    diagonals: Vec<Atom>,
    cap: u64,
    /// Realizability of a pending request, per (column Req_l, column R,
    /// entry): whether any surviving row admits a witness atom there.
    real_cache: HashMap<(Bits, Bits, usize), bool>,
    adm_cache: HashMap<(Bits, Bits, u64, usize), std::rc::Rc<Vec<Atom>>>,
    memo: HashMap<MemoKey, u32>,
    stats: Stats,
    truncated: bool,
    /// The diagonal alphabet was cut off; exhaustion no longer proves Unsat.
    diag_capped: bool,
}

/// Non-decreasing digit vectors per group: one multiset of successor
/// atoms for each set of same-state columns.
struct Odometer {
    digits: Vec<Vec<usize>>,
    options: Vec<usize>,
}

impl Odometer {
    fn new(slots: &[usize], options: &[usize]) -> Odometer {
        Odometer {
            digits: slots.iter().map(|&n| vec![0; n]).collect(),
            options: options.to_vec(),
        }
    }

    fn advance_group(d: &mut [usize], m: usize) -> bool {
        for i in (0..d.len()).rev() {
            if d[i] + 1 < m {
                let v = d[i] + 1;
                for x in d[i..].iter_mut() {
                    *x = v;
                }
                return true;
            }
        }
        false
    }

    fn advance(&mut self) -> bool {
        for g in (0..self.digits.len()).rev() {
            if Self::advance_group(&mut self.digits[g], self.options[g]) {
                return true;
            }
            for x in self.digits[g].iter_mut() {
                *x = 0;
            }
        }
        false
    }
}

impl<'a> Search<'a> {
    fn new(
        ct: &'a ClosureTable,
        feature: &'a Formula,
        budgets: Budgets,
        opts: EngineOptions,
    ) -> Search<'a> {
        // large closures (the model-encoding translations) have too many
        // diagonal atoms to materialize; cap the enumeration and degrade
        // exhaustion from Unsat to Unknown in that case
        const DIAG_CAP: usize = 512;
        let mut diagonals: Vec<Atom> = generate_atoms(
            ct,
            &AtomConstraints {
                length_class: Some(0),
                self_leading: true,
                ..Default::default()
            },
        )
        .take(DIAG_CAP + 1)
        .collect();
        let diag_capped = diagonals.len() > DIAG_CAP;
        if diag_capped {
            diagonals.truncate(DIAG_CAP);
        }
        // fewest fresh obligations first: steers the DFS toward rows that
        // can close out
        diagonals.sort_by_key(|d| d.req_r().count() + d.req_l().count());
        let mut s = Search {
            ct,
            feature,
            budgets,
            opts,
            diagonals,
            diag_capped,
            cap: ct.threshold().max(1),
            real_cache: HashMap::new(),
            adm_cache: HashMap::new(),
            memo: HashMap::new(),
            stats: Stats::default(),
            truncated: false,
        };
        if !diag_capped {
            s.eliminate();
        }
        s
    }

    /// A witness for a pending ◇_r-request of a column with left-request
    /// set `req_l` and right-request set `r` must sit in that column, in a
    /// row whose diagonal fixes S_r and S_l. Over-approximates by trying
    /// every surviving diagonal.
    fn realizable(&mut self, req_l: &Bits, r: &Bits, i: usize) -> bool {
        let key = (req_l.clone(), r.clone(), i);
        if let Some(&v) = self.real_cache.get(&key) {
            return v;
        }
        let op = self.ct.diamond_operand(i as u32);
        let bound = self.ct.len_class_bound();
        let v = self.diagonals.iter().any(|d| {
            (1..=bound).any(|h| {
                generate_atoms(
                    self.ct,
                    &AtomConstraints {
                        req_r: Some(d.req_r().clone()),
                        req_l: Some(req_l.clone()),
                        obs_r_within: Some(r.clone()),
                        obs_l_within: Some(d.req_l().clone()),
                        length_class: Some(h),
                        must: vec![op],
                        self_leading: false,
                    },
                )
                .next()
                .is_some()
            })
        });
        self.real_cache.insert(key, v);
        v
    }

    /// Some pending request of the column can never be witnessed.
    fn hopeless(&mut self, s: &ColumnState) -> bool {
        let (req_l, r) = (s.atom.req_l().clone(), s.r.clone());
        s.psi.iter_ones().any(|i| !self.realizable(&req_l, &r, i))
    }

    /// Type elimination to a fixpoint: drop diagonals whose fresh column is
    /// already hopeless; realizability then shrinks, so iterate.
    fn eliminate(&mut self) {
        loop {
            let alive = self.diagonals.clone();
            let mut keep = Vec::new();
            for d in &alive {
                let ds = self.diag_state(d);
                if !self.hopeless(&ds) {
                    keep.push(d.clone());
                }
            }
            if keep.len() == alive.len() {
                return;
            }
            self.diagonals = keep;
            self.real_cache.clear();
        }
    }

    fn diag_state(&self, f_d: &Atom) -> ColumnState {
        let r = f_d.req_r().clone();
        let mut psi = Bits::empty(self.ct.num_entries());
        for i in r.iter_ones() {
            if !f_d.satisfies(self.ct.diamond_operand(i as u32)) {
                psi.set(i, true);
            }
        }
        ColumnState {
            atom: f_d.clone(),
            psi,
            r,
            h: 0,
        }
    }

    fn successor_state(&self, s: &ColumnState, g: &Atom) -> ColumnState {
        let mut psi = Bits::empty(self.ct.num_entries());
        for i in s.psi.iter_ones() {
            if !g.satisfies(self.ct.diamond_operand(i as u32)) {
                psi.set(i, true);
            }
        }
        ColumnState {
            atom: g.clone(),
            psi,
            r: s.r.clone(),
            h: (s.h + 1).min(self.ct.len_class_bound()),
        }
    }

    /// Every ◇_l-request of the row's diagonal is witnessed on the row.
    fn row_requests_fulfilled(&self, row: &[Atom]) -> bool {
        let diag = row.last().unwrap();
        diag.req_l()
            .iter_ones()
            .all(|i| {
                let op = self.ct.diamond_operand(i as u32);
                row.iter().any(|a| a.satisfies(op))
            })
    }

    fn capped(&self, cols: &[ColumnState]) -> CappedConfig {
        let bound = self.ct.len_class_bound();
        let mut counts: BTreeMap<&ColumnState, u64> = BTreeMap::new();
        for s in cols {
            *counts.entry(s).or_insert(0) += 1;
        }
        counts
            .into_iter()
            .map(|(s, c)| {
                let c = if s.h == bound { c.min(self.cap) } else { c };
                (s.clone(), c)
            })
            .collect()
    }

    fn support(cols: &[ColumnState]) -> BTreeSet<ColumnState> {
        cols.iter().cloned().collect()
    }

    fn anchor_part(set: &BTreeSet<ColumnState>) -> CappedConfig {
        set.iter().map(|s| (s.clone(), 1)).collect()
    }

    fn memo_key(&self, phase: &Phase, cols: &[ColumnState], steps: u64) -> MemoKey {
        let kphi = self.ct.k_phi();
        match phase {
            Phase::Rows => (0, vec![self.capped(cols)], 0),
            Phase::ZeroToInf => (1, vec![self.capped(cols)], 0),
            Phase::InfToMax { y_inf, c_inf } => (
                2,
                vec![
                    self.capped(&cols[..=*y_inf]),
                    self.capped(&cols[*y_inf + 1..]),
                    Self::anchor_part(c_inf),
                ],
                steps.min(kphi.max(1)),
            ),
            Phase::MinToPast => (3, vec![self.capped(cols)], steps.min(kphi)),
            Phase::PastToZero { i_past, past } => (
                4,
                vec![
                    self.capped(&cols[..=*i_past]),
                    self.capped(&cols[*i_past + 1..]),
                    Self::anchor_part(past),
                ],
                steps.min(1),
            ),
            Phase::ZeroToFut { .. } => (5, vec![self.capped(cols)], steps.min(1)),
            Phase::FutToMax { i_fut, fut, .. } => (
                6,
                vec![
                    self.capped(&cols[..=*i_fut]),
                    self.capped(&cols[*i_fut + 1..]),
                    Self::anchor_part(fut),
                ],
                steps.min(kphi),
            ),
        }
    }

    fn verify(&self, w: &GeneratorWitness) {
        let ok = match w.kind {
            GeneratorKind::Finite => {
                let rep = check_compass(&w.structure, self.ct, Some(self.feature));
                rep.fulfilling() && rep.features
            }
            _ => is_generator(w, self.ct, Some(self.feature)).ok(),
        };
        assert!(ok, "engine accepted an unverifiable witness");
    }

    fn accept(
        &mut self,
        phase: &Phase,
        steps: u64,
        cols: &[ColumnState],
        rows: &[Vec<Atom>],
    ) -> Option<GeneratorWitness> {
        let kphi = self.ct.k_phi();
        let w = match phase {
            Phase::Rows => {
                if !cols.iter().all(|s| s.psi.is_empty()) {
                    return None;
                }
                GeneratorWitness {
                    structure: extract_witness(rows, 0),
                    kind: GeneratorKind::Finite,
                }
            }
            Phase::InfToMax { y_inf, c_inf } => {
                let ok = steps >= kphi.max(1)
                    && cols[..=*y_inf].iter().all(|s| s.psi.is_empty())
                    && cols.iter().all(|s| c_inf.contains(s));
                if !ok {
                    return None;
                }
                GeneratorWitness {
                    structure: extract_witness(rows, 0),
                    kind: GeneratorKind::Nat {
                        y_inf: *y_inf as i64,
                    },
                }
            }
            Phase::FutToMax {
                i_past,
                i_zero,
                i_fut,
                fut,
            } => {
                let ok = steps >= kphi
                    && cols[..=*i_fut].iter().all(|s| s.psi.is_empty())
                    && cols.iter().all(|s| fut.contains(s));
                if !ok {
                    return None;
                }
                let z = *i_zero as i64;
                GeneratorWitness {
                    structure: extract_witness(rows, -z),
                    kind: GeneratorKind::Int {
                        y_past: *i_past as i64 - z,
                        y_fut: *i_fut as i64 - z,
                    },
                }
            }
            _ => return None,
        };
        self.verify(&w);
        Some(w)
    }

    /// Anchor declarations: phase switches that add no row.
    fn declarations(
        &mut self,
        phase: &Phase,
        steps: u64,
        cols: &[ColumnState],
        rows: &[Vec<Atom>],
    ) -> Vec<Phase> {
        let here = rows.len() - 1;
        match phase {
            Phase::ZeroToInf => vec![Phase::InfToMax {
                y_inf: here,
                c_inf: Self::support(cols),
            }],
            Phase::MinToPast => {
                // row y_past must itself fulfill its ◇_l-requests
                if steps >= self.ct.k_phi() && self.row_requests_fulfilled(rows.last().unwrap()) {
                    vec![Phase::PastToZero {
                        i_past: here,
                        past: Self::support(cols),
                    }]
                } else {
                    vec![]
                }
            }
            Phase::PastToZero { i_past, past } => {
                let right = Self::support(&cols[*i_past + 1..]);
                let anchored_here = cols.last().unwrap().atom.satisfies(self.ct.root());
                if steps >= 1 && anchored_here && past.iter().all(|s| right.contains(s)) {
                    vec![Phase::ZeroToFut {
                        i_past: *i_past,
                        i_zero: here,
                    }]
                } else {
                    vec![]
                }
            }
            Phase::ZeroToFut { i_past, i_zero } => {
                if steps >= 1 {
                    vec![Phase::FutToMax {
                        i_past: *i_past,
                        i_zero: *i_zero,
                        i_fut: here,
                        fut: Self::support(cols),
                    }]
                } else {
                    vec![]
                }
            }
            _ => vec![],
        }
    }

    fn check_past_requests(&self, phase: &Phase) -> bool {
        !matches!(phase, Phase::MinToPast)
    }

    fn dfs(
        &mut self,
        phase: &Phase,
        phase_start: usize,
        cols: &[ColumnState],
        rows: &mut Vec<Vec<Atom>>,
    ) -> Option<GeneratorWitness> {
        self.stats.nodes += 1;
        self.stats.rows = self.stats.rows.max(rows.len() as u32);
        if self.stats.nodes > self.budgets.max_nodes {
            self.truncated = true;
            return None;
        }
        let steps = (rows.len() - 1 - phase_start) as u64;
        if !self.opts.disable_memo {
            let key = self.memo_key(phase, cols, steps);
            match self.memo.get_mut(&key) {
                Some(best) if *best <= steps as u32 => {
                    self.stats.memo_hits += 1;
                    return None;
                }
                Some(best) => *best = steps as u32,
                None => {
                    self.memo.insert(key, steps as u32);
                }
            }
        }
        if let Some(w) = self.accept(phase, steps, cols, rows) {
            return Some(w);
        }
        for next in self.declarations(phase, steps, cols, rows) {
            if let Some(w) = self.dfs(&next, rows.len() - 1, cols, rows) {
                return Some(w);
            }
            if self.stats.nodes > self.budgets.max_nodes {
                return None;
            }
        }
        if steps >= self.budgets.max_rows as u64 {
            self.truncated = true;
            return None;
        }
        self.step(phase, phase_start, cols, rows)
    }

    fn step(
        &mut self,
        phase: &Phase,
        phase_start: usize,
        cols: &[ColumnState],
        rows: &mut Vec<Vec<Atom>>,
    ) -> Option<GeneratorWitness> {
        let check_past = self.check_past_requests(phase);
        let bound = self.ct.len_class_bound();
        for di in 0..self.diagonals.len() {
            let f_d = self.diagonals[di].clone();
            let diag = self.diag_state(&f_d);
            // a new column pending a request nothing can witness is dead in
            // every domain
            if self.hopeless(&diag) {
                continue;
            }
            let (s_r, s_l) = (f_d.req_r().clone(), f_d.req_l().clone());
            // same-state columns are interchangeable: enumerate one multiset
            // of successor atoms per group
            let mut grouping: BTreeMap<&ColumnState, Vec<usize>> = BTreeMap::new();
            for (i, s) in cols.iter().enumerate() {
                grouping.entry(s).or_default().push(i);
            }
            let mut groups: Vec<(&ColumnState, Vec<usize>, std::rc::Rc<Vec<Atom>>)> = Vec::new();
            let mut dead = false;
            for (s, idxs) in grouping {
                let key = (s.atom.req_l().clone(), s.r.clone(), s.h, di);
                let adm = match self.adm_cache.get(&key) {
                    Some(adm) => adm.clone(),
                    None => {
                        let mut v: Vec<Atom> = generate_atoms(
                            self.ct,
                            &AtomConstraints {
                                req_r: Some(s_r.clone()),
                                req_l: Some(s.atom.req_l().clone()),
                                obs_r_within: Some(s.r.clone()),
                                obs_l_within: Some(s_l.clone()),
                                length_class: Some((s.h + 1).min(bound)),
                                must: Vec::new(),
                                self_leading: false,
                            },
                        )
                        .collect();
                        if self.opts.flip_obs_r {
                            v.retain(|g| s.r.is_subset(g.obs_r()));
                        }
                        // prefer successors that discharge the most of the
                        // column's outstanding requests
                        let mut scored: Vec<(usize, Atom)> = v
                            .into_iter()
                            .map(|g| {
                                let hits = s
                                    .r
                                    .iter_ones()
                                    .filter(|&i| {
                                        g.satisfies(self.ct.diamond_operand(i as u32))
                                    })
                                    .count();
                                (hits, g)
                            })
                            .collect();
                        scored.sort_by(|a, b| b.0.cmp(&a.0));
                        let v: Vec<Atom> = scored.into_iter().map(|(_, g)| g).collect();
                        let v = std::rc::Rc::new(v);
                        self.adm_cache.insert(key, v.clone());
                        v
                    }
                };
                if adm.is_empty() {
                    dead = true;
                    break;
                }
                groups.push((s, idxs, adm));
            }
            if dead {
                continue;
            }
            let slots: Vec<usize> = groups.iter().map(|(_, idxs, _)| idxs.len()).collect();
            let options: Vec<usize> = groups.iter().map(|(_, _, adm)| adm.len()).collect();
            let mut od = Odometer::new(&slots, &options);
            loop {
                self.stats.nodes += 1;
                if self.stats.nodes > self.budgets.max_nodes {
                    self.truncated = true;
                    return None;
                }
                let mut new_cols: Vec<ColumnState> = vec![diag.clone(); cols.len()];
                let mut new_row: Vec<Atom> = vec![f_d.clone(); cols.len()];
                for (gi, (s, idxs, adm)) in groups.iter().enumerate() {
                    for (slot, &ci) in idxs.iter().enumerate() {
                        let g = &adm[od.digits[gi][slot]];
                        new_row[ci] = g.clone();
                        new_cols[ci] = self.successor_state(s, g);
                    }
                }
                let past_ok = !check_past
                    || s_l.iter_ones().all(|i| {
                        let op = self.ct.diamond_operand(i as u32);
                        f_d.satisfies(op) || new_row.iter().any(|a| a.satisfies(op))
                    });
                if past_ok {
                    new_cols.push(diag.clone());
                    new_row.push(f_d.clone());
                    rows.push(new_row.clone());
                    let res = self.dfs(phase, phase_start, &new_cols, rows);
                    rows.pop();
                    if res.is_some() {
                        return res;
                    }
                }
                if !od.advance() {
                    break;
                }
            }
        }
        None
    }

    fn run(mut self, domain: Domain) -> Verdict {
        let (phase, need_anchor) = match domain {
            Domain::Finite => (Phase::Rows, true),
            Domain::Natural => (Phase::ZeroToInf, true),
            Domain::Integer => (Phase::MinToPast, false),
        };
        // the anchor atom must be realizable as some row's diagonal
        if !self
            .diagonals
            .iter()
            .any(|d| d.satisfies(self.ct.root()))
        {
            return Verdict {
                outcome: if self.diag_capped {
                    Outcome::Unknown
                } else {
                    Outcome::Unsat
                },
                stats: self.stats,
            };
        }
        // iterative deepening over the row budget: shallow witnesses are
        // common, and each pass is cheap relative to a full-depth wander
        let max_rows = self.budgets.max_rows;
        let mut depth = 2.min(max_rows.max(1));
        loop {
            self.budgets.max_rows = depth;
            self.memo.clear();
            self.truncated = self.diag_capped;
            for di in 0..self.diagonals.len() {
                let f_d = self.diagonals[di].clone();
                if need_anchor {
                    if !f_d.satisfies(self.ct.root()) {
                        continue;
                    }
                    // row 0's ◇_l-requests must be fulfilled by the row itself
                    let ok = f_d
                        .req_l()
                        .iter_ones()
                        .all(|i| f_d.satisfies(self.ct.diamond_operand(i as u32)));
                    if !ok {
                        continue;
                    }
                }
                let start = self.diag_state(&f_d);
                if self.hopeless(&start) {
                    continue;
                }
                let cols = vec![start];
                let mut rows = vec![vec![f_d]];
                if let Some(w) = self.dfs(&phase, 0, &cols, &mut rows) {
                    return Verdict {
                        outcome: Outcome::Sat(w),
                        stats: self.stats,
                    };
                }
                if self.stats.nodes > self.budgets.max_nodes {
                    break;
                }
            }
            if self.stats.nodes > self.budgets.max_nodes {
                return Verdict {
                    outcome: Outcome::Unknown,
                    stats: self.stats,
                };
            }
            if !self.truncated {
                return Verdict {
                    outcome: Outcome::Unsat,
                    stats: self.stats,
                };
            }
            if depth >= max_rows {
                return Verdict {
                    outcome: Outcome::Unknown,
                    stats: self.stats,
                };
            }
            depth = (depth * 2).min(max_rows);
        }
    }
}

fn solve(f: &Formula, budgets: Budgets, opts: EngineOptions, domain: Domain) -> Verdict {
    let feature = anchored(f);
    let ct = ClosureTable::build(&feature);
    Search::new(&ct, &feature, budgets, opts).run(domain)
}

pub fn sat_finite(f: &Formula, budgets: Budgets) -> Verdict {
    solve(f, budgets, EngineOptions::default(), Domain::Finite)
}

pub fn sat_natural(f: &Formula, budgets: Budgets) -> Verdict {
    solve(f, budgets, EngineOptions::default(), Domain::Natural)
}

pub fn sat_integer(f: &Formula, budgets: Budgets) -> Verdict {
    solve(f, budgets, EngineOptions::default(), Domain::Integer)
}

#[doc(hidden)]
pub fn sat_finite_with(f: &Formula, budgets: Budgets, opts: EngineOptions) -> Verdict {
    solve(f, budgets, opts, Domain::Finite)
}

#[doc(hidden)]
pub fn sat_natural_with(f: &Formula, budgets: Budgets, opts: EngineOptions) -> Verdict {
    solve(f, budgets, opts, Domain::Natural)
}

#[doc(hidden)]
pub fn sat_integer_with(f: &Formula, budgets: Budgets, opts: EngineOptions) -> Verdict {
    solve(f, budgets, opts, Domain::Integer)
}
