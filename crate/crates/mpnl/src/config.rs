//! Marking of compass columns, row counting configurations and their
//! equivalence up to the count-saturation threshold.

use crate::atoms::Atom;
use crate::bits::Bits;
use crate::formula::ClosureTable;
use crate::semantics::CompassStructure;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("merge would produce two length-0 column states")]
    TwoDiagonals,
}

/// The marked atom of a column at a row: the atom, the column's pending
/// ◇_r-requests, the column's diagonal right-request set, and the length
/// class (saturated at the closure's class bound).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColumnState {
    pub atom: Atom,
    pub psi: Bits,
    pub r: Bits,
    pub h: u64,
}

impl ColumnState {
    /// Violations of the state invariants, as human-readable strings.
    pub fn audit(&self, ct: &ClosureTable) -> Vec<String> {
        let mut out = Vec::new();
        if !self.psi.is_subset(&self.r) {
            out.push("Ψ ⊄ R".to_string());
        }
        let mut all_dr = Bits::empty(ct.num_entries());
        for &i in ct.diamond_r_entries() {
            all_dr.set(i as usize, true);
        }
        if !self.r.is_subset(&all_dr) {
            out.push("R contains a non-◇_r entry".to_string());
        }
        if !self.atom.compatible_length(ct, self.h) {
            out.push(format!("atom incompatible with length class {}", self.h));
        }
        if self.h == 0 {
            if self.r != *self.atom.req_r() {
                out.push("h = 0 but R ≠ Req_r(F)".to_string());
            }
            let expect: Vec<usize> = self
                .r
                .iter_ones()
                .filter(|&i| !self.atom.satisfies(ct.diamond_operand(i as u32)))
                .collect();
            if self.psi.iter_ones().collect::<Vec<_>>() != expect {
                out.push("h = 0 but Ψ ≠ R \\ F".to_string());
            }
        }
        out
    }

    pub fn to_json(&self, ct: &ClosureTable) -> serde_json::Value {
        let ops = |b: &Bits| -> Vec<String> {
            let mut v: Vec<String> = b
                .iter_ones()
                .map(|i| ct.lit_string(ct.diamond_operand(i as u32)))
                .collect();
            v.sort();
            v
        };
        serde_json::json!({
            "atom": self.atom.render(ct),
            "psi": ops(&self.psi),
            "r": ops(&self.r),
            "h": self.h,
        })
    }
}

/// Computes 𝓜(x,y) on a compass structure.
pub fn mark(g: &CompassStructure, ct: &ClosureTable, x: i64, y: i64) -> ColumnState {
    let atom = g.label(x, y).clone();
    let r = g.label(x, x).req_r().clone();
    let mut psi = Bits::empty(ct.num_entries());
    for i in r.iter_ones() {
        let op = ct.diamond_operand(i as u32);
        if !(x..=y).any(|y2| g.label(x, y2).satisfies(op)) {
            psi.set(i, true);
        }
    }
    let h = ((y - x) as u64).min(ct.len_class_bound());
    ColumnState { atom, psi, r, h }
}

/// A horizontal configuration: the multiset of column states on a row.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RowConfig {
    counts: BTreeMap<ColumnState, u64>,
}

impl RowConfig {
    pub fn new() -> RowConfig {
        RowConfig::default()
    }

    pub fn add(&mut self, state: ColumnState, count: u64) {
        if count > 0 {
            *self.counts.entry(state).or_insert(0) += count;
        }
    }

    pub fn count(&self, state: &ColumnState) -> u64 {
        self.counts.get(state).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ColumnState, u64)> {
        self.counts.iter().map(|(s, &c)| (s, c))
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Support of the counting function: states with positive count.
    pub fn ma_set(&self) -> Vec<&ColumnState> {
        self.counts.keys().collect()
    }

    pub fn ma_subset(&self, other: &RowConfig) -> bool {
        self.counts.keys().all(|s| other.counts.contains_key(s))
    }

    /// Pointwise sum. At most one operand may carry an h = 0 state.
    pub fn merge(&self, other: &RowConfig) -> Result<RowConfig, ConfigError> {
        let mine = self.counts.keys().filter(|s| s.h == 0).count();
        let theirs = other.counts.keys().filter(|s| s.h == 0).count();
        if mine + theirs > 1 {
            return Err(ConfigError::TwoDiagonals);
        }
        let mut out = self.clone();
        for (s, &c) in &other.counts {
            out.add(s.clone(), c);
        }
        Ok(out)
    }

    /// Violations of the row invariants: unique h = 0 state with count 1,
    /// at most one column per exact length class, contiguous classes.
    pub fn audit(&self, ct: &ClosureTable) -> Vec<String> {
        let mut out = Vec::new();
        for (s, _) in self.iter() {
            for v in s.audit(ct) {
                out.push(format!("state (h={}): {v}", s.h));
            }
        }
        let bound = ct.len_class_bound();
        let zero: Vec<_> = self.iter().filter(|(s, _)| s.h == 0).collect();
        if zero.len() != 1 || zero[0].1 != 1 {
            out.push("h = 0 state is not unique with count 1".to_string());
        }
        let mut per_h = vec![0u64; bound as usize + 1];
        for (s, c) in self.iter() {
            per_h[s.h as usize] += c;
        }
        for (h, &c) in per_h.iter().enumerate().take(bound as usize).skip(1) {
            if c > 1 {
                out.push(format!("length class {h} holds {c} columns"));
            }
        }
        for h in 1..per_h.len() {
            if per_h[h - 1] == 0 && per_h[h] > 0 {
                out.push(format!("class gap below {h}"));
            }
        }
        out
    }

    pub fn to_json(&self, ct: &ClosureTable) -> serde_json::Value {
        let items: Vec<serde_json::Value> = self
            .iter()
            .map(|(s, c)| serde_json::json!({ "state": s.to_json(ct), "count": c }))
            .collect();
        serde_json::Value::Array(items)
    }
}

/// The configuration of row y of a compass structure.
pub fn row_configuration(g: &CompassStructure, ct: &ClosureTable, y: i64) -> RowConfig {
    let mut c = RowConfig::new();
    for x in g.lo()..=y {
        c.add(mark(g, ct, x, y), 1);
    }
    c
}

/// Configuration equivalence: counts equal pointwise, except that
/// saturated-length states on both sides at or above the threshold are
/// interchangeable.
pub fn equivalent(a: &RowConfig, b: &RowConfig, ct: &ClosureTable) -> bool {
    let bound = ct.len_class_bound();
    let thr = ct.threshold();
    a.counts
        .keys()
        .chain(b.counts.keys())
        .all(|s| {
            let (ca, cb) = (a.count(s), b.count(s));
            ca == cb || (s.h == bound && ca >= thr && cb >= thr)
        })
}
