//! The closure of a formula: its sub-formulae and their negations, modulo
//! the identifications ¬¬α ≡ α and ¬◇α ≡ □¬α, indexed for bitset use.

use super::Formula;
use std::collections::HashMap;

/// A signed reference to a positive closure entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit {
    pub index: u32,
    pub positive: bool,
}

impl Lit {
    pub fn negated(self) -> Lit {
        Lit {
            index: self.index,
            positive: !self.positive,
        }
    }
}

/// A positive closure entry. Negations are represented by negative [`Lit`]s,
/// so boxes appear as negated diamond entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Entry {
    Prop(String),
    LenLt(u64),
    Or(Lit, Lit),
    DiamondR(Lit),
    DiamondL(Lit),
}

/// Indexed closure of a core-grammar formula, with the derived metric and
/// counting parameters.
#[derive(Clone, Debug)]
pub struct ClosureTable {
    entries: Vec<Entry>,
    index: HashMap<Entry, u32>,
    root: Lit,
    size_phi: u64,
    k_values: Vec<u64>,
    k_phi: u64,
    len_class_bound: u64,
    p: usize,
    f: usize,
    threshold: u64,
    diamond_r: Vec<u32>,
    diamond_l: Vec<u32>,
    lens: Vec<(u64, u32)>,
    props: Vec<u32>,
}

impl ClosureTable {
    /// Builds the closure of a core-grammar formula.
    pub fn build(formula: &Formula) -> ClosureTable {
        assert!(
            formula.is_core(),
            "closure requires a desugared core-grammar formula"
        );
        let mut ct = ClosureTable {
            entries: Vec::new(),
            index: HashMap::new(),
            root: Lit {
                index: 0,
                positive: true,
            },
            size_phi: formula.node_count(),
            k_values: Vec::new(),
            k_phi: 0,
            len_class_bound: 1,
            p: 0,
            f: 0,
            threshold: 0,
            diamond_r: Vec::new(),
            diamond_l: Vec::new(),
            lens: Vec::new(),
            props: Vec::new(),
        };
        ct.root = ct.intern(formula);
        ct.k_values = ct.lens.iter().map(|&(k, _)| k).collect();
        ct.k_values.sort_unstable();
        ct.k_values.dedup();
        ct.k_phi = ct.k_values.last().copied().unwrap_or(0);
        // The length-class ceiling is at least 1 so that the exact-length-0
        // (diagonal) class stays distinct even without metric constraints.
        ct.len_class_bound = ct.k_phi.max(1);
        ct.p = ct.diamond_l.len();
        ct.f = ct.diamond_r.len();
        ct.threshold = (ct.p * ct.f + ct.p) as u64;
        ct.lens.sort_unstable();
        ct
    }

    fn intern(&mut self, f: &Formula) -> Lit {
        match f {
            Formula::Neg(c) => self.intern(c).negated(),
            Formula::Prop(name) => self.add(Entry::Prop(name.clone())),
            Formula::LenLt(k) => self.add(Entry::LenLt(*k)),
            Formula::Or(a, b) => {
                let la = self.intern(a);
                let lb = self.intern(b);
                self.add(Entry::Or(la, lb))
            }
            Formula::DiamondR(c) => {
                let lc = self.intern(c);
                self.add(Entry::DiamondR(lc))
            }
            Formula::DiamondL(c) => {
                let lc = self.intern(c);
                self.add(Entry::DiamondL(lc))
            }
            _ => unreachable!("non-core node"),
        }
    }

    fn add(&mut self, e: Entry) -> Lit {
        if let Some(&i) = self.index.get(&e) {
            return Lit {
                index: i,
                positive: true,
            };
        }
        let i = self.entries.len() as u32;
        match &e {
            Entry::Prop(_) => self.props.push(i),
            Entry::LenLt(k) => self.lens.push((*k, i)),
            Entry::DiamondR(_) => self.diamond_r.push(i),
            Entry::DiamondL(_) => self.diamond_l.push(i),
            Entry::Or(..) => {}
        }
        self.entries.push(e.clone());
        self.index.insert(e, i);
        Lit {
            index: i,
            positive: true,
        }
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn entry(&self, i: u32) -> &Entry {
        &self.entries[i as usize]
    }

    pub fn num_entries(&self) -> usize {
        self.entries.len()
    }

    /// Root literal of the formula the table was built from.
    pub fn root(&self) -> Lit {
        self.root
    }

    pub fn size_phi(&self) -> u64 {
        self.size_phi
    }

    /// Sorted metric parameters K_φ.
    pub fn k_values(&self) -> &[u64] {
        &self.k_values
    }

    pub fn k_phi(&self) -> u64 {
        self.k_phi
    }

    /// Saturation point of length classes: max(k_φ, 1). A class h below the
    /// bound means "length exactly h"; the bound itself means "length ≥ it".
    pub fn len_class_bound(&self) -> u64 {
        self.len_class_bound
    }

    /// Number of ◇_l entries.
    pub fn p_count(&self) -> usize {
        self.p
    }

    /// Number of ◇_r entries.
    pub fn f_count(&self) -> usize {
        self.f
    }

    /// p·f + p, the count-saturation threshold of configuration equivalence.
    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn diamond_r_entries(&self) -> &[u32] {
        &self.diamond_r
    }

    pub fn diamond_l_entries(&self) -> &[u32] {
        &self.diamond_l
    }

    /// (k, entry index) pairs of the len_{<k} entries, sorted by k.
    pub fn len_entries(&self) -> &[(u64, u32)] {
        &self.lens
    }

    pub fn prop_entries(&self) -> &[u32] {
        &self.props
    }

    /// Operand literal of a diamond entry.
    pub fn diamond_operand(&self, i: u32) -> Lit {
        match self.entry(i) {
            Entry::DiamondR(l) | Entry::DiamondL(l) => *l,
            e => panic!("entry {i} is not a diamond: {e:?}"),
        }
    }

    /// Looks a core-grammar formula up in the closure.
    pub fn lookup(&self, f: &Formula) -> Option<Lit> {
        match f {
            Formula::Neg(c) => self.lookup(c).map(Lit::negated),
            Formula::Prop(name) => self
                .index
                .get(&Entry::Prop(name.clone()))
                .map(|&i| Lit { index: i, positive: true }),
            Formula::LenLt(k) => self
                .index
                .get(&Entry::LenLt(*k))
                .map(|&i| Lit { index: i, positive: true }),
            Formula::Or(a, b) => {
                let la = self.lookup(a)?;
                let lb = self.lookup(b)?;
                self.index
                    .get(&Entry::Or(la, lb))
                    .map(|&i| Lit { index: i, positive: true })
            }
            Formula::DiamondR(c) => {
                let lc = self.lookup(c)?;
                self.index
                    .get(&Entry::DiamondR(lc))
                    .map(|&i| Lit { index: i, positive: true })
            }
            Formula::DiamondL(c) => {
                let lc = self.lookup(c)?;
                self.index
                    .get(&Entry::DiamondL(lc))
                    .map(|&i| Lit { index: i, positive: true })
            }
            _ => None,
        }
    }

    /// Reconstructs the formula of a positive entry.
    pub fn entry_formula(&self, i: u32) -> Formula {
        match self.entry(i) {
            Entry::Prop(name) => Formula::Prop(name.clone()),
            Entry::LenLt(k) => Formula::LenLt(*k),
            Entry::Or(a, b) => Formula::or(self.lit_formula(*a), self.lit_formula(*b)),
            Entry::DiamondR(c) => Formula::diamond_r(self.lit_formula(*c)),
            Entry::DiamondL(c) => Formula::diamond_l(self.lit_formula(*c)),
        }
    }

    pub fn lit_formula(&self, l: Lit) -> Formula {
        let f = self.entry_formula(l.index);
        if l.positive {
            f
        } else {
            Formula::neg(f)
        }
    }

    /// Rendered form of a literal, e.g. `<r>p` or `~p`.
    pub fn lit_string(&self, l: Lit) -> String {
        self.lit_formula(l).to_string()
    }
}
