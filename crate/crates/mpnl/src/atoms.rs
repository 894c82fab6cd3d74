//! Atoms: maximal locally consistent sign assignments over a closure, their
//! observable/request components, the meets-compatibility relation and
//! constraint-driven enumeration.

use crate::bits::Bits;
use crate::formula::{ClosureTable, Entry, Lit};
use std::cmp::Ordering;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AtomError {
    #[error("disjunction entry {0} disagrees with its operands")]
    OrCondition(u32),
    #[error("length entries are not downward closed at k={0}")]
    LenCondition(u64),
}

/// A sign assignment over the positive closure entries. Request and
/// observable sets are precomputed; bits in them sit at diamond-entry
/// indices.
#[derive(Clone, Debug)]
pub struct Atom {
    signs: Bits,
    obs_r: Bits,
    obs_l: Bits,
    req_r: Bits,
    req_l: Bits,
}

impl PartialEq for Atom {
    fn eq(&self, other: &Self) -> bool {
        self.signs == other.signs
    }
}
impl Eq for Atom {}

impl std::hash::Hash for Atom {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.signs.hash(state);
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        self.signs.cmp(&other.signs)
    }
}
impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Atom {
    /// Validates the local-consistency conditions and precomputes the
    /// component sets.
    pub fn new(ct: &ClosureTable, signs: Bits) -> Result<Atom, AtomError> {
        for (i, e) in ct.entries().iter().enumerate() {
            if let Entry::Or(a, b) = e {
                let va = signs.get(a.index as usize) == a.positive;
                let vb = signs.get(b.index as usize) == b.positive;
                if signs.get(i) != (va || vb) {
                    return Err(AtomError::OrCondition(i as u32));
                }
            }
        }
        // len_{<k} positive must imply len_{<k'} positive for k' > k
        let lens = ct.len_entries();
        for w in lens.windows(2) {
            let (k_lo, i_lo) = w[0];
            let (_, i_hi) = w[1];
            if signs.get(i_lo as usize) && !signs.get(i_hi as usize) {
                return Err(AtomError::LenCondition(k_lo));
            }
        }
        let n = ct.num_entries();
        let mut obs_r = Bits::empty(n);
        let mut req_r = Bits::empty(n);
        for &i in ct.diamond_r_entries() {
            let op = ct.diamond_operand(i);
            if signs.get(op.index as usize) == op.positive {
                obs_r.set(i as usize, true);
            }
            if signs.get(i as usize) {
                req_r.set(i as usize, true);
            }
        }
        let mut obs_l = Bits::empty(n);
        let mut req_l = Bits::empty(n);
        for &i in ct.diamond_l_entries() {
            let op = ct.diamond_operand(i);
            if signs.get(op.index as usize) == op.positive {
                obs_l.set(i as usize, true);
            }
            if signs.get(i as usize) {
                req_l.set(i as usize, true);
            }
        }
        Ok(Atom {
            signs,
            obs_r,
            obs_l,
            req_r,
            req_l,
        })
    }

    pub fn signs(&self) -> &Bits {
        &self.signs
    }

    /// Whether the atom makes a literal true.
    pub fn satisfies(&self, l: Lit) -> bool {
        self.signs.get(l.index as usize) == l.positive
    }

    pub fn contains_entry(&self, i: u32) -> bool {
        self.signs.get(i as usize)
    }

    /// (Obs_r, Obs_l, Req_r, Req_l), each as a set of diamond entries.
    pub fn components(&self) -> (&Bits, &Bits, &Bits, &Bits) {
        (&self.obs_r, &self.obs_l, &self.req_r, &self.req_l)
    }

    pub fn obs_r(&self) -> &Bits {
        &self.obs_r
    }
    pub fn obs_l(&self) -> &Bits {
        &self.obs_l
    }
    pub fn req_r(&self) -> &Bits {
        &self.req_r
    }
    pub fn req_l(&self) -> &Bits {
        &self.req_l
    }

    /// Whether the atom is admissible for a meeting pair: self at [x,y],
    /// `next` at [y,z].
    pub fn leads_to(&self, next: &Atom) -> bool {
        next.obs_r.is_subset(&self.req_r) && self.obs_l.is_subset(&next.req_l)
    }

    /// Whether the sign pattern of the len entries matches length class `h`
    /// (`h` = the class bound means "length ≥ bound").
    pub fn compatible_length(&self, ct: &ClosureTable, h: u64) -> bool {
        debug_assert!(h <= ct.len_class_bound());
        ct.len_entries().iter().all(|&(k, i)| {
            let expect = h < ct.len_class_bound() && h < k;
            self.signs.get(i as usize) == expect
        })
    }

    /// Sorted signed formula strings, the JSON form of the atom.
    pub fn render(&self, ct: &ClosureTable) -> Vec<String> {
        let mut out: Vec<String> = (0..ct.num_entries() as u32)
            .map(|i| {
                ct.lit_string(Lit {
                    index: i,
                    positive: self.signs.get(i as usize),
                })
            })
            .collect();
        out.sort();
        out
    }
}

/// Constraints for [`generate_atoms`]. All sets are bitsets over diamond
/// entry indices; `must` is a list of literals the atom has to satisfy.
#[derive(Clone, Default)]
pub struct AtomConstraints {
    pub req_r: Option<Bits>,
    pub req_l: Option<Bits>,
    pub obs_r_within: Option<Bits>,
    pub obs_l_within: Option<Bits>,
    pub length_class: Option<u64>,
    pub must: Vec<Lit>,
    /// Restrict to atoms F with F →_R F (Obs_r ⊆ Req_r and Obs_l ⊆ Req_l),
    /// the shape of every diagonal label. Propagated during generation:
    /// filtering after the fact is hopeless on large closures.
    pub self_leading: bool,
}

/// Lazy enumeration of the atoms satisfying the constraints, in canonical
/// order (lexicographic over sign vectors, negative before positive).
pub struct AtomIter<'a> {
    ct: &'a ClosureTable,
    stack: Vec<Vec<Option<bool>>>,
    self_leading: bool,
}

fn force(assign: &mut [Option<bool>], i: usize, v: bool) -> bool {
    match assign[i] {
        Some(cur) => cur == v,
        None => {
            assign[i] = Some(v);
            true
        }
    }
}

fn lit_value(assign: &[Option<bool>], l: Lit) -> Option<bool> {
    assign[l.index as usize].map(|v| v == l.positive)
}

fn force_lit(assign: &mut [Option<bool>], l: Lit, v: bool) -> bool {
    force(assign, l.index as usize, v == l.positive)
}

/// Unit propagation of the disjunction and length-chain conditions.
/// Returns false on conflict.
fn propagate(ct: &ClosureTable, assign: &mut [Option<bool>], self_leading: bool) -> bool {
    loop {
        let mut changed = false;
        for (i, e) in ct.entries().iter().enumerate() {
            if let Entry::Or(a, b) = e {
                let va = lit_value(assign, *a);
                let vb = lit_value(assign, *b);
                let ve = assign[i];
                let forced = match (va, vb) {
                    (Some(true), _) | (_, Some(true)) => Some(true),
                    (Some(false), Some(false)) => Some(false),
                    _ => None,
                };
                if let Some(v) = forced {
                    if ve.is_none() {
                        assign[i] = Some(v);
                        changed = true;
                    } else if ve != Some(v) {
                        return false;
                    }
                }
                match assign[i] {
                    Some(false) => {
                        for l in [*a, *b] {
                            match lit_value(assign, l) {
                                Some(true) => return false,
                                Some(false) => {}
                                None => {
                                    if !force_lit(assign, l, false) {
                                        return false;
                                    }
                                    changed = true;
                                }
                            }
                        }
                    }
                    Some(true) => {
                        // one operand known false pins the other
                        if va == Some(false) && vb.is_none() {
                            if !force_lit(assign, *b, true) {
                                return false;
                            }
                            changed = true;
                        } else if vb == Some(false) && va.is_none() {
                            if !force_lit(assign, *a, true) {
                                return false;
                            }
                            changed = true;
                        }
                    }
                    None => {}
                }
            }
        }
        let lens = ct.len_entries();
        for w in lens.windows(2) {
            let (_, i_lo) = w[0];
            let (_, i_hi) = w[1];
            if assign[i_lo as usize] == Some(true) && assign[i_hi as usize] != Some(true) {
                if assign[i_hi as usize] == Some(false) {
                    return false;
                }
                assign[i_hi as usize] = Some(true);
                changed = true;
            }
            if assign[i_hi as usize] == Some(false) && assign[i_lo as usize] != Some(false) {
                if assign[i_lo as usize] == Some(true) {
                    return false;
                }
                assign[i_lo as usize] = Some(false);
                changed = true;
            }
        }
        if self_leading {
            // obs ⊆ req as implications: operand true forces the diamond
            // entry true, diamond entry false forces the operand false
            for &i in ct
                .diamond_r_entries()
                .iter()
                .chain(ct.diamond_l_entries().iter())
            {
                let op = ct.diamond_operand(i);
                match (lit_value(assign, op), assign[i as usize]) {
                    (Some(true), Some(false)) => return false,
                    (Some(true), None) => {
                        assign[i as usize] = Some(true);
                        changed = true;
                    }
                    (None, Some(false)) => {
                        if !force_lit(assign, op, false) {
                            return false;
                        }
                        changed = true;
                    }
                    _ => {}
                }
            }
        }
        if !changed {
            return true;
        }
    }
}

/// Enumerates atoms of `ct` satisfying `constraints`, lazily, by
/// backtracking over sign assignments.
pub fn generate_atoms<'a>(ct: &'a ClosureTable, constraints: &AtomConstraints) -> AtomIter<'a> {
    let n = ct.num_entries();
    let mut assign: Vec<Option<bool>> = vec![None; n];
    let mut ok = true;

    if let Some(req) = &constraints.req_r {
        for &i in ct.diamond_r_entries() {
            ok &= force(&mut assign, i as usize, req.get(i as usize));
        }
    }
    if let Some(req) = &constraints.req_l {
        for &i in ct.diamond_l_entries() {
            ok &= force(&mut assign, i as usize, req.get(i as usize));
        }
    }
    if let Some(within) = &constraints.obs_r_within {
        for &i in ct.diamond_r_entries() {
            if !within.get(i as usize) {
                ok &= force_lit(&mut assign, ct.diamond_operand(i), false);
            }
        }
    }
    if let Some(within) = &constraints.obs_l_within {
        for &i in ct.diamond_l_entries() {
            if !within.get(i as usize) {
                ok &= force_lit(&mut assign, ct.diamond_operand(i), false);
            }
        }
    }
    if let Some(h) = constraints.length_class {
        for &(k, i) in ct.len_entries() {
            let expect = h < ct.len_class_bound() && h < k;
            ok &= force(&mut assign, i as usize, expect);
        }
    }
    for &l in &constraints.must {
        ok &= force_lit(&mut assign, l, true);
    }

    let mut stack = Vec::new();
    if ok && propagate(ct, &mut assign, constraints.self_leading) {
        stack.push(assign);
    }
    AtomIter {
        ct,
        stack,
        self_leading: constraints.self_leading,
    }
}

impl<'a> Iterator for AtomIter<'a> {
    type Item = Atom;

    fn next(&mut self) -> Option<Atom> {
        while let Some(assign) = self.stack.pop() {
            match assign.iter().position(|v| v.is_none()) {
                None => {
                    let n = self.ct.num_entries();
                    let mut signs = Bits::empty(n);
                    for (i, v) in assign.iter().enumerate() {
                        signs.set(i, v.unwrap());
                    }
                    let atom = Atom::new(self.ct, signs)
                        .expect("propagation admitted an inconsistent assignment");
                    return Some(atom);
                }
                Some(i) => {
                    // push true first so the false branch is explored first
                    for v in [true, false] {
                        let mut next = assign.clone();
                        next[i] = Some(v);
                        if propagate(self.ct, &mut next, self.self_leading) {
                            self.stack.push(next);
                        }
                    }
                }
            }
        }
        None
    }
}

/// All atoms, unconstrained.
pub fn all_atoms(ct: &ClosureTable) -> Vec<Atom> {
    generate_atoms(ct, &AtomConstraints::default()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, ClosureTable};

    fn table(src: &str) -> ClosureTable {
        ClosureTable::build(&parse(src).unwrap().desugar())
    }

    /// Reference enumeration: filter every sign vector through `Atom::new`.
    fn atoms_by_filtering(ct: &ClosureTable) -> Vec<Atom> {
        let n = ct.num_entries();
        assert!(n <= 20);
        let mut out = Vec::new();
        for mask in 0u32..(1 << n) {
            let mut signs = Bits::empty(n);
            for i in 0..n {
                signs.set(i, mask & (1 << i) != 0);
            }
            if let Ok(a) = Atom::new(ct, signs) {
                out.push(a);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn diamond_r_p_has_four_atoms() {
        let ct = table("<r>p");
        let atoms = all_atoms(&ct);
        assert_eq!(atoms.len(), 4);
    }

    #[test]
    fn len_conjunction_has_three_atoms() {
        // desugared len<1 ∧ len<2: condition 3 kills the +- combination and
        // the or-node sign is forced
        let ct = table("len<1 & len<2");
        assert_eq!(all_atoms(&ct).len(), 3);
    }

    #[test]
    fn contradictory_must_contain_is_empty() {
        let ct = table("<r>p");
        let p = ct.lookup(&parse("p").unwrap()).unwrap();
        let cons = AtomConstraints {
            must: vec![p, p.negated()],
            ..Default::default()
        };
        assert_eq!(generate_atoms(&ct, &cons).count(), 0);
    }

    #[test]
    fn generation_matches_filtering() {
        for src in ["<r>p", "len<1 & len<2", "<l>(p | q) & [r]p", "~(p & len<2) | <r>len<1"] {
            let ct = table(src);
            let gen = all_atoms(&ct);
            let filt = atoms_by_filtering(&ct);
            assert_eq!(gen, filt, "mismatch for {src}");
            // canonical ascending order
            let mut sorted = gen.clone();
            sorted.sort();
            assert_eq!(gen, sorted);
            assert!(gen.len() as u64 <= 1 << ct.size_phi());
        }
    }

    #[test]
    fn components_on_the_four_atoms() {
        let ct = table("<r>p");
        let dr = ct.lookup(&parse("<r>p").unwrap()).unwrap();
        let p = ct.lookup(&parse("p").unwrap()).unwrap();
        let mk = |with_dr: bool, with_p: bool| {
            let mut signs = Bits::empty(2);
            signs.set(dr.index as usize, with_dr);
            signs.set(p.index as usize, with_p);
            Atom::new(&ct, signs).unwrap()
        };
        let f1 = mk(true, true); // {◇_r p, p}
        let f3 = mk(false, true); // {□_r¬p, p}
        let f4 = mk(false, false); // {□_r¬p, ¬p}
        let (obs_r, obs_l, req_r, req_l) = f1.components();
        assert_eq!(obs_r.iter_ones().collect::<Vec<_>>(), vec![dr.index as usize]);
        assert!(obs_l.is_empty() && req_l.is_empty());
        assert_eq!(req_r.iter_ones().collect::<Vec<_>>(), vec![dr.index as usize]);
        let (o, _, r, _) = f4.components();
        assert!(o.is_empty() && r.is_empty());
        // →_R is not symmetric
        assert!(f1.leads_to(&f3));
        assert!(!f3.leads_to(&f1));
        assert!(f4.leads_to(&f4));
    }

    #[test]
    fn length_compatibility_classes() {
        // K = {1,3}
        let ct = table("len<1 | ~len<3");
        let l1 = ct.lookup(&parse("len<1").unwrap()).unwrap();
        let l3 = ct.lookup(&parse("len<3").unwrap()).unwrap();
        let atom_with = |s1: bool, s3: bool| {
            let cons = AtomConstraints {
                must: vec![
                    if s1 { l1 } else { l1.negated() },
                    if s3 { l3 } else { l3.negated() },
                ],
                ..Default::default()
            };
            generate_atoms(&ct, &cons).next().unwrap()
        };
        let short = atom_with(true, true);
        assert!((0..=3).filter(|&h| short.compatible_length(&ct, h)).eq(0..=0));
        let mid = atom_with(false, true);
        assert!((0..=3).filter(|&h| mid.compatible_length(&ct, h)).eq(1..=2));
        let long = atom_with(false, false);
        assert!((0..=3).filter(|&h| long.compatible_length(&ct, h)).eq(3..=3));
    }

    #[test]
    fn every_atom_has_a_length_class() {
        for src in ["len<1 & len<2", "<r>len<2 | ~len<1", "p"] {
            let ct = table(src);
            for a in all_atoms(&ct) {
                assert!(
                    (0..=ct.len_class_bound()).any(|h| a.compatible_length(&ct, h)),
                    "atom without length class for {src}"
                );
            }
        }
    }

    #[test]
    fn render_is_sorted_signed_strings() {
        let ct = table("<r>p");
        let a = all_atoms(&ct).pop().unwrap();
        let r = a.render(&ct);
        assert_eq!(r.len(), 2);
        let mut s = r.clone();
        s.sort();
        assert_eq!(r, s);
    }
}
