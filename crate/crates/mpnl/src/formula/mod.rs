//! MPNL formula AST, concrete syntax, desugaring and the model-encoding
//! translations.

mod bounds;
mod closure;
mod parse;
mod translate;

pub use bounds::{bounds, BoundReport, BoundValue};
pub use closure::{ClosureTable, Entry, Lit};
pub use parse::{parse, ParseError};
pub use translate::{translate_finite, translate_natural, TranslateError, RESERVED_PROPS};

use std::fmt;

/// An MPNL formula. The first six variants form the core grammar; the
/// remaining ones are surface sugar removed by [`Formula::desugar`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Prop(String),
    LenLt(u64),
    Neg(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    DiamondR(Box<Formula>),
    DiamondL(Box<Formula>),
    // surface forms
    And(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    BoxR(Box<Formula>),
    BoxL(Box<Formula>),
    LenLe(u64),
    LenEq(u64),
    LenGe(u64),
    LenGt(u64),
    Pi,
    True,
    False,
}

impl Formula {
    pub fn prop(name: &str) -> Formula {
        Formula::Prop(name.to_string())
    }

    pub fn neg(f: Formula) -> Formula {
        Formula::Neg(Box::new(f))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn diamond_r(f: Formula) -> Formula {
        Formula::DiamondR(Box::new(f))
    }

    pub fn diamond_l(f: Formula) -> Formula {
        Formula::DiamondL(Box::new(f))
    }

    pub fn box_r(f: Formula) -> Formula {
        Formula::BoxR(Box::new(f))
    }

    pub fn box_l(f: Formula) -> Formula {
        Formula::BoxL(Box::new(f))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(
            Formula::implies(a.clone(), b.clone()),
            Formula::implies(b, a),
        )
    }

    /// True iff only the six core constructors occur.
    pub fn is_core(&self) -> bool {
        match self {
            Formula::Prop(_) | Formula::LenLt(_) => true,
            Formula::Neg(c) | Formula::DiamondR(c) | Formula::DiamondL(c) => c.is_core(),
            Formula::Or(a, b) => a.is_core() && b.is_core(),
            _ => false,
        }
    }

    /// Rewrites surface forms into the core grammar. Double negations are
    /// kept as written; identification happens in closure construction.
    pub fn desugar(&self) -> Formula {
        match self {
            Formula::Prop(p) => Formula::Prop(p.clone()),
            Formula::LenLt(k) => Formula::LenLt(*k),
            Formula::Neg(c) => Formula::neg(c.desugar()),
            Formula::Or(a, b) => Formula::or(a.desugar(), b.desugar()),
            Formula::DiamondR(c) => Formula::diamond_r(c.desugar()),
            Formula::DiamondL(c) => Formula::diamond_l(c.desugar()),
            // α∧β ↦ ¬(¬α∨¬β)
            Formula::And(a, b) => {
                Formula::neg(Formula::or(Formula::neg(a.desugar()), Formula::neg(b.desugar())))
            }
            // α→β ↦ ¬α∨β
            Formula::Implies(a, b) => Formula::or(Formula::neg(a.desugar()), b.desugar()),
            // [r]ψ ↦ ¬◇_r¬ψ
            Formula::BoxR(c) => Formula::neg(Formula::diamond_r(Formula::neg(c.desugar()))),
            Formula::BoxL(c) => Formula::neg(Formula::diamond_l(Formula::neg(c.desugar()))),
            Formula::LenLe(k) => Formula::LenLt(k + 1),
            // len=k ↦ len<k+1 ∧ ¬len<k
            Formula::LenEq(k) => {
                Formula::and(Formula::LenLt(k + 1), Formula::neg(Formula::LenLt(*k))).desugar()
            }
            Formula::LenGe(k) => Formula::neg(Formula::LenLt(*k)),
            Formula::LenGt(k) => Formula::neg(Formula::LenLt(k + 1)),
            Formula::Pi => Formula::LenLt(1),
            Formula::True => Formula::or(Formula::LenLt(1), Formula::neg(Formula::LenLt(1))),
            Formula::False => Formula::neg(Formula::True.desugar()),
        }
    }

    /// AST node count. The size measure |φ| is `desugar().node_count()`.
    pub fn node_count(&self) -> u64 {
        match self {
            Formula::Prop(_)
            | Formula::LenLt(_)
            | Formula::LenLe(_)
            | Formula::LenEq(_)
            | Formula::LenGe(_)
            | Formula::LenGt(_)
            | Formula::Pi
            | Formula::True
            | Formula::False => 1,
            Formula::Neg(c)
            | Formula::DiamondR(c)
            | Formula::DiamondL(c)
            | Formula::BoxR(c)
            | Formula::BoxL(c) => 1 + c.node_count(),
            Formula::Or(a, b) | Formula::And(a, b) | Formula::Implies(a, b) => {
                1 + a.node_count() + b.node_count()
            }
        }
    }

    /// All proposition names occurring in the formula.
    pub fn props(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_props(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_props(&self, out: &mut Vec<String>) {
        match self {
            Formula::Prop(p) => out.push(p.clone()),
            Formula::Neg(c)
            | Formula::DiamondR(c)
            | Formula::DiamondL(c)
            | Formula::BoxR(c)
            | Formula::BoxL(c) => c.collect_props(out),
            Formula::Or(a, b) | Formula::And(a, b) | Formula::Implies(a, b) => {
                a.collect_props(out);
                b.collect_props(out);
            }
            _ => {}
        }
    }
}

// Rendering precedence levels: higher binds tighter.
fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Implies(..) => 1,
        Formula::Or(..) => 2,
        Formula::And(..) => 3,
        Formula::Neg(_)
        | Formula::DiamondR(_)
        | Formula::DiamondL(_)
        | Formula::BoxR(_)
        | Formula::BoxL(_) => 4,
        _ => 5,
    }
}

fn render(f: &Formula, out: &mut String, parent: u8) {
    let my = prec(f);
    let need_paren = my < parent;
    if need_paren {
        out.push('(');
    }
    match f {
        Formula::Prop(p) => out.push_str(p),
        Formula::LenLt(k) => out.push_str(&format!("len<{k}")),
        Formula::LenLe(k) => out.push_str(&format!("len<={k}")),
        Formula::LenEq(k) => out.push_str(&format!("len={k}")),
        Formula::LenGe(k) => out.push_str(&format!("len>={k}")),
        Formula::LenGt(k) => out.push_str(&format!("len>{k}")),
        Formula::Pi => out.push_str("pi"),
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Neg(c) => {
            out.push('~');
            render(c, out, my);
        }
        Formula::DiamondR(c) => {
            out.push_str("<r>");
            render(c, out, my);
        }
        Formula::DiamondL(c) => {
            out.push_str("<l>");
            render(c, out, my);
        }
        Formula::BoxR(c) => {
            out.push_str("[r]");
            render(c, out, my);
        }
        Formula::BoxL(c) => {
            out.push_str("[l]");
            render(c, out, my);
        }
        Formula::Or(a, b) => {
            render(a, out, my);
            out.push_str(" | ");
            render(b, out, my + 1);
        }
        Formula::And(a, b) => {
            render(a, out, my);
            out.push_str(" & ");
            render(b, out, my + 1);
        }
        Formula::Implies(a, b) => {
            render(a, out, my);
            out.push_str(" -> ");
            render(b, out, my + 1);
        }
    }
    if need_paren {
        out.push(')');
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        render(self, &mut s, 0);
        f.write_str(&s)
    }
}

/// Expands the universal modality: the conjunction of Πψ over every box
/// prefix Π ∈ {[l],[r]}^{≤3}, the empty prefix included. Three neighborhood
/// steps reach every interval from every other over the supported orders.
pub fn universal_modality(f: &Formula) -> Formula {
    let mut conjuncts = vec![f.clone()];
    let mut frontier = vec![f.clone()];
    for _ in 0..3 {
        let mut next = Vec::new();
        for g in &frontier {
            next.push(Formula::box_l(g.clone()));
            next.push(Formula::box_r(g.clone()));
        }
        conjuncts.extend(next.iter().cloned());
        frontier = next;
    }
    let mut it = conjuncts.into_iter();
    let first = it.next().unwrap();
    it.fold(first, Formula::and)
}
