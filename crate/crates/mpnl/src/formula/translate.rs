//! Encodings of finite and ℕ satisfiability as satisfiability over ℤ,
//! marking the encoded model with the reserved propositions `sharp_all`
//! (the full-domain interval) and `sharp` (its subintervals).

use super::{universal_modality, Formula};
use thiserror::Error;

pub const RESERVED_PROPS: [&str; 2] = ["sharp_all", "sharp"];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TranslateError {
    #[error("formula uses reserved proposition `{0}`")]
    ReservedProposition(String),
}

fn sharp() -> Formula {
    Formula::prop("sharp")
}

fn sharp_all() -> Formula {
    Formula::prop("sharp_all")
}

/// Relativizes a core-grammar formula to the marked subinterval region.
fn tr(f: &Formula) -> Formula {
    match f {
        Formula::Prop(_) | Formula::LenLt(_) => Formula::and(f.clone(), sharp()),
        Formula::Neg(c) => Formula::or(Formula::neg(sharp()), Formula::neg(tr(c))),
        Formula::Or(a, b) => Formula::or(tr(a), tr(b)),
        Formula::DiamondR(c) => Formula::diamond_r(Formula::and(sharp(), tr(c))),
        Formula::DiamondL(c) => Formula::diamond_l(Formula::and(sharp(), tr(c))),
        _ => unreachable!("tr requires a core-grammar formula"),
    }
}

fn check_reserved(f: &Formula) -> Result<(), TranslateError> {
    for p in f.props() {
        if RESERVED_PROPS.contains(&p.as_str()) {
            return Err(TranslateError::ReservedProposition(p));
        }
    }
    Ok(())
}

/// `sharp_all` holds over exactly one interval and `sharp` over exactly its
/// subintervals.
fn psi_fin() -> Formula {
    let not_pi = Formula::neg(Formula::Pi);
    let not_all = Formula::neg(sharp_all());
    let frame = [
        sharp_all(),
        sharp(),
        Formula::box_r(Formula::box_l(Formula::and(
            not_pi.clone(),
            Formula::box_l(not_all.clone()),
        ))),
        Formula::box_l(Formula::box_r(Formula::and(
            not_pi.clone(),
            Formula::box_r(not_all.clone()),
        ))),
        Formula::box_r(Formula::and(
            not_pi.clone(),
            Formula::box_r(Formula::box_l(not_all.clone())),
        )),
        Formula::box_l(Formula::and(
            not_pi,
            Formula::box_l(Formula::box_r(not_all)),
        )),
    ];
    let subinterval = Formula::or(
        Formula::or(
            Formula::or(
                sharp_all(),
                Formula::diamond_r(Formula::diamond_l(sharp_all())),
            ),
            Formula::diamond_l(Formula::diamond_r(sharp_all())),
        ),
        Formula::and(
            Formula::diamond_r(Formula::diamond_r(Formula::diamond_l(sharp_all()))),
            Formula::diamond_l(Formula::diamond_l(Formula::diamond_r(sharp_all()))),
        ),
    );
    let characterization = universal_modality(&Formula::iff(sharp(), subinterval));
    frame
        .into_iter()
        .chain(std::iter::once(characterization))
        .reduce(Formula::and)
        .unwrap()
}

/// `sharp` marks a right-unbounded, left-bounded region.
fn psi_nat() -> Formula {
    let body = Formula::implies(
        Formula::and(Formula::neg(sharp()), Formula::diamond_r(sharp())),
        Formula::and(
            Formula::box_r(sharp()),
            Formula::box_r(Formula::box_r(sharp())),
        ),
    );
    Formula::and(
        Formula::and(
            Formula::and(sharp(), Formula::box_l(Formula::neg(sharp()))),
            Formula::box_l(Formula::box_l(Formula::neg(sharp()))),
        ),
        universal_modality(&body),
    )
}

fn anchor(tr_f: Formula) -> Formula {
    Formula::diamond_l(Formula::diamond_r(Formula::diamond_r(tr_f)))
}

/// `f` has a finite model iff the result has a model over ℤ.
pub fn translate_finite(f: &Formula) -> Result<Formula, TranslateError> {
    check_reserved(f)?;
    Ok(Formula::and(psi_fin(), anchor(tr(&f.desugar()))))
}

/// `f` has a model over ℕ iff the result has a model over ℤ.
pub fn translate_natural(f: &Formula) -> Result<Formula, TranslateError> {
    check_reserved(f)?;
    Ok(Formula::and(psi_nat(), anchor(tr(&f.desugar()))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    #[test]
    fn tr_of_prop() {
        assert_eq!(
            tr(&Formula::prop("p")),
            Formula::and(Formula::prop("p"), sharp())
        );
    }

    #[test]
    fn tr_of_diamond_recurses() {
        let got = tr(&Formula::diamond_r(Formula::prop("p")));
        let want = Formula::diamond_r(Formula::and(
            sharp(),
            Formula::and(Formula::prop("p"), sharp()),
        ));
        assert_eq!(got, want);
    }

    #[test]
    fn tr_of_negation() {
        let got = tr(&Formula::neg(Formula::prop("p")));
        let want = Formula::or(
            Formula::neg(sharp()),
            Formula::neg(Formula::and(Formula::prop("p"), sharp())),
        );
        assert_eq!(got, want);
    }

    #[test]
    fn reserved_props_rejected() {
        let f = parse("sharp & p").unwrap();
        assert_eq!(
            translate_finite(&f),
            Err(TranslateError::ReservedProposition("sharp".into()))
        );
    }

    #[test]
    fn natural_translation_shape() {
        let out = translate_natural(&Formula::prop("p")).unwrap();
        match out {
            Formula::And(_, anchor_part) => match *anchor_part {
                Formula::DiamondL(inner) => match *inner {
                    Formula::DiamondR(inner2) => {
                        assert!(matches!(*inner2, Formula::DiamondR(_)));
                    }
                    other => panic!("expected <r> under <l>, got {other}"),
                },
                other => panic!("expected <l> anchor, got {other}"),
            },
            other => panic!("expected top-level conjunction, got {other}"),
        }
        // the universal modality is fully expanded: desugaring succeeds and
        // yields a core formula with no residue
        assert!(translate_natural(&Formula::prop("p"))
            .unwrap()
            .desugar()
            .is_core());
    }
}
