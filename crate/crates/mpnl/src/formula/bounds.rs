//! Small-model bound formulas for the three interpretation domains.

use super::ClosureTable;
use serde::Serialize;

/// A bound, exact when its log₂ fits in 64 bits and otherwise kept in the
/// shape `multiplier · base^(2^exponent_pow2) + addend`.
#[derive(Clone, Debug, Serialize, PartialEq)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum BoundValue {
    Exact { value: f64 },
    Symbolic {
        multiplier: f64,
        base: f64,
        exponent_pow2: u64,
        addend: u64,
        log2: f64,
    },
}

impl BoundValue {
    pub fn log2(&self) -> f64 {
        match self {
            BoundValue::Exact { value } => value.log2(),
            BoundValue::Symbolic { log2, .. } => *log2,
        }
    }
}

/// The doubly-exponential model bounds and counting parameters of a formula.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub size_phi: u64,
    pub p: usize,
    pub f: usize,
    pub threshold: u64,
    /// log₂ of the marked-atom alphabet bound 2^{3|φ|}.
    pub marked_atom_bound_log2: u64,
    /// The bound itself when it fits in a machine word.
    pub marked_atom_bound: Option<u64>,
    /// (p·f+p+1)^(2^{3|φ|}), the index bound of configuration equivalence.
    pub equiv_index: BoundValue,
    /// (|φ|²/4 + |φ|/2 + 1)^(2^{3|φ|}): finite linear orders.
    pub finite: BoundValue,
    /// (2^{3|φ|}+2) · finite-base^(2^{3|φ|}) + 1: generators for ℕ.
    pub nat: BoundValue,
    /// (2^{3|φ|+1}+4) · finite-base^(2^{3|φ|}) + 1: generators for ℤ.
    pub int: BoundValue,
}

fn pow2(e: u64) -> f64 {
    if e >= 1024 {
        f64::INFINITY
    } else {
        (2f64).powi(e as i32)
    }
}

fn bound(multiplier: f64, base: f64, exponent_pow2: u64, addend: u64) -> BoundValue {
    let exp = pow2(exponent_pow2);
    let log2 = multiplier.log2() + exp * base.log2();
    if log2 <= 64.0 {
        BoundValue::Exact {
            value: multiplier * base.powf(exp) + addend as f64,
        }
    } else {
        BoundValue::Symbolic {
            multiplier,
            base,
            exponent_pow2,
            addend,
            log2,
        }
    }
}

/// Evaluates the three small-model bound formulas for the closure's formula.
pub fn bounds(ct: &ClosureTable) -> BoundReport {
    let s = ct.size_phi();
    let pow = 3 * s;
    // (|φ|² + 2|φ| + 4) / 4, exact in f64 at any size that matters
    let base = ((s as f64) * (s as f64) + 2.0 * s as f64 + 4.0) / 4.0;
    let nat_mult = pow2(pow) + 2.0;
    let int_mult = pow2(pow + 1) + 4.0;
    BoundReport {
        size_phi: s,
        p: ct.p_count(),
        f: ct.f_count(),
        threshold: ct.threshold(),
        marked_atom_bound_log2: pow,
        marked_atom_bound: if pow < 64 { Some(1u64 << pow) } else { None },
        equiv_index: bound(1.0, (ct.threshold() + 1) as f64, pow, 0),
        finite: bound(1.0, base, pow, 0),
        nat: bound(nat_mult, base, pow, 1),
        int: bound(int_mult, base, pow, 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, ClosureTable};

    fn report(src: &str) -> BoundReport {
        bounds(&ClosureTable::build(&parse(src).unwrap().desugar()))
    }

    #[test]
    fn size_two_finite_bound_is_symbolic() {
        // |φ|=2: base 1+1+1 = 3, exponent 2^6, log2 = 64·log2(3) ≈ 101.4
        let r = report("<r>p");
        assert_eq!(r.size_phi, 2);
        match r.finite {
            BoundValue::Symbolic { multiplier, base, exponent_pow2, addend, log2 } => {
                assert_eq!(multiplier, 1.0);
                assert_eq!(base, 3.0);
                assert_eq!(exponent_pow2, 6);
                assert_eq!(addend, 0);
                assert!((log2 - 64.0 * (3f64).log2()).abs() < 1e-9);
                assert!((log2 - 101.4).abs() < 0.1);
            }
            other => panic!("expected symbolic bound, got {other:?}"),
        }
    }

    #[test]
    fn nat_bound_shape() {
        let r = report("<r>p");
        match r.nat {
            BoundValue::Symbolic { multiplier, base, exponent_pow2, addend, .. } => {
                assert_eq!(multiplier, 66.0); // 2^6 + 2
                assert_eq!(base, 3.0);
                assert_eq!(exponent_pow2, 6);
                assert_eq!(addend, 1);
            }
            other => panic!("expected symbolic bound, got {other:?}"),
        }
    }

    #[test]
    fn equiv_index_with_zero_threshold_is_one() {
        let r = report("p"); // p = f = 0
        assert_eq!(r.threshold, 0);
        assert_eq!(r.equiv_index, BoundValue::Exact { value: 1.0 });
    }

    #[test]
    fn marked_atom_bound_size_one() {
        let r = report("p"); // |φ| = 1
        assert_eq!(r.marked_atom_bound_log2, 3);
        assert_eq!(r.marked_atom_bound, Some(8));
    }
}
