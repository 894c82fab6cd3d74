//! Satisfiability and verification toolkit for Metric Propositional
//! Neighborhood Logic over finite linear orders, ℕ and ℤ.

pub mod atoms;
pub mod bits;
pub mod config;
pub mod diff;
pub mod engine;
pub mod fuzz;
pub mod formula;
pub mod semantics;
pub mod transform;
