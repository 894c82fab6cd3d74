//! Seeded random formula generation for the differential test harness.

use crate::formula::Formula;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Parameters for a reproducible formula corpus. Generation is a pure
/// function of the spec, so a reported seed replays the exact corpus.
#[derive(Clone, Debug)]
pub struct FuzzSpec {
    pub seed: u64,
    pub count: usize,
    /// Maximum AST node count per formula.
    pub max_size: u64,
    /// Largest constant allowed in length literals.
    pub max_k: u64,
    /// Propositions are drawn from p0, p1, … up to this pool size.
    pub num_props: usize,
    /// Relative weights of ◇_r/◇_l (and the dual boxes) against the
    /// propositional connectives. (0, 0) yields purely propositional output.
    pub diamond_weights: (u32, u32),
}

impl Default for FuzzSpec {
    fn default() -> Self {
        FuzzSpec {
            seed: 0,
            count: 100,
            max_size: 7,
            max_k: 3,
            num_props: 2,
            diamond_weights: (3, 3),
        }
    }
}

fn leaf(rng: &mut ChaCha8Rng, spec: &FuzzSpec) -> Formula {
    match rng.gen_range(0..4u32) {
        0 => Formula::Pi,
        1 => Formula::LenLt(rng.gen_range(0..=spec.max_k)),
        _ => Formula::Prop(format!("p{}", rng.gen_range(0..spec.num_props.max(1)))),
    }
}

fn gen_node(rng: &mut ChaCha8Rng, spec: &FuzzSpec, budget: u64) -> Formula {
    if budget <= 1 {
        return leaf(rng, spec);
    }
    let (wr, wl) = spec.diamond_weights;
    // candidate connectives and their weights; binaries need budget ≥ 3
    let mut choices: Vec<(u32, u8)> = vec![(2, b'v'), (2, b'~')];
    if budget >= 3 {
        choices.push((2, b'|'));
        choices.push((2, b'&'));
    }
    if wr > 0 {
        choices.push((wr, b'r'));
        choices.push((wr, b'R'));
    }
    if wl > 0 {
        choices.push((wl, b'l'));
        choices.push((wl, b'L'));
    }
    let total: u32 = choices.iter().map(|(w, _)| w).sum();
    let mut pick = rng.gen_range(0..total);
    let mut op = b'v';
    for (w, c) in choices {
        if pick < w {
            op = c;
            break;
        }
        pick -= w;
    }
    match op {
        b'v' => leaf(rng, spec),
        b'~' => Formula::neg(gen_node(rng, spec, budget - 1)),
        b'r' => Formula::diamond_r(gen_node(rng, spec, budget - 1)),
        b'R' => Formula::box_r(gen_node(rng, spec, budget - 1)),
        b'l' => Formula::diamond_l(gen_node(rng, spec, budget - 1)),
        b'L' => Formula::box_l(gen_node(rng, spec, budget - 1)),
        b'|' | b'&' => {
            let left = rng.gen_range(1..=(budget - 2));
            let a = gen_node(rng, spec, left);
            let b = gen_node(rng, spec, budget - 1 - a.node_count());
            if op == b'|' {
                Formula::or(a, b)
            } else {
                Formula::and(a, b)
            }
        }
        _ => unreachable!(),
    }
}

/// Generates `spec.count` formulas, deterministic in `spec`.
pub fn gen_formulae(spec: &FuzzSpec) -> Vec<Formula> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.count)
        .map(|_| gen_node(&mut rng, spec, spec.max_size.max(1)))
        .collect()
}
