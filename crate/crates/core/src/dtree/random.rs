//! Seeded random tree generators for tests and the verification suite.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Color, DecisionTree, Label, TreeBuilder};

/// Shape parameters for [`random_tree`].
#[derive(Debug, Clone, Copy)]
pub struct RandomTreeParams {
    /// Number of input positions.
    pub arity: usize,
    /// Alphabet size.
    pub alphabet: usize,
    /// Number of distinct leaf outputs.
    pub outputs: usize,
    /// Probability that a non-root vertex with unused positions left becomes a leaf.
    pub leaf_prob: f64,
    /// Allow vertices with a single edge carrying the whole alphabet.
    pub allow_unary: bool,
}

impl RandomTreeParams {
    pub fn binary(arity: usize) -> Self {
        Self {
            arity,
            alphabet: 2,
            outputs: 3,
            leaf_prob: 0.3,
            allow_unary: false,
        }
    }
}

/// Random tree that never queries a position twice on one path.
pub fn random_tree<R: Rng>(rng: &mut R, p: RandomTreeParams) -> DecisionTree {
    assert!(p.arity >= 1 && p.alphabet >= 2 && p.outputs >= 1);
    let mut b = TreeBuilder::new(p.arity, p.alphabet).outputs(p.outputs);
    grow(rng, &p, &mut b, &mut vec![false; p.arity], true);
    b.build().expect("generator produces valid trees")
}

fn grow<R: Rng>(
    rng: &mut R,
    p: &RandomTreeParams,
    b: &mut TreeBuilder,
    used: &mut Vec<bool>,
    is_root: bool,
) -> usize {
    let free: Vec<usize> = (0..p.arity).filter(|&j| !used[j]).collect();
    if free.is_empty() || (!is_root && rng.gen_bool(p.leaf_prob)) {
        return b.add_leaf(rng.gen_range(0..p.outputs));
    }
    let j = *free.choose(rng).expect("nonempty");
    let v = b.add_internal(j);
    let mut symbols: Vec<usize> = (0..p.alphabet).collect();
    symbols.shuffle(rng);
    let min_parts = if p.allow_unary && !is_root { 1 } else { 2 };
    let parts = rng.gen_range(min_parts..=p.alphabet);
    // Cut the shuffled symbols into `parts` nonempty blocks.
    let mut cuts: Vec<usize> = (1..p.alphabet).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(parts - 1).collect();
    cuts.sort_unstable();
    let mut blocks = Vec::with_capacity(parts);
    let mut start = 0;
    for c in cuts.into_iter().chain(std::iter::once(p.alphabet)) {
        blocks.push(symbols[start..c].to_vec());
        start = c;
    }
    let black = rng.gen_range(0..blocks.len());
    used[j] = true;
    for (i, block) in blocks.into_iter().enumerate() {
        let child = grow(rng, p, b, used, false);
        let color = if i == black { Color::Black } else { Color::Red };
        b.add_edge(v, child, Label::new(block).expect("nonempty"), color)
            .expect("fresh vertices");
    }
    used[j] = false;
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_trees_are_valid_and_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        for arity in 1..6 {
            let t1 = random_tree(&mut a, RandomTreeParams::binary(arity));
            let t2 = random_tree(&mut b, RandomTreeParams::binary(arity));
            assert_eq!(t1, t2);
            assert!(t1.is_binary());
            assert!(t1.stats().depth <= arity);
        }
    }

    #[test]
    fn generalized_trees_respect_alphabet() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = RandomTreeParams {
            arity: 3,
            alphabet: 5,
            outputs: 4,
            leaf_prob: 0.2,
            allow_unary: true,
        };
        for _ in 0..20 {
            let t = random_tree(&mut rng, p);
            assert_eq!(t.alphabet(), 5);
        }
    }
}
