use crate::dtree::{Color, DecisionTree, Label, TreeBuilder};

/// Tree for "index of the first 1 in x" with the guess "every bit is 0".
///
/// Vertex `i < n` queries `x_i`; answer 1 is a red edge to the leaf with output
/// `i + 1` (id `n + i`), answer 0 a black edge onward. The last black edge ends
/// at the leaf with output 0 (id `2n`). `T = n`, `G = 1`.
pub fn first_marked_tree(n: usize) -> DecisionTree {
    assert!(n >= 1, "first-marked tree needs n ≥ 1");
    let mut b = TreeBuilder::new(n, 2).outputs(n + 1);
    let internal: Vec<_> = (0..n).map(|i| b.add_internal(i)).collect();
    let marked: Vec<_> = (0..n).map(|i| b.add_leaf(i + 1)).collect();
    let none = b.add_leaf(0);
    for i in 0..n {
        let next = internal.get(i + 1).copied().unwrap_or(none);
        b.add_edge(internal[i], next, Label::singleton(0), Color::Black)
            .expect("fresh vertices");
        b.add_edge(internal[i], marked[i], Label::singleton(1), Color::Red)
            .expect("fresh vertices");
    }
    b.build().expect("first-marked tree is valid")
}

/// Classical oracle: 1-based index of the first 1, or 0.
pub fn first_marked(x: &[usize]) -> usize {
    x.iter().position(|&b| b == 1).map_or(0, |i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtree::all_inputs;

    #[test]
    fn evaluates_like_a_scan() {
        for n in 1..=5 {
            let t = first_marked_tree(n);
            let s = t.stats();
            assert_eq!((s.depth, s.mistakes), (n, 1));
            for x in all_inputs(n, 2) {
                let e = t.evaluate(&x).unwrap();
                assert_eq!(t.output(e.leaf), Some(first_marked(&x)));
            }
        }
    }

    #[test]
    fn black_path_through_the_chain() {
        let t = first_marked_tree(3);
        assert_eq!(t.black_path_len(2).unwrap(), 4);
        assert_eq!(t.black_path_vertex(2, 1).unwrap(), 0);
        assert_eq!(t.black_path_vertex(1, 4).unwrap(), 6);
    }
}
