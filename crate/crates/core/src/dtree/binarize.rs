//! Conversion of trees over a larger alphabet into binary trees.
//!
//! Each vertex keeps its black edge as the 0-branch of a first binary decision
//! "is x_j in the union of the red labels?". The red children, ordered by the
//! smallest symbol of their labels, hang below the 1-branch in a left-complete
//! balanced tree of binary decisions whose heavier (left) half is the black
//! side, so a red child is reached through at most `⌈log₂ ℓ⌉` red edges.
//! Vertices with a single outgoing edge are contracted away.

use serde::{Deserialize, Serialize};

use super::{Color, DecisionTree, Edge, Label, TreeBuilder, TreeError, VertexId};

/// Binary input variable `y = [x_position ∈ set]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Predicate {
    pub position: usize,
    pub set: Label,
}

#[derive(Debug, Clone)]
pub struct Binarized {
    pub tree: DecisionTree,
    /// Meaning of each binary input position.
    pub predicates: Vec<Predicate>,
    /// Original leaf for each leaf of the binary tree (`None` on internal ids).
    pub leaf_map: Vec<Option<VertexId>>,
}

impl Binarized {
    /// Translates an input of the original tree into the binary tree's input.
    pub fn encode(&self, x: &[usize]) -> Vec<usize> {
        self.predicates
            .iter()
            .map(|p| usize::from(p.set.contains(x[p.position])))
            .collect()
    }
}

struct Builder<'a> {
    src: &'a DecisionTree,
    out: TreeBuilder,
    predicates: Vec<Predicate>,
    leaf_map: Vec<Option<VertexId>>,
}

impl Builder<'_> {
    fn predicate(&mut self, position: usize, set: Label) -> usize {
        let p = Predicate { position, set };
        match self.predicates.iter().position(|q| *q == p) {
            Some(i) => i,
            None => {
                self.predicates.push(p);
                self.predicates.len() - 1
            }
        }
    }

    fn record(&mut self, id: VertexId, original: Option<VertexId>) {
        if self.leaf_map.len() <= id {
            self.leaf_map.resize(id + 1, None);
        }
        self.leaf_map[id] = original;
    }

    fn vertex(&mut self, mut v: VertexId) -> Result<VertexId, TreeError> {
        while let [only] = self.src.edges(v) {
            v = only.child;
        }
        if let Some(output) = self.src.output(v) {
            let id = self.out.add_leaf(output);
            self.record(id, Some(v));
            return Ok(id);
        }
        let j = self.src.query(v).expect("internal vertex");
        let edges = self.src.edges(v);
        let black = edges
            .iter()
            .find(|e| e.color == Color::Black)
            .expect("one black edge")
            .clone();
        let mut reds: Vec<Edge> = edges
            .iter()
            .filter(|e| e.color == Color::Red)
            .cloned()
            .collect();
        reds.sort_by_key(|e| e.label.min_symbol());
        let red_union = union(&reds);
        let top = self.predicate(j, red_union);
        let id = self.out.add_internal(top);
        self.record(id, None);
        let b = self.vertex(black.child)?;
        self.out.add_edge(id, b, Label::singleton(0), Color::Black)?;
        let r = self.red_subtree(j, &reds)?;
        self.out.add_edge(id, r, Label::singleton(1), Color::Red)?;
        Ok(id)
    }

    fn red_subtree(&mut self, j: usize, reds: &[Edge]) -> Result<VertexId, TreeError> {
        if let [only] = reds {
            return self.vertex(only.child);
        }
        let split = reds.len().div_ceil(2);
        let (left, right) = reds.split_at(split);
        let p = self.predicate(j, union(right));
        let id = self.out.add_internal(p);
        self.record(id, None);
        let l = self.red_subtree(j, left)?;
        self.out.add_edge(id, l, Label::singleton(0), Color::Black)?;
        let r = self.red_subtree(j, right)?;
        self.out.add_edge(id, r, Label::singleton(1), Color::Red)?;
        Ok(id)
    }
}

fn union(edges: &[Edge]) -> Label {
    let symbols = edges
        .iter()
        .flat_map(|e| e.label.symbols().iter().copied())
        .collect();
    Label::new(symbols).expect("nonempty union")
}

/// Binarizes `tree`. Binary trees without single-edge vertices are returned
/// unchanged with the identity encoding.
pub fn binarize(tree: &DecisionTree) -> Result<Binarized, TreeError> {
    if tree.is_binary() {
        return Ok(Binarized {
            tree: tree.clone(),
            predicates: (0..tree.arity())
                .map(|position| Predicate {
                    position,
                    set: Label::singleton(1),
                })
                .collect(),
            leaf_map: (0..tree.len())
                .map(|v| tree.is_leaf(v).then_some(v))
                .collect(),
        });
    }
    let mut b = Builder {
        src: tree,
        out: TreeBuilder::new(0, 2),
        predicates: Vec::new(),
        leaf_map: Vec::new(),
    };
    let root = b.vertex(tree.root())?;
    if tree.is_leaf(tree.root()) || b.out.len() == 1 {
        return Err(TreeError::Structure(
            "tree contracts to a single leaf".into(),
        ));
    }
    debug_assert_eq!(root, 0);
    let Builder {
        mut out,
        predicates,
        mut leaf_map,
        ..
    } = b;
    // Arity is only known once all predicates are interned.
    out.arity = predicates.len();
    out.outputs = Some(tree.outputs());
    leaf_map.resize(out.len(), None);
    Ok(Binarized {
        tree: out.build()?,
        predicates,
        leaf_map,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtree::all_inputs;

    /// One 4-way vertex: black child D on symbol 3, red children A,B,C.
    fn four_way() -> DecisionTree {
        let mut b = TreeBuilder::new(1, 4);
        let r = b.add_internal(0);
        let leaves: Vec<_> = (0..4).map(|o| b.add_leaf(o)).collect();
        for (q, &z) in leaves.iter().enumerate() {
            let color = if q == 3 { Color::Black } else { Color::Red };
            b.add_edge(r, z, Label::singleton(q), color).unwrap();
        }
        b.build().unwrap()
    }

    #[test]
    fn four_way_vertex_keeps_black_edge_and_nests_reds() {
        let t = four_way();
        let bin = binarize(&t).unwrap();
        let bt = &bin.tree;
        // root decides D vs {A,B,C}; then a depth-2 subtree over A,B,C.
        assert_eq!(bt.stats().depth, 3);
        assert_eq!(bin.predicates[0].set.symbols(), &[0, 1, 2]);
        let black = bt.black_edge(bt.root()).unwrap();
        assert_eq!(bin.leaf_map[black.child], Some(4));
        for x in all_inputs(1, 4) {
            let orig = t.evaluate(&x).unwrap().leaf;
            let leaf = bt.evaluate(&bin.encode(&x)).unwrap().leaf;
            assert_eq!(bin.leaf_map[leaf], Some(orig));
        }
        assert!(bt.stats().mistakes <= 2);
    }

    #[test]
    fn binary_input_is_identity() {
        let mut b = TreeBuilder::new(1, 2);
        let r = b.add_internal(0);
        let z0 = b.add_leaf(0);
        let z1 = b.add_leaf(1);
        b.add_edge(r, z0, Label::singleton(1), Color::Black).unwrap();
        b.add_edge(r, z1, Label::singleton(0), Color::Red).unwrap();
        let t = b.build().unwrap();
        let bin = binarize(&t).unwrap();
        assert_eq!(bin.tree, t);
        assert_eq!(bin.encode(&[1]), vec![1]);
    }

    #[test]
    fn single_edge_vertices_are_contracted() {
        let mut b = TreeBuilder::new(2, 3);
        let r = b.add_internal(0);
        let v = b.add_internal(1);
        let z0 = b.add_leaf(0);
        let z1 = b.add_leaf(1);
        b.add_edge(r, v, Label::full(3), Color::Black).unwrap();
        b.add_edge(v, z0, Label::new(vec![0, 1]).unwrap(), Color::Black)
            .unwrap();
        b.add_edge(v, z1, Label::singleton(2), Color::Red).unwrap();
        let t = b.build().unwrap();
        let bin = binarize(&t).unwrap();
        assert_eq!(bin.tree.len(), 3);
        assert_eq!(bin.predicates[0].position, 1);
    }
}
