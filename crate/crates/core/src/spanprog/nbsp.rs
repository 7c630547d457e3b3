use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{SpanError, VerifyReport, Weights, WITNESS_TOL};
use crate::dense;
use crate::dtree::{Color, DecisionTree, VertexId};
use crate::scalar::Real;
use crate::sparse::SparseMatrix;

/// Basis vector of the auxiliary space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HatCoord {
    /// `|v, c⟩` for an internal vertex `v`.
    Colored(VertexId, Color),
    /// `|v#⟩`, always available.
    Sharp(VertexId),
    /// `|u⟩` for any vertex.
    Vertex(VertexId),
}

/// Non-binary span program of a tree over any alphabet.
///
/// `Â|v,c⟩ = √W_c Σ_{u child of v} |u⟩`, `Â|u⟩ = √W_{c(u)} |u⟩` with `c(u)` the
/// color of the edge entering `u`, and `Â|v#⟩ = |v⟩ − Σ_{u child of v} |u⟩`.
/// At input `x`, vertex `v` contributes `|v, c⟩ − |u⟩` where `u` is the child
/// selected by `x_{J(v)}` and `c` the color of that edge; all `|v#⟩` are free
/// and `|v, red⟩` alone is never available.
#[derive(Debug, Clone)]
pub struct Nbsp<T> {
    tree: DecisionTree,
    weights: Weights<T>,
    coords: Vec<HatCoord>,
    /// Index of `|v, black⟩`; `|v, red⟩` and `|v#⟩` follow it.
    internal_offset: Vec<Option<usize>>,
    vertex_offset: usize,
    matrix: SparseMatrix<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NbspWitness<T> {
    pub leaf: VertexId,
    /// Coefficients over [`Nbsp::coords`].
    pub positive: Vec<T>,
    /// Coefficients over the tree's vertices.
    pub negative: Vec<T>,
    pub positive_size: T,
    /// `‖Π_H Â† w̄‖²` with `H` the span of all input and free vectors.
    pub negative_size: T,
}

impl<T: Real> Nbsp<T> {
    pub fn new(tree: &DecisionTree, weights: Weights<T>) -> Result<Self, SpanError> {
        weights.validate(tree)?;
        let mut coords = Vec::new();
        let mut internal_offset = vec![None; tree.len()];
        for v in tree.internal_vertices() {
            internal_offset[v] = Some(coords.len());
            coords.push(HatCoord::Colored(v, Color::Black));
            coords.push(HatCoord::Colored(v, Color::Red));
            coords.push(HatCoord::Sharp(v));
        }
        let vertex_offset = coords.len();
        coords.extend((0..tree.len()).map(HatCoord::Vertex));

        let mut matrix = SparseMatrix::new(tree.len());
        for &c in &coords {
            let entries: Vec<(usize, T)> = match c {
                HatCoord::Colored(v, color) => {
                    let w = match color {
                        Color::Red => weights.red,
                        Color::Black => {
                            let b = tree.black_edge(v).expect("internal").child;
                            weights.edge_weight(tree, b)
                        }
                    };
                    let s = w.sqrt();
                    tree.edges(v).iter().map(|e| (e.child, s)).collect()
                }
                HatCoord::Sharp(v) => std::iter::once((v, T::one()))
                    .chain(tree.edges(v).iter().map(|e| (e.child, -T::one())))
                    .collect(),
                // The root's coordinate lies outside every input space.
                HatCoord::Vertex(u) if u == tree.root() => vec![],
                HatCoord::Vertex(u) => vec![(u, weights.edge_weight(tree, u).sqrt())],
            };
            matrix.push_column(&entries);
        }
        Ok(Self {
            tree: tree.clone(),
            weights,
            coords,
            internal_offset,
            vertex_offset,
            matrix,
        })
    }

    pub fn with_default_weights(tree: &DecisionTree) -> Result<Self, SpanError> {
        Self::new(tree, Weights::defaults(tree.stats()))
    }

    pub fn tree(&self) -> &DecisionTree {
        &self.tree
    }

    pub fn weights(&self) -> &Weights<T> {
        &self.weights
    }

    pub fn coords(&self) -> &[HatCoord] {
        &self.coords
    }

    /// `Â` as a matrix from the auxiliary space to the vertex space.
    pub fn matrix(&self) -> &SparseMatrix<T> {
        &self.matrix
    }

    pub fn index(&self, c: HatCoord) -> usize {
        match c {
            HatCoord::Colored(v, Color::Black) => self.internal_offset[v].expect("internal"),
            HatCoord::Colored(v, Color::Red) => self.internal_offset[v].expect("internal") + 1,
            HatCoord::Sharp(v) => self.internal_offset[v].expect("internal") + 2,
            HatCoord::Vertex(u) => self.vertex_offset + u,
        }
    }

    fn sparse_vec(&self, entries: &[(HatCoord, f64)]) -> DVector<f64> {
        let mut out = DVector::zeros(self.coords.len());
        for &(c, w) in entries {
            out[self.index(c)] += w;
        }
        out
    }

    /// Vectors spanning the available subspace at `x`.
    pub fn available_vectors(&self, x: &[usize]) -> Vec<DVector<f64>> {
        let mut out = Vec::new();
        for v in self.tree.internal_vertices() {
            let q = x[self.tree.query(v).expect("internal")];
            let e = self
                .tree
                .edges(v)
                .iter()
                .find(|e| e.label.contains(q))
                .expect("labels partition the alphabet");
            out.push(self.sparse_vec(&[
                (HatCoord::Colored(v, e.color), 1.0),
                (HatCoord::Vertex(e.child), -1.0),
            ]));
            out.push(self.sparse_vec(&[(HatCoord::Sharp(v), 1.0)]));
        }
        out
    }

    /// Mutually orthogonal vectors spanning all input and free spaces.
    pub fn generators(&self) -> Vec<DVector<f64>> {
        let mut out = Vec::new();
        for v in self.tree.internal_vertices() {
            let b = self.tree.black_edge(v).expect("internal").child;
            out.push(self.sparse_vec(&[
                (HatCoord::Colored(v, Color::Black), 1.0),
                (HatCoord::Vertex(b), -1.0),
            ]));
            if self.tree.edges(v).len() > 1 {
                out.push(self.sparse_vec(&[(HatCoord::Colored(v, Color::Red), 1.0)]));
            }
            out.push(self.sparse_vec(&[(HatCoord::Sharp(v), 1.0)]));
            for e in self.tree.edges(v).iter().filter(|e| e.color == Color::Red) {
                out.push(self.sparse_vec(&[(HatCoord::Vertex(e.child), 1.0)]));
            }
        }
        out
    }

    pub fn witnesses(&self, x: &[usize]) -> Result<NbspWitness<T>, SpanError> {
        let leaf = self.tree.evaluate(x)?.leaf;
        Ok(self.witnesses_for_leaf(leaf))
    }

    pub fn witnesses_for_leaf(&self, leaf: VertexId) -> NbspWitness<T> {
        let path = self.tree.path_to(leaf);
        let mut positive = vec![T::zero(); self.coords.len()];
        let mut negative = vec![T::zero(); self.tree.len()];
        let mut negative_size = T::zero();
        for &v in &path {
            negative[v] = T::one();
        }
        let half = T::lit(0.5);
        for pair in path.windows(2) {
            let (v, u) = (pair[0], pair[1]);
            let e = self.tree.parent_edge(u).expect("non-root");
            let w = self.weights.edge_weight(&self.tree, u);
            let inv = T::one() / w.sqrt();
            positive[self.index(HatCoord::Sharp(v))] = T::one();
            positive[self.index(HatCoord::Colored(v, e.color))] = inv;
            positive[self.index(HatCoord::Vertex(u))] = -inv;
            // |v,red⟩ sees every child of v, one of which is on the path.
            if self.tree.edges(v).len() > 1 {
                negative_size += self.weights.red;
            }
            if e.color == Color::Red {
                let b = self.tree.black_edge(v).expect("internal").child;
                negative_size += self.weights.edge_weight(&self.tree, b) * half + self.weights.red;
            }
        }
        let positive_size = positive.iter().map(|&w| w * w).sum();
        NbspWitness {
            leaf,
            positive,
            negative,
            positive_size,
            negative_size,
        }
    }

    /// Checks the witness identities at `x` and, by least squares, that only
    /// the correct target is reachable from the available subspace.
    pub fn verify(&self, domain: &[Vec<usize>]) -> Result<VerifyReport, SpanError> {
        let a = self.matrix.to_dense_f64();
        let root = self.tree.root();
        let leaves: Vec<VertexId> = self.tree.leaves().collect();
        let generators = self.generators();
        let per_input: Vec<Result<[f64; 6], SpanError>> = domain
            .par_iter()
            .map(|x| {
                let fail = |clause: String| SpanError::Violation {
                    input: x.clone(),
                    clause,
                };
                let w = self.witnesses(x)?;
                let pos = DVector::from_iterator(w.positive.len(), w.positive.iter().map(|v| v.as_f64()));
                let neg = DVector::from_iterator(w.negative.len(), w.negative.iter().map(|v| v.as_f64()));
                let mut t = DVector::zeros(a.nrows());
                t[root] = 1.0;
                t[w.leaf] -= 1.0;
                let target_residual = (&a * &pos - &t).norm();
                if target_residual > WITNESS_TOL {
                    return Err(fail(format!("Â·w misses the target by {target_residual:e}")));
                }
                let avail = self.available_vectors(x);
                let avail_mat = DMatrix::from_columns(&avail);
                let basis = dense::column_space_basis(&avail_mat);
                if dense::residual_to_span(&basis, &pos) > WITNESS_TOL {
                    return Err(fail("positive witness leaves the available subspace".into()));
                }
                let reduced = &a * &basis;
                let least = reduced
                    .clone()
                    .pseudo_inverse(dense::RANK_TOL)
                    .map_err(|e| fail(format!("pseudoinverse failed: {e}")))?
                    * &t;
                if least.norm_squared() > w.positive_size.as_f64() * (1.0 + 1e-9) + 1e-12 {
                    return Err(fail("least-norm witness exceeds the closed-form witness".into()));
                }
                let image = &a * &avail_mat;
                let overlap = (image.transpose() * &neg).amax();
                if overlap > WITNESS_TOL {
                    return Err(fail(format!(
                        "negative witness overlaps the available image by {overlap:e}"
                    )));
                }
                let pulled = a.transpose() * &neg;
                let projected: f64 = generators
                    .iter()
                    .map(|g| g.dot(&pulled).powi(2) / g.norm_squared())
                    .sum();
                if (projected - w.negative_size.as_f64()).abs() > 1e-8 * projected.max(1.0) {
                    return Err(fail(format!(
                        "negative witness size {} disagrees with projection {projected}",
                        w.negative_size
                    )));
                }
                let span = dense::column_space_basis(&image);
                let mut correct = 0.0;
                let mut wrong = f64::INFINITY;
                for &z in &leaves {
                    let mut tz = DVector::zeros(a.nrows());
                    tz[root] = 1.0;
                    tz[z] -= 1.0;
                    let res = dense::residual_to_span(&span, &tz);
                    if z == w.leaf {
                        correct = res;
                    } else {
                        wrong = wrong.min(res);
                    }
                    if z != w.leaf && (neg.dot(&tz) - 1.0).abs() > WITNESS_TOL {
                        return Err(fail("negative witness has wrong target overlaps".into()));
                    }
                }
                if correct > WITNESS_TOL || wrong < 1e-6 {
                    return Err(fail(format!(
                        "target residuals: correct {correct:e}, closest wrong {wrong:e}"
                    )));
                }
                Ok([
                    target_residual,
                    overlap,
                    wrong,
                    correct,
                    w.positive_size.as_f64(),
                    projected,
                ])
            })
            .collect();
        let mut report = VerifyReport {
            inputs: domain.len(),
            max_target_residual: 0.0,
            max_available_overlap: 0.0,
            min_wrong_target_residual: f64::INFINITY,
            max_correct_target_residual: 0.0,
            max_positive_size: 0.0,
            max_negative_size: 0.0,
        };
        for r in per_input {
            let [tr, ao, wr, cr, ps, ns] = r?;
            report.max_target_residual = report.max_target_residual.max(tr);
            report.max_available_overlap = report.max_available_overlap.max(ao);
            report.min_wrong_target_residual = report.min_wrong_target_residual.min(wr);
            report.max_correct_target_residual = report.max_correct_target_residual.max(cr);
            report.max_positive_size = report.max_positive_size.max(ps);
            report.max_negative_size = report.max_negative_size.max(ns);
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtree::{all_inputs, Label, TreeBuilder};
    use crate::spanprog::nbsp_bounds;

    /// Root queries x_0 over {0,1,2}: 0 → black to a vertex querying x_1, 1 and 2 → red leaves.
    fn ternary() -> DecisionTree {
        let mut b = TreeBuilder::new(2, 3);
        let r = b.add_internal(0);
        let v = b.add_internal(1);
        let leaves: Vec<_> = (0..4).map(|o| b.add_leaf(o)).collect();
        b.add_edge(r, v, Label::singleton(0), Color::Black).unwrap();
        b.add_edge(r, leaves[0], Label::singleton(1), Color::Red).unwrap();
        b.add_edge(r, leaves[1], Label::singleton(2), Color::Red).unwrap();
        b.add_edge(v, leaves[2], Label::new(vec![0, 1]).unwrap(), Color::Black)
            .unwrap();
        b.add_edge(v, leaves[3], Label::singleton(2), Color::Red).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn verifies_on_a_ternary_tree() {
        let t = ternary();
        let sp = Nbsp::<f64>::with_default_weights(&t).unwrap();
        let rep = sp.verify(&all_inputs(2, 3)).unwrap();
        let stats = t.stats();
        let (wb, wr) = (1.0 / stats.mistakes as f64, 1.0 / stats.depth as f64);
        let (bp, bn) = nbsp_bounds(stats, wb, wr);
        assert!(rep.max_positive_size <= bp + 1e-12);
        assert!(rep.max_negative_size <= bn + 1e-12);
    }

    #[test]
    fn positive_size_formula() {
        let t = ternary();
        let sp = Nbsp::<f64>::new(&t, Weights::uniform(0.5, 0.25)).unwrap();
        // x = (0, 2): black then red, sizes (1 + 2/0.5) + (1 + 2/0.25).
        let w = sp.witnesses(&[0, 2]).unwrap();
        assert!((w.positive_size - 14.0).abs() < 1e-12);
        // one W_red per internal path vertex, plus W_black/2 + W_red for the red step
        assert!((w.negative_size - (0.5 + 0.25 + 0.25)).abs() < 1e-12);
    }
}
