use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Availability, SpanError, Weights, WITNESS_TOL};
use crate::dense;
use crate::dtree::{Color, DecisionTree, VertexId};
use crate::scalar::Real;
use crate::sparse::SparseMatrix;

/// One input vector `√W_c (|from⟩ − |to⟩)` of the binary program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputColumn {
    pub from: VertexId,
    pub to: VertexId,
    pub color: Color,
    pub availability: Availability,
}

/// Span program of a binary colored decision tree.
#[derive(Debug, Clone)]
pub struct SpanProgram<T> {
    tree: DecisionTree,
    weights: Weights<T>,
    columns: Vec<InputColumn>,
    matrix: SparseMatrix<T>,
    /// Column of the edge entering each vertex.
    column_of_child: Vec<Option<usize>>,
}

/// Positive and negative witness for one input.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessPair<T> {
    /// Leaf reached by the input.
    pub leaf: VertexId,
    /// Coefficients over the program's columns.
    pub positive: Vec<T>,
    /// Coefficients over the tree's vertices.
    pub negative: Vec<T>,
    /// `‖w‖²`
    pub positive_size: T,
    /// `‖Aᵀ w̄‖²`
    pub negative_size: T,
}

/// Residuals of the witness identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessCheck {
    /// `‖A w − t‖`
    pub target_residual: f64,
    /// `max |⟨w̄|column⟩|` over available columns.
    pub available_overlap: f64,
    /// `max |⟨w̄|t_β⟩ − (1 − δ)|` over all leaves.
    pub target_overlap: f64,
}

impl<T: Real> SpanProgram<T> {
    pub fn new(tree: &DecisionTree, weights: Weights<T>) -> Result<Self, SpanError> {
        if !tree.is_binary() {
            return Err(SpanError::Unsupported(
                "the binary span program needs a binary tree; binarize first".into(),
            ));
        }
        weights.validate(tree)?;
        let mut matrix = SparseMatrix::new(tree.len());
        let mut columns = Vec::new();
        let mut column_of_child = vec![None; tree.len()];
        for v in tree.internal_vertices() {
            let j = tree.query(v).expect("internal");
            for e in tree.edges(v) {
                let s = weights.edge_weight(tree, e.child).sqrt();
                let c = matrix.push_column(&[(v, s), (e.child, -s)]);
                column_of_child[e.child] = Some(c);
                columns.push(InputColumn {
                    from: v,
                    to: e.child,
                    color: e.color,
                    availability: Availability::Query {
                        position: j,
                        answers: e.label.symbols().to_vec(),
                    },
                });
            }
        }
        Ok(Self {
            tree: tree.clone(),
            weights,
            columns,
            matrix,
            column_of_child,
        })
    }

    /// Program with `W_black = 1/G`, `W_red = 1/T`.
    pub fn with_default_weights(tree: &DecisionTree) -> Result<Self, SpanError> {
        Self::new(tree, Weights::defaults(tree.stats()))
    }

    pub fn tree(&self) -> &DecisionTree {
        &self.tree
    }

    pub fn weights(&self) -> &Weights<T> {
        &self.weights
    }

    pub fn columns(&self) -> &[InputColumn] {
        &self.columns
    }

    /// The operator `A` over the vertex basis.
    pub fn matrix(&self) -> &SparseMatrix<T> {
        &self.matrix
    }

    pub fn column_of_edge_into(&self, child: VertexId) -> Option<usize> {
        self.column_of_child[child]
    }

    /// `|t_z⟩ = |root⟩ − |z⟩`
    pub fn target(&self, leaf: VertexId) -> Vec<T> {
        let mut t = vec![T::zero(); self.tree.len()];
        t[self.tree.root()] = T::one();
        t[leaf] -= T::one();
        t
    }

    pub fn available(&self, x: &[usize]) -> Vec<bool> {
        self.columns
            .iter()
            .map(|c| c.availability.is_available(x))
            .collect()
    }

    pub fn witnesses(&self, x: &[usize]) -> Result<WitnessPair<T>, SpanError> {
        let leaf = self.tree.evaluate(x)?.leaf;
        Ok(self.witnesses_for_leaf(leaf))
    }

    /// Witnesses for any input reaching `leaf` (they depend only on the path).
    pub fn witnesses_for_leaf(&self, leaf: VertexId) -> WitnessPair<T> {
        let path = self.tree.path_to(leaf);
        let mut positive = vec![T::zero(); self.columns.len()];
        let mut negative = vec![T::zero(); self.tree.len()];
        for &v in &path {
            negative[v] = T::one();
        }
        for &child in &path[1..] {
            let c = self.column_of_child[child].expect("non-root");
            positive[c] = T::one() / self.weights.edge_weight(&self.tree, child).sqrt();
        }
        let positive_size = positive.iter().map(|&w| w * w).sum();
        let negative_size = self
            .matrix
            .mul_t_vec(&negative)
            .into_iter()
            .map(|w| w * w)
            .sum();
        WitnessPair {
            leaf,
            positive,
            negative,
            positive_size,
            negative_size,
        }
    }

    pub fn check_witnesses(&self, x: &[usize], w: &WitnessPair<T>) -> WitnessCheck {
        let avail = self.available(x);
        let image = self.matrix.mul_vec(&w.positive);
        let target = self.target(w.leaf);
        let target_residual = image
            .iter()
            .zip(&target)
            .map(|(a, b)| (*a - *b).as_f64().powi(2))
            .sum::<f64>()
            .sqrt();
        let overlaps = self.matrix.mul_t_vec(&w.negative);
        let available_overlap = overlaps
            .iter()
            .zip(&avail)
            .filter(|(_, a)| **a)
            .map(|(o, _)| o.as_f64().abs())
            .fold(0.0, f64::max);
        let root = self.tree.root();
        let target_overlap = self
            .tree
            .leaves()
            .map(|z| {
                let ip = w.negative[root] - w.negative[z];
                let want = if z == w.leaf { T::zero() } else { T::one() };
                (ip - want).as_f64().abs()
            })
            .fold(0.0, f64::max);
        WitnessCheck {
            target_residual,
            available_overlap,
            target_overlap,
        }
    }
}

/// Outcome of [`verify_span_program`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub inputs: usize,
    pub max_target_residual: f64,
    pub max_available_overlap: f64,
    /// Smallest least-squares residual of a wrong target (must stay away from 0).
    pub min_wrong_target_residual: f64,
    /// Largest least-squares residual of the correct target.
    pub max_correct_target_residual: f64,
    pub max_positive_size: f64,
    pub max_negative_size: f64,
}

/// Checks the span program on every input of `domain`: witness identities,
/// and by least squares that exactly the correct target lies in the span of
/// the available columns.
pub fn verify_span_program<T: Real>(
    sp: &SpanProgram<T>,
    domain: &[Vec<usize>],
) -> Result<VerifyReport, SpanError> {
    let a = sp.matrix().to_dense_f64();
    let leaves: Vec<VertexId> = sp.tree().leaves().collect();
    let root = sp.tree().root();
    let per_input: Vec<Result<[f64; 6], SpanError>> = domain
        .par_iter()
        .map(|x| {
            let fail = |clause: String| SpanError::Violation {
                input: x.clone(),
                clause,
            };
            let w = sp.witnesses(x)?;
            let check = sp.check_witnesses(x, &w);
            if check.target_residual > WITNESS_TOL {
                return Err(fail(format!(
                    "A·w misses the target by {:e}",
                    check.target_residual
                )));
            }
            if check.available_overlap > WITNESS_TOL {
                return Err(fail(format!(
                    "negative witness overlaps an available column by {:e}",
                    check.available_overlap
                )));
            }
            if check.target_overlap > WITNESS_TOL {
                return Err(fail("negative witness has wrong target overlaps".into()));
            }
            let avail = sp.available(x);
            let keep: Vec<usize> = (0..avail.len()).filter(|&c| avail[c]).collect();
            let sub = DMatrix::from_fn(a.nrows(), keep.len(), |r, c| a[(r, keep[c])]);
            let basis = dense::column_space_basis(&sub);
            let mut correct = 0.0;
            let mut wrong = f64::INFINITY;
            for &z in &leaves {
                let mut t = DVector::zeros(a.nrows());
                t[root] = 1.0;
                t[z] -= 1.0;
                let res = dense::residual_to_span(&basis, &t);
                if z == w.leaf {
                    correct = res;
                } else {
                    wrong = wrong.min(res);
                }
            }
            if correct > WITNESS_TOL {
                return Err(fail(format!(
                    "correct target not in the available span (residual {correct:e})"
                )));
            }
            if wrong < 1e-6 {
                return Err(fail(format!(
                    "a wrong target lies in the available span (residual {wrong:e})"
                )));
            }
            Ok([
                check.target_residual,
                check.available_overlap,
                wrong,
                correct,
                w.positive_size.as_f64(),
                w.negative_size.as_f64(),
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtree::{all_inputs, Label, TreeBuilder};

    fn chain(n: usize) -> DecisionTree {
        let mut b = TreeBuilder::new(n, 2);
        let vs: Vec<_> = (0..n).map(|j| b.add_internal(j)).collect();
        let last = b.add_leaf(0);
        for j in 0..n {
            let z = b.add_leaf(j + 1);
            b.add_edge(vs[j], z, Label::singleton(1), Color::Red).unwrap();
            let next = if j + 1 < n { vs[j + 1] } else { last };
            b.add_edge(vs[j], next, Label::singleton(0), Color::Black)
                .unwrap();
        }
        b.build().unwrap()
    }

    #[test]
    fn default_weights_on_two_queries() {
        let sp = SpanProgram::<f64>::with_default_weights(&chain(2)).unwrap();
        assert_eq!(sp.weights(), &Weights::uniform(1.0, 0.5));
    }

    #[test]
    fn all_zero_witness_size() {
        let sp = SpanProgram::<f64>::with_default_weights(&chain(3)).unwrap();
        let w = sp.witnesses(&[0, 0, 0]).unwrap();
        assert!((w.positive_size - 3.0).abs() < 1e-12);
    }

    #[test]
    fn verification_passes_exhaustively() {
        let t = chain(3);
        let sp = SpanProgram::<f64>::with_default_weights(&t).unwrap();
        let rep = verify_span_program(&sp, &all_inputs(3, 2)).unwrap();
        assert_eq!(rep.inputs, 8);
        assert!(rep.max_positive_size <= 2.0 * 3.0 + 1e-12);
        assert!(rep.max_negative_size <= 2.0 + 1e-12);
    }

    #[test]
    fn non_binary_rejected() {
        let mut b = TreeBuilder::new(1, 3);
        let r = b.add_internal(0);
        let z = b.add_leaf(0);
        let y = b.add_leaf(1);
        b.add_edge(r, z, Label::new(vec![0, 1]).unwrap(), Color::Black)
            .unwrap();
        b.add_edge(r, y, Label::singleton(2), Color::Red).unwrap();
        let t = b.build().unwrap();
        assert!(matches!(
            SpanProgram::<f64>::with_default_weights(&t),
            Err(SpanError::Unsupported(_))
        ));
    }
}
