use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::dense;
use crate::dtree::random::{random_tree, RandomTreeParams};
use crate::dtree::DecisionTree;
use crate::problems::first_marked_tree;
use crate::sparse::SparseMatrix;

struct Case {
    g: DecisionGraph,
    m: SparseMatrix<f64>,
    alpha: f64,
    w: Weights<f64>,
}

fn case(t: &DecisionTree, pad: bool) -> Case {
    let g = DecisionGraph::new(t, pad).unwrap();
    let w = Weights::defaults(t.stats());
    let alpha = 0.37;
    let m = g.assemble_matrix(alpha, &w).unwrap();
    Case { g, m, alpha, w }
}

fn cases() -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut out: Vec<Case> = (1..=5).map(|n| case(&first_marked_tree(n), false)).collect();
    out.push(case(&first_marked_tree(3), true));
    for i in 0..12 {
        let t = random_tree(&mut rng, RandomTreeParams::binary(2 + i % 5));
        out.push(case(&t, i % 3 == 0));
    }
    out
}

fn apply_dense(r: &KernelReflector<f64>, col: usize, f: impl Fn(&KernelReflector<f64>, &mut [C<f64>])) -> Vec<C<f64>> {
    let mut s = vec![Complex::new(0.0, 0.0); r.dim()];
    s[col] = Complex::new(1.0, 0.0);
    f(r, &mut s);
    s
}

fn as_matrix(r: &KernelReflector<f64>, f: impl Fn(&KernelReflector<f64>, &mut [C<f64>]) + Copy) -> DMatrix<f64> {
    let n = r.dim();
    let mut out = DMatrix::zeros(n, n);
    for c in 0..n {
        let s = apply_dense(r, c, f);
        for (i, z) in s.iter().enumerate() {
            assert!(z.im.abs() < 1e-12);
            out[(i, c)] = z.re;
        }
    }
    out
}

#[test]
fn basis_vectors_lie_in_the_kernel_and_span_it() {
    for c in cases() {
        let basis = KernelBasis::new(&c.g, c.alpha, &c.w).unwrap();
        let a = c.m.to_dense_f64();
        let vs = basis.to_dense(c.m.cols());
        assert_eq!(vs.len(), c.g.expected_nullity());
        assert_eq!(vs.len(), c.m.cols() - dense::rank(&a));
        for v in &vs {
            assert!((&a * v).norm() < 1e-10);
        }
        let p = dense::projector(c.m.cols(), &dense::orthonormalize(&vs));
        let oracle = dense::null_space_projector(&a);
        assert!(dense::operator_norm(&(p - oracle)) < 1e-8);
    }
}

#[test]
fn families_are_mutually_orthogonal() {
    for c in cases() {
        let basis = KernelBasis::new(&c.g, c.alpha, &c.w).unwrap();
        let dim = c.m.cols();
        let dense1: Vec<_> = KernelBasis {
            type1: basis.type1.clone(),
            type2: vec![],
        }
        .to_dense(dim);
        for i in 0..dense1.len() {
            for j in 0..i {
                assert!(dense1[i].dot(&dense1[j]).abs() < 1e-10);
            }
        }
        let fams: Vec<Vec<DVector<f64>>> = basis
            .type2
            .iter()
            .map(|f| {
                KernelBasis {
                    type1: vec![],
                    type2: vec![f.clone()],
                }
                .to_dense(dim)
            })
            .collect();
        for (i, f) in fams.iter().enumerate() {
            for v in f {
                for u in &dense1 {
                    assert!(v.dot(u).abs() < 1e-10);
                }
                for g in &fams[..i] {
                    for u in g {
                        assert!(v.dot(u).abs() < 1e-10);
                    }
                }
            }
        }
    }
}

#[test]
fn structured_reflection_equals_dense_reflection() {
    for c in cases() {
        let r = KernelReflector::new(&c.g, c.alpha, &c.w).unwrap();
        let ops = OpCounter::new();
        let got = as_matrix(&r, |r, s| r.apply(s, &ops).unwrap());
        let p = dense::null_space_projector(&c.m.to_dense_f64());
        let want = &p * 2.0 - DMatrix::identity(r.dim(), r.dim());
        assert!(dense::operator_norm(&(&got - want)) < 1e-8);
        let sq = &got * &got - DMatrix::identity(r.dim(), r.dim());
        assert!(sq.abs().max() < 1e-10);
    }
}

#[test]
fn kernel_vectors_are_fixed_points() {
    for c in cases().into_iter().take(6) {
        let r = KernelReflector::new(&c.g, c.alpha, &c.w).unwrap();
        let basis = KernelBasis::new(&c.g, c.alpha, &c.w).unwrap();
        let ops = OpCounter::new();
        for v in basis.to_dense(r.dim()) {
            let mut s: Vec<C<f64>> = v.iter().map(|&x| Complex::new(x, 0.0)).collect();
            r.apply(&mut s, &ops).unwrap();
            for (a, b) in s.iter().zip(v.iter()) {
                assert!((a.re - b).abs() < 1e-10 && a.im.abs() < 1e-12);
            }
        }
    }
}

/// Block-local reflection through `family`, identity outside `coords`.
fn local_reflection(dim: usize, family: &[DVector<f64>], coords: &[DVector<f64>]) -> DMatrix<f64> {
    let q = dense::orthonormalize(family);
    let pf = dense::projector(dim, &q);
    let pc = dense::projector(dim, &dense::orthonormalize(coords));
    DMatrix::identity(dim, dim) + pf * 2.0 - pc * 2.0
}

fn unit(dim: usize, entries: &[(usize, f64)]) -> DVector<f64> {
    let mut v = DVector::zeros(dim);
    for &(i, x) in entries {
        v[i] += x;
    }
    v
}

/// Orthonormal coordinate vectors a family lives on, in standard coordinates.
fn family_coords(dim: usize, vecs: &[Vec<(usize, f64)>]) -> Vec<DVector<f64>> {
    // Each X coordinate appears as the pair (±s, s) on one red/pseudo pair;
    // plain coordinates appear alone.
    let mut out = Vec::new();
    for v in vecs {
        let mut i = 0;
        while i < v.len() {
            if i + 1 < v.len() && v[i + 1].0 == v[i].0 + 1 && v[i].1.abs() == v[i + 1].1.abs() && i > 0 {
                out.push(unit(dim, &[(v[i].0, v[i].1), (v[i + 1].0, v[i + 1].1)]));
                i += 2;
            } else {
                out.push(unit(dim, &[(v[i].0, 1.0)]));
                i += 1;
            }
        }
    }
    out
}

#[test]
fn type1_reflection_is_local_and_matches_dense() {
    for c in cases() {
        let r = KernelReflector::new(&c.g, c.alpha, &c.w).unwrap();
        let basis = KernelBasis::new(&c.g, c.alpha, &c.w).unwrap();
        let dim = r.dim();
        let ops = OpCounter::new();
        let got = as_matrix(&r, |r, s| r.type1_reflection(s, &ops).unwrap());
        let fam = KernelBasis {
            type1: basis.type1.clone(),
            type2: vec![],
        }
        .to_dense(dim);
        let want = local_reflection(dim, &fam, &family_coords(dim, &basis.type1));
        assert!(dense::operator_norm(&(got - want)) < 1e-10);
    }
}

#[test]
fn type1_examples() {
    let c = case(&first_marked_tree(2), false);
    let r = KernelReflector::new(&c.g, c.alpha, &c.w).unwrap();
    let basis = KernelBasis::new(&c.g, c.alpha, &c.w).unwrap();
    let dim = r.dim();
    let ops = OpCounter::new();
    for v in &basis.type1 {
        let d = unit(dim, v);
        let mut s: Vec<C<f64>> = d.iter().map(|&x| Complex::new(x, 0.0)).collect();
        r.type1_reflection(&mut s, &ops).unwrap();
        assert!(s.iter().zip(d.iter()).all(|(a, b)| (a.re - b).abs() < 1e-12));
        // (−b, a) on the same two coordinates is orthogonal and gets negated
        let (i, a) = v[0];
        let x_unit = unit(dim, &v[1..]).normalize();
        let b = d.dot(&x_unit);
        let orth = unit(dim, &[(i, -b)]) + x_unit * a;
        let mut s: Vec<C<f64>> = orth.iter().map(|&x| Complex::new(x, 0.0)).collect();
        r.type1_reflection(&mut s, &ops).unwrap();
        assert!(s.iter().zip(orth.iter()).all(|(p, q)| (p.re + q).abs() < 1e-12));
    }
}

#[test]
fn cycle_reflection_matches_dense_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for c in cases() {
        let r = KernelReflector::new(&c.g, c.alpha, &c.w).unwrap();
        let basis = KernelBasis::new(&c.g, c.alpha, &c.w).unwrap();
        let dim = r.dim();
        let ops = OpCounter::new();
        for (k, fam) in basis.type2.iter().enumerate() {
            let dense_fam = KernelBasis {
                type1: vec![],
                type2: vec![fam.clone()],
            }
            .to_dense(dim);
            let want = local_reflection(dim, &dense_fam, &family_coords(dim, fam));
            let v = DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
            let mut s: Vec<C<f64>> = v.iter().map(|&x| Complex::new(x, 0.0)).collect();
            r.cycle_reflection(k, &mut s, &ops).unwrap();
            let w = &want * &v;
            for (a, b) in s.iter().zip(w.iter()) {
                assert!((a.re - b).abs() < 1e-10 && a.im.abs() < 1e-10);
            }
        }
    }
}

#[test]
fn first_marked_basis_size() {
    for n in 2..=8 {
        let c = case(&first_marked_tree(n), false);
        let basis = KernelBasis::new(&c.g, c.alpha, &c.w).unwrap();
        assert_eq!(basis.len(), 2 * n + 4);
    }
}

#[test]
fn wrong_dimension_is_rejected() {
    let c = case(&first_marked_tree(2), false);
    let r = KernelReflector::new(&c.g, c.alpha, &c.w).unwrap();
    let mut s = vec![Complex::new(0.0, 0.0); 3];
    assert!(matches!(
        r.apply(&mut s, &OpCounter::new()),
        Err(KernelError::Dimension { .. })
    ));
}

#[test]
fn single_precision_reflection_is_an_involution() {
    let t = first_marked_tree(4);
    let g = DecisionGraph::new(&t, false).unwrap();
    let w = Weights::<f32>::defaults(t.stats());
    let r = KernelReflector::new(&g, 0.3f32, &w).unwrap();
    let ops = OpCounter::new();
    let mut s: Vec<C<f32>> = (0..r.dim()).map(|i| Complex::new(i as f32 * 0.1, 0.0)).collect();
    let orig = s.clone();
    r.apply(&mut s, &ops).unwrap();
    r.apply(&mut s, &ops).unwrap();
    for (a, b) in s.iter().zip(&orig) {
        assert!((a - b).norm() < 1e-4);
    }
}
