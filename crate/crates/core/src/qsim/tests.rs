use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::dtree::all_inputs;
use crate::problems::{first_marked, first_marked_tree};

fn instance(n: usize, eps: f64) -> Instance<f64> {
    Instance::new(&first_marked_tree(n), eps, false).unwrap()
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> Vec<C<f64>> {
    let mut s: Vec<C<f64>> = (0..n)
        .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = crate::scalar::norm_sqr(&s).sqrt();
    s.iter_mut().for_each(|z| *z /= norm);
    s
}

#[test]
fn input_reflection_keeps_root_and_leaves_and_negates_pseudo_edges() {
    let inst = instance(3, 0.05);
    let cols = inst.graph().columns();
    for x in all_inputs(3, 2) {
        let walk = inst.walk(&x).unwrap();
        let mut s = vec![Complex::new(1.0, 0.0); inst.dim()];
        reflect_available(&mut s, walk.mask());
        for (pos, tag) in cols.tags().iter().enumerate() {
            match tag {
                crate::mgraph::ColumnTag::Root | crate::mgraph::ColumnTag::Leaf(_) => assert_eq!(s[pos].re, 1.0),
                crate::mgraph::ColumnTag::Pseudo(_) => assert_eq!(s[pos].re, -1.0),
                _ => {}
            }
        }
        reflect_available(&mut s, walk.mask());
        assert!(s.iter().all(|z| z.re == 1.0));
    }
}

#[test]
fn walk_is_orthogonal_and_inverse_undoes_it() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let inst = instance(4, 0.05);
    for x in [vec![0, 0, 0, 0], vec![0, 1, 0, 1], vec![1, 1, 1, 1]] {
        let walk = inst.walk(&x).unwrap();
        let u = dense_walk(&walk);
        let id = DMatrix::identity(inst.dim(), inst.dim());
        assert!((u.transpose() * &u - id).abs().max() < 1e-10);
        let s0 = random_state(&mut rng, inst.dim());
        let mut s = s0.clone();
        walk.apply(&mut s);
        assert!((crate::scalar::norm_sqr(&s) - 1.0).abs() < 1e-10);
        walk.apply_inverse(&mut s);
        for (a, b) in s.iter().zip(&s0) {
            assert!((a - b).norm() < 1e-10);
        }
    }
}

#[test]
fn spectrum_is_closed_under_conjugation() {
    let inst = instance(3, 0.05);
    let walk = inst.walk(&[0, 1, 0]).unwrap();
    let u = dense_walk(&walk);
    let eig = u.complex_eigenvalues();
    for z in eig.iter() {
        assert!(eig.iter().any(|w| (w - z.conj()).norm() < 1e-8));
    }
}

#[test]
fn spectral_items_hold_on_first_marked() {
    let inst = instance(3, 0.05);
    let w = inst.complexity();
    let e2 = 0.05 * 0.05;
    let thetas = [0.0, e2 / w, 2.0 * e2 / w, 5.0 * e2 / w];
    for x in all_inputs(3, 2) {
        let walk = inst.walk(&x).unwrap();
        let spec = ExactSpectral::new(&dense_walk(&walk));
        let r = spectral_check(&inst, &x, &spec, &thetas).unwrap();
        assert!(r.holds(1e-9), "{x:?}: {r:?}");
        assert!(r.bands[0].value < 1e-12);
        let ratio = effective_gap_ratio(&inst, &x, &spec, &thetas[1..], 4, 9).unwrap();
        assert!(ratio <= 1.0 + 1e-9, "{ratio}");
    }
}

#[test]
fn exact_mode_fixes_zero_phase_and_negates_pi_phase() {
    let inst = instance(2, 0.05);
    let walk = inst.walk(&[1, 0]).unwrap();
    let u = dense_walk(&walk);
    let spec = ExactSpectral::new(&u);
    assert!(spec.zero_dimension() >= 1);
    for (k, &p) in spec.phases.iter().enumerate() {
        let v: Vec<C<f64>> = spec.vectors.column(k).iter().map(|&a| Complex::new(a, 0.0)).collect();
        let out = spec.apply(&v);
        let sign = if p <= ZERO_PHASE_TOL { 1.0 } else { -1.0 };
        for (a, b) in out.iter().zip(&v) {
            assert!((a - b * sign).norm() < 1e-9);
        }
    }
}

#[test]
fn end_to_end_first_marked_exact() {
    for n in 2..=4 {
        let inst = instance(n, 0.05);
        for x in all_inputs(n, 2) {
            let r = run(&inst, &x, &RunParams::default()).unwrap();
            assert!(r.success >= 0.96, "n={n} x={x:?} success={}", r.success);
            assert_eq!(r.decoded_output, first_marked(&x));
            assert!((r.outcome.total() - 1.0).abs() < 1e-9);
            assert_eq!(r.counts.queries, 2 * r.counts.r_pi_applications);
        }
    }
}

#[test]
fn ancilla_and_exact_modes_agree() {
    let inst = instance(2, 0.05);
    let ancilla = RunParams {
        mode: Mode::Ancilla,
        ..RunParams::default()
    };
    for x in all_inputs(2, 2) {
        let a = run(&inst, &x, &ancilla).unwrap();
        let e = run(&inst, &x, &RunParams::default()).unwrap();
        assert!((a.success - e.success).abs() <= 2.0 * a.delta, "{} vs {}", a.success, e.success);
        assert_eq!(a.decoded_output, e.decoded_output);
        assert!((a.outcome.total() - 1.0).abs() < 1e-9);
        assert_eq!(a.counts.simulated_walk_applications, a.counts.controlled_calls);
        assert!((a.counts.controlled_calls as f64) <= a.counts.call_budget);
    }
}

#[test]
fn ancilla_mode_keeps_the_fixed_point() {
    let inst = instance(2, 0.1);
    let x = [0, 1];
    let walk = inst.walk(&x).unwrap();
    let spec = ExactSpectral::new(&dense_walk(&walk));
    // A zero-phase eigenvector survives phase detection unchanged.
    let k = spec.phases.iter().position(|&p| p <= ZERO_PHASE_TOL).unwrap();
    let v: Vec<C<f64>> = spec.vectors.column(k).iter().map(|&a| Complex::new(a, 0.0)).collect();
    let w = inst.complexity();
    let phase = PhaseParams::new(0.01 / w, 0.1).unwrap();
    let out = phase.apply_ancilla(&walk, &v);
    for (a, b) in out.iter().zip(&v) {
        assert!((a - b).norm() < 1e-9);
    }
}

#[test]
fn small_complexity_is_rejected() {
    let inst = instance(1, 0.9);
    if inst.complexity() <= 0.9 {
        assert!(matches!(run(&inst, &[0], &RunParams::default()), Err(QsimError::Parameter(_))));
    }
    let t = first_marked_tree(2);
    assert!(matches!(Instance::<f64>::new(&t, 1.5, false), Err(QsimError::Parameter(_))));
}

#[test]
fn budget_is_enforced() {
    let inst = instance(3, 0.05);
    for mode in [Mode::ExactSpectral, Mode::Ancilla] {
        let p = RunParams {
            mode,
            memory_budget: 1024,
            diagnostics: false,
        };
        assert!(matches!(run(&inst, &[0, 0, 0], &p), Err(QsimError::Budget { .. })));
    }
}

#[test]
fn diagnostics_are_attached_on_request() {
    let inst = instance(2, 0.05);
    let p = RunParams {
        diagnostics: true,
        ..RunParams::default()
    };
    let r = run(&inst, &[0, 1], &p).unwrap();
    let d = r.diagnostics.unwrap();
    assert!(d.holds(1e-9));
    assert_eq!(d.bands.len(), 1);
}

#[test]
fn sampler_is_deterministic() {
    let inst = instance(2, 0.05);
    let r = run(&inst, &[1, 1], &RunParams::default()).unwrap();
    let a = r.outcome.sample(4, 50);
    assert_eq!(a, r.outcome.sample(4, 50));
    let leaf = inst.graph().columns().leaf(r.expected_leaf);
    assert!(a.iter().filter(|s| **s == Some(leaf)).count() > 40);
}

#[test]
fn single_precision_run_succeeds() {
    let t = first_marked_tree(3);
    let inst = Instance::<f32>::new(&t, 0.05, false).unwrap();
    let p = RunParams {
        mode: Mode::Ancilla,
        ..RunParams::default()
    };
    let r = run(&inst, &[0, 0, 1], &p).unwrap();
    assert_eq!(r.decoded_output, 3);
    assert!(r.success >= 0.9);
}
