use approx::assert_relative_eq;
use proptest::prelude::*;

use spantree::experiment::{run_experiment, ExperimentError, ExperimentOptions, Inputs};
use spantree::problems::{reference, Answer, GraphInstance, Problem};
use spantree::qsim::{self, Mode, RunParams};
use spantree::report::to_json;
use spantree::{InstanceF32, InstanceF64};

fn opts() -> ExperimentOptions {
    ExperimentOptions::default()
}

#[test]
fn first_marked_report_is_reproducible() {
    let p = Problem::FirstMarked { n: 3 };
    let a = run_experiment(&p, &Inputs::All, &opts()).unwrap();
    let b = run_experiment(&p, &Inputs::All, &opts()).unwrap();
    assert_eq!(to_json(&a), to_json(&b));
    assert_eq!(a.schema, 1);
    assert_eq!(a.runs.len(), 8);
    assert!(a.summary.passed && a.summary.all_correct);
    assert!(a.summary.min_success >= 0.96);
    assert_eq!(a.kernel.basis_vectors, 2 * 3 + 4);
    let dense = a.kernel.dense.as_ref().unwrap();
    assert!(dense.max_residual < 1e-10 && dense.reflection_distance < 1e-8);
    assert!(a.witness.tree_positive <= a.witness.tree_positive_bound);
    assert!(a.witness.tree_negative <= a.witness.tree_negative_bound);
    let text = to_json(&a);
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed["runs"][0]["expected"], serde_json::json!({ "index": 0 }));
}

#[test]
fn ancilla_and_exact_modes_agree_on_first_marked() {
    let p = Problem::FirstMarked { n: 2 };
    let exact = run_experiment(&p, &Inputs::All, &opts()).unwrap();
    let ancilla = run_experiment(
        &p,
        &Inputs::All,
        &ExperimentOptions {
            mode: Mode::Ancilla,
            ..opts()
        },
    )
    .unwrap();
    for (e, a) in exact.runs.iter().zip(&ancilla.runs) {
        assert_eq!(e.decoded, a.decoded);
        assert_relative_eq!(e.success, a.success, epsilon = 2.0 * 0.05);
    }
    assert!(ancilla.runs[0].counts.controlled_calls > 0);
}

#[test]
fn graph_answers_are_one_indexed() {
    let g = GraphInstance::parse("3 2\n1 2\n2 3\n", false).unwrap();
    let p = Problem::Bfs { n: 3, directed: false };
    let x = p.encode(&g).unwrap();
    let r = run_experiment(&p, &Inputs::Given(vec![x]), &opts()).unwrap();
    assert_eq!(r.post_process, Some(Answer::Edges(vec![(1, 2), (2, 3)])));
    assert!(r.runs[0].correct);
}

#[test]
fn parameter_and_budget_errors() {
    let p = Problem::FirstMarked { n: 3 };
    for eps in [0.0, 0.5, -0.1, f64::NAN] {
        let e = run_experiment(&p, &Inputs::All, &ExperimentOptions { epsilon: eps, ..opts() });
        assert!(matches!(e, Err(ExperimentError::Parameter(_))), "{eps}");
    }
    let e = run_experiment(&p, &Inputs::All, &ExperimentOptions { memory_budget: 64, ..opts() });
    assert!(matches!(e, Err(ExperimentError::Budget { .. })));
    let e = run_experiment(&p, &Inputs::Given(vec![vec![0, 2, 0]]), &opts());
    assert!(matches!(e, Err(ExperimentError::Tree(_))));
    let e = run_experiment(&Problem::FirstMarked { n: 30 }, &Inputs::All, &opts());
    assert!(matches!(e, Err(ExperimentError::Parameter(_))));
}

#[test]
fn padded_instances_run_correctly() {
    let p = Problem::Matching { n: 3 };
    let r = run_experiment(&p, &Inputs::All, &ExperimentOptions { pad: true, ..opts() }).unwrap();
    assert!(r.summary.passed && r.summary.all_correct);
    assert!(r.parameters.padded);
}

#[test]
fn scalar_aliases_build_the_same_instance() {
    let f = Problem::FirstMarked { n: 3 }.build().unwrap();
    let a = InstanceF64::new(&f.tree, 0.05, false).unwrap();
    let b = InstanceF32::new(&f.tree, 0.05, false).unwrap();
    assert_eq!(a.dim(), b.dim());
    assert_relative_eq!(a.complexity(), b.complexity() as f64, max_relative = 1e-5);
    let r = qsim::run(&b, &[0, 1, 0], &RunParams::default()).unwrap();
    assert_eq!(r.decoded_output, 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn simulated_bfs_matches_the_oracle(seed in any::<u64>(), p in 0.0f64..=1.0) {
        let g = GraphInstance::random_seeded(seed, 3, p, false).unwrap();
        let prob = Problem::Bipartite { n: 3 };
        let x = prob.encode(&g).unwrap();
        let r = run_experiment(&prob, &Inputs::Given(vec![x]), &opts()).unwrap();
        prop_assert_eq!(&r.runs[0].decoded, &Answer::Flag(reference::is_bipartite(&g)));
        prop_assert!(r.runs[0].success >= 0.96);
    }
}
