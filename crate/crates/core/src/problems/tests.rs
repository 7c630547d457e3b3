use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::dtree::{all_inputs, Color, Materialized, TreeAccess};

fn graph(n: usize, edges: &[(usize, usize)]) -> GraphInstance {
    GraphInstance::from_edges(n, false, edges).unwrap()
}

fn run_tree(f: &Frontend, g: &GraphInstance) -> (Answer, usize) {
    let x = f.problem.encode(g).unwrap();
    let e = f.tree.evaluate(&x).unwrap();
    (f.answer(f.tree.output(e.leaf).unwrap()).clone(), e.red_count())
}

#[test]
fn bfs_on_a_path() {
    let f = Problem::Bfs { n: 3, directed: false }.build().unwrap();
    let (ans, reds) = run_tree(&f, &graph(3, &[(0, 1), (1, 2)]));
    assert_eq!(ans, Answer::Edges(vec![(0, 1), (1, 2)]));
    assert_eq!(reds, 2);
    assert_eq!(reference::bfs_forest(&graph(3, &[(0, 1), (1, 2)])), vec![(0, 1), (1, 2)]);
}

#[test]
fn bfs_on_the_empty_graph_is_all_black() {
    for n in 2..=4 {
        let f = Problem::Bfs { n, directed: false }.build().unwrap();
        let (ans, reds) = run_tree(&f, &GraphInstance::empty(n, false));
        assert_eq!(ans, Answer::Edges(vec![]));
        assert_eq!(reds, 0);
    }
}

#[test]
fn random_graphs_match_the_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let bfs = Problem::Bfs { n: 4, directed: false }.build().unwrap();
    let dbfs = Problem::Bfs { n: 4, directed: true }.build().unwrap();
    let bip = Problem::Bipartite { n: 4 }.build().unwrap();
    let cyc = Problem::Cycle { n: 4 }.build().unwrap();
    let mat = Problem::Matching { n: 4 }.build().unwrap();
    for _ in 0..30 {
        let g = GraphInstance::random(&mut rng, 4, 0.5, false);
        let (a, reds) = run_tree(&bfs, &g);
        assert_eq!(a, Answer::Edges(reference::bfs_forest(&g)));
        assert!(reds <= 3);
        assert_eq!(run_tree(&bip, &g).0, Answer::Flag(reference::is_bipartite(&g)));
        assert_eq!(run_tree(&cyc, &g).0, Answer::Flag(reference::has_cycle(&g)));
        let (m, reds) = run_tree(&mat, &g);
        let Answer::Edges(m) = m else { panic!("matching answer") };
        assert!(reference::is_maximal_matching(&g, &m));
        assert!(reds <= 2);
        let d = GraphInstance::random(&mut rng, 4, 0.4, true);
        assert_eq!(run_tree(&dbfs, &d).0, Answer::Edges(reference::bfs_forest(&d)));
    }
}

#[test]
fn small_cycles() {
    let c3 = graph(3, &[(0, 1), (1, 2), (0, 2)]);
    let c4 = graph(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]);
    let c5 = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]);
    assert_eq!(run_tree(&Problem::Bipartite { n: 3 }.build().unwrap(), &c3).0, Answer::Flag(false));
    assert_eq!(run_tree(&Problem::Bipartite { n: 4 }.build().unwrap(), &c4).0, Answer::Flag(true));
    assert_eq!(run_tree(&Problem::Cycle { n: 4 }.build().unwrap(), &c4).0, Answer::Flag(true));
    assert!(!reference::is_bipartite(&c5));
}

#[test]
fn matching_examples() {
    let f = Problem::Matching { n: 2 }.build().unwrap();
    assert_eq!(run_tree(&f, &graph(2, &[(0, 1)])).0, Answer::Edges(vec![(0, 1)]));
    let f = Problem::Matching { n: 4 }.build().unwrap();
    let star = graph(4, &[(0, 1), (0, 2), (0, 3)]);
    let Answer::Edges(m) = run_tree(&f, &star).0 else { panic!() };
    assert_eq!(m.len(), 1);
}

#[test]
fn first_marked_reference() {
    assert_eq!(Problem::FirstMarked { n: 4 }.reference(&[0, 0, 1, 0]).unwrap(), Answer::Index(3));
    assert_eq!(first_marked(&[0, 1]), 2);
}

#[test]
fn exhaustive_frontends_agree_with_oracles() {
    let problems = [
        Problem::Bfs { n: 4, directed: false },
        Problem::Bfs { n: 3, directed: true },
        Problem::Bipartite { n: 4 },
        Problem::Cycle { n: 4 },
        Problem::Matching { n: 4 },
        Problem::FirstMarked { n: 5 },
    ];
    for p in problems {
        let f = p.build().unwrap();
        let stats = f.tree.stats();
        let n = p.n();
        match p {
            Problem::Bfs { .. } => assert!(stats.mistakes < n),
            Problem::Bipartite { .. } | Problem::Cycle { .. } => assert!(stats.mistakes <= n),
            Problem::Matching { .. } => {
                assert!(stats.mistakes <= n / 2);
                assert!(stats.depth <= n * n);
            }
            Problem::FirstMarked { .. } => assert_eq!(stats.mistakes, 1),
        }
        for x in all_inputs(f.tree.arity(), 2) {
            let leaf = f.tree.evaluate(&x).unwrap().leaf;
            let ans = f.answer(f.tree.output(leaf).unwrap());
            assert!(f.accepts(&x, ans).unwrap(), "{p:?} {x:?}");
        }
    }
}

/// Lazy answers agree with the materialized tree vertex by vertex.
fn check_lazy<A: TreeAccess>(a: &A, m: &Materialized<A::Vertex, A::Output>) {
    let t = &m.tree;
    for v in 0..t.len() {
        let lv = &m.vertices[v];
        let view = a.local(lv).unwrap();
        match (view.parent, t.parent(v)) {
            (None, None) => {}
            (Some((p, c)), Some(q)) => {
                assert_eq!(p, m.vertices[q]);
                assert_eq!(c, t.parent_edge(v).unwrap().color);
            }
            other => panic!("parent mismatch at {v}: {other:?}"),
        }
        let Ok(len) = t.black_path_len(v) else {
            assert!(a.black_path_len(lv).is_err());
            assert!(a.black_path_vertex(lv, 1).is_err());
            continue;
        };
        assert_eq!(a.black_path_len(lv).unwrap(), len);
        for k in 1..=len {
            assert_eq!(a.black_path_vertex(lv, k).unwrap(), m.vertices[t.black_path_vertex(v, k).unwrap()]);
        }
        assert!(a.black_path_vertex(lv, len + 1).is_err());
    }
}

#[test]
fn lazy_trees_agree_with_materialization() {
    for n in 2..=4 {
        for search in [Search::Forest, Search::Bipartite, Search::Cycle] {
            let a = BfsTree::new(n, false, search).unwrap();
            check_lazy(&a, &materialize(&a, MAX_TREE_VERTICES).unwrap());
        }
        let a = BfsTree::new(n, true, Search::Forest).unwrap();
        if n <= 3 {
            check_lazy(&a, &materialize(&a, MAX_TREE_VERTICES).unwrap());
        }
        let a = MatchingTree::new(n).unwrap();
        check_lazy(&a, &materialize(&a, MAX_TREE_VERTICES).unwrap());
    }
}

#[test]
fn black_runs_leave_the_search_lists_alone() {
    let a = BfsTree::new(4, false, Search::Forest).unwrap();
    let m = materialize(&a, MAX_TREE_VERTICES).unwrap();
    for v in 0..m.tree.len() {
        if let Some(e) = m.tree.black_edge(v) {
            let (s, t) = (&m.vertices[v], &m.vertices[e.child]);
            assert_eq!(s.forest(), t.forest());
            // Only restart seeds may extend the queue; the prefix is unchanged.
            assert_eq!(&t.queue()[..s.queue().len()], s.queue());
            for &w in &t.queue()[s.queue().len()..] {
                assert!(!s.visited()[w]);
            }
            assert!(t.head() >= s.head());
        }
    }
}

#[test]
fn black_path_jumps_use_logarithmic_pointer_work() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in [16usize, 64, 256] {
        let a = MatchingTree::new(n).unwrap();
        let b = BfsTree::new(n, false, Search::Forest).unwrap();
        let log = (n as f64).log2().ceil() as u64;
        // Walk a random root-leaf path a few steps, then jump along its run.
        let mut v = a.root();
        let mut w = b.root();
        for _ in 0..(n / 4) {
            let view = a.local(&v).unwrap();
            if let Some(c) = view.children.iter().find(|c| c.color == if rand::Rng::gen_bool(&mut rng, 0.2) { Color::Red } else { Color::Black }) {
                v = c.vertex.clone();
            }
            let view = b.local(&w).unwrap();
            if let Some(c) = view.children.iter().find(|c| c.color == Color::Red) {
                w = c.vertex.clone();
            }
        }
        a.reset_pointer_ops();
        let len = a.black_path_len(&v).unwrap();
        a.black_path_vertex(&v, len / 2 + 1).unwrap();
        a.local(&v).unwrap();
        assert!(a.pointer_ops() <= 40 * log, "matching n={n}: {}", a.pointer_ops());
        b.reset_pointer_ops();
        let len = b.black_path_len(&w).unwrap();
        let u = b.black_path_vertex(&w, len / 2 + 1).unwrap();
        // Restart seeds appended after the last discovery cost one update each.
        let q = if u.queue().len() > w.queue().len() { u.queue() } else { w.queue() };
        let last = w.forest().last().map_or(0, |&(_, j)| q.iter().position(|&x| x == j).unwrap());
        let seeds = (q.len() - last - 1) as u64;
        assert!(b.pointer_ops() <= 40 * log * (1 + seeds), "bfs n={n}: {}", b.pointer_ops());
    }
}
