use super::fenwick::Fenwick;
use super::graph::{position, position_count};
use super::Answer;
use crate::dtree::{ChildView, Color, Label, LocalView, TreeAccess, TreeError, VertexKind};
use crate::fft::OpCounter;

/// Snapshot of the row-by-row greedy maximal matching.
///
/// Pending query `(row, next)`; pairs with a matched endpoint are skipped.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MatchState {
    row: usize,
    next: usize,
    matched: Vec<bool>,
    unmatched: Fenwick,
    edges: Vec<(usize, usize)>,
    steps: usize,
    history: Vec<usize>,
    done: bool,
}

impl MatchState {
    pub fn matching(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn pending(&self) -> Option<(usize, usize)> {
        (!self.done).then_some((self.row, self.next))
    }
}

/// Lazy decision tree of greedy maximal matching (undirected, matrix model).
///
/// Rows `i` and columns `j > i` are scanned in ascending order; the guess is
/// "no edge" and matching a pair is a red edge, so `G ≤ ⌊n/2⌋`.
#[derive(Debug)]
pub struct MatchingTree {
    n: usize,
    ops: OpCounter,
}

fn overshoot() -> TreeError {
    TreeError::Structure("black move past the end of the run".into())
}

/// `Σ_{a<t} (r − a − 1)`: pairs in the first `t` of `r` remaining rows.
fn pairs_before(r: usize, t: usize) -> usize {
    t * (r - 1) - t * t.saturating_sub(1) / 2
}

impl MatchingTree {
    pub fn new(n: usize) -> Result<Self, TreeError> {
        if n < 2 {
            return Err(TreeError::Unsupported("graph frontends need n ≥ 2".into()));
        }
        Ok(Self { n, ops: OpCounter::new() })
    }

    pub fn pointer_ops(&self) -> u64 {
        self.ops.get()
    }

    pub fn reset_pointer_ops(&self) {
        self.ops.reset();
    }

    fn initial(&self) -> MatchState {
        let st = MatchState {
            row: 0,
            next: 1,
            matched: vec![false; self.n],
            unmatched: Fenwick::from_flags(&vec![true; self.n]),
            edges: Vec::new(),
            steps: 0,
            history: Vec::new(),
            done: false,
        };
        self.advance(st, 0).expect("zero moves")
    }

    /// Black moves left after the pending pair, by rows.
    fn layout(&self, st: &MatchState) -> (usize, usize, usize) {
        let ops = &self.ops;
        let m = st.unmatched.total(ops);
        if st.row < self.n && !st.matched[st.row] {
            let from = st.next.max(st.row + 1);
            let c = m - st.unmatched.rank(from, ops);
            let base = st.unmatched.rank(st.row, ops) + 1;
            (c, base, m - base)
        } else {
            let base = st.unmatched.rank(st.row, ops);
            (0, base, m - base)
        }
    }

    fn advance(&self, mut st: MatchState, mut s: usize) -> Result<MatchState, TreeError> {
        let ops = &self.ops;
        st.steps += s;
        if st.done {
            return if s == 0 { Ok(st) } else { Err(overshoot()) };
        }
        let (c, base, r) = self.layout(&st);
        if s < c {
            let from = st.next.max(st.row + 1);
            st.next = st.unmatched.select(st.unmatched.rank(from, ops) + s, ops);
            return Ok(st);
        }
        s -= c;
        let total = if r == 0 { 0 } else { pairs_before(r, r) };
        if s >= total {
            if s > total {
                return Err(overshoot());
            }
            st.row = self.n;
            st.next = self.n;
            st.done = true;
            return Ok(st);
        }
        // Largest t with pairs_before(t) ≤ s.
        let (mut lo, mut hi) = (0, r - 1);
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if pairs_before(r, mid) <= s {
                lo = mid;
            } else {
                hi = mid - 1;
            }
            ops.add(1);
        }
        let off = s - pairs_before(r, lo);
        st.row = st.unmatched.select(base + lo, ops);
        st.next = st.unmatched.select(base + lo + 1 + off, ops);
        Ok(st)
    }

    fn remaining(&self, st: &MatchState) -> usize {
        if st.done {
            return 0;
        }
        let (c, _, r) = self.layout(st);
        c + if r == 0 { 0 } else { pairs_before(r, r) }
    }

    fn take(&self, mut st: MatchState) -> MatchState {
        let (i, j) = (st.row, st.next);
        for v in [i, j] {
            st.matched[v] = true;
            st.unmatched.update(v, -1, &self.ops);
        }
        st.edges.push((i, j));
        st.history.push(st.steps);
        st.steps = 0;
        st.row = i + 1;
        st.next = i + 2;
        self.advance(st, 0).expect("zero moves")
    }

    fn red_parent(&self, st: &MatchState) -> MatchState {
        let mut p = st.clone();
        p.steps = p.history.pop().expect("not on the root run");
        let (i, j) = p.edges.pop().expect("a red move matched a pair");
        for v in [i, j] {
            p.matched[v] = false;
            p.unmatched.update(v, 1, &self.ops);
        }
        p.row = i;
        p.next = j;
        p.done = false;
        p
    }

    /// Leaves entered by a red edge lie on no black run.
    fn check_on_run(&self, st: &MatchState) -> Result<(), TreeError> {
        if st.done && st.steps == 0 && !st.history.is_empty() {
            return Err(TreeError::NotOnBlackPath(format!("{:?}", st.edges)));
        }
        Ok(())
    }

    fn run_start(&self, st: &MatchState) -> MatchState {
        if st.history.is_empty() {
            self.initial()
        } else {
            self.take(self.red_parent(st))
        }
    }
}

impl TreeAccess for MatchingTree {
    type Vertex = MatchState;
    type Output = Answer;

    fn arity(&self) -> usize {
        position_count(self.n, false)
    }

    fn alphabet(&self) -> usize {
        2
    }

    fn root(&self) -> MatchState {
        self.initial()
    }

    fn local(&self, v: &MatchState) -> Result<LocalView<MatchState, Answer>, TreeError> {
        let parent = if v.steps > 0 {
            Some((self.advance(self.run_start(v), v.steps - 1)?, Color::Black))
        } else if v.history.is_empty() {
            None
        } else {
            Some((self.red_parent(v), Color::Red))
        };
        if v.done {
            return Ok(LocalView {
                kind: VertexKind::Leaf,
                parent,
                children: Vec::new(),
                query: None,
                output: Some(Answer::Edges(v.edges.clone())),
            });
        }
        Ok(LocalView {
            kind: if parent.is_none() { VertexKind::Root } else { VertexKind::Internal },
            parent,
            children: vec![
                ChildView {
                    vertex: self.advance(v.clone(), 1)?,
                    label: Label::singleton(0),
                    color: Color::Black,
                },
                ChildView {
                    vertex: self.take(v.clone()),
                    label: Label::singleton(1),
                    color: Color::Red,
                },
            ],
            query: Some(position(self.n, false, v.row, v.next)),
            output: None,
        })
    }

    fn black_path_len(&self, v: &MatchState) -> Result<usize, TreeError> {
        self.check_on_run(v)?;
        Ok(self.remaining(&self.run_start(v)) + 1)
    }

    fn black_path_vertex(&self, v: &MatchState, k: usize) -> Result<MatchState, TreeError> {
        self.check_on_run(v)?;
        let start = self.run_start(v);
        let len = self.remaining(&start) + 1;
        if k == 0 || k > len {
            return Err(TreeError::Range { k, len });
        }
        self.advance(start, k - 1)
    }
}
