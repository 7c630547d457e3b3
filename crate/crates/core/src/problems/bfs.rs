use serde::{Deserialize, Serialize};

use super::fenwick::Fenwick;
use super::graph::{position, position_count};
use super::Answer;
use crate::dtree::{ChildView, Color, Label, LocalView, TreeAccess, TreeError, VertexKind};
use crate::fft::OpCounter;

/// Question answered by a [`BfsTree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Search {
    /// The BFS forest (roots in ascending order).
    Forest,
    /// Whether the graph is bipartite.
    Bipartite,
    /// Whether the graph has a cycle.
    Cycle,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Phase {
    Search,
    /// Checking the `k`-th pair BFS never queried.
    Verify(usize),
    /// The `k`-th checked pair is an edge.
    Found(usize),
    Done,
}

/// Snapshot of the queue-based BFS at one tree vertex.
///
/// Pending query: `(queue[head], next)` while searching. Only pairs with an
/// unvisited second vertex are queried, since the others cannot change the
/// state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BfsState {
    queue: Vec<usize>,
    head: usize,
    next: usize,
    visited: Vec<bool>,
    unvisited: Fenwick,
    forest: Vec<(usize, usize)>,
    /// Black moves since the last red one.
    steps: usize,
    /// `steps` before each red move.
    history: Vec<usize>,
    phase: Phase,
}

impl BfsState {
    pub fn queue(&self) -> &[usize] {
        &self.queue
    }

    pub fn head(&self) -> usize {
        self.head
    }

    pub fn visited(&self) -> &[bool] {
        &self.visited
    }

    pub fn forest(&self) -> &[(usize, usize)] {
        &self.forest
    }

    /// Matrix entry queried next during the search phase.
    pub fn pending(&self) -> Option<(usize, usize)> {
        (self.phase == Phase::Search).then(|| (self.queue[self.head], self.next))
    }

    pub fn is_verifying(&self) -> bool {
        matches!(self.phase, Phase::Verify(_))
    }
}

/// Lazy decision tree of breadth-first search in the matrix model.
///
/// The guess at every query is "no edge"; discovering a new vertex is a red
/// edge. When the queue empties the smallest unvisited vertex is appended
/// without a query. For [`Search::Bipartite`] and [`Search::Cycle`] a second
/// phase queries the pairs BFS skipped (restricted to equal depth parity for
/// bipartiteness) and stops at the first edge.
#[derive(Debug)]
pub struct BfsTree {
    n: usize,
    directed: bool,
    search: Search,
    ops: OpCounter,
}

fn overshoot() -> TreeError {
    TreeError::Structure("black move past the end of the run".into())
}

impl BfsTree {
    pub fn new(n: usize, directed: bool, search: Search) -> Result<Self, TreeError> {
        if n < 2 {
            return Err(TreeError::Unsupported("graph frontends need n ≥ 2".into()));
        }
        if directed && search != Search::Forest {
            return Err(TreeError::Unsupported(
                "bipartiteness and cycle detection are defined for undirected graphs".into(),
            ));
        }
        Ok(Self {
            n,
            directed,
            search,
            ops: OpCounter::new(),
        })
    }

    pub fn search(&self) -> Search {
        self.search
    }

    /// Pointer operations spent so far.
    pub fn pointer_ops(&self) -> u64 {
        self.ops.get()
    }

    pub fn reset_pointer_ops(&self) {
        self.ops.reset();
    }

    fn initial(&self) -> BfsState {
        let mut visited = vec![false; self.n];
        visited[0] = true;
        let unvisited = Fenwick::from_flags(&visited.iter().map(|v| !v).collect::<Vec<_>>());
        let st = BfsState {
            queue: vec![0],
            head: 0,
            next: 0,
            visited,
            unvisited,
            forest: Vec::new(),
            steps: 0,
            history: Vec::new(),
            phase: Phase::Search,
        };
        self.advance(st, 0).expect("zero moves")
    }

    fn mark(&self, st: &mut BfsState, v: usize) {
        st.visited[v] = true;
        st.unvisited.update(v, -1, &self.ops);
        st.queue.push(v);
        self.ops.add(1);
    }

    /// `s` black moves from `st` (normalizing a raw scan pointer first).
    fn advance(&self, mut st: BfsState, mut s: usize) -> Result<BfsState, TreeError> {
        let ops = &self.ops;
        st.steps += s;
        if st.phase == Phase::Search {
            let mut m = st.unvisited.total(ops);
            let r0 = st.unvisited.rank(st.next, ops);
            let c = m - r0;
            if s < c {
                st.next = st.unvisited.select(r0 + s, ops);
                return Ok(st);
            }
            s -= c;
            let rest = st.queue.len() - st.head - 1;
            if m > 0 {
                if s < rest * m {
                    st.head += 1 + s / m;
                    st.next = st.unvisited.select(s % m, ops);
                    ops.add(2);
                    return Ok(st);
                }
                s -= rest * m;
            }
            while m > 0 {
                let seed = st.unvisited.select(0, ops);
                self.mark(&mut st, seed);
                st.head = st.queue.len() - 1;
                m -= 1;
                if s < m {
                    st.next = st.unvisited.select(s, ops);
                    return Ok(st);
                }
                s -= m;
            }
            st.head = st.queue.len();
            st.next = self.n;
            st.phase = match self.search {
                Search::Forest => Phase::Done,
                _ => Phase::Verify(0),
            };
            ops.add(1);
        }
        match st.phase {
            Phase::Verify(k) => {
                let len = self.verify_pairs(&st).len();
                st.phase = match (k + s).cmp(&len) {
                    std::cmp::Ordering::Less => Phase::Verify(k + s),
                    std::cmp::Ordering::Equal => Phase::Done,
                    std::cmp::Ordering::Greater => return Err(overshoot()),
                };
                Ok(st)
            }
            _ if s > 0 => Err(overshoot()),
            _ => Ok(st),
        }
    }

    /// Pairs the search phase never queried, in checking order.
    fn verify_pairs(&self, st: &BfsState) -> Vec<(usize, usize)> {
        let mut pos = vec![0; self.n];
        for (i, &v) in st.queue.iter().enumerate() {
            pos[v] = i;
        }
        let mut parent = vec![None; self.n];
        let mut parity = vec![false; self.n];
        for &(u, v) in &st.forest {
            parent[v] = Some(u);
        }
        for &v in &st.queue {
            if let Some(p) = parent[v] {
                parity[v] = !parity[p];
            }
        }
        let mut out = Vec::new();
        for (i, &b) in st.queue.iter().enumerate() {
            if let Some(p) = parent[b] {
                for &a in &st.queue[pos[p] + 1..i] {
                    if self.search == Search::Cycle || parity[a] == parity[b] {
                        out.push((a, b));
                    }
                }
            }
        }
        out
    }

    fn discover(&self, mut st: BfsState) -> BfsState {
        let u = st.queue[st.head];
        let j = st.next;
        self.mark(&mut st, j);
        st.forest.push((u, j));
        st.history.push(st.steps);
        st.steps = 0;
        st.next = j + 1;
        self.advance(st, 0).expect("zero moves")
    }

    fn found(&self, st: &BfsState, k: usize) -> BfsState {
        let mut f = st.clone();
        f.history.push(f.steps);
        f.steps = 0;
        f.phase = Phase::Found(k);
        f
    }

    /// The vertex whose red edge starts the black run of `st`.
    fn red_parent(&self, st: &BfsState) -> BfsState {
        let mut p = st.clone();
        p.steps = p.history.pop().expect("not on the root run");
        if let Phase::Found(k) = st.phase {
            p.phase = Phase::Verify(k);
            return p;
        }
        let (u, j) = p.forest.pop().expect("a red move discovered a vertex");
        let idx = p.queue.iter().rposition(|&w| w == j).expect("discovered vertices are queued");
        for &w in &st.queue[idx..] {
            p.visited[w] = false;
            p.unvisited.update(w, 1, &self.ops);
            self.ops.add(1);
        }
        p.queue.truncate(idx);
        p.head = p.queue.iter().position(|&w| w == u).expect("u is queued");
        p.next = j;
        p.phase = Phase::Search;
        p
    }

    fn run_start(&self, st: &BfsState) -> BfsState {
        if st.history.is_empty() {
            self.initial()
        } else if let Phase::Found(_) = st.phase {
            st.clone()
        } else {
            self.discover(self.red_parent(st))
        }
    }

    fn remaining(&self, st: &BfsState) -> usize {
        match st.phase {
            Phase::Search => {
                let ops = &self.ops;
                let m = st.unvisited.total(ops);
                let c = m - st.unvisited.rank(st.next, ops);
                let rest = st.queue.len() - st.head - 1;
                let a = c + rest * m + m * m.saturating_sub(1) / 2;
                if self.search == Search::Forest {
                    return a;
                }
                let end = self.advance(st.clone(), a).expect("within the run");
                a + self.remaining(&end)
            }
            Phase::Verify(k) => self.verify_pairs(st).len() - k,
            Phase::Found(_) | Phase::Done => 0,
        }
    }

    /// Leaves entered by a red edge lie on no black run.
    fn check_on_run(&self, st: &BfsState) -> Result<(), TreeError> {
        let leaf = matches!(st.phase, Phase::Done | Phase::Found(_));
        if leaf && st.steps == 0 && !st.history.is_empty() {
            return Err(TreeError::NotOnBlackPath(format!("{:?}", st.forest)));
        }
        Ok(())
    }

    fn parent(&self, st: &BfsState) -> Option<(BfsState, Color)> {
        if st.steps > 0 {
            let start = self.run_start(st);
            Some((self.advance(start, st.steps - 1).expect("within the run"), Color::Black))
        } else if st.history.is_empty() {
            None
        } else {
            Some((self.red_parent(st), Color::Red))
        }
    }

    fn answer(&self, st: &BfsState) -> Option<Answer> {
        match (st.phase.clone(), self.search) {
            (Phase::Done, Search::Forest) => Some(Answer::Edges(st.forest.clone())),
            (Phase::Done, Search::Bipartite) => Some(Answer::Flag(true)),
            (Phase::Done, Search::Cycle) => Some(Answer::Flag(false)),
            (Phase::Found(_), Search::Bipartite) => Some(Answer::Flag(false)),
            (Phase::Found(_), Search::Cycle) => Some(Answer::Flag(true)),
            _ => None,
        }
    }
}

impl TreeAccess for BfsTree {
    type Vertex = BfsState;
    type Output = Answer;

    fn arity(&self) -> usize {
        position_count(self.n, self.directed)
    }

    fn alphabet(&self) -> usize {
        2
    }

    fn root(&self) -> BfsState {
        self.initial()
    }

    fn local(&self, v: &BfsState) -> Result<LocalView<BfsState, Answer>, TreeError> {
        let parent = self.parent(v);
        let edge = |a: usize, b: usize| position(self.n, self.directed, a, b);
        let (query, red) = match v.phase {
            Phase::Search => (Some(edge(v.queue[v.head], v.next)), Some(self.discover(v.clone()))),
            Phase::Verify(k) => {
                let (a, b) = self.verify_pairs(v)[k];
                (Some(edge(a, b)), Some(self.found(v, k)))
            }
            _ => (None, None),
        };
        let children = match red {
            Some(red) => vec![
                ChildView {
                    vertex: self.advance(v.clone(), 1)?,
                    label: Label::singleton(0),
                    color: Color::Black,
                },
                ChildView {
                    vertex: red,
                    label: Label::singleton(1),
                    color: Color::Red,
                },
            ],
            None => Vec::new(),
        };
        let kind = if query.is_none() {
            VertexKind::Leaf
        } else if parent.is_none() {
            VertexKind::Root
        } else {
            VertexKind::Internal
        };
        Ok(LocalView {
            kind,
            parent,
            children,
            query,
            output: self.answer(v),
        })
    }

    fn black_path_len(&self, v: &BfsState) -> Result<usize, TreeError> {
        self.check_on_run(v)?;
        Ok(self.remaining(&self.run_start(v)) + 1)
    }

    fn black_path_vertex(&self, v: &BfsState, k: usize) -> Result<BfsState, TreeError> {
        self.check_on_run(v)?;
        let start = self.run_start(v);
        let len = self.remaining(&start) + 1;
        if k == 0 || k > len {
            return Err(TreeError::Range { k, len });
        }
        self.advance(start, k - 1)
    }
}
