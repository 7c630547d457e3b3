//! Decision trees with guess colorings.
//!
//! Every internal vertex queries one input position and has one outgoing edge
//! per block of a partition of the alphabet. Exactly one edge per vertex is
//! black (the guessing algorithm's prediction), the rest are red (mistakes).
//! The tree is stored exactly as the classical algorithm defines it; the
//! synthetic root edge used by the decision graph lives in [`crate::mgraph`].

mod binarize;
mod format;
pub mod random;

use std::collections::VecDeque;
use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use binarize::{binarize, Binarized, Predicate};
pub use format::{parse_tree, write_tree};

pub type VertexId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("vertex {0} not found")]
    NotFound(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("invalid tree: {0}")]
    Structure(String),
    #[error("vertex {0} is not on a black path")]
    NotOnBlackPath(String),
    #[error("index {k} out of range for black path of length {len}")]
    Range { k: usize, len: usize },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("tree exceeds the materialization limit of {0} vertices")]
    TooLarge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    Black,
    Red,
}

/// Nonempty sorted set of alphabet symbols carried by an edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label(Vec<usize>);

impl Label {
    pub fn new(mut symbols: Vec<usize>) -> Result<Self, TreeError> {
        symbols.sort_unstable();
        symbols.dedup();
        if symbols.is_empty() {
            return Err(TreeError::Structure("empty edge label".into()));
        }
        Ok(Self(symbols))
    }

    pub fn singleton(q: usize) -> Self {
        Self(vec![q])
    }

    pub fn full(alphabet: usize) -> Self {
        Self((0..alphabet).collect())
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, q: usize) -> bool {
        self.0.binary_search(&q).is_ok()
    }

    pub fn min_symbol(&self) -> usize {
        self.0[0]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub label: Label,
    pub child: VertexId,
    pub color: Color,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Node {
    Internal { query: usize, edges: Vec<Edge> },
    Leaf { output: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexKind {
    Root,
    Internal,
    Leaf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChildView<V> {
    pub vertex: V,
    pub label: Label,
    pub color: Color,
}

/// Local structure around one vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalView<V, O> {
    pub kind: VertexKind,
    pub parent: Option<(V, Color)>,
    pub children: Vec<ChildView<V>>,
    pub query: Option<usize>,
    pub output: Option<O>,
}

impl<V: Clone, O> LocalView<V, O> {
    /// Child reached by answer `q`.
    pub fn child_for(&self, q: usize) -> Option<&ChildView<V>> {
        self.children.iter().find(|c| c.label.contains(q))
    }

    pub fn black_child(&self) -> Option<&ChildView<V>> {
        self.children.iter().find(|c| c.color == Color::Black)
    }
}

/// Common interface of materialized and lazily generated trees.
pub trait TreeAccess {
    type Vertex: Clone + Eq + Hash + Debug;
    type Output: Clone + Ord + Debug;

    /// Number of input positions `n`.
    fn arity(&self) -> usize;
    /// Alphabet size `ℓ`.
    fn alphabet(&self) -> usize;
    fn root(&self) -> Self::Vertex;
    fn local(&self, v: &Self::Vertex) -> Result<LocalView<Self::Vertex, Self::Output>, TreeError>;
    /// Number of vertices on the maximal black path through `v`.
    fn black_path_len(&self, v: &Self::Vertex) -> Result<usize, TreeError>;
    /// The `k`-th vertex (1-indexed from the top) of the black path through `v`.
    fn black_path_vertex(&self, v: &Self::Vertex, k: usize) -> Result<Self::Vertex, TreeError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeStats {
    /// Depth: edges on the longest root-leaf path.
    pub depth: usize,
    /// Maximum number of red edges on a root-leaf path.
    pub mistakes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub vertex: VertexId,
    pub query: usize,
    pub answer: usize,
    pub color: Color,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub leaf: VertexId,
    pub transcript: Vec<Step>,
}

impl Evaluation {
    pub fn red_count(&self) -> usize {
        self.transcript
            .iter()
            .filter(|s| s.color == Color::Red)
            .count()
    }
}

/// Incremental construction of a [`DecisionTree`].
#[derive(Debug, Clone)]
pub struct TreeBuilder {
    arity: usize,
    alphabet: usize,
    outputs: Option<usize>,
    nodes: Vec<Node>,
}

impl TreeBuilder {
    pub fn new(arity: usize, alphabet: usize) -> Self {
        Self {
            arity,
            alphabet,
            outputs: None,
            nodes: Vec::new(),
        }
    }

    /// Fixes the output alphabet size `m` (otherwise inferred from the leaves).
    pub fn outputs(mut self, m: usize) -> Self {
        self.outputs = Some(m);
        self
    }

    pub fn add_internal(&mut self, query: usize) -> VertexId {
        self.nodes.push(Node::Internal {
            query,
            edges: Vec::new(),
        });
        self.nodes.len() - 1
    }

    pub fn add_leaf(&mut self, output: usize) -> VertexId {
        self.nodes.push(Node::Leaf { output });
        self.nodes.len() - 1
    }

    pub fn add_edge(
        &mut self,
        parent: VertexId,
        child: VertexId,
        label: Label,
        color: Color,
    ) -> Result<(), TreeError> {
        if child >= self.nodes.len() {
            return Err(TreeError::NotFound(child.to_string()));
        }
        match self.nodes.get_mut(parent) {
            Some(Node::Internal { edges, .. }) => {
                edges.push(Edge {
                    label,
                    child,
                    color,
                });
                Ok(())
            }
            Some(Node::Leaf { .. }) => Err(TreeError::Structure(format!(
                "leaf {parent} cannot have children"
            ))),
            None => Err(TreeError::NotFound(parent.to_string())),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn build(self) -> Result<DecisionTree, TreeError> {
        DecisionTree::from_nodes(self.arity, self.alphabet, self.outputs, self.nodes)
    }
}

/// A validated, immutable decision tree with its coloring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    arity: usize,
    alphabet: usize,
    outputs: usize,
    root: VertexId,
    nodes: Vec<Node>,
    parent: Vec<Option<(VertexId, usize)>>,
    /// `(run id, 0-based position)` of every vertex on a black path.
    black_pos: Vec<Option<(usize, usize)>>,
    runs: Vec<Vec<VertexId>>,
}

impl DecisionTree {
    fn from_nodes(
        arity: usize,
        alphabet: usize,
        outputs: Option<usize>,
        nodes: Vec<Node>,
    ) -> Result<Self, TreeError> {
        if alphabet < 2 {
            return Err(TreeError::Structure("alphabet needs at least 2 symbols".into()));
        }
        let n = nodes.len();
        let mut parent = vec![None; n];
        let mut max_output = 0;
        for (v, node) in nodes.iter().enumerate() {
            match node {
                Node::Leaf { output } => max_output = max_output.max(*output + 1),
                Node::Internal { query, edges } => {
                    if *query >= arity {
                        return Err(TreeError::Structure(format!(
                            "vertex {v} queries position {query} but arity is {arity}"
                        )));
                    }
                    if edges.is_empty() {
                        return Err(TreeError::Structure(format!(
                            "internal vertex {v} has no children"
                        )));
                    }
                    let blacks = edges.iter().filter(|e| e.color == Color::Black).count();
                    if blacks != 1 {
                        return Err(TreeError::Structure(format!(
                            "vertex {v} has {blacks} black edges, expected exactly one"
                        )));
                    }
                    let mut seen = vec![false; alphabet];
                    for e in edges {
                        for &q in e.label.symbols() {
                            if q >= alphabet {
                                return Err(TreeError::Structure(format!(
                                    "vertex {v}: symbol {q} outside alphabet of size {alphabet}"
                                )));
                            }
                            if std::mem::replace(&mut seen[q], true) {
                                return Err(TreeError::Structure(format!(
                                    "vertex {v}: symbol {q} appears on two edges"
                                )));
                            }
                        }
                    }
                    if let Some(q) = seen.iter().position(|s| !s) {
                        return Err(TreeError::Structure(format!(
                            "vertex {v}: symbol {q} is not covered by any edge"
                        )));
                    }
                    for (i, e) in edges.iter().enumerate() {
                        if e.child >= n {
                            return Err(TreeError::NotFound(e.child.to_string()));
                        }
                        if parent[e.child].replace((v, i)).is_some() {
                            return Err(TreeError::Structure(format!(
                                "vertex {} has two parents",
                                e.child
                            )));
                        }
                    }
                }
            }
        }
        let outputs = outputs.unwrap_or(max_output);
        if max_output > outputs {
            return Err(TreeError::Structure(format!(
                "leaf output {} outside output alphabet of size {outputs}",
                max_output - 1
            )));
        }
        let roots: Vec<_> = (0..n).filter(|&v| parent[v].is_none()).collect();
        let root = match roots.as_slice() {
            [r] => *r,
            [] => return Err(TreeError::Structure("no root (cycle or empty tree)".into())),
            _ => return Err(TreeError::Structure(format!("multiple roots: {roots:?}"))),
        };
        if matches!(nodes[root], Node::Leaf { .. }) {
            return Err(TreeError::Structure(
                "single-leaf tree has depth 0 and is not supported".into(),
            ));
        }
        // Reachability rules out cycles hanging off the root component.
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            if let Node::Internal { edges, .. } = &nodes[v] {
                for e in edges {
                    if !std::mem::replace(&mut seen[e.child], true) {
                        count += 1;
                        queue.push_back(e.child);
                    }
                }
            }
        }
        if count != n {
            return Err(TreeError::Structure("graph is not a rooted tree".into()));
        }
        let mut tree = Self {
            arity,
            alphabet,
            outputs,
            root,
            nodes,
            parent,
            black_pos: vec![None; n],
            runs: Vec::new(),
        };
        tree.index_black_runs();
        Ok(tree)
    }

    fn index_black_runs(&mut self) {
        // Runs start at the root and at every internal vertex entered by a red edge.
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            order.push(v);
            if let Node::Internal { edges, .. } = &self.nodes[v] {
                for e in edges.iter().rev() {
                    stack.push(e.child);
                }
            }
        }
        for v in order {
            let starts = match self.parent_edge(v) {
                None => true,
                Some(e) => e.color == Color::Red && self.is_internal(v),
            };
            if !starts {
                continue;
            }
            let id = self.runs.len();
            let mut run = vec![v];
            let mut cur = v;
            while let Some(b) = self.black_edge(cur) {
                cur = b.child;
                run.push(cur);
            }
            for (i, &u) in run.iter().enumerate() {
                self.black_pos[u] = Some((id, i));
            }
            self.runs.push(run);
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    /// Output alphabet size `m`.
    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, v: VertexId) -> &Node {
        &self.nodes[v]
    }

    pub fn is_internal(&self, v: VertexId) -> bool {
        matches!(self.nodes[v], Node::Internal { .. })
    }

    pub fn is_leaf(&self, v: VertexId) -> bool {
        !self.is_internal(v)
    }

    pub fn query(&self, v: VertexId) -> Option<usize> {
        match &self.nodes[v] {
            Node::Internal { query, .. } => Some(*query),
            Node::Leaf { .. } => None,
        }
    }

    pub fn edges(&self, v: VertexId) -> &[Edge] {
        match &self.nodes[v] {
            Node::Internal { edges, .. } => edges,
            Node::Leaf { .. } => &[],
        }
    }

    pub fn output(&self, v: VertexId) -> Option<usize> {
        match &self.nodes[v] {
            Node::Leaf { output } => Some(*output),
            Node::Internal { .. } => None,
        }
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v].map(|p| p.0)
    }

    /// The edge entering `v`, if `v` is not the root.
    pub fn parent_edge(&self, v: VertexId) -> Option<&Edge> {
        self.parent[v].map(|(p, i)| &self.edges(p)[i])
    }

    pub fn black_edge(&self, v: VertexId) -> Option<&Edge> {
        self.edges(v).iter().find(|e| e.color == Color::Black)
    }

    pub fn leaves(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.nodes.len()).filter(|&v| self.is_leaf(v))
    }

    pub fn internal_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.nodes.len()).filter(|&v| self.is_internal(v))
    }

    /// True when `ℓ = 2` and every internal vertex has one `{0}` and one `{1}` edge.
    pub fn is_binary(&self) -> bool {
        self.alphabet == 2 && self.internal_vertices().all(|v| self.edges(v).len() == 2)
    }

    /// Maximal black paths, each listed top to bottom.
    pub fn black_runs(&self) -> &[Vec<VertexId>] {
        &self.runs
    }

    /// `(run id, 0-based position)` of `v` on its black path.
    pub fn black_position(&self, v: VertexId) -> Option<(usize, usize)> {
        self.black_pos[v]
    }

    /// Root-to-`v` path, root first.
    pub fn path_to(&self, v: VertexId) -> Vec<VertexId> {
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Number of red edges on the root-to-`v` path.
    pub fn red_depth(&self, v: VertexId) -> usize {
        let mut reds = 0;
        let mut cur = v;
        while let Some(e) = self.parent_edge(cur) {
            if e.color == Color::Red {
                reds += 1;
            }
            cur = self.parent(cur).expect("edge implies parent");
        }
        reds
    }

    pub fn check_input(&self, x: &[usize]) -> Result<(), TreeError> {
        if x.len() != self.arity {
            return Err(TreeError::Input(format!(
                "input has length {}, expected {}",
                x.len(),
                self.arity
            )));
        }
        if let Some((i, q)) = x.iter().enumerate().find(|(_, q)| **q >= self.alphabet) {
            return Err(TreeError::Input(format!(
                "symbol {q} at position {i} outside alphabet of size {}",
                self.alphabet
            )));
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[usize]) -> Result<Evaluation, TreeError> {
        self.check_input(x)?;
        let mut v = self.root;
        let mut transcript = Vec::new();
        while let Node::Internal { query, edges } = &self.nodes[v] {
            let answer = x[*query];
            let e = edges
                .iter()
                .find(|e| e.label.contains(answer))
                .expect("labels partition the alphabet");
            transcript.push(Step {
                vertex: v,
                query: *query,
                answer,
                color: e.color,
            });
            v = e.child;
        }
        Ok(Evaluation {
            leaf: v,
            transcript,
        })
    }

    pub fn stats(&self) -> TreeStats {
        let mut depth = 0;
        let mut mistakes = 0;
        let mut stack = vec![(self.root, 0usize, 0usize)];
        while let Some((v, d, r)) = stack.pop() {
            depth = depth.max(d);
            mistakes = mistakes.max(r);
            for e in self.edges(v) {
                stack.push((e.child, d + 1, r + usize::from(e.color == Color::Red)));
            }
        }
        TreeStats { depth, mistakes }
    }

    fn check_vertex(&self, v: VertexId) -> Result<(), TreeError> {
        if v < self.nodes.len() {
            Ok(())
        } else {
            Err(TreeError::NotFound(v.to_string()))
        }
    }

    pub fn local(&self, v: VertexId) -> Result<LocalView<VertexId, usize>, TreeError> {
        self.check_vertex(v)?;
        let parent = self.parent[v].map(|(p, i)| (p, self.edges(p)[i].color));
        let kind = match (&self.nodes[v], parent) {
            (Node::Leaf { .. }, _) => VertexKind::Leaf,
            (_, None) => VertexKind::Root,
            _ => VertexKind::Internal,
        };
        Ok(LocalView {
            kind,
            parent,
            children: self
                .edges(v)
                .iter()
                .map(|e| ChildView {
                    vertex: e.child,
                    label: e.label.clone(),
                    color: e.color,
                })
                .collect(),
            query: self.query(v),
            output: self.output(v),
        })
    }

    fn run_of(&self, v: VertexId) -> Result<&[VertexId], TreeError> {
        self.check_vertex(v)?;
        self.black_pos[v]
            .map(|(id, _)| self.runs[id].as_slice())
            .ok_or_else(|| TreeError::NotOnBlackPath(v.to_string()))
    }

    pub fn black_path_len(&self, v: VertexId) -> Result<usize, TreeError> {
        Ok(self.run_of(v)?.len())
    }

    pub fn black_path_vertex(&self, v: VertexId, k: usize) -> Result<VertexId, TreeError> {
        let run = self.run_of(v)?;
        if k == 0 || k > run.len() {
            return Err(TreeError::Range { k, len: run.len() });
        }
        Ok(run[k - 1])
    }
}

impl TreeAccess for DecisionTree {
    type Vertex = VertexId;
    type Output = usize;

    fn arity(&self) -> usize {
        self.arity
    }

    fn alphabet(&self) -> usize {
        self.alphabet
    }

    fn root(&self) -> VertexId {
        self.root
    }

    fn local(&self, v: &VertexId) -> Result<LocalView<VertexId, usize>, TreeError> {
        DecisionTree::local(self, *v)
    }

    fn black_path_len(&self, v: &VertexId) -> Result<usize, TreeError> {
        DecisionTree::black_path_len(self, *v)
    }

    fn black_path_vertex(&self, v: &VertexId, k: usize) -> Result<VertexId, TreeError> {
        DecisionTree::black_path_vertex(self, *v, k)
    }
}

/// A lazily generated tree expanded into an explicit [`DecisionTree`].
#[derive(Debug, Clone)]
pub struct Materialized<V, O> {
    pub tree: DecisionTree,
    /// Lazy vertex behind each materialized id.
    pub vertices: Vec<V>,
    /// Answer behind each leaf output label.
    pub answers: Vec<O>,
}

impl<V, O> Materialized<V, O> {
    /// Answer produced at materialized leaf `v`.
    pub fn answer(&self, v: VertexId) -> Option<&O> {
        self.tree.output(v).map(|l| &self.answers[l])
    }
}

/// Expands every vertex of `a` breadth-first. Leaf answers are interned into
/// output labels in order of first appearance.
pub fn materialize<A: TreeAccess>(
    a: &A,
    max_vertices: usize,
) -> Result<Materialized<A::Vertex, A::Output>, TreeError> {
    let mut builder = TreeBuilder::new(a.arity(), a.alphabet());
    let mut vertices = Vec::new();
    let mut answers: Vec<A::Output> = Vec::new();
    let mut pending_edges = Vec::new();
    let mut queue = VecDeque::new();
    let root = a.root();
    queue.push_back((root, None::<(VertexId, Label, Color)>));
    while let Some((v, incoming)) = queue.pop_front() {
        if vertices.len() >= max_vertices {
            return Err(TreeError::TooLarge(max_vertices));
        }
        let view = a.local(&v)?;
        let id = match (&view.query, &view.output) {
            (Some(q), _) => builder.add_internal(*q),
            (None, Some(out)) => {
                let label = match answers.iter().position(|o| o == out) {
                    Some(l) => l,
                    None => {
                        answers.push(out.clone());
                        answers.len() - 1
                    }
                };
                builder.add_leaf(label)
            }
            (None, None) => {
                return Err(TreeError::Structure(format!(
                    "lazy vertex {v:?} has neither a query nor an output"
                )))
            }
        };
        if let Some((p, label, color)) = incoming {
            pending_edges.push((p, id, label, color));
        }
        for c in view.children {
            queue.push_back((c.vertex, Some((id, c.label, c.color))));
        }
        vertices.push(v);
    }
    for (p, c, label, color) in pending_edges {
        builder.add_edge(p, c, label, color)?;
    }
    let tree = builder.outputs(answers.len()).build()?;
    Ok(Materialized {
        tree,
        vertices,
        answers,
    })
}

/// Enumerates `[ℓ]^n` in lexicographic order (first position slowest).
pub fn all_inputs(n: usize, alphabet: usize) -> Vec<Vec<usize>> {
    let total = alphabet.checked_pow(n as u32).expect("input space too large");
    (0..total)
        .map(|mut code| {
            let mut x = vec![0; n];
            for i in (0..n).rev() {
                x[i] = code % alphabet;
                code /= alphabet;
            }
            x
        })
        .collect()
}
