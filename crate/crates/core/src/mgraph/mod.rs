//! The decision graph T̃ and its matrix M̃.
//!
//! T̃ is built from a binary tree by closing every black path into a cycle:
//! a synthetic source `z0` feeds the root through an always-available red
//! edge, every internal vertex `v` entered by a red edge (and the root) gets a
//! copy `v̂` that takes over the red in-edge and enters `v` by a black edge,
//! every leaf `z` entered by a black edge gets a copy `ẑ` with a red edge
//! `ẑ → z`, and a never-available black edge `ẑ → v̂` returns from the end of
//! each black path to its start. Every red edge gets a parallel pseudo-edge.
//!
//! Every vertex of T̃ is the end of exactly one red edge, which is what makes
//! the kernel of M̃ explicit (see [`crate::kernel`]).

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dtree::{
    ChildView, Color, DecisionTree, LocalView, TreeError, VertexId, VertexKind,
};
use crate::scalar::Real;
use crate::spanprog::{Availability, Weights};
use crate::sparse::SparseMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid scalar: {0}")]
    Scalar(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GraphVertex {
    /// The synthetic source `z0` above the root.
    Source,
    Tree(VertexId),
    /// `v̂` for an internal vertex entered by a red edge, or the root.
    HatInternal(VertexId),
    /// `ẑ` for a leaf entered by a black edge.
    HatLeaf(VertexId),
    /// Padding vertex on a returning edge.
    Pad(usize),
    /// Head of the pendant red edge of a padding vertex.
    PadEnd(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeClass {
    /// `z0 → v̂_root`, always available.
    Source,
    /// Tree edge kept as is: black into an internal vertex, or red into a leaf.
    Tree,
    /// `v̂ → v`, black.
    HatToVertex,
    /// `v_p → v̂`, red.
    ParentToHat,
    /// `ẑ → z`, red, always available.
    HatLeafToLeaf,
    /// `z_p → ẑ`, black.
    ParentToHatLeaf,
    /// `ẑ → v̂` closing a black cycle, never available.
    Return,
    /// Black padding edge on a split returning edge, never available.
    Pad,
    /// Red pendant edge of a padding vertex, never available.
    PadPendant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub tail: usize,
    pub head: usize,
    pub color: Color,
    pub class: EdgeClass,
    pub availability: Availability,
}

/// A black cycle `c_0 → c_1 → … → c_{t−1} → c_0` with `c_0 = v̂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    /// Black path of the tree this cycle closes.
    pub run: usize,
    pub vertices: Vec<usize>,
    /// `edges[i]` joins `vertices[i]` and `vertices[i + 1 mod t]`.
    pub edges: Vec<usize>,
}

impl Cycle {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RedEnd {
    Tail,
    Head,
}

/// Column of M̃.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ColumnTag {
    Root,
    Leaf(VertexId),
    Edge(usize),
    Pseudo(usize),
}

/// Bijection between column tags and positions.
///
/// Order: root, leaves by id, black edges cycle by cycle, then each red edge
/// followed by its pseudo-edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnIndex {
    tags: Vec<ColumnTag>,
    leaf: Vec<Option<usize>>,
    edge: Vec<usize>,
    pseudo: Vec<Option<usize>>,
    black_end: usize,
}

impl ColumnIndex {
    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn tags(&self) -> &[ColumnTag] {
        &self.tags
    }

    pub fn tag(&self, pos: usize) -> ColumnTag {
        self.tags[pos]
    }

    pub fn position(&self, tag: ColumnTag) -> Option<usize> {
        match tag {
            ColumnTag::Root => Some(0),
            ColumnTag::Leaf(z) => self.leaf.get(z).copied().flatten(),
            ColumnTag::Edge(e) => self.edge.get(e).copied(),
            ColumnTag::Pseudo(e) => self.pseudo.get(e).copied().flatten(),
        }
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn leaf(&self, z: VertexId) -> usize {
        self.leaf[z].expect("tree leaf")
    }

    pub fn edge(&self, e: usize) -> usize {
        self.edge[e]
    }

    /// Position of the pseudo-edge of red edge `e` (always `edge(e) + 1`).
    pub fn pseudo(&self, e: usize) -> usize {
        self.pseudo[e].expect("red edge")
    }

    /// First position of the red/pseudo pairs.
    pub fn pairs_start(&self) -> usize {
        self.black_end
    }
}

/// The decision graph of a binary tree.
#[derive(Debug, Clone)]
pub struct DecisionGraph {
    tree: DecisionTree,
    vertices: Vec<GraphVertex>,
    hat_internal: Vec<Option<usize>>,
    hat_leaf: Vec<Option<usize>>,
    edges: Vec<GraphEdge>,
    cycles: Vec<Cycle>,
    edge_cycle: Vec<Option<usize>>,
    black_in: Vec<Option<usize>>,
    red_end: Vec<(usize, RedEnd)>,
    red_edges: Vec<usize>,
    columns: ColumnIndex,
    padded: bool,
}

fn tree_availability(tree: &DecisionTree, child: VertexId) -> Availability {
    let parent = tree.parent(child).expect("non-root");
    let e = tree.parent_edge(child).expect("non-root");
    Availability::Query {
        position: tree.query(parent).expect("internal"),
        answers: e.label.symbols().to_vec(),
    }
}

struct Draft {
    vertices: Vec<GraphVertex>,
    edges: Vec<GraphEdge>,
}

impl Draft {
    fn vertex(&mut self, v: GraphVertex) -> usize {
        self.vertices.push(v);
        self.vertices.len() - 1
    }

    fn edge(&mut self, tail: usize, head: usize, color: Color, class: EdgeClass, a: Availability) -> usize {
        self.edges.push(GraphEdge {
            tail,
            head,
            color,
            class,
            availability: a,
        });
        self.edges.len() - 1
    }
}

impl DecisionGraph {
    /// Builds T̃. With `pad_to_power_of_two`, each returning edge is split by
    /// never-available padding vertices until the cycle length is a power of
    /// two; every padding vertex carries a never-available red pendant edge.
    pub fn new(tree: &DecisionTree, pad_to_power_of_two: bool) -> Result<Self, GraphError> {
        if !tree.is_binary() {
            return Err(GraphError::Unsupported(
                "decision graphs are built from binary trees; binarize first".into(),
            ));
        }
        let n = tree.len();
        let mut d = Draft {
            vertices: vec![GraphVertex::Source],
            edges: Vec::new(),
        };
        for v in 0..n {
            d.vertex(GraphVertex::Tree(v));
        }
        let tv = |v: VertexId| 1 + v;
        let runs = tree.black_runs();
        let mut hat_internal = vec![None; n];
        let mut hat_leaf = vec![None; n];
        for run in runs {
            let start = run[0];
            let end = *run.last().expect("nonempty run");
            hat_internal[start] = Some(d.vertex(GraphVertex::HatInternal(start)));
            hat_leaf[end] = Some(d.vertex(GraphVertex::HatLeaf(end)));
        }

        let mut cycles = Vec::with_capacity(runs.len());
        let mut pads = 0;
        let mut pendants = Vec::new();
        for (r, run) in runs.iter().enumerate() {
            let start = run[0];
            let end = *run.last().expect("nonempty run");
            let v_hat = hat_internal[start].expect("run start");
            let z_hat = hat_leaf[end].expect("run end");
            let mut vertices = vec![v_hat];
            let mut edges = Vec::new();
            let entry = if start == tree.root() {
                Availability::Always
            } else {
                tree_availability(tree, start)
            };
            edges.push(d.edge(v_hat, tv(start), Color::Black, EdgeClass::HatToVertex, entry));
            for pair in run.windows(2) {
                let (u, w) = (pair[0], pair[1]);
                vertices.push(tv(u));
                if w == end {
                    edges.push(d.edge(
                        tv(u),
                        z_hat,
                        Color::Black,
                        EdgeClass::ParentToHatLeaf,
                        tree_availability(tree, w),
                    ));
                } else {
                    edges.push(d.edge(tv(u), tv(w), Color::Black, EdgeClass::Tree, tree_availability(tree, w)));
                }
            }
            vertices.push(z_hat);
            let t = vertices.len();
            let pad = if pad_to_power_of_two { t.next_power_of_two() - t } else { 0 };
            let mut last = z_hat;
            for _ in 0..pad {
                let p = d.vertex(GraphVertex::Pad(pads));
                let q = d.vertex(GraphVertex::PadEnd(pads));
                pads += 1;
                edges.push(d.edge(last, p, Color::Black, EdgeClass::Pad, Availability::Never));
                pendants.push((p, q));
                vertices.push(p);
                last = p;
            }
            edges.push(d.edge(last, v_hat, Color::Black, EdgeClass::Return, Availability::Never));
            cycles.push(Cycle { run: r, vertices, edges });
        }

        let mut red_edges = Vec::new();
        let root_hat = hat_internal[tree.root()].expect("root run");
        red_edges.push(d.edge(0, root_hat, Color::Red, EdgeClass::Source, Availability::Always));
        for v in tree.internal_vertices() {
            for e in tree.edges(v).iter().filter(|e| e.color == Color::Red) {
                let a = tree_availability(tree, e.child);
                let id = if tree.is_internal(e.child) {
                    let hat = hat_internal[e.child].expect("red-entered internal vertex");
                    d.edge(tv(v), hat, Color::Red, EdgeClass::ParentToHat, a)
                } else {
                    d.edge(tv(v), tv(e.child), Color::Red, EdgeClass::Tree, a)
                };
                red_edges.push(id);
            }
        }
        for z in tree.leaves() {
            if let Some(h) = hat_leaf[z] {
                red_edges.push(d.edge(h, tv(z), Color::Red, EdgeClass::HatLeafToLeaf, Availability::Always));
            }
        }
        for (p, q) in pendants {
            red_edges.push(d.edge(p, q, Color::Red, EdgeClass::PadPendant, Availability::Never));
        }

        let mut red_end = vec![(usize::MAX, RedEnd::Tail); d.vertices.len()];
        for &e in &red_edges {
            let edge = &d.edges[e];
            for (v, end) in [(edge.tail, RedEnd::Tail), (edge.head, RedEnd::Head)] {
                if red_end[v].0 != usize::MAX {
                    return Err(GraphError::Unsupported(format!(
                        "vertex {:?} ends two red edges",
                        d.vertices[v]
                    )));
                }
                red_end[v] = (e, end);
            }
        }
        if let Some(v) = red_end.iter().position(|(e, _)| *e == usize::MAX) {
            return Err(GraphError::Unsupported(format!(
                "vertex {:?} ends no red edge",
                d.vertices[v]
            )));
        }

        let columns = Self::layout(tree, d.edges.len(), &cycles, &red_edges);
        let mut edge_cycle = vec![None; d.edges.len()];
        let mut black_in = vec![None; d.vertices.len()];
        for (i, c) in cycles.iter().enumerate() {
            for &e in &c.edges {
                edge_cycle[e] = Some(i);
                black_in[d.edges[e].head] = Some(e);
            }
        }
        Ok(Self {
            tree: tree.clone(),
            vertices: d.vertices,
            hat_internal,
            hat_leaf,
            edges: d.edges,
            cycles,
            edge_cycle,
            black_in,
            red_end,
            red_edges,
            columns,
            padded: pad_to_power_of_two,
        })
    }

    fn layout(tree: &DecisionTree, edges: usize, cycles: &[Cycle], red_edges: &[usize]) -> ColumnIndex {
        let mut tags = vec![ColumnTag::Root];
        let mut leaf = vec![None; tree.len()];
        for z in tree.leaves() {
            leaf[z] = Some(tags.len());
            tags.push(ColumnTag::Leaf(z));
        }
        let mut edge = vec![usize::MAX; edges];
        let mut pseudo = vec![None; edges];
        for c in cycles {
            for &e in &c.edges {
                edge[e] = tags.len();
                tags.push(ColumnTag::Edge(e));
            }
        }
        let black_end = tags.len();
        for &e in red_edges {
            edge[e] = tags.len();
            tags.push(ColumnTag::Edge(e));
            pseudo[e] = Some(tags.len());
            tags.push(ColumnTag::Pseudo(e));
        }
        ColumnIndex {
            tags,
            leaf,
            edge,
            pseudo,
            black_end,
        }
    }

    pub fn tree(&self) -> &DecisionTree {
        &self.tree
    }

    pub fn vertices(&self) -> &[GraphVertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn source(&self) -> usize {
        0
    }

    pub fn tree_vertex(&self, v: VertexId) -> usize {
        1 + v
    }

    pub fn hat_internal(&self, v: VertexId) -> Option<usize> {
        self.hat_internal.get(v).copied().flatten()
    }

    pub fn hat_leaf(&self, z: VertexId) -> Option<usize> {
        self.hat_leaf.get(z).copied().flatten()
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn cycles(&self) -> &[Cycle] {
        &self.cycles
    }

    /// Red edges in column order.
    pub fn red_edges(&self) -> &[usize] {
        &self.red_edges
    }

    /// The red edge ending at vertex `v` and which end `v` is.
    pub fn red_end(&self, v: usize) -> (usize, RedEnd) {
        self.red_end[v]
    }

    pub fn columns(&self) -> &ColumnIndex {
        &self.columns
    }

    pub fn is_padded(&self) -> bool {
        self.padded
    }

    pub fn black_edge_count(&self) -> usize {
        self.cycles.iter().map(Cycle::len).sum()
    }

    /// `1 + #leaves + #black edges`.
    pub fn expected_nullity(&self) -> usize {
        1 + self.tree.leaves().count() + self.black_edge_count()
    }

    /// Scale of the column of edge `e` (`β` of its cycle or `γ`).
    pub fn edge_scale<T: Real>(&self, e: usize, weights: &Weights<T>) -> T {
        let edge = &self.edges[e];
        match edge.color {
            Color::Red => weights.red.sqrt(),
            Color::Black => {
                let c = self.edge_cycle[e].expect("black edges lie on cycles");
                let run = self.cycles[c].run;
                weights.black_for_run(run).sqrt()
            }
        }
    }

    /// Cycle holding black edge `e`.
    pub fn cycle_of_edge(&self, e: usize) -> Option<usize> {
        self.edge_cycle[e]
    }

    /// M̃ with root column `α|z0⟩`, leaf columns `−α|z⟩`, black `β(|u⟩−|v⟩)`,
    /// red `γ(|u⟩−|v⟩)` and pseudo `γ(|u⟩+|v⟩)`.
    pub fn assemble_matrix<T: Real>(&self, alpha: T, weights: &Weights<T>) -> Result<SparseMatrix<T>, GraphError> {
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(GraphError::Scalar(format!("α = {alpha} must be positive")));
        }
        weights
            .validate(&self.tree)
            .map_err(|e| GraphError::Scalar(e.to_string()))?;
        let mut m = SparseMatrix::new(self.len());
        for &tag in self.columns.tags() {
            let entries = match tag {
                ColumnTag::Root => vec![(self.source(), alpha)],
                ColumnTag::Leaf(z) => vec![(self.tree_vertex(z), -alpha)],
                ColumnTag::Edge(e) => {
                    let s = self.edge_scale(e, weights);
                    vec![(self.edges[e].tail, s), (self.edges[e].head, -s)]
                }
                ColumnTag::Pseudo(e) => {
                    let s = self.edge_scale(e, weights);
                    vec![(self.edges[e].tail, s), (self.edges[e].head, s)]
                }
            };
            m.push_column(&entries);
        }
        Ok(m)
    }

    /// Columns in the support of `Π_x`: root and leaves always, edges by their rule.
    pub fn available_columns(&self, x: &[usize]) -> Vec<bool> {
        self.columns
            .tags()
            .iter()
            .map(|tag| match tag {
                ColumnTag::Root | ColumnTag::Leaf(_) => true,
                ColumnTag::Edge(e) => self.edges[*e].availability.is_available(x),
                ColumnTag::Pseudo(_) => false,
            })
            .collect()
    }

    /// Tree leaves reachable from the source through available edges.
    pub fn reachable_leaves(&self, x: &[usize]) -> Vec<VertexId> {
        let mut adj = vec![Vec::new(); self.len()];
        for e in &self.edges {
            if e.availability.is_available(x) {
                adj[e.tail].push(e.head);
                adj[e.head].push(e.tail);
            }
        }
        let mut seen = vec![false; self.len()];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        let mut out = Vec::new();
        while let Some(u) = queue.pop_front() {
            if let GraphVertex::Tree(v) = self.vertices[u] {
                if self.tree.is_leaf(v) {
                    out.push(v);
                }
            }
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Edges of the source-to-`leaf` path of T̃ that follows the tree path.
    pub fn path_edges(&self, leaf: VertexId) -> Vec<usize> {
        let tree_path = self.tree.path_to(leaf);
        let mut out = vec![self.red_end[self.source()].0];
        let root = self.tree.root();
        out.push(self.entry_edge(root));
        for &u in &tree_path[1..] {
            let is_red = self.tree.parent_edge(u).expect("non-root").color == Color::Red;
            if self.tree.is_internal(u) && is_red {
                let hat = self.hat_internal[u].expect("red-entered");
                out.push(self.red_end[hat].0);
                out.push(self.entry_edge(u));
            } else if self.tree.is_leaf(u) && !is_red {
                let hat = self.hat_leaf[u].expect("black leaf");
                let into_hat = self
                    .cycle_edges_into(hat)
                    .expect("the hatted leaf is entered from its parent");
                out.push(into_hat);
                out.push(self.red_end[hat].0);
            } else if is_red {
                out.push(self.red_end[self.tree_vertex(u)].0);
            } else {
                out.push(self.cycle_edges_into(self.tree_vertex(u)).expect("black tree edge"));
            }
        }
        out
    }

    /// The `v̂ → v` edge of a run start.
    fn entry_edge(&self, v: VertexId) -> usize {
        self.cycle_edges_into(self.tree_vertex(v)).expect("run start")
    }

    fn cycle_edges_into(&self, g: usize) -> Option<usize> {
        self.black_in[g]
    }

    /// Witnesses of the T̃ program for inputs reaching `leaf`: positive
    /// coefficients over columns (edge columns only, `1/scale` along the path),
    /// negative witness = indicator of the path vertices.
    pub fn witnesses<T: Real>(&self, leaf: VertexId, weights: &Weights<T>) -> GraphWitness<T> {
        let path = self.path_edges(leaf);
        let mut positive = vec![T::zero(); self.columns.len()];
        let mut negative = vec![T::zero(); self.len()];
        negative[self.source()] = T::one();
        for &e in &path {
            positive[self.columns.edge(e)] = T::one() / self.edge_scale(e, weights);
            negative[self.edges[e].tail] = T::one();
            negative[self.edges[e].head] = T::one();
        }
        let positive_size = positive.iter().map(|&w| w * w).sum();
        let mut negative_size = T::zero();
        for &tag in self.columns.tags() {
            let (e, sign) = match tag {
                ColumnTag::Edge(e) => (e, -T::one()),
                ColumnTag::Pseudo(e) => (e, T::one()),
                _ => continue,
            };
            let s = self.edge_scale(e, weights);
            let v = s * (negative[self.edges[e].tail] + sign * negative[self.edges[e].head]);
            negative_size += v * v;
        }
        GraphWitness {
            leaf,
            positive,
            negative,
            positive_size,
            negative_size,
        }
    }

    /// Largest witness sizes over all leaves (every leaf of a valid tree is
    /// reached by some input, so this is the maximum over inputs).
    pub fn max_witness_sizes<T: Real>(&self, weights: &Weights<T>) -> (T, T) {
        self.tree.leaves().fold((T::zero(), T::zero()), |(p, n), z| {
            let w = self.witnesses(z, weights);
            (p.max(w.positive_size), n.max(w.negative_size))
        })
    }

    /// Local view of a tree vertex with the synthetic source as the root's red parent.
    pub fn tree_local(&self, v: VertexId) -> Result<LocalView<GraphVertex, usize>, GraphError> {
        let view = self.tree.local(v)?;
        let parent = match view.parent {
            Some((p, c)) => Some((GraphVertex::Tree(p), c)),
            None => Some((GraphVertex::Source, Color::Red)),
        };
        let kind = match view.kind {
            VertexKind::Root => VertexKind::Internal,
            k => k,
        };
        Ok(LocalView {
            kind,
            parent,
            children: view
                .children
                .into_iter()
                .map(|c| ChildView {
                    vertex: GraphVertex::Tree(c.vertex),
                    label: c.label,
                    color: c.color,
                })
                .collect(),
            query: view.query,
            output: view.output,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphWitness<T> {
    pub leaf: VertexId,
    pub positive: Vec<T>,
    pub negative: Vec<T>,
    pub positive_size: T,
    pub negative_size: T,
}
