//! Frontends: decision trees with guess colorings for concrete problems, and
//! classical reference algorithms.

mod bfs;
mod fenwick;
mod first_marked;
mod graph;
mod matching;
pub mod reference;

use serde::{Deserialize, Serialize};

pub use bfs::{BfsState, BfsTree, Search};
pub use fenwick::Fenwick;
pub use first_marked::{first_marked, first_marked_tree};
pub use graph::{GraphError, GraphInstance};
pub use matching::{MatchState, MatchingTree};

use crate::dtree::{materialize, DecisionTree, TreeError};

/// Answer carried by a leaf. Graph vertices are 0-indexed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Answer {
    Index(usize),
    Edges(Vec<(usize, usize)>),
    Flag(bool),
}

/// A problem instance family with a fixed input length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "kebab-case")]
pub enum Problem {
    FirstMarked { n: usize },
    Bfs { n: usize, directed: bool },
    Bipartite { n: usize },
    Cycle { n: usize },
    Matching { n: usize },
}

/// A materialized frontend tree with the answer behind each output label.
#[derive(Debug, Clone)]
pub struct Frontend {
    pub problem: Problem,
    pub tree: DecisionTree,
    pub answers: Vec<Answer>,
}

/// Upper limit on materialized tree vertices.
pub const MAX_TREE_VERTICES: usize = 1 << 20;

impl Problem {
    pub fn name(&self) -> &'static str {
        match self {
            Problem::FirstMarked { .. } => "first-marked",
            Problem::Bfs { .. } => "bfs",
            Problem::Bipartite { .. } => "bipartite",
            Problem::Cycle { .. } => "cycle",
            Problem::Matching { .. } => "matching",
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            Problem::FirstMarked { n }
            | Problem::Bfs { n, .. }
            | Problem::Bipartite { n }
            | Problem::Cycle { n }
            | Problem::Matching { n } => n,
        }
    }

    fn directed(&self) -> bool {
        matches!(self, Problem::Bfs { directed: true, .. })
    }

    pub fn is_graph(&self) -> bool {
        !matches!(self, Problem::FirstMarked { .. })
    }

    pub fn build(&self) -> Result<Frontend, TreeError> {
        let (tree, answers) = match *self {
            Problem::FirstMarked { n } => {
                let t = first_marked_tree(n);
                let answers = (0..=n).map(Answer::Index).collect();
                (t, answers)
            }
            Problem::Bfs { n, directed } => {
                let m = materialize(&BfsTree::new(n, directed, Search::Forest)?, MAX_TREE_VERTICES)?;
                (m.tree, m.answers)
            }
            Problem::Bipartite { n } => {
                let m = materialize(&BfsTree::new(n, false, Search::Bipartite)?, MAX_TREE_VERTICES)?;
                (m.tree, m.answers)
            }
            Problem::Cycle { n } => {
                let m = materialize(&BfsTree::new(n, false, Search::Cycle)?, MAX_TREE_VERTICES)?;
                (m.tree, m.answers)
            }
            Problem::Matching { n } => {
                let m = materialize(&MatchingTree::new(n)?, MAX_TREE_VERTICES)?;
                (m.tree, m.answers)
            }
        };
        Ok(Frontend {
            problem: *self,
            tree,
            answers,
        })
    }

    /// Input string of `g` for this problem.
    pub fn encode(&self, g: &GraphInstance) -> Result<Vec<usize>, GraphError> {
        if g.n() != self.n() || g.is_directed() != self.directed() || !self.is_graph() {
            return Err(GraphError::Invalid(format!(
                "graph on {} vertices does not fit problem {}",
                g.n(),
                self.name()
            )));
        }
        Ok(g.to_input())
    }

    /// Classical answer for input `x`.
    pub fn reference(&self, x: &[usize]) -> Result<Answer, GraphError> {
        if let Problem::FirstMarked { .. } = self {
            return Ok(Answer::Index(first_marked(x)));
        }
        let g = GraphInstance::from_input(self.n(), self.directed(), x)?;
        Ok(match self {
            Problem::Bfs { .. } => Answer::Edges(reference::bfs_forest(&g)),
            Problem::Bipartite { .. } => Answer::Flag(reference::is_bipartite(&g)),
            Problem::Cycle { .. } => Answer::Flag(reference::has_cycle(&g)),
            Problem::Matching { .. } => Answer::Edges(reference::greedy_matching(&g)),
            Problem::FirstMarked { .. } => unreachable!("handled above"),
        })
    }
}

impl Frontend {
    pub fn answer(&self, label: usize) -> &Answer {
        &self.answers[label]
    }

    /// Whether `answer` is correct for `x` (for matchings: any maximal one).
    pub fn accepts(&self, x: &[usize], answer: &Answer) -> Result<bool, GraphError> {
        if let (Problem::Matching { n }, Answer::Edges(m)) = (self.problem, answer) {
            let g = GraphInstance::from_input(n, false, x)?;
            return Ok(reference::is_maximal_matching(&g, m));
        }
        Ok(*answer == self.problem.reference(x)?)
    }
}

#[cfg(test)]
mod tests;
