//! Span programs built from colored decision trees.
//!
//! [`SpanProgram`] is the orthogonal-input program of a binary tree: one input
//! vector `√W_c (|v⟩ − |child⟩)` per edge, available when the queried symbol
//! matches the edge label. [`Nbsp`] is the non-binary construction over the
//! auxiliary space with `|v,black⟩, |v,red⟩, |v#⟩` coordinates; it is built and
//! verified but not compiled to the simulator (binarize first).

mod binary;
mod nbsp;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dtree::{Color, DecisionTree, TreeError, TreeStats};
use crate::scalar::Real;

pub use binary::{verify_span_program, SpanProgram, VerifyReport, WitnessCheck, WitnessPair};
pub use nbsp::{HatCoord, Nbsp, NbspWitness};

/// Residual tolerance for witness identities.
pub const WITNESS_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpanError {
    #[error("span program violated for x = {input:?}: {clause}")]
    Violation { input: Vec<usize>, clause: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid weights: {0}")]
    Weights(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Which inputs make a vector available.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Availability {
    /// Available iff `x_position` is one of `answers`.
    Query { position: usize, answers: Vec<usize> },
    Always,
    Never,
}

impl Availability {
    pub fn is_available(&self, x: &[usize]) -> bool {
        match self {
            Availability::Query { position, answers } => answers.contains(&x[*position]),
            Availability::Always => true,
            Availability::Never => false,
        }
    }
}

/// Black-edge weights: one value, or one per black path of the tree
/// (indexed like [`DecisionTree::black_runs`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BlackWeights<T> {
    Uniform(T),
    PerPath(Vec<T>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weights<T> {
    pub black: BlackWeights<T>,
    pub red: T,
}

impl<T: Real> Weights<T> {
    pub fn uniform(black: T, red: T) -> Self {
        Self {
            black: BlackWeights::Uniform(black),
            red,
        }
    }

    /// `W_black = 1/G`, `W_red = 1/T`.
    pub fn defaults(stats: TreeStats) -> Self {
        let g = T::from_count(stats.mistakes.max(1));
        let t = T::from_count(stats.depth.max(1));
        Self::uniform(T::one() / g, T::one() / t)
    }

    /// Weight of the black edges on black path `run`.
    pub fn black_for_run(&self, run: usize) -> T {
        match &self.black {
            BlackWeights::Uniform(w) => *w,
            BlackWeights::PerPath(ws) => ws[run],
        }
    }

    /// Smallest and largest black weight.
    pub fn black_range(&self) -> (T, T) {
        match &self.black {
            BlackWeights::Uniform(w) => (*w, *w),
            BlackWeights::PerPath(ws) => ws.iter().fold((T::infinity(), T::zero()), |(lo, hi), &w| {
                (lo.min(w), hi.max(w))
            }),
        }
    }

    pub fn validate(&self, tree: &DecisionTree) -> Result<(), SpanError> {
        let bad = |w: T| !(w > T::zero()) || !w.is_finite();
        if bad(self.red) {
            return Err(SpanError::Weights(format!("W_red = {} must be positive", self.red)));
        }
        match &self.black {
            BlackWeights::Uniform(w) if bad(*w) => {
                Err(SpanError::Weights(format!("W_black = {w} must be positive")))
            }
            BlackWeights::PerPath(ws) if ws.len() != tree.black_runs().len() => {
                Err(SpanError::Weights(format!(
                    "{} per-path weights given for {} black paths",
                    ws.len(),
                    tree.black_runs().len()
                )))
            }
            BlackWeights::PerPath(ws) if ws.iter().any(|&w| bad(w)) => {
                Err(SpanError::Weights("per-path black weights must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// Weight of the tree edge entering `child`.
    pub fn edge_weight(&self, tree: &DecisionTree, child: usize) -> T {
        let e = tree.parent_edge(child).expect("non-root vertex");
        match e.color {
            Color::Red => self.red,
            Color::Black => {
                let parent = tree.parent(child).expect("non-root vertex");
                let (run, _) = tree.black_position(parent).expect("internal vertices lie on runs");
                self.black_for_run(run)
            }
        }
    }
}

/// Analytic bounds `(G/W_red + T/W_black, W_black·G + W_red·T)` of the binary program.
pub fn binary_bounds(stats: TreeStats, black: f64, red: f64) -> (f64, f64) {
    let g = stats.mistakes as f64;
    let t = stats.depth as f64;
    (g / red + t / black, black * g + red * t)
}

/// Analytic bounds of the non-binary program:
/// `(T + 2T/W_black + 2G/W_red, W_red·T + (W_black/2 + 2W_red)·G)`.
pub fn nbsp_bounds(stats: TreeStats, black: f64, red: f64) -> (f64, f64) {
    let g = stats.mistakes as f64;
    let t = stats.depth as f64;
    (
        t + 2.0 * t / black + 2.0 * g / red,
        red * t + (black / 2.0 + 2.0 * red) * g,
    )
}
