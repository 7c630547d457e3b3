//! State-vector simulation of the algorithm: `U = R_Π R_Λ`, phase detection,
//! and end-to-end runs with their spectral diagnostics.

mod phase;
mod run;
mod spectral;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use phase::{ExactSpectral, PhaseParams, Window, CALL_BUDGET_CONSTANT, ZERO_PHASE_TOL};
pub use phase::zero_phase_tol;
pub use run::{run, Counts, Outcome, RunParams, RunReport};
pub use spectral::{dense_walk, effective_gap_ratio, spectral_check, BandItem, SpectralReport};

use crate::dtree::{DecisionTree, TreeError};
use crate::fft::OpCounter;
use crate::kernel::{KernelError, KernelReflector};
use crate::mgraph::{DecisionGraph, GraphError};
use crate::scalar::{czero, Real, C};
use crate::spanprog::{SpanError, Weights};
use crate::sparse::SparseMatrix;

/// Default memory budget for simulated registers (bytes).
pub const DEFAULT_MEMORY_BUDGET: u64 = 1 << 30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QsimError {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("memory budget exceeded: need {needed} bytes, budget is {budget} bytes")]
    Budget { needed: u64, budget: u64 },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Span(#[from] SpanError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    ExactSpectral,
    Ancilla,
}

/// A compiled instance: decision graph, scalars, M̃ and the kernel reflector.
#[derive(Debug, Clone)]
pub struct Instance<T> {
    graph: DecisionGraph,
    weights: Weights<T>,
    epsilon: T,
    alpha: T,
    wsize_pos: T,
    wsize_neg: T,
    matrix: SparseMatrix<T>,
    reflector: KernelReflector<T>,
}

impl<T: Real> Instance<T> {
    /// Compiles `tree` with weights `(1/G, 1/T)`.
    pub fn new(tree: &DecisionTree, epsilon: T, pad_to_power_of_two: bool) -> Result<Self, QsimError> {
        Self::with_weights(tree, epsilon, pad_to_power_of_two, Weights::defaults(tree.stats()))
    }

    pub fn with_weights(
        tree: &DecisionTree,
        epsilon: T,
        pad_to_power_of_two: bool,
        weights: Weights<T>,
    ) -> Result<Self, QsimError> {
        if !(epsilon > T::zero() && epsilon < T::one()) {
            return Err(QsimError::Parameter(format!("ε = {epsilon} must lie in (0, 1)")));
        }
        weights.validate(tree)?;
        let graph = DecisionGraph::new(tree, pad_to_power_of_two)?;
        let (wsize_pos, wsize_neg) = graph.max_witness_sizes(&weights);
        let alpha = T::lit(2.0).sqrt() * epsilon / wsize_pos.sqrt();
        let matrix = graph.assemble_matrix(alpha, &weights)?;
        let reflector = KernelReflector::new(&graph, alpha, &weights)?;
        Ok(Self {
            graph,
            weights,
            epsilon,
            alpha,
            wsize_pos,
            wsize_neg,
            matrix,
            reflector,
        })
    }

    pub fn graph(&self) -> &DecisionGraph {
        &self.graph
    }

    pub fn tree(&self) -> &DecisionTree {
        self.graph.tree()
    }

    pub fn weights(&self) -> &Weights<T> {
        &self.weights
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// Largest positive witness size of the graph program.
    pub fn wsize_pos(&self) -> T {
        self.wsize_pos
    }

    pub fn wsize_neg(&self) -> T {
        self.wsize_neg
    }

    /// `W = √(wsize⁺ · wsize⁻)`.
    pub fn complexity(&self) -> T {
        (self.wsize_pos * self.wsize_neg).sqrt()
    }

    pub fn matrix(&self) -> &SparseMatrix<T> {
        &self.matrix
    }

    /// Test hook: overwrite one entry of M̃ (the kernel reflector is not rebuilt).
    pub fn corrupt_matrix_entry(&mut self, row: usize, col: usize, value: T) {
        self.matrix.set(row, col, value);
    }

    pub fn reflector(&self) -> &KernelReflector<T> {
        &self.reflector
    }

    pub fn dim(&self) -> usize {
        self.graph.columns().len()
    }

    /// `|e_root⟩`.
    pub fn start_state(&self) -> Vec<C<T>> {
        let mut s = vec![czero(); self.dim()];
        s[self.graph.columns().root()] = Complex::new(T::one(), T::zero());
        s
    }

    pub fn walk(&self, x: &[usize]) -> Result<Walk<'_, T>, QsimError> {
        self.tree().check_input(x)?;
        Ok(Walk {
            instance: self,
            mask: self.graph.available_columns(x),
            ops: OpCounter::new(),
            applications: OpCounter::new(),
        })
    }
}

/// `R_Π = 2Π_x − I`: negates every coordinate outside the mask.
pub fn reflect_available<T: Real>(state: &mut [C<T>], mask: &[bool]) {
    for (a, &keep) in state.iter_mut().zip(mask) {
        if !keep {
            *a = -*a;
        }
    }
}

/// The walk operator `U = R_Π R_Λ` for one input.
#[derive(Debug)]
pub struct Walk<'a, T> {
    instance: &'a Instance<T>,
    mask: Vec<bool>,
    ops: OpCounter,
    applications: OpCounter,
}

impl<T: Real> Walk<'_, T> {
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn dim(&self) -> usize {
        self.mask.len()
    }

    /// `U ψ` (kernel reflection first).
    pub fn apply(&self, s: &mut [C<T>]) {
        self.instance
            .reflector
            .apply(s, &self.ops)
            .expect("state has the instance dimension");
        reflect_available(s, &self.mask);
        self.applications.add(1);
    }

    /// `U⁻¹ ψ = R_Λ R_Π ψ`.
    pub fn apply_inverse(&self, s: &mut [C<T>]) {
        reflect_available(s, &self.mask);
        self.instance
            .reflector
            .apply(s, &self.ops)
            .expect("state has the instance dimension");
        self.applications.add(1);
    }

    /// Number of `U` or `U⁻¹` applications so far.
    pub fn applications(&self) -> u64 {
        self.applications.get()
    }

    /// Arithmetic operations spent in kernel reflections so far.
    pub fn arithmetic_ops(&self) -> u64 {
        self.ops.get()
    }
}

#[cfg(test)]
mod tests;
