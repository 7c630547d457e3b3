//! The full pipeline for one problem: frontend tree, span program witness
//! sizes, decision graph, kernel, and a simulated run per input.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dense;
use crate::dtree::{all_inputs, TreeError};
use crate::fft::OpCounter;
use crate::kernel::KernelBasis;
use crate::problems::{Answer, Frontend, GraphError, Problem};
use crate::qsim::{self, Counts, Instance, Mode, QsimError, RunParams, CALL_BUDGET_CONSTANT};
use crate::report::SCHEMA_VERSION;
use crate::scalar::C;
use crate::spanprog::{binary_bounds, SpanError, SpanProgram};

/// Largest input domain run exhaustively.
pub const MAX_EXHAUSTIVE_INPUTS: usize = 1 << 16;

/// Largest accepted ε.
pub const MAX_EPSILON: f64 = 0.2;

/// A run succeeds when the correct leaf is measured with at least this probability.
pub const SUCCESS_THRESHOLD: f64 = 2.0 / 3.0;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("memory budget exceeded: need {needed} bytes, budget is {budget} bytes")]
    Budget { needed: u64, budget: u64 },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Span(#[from] SpanError),
    #[error(transparent)]
    Qsim(QsimError),
}

impl From<QsimError> for ExperimentError {
    fn from(e: QsimError) -> Self {
        match e {
            QsimError::Parameter(m) => ExperimentError::Parameter(m),
            QsimError::Budget { needed, budget } => ExperimentError::Budget { needed, budget },
            e => ExperimentError::Qsim(e),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOptions {
    pub epsilon: f64,
    pub mode: Mode,
    /// Pad black cycles to a power-of-two length.
    pub pad: bool,
    pub memory_budget: u64,
    /// Dense kernel checks run when M̃ has at most this many columns.
    pub dense_check_limit: usize,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            mode: Mode::ExactSpectral,
            pad: false,
            memory_budget: qsim::DEFAULT_MEMORY_BUDGET,
            dense_check_limit: 600,
        }
    }
}

impl ExperimentOptions {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if !(self.epsilon > 0.0 && self.epsilon <= MAX_EPSILON) {
            return Err(ExperimentError::Parameter(format!(
                "ε = {} must lie in (0, {MAX_EPSILON}]",
                self.epsilon
            )));
        }
        if self.memory_budget == 0 {
            return Err(ExperimentError::Parameter("memory budget must be positive".into()));
        }
        Ok(())
    }
}

/// Which inputs to run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Inputs {
    All,
    Given(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub epsilon: f64,
    pub mode: Mode,
    pub padded: bool,
    pub memory_budget: u64,
    pub theta: f64,
    pub delta: f64,
    pub ancilla_qubits: usize,
    pub complexity: f64,
    pub alpha: f64,
    pub call_budget_constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSummary {
    pub arity: usize,
    pub depth: usize,
    pub mistakes: usize,
    pub vertices: usize,
    pub leaves: usize,
    pub outputs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessSummary {
    /// Largest witness sizes of the tree program.
    pub tree_positive: f64,
    pub tree_negative: f64,
    /// `2GT` and `2`.
    pub tree_positive_bound: f64,
    pub tree_negative_bound: f64,
    /// Largest witness sizes of the decision-graph program.
    pub graph_positive: f64,
    pub graph_negative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelCheck {
    /// `max ‖M̃v‖` over the basis.
    pub max_residual: f64,
    /// Operator-norm distance between the basis projector and the SVD one.
    pub projector_distance: f64,
    /// Operator-norm distance between structured `R_Λ` and `2P − I`.
    pub reflection_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSummary {
    pub columns: usize,
    pub rows: usize,
    pub nonzeros: usize,
    pub black_cycles: usize,
    pub basis_vectors: usize,
    pub expected_nullity: usize,
    pub dense: Option<KernelCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRun {
    pub input: Vec<usize>,
    pub expected: Answer,
    pub decoded: Answer,
    pub correct: bool,
    pub success: f64,
    pub counts: Counts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub inputs: usize,
    pub min_success: f64,
    pub all_correct: bool,
    pub success_threshold: f64,
    /// Every success probability reaches the threshold.
    pub passed: bool,
    pub max_controlled_calls: u64,
    pub max_queries: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: u32,
    pub problem: String,
    pub n: usize,
    pub parameters: Parameters,
    pub tree: TreeSummary,
    pub witness: WitnessSummary,
    pub kernel: KernelSummary,
    pub runs: Vec<InputRun>,
    pub summary: Summary,
    /// Decoded answer when a single input was run.
    pub post_process: Option<Answer>,
}

/// Graph answers are reported with 1-indexed vertices, as in input files.
pub fn display_answer(answer: &Answer) -> Answer {
    match answer {
        Answer::Edges(e) => Answer::Edges(e.iter().map(|&(u, v)| (u + 1, v + 1)).collect()),
        a => a.clone(),
    }
}

fn tree_witnesses(f: &Frontend) -> Result<WitnessSummary, ExperimentError> {
    let sp = SpanProgram::<f64>::with_default_weights(&f.tree)?;
    let (mut p, mut q) = (0.0f64, 0.0f64);
    for z in f.tree.leaves() {
        let w = sp.witnesses_for_leaf(z);
        p = p.max(w.positive_size);
        q = q.max(w.negative_size);
    }
    let stats = f.tree.stats();
    let (bp, bq) = binary_bounds(stats, 1.0 / stats.mistakes.max(1) as f64, 1.0 / stats.depth.max(1) as f64);
    Ok(WitnessSummary {
        tree_positive: p,
        tree_negative: q,
        tree_positive_bound: bp,
        tree_negative_bound: bq,
        graph_positive: 0.0,
        graph_negative: 0.0,
    })
}

/// Dense kernel diagnostics of an instance (f64).
pub fn kernel_check(inst: &Instance<f64>) -> Result<KernelCheck, ExperimentError> {
    let basis = KernelBasis::new(inst.graph(), inst.alpha(), inst.weights()).map_err(QsimError::from)?;
    let a = inst.matrix().to_dense_f64();
    let dim = inst.dim();
    let vs = basis.to_dense(dim);
    let max_residual = vs.iter().map(|v| (&a * v).norm()).fold(0.0, f64::max);
    let p = dense::projector(dim, &dense::orthonormalize(&vs));
    let oracle = dense::null_space_projector(&a);
    let projector_distance = dense::operator_norm(&(&p - &oracle));
    let ops = OpCounter::new();
    let mut r = nalgebra::DMatrix::zeros(dim, dim);
    for c in 0..dim {
        let mut s = vec![C::new(0.0, 0.0); dim];
        s[c] = C::new(1.0, 0.0);
        inst.reflector().apply(&mut s, &ops).map_err(QsimError::from)?;
        for (i, z) in s.iter().enumerate() {
            r[(i, c)] = z.re;
        }
    }
    let want = oracle * 2.0 - nalgebra::DMatrix::identity(dim, dim);
    Ok(KernelCheck {
        max_residual,
        projector_distance,
        reflection_distance: dense::operator_norm(&(r - want)),
    })
}

fn kernel_summary(inst: &Instance<f64>, limit: usize) -> Result<KernelSummary, ExperimentError> {
    let g = inst.graph();
    let basis = KernelBasis::new(g, inst.alpha(), inst.weights()).map_err(QsimError::from)?;
    Ok(KernelSummary {
        columns: inst.dim(),
        rows: inst.matrix().rows(),
        nonzeros: inst.matrix().nnz(),
        black_cycles: g.cycles().len(),
        basis_vectors: basis.len(),
        expected_nullity: g.expected_nullity(),
        dense: if inst.dim() <= limit { Some(kernel_check(inst)?) } else { None },
    })
}

/// Runs the whole pipeline for `problem` on the selected inputs.
pub fn run_experiment(
    problem: &Problem,
    inputs: &Inputs,
    opts: &ExperimentOptions,
) -> Result<ExperimentReport, ExperimentError> {
    opts.validate()?;
    let frontend = problem.build()?;
    let tree = &frontend.tree;
    let inst = Instance::<f64>::new(tree, opts.epsilon, opts.pad)?;
    let xs = match inputs {
        Inputs::All => {
            let size = (tree.alphabet() as f64).powi(tree.arity() as i32);
            if size > MAX_EXHAUSTIVE_INPUTS as f64 {
                return Err(ExperimentError::Parameter(format!(
                    "{size} inputs exceed the exhaustive limit of {MAX_EXHAUSTIVE_INPUTS}; pass a single input"
                )));
            }
            all_inputs(tree.arity(), tree.alphabet())
        }
        Inputs::Given(xs) => xs.clone(),
    };
    for x in &xs {
        tree.check_input(x)?;
    }
    let params = RunParams {
        mode: opts.mode,
        memory_budget: opts.memory_budget,
        diagnostics: false,
    };
    let reports: Vec<_> = xs
        .par_iter()
        .map(|x| qsim::run(&inst, x, &params))
        .collect::<Result<_, _>>()?;
    let first = reports
        .first()
        .ok_or_else(|| ExperimentError::Parameter("no inputs to run".into()))?;
    let mut runs = Vec::with_capacity(reports.len());
    for r in &reports {
        let expected = frontend.answer(r.expected_output).clone();
        let decoded = frontend.answer(r.decoded_output).clone();
        let correct = frontend.accepts(&r.input, &decoded)?;
        runs.push(InputRun {
            input: r.input.clone(),
            expected: display_answer(&expected),
            decoded: display_answer(&decoded),
            correct,
            success: r.success,
            counts: r.counts.clone(),
        });
    }
    let min_success = runs.iter().map(|r| r.success).fold(f64::INFINITY, f64::min);
    let stats = tree.stats();
    let mut witness = tree_witnesses(&frontend)?;
    witness.graph_positive = inst.wsize_pos();
    witness.graph_negative = inst.wsize_neg();
    Ok(ExperimentReport {
        schema: SCHEMA_VERSION,
        problem: problem.name().to_string(),
        n: problem.n(),
        parameters: Parameters {
            epsilon: opts.epsilon,
            mode: opts.mode,
            padded: opts.pad,
            memory_budget: opts.memory_budget,
            theta: first.theta,
            delta: first.delta,
            ancilla_qubits: first.ancilla_qubits,
            complexity: first.complexity,
            alpha: inst.alpha(),
            call_budget_constant: CALL_BUDGET_CONSTANT,
        },
        tree: TreeSummary {
            arity: tree.arity(),
            depth: stats.depth,
            mistakes: stats.mistakes,
            vertices: tree.len(),
            leaves: tree.leaves().count(),
            outputs: tree.outputs(),
        },
        witness,
        kernel: kernel_summary(&inst, opts.dense_check_limit)?,
        summary: Summary {
            inputs: runs.len(),
            min_success,
            all_correct: runs.iter().all(|r| r.correct),
            success_threshold: SUCCESS_THRESHOLD,
            passed: min_success >= SUCCESS_THRESHOLD,
            max_controlled_calls: runs.iter().map(|r| r.counts.controlled_calls).max().unwrap_or(0),
            max_queries: runs.iter().map(|r| r.counts.queries).max().unwrap_or(0),
        },
        post_process: (runs.len() == 1).then(|| runs[0].decoded.clone()),
        runs,
    })
}
