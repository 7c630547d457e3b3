use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::phase::{ExactSpectral, PhaseParams};
use super::spectral::{dense_walk, dense_bytes, spectral_check, SpectralReport};
use super::{Instance, Mode, QsimError, DEFAULT_MEMORY_BUDGET};
use crate::mgraph::ColumnTag;
use crate::scalar::{norm_sqr, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub mode: Mode,
    /// Bytes the simulated register may occupy.
    pub memory_budget: u64,
    /// Also evaluate the spectral items at `Θ` (exact-spectral mode only).
    pub diagnostics: bool,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            mode: Mode::ExactSpectral,
            memory_budget: DEFAULT_MEMORY_BUDGET,
            diagnostics: false,
        }
    }
}

/// Cost counters of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    /// Controlled calls to `U` or `U⁻¹` made by the phase-detection circuit.
    pub controlled_calls: u64,
    /// `R_Π` applications of the circuit (one per controlled call).
    pub r_pi_applications: u64,
    /// Oracle queries: two per `R_Π`.
    pub queries: u64,
    /// `U` / `U⁻¹` applications actually performed by the simulator.
    pub simulated_walk_applications: u64,
    /// Arithmetic operations spent in kernel reflections by the simulator.
    pub arithmetic_ops: u64,
    /// `c · ln(1/δ) / Θ`.
    pub call_budget: f64,
    /// `W`, the count suggested by the "O(W) applications" reading.
    pub complexity: f64,
}

/// Measurement statistics of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    /// Probability of each column with all ancillas zero.
    pub distribution: Vec<f64>,
    /// Probability of a nonzero ancilla register.
    pub ancilla_nonzero: f64,
    /// Mass per output label over the leaf columns.
    pub label_mass: Vec<f64>,
}

impl Outcome {
    pub fn total(&self) -> f64 {
        self.distribution.iter().sum::<f64>() + self.ancilla_nonzero
    }

    /// Draws `shots` column indices (or `None` for a nonzero ancilla register).
    pub fn sample(&self, seed: u64, shots: usize) -> Vec<Option<usize>> {
        let mut weights = self.distribution.clone();
        weights.push(self.ancilla_nonzero.max(0.0));
        let dist = WeightedIndex::new(&weights).expect("a normalized distribution");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..shots)
            .map(|_| {
                let k = dist.sample(&mut rng);
                (k < self.distribution.len()).then_some(k)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub input: Vec<usize>,
    pub mode: Mode,
    pub epsilon: f64,
    pub theta: f64,
    pub delta: f64,
    pub ancilla_qubits: usize,
    pub complexity: f64,
    pub wsize_pos: f64,
    pub wsize_neg: f64,
    /// Leaf reached by the input and its output label.
    pub expected_leaf: usize,
    pub expected_output: usize,
    /// Label with the largest measured mass.
    pub decoded_output: usize,
    /// Mass on the expected leaf's column with ancillas zero.
    pub success: f64,
    pub outcome: Outcome,
    pub counts: Counts,
    pub diagnostics: Option<SpectralReport>,
}

/// Runs phase detection of `U` on `|e_root⟩` with `Θ = ε²/W`, `δ = ε`.
pub fn run<T: Real>(instance: &Instance<T>, x: &[usize], params: &RunParams) -> Result<RunReport, QsimError> {
    let eps = instance.epsilon().as_f64();
    let w = instance.complexity().as_f64();
    if w <= eps {
        return Err(QsimError::Parameter(format!(
            "W = {w} does not exceed ε = {eps}; choose a smaller ε"
        )));
    }
    let theta = eps * eps / w;
    let phase = PhaseParams::new(theta, eps)?;
    let tree = instance.tree();
    let eval = tree.evaluate(x)?;
    let walk = instance.walk(x)?;
    let dim = instance.dim();
    let psi = instance.start_state();
    let (state, diagnostics) = match params.mode {
        Mode::ExactSpectral => {
            let needed = dense_bytes(dim);
            if needed > params.memory_budget {
                return Err(QsimError::Budget {
                    needed,
                    budget: params.memory_budget,
                });
            }
            let u = dense_walk(&walk);
            let spec = ExactSpectral::for_scalar::<T>(&u);
            let diag = if params.diagnostics {
                Some(spectral_check(instance, x, &spec, &[theta])?)
            } else {
                None
            };
            (spec.apply(&psi), diag)
        }
        Mode::Ancilla => {
            let needed = phase.register_bytes::<T>(dim);
            if needed > params.memory_budget {
                return Err(QsimError::Budget {
                    needed,
                    budget: params.memory_budget,
                });
            }
            (phase.apply_ancilla(&walk, &psi), None)
        }
    };
    let distribution: Vec<f64> = state.iter().map(|z| z.norm_sqr().as_f64()).collect();
    let ancilla_nonzero = (1.0 - norm_sqr(&state).as_f64()).max(0.0);
    let cols = instance.graph().columns();
    let mut label_mass = vec![0.0; tree.outputs()];
    for (pos, &tag) in cols.tags().iter().enumerate() {
        if let ColumnTag::Leaf(z) = tag {
            label_mass[tree.output(z).expect("leaf")] += distribution[pos];
        }
    }
    let decoded_output = label_mass
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (l, &m)| if m > best.1 { (l, m) } else { best })
        .0;
    let success = distribution[cols.leaf(eval.leaf)];
    let calls = phase.controlled_calls;
    Ok(RunReport {
        input: x.to_vec(),
        mode: params.mode,
        epsilon: eps,
        theta,
        delta: phase.delta,
        ancilla_qubits: phase.qubits,
        complexity: w,
        wsize_pos: instance.wsize_pos().as_f64(),
        wsize_neg: instance.wsize_neg().as_f64(),
        expected_leaf: eval.leaf,
        expected_output: tree.output(eval.leaf).expect("leaf"),
        decoded_output,
        success,
        outcome: Outcome {
            distribution,
            ancilla_nonzero,
            label_mass,
        },
        counts: Counts {
            controlled_calls: calls,
            r_pi_applications: calls,
            queries: 2 * calls,
            simulated_walk_applications: walk.applications(),
            arithmetic_ops: walk.arithmetic_ops(),
            call_budget: phase.call_budget(),
            complexity: w,
        },
        diagnostics,
    })
}
