use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{QsimError, Walk};
use crate::scalar::{Real, C};

/// Eigenphases at or below this magnitude count as zero (double precision).
pub const ZERO_PHASE_TOL: f64 = 1e-7;

/// Zero-phase tolerance for a walk assembled in scalar `T`: rounding in `U`
/// shifts true zero phases by a few ulps of `T`.
pub fn zero_phase_tol<T: Real>() -> f64 {
    ZERO_PHASE_TOL.max(100.0 * T::epsilon().as_f64())
}

/// Constant `c` in the controlled-call budget `c · ln(1/δ) / Θ`.
pub const CALL_BUDGET_CONSTANT: f64 = 8.0 * std::f64::consts::PI / std::f64::consts::LN_2;

/// Ancilla register amplitudes `√w_t`, `w` the `k`-fold self-convolution of a
/// uniform window of width `M`.
///
/// The register filter `a(θ) = Σ_t w_t e^{itθ}` equals 1 at `θ = 0` and has
/// `|a(θ)| ≤ 2^{−k}` for `|θ| ≥ 2π/M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub width: usize,
    pub repetitions: usize,
    pub weights: Vec<f64>,
}

impl Window {
    pub fn new(width: usize, repetitions: usize) -> Self {
        assert!(width >= 1 && repetitions >= 1);
        let mut w = vec![1.0 / width as f64; width];
        for _ in 1..repetitions {
            // Convolution with the uniform window as a sliding sum.
            let n = w.len() + width - 1;
            let mut out = vec![0.0; n];
            let mut acc = 0.0;
            for (t, o) in out.iter_mut().enumerate() {
                if t < w.len() {
                    acc += w[t];
                }
                if t >= width {
                    acc -= w[t - width];
                }
                *o = acc / width as f64;
            }
            w = out;
        }
        Self {
            width,
            repetitions,
            weights: w,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `a(θ)` in closed form.
    pub fn filter(&self, theta: f64) -> Complex<f64> {
        let m = self.width as f64;
        let base = if (theta / 2.0).sin().abs() < 1e-300 {
            Complex::new(1.0, 0.0)
        } else {
            let mag = (m * theta / 2.0).sin() / (m * (theta / 2.0).sin());
            Complex::from_polar(mag, (m - 1.0) * theta / 2.0)
        };
        base.powu(self.repetitions as u32)
    }
}

/// Parameters of the phase-detection circuit for given `Θ` and `δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseParams {
    pub theta: f64,
    pub delta: f64,
    pub window: Window,
    /// Ancilla qubits `⌈log₂ N⌉` for a register of `N` window positions.
    pub qubits: usize,
    /// Controlled calls to `U` and `U⁻¹`: `2(N − 1)`.
    pub controlled_calls: u64,
}

impl PhaseParams {
    pub fn new(theta: f64, delta: f64) -> Result<Self, QsimError> {
        if !(theta > 0.0 && theta < 1.0) || !(delta > 0.0 && delta < 1.0) {
            return Err(QsimError::Parameter(format!(
                "phase detection needs Θ, δ in (0, 1), got Θ = {theta}, δ = {delta}"
            )));
        }
        let width = (2.0 * std::f64::consts::PI / theta).ceil() as usize;
        let repetitions = (2.0 / delta).log2().ceil() as usize;
        let window = Window::new(width, repetitions);
        let n = window.len();
        let qubits = (usize::BITS - (n - 1).leading_zeros()) as usize;
        Ok(Self {
            theta,
            delta,
            controlled_calls: 2 * (n as u64 - 1),
            qubits,
            window,
        })
    }

    /// `c · ln(1/δ) / Θ`.
    pub fn call_budget(&self) -> f64 {
        CALL_BUDGET_CONSTANT * (1.0 / self.delta).ln() / self.theta
    }

    /// Bytes of a full `dim × 2^b` complex register of scalar `T`.
    pub fn register_bytes<T>(&self, dim: usize) -> u64 {
        (dim as u64)
            .saturating_mul(1u64 << self.qubits.min(63))
            .saturating_mul(std::mem::size_of::<C<T>>() as u64)
    }

    /// Component with ancillas `|0^b⟩` of `R(U)|ψ⟩|0^b⟩`.
    ///
    /// `R = V†(2|0⟩⟨0| − I)V` with `V` preparing `Σ_t √w_t |t⟩`, applying
    /// `U^t` controlled on `|t⟩`, and unpreparing, so the zero-ancilla part is
    /// `−ψ + 2 a(U)† a(U) ψ`. Evaluated with `N − 1` applications of `U`
    /// followed by `N − 1` of `U⁻¹`, the circuit's controlled-call count.
    pub fn apply_ancilla<T: Real>(&self, walk: &Walk<'_, T>, psi: &[C<T>]) -> Vec<C<T>> {
        let w: Vec<T> = self.window.weights.iter().map(|&v| T::lit(v)).collect();
        let accumulate = |start: &[C<T>], step: &dyn Fn(&mut [C<T>])| {
            let mut cur = start.to_vec();
            let mut acc: Vec<C<T>> = start.iter().map(|a| *a * w[0]).collect();
            for &wt in &w[1..] {
                step(&mut cur);
                for (a, c) in acc.iter_mut().zip(&cur) {
                    *a += *c * wt;
                }
            }
            acc
        };
        let phi = accumulate(psi, &|s| walk.apply(s));
        let back = accumulate(&phi, &|s| walk.apply_inverse(s));
        let two = T::lit(2.0);
        psi.iter().zip(back).map(|(p, b)| b * two - *p).collect()
    }
}

/// Eigendecomposition of a real orthogonal `U` through its symmetric part.
///
/// `(U + Uᵀ)/2` has eigenvalue `cos θ` on the real span of the `e^{±iθ}`
/// eigenvectors of `U`; the phase of each eigenvector `v` is recovered as
/// `2 asin(‖(U − I)v‖/2)`, accurate near zero.
#[derive(Debug, Clone)]
pub struct ExactSpectral {
    pub vectors: DMatrix<f64>,
    pub phases: Vec<f64>,
    /// Phases at or below this count as zero.
    pub zero_tol: f64,
}

impl ExactSpectral {
    pub fn new(u: &DMatrix<f64>) -> Self {
        Self::with_tolerance(u, ZERO_PHASE_TOL)
    }

    /// Decomposition of a walk assembled in scalar `T`.
    pub fn for_scalar<T: Real>(u: &DMatrix<f64>) -> Self {
        Self::with_tolerance(u, zero_phase_tol::<T>())
    }

    pub fn with_tolerance(u: &DMatrix<f64>, zero_tol: f64) -> Self {
        let sym = (u + u.transpose()) * 0.5;
        let eig = sym.symmetric_eigen();
        let n = u.nrows();
        let phases = (0..n)
            .map(|k| {
                let v = eig.eigenvectors.column(k);
                let r = (u * v - v).norm();
                2.0 * (r / 2.0).min(1.0).asin()
            })
            .collect();
        Self {
            vectors: eig.eigenvectors,
            phases,
            zero_tol,
        }
    }

    /// `P_Θ v`: projection onto eigenvectors with `|θ| ≤ Θ`.
    pub fn project(&self, theta: f64, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(v.len());
        for (k, &p) in self.phases.iter().enumerate() {
            if p <= theta {
                let col = self.vectors.column(k);
                out += col * col.dot(v);
            }
        }
        out
    }

    /// `(2P_0 − I)ψ` on a complex state.
    pub fn apply<T: Real>(&self, psi: &[C<T>]) -> Vec<C<T>> {
        let re = DVector::from_iterator(psi.len(), psi.iter().map(|z| z.re.as_f64()));
        let im = DVector::from_iterator(psi.len(), psi.iter().map(|z| z.im.as_f64()));
        let pr = self.project(self.zero_tol, &re);
        let pi = self.project(self.zero_tol, &im);
        psi.iter()
            .enumerate()
            .map(|(i, z)| {
                let p = Complex::new(T::lit(2.0 * pr[i]), T::lit(2.0 * pi[i]));
                p - *z
            })
            .collect()
    }

    /// Dimension of the zero-phase eigenspace.
    pub fn zero_dimension(&self) -> usize {
        self.phases.iter().filter(|&&p| p <= self.zero_tol).count()
    }
}
