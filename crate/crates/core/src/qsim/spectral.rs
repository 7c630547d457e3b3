use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::phase::ExactSpectral;
use super::{reflect_available, Instance, QsimError, Walk};
use crate::fft::OpCounter;
use crate::scalar::{czero, Real, C};

/// Rough peak allocation of a dense eigendecomposition of a `dim × dim` walk.
pub(crate) fn dense_bytes(dim: usize) -> u64 {
    4 * (dim as u64) * (dim as u64) * 8
}

/// Dense real matrix of `U`, column by column.
pub fn dense_walk<T: Real>(walk: &Walk<'_, T>) -> DMatrix<f64> {
    let n = walk.dim();
    let mut out = DMatrix::zeros(n, n);
    let mut s = vec![czero::<T>(); n];
    for c in 0..n {
        s.iter_mut().for_each(|z| *z = czero());
        s[c] = Complex::new(T::one(), T::zero());
        walk.apply(&mut s);
        for (r, z) in s.iter().enumerate() {
            out[(r, c)] = z.re.as_f64();
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandItem {
    pub theta: f64,
    /// `‖P_Θ φ−‖²`.
    pub value: f64,
    /// `(Θ²/4)(1 + W²/(4ε²))`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    /// `‖P_0 φ+‖²`.
    pub zero_overlap: f64,
    /// `1 − ε²`.
    pub zero_overlap_bound: f64,
    pub bands: Vec<BandItem>,
    /// `‖Uψ_x − ψ_x‖` for the fixed point built from the positive witness.
    pub fixed_point_residual: f64,
    /// `‖Π ψ̄_x − φ−‖` for the state built from the negative witness.
    pub projection_residual: f64,
    /// `‖R_Λ ψ̄_x + ψ̄_x‖`.
    pub reflection_residual: f64,
}

impl SpectralReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.zero_overlap >= self.zero_overlap_bound - tol
            && self.bands.iter().all(|b| b.value <= b.bound + tol)
            && self.fixed_point_residual <= tol.max(1e-9)
            && self.projection_residual <= tol.max(1e-9)
            && self.reflection_residual <= tol.max(1e-9)
    }
}

fn dist(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm()
}

fn to_state<T: Real>(v: &DVector<f64>) -> Vec<C<T>> {
    v.iter().map(|&a| Complex::new(T::lit(a), T::zero())).collect()
}

fn to_real<T: Real>(s: &[C<T>]) -> DVector<f64> {
    DVector::from_iterator(s.len(), s.iter().map(|z| z.re.as_f64()))
}

/// `φ± = (e_root ± e_leaf)/√2` for the leaf reached by `x`, plus the fixed
/// point `ψ_x` and the reflected state `ψ̄_x` built from the witnesses.
struct Probes {
    plus: DVector<f64>,
    minus: DVector<f64>,
    psi: DVector<f64>,
    psi_bar: DVector<f64>,
}

fn probes<T: Real>(instance: &Instance<T>, x: &[usize]) -> Result<Probes, QsimError> {
    let g = instance.graph();
    let cols = g.columns();
    let dim = instance.dim();
    let leaf = instance.tree().evaluate(x)?.leaf;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut plus = DVector::zeros(dim);
    let mut minus = DVector::zeros(dim);
    plus[cols.root()] = h;
    plus[cols.leaf(leaf)] = h;
    minus[cols.root()] = h;
    minus[cols.leaf(leaf)] = -h;
    let wit = g.witnesses(leaf, instance.weights());
    let eps = instance.epsilon().as_f64();
    let wpos = instance.wsize_pos().as_f64();
    let w = DVector::from_iterator(dim, wit.positive.iter().map(|a| a.as_f64()));
    let psi = &plus - w * (eps / wpos.sqrt());
    // A†w̄ over the edge and pseudo columns.
    let neg: Vec<T> = wit.negative.clone();
    let at = instance.matrix().mul_t_vec(&neg);
    let mut atw = DVector::from_iterator(dim, at.iter().map(|a| a.as_f64()));
    atw[cols.root()] = 0.0;
    for z in instance.tree().leaves() {
        atw[cols.leaf(z)] = 0.0;
    }
    let psi_bar = &minus + atw * (wpos.sqrt() / (2.0 * eps));
    Ok(Probes {
        plus,
        minus,
        psi,
        psi_bar,
    })
}

/// Spectral items of the correctness argument for input `x`, with `spec`
/// the decomposition of that input's walk.
pub fn spectral_check<T: Real>(
    instance: &Instance<T>,
    x: &[usize],
    spec: &ExactSpectral,
    thetas: &[f64],
) -> Result<SpectralReport, QsimError> {
    let p = probes(instance, x)?;
    let walk = instance.walk(x)?;
    let eps = instance.epsilon().as_f64();
    let w = instance.complexity().as_f64();

    let mut s = to_state::<T>(&p.psi);
    walk.apply(&mut s);
    let fixed_point_residual = dist(&to_real(&s), &p.psi);

    let mut s = to_state::<T>(&p.psi_bar);
    reflect_available(&mut s, walk.mask());
    let pi = (to_real(&s) + &p.psi_bar) * 0.5;
    let projection_residual = dist(&pi, &p.minus);

    let mut s = to_state::<T>(&p.psi_bar);
    instance.reflector().apply(&mut s, &OpCounter::new())?;
    let reflection_residual = (to_real(&s) + &p.psi_bar).norm();

    let zero_overlap = spec.project(spec.zero_tol, &p.plus).norm_squared();
    let bands = thetas
        .iter()
        .map(|&theta| BandItem {
            theta,
            value: spec.project(theta, &p.minus).norm_squared(),
            bound: theta * theta / 4.0 * (1.0 + w * w / (4.0 * eps * eps)),
        })
        .collect();
    Ok(SpectralReport {
        zero_overlap,
        zero_overlap_bound: 1.0 - eps * eps,
        bands,
        fixed_point_residual,
        projection_residual,
        reflection_residual,
    })
}

/// Largest `‖P_Θ Π u‖ / ((Θ/2)‖u‖)` over random `u = M̃ᵀ r` (so `Λu = 0`)
/// and the given `Θ`.
pub fn effective_gap_ratio<T: Real>(
    instance: &Instance<T>,
    x: &[usize],
    spec: &ExactSpectral,
    thetas: &[f64],
    samples: usize,
    seed: u64,
) -> Result<f64, QsimError> {
    let walk = instance.walk(x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = instance.matrix().rows();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let r: Vec<T> = (0..rows).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
        let u = instance.matrix().mul_t_vec(&r);
        let u = DVector::from_iterator(u.len(), u.iter().map(|a| a.as_f64()));
        let pu = DVector::from_iterator(
            u.len(),
            u.iter().zip(walk.mask()).map(|(&a, &keep)| if keep { a } else { 0.0 }),
        );
        for &theta in thetas {
            let lhs = spec.project(theta, &pu).norm();
            worst = worst.max(lhs / (theta / 2.0 * u.norm()));
        }
    }
    Ok(worst)
}
