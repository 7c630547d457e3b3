use nalgebra::DMatrix;
use num_complex::Complex;

use crate::fft::{Direction, Fft, OpCounter};
use crate::scalar::{Real, C};

/// Orthonormalizes the `t` kernel vectors of one black cycle and reflects
/// through their span in `O(t log t)`.
///
/// On the cycle's coordinates `(X_0..X_{t−1}, E_0..E_{t−1})` the kernel
/// vectors are the columns of `[B′; (√2/β) I]` with `B′ = (S − I)/γ` and `S`
/// the cyclic shift `e_i ↦ e_{i+1}`. `S` is diagonal in the Fourier basis
/// `(f_k)_j = e^{−2πijk/t}/√t` with eigenvalue `ω^k`, so in Fourier
/// coordinates the span is one line `m_k ∝ (μ_k, √2/β)` per frequency,
/// `μ_k = (ω^k − 1)/γ`, with `λ_k = |μ_k|² + 2/β²`.
#[derive(Debug, Clone)]
pub struct CycleOrthonormalizer<T> {
    len: usize,
    beta: T,
    gamma: T,
    fft: Fft<T>,
    /// Unit vectors `m_k`: complex X part, real E part.
    lines: Vec<(C<T>, T)>,
}

impl<T: Real> CycleOrthonormalizer<T> {
    pub fn new(len: usize, beta: T, gamma: T) -> Self {
        assert!(len >= 1, "cycle must have at least one edge");
        let two = T::lit(2.0);
        let lines = (0..len)
            .map(|k| {
                let mu = Self::mu_with(len, gamma, k);
                let e = two.sqrt() / beta;
                let lambda = mu.norm_sqr() + e * e;
                let s = T::one() / lambda.sqrt();
                (mu * s, e * s)
            })
            .collect();
        Self {
            len,
            beta,
            gamma,
            fft: Fft::new(len),
            lines,
        }
    }

    fn mu_with(len: usize, gamma: T, k: usize) -> C<T> {
        let angle = 2.0 * std::f64::consts::PI * k as f64 / len as f64;
        let w = Complex::new(T::lit(angle.cos()), T::lit(angle.sin()));
        (w - Complex::new(T::one(), T::zero())) / gamma
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Eigenvalue `μ_k` of `B′` on `f_k`.
    pub fn mu(&self, k: usize) -> C<T> {
        Self::mu_with(self.len, self.gamma, k)
    }

    /// `λ_k = (2/γ²)(1 − cos(2πk/t)) + 2/β²`.
    pub fn lambda(&self, k: usize) -> T {
        let two = T::lit(2.0);
        let angle = T::lit(2.0 * std::f64::consts::PI * k as f64 / self.len as f64);
        two / (self.gamma * self.gamma) * (T::one() - angle.cos()) + two / (self.beta * self.beta)
    }

    /// Reflects `(x, e)` through the span of the cycle's kernel vectors.
    pub fn reflect(&self, x: &mut [C<T>], e: &mut [C<T>], ops: &OpCounter) {
        assert_eq!(x.len(), self.len, "X block has wrong length");
        assert_eq!(e.len(), self.len, "E block has wrong length");
        let scale = T::one() / T::from_count(self.len).sqrt();
        self.fft.process(x, Direction::Inverse, ops);
        self.fft.process(e, Direction::Inverse, ops);
        let two = T::lit(2.0);
        for k in 0..self.len {
            let (m1, m2) = self.lines[k];
            let p = x[k] * scale;
            let q = e[k] * scale;
            let s = m1.conj() * p + q * m2;
            x[k] = (m1 * s * two - p) * scale;
            e[k] = (s * (two * m2) - q) * scale;
        }
        ops.add(16 * self.len as u64);
        self.fft.process(x, Direction::Forward, ops);
        self.fft.process(e, Direction::Forward, ops);
    }

    /// Dense `B′` (`f64`, for verification).
    pub fn b_prime(&self) -> DMatrix<f64> {
        let t = self.len;
        let g = self.gamma.as_f64();
        DMatrix::from_fn(t, t, |r, c| {
            let shift = if r == (c + 1) % t { 1.0 } else { 0.0 };
            let diag = if r == c { 1.0 } else { 0.0 };
            (shift - diag) / g
        })
    }

    /// Dense `Q = [[B′, (√2/β) I], [(√2/β) I, −B′†]]`.
    pub fn q_matrix(&self) -> DMatrix<f64> {
        let t = self.len;
        let b = self.b_prime();
        let s = 2f64.sqrt() / self.beta.as_f64();
        let mut q = DMatrix::zeros(2 * t, 2 * t);
        q.view_mut((0, 0), (t, t)).copy_from(&b);
        q.view_mut((t, t), (t, t)).copy_from(&(-b.transpose()));
        for i in 0..t {
            q[(i, t + i)] = s;
            q[(t + i, i)] = s;
        }
        q
    }

    /// Dense Fourier matrix with columns `f_k`.
    pub fn fourier_matrix(&self) -> DMatrix<Complex<f64>> {
        let t = self.len;
        DMatrix::from_fn(t, t, |j, k| {
            let angle = -2.0 * std::f64::consts::PI * (j * k % t) as f64 / t as f64;
            Complex::new(angle.cos(), angle.sin()) / (t as f64).sqrt()
        })
    }

    /// Dense unitary `Q (Q†Q)^{−1/2}`, whose first `t` columns span the
    /// cycle's kernel vectors; `(Q†Q)^{−1/2}` is `F Λ^{−1/2} F†` per block.
    pub fn unitary(&self) -> DMatrix<Complex<f64>> {
        let t = self.len;
        let f = self.fourier_matrix();
        let diag = DMatrix::from_fn(t, t, |r, c| {
            if r == c {
                Complex::new(1.0 / self.lambda(r).as_f64().sqrt(), 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        });
        let g = &f * diag * f.adjoint();
        let mut inv_sqrt = DMatrix::zeros(2 * t, 2 * t);
        inv_sqrt.view_mut((0, 0), (t, t)).copy_from(&g);
        inv_sqrt.view_mut((t, t), (t, t)).copy_from(&g);
        self.q_matrix().map(|v| Complex::new(v, 0.0)) * inv_sqrt
    }

    /// Dense reflection `W diag(I, −I) W†`.
    pub fn dense_reflection(&self) -> DMatrix<Complex<f64>> {
        let t = self.len;
        let w = self.unitary();
        let mut d = DMatrix::<Complex<f64>>::identity(2 * t, 2 * t);
        for i in t..2 * t {
            d[(i, i)] = Complex::new(-1.0, 0.0);
        }
        &w * d * w.adjoint()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::czero;

    fn zeros<T: Real>(n: usize) -> Vec<C<T>> {
        vec![czero(); n]
    }

    fn max_abs(m: &DMatrix<Complex<f64>>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn b_prime_is_diagonal_in_the_fourier_basis() {
        for t in [2, 3, 4, 8] {
            let c = CycleOrthonormalizer::new(t, 0.7f64, 0.4);
            let f = c.fourier_matrix();
            let d = f.adjoint() * c.b_prime().map(|v| Complex::new(v, 0.0)) * &f;
            for r in 0..t {
                for k in 0..t {
                    let want = if r == k { c.mu(k) } else { Complex::new(0.0, 0.0) };
                    assert!((d[(r, k)] - want).norm() < 1e-10);
                }
            }
            let l = c.b_prime() * c.b_prime().transpose();
            let fl = f.adjoint() * l.map(|v| Complex::new(v, 0.0)) * &f;
            for k in 0..t {
                let want = c.lambda(k) - 2.0 / 0.49;
                assert!((fl[(k, k)].re - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn q_gram_is_block_diagonal_and_unitary_is_unitary() {
        for t in [1, 2, 3, 5, 8] {
            let c = CycleOrthonormalizer::new(t, 1.3f64, 0.6);
            let q = c.q_matrix();
            let gram = q.transpose() * &q;
            let b = c.b_prime();
            let block = &b.transpose() * &b + DMatrix::identity(t, t) * (2.0 / 1.69);
            assert!((gram.view((0, 0), (t, t)) - &block).abs().max() < 1e-10);
            assert!((gram.view((t, t), (t, t)) - &block).abs().max() < 1e-10);
            assert!(gram.view((0, t), (t, t)).abs().max() < 1e-10);
            let w = c.unitary();
            let id = DMatrix::<Complex<f64>>::identity(2 * t, 2 * t);
            assert!(max_abs(&(w.adjoint() * &w - id)) < 1e-10);
        }
    }

    #[test]
    fn structured_reflection_matches_dense() {
        for t in [1, 2, 3, 4, 7, 12, 16] {
            let c = CycleOrthonormalizer::new(t, 0.9f64, 0.35);
            let dense = c.dense_reflection();
            let ops = OpCounter::new();
            for col in 0..2 * t {
                let mut x = zeros::<f64>(t);
                let mut e = zeros::<f64>(t);
                if col < t {
                    x[col] = Complex::new(1.0, 0.0);
                } else {
                    e[col - t] = Complex::new(1.0, 0.0);
                }
                c.reflect(&mut x, &mut e, &ops);
                for r in 0..2 * t {
                    let got = if r < t { x[r] } else { e[r - t] };
                    assert!((got - dense[(r, col)]).norm() < 1e-10, "t={t} r={r} col={col}");
                }
            }
            assert!(ops.get() > 0);
        }
    }
}
