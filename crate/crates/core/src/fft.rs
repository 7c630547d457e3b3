//! Discrete Fourier transforms of arbitrary length.
//!
//! Lengths whose prime factors are all small use a recursive mixed-radix
//! Cooley–Tukey decomposition; anything with a prime factor above
//! [`MAX_DIRECT_RADIX`] goes through Bluestein's chirp-z algorithm on a
//! power-of-two inner transform. Transforms are unnormalized.
//!
//! Every transform reports the number of complex multiply-adds it performed
//! to an [`OpCounter`], which the reflection cost instrumentation relies on.

use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex;

use crate::scalar::{czero, Real, C};

/// Largest prime handled by a direct butterfly before switching to Bluestein.
pub const MAX_DIRECT_RADIX: usize = 31;

/// Thread-safe arithmetic operation counter.
#[derive(Debug, Default)]
pub struct OpCounter(AtomicU64);

impl OpCounter {
    pub fn new() -> Self {
        Self(AtomicU64::new(0))
    }

    pub fn add(&self, n: u64) {
        self.0.fetch_add(n, Ordering::Relaxed);
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.0.store(0, Ordering::Relaxed);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `X_k = Σ_j x_j e^{-2πi jk/n}`
    Forward,
    /// `X_k = Σ_j x_j e^{+2πi jk/n}`
    Inverse,
}

#[derive(Debug, Clone)]
enum Plan<T> {
    MixedRadix {
        factors: Vec<usize>,
        /// `e^{-2πi j/n}` for `j < n`.
        twiddles: Vec<C<T>>,
    },
    Bluestein {
        inner: Box<Fft<T>>,
        /// `e^{-πi m²/n}` for `m < n`.
        chirp: Vec<C<T>>,
        /// Forward transform of the zero-padded conjugate chirp.
        kernel: Vec<C<T>>,
    },
}

/// A precomputed transform of one fixed length.
#[derive(Debug, Clone)]
pub struct Fft<T> {
    len: usize,
    plan: Plan<T>,
}

fn factorize(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    while n % 4 == 0 {
        out.push(4);
        n /= 4;
    }
    for p in [2usize, 3, 5] {
        while n % p == 0 {
            out.push(p);
            n /= p;
        }
    }
    let mut p = 7;
    while p * p <= n {
        while n % p == 0 {
            out.push(p);
            n /= p;
        }
        p += 2;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn unit_root<T: Real>(num: usize, den: usize) -> C<T> {
    // e^{-2πi num/den}, reducing the angle in f64 before conversion.
    let angle = -2.0 * std::f64::consts::PI * (num % den) as f64 / den as f64;
    Complex::new(T::lit(angle.cos()), T::lit(angle.sin()))
}

impl<T: Real> Fft<T> {
    /// Plans a transform of length `len` (must be nonzero).
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "transform length must be positive");
        let factors = factorize(len);
        if factors.iter().all(|&p| p <= MAX_DIRECT_RADIX) {
            let twiddles = (0..len).map(|j| unit_root(j, len)).collect();
            return Self {
                len,
                plan: Plan::MixedRadix { factors, twiddles },
            };
        }
        let m = (2 * len - 1).next_power_of_two();
        let inner = Fft::new(m);
        let two_n = 2 * len as u128;
        let chirp: Vec<C<T>> = (0..len)
            .map(|k| {
                let sq = ((k as u128 * k as u128) % two_n) as usize;
                unit_root(sq, 2 * len)
            })
            .collect();
        let mut kernel = vec![czero::<T>(); m];
        kernel[0] = chirp[0].conj();
        for k in 1..len {
            kernel[k] = chirp[k].conj();
            kernel[m - k] = chirp[k].conj();
        }
        let scratch = OpCounter::new();
        inner.process(&mut kernel, Direction::Forward, &scratch);
        Self {
            len,
            plan: Plan::Bluestein {
                inner: Box::new(inner),
                chirp,
                kernel,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// True when this length is served by Bluestein's algorithm.
    pub fn uses_bluestein(&self) -> bool {
        matches!(self.plan, Plan::Bluestein { .. })
    }

    /// Transforms `data` in place.
    pub fn process(&self, data: &mut [C<T>], dir: Direction, ops: &OpCounter) {
        assert_eq!(data.len(), self.len, "buffer length does not match plan");
        if self.len == 1 {
            return;
        }
        match &self.plan {
            Plan::MixedRadix { factors, twiddles } => {
                let input = data.to_vec();
                let mut count = 0u64;
                let mut scratch = Vec::new();
                mixed_radix(
                    &input,
                    0,
                    1,
                    data,
                    factors,
                    twiddles,
                    dir,
                    &mut scratch,
                    &mut count,
                );
                ops.add(count);
            }
            Plan::Bluestein {
                inner,
                chirp,
                kernel,
            } => {
                let n = self.len;
                let m = kernel.len();
                let conj_io = dir == Direction::Inverse;
                let mut work = vec![czero::<T>(); m];
                for j in 0..n {
                    let x = if conj_io { data[j].conj() } else { data[j] };
                    work[j] = x * chirp[j];
                }
                inner.process(&mut work, Direction::Forward, ops);
                for (w, k) in work.iter_mut().zip(kernel) {
                    *w *= *k;
                }
                inner.process(&mut work, Direction::Inverse, ops);
                let scale = T::one() / T::from_count(m);
                for k in 0..n {
                    let y = work[k] * chirp[k] * scale;
                    data[k] = if conj_io { y.conj() } else { y };
                }
                ops.add((2 * n + m) as u64);
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn mixed_radix<T: Real>(
    input: &[C<T>],
    offset: usize,
    stride: usize,
    out: &mut [C<T>],
    factors: &[usize],
    twiddles: &[C<T>],
    dir: Direction,
    scratch: &mut Vec<C<T>>,
    count: &mut u64,
) {
    let n = out.len();
    if n == 1 {
        out[0] = input[offset];
        return;
    }
    let p = factors[0];
    let m = n / p;
    for r in 0..p {
        mixed_radix(
            input,
            offset + r * stride,
            stride * p,
            &mut out[r * m..(r + 1) * m],
            &factors[1..],
            twiddles,
            dir,
            scratch,
            count,
        );
    }
    let big = twiddles.len();
    let step = big / n;
    let root = |e: usize| {
        let w = twiddles[e % big];
        match dir {
            Direction::Forward => w,
            Direction::Inverse => w.conj(),
        }
    };
    scratch.resize(2 * p, czero());
    for k in 0..m {
        for r in 0..p {
            scratch[r] = out[r * m + k] * root(r * k * step);
        }
        for q in 0..p {
            let mut acc = scratch[0];
            for r in 1..p {
                acc += scratch[r] * root(((r * q) % p) * (big / p));
            }
            scratch[p + q] = acc;
        }
        for q in 0..p {
            out[q * m + k] = scratch[p + q];
        }
    }
    *count += (m * p * p) as u64;
}

/// Reference O(n²) transform, kept for tests and tiny lengths.
pub fn naive_dft<T: Real>(data: &[C<T>], dir: Direction) -> Vec<C<T>> {
    let n = data.len();
    (0..n)
        .map(|k| {
            let mut acc = czero::<T>();
            for (j, x) in data.iter().enumerate() {
                let w: C<T> = unit_root(j * k, n);
                acc += *x
                    * match dir {
                        Direction::Forward => w,
                        Direction::Inverse => w.conj(),
                    };
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize) -> Vec<C<f64>> {
        (0..n)
            .map(|j| Complex::new((j as f64 * 0.37).sin(), (j as f64 * 1.3).cos() - 0.2))
            .collect()
    }

    fn max_diff(a: &[C<f64>], b: &[C<f64>]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn matches_naive_for_many_lengths() {
        let ops = OpCounter::new();
        for n in 1..=70 {
            let x = sample(n);
            let plan = Fft::<f64>::new(n);
            for dir in [Direction::Forward, Direction::Inverse] {
                let mut y = x.clone();
                plan.process(&mut y, dir, &ops);
                assert!(max_diff(&y, &naive_dft(&x, dir)) < 1e-9, "n={n} {dir:?}");
            }
        }
    }

    #[test]
    fn large_prime_goes_through_bluestein() {
        let plan = Fft::<f64>::new(37);
        assert!(plan.uses_bluestein());
        assert!(!Fft::<f64>::new(4096).uses_bluestein());
        let x = sample(74);
        let mut y = x.clone();
        Fft::new(74).process(&mut y, Direction::Forward, &OpCounter::new());
        assert!(max_diff(&y, &naive_dft(&x, Direction::Forward)) < 1e-9);
    }

    #[test]
    fn inverse_after_forward_scales_by_length() {
        let n = 360;
        let x = sample(n);
        let plan = Fft::<f64>::new(n);
        let ops = OpCounter::new();
        let mut y = x.clone();
        plan.process(&mut y, Direction::Forward, &ops);
        plan.process(&mut y, Direction::Inverse, &ops);
        for v in y.iter_mut() {
            *v /= n as f64;
        }
        assert!(max_diff(&x, &y) < 1e-12);
        assert!(ops.get() > 0);
    }

    #[test]
    fn single_precision_transform() {
        let x: Vec<C<f32>> = (0..12).map(|j| Complex::new(j as f32, 0.0)).collect();
        let mut y = x.clone();
        Fft::<f32>::new(12).process(&mut y, Direction::Forward, &OpCounter::new());
        assert!((y[0].re - 66.0).abs() < 1e-4);
    }
}
