//! Explicit kernel of M̃ and the structured reflection `2Λ − I` through it.
//!
//! Each red edge `e` and its pseudo-edge `ē` are rotated into
//! `e± = (ē ± e)/√2`, so that `M̃e⁺ = √2γ|tail⟩` and `M̃e⁻ = √2γ|head⟩`. Writing
//! `X_v` for the rotated coordinate at vertex `v` (every vertex is the end of
//! exactly one red edge), the kernel is spanned by
//!
//! * one vector per leaf `z`: `(√2/α) e_z + (1/γ) X_z`, and one for the root
//!   column: `−(√2/α) e_root + (1/γ) X_{z0}`;
//! * per black cycle `c_0 … c_{t−1}` and edge `E_i = (c_i, c_{i+1})`:
//!   `(√2/β) E_i − (1/γ) X_{c_i} + (1/γ) X_{c_{i+1}}`.
//!
//! Distinct families live on disjoint coordinates, so the reflection is
//! block diagonal: a 2×2 reflection per root/leaf vector, one DFT-diagonalized
//! `2t × 2t` block per cycle, and `−1` on coordinates no family touches
//! (the `e⁻` side of padding pendants).

mod cycle;

use nalgebra::DVector;
use thiserror::Error;

pub use cycle::CycleOrthonormalizer;

use crate::fft::OpCounter;
use crate::mgraph::{ColumnTag, DecisionGraph, GraphError, RedEnd};
use crate::scalar::{Real, C};
use crate::spanprog::Weights;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("kernel structure: {0}")]
    Structure(String),
    #[error("state has {got} amplitudes, expected {want}")]
    Dimension { got: usize, want: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Position of `X_v` in the rotated frame: the red column for `e⁺`, the
/// pseudo column for `e⁻`.
fn x_slot(g: &DecisionGraph, v: usize) -> (usize, RedEnd) {
    let (e, end) = g.red_end(v);
    let cols = g.columns();
    match end {
        RedEnd::Tail => (cols.edge(e), end),
        RedEnd::Head => (cols.pseudo(e), end),
    }
}

/// `c·X_v` written in the standard (red, pseudo) coordinates.
fn x_standard<T: Real>(g: &DecisionGraph, v: usize, c: T) -> [(usize, T); 2] {
    let (e, end) = g.red_end(v);
    let cols = g.columns();
    let s = c / T::lit(2.0).sqrt();
    match end {
        RedEnd::Tail => [(cols.edge(e), s), (cols.pseudo(e), s)],
        RedEnd::Head => [(cols.edge(e), -s), (cols.pseudo(e), s)],
    }
}

/// The kernel basis in standard column coordinates (sparse vectors).
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBasis<T> {
    /// Root vector first, then one per leaf in column order.
    pub type1: Vec<Vec<(usize, T)>>,
    /// One family per cycle, `t` vectors each.
    pub type2: Vec<Vec<Vec<(usize, T)>>>,
}

impl<T: Real> KernelBasis<T> {
    pub fn new(g: &DecisionGraph, alpha: T, weights: &Weights<T>) -> Result<Self, KernelError> {
        let cols = g.columns();
        let sqrt2 = T::lit(2.0).sqrt();
        let gamma = weights.red.sqrt();
        let mut type1 = Vec::new();
        let src = g.source();
        if g.red_end(src).1 != RedEnd::Tail {
            return Err(KernelError::Structure("source is not a red tail".into()));
        }
        let mut root = vec![(cols.root(), -sqrt2 / alpha)];
        root.extend(x_standard(g, src, T::one() / gamma));
        type1.push(root);
        for &tag in cols.tags() {
            if let ColumnTag::Leaf(z) = tag {
                let v = g.tree_vertex(z);
                if g.red_end(v).1 != RedEnd::Head {
                    return Err(KernelError::Structure(format!("leaf {z} is not a red head")));
                }
                let mut vec = vec![(cols.leaf(z), sqrt2 / alpha)];
                vec.extend(x_standard(g, v, T::one() / gamma));
                type1.push(vec);
            }
        }
        let mut type2 = Vec::new();
        for c in g.cycles() {
            let t = c.len();
            let beta = g.edge_scale(c.edges[0], weights);
            let mut family = Vec::with_capacity(t);
            for i in 0..t {
                let mut vec = vec![(cols.edge(c.edges[i]), sqrt2 / beta)];
                vec.extend(x_standard(g, c.vertices[i], -T::one() / gamma));
                vec.extend(x_standard(g, c.vertices[(i + 1) % t], T::one() / gamma));
                family.push(vec);
            }
            type2.push(family);
        }
        Ok(Self { type1, type2 })
    }

    pub fn len(&self) -> usize {
        self.type1.len() + self.type2.iter().map(Vec::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All vectors as dense `f64` columns of dimension `dim`.
    pub fn to_dense(&self, dim: usize) -> Vec<DVector<f64>> {
        self.type1
            .iter()
            .chain(self.type2.iter().flatten())
            .map(|v| {
                let mut d = DVector::zeros(dim);
                for &(i, x) in v {
                    d[i] += x.as_f64();
                }
                d
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
struct PairFamily<T> {
    coord: usize,
    x: usize,
    /// Unit vector along the family's kernel vector on `(coord, x)`.
    k: (T, T),
}

#[derive(Debug, Clone)]
struct CycleBlock<T> {
    x: Vec<usize>,
    e: Vec<usize>,
    orth: CycleOrthonormalizer<T>,
}

/// Structured `R_Λ = 2Λ − I`.
#[derive(Debug, Clone)]
pub struct KernelReflector<T> {
    dim: usize,
    pairs: Vec<(usize, usize)>,
    type1: Vec<PairFamily<T>>,
    cycles: Vec<CycleBlock<T>>,
    uncovered: Vec<usize>,
}

impl<T: Real> KernelReflector<T> {
    pub fn new(g: &DecisionGraph, alpha: T, weights: &Weights<T>) -> Result<Self, KernelError> {
        let cols = g.columns();
        let dim = cols.len();
        let sqrt2 = T::lit(2.0).sqrt();
        let gamma = weights.red.sqrt();
        let mut covered = vec![false; dim];
        let mut claim = |i: usize| -> Result<usize, KernelError> {
            if std::mem::replace(&mut covered[i], true) {
                return Err(KernelError::Structure(format!("column {i} claimed twice")));
            }
            Ok(i)
        };
        let unit = |a: T, b: T| {
            let n = (a * a + b * b).sqrt();
            (a / n, b / n)
        };
        let mut type1 = Vec::new();
        let (x, _) = x_slot(g, g.source());
        type1.push(PairFamily {
            coord: claim(cols.root())?,
            x: claim(x)?,
            k: unit(-sqrt2 / alpha, T::one() / gamma),
        });
        for &tag in cols.tags() {
            if let ColumnTag::Leaf(z) = tag {
                let (x, end) = x_slot(g, g.tree_vertex(z));
                if end != RedEnd::Head {
                    return Err(KernelError::Structure(format!("leaf {z} is not a red head")));
                }
                type1.push(PairFamily {
                    coord: claim(cols.leaf(z))?,
                    x: claim(x)?,
                    k: unit(sqrt2 / alpha, T::one() / gamma),
                });
            }
        }
        let mut cycles = Vec::new();
        for c in g.cycles() {
            let beta = g.edge_scale(c.edges[0], weights);
            let x = c
                .vertices
                .iter()
                .map(|&v| claim(x_slot(g, v).0))
                .collect::<Result<Vec<_>, _>>()?;
            let e = c
                .edges
                .iter()
                .map(|&e| claim(cols.edge(e)))
                .collect::<Result<Vec<_>, _>>()?;
            cycles.push(CycleBlock {
                x,
                e,
                orth: CycleOrthonormalizer::new(c.len(), beta, gamma),
            });
        }
        let uncovered: Vec<usize> = (0..dim).filter(|&i| !covered[i]).collect();
        for &i in &uncovered {
            if i < cols.pairs_start() {
                return Err(KernelError::Structure(format!(
                    "column {i} outside the red pairs is in no kernel family"
                )));
            }
        }
        let pairs = g
            .red_edges()
            .iter()
            .map(|&e| (cols.edge(e), cols.pseudo(e)))
            .collect();
        Ok(Self {
            dim,
            pairs,
            type1,
            cycles,
            uncovered,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cycle_count(&self) -> usize {
        self.cycles.len()
    }

    fn check(&self, state: &[C<T>]) -> Result<(), KernelError> {
        if state.len() != self.dim {
            return Err(KernelError::Dimension {
                got: state.len(),
                want: self.dim,
            });
        }
        Ok(())
    }

    /// `(e, ē) ↦ (e⁺, e⁻)` in place on every red pair.
    fn rotate_in(&self, s: &mut [C<T>], ops: &OpCounter) {
        let h = T::one() / T::lit(2.0).sqrt();
        for &(r, p) in &self.pairs {
            let (e, eb) = (s[r], s[p]);
            s[r] = (eb + e) * h;
            s[p] = (eb - e) * h;
        }
        ops.add(6 * self.pairs.len() as u64);
    }

    fn rotate_out(&self, s: &mut [C<T>], ops: &OpCounter) {
        let h = T::one() / T::lit(2.0).sqrt();
        for &(r, p) in &self.pairs {
            let (plus, minus) = (s[r], s[p]);
            s[r] = (plus - minus) * h;
            s[p] = (plus + minus) * h;
        }
        ops.add(6 * self.pairs.len() as u64);
    }

    /// `K (2|0⟩⟨0| − I) K†` on each family's two coordinates, `K` the
    /// rotation whose first column is the normalized kernel vector.
    fn type1_rotated(&self, s: &mut [C<T>], ops: &OpCounter) {
        let two = T::lit(2.0);
        for f in &self.type1 {
            let (a, b) = (s[f.coord], s[f.x]);
            let (k0, k1) = f.k;
            let proj = a * k0 + b * k1;
            s[f.coord] = proj * (two * k0) - a;
            s[f.x] = proj * (two * k1) - b;
        }
        ops.add(10 * self.type1.len() as u64);
    }

    fn cycle_rotated(&self, c: usize, s: &mut [C<T>], ops: &OpCounter) {
        let block = &self.cycles[c];
        let mut x: Vec<C<T>> = block.x.iter().map(|&i| s[i]).collect();
        let mut e: Vec<C<T>> = block.e.iter().map(|&i| s[i]).collect();
        block.orth.reflect(&mut x, &mut e, ops);
        for (&i, v) in block.x.iter().zip(x) {
            s[i] = v;
        }
        for (&i, v) in block.e.iter().zip(e) {
            s[i] = v;
        }
        ops.add(4 * block.x.len() as u64);
    }

    /// Reflection through the root/leaf vectors only (identity elsewhere).
    pub fn type1_reflection(&self, s: &mut [C<T>], ops: &OpCounter) -> Result<(), KernelError> {
        self.check(s)?;
        self.rotate_in(s, ops);
        self.type1_rotated(s, ops);
        self.rotate_out(s, ops);
        Ok(())
    }

    /// Reflection through one cycle's family (identity elsewhere).
    pub fn cycle_reflection(&self, c: usize, s: &mut [C<T>], ops: &OpCounter) -> Result<(), KernelError> {
        self.check(s)?;
        if c >= self.cycles.len() {
            return Err(KernelError::Structure(format!("no cycle {c}")));
        }
        self.rotate_in(s, ops);
        self.cycle_rotated(c, s, ops);
        self.rotate_out(s, ops);
        Ok(())
    }

    /// `R_Λ = 2Λ − I`: root/leaf blocks, then cycles in order, `−1` on
    /// coordinates outside every family.
    pub fn apply(&self, s: &mut [C<T>], ops: &OpCounter) -> Result<(), KernelError> {
        self.check(s)?;
        self.rotate_in(s, ops);
        self.type1_rotated(s, ops);
        for c in 0..self.cycles.len() {
            self.cycle_rotated(c, s, ops);
        }
        for &i in &self.uncovered {
            s[i] = -s[i];
        }
        ops.add(self.uncovered.len() as u64);
        self.rotate_out(s, ops);
        Ok(())
    }
}

#[cfg(test)]
mod tests;
