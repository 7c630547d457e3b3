//! Dense `f64` linear algebra used by verification paths and exact-spectral
//! phase detection.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Singular values below `RANK_TOL · σ_max` count as zero.
pub const RANK_TOL: f64 = 1e-10;

fn cutoff(sv: &DVector<f64>) -> f64 {
    let max = sv.iter().cloned().fold(0.0, f64::max);
    RANK_TOL * max.max(1.0)
}

pub fn rank(a: &DMatrix<f64>) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = a.singular_values();
    let tol = cutoff(&sv);
    sv.iter().filter(|&&s| s > tol).count()
}

/// Orthonormal basis of the column space of `a` (one basis vector per column).
pub fn column_space_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    if a.ncols() == 0 || a.nrows() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let tol = cutoff(&svd.singular_values);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > tol)
        .collect();
    DMatrix::from_fn(a.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

/// Orthogonal projector onto the row space of `a`.
pub fn row_space_projector(a: &DMatrix<f64>) -> DMatrix<f64> {
    let q = column_space_basis(&a.transpose());
    &q * q.transpose()
}

/// Orthogonal projector onto the null space of `a`.
pub fn null_space_projector(a: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::identity(a.ncols(), a.ncols()) - row_space_projector(a)
}

/// Distance from `t` to the column space spanned by `basis` (orthonormal columns).
pub fn residual_to_span(basis: &DMatrix<f64>, t: &DVector<f64>) -> f64 {
    if basis.ncols() == 0 {
        return t.norm();
    }
    let proj = basis * (basis.transpose() * t);
    (t - proj).norm()
}

/// Largest singular value.
pub fn operator_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Gram–Schmidt orthonormalization of the given vectors (dropping dependent ones).
pub fn orthonormalize(vectors: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = q.dot(&w);
                w -= q * c;
            }
        }
        let n = w.norm();
        if n > 1e-12 * v.norm().max(1.0) {
            out.push(w / n);
        }
    }
    out
}

/// Projector `Σ q qᵀ` for orthonormal vectors of dimension `dim`.
pub fn projector(dim: usize, basis: &[DVector<f64>]) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(dim, dim);
    for q in basis {
        p += q * q.transpose();
    }
    p
}

/// Eigendecomposition of a real symmetric matrix.
pub fn symmetric_eigen(a: DMatrix<f64>) -> SymmetricEigen<f64, nalgebra::Dyn> {
    a.symmetric_eigen()
}
