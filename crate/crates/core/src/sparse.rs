//! Column-oriented sparse real matrices.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Sparse matrix stored as a list of `(row, value)` entries per column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix<T> {
    rows: usize,
    columns: Vec<Vec<(usize, T)>>,
}

impl<T: Real> SparseMatrix<T> {
    pub fn new(rows: usize) -> Self {
        Self {
            rows,
            columns: Vec::new(),
        }
    }

    /// Appends a column; entries with the same row are summed.
    pub fn push_column(&mut self, entries: &[(usize, T)]) -> usize {
        let mut col: Vec<(usize, T)> = Vec::with_capacity(entries.len());
        for &(r, v) in entries {
            assert!(r < self.rows, "row {r} out of range");
            match col.iter_mut().find(|(rr, _)| *rr == r) {
                Some(e) => e.1 += v,
                None => col.push((r, v)),
            }
        }
        col.retain(|(_, v)| *v != T::zero());
        col.sort_by_key(|e| e.0);
        self.columns.push(col);
        self.columns.len() - 1
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, c: usize) -> &[(usize, T)] {
        &self.columns[c]
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.columns[c]
            .iter()
            .find(|e| e.0 == r)
            .map_or(T::zero(), |e| e.1)
    }

    /// Overwrites (or inserts) one entry. Used by the corruption test hook.
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        let col = &mut self.columns[c];
        match col.iter_mut().find(|e| e.0 == r) {
            Some(e) => e.1 = v,
            None => {
                col.push((r, v));
                col.sort_by_key(|e| e.0);
            }
        }
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols());
        let mut y = vec![T::zero(); self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, v) in col {
                y[r] += v * x[c];
            }
        }
        y
    }

    /// `y = Aᵀ x`
    pub fn mul_t_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.rows);
        self.columns
            .iter()
            .map(|col| col.iter().map(|&(r, v)| v * x[r]).sum())
            .collect()
    }

    /// All entries as `(row, col, value)` in column-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, T)> {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |&(r, v)| (r, c, v)))
            .collect()
    }

    /// Triplet text export.
    ///
    /// ```text
    /// % spantree-matrix rows=<r> cols=<c> nnz=<k>
    /// <row> <col> <value>        (0-based indices, one entry per line)
    /// ```
    pub fn to_triplet_text(&self) -> String {
        let mut out = format!(
            "% spantree-matrix rows={} cols={} nnz={}\n",
            self.rows,
            self.cols(),
            self.nnz()
        );
        for (r, c, v) in self.triplets() {
            let _ = writeln!(out, "{r} {c} {:.16e}", v.as_f64());
        }
        out
    }

    pub fn to_dense_f64(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.rows, self.cols());
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v.as_f64();
        }
        m
    }
}

/// Parses the triplet text format written by [`SparseMatrix::to_triplet_text`].
pub fn parse_triplet_text(text: &str) -> Result<SparseMatrix<f64>, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or("empty matrix file")?;
    let field = |key: &str| -> Result<usize, String> {
        header
            .split_whitespace()
            .find_map(|t| t.strip_prefix(key))
            .ok_or_else(|| format!("header missing {key}"))?
            .parse()
            .map_err(|e| format!("bad {key}: {e}"))
    };
    let (rows, cols) = (field("rows=")?, field("cols=")?);
    let mut per_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); cols];
    for line in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(format!("malformed entry line: {line}"));
        }
        let r: usize = parts[0].parse().map_err(|e| format!("{e}"))?;
        let c: usize = parts[1].parse().map_err(|e| format!("{e}"))?;
        let v: f64 = parts[2].parse().map_err(|e| format!("{e}"))?;
        if r >= rows || c >= cols {
            return Err(format!("entry ({r},{c}) out of range"));
        }
        per_col[c].push((r, v));
    }
    let mut m = SparseMatrix::new(rows);
    for col in per_col {
        m.push_column(&col);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_and_transpose() {
        let mut m = SparseMatrix::<f64>::new(2);
        m.push_column(&[(0, 1.0), (1, -1.0)]);
        m.push_column(&[(1, 2.0)]);
        assert_eq!(m.mul_vec(&[1.0, 1.0]), vec![1.0, 1.0]);
        assert_eq!(m.mul_t_vec(&[1.0, 1.0]), vec![0.0, 2.0]);
        assert_eq!(m.nnz(), 3);
    }

    #[test]
    fn triplet_round_trip() {
        let mut m = SparseMatrix::<f64>::new(3);
        m.push_column(&[(0, 0.5), (2, -0.25)]);
        m.push_column(&[(1, 1.0 / 3.0)]);
        let back = parse_triplet_text(&m.to_triplet_text()).unwrap();
        assert_eq!(back, m);
    }
}
