use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {id} out of range 1..={n}")]
    OutOfRange { id: usize, n: usize },
    #[error("invalid graph: {0}")]
    Invalid(String),
}

/// A simple graph given by its adjacency matrix (vertices `0..n`).
///
/// Inputs of the matrix model are bit strings over [`GraphInstance::positions`]:
/// unordered pairs `i < j` for undirected graphs, ordered pairs `i ≠ j` for
/// directed ones.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GraphInstance {
    n: usize,
    directed: bool,
    adj: Vec<bool>,
}

impl GraphInstance {
    pub fn empty(n: usize, directed: bool) -> Self {
        Self {
            n,
            directed,
            adj: vec![false; n * n],
        }
    }

    pub fn from_edges(n: usize, directed: bool, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Self::empty(n, directed);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        for id in [u, v] {
            if id >= self.n {
                return Err(GraphError::OutOfRange { id: id + 1, n: self.n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u + 1));
        }
        self.adj[u * self.n + v] = true;
        if !self.directed {
            self.adj[v * self.n + u] = true;
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Edge `u → v` (or `{u, v}` when undirected).
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.n + v]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in 0..self.n {
                if self.has_edge(u, v) && (self.directed || u < v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Number of input positions of the matrix model.
    pub fn positions(&self) -> usize {
        position_count(self.n, self.directed)
    }

    /// Input position of the matrix entry `(u, v)`.
    pub fn position(&self, u: usize, v: usize) -> usize {
        position(self.n, self.directed, u, v)
    }

    /// The input string `x` of this graph.
    pub fn to_input(&self) -> Vec<usize> {
        let mut x = vec![0; self.positions()];
        for (u, v) in self.edges() {
            x[self.position(u, v)] = 1;
        }
        x
    }

    pub fn from_input(n: usize, directed: bool, x: &[usize]) -> Result<Self, GraphError> {
        if x.len() != position_count(n, directed) {
            return Err(GraphError::Invalid(format!(
                "input of length {} for a graph on {n} vertices",
                x.len()
            )));
        }
        let mut g = Self::empty(n, directed);
        for u in 0..n {
            for v in 0..n {
                if u != v && (directed || u < v) && x[position(n, directed, u, v)] == 1 {
                    g.add_edge(u, v)?;
                }
            }
        }
        Ok(g)
    }

    /// `G(n, p)` with independent edges.
    pub fn random<R: Rng>(rng: &mut R, n: usize, p: f64, directed: bool) -> Self {
        let mut g = Self::empty(n, directed);
        for u in 0..n {
            for v in 0..n {
                if u != v && (directed || u < v) && rng.gen_bool(p) {
                    g.add_edge(u, v).expect("distinct in-range vertices");
                }
            }
        }
        g
    }

    /// [`random`](Self::random) driven by ChaCha8 from `seed`.
    pub fn random_seeded(seed: u64, n: usize, p: f64, directed: bool) -> Result<Self, GraphError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(GraphError::Invalid(format!("edge probability {p} outside [0, 1]")));
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Ok(Self::random(&mut rng, n, p, directed))
    }

    /// Adjacency-matrix text: `n`, then `n` rows of `0`/`1`.
    pub fn parse_matrix(text: &str, directed: bool) -> Result<Self, GraphError> {
        let mut lines = content_lines(text);
        let (line, first) = lines
            .next()
            .ok_or(GraphError::Parse { line: 1, msg: "missing vertex count".into() })?;
        let n = parse_num(first.trim(), line)?;
        let mut raw = Vec::with_capacity(n);
        for (line, row) in lines {
            if raw.len() == n {
                return Err(GraphError::Parse { line, msg: "more than n rows".into() });
            }
            let mut bits: Vec<&str> = row.split_whitespace().collect();
            if bits.len() == 1 && n > 1 {
                bits = bits[0].split("").filter(|s| !s.is_empty()).collect();
            }
            if bits.len() != n {
                return Err(GraphError::Parse {
                    line,
                    msg: format!("row has {} entries, expected {n}", bits.len()),
                });
            }
            let row = bits
                .iter()
                .map(|b| match *b {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(GraphError::Parse {
                        line,
                        msg: format!("entry {other:?} is not 0 or 1"),
                    }),
                })
                .collect::<Result<Vec<_>, _>>()?;
            raw.push(row);
        }
        if raw.len() != n {
            return Err(GraphError::Parse {
                line: 0,
                msg: format!("expected {n} rows, found {}", raw.len()),
            });
        }
        let mut g = Self::empty(n, directed);
        for u in 0..n {
            for v in 0..n {
                if !directed && raw[u][v] != raw[v][u] {
                    return Err(GraphError::Invalid("matrix is not symmetric".into()));
                }
                if raw[u][v] {
                    g.add_edge(u, v)?;
                }
            }
        }
        Ok(g)
    }

    /// Edge-list text: `n m`, then `m` lines `u v` with 1-indexed vertices.
    pub fn parse_edge_list(text: &str, directed: bool) -> Result<Self, GraphError> {
        let mut lines = content_lines(text);
        let (line, first) = lines
            .next()
            .ok_or(GraphError::Parse { line: 1, msg: "missing header".into() })?;
        let head: Vec<&str> = first.split_whitespace().collect();
        if head.len() != 2 {
            return Err(GraphError::Parse { line, msg: "header must be `n m`".into() });
        }
        let n = parse_num(head[0], line)?;
        let m = parse_num(head[1], line)?;
        let mut g = Self::empty(n, directed);
        let mut count = 0;
        for (line, row) in lines {
            let ids: Vec<&str> = row.split_whitespace().collect();
            if ids.len() != 2 {
                return Err(GraphError::Parse { line, msg: "edge line must be `u v`".into() });
            }
            let u = parse_num(ids[0], line)?;
            let v = parse_num(ids[1], line)?;
            for id in [u, v] {
                if id == 0 || id > n {
                    return Err(GraphError::OutOfRange { id, n });
                }
            }
            g.add_edge(u - 1, v - 1)?;
            count += 1;
        }
        if count != m {
            return Err(GraphError::Parse { line: 0, msg: format!("header promises {m} edges, found {count}") });
        }
        Ok(g)
    }

    /// Picks the format from the first line: one number means a matrix.
    pub fn parse(text: &str, directed: bool) -> Result<Self, GraphError> {
        let first = content_lines(text).next().map(|(_, l)| l.split_whitespace().count());
        match first {
            Some(2) => Self::parse_edge_list(text, directed),
            _ => Self::parse_matrix(text, directed),
        }
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_num(s: &str, line: usize) -> Result<usize, GraphError> {
    s.parse().map_err(|_| GraphError::Parse {
        line,
        msg: format!("{s:?} is not a nonnegative integer"),
    })
}

pub(crate) fn position_count(n: usize, directed: bool) -> usize {
    if directed {
        n * n.saturating_sub(1)
    } else {
        n * n.saturating_sub(1) / 2
    }
}

/// Row-major index of `(u, v)` among the off-diagonal (or upper) entries.
pub(crate) fn position(n: usize, directed: bool, u: usize, v: usize) -> usize {
    debug_assert!(u != v && u < n && v < n);
    if directed {
        u * (n - 1) + if v < u { v } else { v - 1 }
    } else {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        a * (2 * n - a - 1) / 2 + (b - a - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_are_a_bijection() {
        for directed in [false, true] {
            for n in 2..6 {
                let mut seen = vec![false; position_count(n, directed)];
                for u in 0..n {
                    for v in 0..n {
                        if u != v && (directed || u < v) {
                            let p = position(n, directed, u, v);
                            assert!(!seen[p]);
                            seen[p] = true;
                        }
                    }
                }
                assert!(seen.iter().all(|&s| s));
            }
        }
    }

    #[test]
    fn parses_both_formats() {
        let m = GraphInstance::parse("3\n0 1 0\n1 0 1\n0 1 0\n", false).unwrap();
        let e = GraphInstance::parse("3 2\n1 2\n2 3\n", false).unwrap();
        assert_eq!(m, e);
        assert_eq!(e.edges(), vec![(0, 1), (1, 2)]);
        let packed = GraphInstance::parse("3\n010\n101\n010\n", false).unwrap();
        assert_eq!(packed, e);
    }

    #[test]
    fn rejects_bad_graphs() {
        assert_eq!(GraphInstance::parse("3 1\n2 2\n", false), Err(GraphError::SelfLoop(2)));
        assert_eq!(
            GraphInstance::parse("3 1\n1 4\n", false),
            Err(GraphError::OutOfRange { id: 4, n: 3 })
        );
        assert!(GraphInstance::parse("2\n1 0\n0 0\n", false).is_err());
        assert!(GraphInstance::parse("2\n0 1\n0 0\n", false).is_err());
        assert!(GraphInstance::parse("2\n0 2\n2 0\n", false).is_err());
        assert!(GraphInstance::parse("3 2\n1 2\n", false).is_err());
        assert!(GraphInstance::parse("x\n", false).is_err());
    }

    #[test]
    fn input_round_trip() {
        let g = GraphInstance::from_edges(4, true, &[(0, 1), (2, 0), (3, 1)]).unwrap();
        assert_eq!(GraphInstance::from_input(4, true, &g.to_input()).unwrap(), g);
    }
}
