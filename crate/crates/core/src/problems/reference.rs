//! Textbook classical algorithms used as independent oracles.

use std::collections::VecDeque;

use super::graph::GraphInstance;

/// BFS forest with roots in ascending order and neighbours scanned ascending.
pub fn bfs_forest(g: &GraphInstance) -> Vec<(usize, usize)> {
    let n = g.n();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if !seen[v] && g.has_edge(u, v) {
                    seen[v] = true;
                    out.push((u, v));
                    queue.push_back(v);
                }
            }
        }
    }
    out
}

/// Two-coloring by depth-first search.
pub fn is_bipartite(g: &GraphInstance) -> bool {
    let n = g.n();
    let mut color: Vec<Option<bool>> = vec![None; n];
    for s in 0..n {
        if color[s].is_some() {
            continue;
        }
        color[s] = Some(false);
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            let cu = color[u].expect("colored before push");
            for v in 0..n {
                if g.has_edge(u, v) || g.has_edge(v, u) {
                    match color[v] {
                        None => {
                            color[v] = Some(!cu);
                            stack.push(v);
                        }
                        Some(cv) if cv == cu => return false,
                        _ => {}
                    }
                }
            }
        }
    }
    true
}

/// Whether an undirected graph has a cycle (union-find).
pub fn has_cycle(g: &GraphInstance) -> bool {
    let mut parent: Vec<usize> = (0..g.n()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (u, v) in g.edges() {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a == b {
            return true;
        }
        parent[a] = b;
    }
    false
}

/// Greedy matching scanning pairs `(i, j)`, `i < j`, in ascending order.
pub fn greedy_matching(g: &GraphInstance) -> Vec<(usize, usize)> {
    let n = g.n();
    let mut used = vec![false; n];
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if !used[i] && !used[j] && g.has_edge(i, j) {
                used[i] = true;
                used[j] = true;
                out.push((i, j));
            }
        }
    }
    out
}

/// A set of graph edges, pairwise disjoint, that no further edge can extend.
pub fn is_maximal_matching(g: &GraphInstance, m: &[(usize, usize)]) -> bool {
    let mut used = vec![false; g.n()];
    for &(u, v) in m {
        if !g.has_edge(u, v) || used[u] || used[v] {
            return false;
        }
        used[u] = true;
        used[v] = true;
    }
    g.edges().iter().all(|&(u, v)| used[u] || used[v])
}
