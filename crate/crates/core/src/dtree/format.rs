//! Line-oriented text interchange format for decision trees.
//!
//! ```text
//! # comments and blank lines are ignored
//! tree n=<arity> l=<alphabet> m=<outputs>
//! <id> Q=<j>                                   internal vertex querying x_j (1-based)
//! <id> LEAF=<label>                            leaf with output label in 0..m
//! <parent> -> <child> label={q1,q2,...} color=<b|r>
//! ```
//!
//! Vertex ids are arbitrary distinct nonnegative integers; they are renumbered
//! densely in ascending order. Symbols in edge labels are 0-based.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Color, DecisionTree, Label, Node, TreeBuilder, TreeError};

fn perr(line: usize, msg: impl Into<String>) -> TreeError {
    TreeError::Parse {
        line,
        msg: msg.into(),
    }
}

fn kv<'a>(tok: &'a str, key: &str, line: usize) -> Result<&'a str, TreeError> {
    tok.strip_prefix(key)
        .ok_or_else(|| perr(line, format!("expected `{key}…`, found `{tok}`")))
}

fn num(s: &str, line: usize) -> Result<usize, TreeError> {
    s.parse()
        .map_err(|_| perr(line, format!("`{s}` is not a nonnegative integer")))
}

enum Decl {
    Internal(usize),
    Leaf(usize),
}

pub fn parse_tree(text: &str) -> Result<DecisionTree, TreeError> {
    let mut header = None;
    let mut decls: BTreeMap<usize, Decl> = BTreeMap::new();
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks[0] == "tree" {
            if header.is_some() {
                return Err(perr(line, "duplicate header"));
            }
            if toks.len() != 4 {
                return Err(perr(line, "header must be `tree n=<n> l=<l> m=<m>`"));
            }
            let n = num(kv(toks[1], "n=", line)?, line)?;
            let l = num(kv(toks[2], "l=", line)?, line)?;
            let m = num(kv(toks[3], "m=", line)?, line)?;
            header = Some((n, l, m));
            continue;
        }
        if header.is_none() {
            return Err(perr(line, "missing `tree` header"));
        }
        if toks.len() >= 2 && toks[1] == "->" {
            if toks.len() != 5 {
                return Err(perr(
                    line,
                    "edge must be `<parent> -> <child> label={..} color=<b|r>`",
                ));
            }
            let p = num(toks[0], line)?;
            let c = num(toks[2], line)?;
            let body = kv(toks[3], "label=", line)?;
            let body = body
                .strip_prefix('{')
                .and_then(|b| b.strip_suffix('}'))
                .ok_or_else(|| perr(line, "label must be written as {q1,q2,...}"))?;
            let symbols = body
                .split(',')
                .map(|s| num(s.trim(), line))
                .collect::<Result<Vec<_>, _>>()?;
            let label = Label::new(symbols).map_err(|e| perr(line, e.to_string()))?;
            let color = match kv(toks[4], "color=", line)? {
                "b" => Color::Black,
                "r" => Color::Red,
                other => return Err(perr(line, format!("unknown color `{other}`"))),
            };
            edges.push((line, p, c, label, color));
            continue;
        }
        if toks.len() != 2 {
            return Err(perr(line, format!("unrecognized line `{content}`")));
        }
        let id = num(toks[0], line)?;
        let decl = if let Some(q) = toks[1].strip_prefix("Q=") {
            let q = num(q, line)?;
            if q == 0 {
                return Err(perr(line, "query indices are 1-based"));
            }
            Decl::Internal(q - 1)
        } else {
            Decl::Leaf(num(kv(toks[1], "LEAF=", line)?, line)?)
        };
        if decls.insert(id, decl).is_some() {
            return Err(perr(line, format!("vertex {id} declared twice")));
        }
    }
    let (n, l, m) = header.ok_or_else(|| perr(0, "missing `tree` header"))?;
    let mut builder = TreeBuilder::new(n, l).outputs(m);
    let mut dense = BTreeMap::new();
    for (id, decl) in &decls {
        let v = match decl {
            Decl::Internal(q) => builder.add_internal(*q),
            Decl::Leaf(o) => builder.add_leaf(*o),
        };
        dense.insert(*id, v);
    }
    for (line, p, c, label, color) in edges {
        let pv = *dense
            .get(&p)
            .ok_or_else(|| perr(line, format!("undeclared vertex {p}")))?;
        let cv = *dense
            .get(&c)
            .ok_or_else(|| perr(line, format!("undeclared vertex {c}")))?;
        builder
            .add_edge(pv, cv, label, color)
            .map_err(|e| perr(line, e.to_string()))?;
    }
    builder.build()
}

pub fn write_tree(tree: &DecisionTree) -> String {
    let mut out = format!(
        "tree n={} l={} m={}\n",
        tree.arity(),
        tree.alphabet(),
        tree.outputs()
    );
    for v in 0..tree.len() {
        let _ = match tree.node(v) {
            Node::Internal { query, .. } => writeln!(out, "{v} Q={}", query + 1),
            Node::Leaf { output } => writeln!(out, "{v} LEAF={output}"),
        };
    }
    for v in 0..tree.len() {
        for e in tree.edges(v) {
            let syms: Vec<String> = e.label.symbols().iter().map(|q| q.to_string()).collect();
            let color = match e.color {
                Color::Black => "b",
                Color::Red => "r",
            };
            let _ = writeln!(
                out,
                "{v} -> {} label={{{}}} color={color}",
                e.child,
                syms.join(",")
            );
        }
    }
    out
}
