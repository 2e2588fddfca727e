//! Resource compatibility graph.
//!
//! Vertices are tokens in chronological order (write cycle, then id). An
//! edge `u -> v` records which storage discipline lets `u` and `v` share
//! one element: a register slot used back to back, a queue, or a stack.
//! Pairs admitting none of them get no edge.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schedule::{AccessSchedule, Cycle, DataToken, Interval};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CompatTag {
    Register,
    Fifo,
    Lifo,
    None,
}

impl CompatTag {
    pub fn letter(self) -> &'static str {
        match self {
            CompatTag::Register => "R",
            CompatTag::Fifo => "F",
            CompatTag::Lifo => "L",
            CompatTag::None => "-",
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RcgError {
    #[error("pair ({first}, {second}) is not in chronological order")]
    NotOriented { first: String, second: String },
    #[error("a token cannot be paired with itself ({0})")]
    SamePair(String),
}

/// The timing facts the rules look at.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenTiming {
    pub id: String,
    pub tau_min: Cycle,
    pub tau_first: Cycle,
    pub tau_max: Cycle,
}

impl TokenTiming {
    pub fn of(t: &DataToken) -> Self {
        TokenTiming {
            id: t.id.clone(),
            tau_min: t.tau_min(),
            tau_first: t.tau_first(),
            tau_max: t.tau_max(),
        }
    }

    pub fn lifetime(&self) -> Interval {
        Interval::new(self.tau_min, self.tau_max)
    }

    /// Chronological order key.
    pub fn precedes(&self, other: &TokenTiming) -> bool {
        (self.tau_min, &self.id) < (other.tau_min, &other.id)
    }
}

/// `b` may reuse `a`'s slot: written no earlier than `a`'s last read.
pub fn is_register_compatible(a: &TokenTiming, b: &TokenTiming) -> bool {
    b.tau_min >= a.tau_max
}

/// Partially overlapping lifetimes read in write order.
pub fn is_fifo_compatible(a: &TokenTiming, b: &TokenTiming) -> bool {
    b.tau_min > a.tau_min && b.tau_first > a.tau_max && b.tau_min < a.tau_max
}

/// `b` lives entirely before `a` is first read. Only the nested clause is
/// modelled; re-reads interleaved around `b` are not.
pub fn is_lifo_compatible(a: &TokenTiming, b: &TokenTiming) -> bool {
    b.tau_min > a.tau_min && a.tau_first > b.tau_max
}

/// Tag for a chronologically oriented pair, `a` first.
pub fn classify_timing(a: &TokenTiming, b: &TokenTiming) -> CompatTag {
    if is_register_compatible(a, b) {
        CompatTag::Register
    } else if is_fifo_compatible(a, b) {
        CompatTag::Fifo
    } else if is_lifo_compatible(a, b) {
        CompatTag::Lifo
    } else {
        CompatTag::None
    }
}

pub fn classify_pair(a: &DataToken, b: &DataToken) -> Result<CompatTag, RcgError> {
    let (ta, tb) = (TokenTiming::of(a), TokenTiming::of(b));
    if ta.id == tb.id {
        return Err(RcgError::SamePair(ta.id));
    }
    if !ta.precedes(&tb) {
        return Err(RcgError::NotOriented {
            first: ta.id,
            second: tb.id,
        });
    }
    Ok(classify_timing(&ta, &tb))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub tag: CompatTag,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeCounts {
    pub register: usize,
    pub fifo: usize,
    pub lifo: usize,
}

#[derive(Clone, Debug, Default)]
pub struct CompatibilityGraph {
    vertices: Vec<TokenTiming>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    fifo_in: Vec<Vec<usize>>,
    lifo_in: Vec<Vec<usize>>,
}

impl CompatibilityGraph {
    /// Vertices in chronological order; vertex indices follow this order.
    pub fn vertices(&self) -> &[TokenTiming] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &TokenTiming {
        &self.vertices[v]
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Edges sorted by `(from, to)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Tag between two vertices, oriented by vertex order.
    pub fn tag(&self, u: usize, v: usize) -> CompatTag {
        if u == v {
            return CompatTag::None;
        }
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        classify_timing(&self.vertices[a], &self.vertices[b])
    }

    /// Origins of FIFO-tagged edges into `v`, ascending.
    pub fn fifo_predecessors(&self, v: usize) -> &[usize] {
        &self.fifo_in[v]
    }

    /// Origins of LIFO-tagged edges into `v`, ascending.
    pub fn lifo_predecessors(&self, v: usize) -> &[usize] {
        &self.lifo_in[v]
    }

    pub fn edge_counts(&self) -> EdgeCounts {
        let mut c = EdgeCounts::default();
        for e in &self.edges {
            match e.tag {
                CompatTag::Register => c.register += 1,
                CompatTag::Fifo => c.fifo += 1,
                CompatTag::Lifo => c.lifo += 1,
                CompatTag::None => {}
            }
        }
        c
    }
}

/// Classify every unordered pair and keep the compatible ones.
pub fn build_rcg(s: &AccessSchedule) -> CompatibilityGraph {
    let mut vertices: Vec<TokenTiming> = s.tokens.iter().map(TokenTiming::of).collect();
    vertices.sort_by(|a, b| (a.tau_min, &a.id).cmp(&(b.tau_min, &b.id)));
    let n = vertices.len();
    let index = vertices
        .iter()
        .enumerate()
        .map(|(i, t)| (t.id.clone(), i))
        .collect();
    let mut edges = Vec::new();
    let mut fifo_in = vec![Vec::new(); n];
    let mut lifo_in = vec![Vec::new(); n];
    for u in 0..n {
        for v in u + 1..n {
            let tag = classify_timing(&vertices[u], &vertices[v]);
            match tag {
                CompatTag::None => continue,
                CompatTag::Fifo => fifo_in[v].push(u),
                CompatTag::Lifo => lifo_in[v].push(u),
                CompatTag::Register => {}
            }
            edges.push(Edge {
                from: u,
                to: v,
                tag,
            });
        }
    }
    CompatibilityGraph {
        vertices,
        index,
        edges,
        fifo_in,
        lifo_in,
    }
}

fn dot_id(id: &str) -> String {
    format!("\"{}\"", id.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering; edge labels are the tag letters.
pub fn export_dot(g: &CompatibilityGraph) -> String {
    let mut out = String::from("digraph rcg {\n  rankdir=LR;\n");
    for t in &g.vertices {
        let _ = writeln!(
            out,
            "  {} [label=\"{} [{},{}]\"];",
            dot_id(&t.id),
            t.id.replace('"', "\\\""),
            t.tau_min,
            t.tau_max
        );
    }
    for e in &g.edges {
        let _ = writeln!(
            out,
            "  {} -> {} [label=\"{}\"];",
            dot_id(&g.vertices[e.from].id),
            dot_id(&g.vertices[e.to].id),
            e.tag.letter()
        );
    }
    out.push_str("}\n");
    out
}
