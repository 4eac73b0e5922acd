//! Undirected simple graphs, G(n,p) sampling and exact induced-tree search.
//!
//! A [`Graph`] stores a symmetric bit matrix with one `u64`-word row per
//! vertex. The exact routines in [`search`] additionally require
//! `n <= 64`, so that a whole vertex set fits in one machine word.

mod search;

pub use search::{
    brute_force_census, brute_force_max_induced_tree, count_fortified_trees, count_induced_trees,
    count_maximal_trees, for_each_induced_tree, greedy_induced_tree, max_induced_tree,
    max_induced_tree_with_budget, tree_census, InducedTree, SolveResult, TreeCensus,
    MAX_BRUTE_FORCE_N,
};

use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Graph {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Graph {
        let words = n.div_ceil(64).max(1);
        Graph {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Graph> {
        let mut g = Graph::empty(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Graph {
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.set(u, v);
            }
        }
        g
    }

    /// The cycle `0 - 1 - ... - (n-1) - 0`, for `n >= 3`.
    pub fn cycle(n: usize) -> Graph {
        let mut g = Graph::path(n);
        if n >= 3 {
            g.set(0, n - 1);
        }
        g
    }

    pub fn path(n: usize) -> Graph {
        let mut g = Graph::empty(n);
        for v in 1..n {
            g.set(v - 1, v);
        }
        g
    }

    /// `K_{1,leaves}` with centre 0.
    pub fn star(leaves: usize) -> Graph {
        let mut g = Graph::empty(leaves + 1);
        for v in 1..=leaves {
            g.set(0, v);
        }
        g
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u >= self.n || v >= self.n {
            return domain(format!(
                "edge ({u}, {v}) out of range for {} vertices",
                self.n
            ));
        }
        if u == v {
            return domain(format!("self-loop at {u}"));
        }
        self.set(u, v);
        Ok(())
    }

    fn set(&mut self, u: usize, v: usize) {
        self.bits[u * self.words + v / 64] |= 1 << (v % 64);
        self.bits[v * self.words + u / 64] |= 1 << (u % 64);
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    /// Adjacency row of `v` as bit words.
    pub fn row(&self, v: usize) -> &[u64] {
        &self.bits[v * self.words..(v + 1) * self.words]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            let row = self.row(u);
            (u + 1..self.n)
                .filter(move |&v| row[v / 64] >> (v % 64) & 1 == 1)
                .map(move |v| (u, v))
        })
    }

    /// One `u64` neighbour mask per vertex; requires `n <= 64`.
    pub(crate) fn masks(&self) -> Result<Vec<u64>> {
        if self.n > 64 {
            return Err(Error::TooLarge(self.n));
        }
        Ok((0..self.n).map(|v| self.bits[v * self.words]).collect())
    }

    /// Subgraph induced by `s`, relabelled to `0..s.len()` in increasing order.
    pub fn induced(&self, s: &VertexSet) -> Graph {
        let verts: Vec<usize> = s.iter().collect();
        let mut g = Graph::empty(verts.len());
        for (i, &u) in verts.iter().enumerate() {
            for (j, &v) in verts.iter().enumerate().skip(i + 1) {
                if self.has_edge(u, v) {
                    g.set(i, j);
                }
            }
        }
        g
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

/// The text format: a header `n m`, then `m` lines `u v` with `u < v`,
/// sorted lexicographically.
impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.n, self.edge_count())?;
        for (u, v) in self.edges() {
            writeln!(f, "{u} {v}")?;
        }
        Ok(())
    }
}

impl FromStr for Graph {
    type Err = Error;

    /// Parses the text format. Endpoints may come in either order; an edge
    /// listed twice is an error.
    fn from_str(s: &str) -> Result<Graph> {
        let mut lines = s.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let err = |line: usize, msg: &str| Error::Parse {
            line: line + 1,
            msg: msg.to_string(),
        };
        let (hl, header) = lines.next().ok_or_else(|| err(0, "missing header"))?;
        let nums = parse_pair(header).ok_or_else(|| err(hl, "header must be `n m`"))?;
        let (n, m) = nums;
        let mut g = Graph::empty(n);
        let mut seen = 0usize;
        for (ln, line) in lines {
            let (u, v) = parse_pair(line).ok_or_else(|| err(ln, "edge line must be `u v`"))?;
            if u >= n || v >= n || u == v {
                return Err(err(ln, &format!("invalid edge ({u}, {v})")));
            }
            if g.has_edge(u, v) {
                return Err(err(ln, &format!("edge ({u}, {v}) listed twice")));
            }
            g.set(u, v);
            seen += 1;
        }
        if seen != m {
            return Err(err(
                hl,
                &format!("header announces {m} edges, found {seen}"),
            ));
        }
        Ok(g)
    }
}

fn parse_pair(line: &str) -> Option<(usize, usize)> {
    let mut it = line.split_whitespace();
    let a = it.next()?.parse().ok()?;
    let b = it.next()?.parse().ok()?;
    if it.next().is_some() {
        return None;
    }
    Some((a, b))
}

/// A set of vertices of a graph on `len` vertices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    len: usize,
    words: Vec<u64>,
}

impl VertexSet {
    pub fn new(len: usize) -> VertexSet {
        VertexSet {
            len,
            words: vec![0; len.div_ceil(64).max(1)],
        }
    }

    pub fn from_indices(len: usize, members: impl IntoIterator<Item = usize>) -> Result<VertexSet> {
        let mut s = VertexSet::new(len);
        for v in members {
            if v >= len {
                return domain(format!("vertex {v} out of range for {len} vertices"));
            }
            s.insert(v);
        }
        Ok(s)
    }

    pub(crate) fn from_mask(len: usize, mask: u64) -> VertexSet {
        let mut s = VertexSet::new(len);
        s.words[0] = mask;
        s
    }

    pub fn universe_len(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, v: usize) {
        assert!(v < self.len, "vertex {v} out of range");
        self.words[v / 64] |= 1 << (v % 64);
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.len && self.words[v / 64] >> (v % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + b)
            })
        })
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Samples G(n,p) from a ChaCha8 stream seeded with `seed`.
///
/// Pairs `(u, v)`, `u < v`, are visited in lexicographic order; each draws
/// one `u64` and becomes an edge when the draw is below `floor(p · 2^64)`.
/// `p = 1` skips the draws and returns the complete graph. The same
/// `(n, p, seed)` always reproduces the same graph.
pub fn sample_gnp(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("p must lie in [0, 1], got {p}"));
    }
    if p == 1.0 {
        return Ok(Graph::complete(n));
    }
    let mut g = Graph::empty(n);
    if p == 0.0 {
        return Ok(g);
    }
    let cut = (p * 18_446_744_073_709_551_616.0) as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for u in 0..n {
        for v in u + 1..n {
            if rng.next_u64() < cut {
                g.set(u, v);
            }
        }
    }
    Ok(g)
}

/// True when `s` induces a tree in `g`: exactly `|s| - 1` edges, connected.
pub fn is_induced_tree(g: &Graph, s: &VertexSet) -> Result<bool> {
    if s.is_empty() {
        return domain("is_induced_tree needs a nonempty set");
    }
    if s.universe_len() != g.vertex_count() {
        return domain("vertex set and graph sizes differ");
    }
    let members: Vec<usize> = s.iter().collect();
    let inside = |v: usize| -> usize {
        g.row(v)
            .iter()
            .zip(s.words())
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    };
    let edges: usize = members.iter().map(|&v| inside(v)).sum::<usize>() / 2;
    if edges + 1 != members.len() {
        return Ok(false);
    }
    // connectivity by search restricted to s
    let mut seen = VertexSet::new(g.vertex_count());
    let mut stack = vec![members[0]];
    seen.insert(members[0]);
    let mut reached = 1;
    while let Some(u) = stack.pop() {
        for (i, (&a, &b)) in g.row(u).iter().zip(s.words()).enumerate() {
            let mut w = a & b & !seen.words[i];
            while w != 0 {
                let v = i * 64 + w.trailing_zeros() as usize;
                w &= w - 1;
                seen.insert(v);
                reached += 1;
                stack.push(v);
            }
        }
    }
    Ok(reached == members.len())
}
