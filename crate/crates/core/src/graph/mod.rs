//! Dissimilarity graphs, random geometric graphs, noise and laterative orderings.

mod domain;
mod noise;
mod ordering;

pub use domain::{sample_domain, DomainSpec};
pub use noise::{apply_noise, edge_perturbations, NoiseModel, NoiseReport, NoiseSpec};
pub(crate) use ordering::greedy_seed_cliques;
pub use ordering::{
    find_laterative_ordering, for_each_clique, frontier_closure, is_laterative_ordering, CliqueStrategy,
    LaterativeOrdering,
};

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{invalid, Error, Result};
use crate::fmt_f64;
use crate::geometry::{sq_dist, Configuration};

/// An undirected edge with its squared dissimilarity, stored with `i < j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub d2: f64,
}

/// Undirected graph on `0..n` with a squared dissimilarity per edge.
#[derive(Clone, Debug, PartialEq)]
pub struct DissimilarityGraph {
    n: usize,
    edges: Vec<Edge>,
    /// `(neighbor, edge index)`, sorted by neighbor.
    adj: Vec<Vec<(usize, usize)>>,
}

impl DissimilarityGraph {
    /// Builds a graph from `(i, j, d²)` triples. Orientation of each pair is
    /// irrelevant; self-loops, repeated pairs and negative or non-finite
    /// dissimilarities are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut list: Vec<Edge> = Vec::new();
        for (a, b, d2) in edges {
            if a >= n || b >= n {
                return invalid(format!("edge ({a},{b}) out of range for n = {n}"));
            }
            if a == b {
                return invalid(format!("self-loop at node {a}"));
            }
            if !d2.is_finite() || d2 < 0.0 {
                return invalid(format!("edge ({a},{b}) has invalid squared dissimilarity {d2}"));
            }
            list.push(Edge {
                i: a.min(b),
                j: a.max(b),
                d2,
            });
        }
        list.sort_by_key(|e| (e.i, e.j));
        if let Some(w) = list.windows(2).find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return invalid(format!("duplicate edge ({},{})", w[0].i, w[0].j));
        }
        let mut adj = vec![Vec::new(); n];
        for (k, e) in list.iter().enumerate() {
            adj[e.i].push((e.j, k));
            adj[e.j].push((e.i, k));
        }
        for nb in &mut adj {
            nb.sort_unstable();
        }
        Ok(Self { n, edges: list, adj })
    }

    /// Complete graph with the exact squared distances of `config`.
    pub fn complete(config: &Configuration) -> Self {
        let n = config.len();
        let edges = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j)));
        Self::new(
            n,
            edges.map(|(i, j)| (i, j, sq_dist(config.point(i), config.point(j)))),
        )
        .expect("exact distances are valid dissimilarities")
    }

    /// Same topology as `self` with exact squared distances taken from `config`.
    pub fn with_distances_of(&self, config: &Configuration) -> Result<Self> {
        if config.len() != self.n {
            return invalid("configuration size does not match the graph");
        }
        let d2 = self
            .edges
            .iter()
            .map(|e| sq_dist(config.point(e.i), config.point(e.j)))
            .collect();
        self.with_d2(d2)
    }

    /// Same topology with replacement squared dissimilarities (in edge order).
    pub fn with_d2(&self, d2: Vec<f64>) -> Result<Self> {
        if d2.len() != self.edges.len() {
            return invalid("one squared dissimilarity per edge is required");
        }
        if d2.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return invalid("squared dissimilarities must be finite and non-negative");
        }
        let mut out = self.clone();
        for (e, v) in out.edges.iter_mut().zip(d2) {
            e.d2 = v;
        }
        Ok(out)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges sorted by `(i, j)` with `i < j`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Neighbors of `v` in increasing order, with the squared dissimilarity of the edge.
    pub fn neighbors(&self, v: usize) -> impl ExactSizeIterator<Item = (usize, f64)> + '_ {
        self.adj[v].iter().map(move |&(u, k)| (u, self.edges[k].d2))
    }

    pub fn neighbor_ids(&self, v: usize) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.adj[v].iter().map(|&(u, _)| u)
    }

    pub fn d2(&self, i: usize, j: usize) -> Option<f64> {
        if i >= self.n {
            return None;
        }
        self.adj[i]
            .binary_search_by_key(&j, |&(u, _)| u)
            .ok()
            .map(|pos| self.edges[self.adj[i][pos].1].d2)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.d2(i, j).is_some()
    }

    /// True if every node can reach every other one.
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for u in self.neighbor_ids(v) {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == self.n
    }

    /// Edge list with a `# n=<n> p=<p>` first line and an `i,j,d2` column header.
    pub fn write_csv<W: Write>(&self, mut writer: W, p: usize) -> Result<()> {
        writeln!(writer, "# n={} p={}", self.n, p)?;
        writeln!(writer, "i,j,d2")?;
        for e in &self.edges {
            writeln!(writer, "{},{},{}", e.i, e.j, fmt_f64(e.d2))?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Reads the format of [`DissimilarityGraph::write_csv`], returning the graph and `p`.
    /// The `i,j,d2` column header line is optional.
    pub fn read_csv<R: Read>(reader: R) -> Result<(Self, usize)> {
        let mut lines = BufReader::new(reader).lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("empty graph file".into()))??;
        let (n, p) = parse_graph_header(&first)?;
        let mut edges = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.replace(' ', "") == "i,j,d2") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return invalid(format!("bad edge line `{line}`"));
            }
            let bad = || Error::InvalidInput(format!("bad edge line `{line}`"));
            let i: usize = fields[0].parse().map_err(|_| bad())?;
            let j: usize = fields[1].parse().map_err(|_| bad())?;
            let d2: f64 = fields[2].parse().map_err(|_| bad())?;
            edges.push((i, j, d2));
        }
        Ok((Self::new(n, edges)?, p))
    }
}

fn parse_graph_header(line: &str) -> Result<(usize, usize)> {
    let body = line
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| Error::InvalidInput("graph file must start with `# n=<n> p=<p>`".into()))?;
    let mut n = None;
    let mut p = None;
    for tok in body.split_whitespace() {
        if let Some(v) = tok.strip_prefix("n=") {
            n = v.parse().ok();
        } else if let Some(v) = tok.strip_prefix("p=") {
            p = v.parse().ok();
        }
    }
    match (n, p) {
        (Some(n), Some(p)) => Ok((n, p)),
        _ => invalid(format!("malformed graph header `{line}`")),
    }
}

/// Random geometric graph: `(i, j)` is an edge iff `||x_i - x_j|| <= radius`.
/// Squared dissimilarities are the exact squared distances.
pub fn geometric_graph(config: &Configuration, radius: f64) -> Result<DissimilarityGraph> {
    if !(radius > 0.0 && radius.is_finite()) {
        return invalid(format!("radius must be positive and finite, got {radius}"));
    }
    let r2 = radius * radius;
    let dim = config.dim();
    // bucket points into cubes of side `radius`; neighbors sit in adjacent cubes
    let cell_of = |pt: &[f64]| -> Vec<i64> { pt.iter().map(|v| (v / radius).floor() as i64).collect() };
    let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, pt) in config.points().enumerate() {
        cells.entry(cell_of(pt)).or_default().push(i);
    }
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(dim as u32))
        .map(|mut code| {
            (0..dim)
                .map(|_| {
                    let o = (code % 3) as i64 - 1;
                    code /= 3;
                    o
                })
                .collect()
        })
        .collect();
    let mut edges = Vec::new();
    for (i, pt) in config.points().enumerate() {
        let base = cell_of(pt);
        for off in &offsets {
            let key: Vec<i64> = base.iter().zip(off).map(|(b, o)| b + o).collect();
            if let Some(bucket) = cells.get(&key) {
                for &j in bucket {
                    if j > i {
                        let d2 = sq_dist(pt, config.point(j));
                        if d2 <= r2 {
                            edges.push((i, j, d2));
                        }
                    }
                }
            }
        }
    }
    DissimilarityGraph::new(config.len(), edges)
}
