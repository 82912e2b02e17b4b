//! Sparse undirected simple graphs in CSR form, plus SNAP edge-list ingestion.
//!
//! Vertex ids in input files may be sparse or very large. They are compacted to
//! dense ids `0..n` in order of first appearance; the original labels are kept
//! so results can be reported in the caller's id space.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;

use crate::error::{DksError, Result};
use crate::scalar::Scalar;

/// Immutable simple undirected graph.
///
/// Invariants: no self-loops, symmetric adjacency, strictly increasing
/// neighbor lists, and `sum(degrees) == 2m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    row_offsets: Vec<usize>,
    neighbors: Vec<u32>,
    labels: Vec<u64>,
}

impl Graph {
    /// Builds a graph on `n` vertices from an arbitrary edge list.
    ///
    /// Self-loops are dropped, parallel edges merged, and every edge
    /// symmetrized. Labels are the dense ids themselves.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n > u32::MAX as usize {
            return Err(DksError::Domain(format!("{n} vertices exceed the u32 id space")));
        }
        let mut pairs = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(DksError::Domain(format!(
                    "edge ({u}, {v}) references a vertex outside 0..{n}"
                )));
            }
            pairs.push((u as u32, v as u32));
        }
        Ok(Self::build(n, &pairs, (0..n as u64).collect()))
    }

    fn build(n: usize, pairs: &[(u32, u32)], labels: Vec<u64>) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(u, v) in pairs {
            if u != v {
                counts[u as usize + 1] += 1;
                counts[v as usize + 1] += 1;
            }
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut raw = vec![0u32; counts[n]];
        for &(u, v) in pairs {
            if u != v {
                raw[fill[u as usize]] = v;
                fill[u as usize] += 1;
                raw[fill[v as usize]] = u;
                fill[v as usize] += 1;
            }
        }

        // Sort and dedup each row, compacting in place.
        let mut row_offsets = Vec::with_capacity(n + 1);
        row_offsets.push(0);
        let mut write = 0;
        for i in 0..n {
            let row = &mut raw[counts[i]..counts[i + 1]];
            row.sort_unstable();
            let mut last = None;
            for r in counts[i]..counts[i + 1] {
                let v = raw[r];
                if last != Some(v) {
                    raw[write] = v;
                    write += 1;
                    last = Some(v);
                }
            }
            row_offsets.push(write);
        }
        raw.truncate(write);
        raw.shrink_to_fit();

        Graph { row_offsets, neighbors: raw, labels }
    }

    /// Number of vertices.
    #[inline]
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Number of undirected edges.
    #[inline]
    pub fn m(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.row_offsets[v + 1] - self.row_offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n()).map(|v| self.degree(v)).collect()
    }

    /// Sorted neighbor list of `v`.
    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.row_offsets[v]..self.row_offsets[v + 1]]
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Iterates each undirected edge once as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Original label of dense vertex `v`.
    #[inline]
    pub fn label(&self, v: usize) -> u64 {
        self.labels[v]
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    /// Inverse of [`Graph::label`].
    pub fn label_index(&self) -> HashMap<u64, usize> {
        self.labels.iter().enumerate().map(|(i, &l)| (l, i)).collect()
    }

    /// Number of edges with both endpoints in `subset`.
    pub fn induced_edge_count(&self, subset: &[usize]) -> Result<usize> {
        let mut member = vec![false; self.n()];
        for &v in subset {
            if v >= self.n() {
                return Err(DksError::Domain(format!("vertex {v} out of range 0..{}", self.n())));
            }
            if member[v] {
                return Err(DksError::Domain(format!("vertex {v} listed twice")));
            }
            member[v] = true;
        }
        let twice: usize = subset
            .iter()
            .map(|&v| self.neighbors(v).iter().filter(|&&u| member[u as usize]).count())
            .sum();
        Ok(twice / 2)
    }

    /// `2 e(S) / (|S| (|S| - 1))`; equals 1 exactly for a clique.
    pub fn normalized_density(&self, subset: &[usize]) -> Result<f64> {
        let k = subset.len();
        if k < 2 {
            return Err(DksError::Domain(format!(
                "normalized density needs at least 2 vertices, got {k}"
            )));
        }
        let e = self.induced_edge_count(subset)?;
        Ok(2.0 * e as f64 / (k as f64 * (k as f64 - 1.0)))
    }

    /// Dense adjacency matrix (row-major). Only for small graphs.
    pub fn dense_adjacency<T: Scalar>(&self) -> Vec<Vec<T>> {
        let n = self.n();
        let mut a = vec![vec![T::zero(); n]; n];
        for (u, v) in self.edges() {
            a[u][v] = T::one();
            a[v][u] = T::one();
        }
        a
    }

    /// Writes the graph as a SNAP-style edge list using original labels.
    ///
    /// Every vertex is first declared with a self-loop line so that reloading
    /// reproduces the same dense id order and keeps isolated vertices.
    pub fn write_edge_list<W: Write>(&self, out: W) -> Result<()> {
        let mut out = BufWriter::new(out);
        writeln!(out, "# undirected simple graph: {} vertices, {} edges", self.n(), self.m())?;
        for &l in &self.labels {
            writeln!(out, "{l} {l}")?;
        }
        for (u, v) in self.edges() {
            writeln!(out, "{} {}", self.labels[u], self.labels[v])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Loads a whitespace-separated edge list, transparently gunzipping `*.gz`.
///
/// Directed input is symmetrized; undirected input goes through the same
/// path since reciprocal and duplicate edges are merged either way.
pub fn load_edge_list<P: AsRef<Path>>(path: P, directed_input: bool) -> Result<Graph> {
    let path = path.as_ref();
    let file = File::open(path)?;
    let gz = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("gz"));
    if gz {
        parse_edge_list(BufReader::new(MultiGzDecoder::new(file)), directed_input)
    } else {
        parse_edge_list(BufReader::new(file), directed_input)
    }
}

/// Parses edge-list text. Lines starting with `#` are comments.
pub fn parse_edge_list<R: BufRead>(reader: R, _directed_input: bool) -> Result<Graph> {
    let mut ids: HashMap<u64, u32> = HashMap::new();
    let mut labels: Vec<u64> = Vec::new();
    let mut pairs: Vec<(u32, u32)> = Vec::new();

    let mut intern = |label: u64, labels: &mut Vec<u64>| -> Result<u32> {
        if let Some(&id) = ids.get(&label) {
            return Ok(id);
        }
        let id = u32::try_from(labels.len())
            .map_err(|_| DksError::Domain("vertex count exceeds the u32 id space".into()))?;
        ids.insert(label, id);
        labels.push(label);
        Ok(id)
    };

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (a, b) = match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), Some(b), None) => (a, b),
            (Some(_), Some(_), Some(_)) => {
                return Err(DksError::Parse {
                    line: lineno,
                    message: "expected exactly two vertex ids (weighted edges are not supported)"
                        .into(),
                })
            }
            _ => {
                return Err(DksError::Parse {
                    line: lineno,
                    message: "expected two vertex ids".into(),
                })
            }
        };
        let parse = |tok: &str| {
            tok.parse::<u64>().map_err(|_| DksError::Parse {
                line: lineno,
                message: format!("invalid vertex id {tok:?}"),
            })
        };
        let (a, b) = (parse(a)?, parse(b)?);
        let u = intern(a, &mut labels)?;
        let v = intern(b, &mut labels)?;
        pairs.push((u, v));
    }

    if labels.is_empty() {
        return Err(DksError::EmptyGraph);
    }
    Ok(Graph::build(labels.len(), &pairs, labels))
}

/// A graph together with the subgraph size and diagonal loading.
#[derive(Debug, Clone, Copy)]
pub struct ProblemInstance<'g, T> {
    pub graph: &'g Graph,
    pub k: usize,
    pub lambda: T,
}

impl<'g, T: Scalar> ProblemInstance<'g, T> {
    pub fn new(graph: &'g Graph, k: usize, lambda: T) -> Result<Self> {
        if k == 0 || k > graph.n() {
            return Err(DksError::Domain(format!(
                "subgraph size k={k} must satisfy 1 <= k <= n={}",
                graph.n()
            )));
        }
        if !(lambda >= T::zero()) {
            return Err(DksError::Domain(format!("diagonal loading {lambda} must be >= 0")));
        }
        Ok(Self { graph, k, lambda })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.graph.n()
    }
}

/// Small named graphs used throughout the tests and examples.
pub mod fixtures {
    use super::Graph;

    pub fn complete(n: usize) -> Graph {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Graph::from_edges(n, edges).unwrap()
    }

    /// Star with center 0 and `leaves` leaves.
    pub fn star(leaves: usize) -> Graph {
        Graph::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v))).unwrap()
    }

    pub fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|v| (v - 1, v))).unwrap()
    }

    pub fn edgeless(n: usize) -> Graph {
        Graph::from_edges(n, std::iter::empty()).unwrap()
    }

    /// Triangles on `{0,1,2}` and `{3,4,5}`.
    pub fn two_triangles() -> Graph {
        Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap()
    }
}
