//! Network data model: vertices with planar positions, undirected edges with
//! lengths and conductivities, plus the connectivity queries the dynamics need.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// An undirected edge stored with its canonical orientation `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub length: f64,
    pub conductivity: f64,
}

impl Edge {
    pub fn new(a: usize, b: usize, length: f64, conductivity: f64) -> Self {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        Edge {
            i,
            j,
            length,
            conductivity,
        }
    }

    /// The endpoint opposite to `v`.
    pub fn other(&self, v: usize) -> usize {
        if v == self.i {
            self.j
        } else {
            self.i
        }
    }
}

/// Undirected graph with at most one edge per vertex pair and no self-loops.
///
/// A `Network` is immutable once built; conductivity updates produce a new
/// value through [`Network::with_conductivities`].
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    positions: Vec<[f64; 2]>,
    edges: Vec<Edge>,
    index: HashMap<(usize, usize), usize>,
    // neighbor list per vertex: (neighbor, edge index)
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl Network {
    /// Validates and builds a network. Edge endpoints are vertex indices into
    /// `positions`; the endpoint order of each edge is irrelevant.
    pub fn new(positions: Vec<[f64; 2]>, edges: Vec<Edge>) -> Result<Self> {
        let n = positions.len();
        let mut index = HashMap::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); n];
        let mut canon = Vec::with_capacity(edges.len());
        for e in edges {
            let e = Edge::new(e.i, e.j, e.length, e.conductivity);
            if e.i == e.j {
                return Err(Error::SelfLoop(e.i));
            }
            if e.j >= n {
                return Err(Error::UnknownVertex { i: e.i, j: e.j, n });
            }
            if !(e.length > 0.0) || !e.length.is_finite() {
                return Err(Error::NonPositiveLength {
                    i: e.i,
                    j: e.j,
                    length: e.length,
                });
            }
            if !(e.conductivity >= 0.0) || !e.conductivity.is_finite() {
                return Err(Error::NegativeConductivity {
                    i: e.i,
                    j: e.j,
                    conductivity: e.conductivity,
                });
            }
            let k = canon.len();
            if index.insert((e.i, e.j), k).is_some() {
                return Err(Error::DuplicateEdge { i: e.i, j: e.j });
            }
            adjacency[e.i].push((e.j, k));
            adjacency[e.j].push((e.i, k));
            canon.push(e);
        }
        Ok(Network {
            positions,
            edges: canon,
            index,
            adjacency,
        })
    }

    /// Builds a network from `(i, j, length, conductivity)` tuples.
    pub fn from_tuples(
        positions: Vec<[f64; 2]>,
        edges: &[(usize, usize, f64, f64)],
    ) -> Result<Self> {
        Self::new(
            positions,
            edges
                .iter()
                .map(|&(i, j, l, c)| Edge::new(i, j, l, c))
                .collect(),
        )
    }

    /// Builds a network whose edge lengths are the Euclidean distances
    /// between the endpoint positions.
    pub fn from_positions(
        positions: Vec<[f64; 2]>,
        pairs: &[(usize, usize)],
        conductivity: f64,
    ) -> Result<Self> {
        let n = positions.len();
        let mut edges = Vec::with_capacity(pairs.len());
        for &(i, j) in pairs {
            if i >= n || j >= n {
                return Err(Error::UnknownVertex { i, j, n });
            }
            let (a, b) = (positions[i], positions[j]);
            let l = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            edges.push(Edge::new(i, j, l, conductivity));
        }
        Self::new(positions, edges)
    }

    pub fn n_vertices(&self) -> usize {
        self.positions.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, k: usize) -> &Edge {
        &self.edges[k]
    }

    /// Index of the edge joining `a` and `b`, in either order.
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.index.get(&key).copied()
    }

    /// Neighbors of `v` as `(neighbor, edge index)` pairs.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn conductivities(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.conductivity).collect()
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.length).collect()
    }

    /// Returns a copy of this network carrying new conductivities.
    pub fn with_conductivities(&self, values: &[f64]) -> Result<Self> {
        if values.len() != self.edges.len() {
            return Err(Error::DimensionMismatch {
                expected: self.edges.len(),
                got: values.len(),
            });
        }
        let mut out = self.clone();
        for (e, &c) in out.edges.iter_mut().zip(values) {
            if !(c >= 0.0) || !c.is_finite() {
                return Err(Error::NegativeConductivity {
                    i: e.i,
                    j: e.j,
                    conductivity: c,
                });
            }
            e.conductivity = c;
        }
        Ok(out)
    }

    /// Dense 0/1 adjacency matrix, row-major.
    pub fn adjacency_matrix(&self) -> Vec<Vec<u8>> {
        let n = self.n_vertices();
        let mut a = vec![vec![0u8; n]; n];
        for e in &self.edges {
            a[e.i][e.j] = 1;
            a[e.j][e.i] = 1;
        }
        a
    }

    /// Indices of edges whose conductivity is strictly above `threshold`.
    pub fn active_edges(&self, threshold: f64) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&k| self.edges[k].conductivity > threshold)
            .collect()
    }

    /// Serializes to the two-table text format read by [`Network::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::from("id,x,y\n");
        for (k, p) in self.positions.iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", k, p[0], p[1]);
        }
        s.push_str("\ni,j,L,C\n");
        for e in &self.edges {
            let _ = writeln!(s, "{},{},{},{}", e.i, e.j, e.length, e.conductivity);
        }
        s
    }

    /// Parses a vertex table `id,x,y` followed by an edge table `i,j,L,C`.
    /// Each table begins with its one-line header; vertex ids must be
    /// exactly `0..n` in some order.
    pub fn parse(text: &str) -> Result<Self> {
        #[derive(PartialEq)]
        enum Section {
            Start,
            Vertices,
            Edges,
        }
        let mut section = Section::Start;
        let mut verts: Vec<(usize, [f64; 2])> = Vec::new();
        let mut edges = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = ln + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols == ["id", "x", "y"] {
                section = Section::Vertices;
                continue;
            }
            if cols == ["i", "j", "L", "C"] {
                section = Section::Edges;
                continue;
            }
            let perr = |m: &str| Error::Parse {
                line: lineno,
                message: m.to_string(),
            };
            match section {
                Section::Start => return Err(perr("expected header `id,x,y`")),
                Section::Vertices => {
                    if cols.len() != 3 {
                        return Err(perr("vertex row needs 3 columns"));
                    }
                    let id = cols[0].parse().map_err(|_| perr("bad vertex id"))?;
                    let x = cols[1].parse().map_err(|_| perr("bad x"))?;
                    let y = cols[2].parse().map_err(|_| perr("bad y"))?;
                    verts.push((id, [x, y]));
                }
                Section::Edges => {
                    if cols.len() != 4 {
                        return Err(perr("edge row needs 4 columns"));
                    }
                    let i = cols[0].parse().map_err(|_| perr("bad i"))?;
                    let j = cols[1].parse().map_err(|_| perr("bad j"))?;
                    let l = cols[2].parse().map_err(|_| perr("bad L"))?;
                    let c = cols[3].parse().map_err(|_| perr("bad C"))?;
                    edges.push(Edge::new(i, j, l, c));
                }
            }
        }
        let n = verts.len();
        let mut positions = vec![None; n];
        for (id, p) in verts {
            if id >= n || positions[id].is_some() {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("vertex ids must be 0..{n} without repeats (saw {id})"),
                });
            }
            positions[id] = Some(p);
        }
        Network::new(positions.into_iter().map(Option::unwrap).collect(), edges)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Per-vertex sources (positive) and sinks (negative) with zero net mass.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceVector {
    values: Vec<f64>,
}

impl SourceVector {
    /// Absolute balance tolerance, scaled by `max(1, Σ|S_i|)`.
    pub const BALANCE_TOL: f64 = 1e-12;

    /// Wraps `values`, rejecting them if they do not sum to zero.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let sum: f64 = values.iter().sum();
        let scale = values.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sources"));
        }
        if sum.abs() > Self::BALANCE_TOL * scale {
            return Err(Error::IncompatibleSources { sum });
        }
        Ok(SourceVector { values })
    }

    /// Skips the balance check, for exercising the solver's own guard.
    #[cfg(test)]
    pub(crate) fn unchecked(values: Vec<f64>) -> Self {
        SourceVector { values }
    }

    /// Subtracts the mean so that the result is balanced.
    pub fn balanced(mut values: Vec<f64>) -> Self {
        let n = values.len().max(1) as f64;
        let mean = values.iter().sum::<f64>() / n;
        for v in &mut values {
            *v -= mean;
        }
        SourceVector { values }
    }

    pub fn zeros(n: usize) -> Self {
        SourceVector {
            values: vec![0.0; n],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Vertices with nonzero source or sink.
    pub fn support(&self) -> Vec<usize> {
        (0..self.values.len())
            .filter(|&i| self.values[i] != 0.0)
            .collect()
    }
}

/// A bipartition of the vertex set into `first` and `second`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutPartition {
    membership: Vec<bool>,
}

impl CutPartition {
    /// Partition with `first` on one side and every other vertex on the other.
    pub fn from_first(n: usize, first: &[usize]) -> Result<Self> {
        let mut membership = vec![false; n];
        for &v in first {
            if v >= n {
                return Err(Error::InvalidPartition(format!("vertex {v} out of range")));
            }
            if membership[v] {
                return Err(Error::InvalidPartition(format!("vertex {v} listed twice")));
            }
            membership[v] = true;
        }
        Ok(CutPartition { membership })
    }

    /// Partition from two explicit sets, which must be disjoint and cover `0..n`.
    pub fn new(n: usize, first: &[usize], second: &[usize]) -> Result<Self> {
        let p = Self::from_first(n, first)?;
        let mut seen = p.membership.clone();
        for &v in second {
            if v >= n {
                return Err(Error::InvalidPartition(format!("vertex {v} out of range")));
            }
            if seen[v] {
                return Err(Error::InvalidPartition(format!(
                    "vertex {v} appears in both sets or twice"
                )));
            }
            seen[v] = true;
        }
        if let Some(v) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidPartition(format!("vertex {v} not covered")));
        }
        Ok(p)
    }

    pub fn n_vertices(&self) -> usize {
        self.membership.len()
    }

    pub fn in_first(&self, v: usize) -> bool {
        self.membership[v]
    }

    pub fn first(&self) -> Vec<usize> {
        (0..self.membership.len())
            .filter(|&v| self.membership[v])
            .collect()
    }

    pub fn second(&self) -> Vec<usize> {
        (0..self.membership.len())
            .filter(|&v| !self.membership[v])
            .collect()
    }

    /// Edges with exactly one endpoint in each set.
    pub fn cut_edges(&self, network: &Network) -> Vec<usize> {
        network
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| self.membership[e.i] != self.membership[e.j])
            .map(|(k, _)| k)
            .collect()
    }
}

pub(crate) struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Connected components of the subgraph formed by edges with `C > threshold`.
/// Every vertex appears in exactly one component; components are sorted by
/// their smallest vertex.
pub fn active_components(network: &Network, threshold: f64) -> Vec<Vec<usize>> {
    let n = network.n_vertices();
    let mut ds = DisjointSet::new(n);
    for e in network.edges() {
        if e.conductivity > threshold {
            ds.union(e.i, e.j);
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for v in 0..n {
        let r = ds.find(v);
        groups.entry(r).or_default().push(v);
    }
    let mut comps: Vec<Vec<usize>> = groups.into_values().collect();
    comps.sort_by_key(|c| c[0]);
    comps
}

/// Number of independent cycles of the active subgraph; zero iff it is a forest.
pub fn cycle_count(network: &Network, threshold: f64) -> usize {
    let mut ds = DisjointSet::new(network.n_vertices());
    network
        .edges()
        .iter()
        .filter(|e| e.conductivity > threshold)
        .filter(|e| !ds.union(e.i, e.j))
        .count()
}

/// Net source flux `ΔS = Σ_{j ∈ first} S_j` across a partition.
pub fn cut_flux(partition: &CutPartition, sources: &SourceVector) -> Result<f64> {
    if partition.n_vertices() != sources.len() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} vertices, sources have {}",
            partition.n_vertices(),
            sources.len()
        )));
    }
    Ok(partition.first().iter().map(|&v| sources.values()[v]).sum())
}
