//! Simple undirected graphs, the edge-list text format, degree sequences and
//! vertex relabeling.
//!
//! Vertices are `0..n`. Edges are stored canonically as `(min, max)` pairs in
//! sorted order, so two graphs compare equal exactly when they have the same
//! vertex count and the same edge set.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("line {line}: {kind}")]
    Parse { line: usize, kind: ParseErrorKind },
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("permutation covers {got} vertices but the graph has {expected}")]
    PermutationSize { expected: usize, got: usize },
    #[error("graphs have {first} and {second} vertices")]
    SizeMismatch { first: usize, second: usize },
    #[error("not a bijection: image {0} is missing or repeated")]
    NotABijection(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("missing `<n> <m>` header")]
    MissingHeader,
    #[error("malformed line: expected two non-negative integers, found {0:?}")]
    Malformed(String),
    #[error("negative count or vertex id {0}")]
    Negative(i64),
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    OutOfRange { vertex: usize, n: usize },
    #[error("header declares {expected} edges but {found} were listed")]
    EdgeCount { expected: usize, found: usize },
}

/// A simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an edge list. Duplicate edges (in either
    /// orientation) collapse to one; self-loops and out-of-range endpoints
    /// are rejected.
    pub fn new<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut canonical = Vec::new();
        for (u, v) in edges {
            for vertex in [u, v] {
                if vertex >= n {
                    return Err(GraphError::VertexOutOfRange { vertex, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            canonical.push((u.min(v), u.max(v)));
        }
        canonical.sort_unstable();
        canonical.dedup();
        Ok(Self::from_canonical(n, canonical))
    }

    fn from_canonical(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Graph {
            n,
            edges,
            adjacency,
        }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_canonical(n, Vec::new())
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        Self::from_canonical(n, edges)
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|v| (v - 1, v))).expect("path edges are valid")
    }

    /// Cycle on `n >= 3` vertices.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a simple cycle needs at least 3 vertices");
        Self::new(n, (0..n).map(|v| (v, (v + 1) % n))).expect("cycle edges are valid")
    }

    /// Star `K{1,leaves}` with the center at vertex 0.
    pub fn star(leaves: usize) -> Self {
        Self::new(leaves + 1, (1..=leaves).map(|v| (0, v))).expect("star edges are valid")
    }

    /// Disjoint union; the vertices of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let offset = self.n;
        let edges = self
            .edges
            .iter()
            .copied()
            .chain(other.edges.iter().map(|&(u, v)| (u + offset, v + offset)))
            .collect();
        Self::from_canonical(self.n + other.n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical `(min, max)` edges in ascending order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn degree_sequence(&self) -> DegreeSequence {
        DegreeSequence::from_degrees((0..self.n).map(|v| self.degree(v)).collect())
    }

    /// Relabels every vertex `v` as `p(v)`.
    pub fn permute(&self, p: &VertexPermutation) -> Result<Graph, GraphError> {
        if p.len() != self.n {
            return Err(GraphError::PermutationSize {
                expected: self.n,
                got: p.len(),
            });
        }
        let mut edges: Vec<_> = self
            .edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (p.apply(u), p.apply(v));
                (a.min(b), a.max(b))
            })
            .collect();
        edges.sort_unstable();
        Ok(Self::from_canonical(self.n, edges))
    }

    /// Dense 0/1 adjacency matrix, row-major.
    pub fn adjacency_matrix(&self) -> Vec<Vec<u8>> {
        let mut matrix = vec![vec![0u8; self.n]; self.n];
        for &(u, v) in &self.edges {
            matrix[u][v] = 1;
            matrix[v][u] = 1;
        }
        matrix
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = stack.pop() {
            for &w in self.neighbors(u) {
                if !seen[w] {
                    seen[w] = true;
                    reached += 1;
                    stack.push(w);
                }
            }
        }
        reached == self.n
    }

    /// Renders the edge-list format accepted by [`parse_graph`].
    pub fn to_edge_list(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.n, self.edges.len())?;
        for (u, v) in &self.edges {
            writeln!(f, "{u} {v}")?;
        }
        Ok(())
    }
}

impl FromStr for Graph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_graph(s)
    }
}

/// Parses the edge-list format: a `<n> <m>` header followed by `m` lines of
/// `<u> <v>`. Blank lines and lines starting with `#` are skipped, CRLF is
/// tolerated, and repeated edges collapse to one.
pub fn parse_graph(text: &str) -> Result<Graph, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, line)| (i + 1, line.trim()))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'));

    let parse_err = |line, kind| GraphError::Parse { line, kind };

    let (header_line, header) = lines.next().ok_or(parse_err(1, ParseErrorKind::MissingHeader))?;
    let (n, m) = parse_pair(header).map_err(|kind| parse_err(header_line, kind))?;

    let mut edges = Vec::with_capacity(m);
    let mut last_line = header_line;
    for (line_no, line) in lines {
        last_line = line_no;
        if edges.len() == m {
            return Err(parse_err(
                line_no,
                ParseErrorKind::EdgeCount {
                    expected: m,
                    found: m + 1,
                },
            ));
        }
        let (u, v) = parse_pair(line).map_err(|kind| parse_err(line_no, kind))?;
        for vertex in [u, v] {
            if vertex >= n {
                return Err(parse_err(line_no, ParseErrorKind::OutOfRange { vertex, n }));
            }
        }
        if u == v {
            return Err(parse_err(line_no, ParseErrorKind::SelfLoop(u)));
        }
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(parse_err(
            last_line,
            ParseErrorKind::EdgeCount {
                expected: m,
                found: edges.len(),
            },
        ));
    }
    Graph::new(n, edges)
}

fn parse_pair(line: &str) -> Result<(usize, usize), ParseErrorKind> {
    let malformed = || ParseErrorKind::Malformed(line.to_string());
    let mut fields = line.split_whitespace();
    let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
        return Err(malformed());
    };
    let parse_one = |field: &str| -> Result<usize, ParseErrorKind> {
        let value: i64 = field.parse().map_err(|_| malformed())?;
        usize::try_from(value).map_err(|_| ParseErrorKind::Negative(value))
    };
    Ok((parse_one(a)?, parse_one(b)?))
}

/// Vertex degrees sorted non-increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DegreeSequence(Vec<usize>);

impl DegreeSequence {
    pub fn from_degrees(mut degrees: Vec<usize>) -> Self {
        degrees.sort_unstable_by(|a, b| b.cmp(a));
        DegreeSequence(degrees)
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> usize {
        self.0.iter().sum()
    }
}

/// A bijection on `0..n`; `apply(v)` is the new label of vertex `v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexPermutation(Vec<usize>);

impl VertexPermutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self, GraphError> {
        let mut seen = vec![false; mapping.len()];
        for &image in &mapping {
            if image >= mapping.len() || seen[image] {
                return Err(GraphError::NotABijection(image));
            }
            seen[image] = true;
        }
        Ok(VertexPermutation(mapping))
    }

    pub fn identity(n: usize) -> Self {
        VertexPermutation((0..n).collect())
    }

    pub fn apply(&self, v: usize) -> usize {
        self.0[v]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let mut inverse = vec![0; self.0.len()];
        for (v, &image) in self.0.iter().enumerate() {
            inverse[image] = v;
        }
        VertexPermutation(inverse)
    }
}
