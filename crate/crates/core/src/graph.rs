//! Undirected simple graphs stored as sorted adjacency lists plus an edge set.

use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::error::{Error, Result};

/// Undirected simple graph on nodes `0..n`. No self-loops, no parallel edges.
///
/// Edges are kept both as a sorted list (deterministic iteration and
/// serialization) and as a hash set (O(1) membership for edge swaps and
/// matrix assembly). Immutable after construction.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    edge_set: HashSet<(usize, usize)>,
}

fn ordered(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

impl Graph {
    /// Builds a graph from an edge list; duplicates collapse, self-loops error.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i == j || i >= n || j >= n {
                return Err(Error::BadEdge { i, j, n });
            }
            set.insert(ordered(i, j));
        }
        let edges: Vec<(usize, usize)> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j) in &edges {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let edge_set = edges.iter().copied().collect();
        Ok(Self {
            n,
            edges,
            adjacency,
            edge_set,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as sorted `(i, j)` pairs with `i < j`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(|a| a.len()).collect()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edge_set.contains(&ordered(i, j))
    }

    /// True iff a breadth-first traversal from node 0 reaches all nodes.
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n
    }

    /// Connected components, each sorted, largest first (ties by lowest node).
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut comps = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        comps
    }

    /// Edge-list text format: header `n <count>`, then one 1-based `i j` per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for &(i, j) in &self.edges {
            out.push_str(&format!("{} {}\n", i + 1, j + 1));
        }
        out
    }

    pub fn parse_edge_list(s: &str) -> Result<Self> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::ParseGraph("empty input".into()))?;
        let mut parts = header.split_whitespace();
        let (tag, count) = (parts.next(), parts.next());
        if tag != Some("n") {
            return Err(Error::ParseGraph(format!("bad header {header:?}")));
        }
        let n: usize = count
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| Error::ParseGraph(format!("bad node count in {header:?}")))?;
        let mut edges = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace();
            let i: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::ParseGraph(format!("bad edge line {line:?}")))?;
            let j: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::ParseGraph(format!("bad edge line {line:?}")))?;
            if i == 0 || j == 0 {
                return Err(Error::ParseGraph("node ids are 1-based".into()));
            }
            edges.push((i - 1, j - 1));
        }
        Self::from_edges(n, edges)
    }
}

/// Integer target degrees, each in `[1, n-1]`, with an even total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSequence {
    degrees: Vec<usize>,
}

impl DegreeSequence {
    pub fn new(degrees: Vec<usize>) -> Result<Self> {
        let n = degrees.len();
        if n < 2 {
            return Err(Error::TooFewNodes { n, required: 2 });
        }
        for (i, &d) in degrees.iter().enumerate() {
            if d < 1 || d > n - 1 {
                return Err(Error::BadDegreeSequence(format!(
                    "degree {d} at index {i} outside [1, {}]",
                    n - 1
                )));
            }
        }
        if degrees.iter().sum::<usize>() % 2 != 0 {
            return Err(Error::BadDegreeSequence("odd total degree".into()));
        }
        Ok(Self { degrees })
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.degrees
    }
}
