//! Simple undirected graphs on a fixed vertex set `0..n`.
//!
//! Adjacency is kept as one sorted neighbor list per vertex, which gives
//! O(deg) iteration, O(log deg) membership and cheap merge-intersection for
//! triangle counting. Graphs are immutable once built.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A simple undirected graph: no self-loops, no multi-edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    size: usize,
}

impl Graph {
    /// Graph on `n` vertices with no edges.
    pub fn empty(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
            size: 0,
        }
    }

    /// Builds a graph from unordered vertex pairs.
    ///
    /// Self-loops are dropped and duplicate or reversed pairs collapse to a
    /// single edge. Any index `>= n` is rejected.
    pub fn from_edge_list(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in pairs {
            if u >= n || v >= n {
                return Err(Error::VertexOutOfRange { u, v, n });
            }
            if u == v {
                continue;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut twice = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            twice += list.len();
        }
        Ok(Self {
            adj,
            size: twice / 2,
        })
    }

    /// Caller guarantees sorted, symmetric, loop-free, duplicate-free lists.
    pub(crate) fn from_sorted_adjacency(adj: Vec<Vec<usize>>) -> Self {
        let size = adj.iter().map(Vec::len).sum::<usize>() / 2;
        Self { adj, size }
    }

    /// Number of vertices.
    pub fn order(&self) -> usize {
        self.adj.len()
    }

    /// Number of edges.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.order() && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            let start = list.partition_point(|&v| v <= u);
            list[start..].iter().map(move |&v| (u, v))
        })
    }

    pub fn to_edge_list(&self) -> Vec<(usize, usize)> {
        self.edges().collect()
    }

    /// Hop distances from `source`; `None` marks an unreachable vertex.
    pub fn bfs_distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.order()];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0) + 1;
            for &w in &self.adj[u] {
                if dist[w].is_none() {
                    dist[w] = Some(d);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// The closed `k`-hop neighborhood `N_k[v]`, sorted ascending.
    pub fn kth_neighborhood(&self, v: usize, k: usize) -> Vec<usize> {
        let mut seen = vec![false; self.order()];
        let mut frontier = vec![v];
        let mut out = vec![v];
        seen[v] = true;
        for _ in 0..k {
            let mut next = Vec::new();
            for &u in &frontier {
                for &w in &self.adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            out.extend_from_slice(&next);
            frontier = next;
        }
        out.sort_unstable();
        out
    }

    /// Number of edges with both endpoints in `set`.
    pub fn induced_edge_count(&self, set: &[usize]) -> usize {
        let mut member = vec![false; self.order()];
        for &v in set {
            member[v] = true;
        }
        let mut twice = 0;
        for (v, _) in member.iter().enumerate().filter(|(_, &m)| m) {
            twice += self.adj[v].iter().filter(|&&w| member[w]).count();
        }
        twice / 2
    }

    /// Connected components as vertex lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.order();
        let mut label = vec![usize::MAX; n];
        let mut out = Vec::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut comp = vec![s];
            label[s] = id;
            let mut i = 0;
            while i < comp.len() {
                let u = comp[i];
                for &w in &self.adj[u] {
                    if label[w] == usize::MAX {
                        label[w] = id;
                        comp.push(w);
                    }
                }
                i += 1;
            }
            out.push(comp);
        }
        out
    }

    /// Same graph with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let pairs: Vec<_> = self.edges().map(|(u, v)| (perm[u], perm[v])).collect();
        Self::from_edge_list(self.order(), &pairs)
    }
}

/// An ordered sequence of graphs on a shared vertex set.
///
/// Time indices are 1-based and dense: the first graph sits at `first_t`
/// (usually 1), the next at `first_t + 1`, and so on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSeries {
    n: usize,
    first_t: usize,
    graphs: Vec<Graph>,
}

impl GraphSeries {
    pub fn new(n: usize, graphs: Vec<Graph>) -> Result<Self> {
        Self::starting_at(n, 1, graphs)
    }

    pub fn starting_at(n: usize, first_t: usize, graphs: Vec<Graph>) -> Result<Self> {
        if first_t == 0 {
            return Err(Error::invalid("time indices start at 1"));
        }
        if let Some(g) = graphs.iter().find(|g| g.order() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: g.order(),
            });
        }
        Ok(Self { n, first_t, graphs })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn first_t(&self) -> usize {
        self.first_t
    }

    pub fn last_t(&self) -> usize {
        self.first_t + self.graphs.len() - 1
    }

    /// Graph at 1-based time `t`.
    pub fn at(&self, t: usize) -> Option<&Graph> {
        t.checked_sub(self.first_t).and_then(|i| self.graphs.get(i))
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    /// `(t, graph)` pairs in time order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Graph)> {
        self.graphs
            .iter()
            .enumerate()
            .map(move |(i, g)| (self.first_t + i, g))
    }
}
