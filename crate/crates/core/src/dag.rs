//! Comparison graphs induced by ranking outcomes.
//!
//! An edge `(i, j)` asserts that candidate `i` beat candidate `j`. A ranking
//! of the `k` best out of `m` candidates yields every pair among the ranked
//! candidates (in rank order) plus every ranked-to-unranked pair. Nothing is
//! known about pairs of unranked candidates, so the graph only depends on
//! `(m, k)` up to relabelling, which gives closed forms for its statistics.

use crate::error::{Error, Result};
use crate::ranking::RankingOutcome;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonDag {
    node_count: usize,
    edges: Vec<(usize, usize)>,
}

impl ComparisonDag {
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Edges as 0-based `(winner, loser)` pairs.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Edges as 1-based `(winner, loser)` pairs.
    pub fn edges_one_based(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|&(i, j)| (i + 1, j + 1)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.node_count];
        for &(_, j) in &self.edges {
            deg[j] += 1;
        }
        deg
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.node_count];
        for &(i, _) in &self.edges {
            deg[i] += 1;
        }
        deg
    }

    /// Kahn's algorithm. Returns `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indeg = self.in_degrees();
        let mut adj = vec![Vec::new(); self.node_count];
        for &(i, j) in &self.edges {
            adj[i].push(j);
        }
        let mut ready: Vec<usize> = (0..self.node_count).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.node_count);
        while let Some(v) = ready.pop() {
            order.push(v);
            for &w in &adj[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    ready.push(w);
                }
            }
        }
        (order.len() == self.node_count).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }
}

/// Builds the comparison graph for a ranking outcome.
///
/// Edge order: ranked pairs `(i_a, i_b)` for `a < b` in rank order, then each
/// ranked candidate against every unranked one in ascending index order.
pub fn build_dag(outcome: &RankingOutcome) -> ComparisonDag {
    let ranked = outcome.ranked();
    let unranked = outcome.unranked();
    let k = ranked.len();
    let mut edges = Vec::with_capacity(k * (k - 1) / 2 + k * unranked.len());
    for (a, &ia) in ranked.iter().enumerate() {
        for &ib in &ranked[a + 1..] {
            edges.push((ia, ib));
        }
    }
    for &ia in ranked {
        for &q in &unranked {
            edges.push((ia, q));
        }
    }
    ComparisonDag {
        node_count: outcome.m(),
        edges,
    }
}

fn check_mk(m: usize, k: usize) -> Result<(u128, u128)> {
    if k < 1 || k > m {
        return Err(Error::InvalidRankParameters { m, k });
    }
    Ok((m as u128, k as u128))
}

/// Number of edges of the graph built from any `(m, k)` outcome:
/// `k*m - (k^2 + k)/2`.
pub fn edge_count(m: usize, k: usize) -> Result<u64> {
    let (m, k) = check_mk(m, k)?;
    Ok((k * m - (k * k + k) / 2) as u64)
}

/// Number of ordered pairs of distinct undirected edges that share a node:
/// `m^2 k + m k^2 - k^3 + k^2 - 4 m k + 2 k`.
///
/// Equivalently `sum_v deg(v) (deg(v) - 1)` over the undirected graph.
pub fn neighbor_pair_count(m: usize, k: usize) -> Result<u64> {
    let (m, k) = check_mk(m, k)?;
    // Group positive and negative terms so the intermediate stays unsigned.
    let pos = m * m * k + m * k * k + k * k + 2 * k;
    let neg = k * k * k + 4 * m * k;
    Ok((pos - neg) as u64)
}
