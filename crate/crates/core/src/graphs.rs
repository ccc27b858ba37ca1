//! Graphs on the circle `{1..k}` that are consistent with a partition.
//!
//! For each block the vertices of its closed block are joined by a perfect
//! matching of their multiplicity slots; the union over all blocks is a
//! 2-regular multigraph whose cycles carry the trace combinatorics.

use std::collections::BTreeSet;

use crate::error::{check_bound, Result};
use crate::partition::Partition;

/// Largest `k` for exhaustive consistent-graph enumeration.
pub const MAX_GRAPH_K: usize = 8;

/// Undirected edge `(u, v)` with `u <= v`; `u == v` is a self-loop.
pub type Edge = (usize, usize);

/// A consistent graph, stored as one sorted edge list per block of the
/// partition it was built from. Two graphs are equal iff they have the same
/// edges assigned to the same block indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConsistentGraph {
    k: usize,
    block_edges: Vec<Vec<Edge>>,
}

impl ConsistentGraph {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Edges of the subgraph belonging to block `s`.
    pub fn block_edges(&self) -> &[Vec<Edge>] {
        &self.block_edges
    }

    /// All edges with their block index.
    pub fn edges(&self) -> impl Iterator<Item = (Edge, usize)> + '_ {
        self.block_edges
            .iter()
            .enumerate()
            .flat_map(|(s, es)| es.iter().map(move |&e| (e, s)))
    }

    pub fn num_edges(&self) -> usize {
        self.block_edges.iter().map(Vec::len).sum()
    }

    /// Total degree of vertex `l`; a self-loop counts twice.
    pub fn degree(&self, l: usize) -> usize {
        self.edges()
            .map(|((u, v), _)| usize::from(u == l) + usize::from(v == l))
            .sum()
    }

    /// Component label of every vertex (`labels[l - 1]`), via union-find.
    fn component_labels(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.k).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for ((u, v), _) in self.edges() {
            let (a, b) = (find(&mut parent, u - 1), find(&mut parent, v - 1));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        (0..self.k).map(|x| find(&mut parent, x)).collect()
    }

    /// Number of connected components `r(G)`.
    pub fn num_components(&self) -> usize {
        let labels = self.component_labels();
        labels.iter().enumerate().filter(|&(i, &r)| i == r).count()
    }

    /// The partition of `{1..k}` whose blocks are the vertex sets of the components.
    pub fn component_partition(&self) -> Partition {
        Partition::from_labels(&self.component_labels()).expect("k >= 1")
    }
}

/// All perfect matchings of a sorted slot list, deduplicated as edge multisets.
fn matchings(slots: &[usize]) -> BTreeSet<Vec<Edge>> {
    fn rec(remaining: &mut Vec<usize>, current: &mut Vec<Edge>, out: &mut BTreeSet<Vec<Edge>>) {
        if remaining.is_empty() {
            let mut edges = current.clone();
            edges.sort_unstable();
            out.insert(edges);
            return;
        }
        let first = remaining.remove(0);
        let mut tried: Option<usize> = None;
        for j in 0..remaining.len() {
            // equal partners give the same edge
            if tried == Some(remaining[j]) {
                continue;
            }
            tried = Some(remaining[j]);
            let partner = remaining.remove(j);
            current.push((first.min(partner), first.max(partner)));
            rec(remaining, current, out);
            current.pop();
            remaining.insert(j, partner);
        }
        remaining.insert(0, first);
    }
    let mut out = BTreeSet::new();
    rec(&mut slots.to_vec(), &mut Vec::new(), &mut out);
    out
}

/// Every graph consistent with `partition`, in lexicographic order of the
/// per-block edge lists.
pub fn enumerate_consistent_graphs(partition: &Partition) -> Result<Vec<ConsistentGraph>> {
    let k = partition.k();
    check_bound("k", k, 1, MAX_GRAPH_K)?;
    let view = partition.closed_blocks();
    let per_block: Vec<Vec<Vec<Edge>>> = (0..partition.num_blocks())
        .map(|s| matchings(&view.slots(s)).into_iter().collect())
        .collect();

    let mut graphs = Vec::new();
    let mut choice = vec![0usize; per_block.len()];
    loop {
        graphs.push(ConsistentGraph {
            k,
            block_edges: choice
                .iter()
                .zip(&per_block)
                .map(|(&c, options)| options[c].clone())
                .collect(),
        });
        // odometer over the cartesian product, last block fastest
        let mut s = per_block.len();
        loop {
            if s == 0 {
                return Ok(graphs);
            }
            s -= 1;
            choice[s] += 1;
            if choice[s] < per_block[s].len() {
                break;
            }
            choice[s] = 0;
        }
    }
}

/// Consistent graphs with the maximal component count `k − #π + 1`.
pub fn max_component_graphs(partition: &Partition) -> Result<Vec<ConsistentGraph>> {
    let target = partition.k() - partition.num_blocks() + 1;
    Ok(enumerate_consistent_graphs(partition)?
        .into_iter()
        .filter(|g| g.num_components() == target)
        .collect())
}
