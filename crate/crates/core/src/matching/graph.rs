use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::MatchError;
use crate::degrees::{graphical_check, DegreeSample};

/// Balanced bipartite multigraph on `n + n` nodes.
///
/// Both adjacency views are multisets: an edge of multiplicity `m` between
/// plus node `i` and minus node `j` puts `j` in `plus_adj[i]` `m` times and
/// `i` in `minus_adj[j]` `m` times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteMultigraph {
    n: usize,
    plus_adj: Vec<Vec<u32>>,
    minus_adj: Vec<Vec<u32>>,
}

impl BipartiteMultigraph {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            plus_adj: alloc::vec![Vec::new(); n],
            minus_adj: alloc::vec![Vec::new(); n],
        }
    }

    /// Builds a graph from `(plus, minus)` pairs, one entry per edge copy.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, MatchError>
    where
        I: IntoIterator<Item = (u32, u32)>,
    {
        let mut g = Self::empty(n);
        for (i, j) in edges {
            g.add_edge(i, j, 1)?;
        }
        Ok(g)
    }

    /// Adds `multiplicity` copies of the edge `i -- j`.
    pub fn add_edge(&mut self, i: u32, j: u32, multiplicity: u32) -> Result<(), MatchError> {
        for node in [i, j] {
            if node as usize >= self.n {
                return Err(MatchError::NodeOutOfRange { node, n: self.n });
            }
        }
        for _ in 0..multiplicity {
            self.plus_adj[i as usize].push(j);
            self.minus_adj[j as usize].push(i);
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn plus_neighbors(&self, i: usize) -> &[u32] {
        &self.plus_adj[i]
    }

    pub fn minus_neighbors(&self, j: usize) -> &[u32] {
        &self.minus_adj[j]
    }

    /// Number of edges counted with multiplicity.
    pub fn edge_count(&self) -> usize {
        self.plus_adj.iter().map(Vec::len).sum()
    }

    /// Degrees counted with multiplicity.
    pub fn degree_sample(&self) -> DegreeSample {
        DegreeSample {
            plus: self.plus_adj.iter().map(|a| a.len() as u32).collect(),
            minus: self.minus_adj.iter().map(|a| a.len() as u32).collect(),
        }
    }

    /// Sorted `(plus, minus, multiplicity)` triples.
    pub fn edges(&self) -> Vec<(u32, u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count());
        let mut row = Vec::new();
        for (i, adj) in self.plus_adj.iter().enumerate() {
            row.clear();
            row.extend_from_slice(adj);
            row.sort_unstable();
            let mut k = 0;
            while k < row.len() {
                let j = row[k];
                let m = row[k..].iter().take_while(|&&x| x == j).count();
                out.push((i as u32, j, m as u32));
                k += m;
            }
        }
        out
    }

    /// True when no edge has multiplicity above one.
    pub fn is_simple(&self) -> bool {
        let mut seen = alloc::vec![u32::MAX; self.n];
        for (i, adj) in self.plus_adj.iter().enumerate() {
            for &j in adj {
                if seen[j as usize] == i as u32 {
                    return false;
                }
                seen[j as usize] = i as u32;
            }
        }
        true
    }

    /// Distinct neighbours of every node, sorted.
    pub(crate) fn distinct_adjacency(&self) -> (Vec<Vec<u32>>, Vec<Vec<u32>>) {
        let dedup = |adj: &Vec<Vec<u32>>| {
            adj.iter()
                .map(|a| {
                    let mut a = a.clone();
                    a.sort_unstable();
                    a.dedup();
                    a
                })
                .collect()
        };
        (dedup(&self.plus_adj), dedup(&self.minus_adj))
    }
}

/// Draws a bipartite configuration-model multigraph with the given degrees by
/// uniformly pairing all half-edges.
pub fn configuration_model<R: Rng + ?Sized>(
    sample: &DegreeSample,
    rng: &mut R,
) -> Result<BipartiteMultigraph, MatchError> {
    if !graphical_check(sample).multigraph_ok {
        return Err(MatchError::UnbalancedDegrees {
            plus: sample.plus_total(),
            minus: sample.minus_total(),
        });
    }
    let n = sample.n();
    let mut minus_stubs: Vec<u32> = sample
        .minus
        .iter()
        .enumerate()
        .flat_map(|(j, &d)| core::iter::repeat_n(j as u32, d as usize))
        .collect();
    minus_stubs.shuffle(rng);
    let plus_stubs = sample
        .plus
        .iter()
        .enumerate()
        .flat_map(|(i, &d)| core::iter::repeat_n(i as u32, d as usize));
    BipartiteMultigraph::from_edges(n, plus_stubs.zip(minus_stubs))
}
