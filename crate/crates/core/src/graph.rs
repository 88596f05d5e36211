//! Sparse symmetric adjacency matrices and Bernoulli sampling from `Ω`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::model::DcmmParams;
use crate::{rng, Error, Result};

/// Undirected simple graph in compressed sparse row form.
///
/// Each unordered edge `{i, j}` is stored in both rows; neighbor lists are
/// sorted and self-loops never appear.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

/// What [`AdjacencyMatrix::from_edges`] dropped.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EdgeSummary {
    pub self_loops: usize,
    pub duplicates: usize,
}

impl AdjacencyMatrix {
    /// Graph on `n` isolated nodes.
    pub fn empty(n: usize) -> Self {
        Self { offsets: vec![0; n + 1], neighbors: Vec::new() }
    }

    /// Build from unordered pairs; self-loops and repeated pairs (in either
    /// orientation) are dropped and counted.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<(Self, EdgeSummary)>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n > u32::MAX as usize {
            return Err(Error::InvalidInput(alloc::format!("n = {n} exceeds u32 node ids")));
        }
        let mut summary = EdgeSummary::default();
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        for (i, j) in edges {
            for index in [i, j] {
                if index >= n {
                    return Err(Error::IndexOutOfRange { index, n });
                }
            }
            if i == j {
                summary.self_loops += 1;
                continue;
            }
            pairs.push((i.min(j) as u32, i.max(j) as u32));
        }
        pairs.sort_unstable();
        let before = pairs.len();
        pairs.dedup();
        summary.duplicates = before - pairs.len();
        Ok((Self::from_sorted_pairs(n, &pairs), summary))
    }

    /// `pairs` must be strictly increasing with `i < j`.
    fn from_sorted_pairs(n: usize, pairs: &[(u32, u32)]) -> Self {
        let mut degree = vec![0usize; n];
        for &(i, j) in pairs {
            degree[i as usize] += 1;
            degree[j as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut neighbors = vec![0u32; offsets[n]];
        // Pairs are sorted by (i, j): row i receives j in increasing order, and
        // row j receives i in increasing order since i ascends across pairs.
        for &(i, j) in pairs {
            neighbors[cursor[i as usize]] = j;
            cursor[i as usize] += 1;
            neighbors[cursor[j as usize]] = i;
            cursor[j as usize] += 1;
        }
        let mut adj = Self { offsets, neighbors };
        for i in 0..n {
            let (lo, hi) = (adj.offsets[i], adj.offsets[i + 1]);
            adj.neighbors[lo..hi].sort_unstable();
        }
        adj
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n()).map(|i| self.degree(i)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// `V = 1′A1 = 2·|E|`.
    pub fn volume(&self) -> usize {
        self.neighbors.len()
    }

    /// `d̄ = V/n`.
    pub fn mean_degree(&self) -> f64 {
        if self.n() == 0 {
            0.0
        } else {
            self.volume() as f64 / self.n() as f64
        }
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.neighbors(i).binary_search(&(j as u32)).is_ok()
    }

    /// Edges `(i, j)` with `i < j` in ascending lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |i| {
            self.neighbors(i).iter().map(|&j| j as usize).filter(move |&j| j > i).map(move |j| (i, j))
        })
    }

    /// Relabel node `i` as `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || core::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidInput("not a permutation of 0..n".into()));
        }
        Ok(Self::from_edges(n, self.edges().map(|(i, j)| (perm[i], perm[j])))?.0)
    }

    /// Dense 0/1 copy, for small graphs and tests.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n(), self.n());
        for (i, j) in self.edges() {
            m[(i, j)] = 1.0;
            m[(j, i)] = 1.0;
        }
        m
    }
}

/// Sample `A` with `P(A_ij = 1) = prob(i, j)` independently over `i < j`.
///
/// The uniform for `{i, j}` depends only on `(seed, min, max)`, so the result
/// does not depend on visiting order, and relabeling nodes together with
/// their probabilities relabels the output.
pub fn sample_adjacency_with<F>(n: usize, seed: u64, prob: F) -> Result<AdjacencyMatrix>
where
    F: Fn(usize, usize) -> f64,
{
    let key = rng::pair_key(seed);
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = prob(i, j);
            if !(0.0..1.0).contains(&p) {
                return Err(Error::InvalidProbability { i, j, value: p });
            }
            if rng::pair_uniform(key, i, j) < p {
                pairs.push((i as u32, j as u32));
            }
        }
    }
    Ok(AdjacencyMatrix::from_sorted_pairs(n, &pairs))
}

/// Sample `A` from a dense symmetric `Ω`; the diagonal is ignored.
pub fn sample_adjacency(omega: &DMatrix<f64>, seed: u64) -> Result<AdjacencyMatrix> {
    if omega.nrows() != omega.ncols() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "Ω must be square, got {}x{}",
            omega.nrows(),
            omega.ncols()
        )));
    }
    sample_adjacency_with(omega.nrows(), seed, |i, j| omega[(i, j)])
}

/// Sample `A` from DCMM parameters without materializing `Ω`.
pub fn sample_from_params(params: &DcmmParams, seed: u64) -> Result<AdjacencyMatrix> {
    let kernel = params.kernel();
    sample_adjacency_with(params.n(), seed, |i, j| kernel.entry(i, j))
}
