use crate::{Error, Result};

/// One timestep of an undirected, unweighted graph stream.
///
/// Edges are stored once as `(u, v)` with `u < v`, sorted; adjacency is kept
/// in CSR form for the Laplacian matvec.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSnapshot {
    t: u64,
    n: usize,
    edges: Vec<(u32, u32)>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

/// What was discarded while normalizing a raw edge list.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildReport {
    pub self_loops: usize,
    pub duplicates: usize,
}

impl GraphSnapshot {
    /// Builds a snapshot, silently dropping self-loops and duplicate edges.
    pub fn new(t: u64, n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::build(t, n, edges).map(|(g, _)| g)
    }

    /// Builds a snapshot and reports how many self-loops and duplicates were
    /// dropped. Endpoints must be `< n`.
    pub fn build(t: u64, n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<(Self, BuildReport)> {
        if n == 0 {
            return Err(Error::Validation(format!("snapshot t={t} has no nodes")));
        }
        if n > u32::MAX as usize {
            return Err(Error::Validation(format!("snapshot t={t}: n={n} is too large")));
        }
        let mut report = BuildReport::default();
        let mut list = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Validation(format!(
                    "snapshot t={t}: edge ({u},{v}) has an endpoint >= n={n}"
                )));
            }
            if u == v {
                report.self_loops += 1;
                continue;
            }
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            list.push((a as u32, b as u32));
        }
        list.sort_unstable();
        let before = list.len();
        list.dedup();
        report.duplicates = before - list.len();
        Ok((Self::from_sorted_unique(t, n, list), report))
    }

    /// `edges` must already be sorted, deduplicated, loop-free, `u < v`.
    pub(crate) fn from_sorted_unique(t: u64, n: usize, edges: Vec<(u32, u32)>) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(u, v) in &edges {
            counts[u as usize + 1] += 1;
            counts[v as usize + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let offsets = counts;
        let mut fill = offsets.clone();
        let mut neighbors = vec![0u32; 2 * edges.len()];
        for &(u, v) in &edges {
            neighbors[fill[u as usize]] = v;
            fill[u as usize] += 1;
            neighbors[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        // Edges are sorted by (u, v), so every neighbor list comes out sorted.
        GraphSnapshot {
            t,
            n,
            edges,
            offsets,
            neighbors,
        }
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|u| self.degree(u)).collect()
    }

    /// Sorted neighbor ids of `u`.
    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.neighbors[self.offsets[u]..self.offsets[u + 1]]
    }

    /// Same graph relabelled with a different timestep.
    pub fn with_t(mut self, t: u64) -> Self {
        self.t = t;
        self
    }
}
