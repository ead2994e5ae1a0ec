use serde::{Deserialize, Serialize};

use super::GraphSnapshot;

pub const FEATURE_DIM: usize = 8;

pub const FEATURE_NAMES: [&str; FEATURE_DIM] = [
    "nodes",
    "edges",
    "density",
    "mean_degree",
    "max_degree",
    "degree_std",
    "components",
    "clustering",
];

/// Scalar graph summaries fed to the CUSUM and EWMA baselines, in the order
/// of [`FEATURE_NAMES`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; FEATURE_DIM]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub fn extract_features(g: &GraphSnapshot) -> FeatureVector {
    let n = g.n();
    let m = g.edge_count();
    let degrees = g.degrees();
    let nf = n as f64;

    let density = if n > 1 { 2.0 * m as f64 / (nf * (nf - 1.0)) } else { 0.0 };
    let mean = 2.0 * m as f64 / nf;
    let max = degrees.iter().copied().max().unwrap_or(0) as f64;
    let var = degrees.iter().map(|&d| (d as f64 - mean).powi(2)).sum::<f64>() / nf;

    FeatureVector([
        nf,
        m as f64,
        density,
        mean,
        max,
        var.sqrt(),
        component_count(g) as f64,
        clustering(g, &degrees),
    ])
}

fn component_count(g: &GraphSnapshot) -> usize {
    let mut parent: Vec<usize> = (0..g.n()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut components = g.n();
    for &(u, v) in g.edges() {
        let (a, b) = (find(&mut parent, u as usize), find(&mut parent, v as usize));
        if a != b {
            parent[a] = b;
            components -= 1;
        }
    }
    components
}

/// Global clustering: closed wedges over all wedges, 0 without wedges.
fn clustering(g: &GraphSnapshot, degrees: &[usize]) -> f64 {
    let wedges: usize = degrees.iter().map(|&d| d * d.saturating_sub(1) / 2).sum();
    if wedges == 0 {
        return 0.0;
    }
    // Each triangle u < v < w is counted once, from its edge (u, v).
    let mut triangles = 0usize;
    for &(u, v) in g.edges() {
        let (a, b) = (g.neighbors(u as usize), g.neighbors(v as usize));
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    if a[i] > v {
                        triangles += 1;
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    3.0 * triangles as f64 / wedges as f64
}
