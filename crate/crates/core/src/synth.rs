//! Seeded synthetic graph streams with known change points.
//!
//! Each snapshot is drawn independently from the generator of the segment it
//! falls in, using its own substream of the scenario seed, so a sequence is
//! a pure function of its [`ScenarioSpec`].

use std::collections::HashSet;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::GraphSnapshot;
use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioFamily {
    Er,
    Sbm,
    Ba,
    Ws,
    MultiCp,
    HardEr,
    HardSbm,
}

/// Generator active within one segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum SegmentModel {
    /// Erdős–Rényi with edge probability `p`.
    Er { p: f64 },
    /// Planted partition into `blocks` near-equal blocks.
    Sbm { blocks: usize, p_in: f64, p_out: f64 },
    /// Preferential attachment from a star on `m + 1` nodes, `m` edges per
    /// new node.
    Ba { m: usize },
    /// Ring lattice with `k` neighbors per node, each edge rewired with
    /// probability `p`.
    Ws { k: usize, p: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub family: ScenarioFamily,
    pub n: usize,
    /// Stream length `T`.
    pub length: u64,
    /// First timestep of every segment after the first.
    pub change_points: Vec<u64>,
    pub segments: Vec<SegmentModel>,
    pub seed: u64,
}

/// Snapshots `t = 1..=T` and their ground truth.
#[derive(Debug, Clone)]
pub struct GeneratedStream {
    pub snapshots: Vec<GraphSnapshot>,
    pub change_points: Vec<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GroundTruth {
    change_points: Vec<u64>,
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Validation(format!("{name}={p} is not a probability")))
    }
}

impl SegmentModel {
    fn validate(&self, n: usize) -> Result<()> {
        match *self {
            SegmentModel::Er { p } => check_probability("p", p),
            SegmentModel::Sbm { blocks, p_in, p_out } => {
                if blocks == 0 || blocks > n {
                    return Err(Error::Validation(format!("{blocks} blocks for {n} nodes")));
                }
                check_probability("p_in", p_in)?;
                check_probability("p_out", p_out)
            }
            SegmentModel::Ba { m } => {
                if m == 0 || m >= n {
                    return Err(Error::Validation(format!("BA needs 1 <= m < n, got m={m}, n={n}")));
                }
                Ok(())
            }
            SegmentModel::Ws { k, p } => {
                if k < 2 || k % 2 != 0 || k >= n {
                    return Err(Error::Validation(format!(
                        "WS needs an even k with 2 <= k < n, got k={k}, n={n}"
                    )));
                }
                check_probability("p", p)
            }
        }
    }

    fn sample(&self, n: usize, t: u64, seed: u64) -> GraphSnapshot {
        let mut gen = rng::generator(seed);
        let edges = match *self {
            SegmentModel::Er { p } => erdos_renyi(n, p, &mut gen),
            SegmentModel::Sbm { blocks, p_in, p_out } => planted_partition(n, blocks, p_in, p_out, &mut gen),
            SegmentModel::Ba { m } => preferential_attachment(n, m, &mut gen),
            SegmentModel::Ws { k, p } => small_world(n, k, p, &mut gen),
        };
        GraphSnapshot::new(t, n, edges).expect("generators emit in-range edges")
    }
}

fn erdos_renyi(n: usize, p: f64, gen: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if gen.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// Block of node `u` when `n` nodes are split into `blocks` contiguous
/// blocks whose sizes differ by at most one (larger blocks first).
pub fn block_of(u: usize, n: usize, blocks: usize) -> usize {
    let base = n / blocks;
    let extra = n % blocks;
    let big = extra * (base + 1);
    if u < big {
        u / (base + 1)
    } else {
        extra + (u - big) / base
    }
}

fn planted_partition(n: usize, blocks: usize, p_in: f64, p_out: f64, gen: &mut impl Rng) -> Vec<(usize, usize)> {
    let label: Vec<usize> = (0..n).map(|u| block_of(u, n, blocks)).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if label[u] == label[v] { p_in } else { p_out };
            if gen.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    edges
}

fn preferential_attachment(n: usize, m: usize, gen: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = (1..=m).map(|v| (0, v)).collect();
    // Every endpoint occurrence, so uniform draws are degree-proportional.
    let mut endpoints: Vec<usize> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    let mut chosen = Vec::with_capacity(m);
    for v in m + 1..n {
        chosen.clear();
        while chosen.len() < m {
            let target = endpoints[gen.random_range(0..endpoints.len())];
            if !chosen.contains(&target) {
                chosen.push(target);
            }
        }
        for &target in &chosen {
            edges.push((target, v));
            endpoints.push(target);
            endpoints.push(v);
        }
    }
    edges
}

fn small_world(n: usize, k: usize, p: f64, gen: &mut impl Rng) -> Vec<(usize, usize)> {
    let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
    let mut present: HashSet<(usize, usize)> = HashSet::new();
    let mut degree = vec![0usize; n];
    for u in 0..n {
        for j in 1..=k / 2 {
            present.insert(key(u, (u + j) % n));
            degree[u] += 1;
            degree[(u + j) % n] += 1;
        }
    }
    for j in 1..=k / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            if gen.random::<f64>() >= p || degree[u] >= n - 1 || !present.contains(&key(u, v)) {
                continue;
            }
            let w = loop {
                let w = gen.random_range(0..n);
                if w != u && !present.contains(&key(u, w)) {
                    break w;
                }
            };
            present.remove(&key(u, v));
            degree[v] -= 1;
            present.insert(key(u, w));
            degree[w] += 1;
        }
    }
    let mut edges: Vec<_> = present.into_iter().collect();
    edges.sort_unstable();
    edges
}

impl ScenarioSpec {
    fn single_change(family: ScenarioFamily, n: usize, before: SegmentModel, after: SegmentModel, seed: u64) -> Self {
        Self {
            family,
            n,
            length: 100,
            change_points: vec![50],
            segments: vec![before, after],
            seed,
        }
    }

    /// ER, n=100, p 0.1 -> 0.3 at t=50.
    pub fn er(seed: u64) -> Self {
        Self::single_change(
            ScenarioFamily::Er,
            100,
            SegmentModel::Er { p: 0.1 },
            SegmentModel::Er { p: 0.3 },
            seed,
        )
    }

    /// SBM, n=100, three blocks merge into two at t=50.
    pub fn sbm(seed: u64) -> Self {
        Self::single_change(
            ScenarioFamily::Sbm,
            100,
            SegmentModel::Sbm {
                blocks: 3,
                p_in: 0.3,
                p_out: 0.02,
            },
            SegmentModel::Sbm {
                blocks: 2,
                p_in: 0.3,
                p_out: 0.02,
            },
            seed,
        )
    }

    /// BA, n=100, m 2 -> 5 at t=50.
    pub fn ba(seed: u64) -> Self {
        Self::single_change(
            ScenarioFamily::Ba,
            100,
            SegmentModel::Ba { m: 2 },
            SegmentModel::Ba { m: 5 },
            seed,
        )
    }

    /// WS, n=100, k=4, rewiring 0.1 -> 0.5 at t=50.
    pub fn ws(seed: u64) -> Self {
        Self::single_change(
            ScenarioFamily::Ws,
            100,
            SegmentModel::Ws { k: 4, p: 0.1 },
            SegmentModel::Ws { k: 4, p: 0.5 },
            seed,
        )
    }

    /// n=100, T=150: ER(0.1) -> ER(0.3) at 50 -> two-block SBM at 100.
    pub fn multi_cp(seed: u64) -> Self {
        Self {
            family: ScenarioFamily::MultiCp,
            n: 100,
            length: 150,
            change_points: vec![50, 100],
            segments: vec![
                SegmentModel::Er { p: 0.1 },
                SegmentModel::Er { p: 0.3 },
                SegmentModel::Sbm {
                    blocks: 2,
                    p_in: 0.3,
                    p_out: 0.02,
                },
            ],
            seed,
        }
    }

    /// ER, n=50, p 0.1 -> `p2` at t=50.
    pub fn hard_er(p2: f64, seed: u64) -> Self {
        Self::single_change(
            ScenarioFamily::HardEr,
            50,
            SegmentModel::Er { p: 0.1 },
            SegmentModel::Er { p: p2 },
            seed,
        )
    }

    /// SBM, n=60, p_in=0.3, 3 blocks (20/20/20) -> 2 blocks (30/30) at t=50.
    pub fn hard_sbm(p_out: f64, seed: u64) -> Self {
        Self::single_change(
            ScenarioFamily::HardSbm,
            60,
            SegmentModel::Sbm {
                blocks: 3,
                p_in: 0.3,
                p_out,
            },
            SegmentModel::Sbm {
                blocks: 2,
                p_in: 0.3,
                p_out,
            },
            seed,
        )
    }

    /// Single-segment stream with no change point.
    pub fn stationary(family: ScenarioFamily, n: usize, length: u64, model: SegmentModel, seed: u64) -> Self {
        Self {
            family,
            n,
            length,
            change_points: Vec::new(),
            segments: vec![model],
            seed,
        }
    }

    /// Preset by name: `er`, `sbm`, `ba`, `ws`, `multi_cp`, `hard_er`
    /// (p2 = 0.2), `hard_sbm` (p_out = 0.05).
    pub fn preset(name: &str, seed: u64) -> Result<Self> {
        Ok(match name {
            "er" => Self::er(seed),
            "sbm" => Self::sbm(seed),
            "ba" => Self::ba(seed),
            "ws" => Self::ws(seed),
            "multi_cp" | "multi-cp" | "multi" => Self::multi_cp(seed),
            "hard_er" | "hard-er" => Self::hard_er(0.2, seed),
            "hard_sbm" | "hard-sbm" => Self::hard_sbm(0.05, seed),
            other => {
                return Err(Error::Config(format!(
                    "unknown scenario {other:?} (expected er, sbm, ba, ws, multi_cp, hard_er, hard_sbm)"
                )))
            }
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.length == 0 {
            return Err(Error::Validation("scenario needs n >= 1 and T >= 1".into()));
        }
        if self.segments.len() != self.change_points.len() + 1 {
            return Err(Error::Validation(format!(
                "{} change points need {} segments, got {}",
                self.change_points.len(),
                self.change_points.len() + 1,
                self.segments.len()
            )));
        }
        let mut prev = 1;
        for &cp in &self.change_points {
            if cp <= prev || cp > self.length {
                return Err(Error::Validation(format!(
                    "change points must be strictly increasing within (1, {}]",
                    self.length
                )));
            }
            prev = cp;
        }
        self.segments.iter().try_for_each(|s| s.validate(self.n))
    }

    /// Segment active at timestep `t`.
    pub fn segment_at(&self, t: u64) -> &SegmentModel {
        let idx = self.change_points.iter().take_while(|&&cp| cp <= t).count();
        &self.segments[idx]
    }
}

pub fn generate_sequence(spec: &ScenarioSpec) -> Result<GeneratedStream> {
    use rayon::prelude::*;
    spec.validate()?;
    let snapshots = (1..=spec.length)
        .into_par_iter()
        .map(|t| {
            let seed = rng::derive(spec.seed, &[rng::domain::GRAPHS, t]);
            spec.segment_at(t).sample(spec.n, t, seed)
        })
        .collect();
    Ok(GeneratedStream {
        snapshots,
        change_points: spec.change_points.clone(),
    })
}

/// Sidecar `{"change_points":[...]}`.
pub fn write_ground_truth(path: impl AsRef<Path>, change_points: &[u64]) -> Result<()> {
    let body = serde_json::to_string(&GroundTruth {
        change_points: change_points.to_vec(),
    })?;
    std::fs::write(path, body + "\n")?;
    Ok(())
}

pub fn read_ground_truth(path: impl AsRef<Path>) -> Result<Vec<u64>> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str::<GroundTruth>(&text)?.change_points)
}
