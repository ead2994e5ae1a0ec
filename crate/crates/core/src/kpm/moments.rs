use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{exact_spectrum, GraphSnapshot, ShiftedLaplacian};
use crate::rng;
use crate::{Error, Result};

/// Expansion order computed and cached per snapshot.
pub const DEFAULT_ORDER: usize = 50;
/// Hutchinson probes per snapshot.
pub const DEFAULT_PROBES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentSource {
    Exact,
    Estimated {
        probes: usize,
        seed: u64,
    },
    /// Loaded from a cache file or constructed directly.
    External,
}

/// Chebyshev moments `mu_1..mu_K` of one snapshot (`mu_0 = 1` is implicit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    values: Vec<f64>,
    source: MomentSource,
    damped: bool,
}

impl MomentVector {
    pub fn new(values: Vec<f64>, source: MomentSource) -> Self {
        Self {
            values,
            source,
            damped: false,
        }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        Self::new(values, MomentSource::External)
    }

    pub(crate) fn with_damping(mut self, damped: bool) -> Self {
        self.damped = damped;
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn order(&self) -> usize {
        self.values.len()
    }

    pub fn source(&self) -> MomentSource {
        self.source
    }

    /// Whether Jackson damping has been applied.
    pub fn is_damped(&self) -> bool {
        self.damped
    }

    /// `mu_1..mu_k`.
    pub fn prefix(&self, k: usize) -> Result<&[f64]> {
        if k > self.values.len() {
            return Err(Error::Range {
                requested: k,
                available: self.values.len(),
            });
        }
        Ok(&self.values[..k])
    }

    /// Copy truncated to the first `k` moments.
    pub fn truncated(&self, k: usize) -> Result<MomentVector> {
        Ok(Self {
            values: self.prefix(k)?.to_vec(),
            source: self.source,
            damped: self.damped,
        })
    }
}

impl AsRef<[f64]> for MomentVector {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeSharing {
    /// New probes for every snapshot, from the snapshot's own substream.
    #[default]
    Fresh,
    /// One probe set reused for every snapshot of the stream.
    Shared,
}

/// Rademacher probe configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeSet {
    pub count: usize,
    pub seed: u64,
    #[serde(default)]
    pub sharing: ProbeSharing,
}

impl ProbeSet {
    pub fn new(count: usize, seed: u64) -> Self {
        Self {
            count,
            seed,
            sharing: ProbeSharing::Fresh,
        }
    }

    pub fn shared(mut self) -> Self {
        self.sharing = ProbeSharing::Shared;
        self
    }

    fn probe_seed(&self, snapshot_index: u64, probe: u64) -> u64 {
        match self.sharing {
            ProbeSharing::Fresh => rng::derive(self.seed, &[rng::domain::PROBES, 0, snapshot_index, probe]),
            ProbeSharing::Shared => rng::derive(self.seed, &[rng::domain::PROBES, 1, probe]),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Domain("probe count must be >= 1".into()));
        }
        Ok(())
    }
}

fn rademacher(n: usize, seed: u64) -> Vec<f64> {
    let mut gen = rng::generator(seed);
    let mut z = Vec::with_capacity(n);
    while z.len() < n {
        let bits = gen.next_u64();
        let take = (n - z.len()).min(64);
        z.extend((0..take).map(|b| if bits >> b & 1 == 1 { 1.0 } else { -1.0 }));
    }
    z
}

/// `z . T_j(L - I) z` for `j = 0..=order`, by the three-term recurrence.
fn probe_quadratic_forms(op: &ShiftedLaplacian<'_>, z: &[f64], order: usize) -> Vec<f64> {
    let n = z.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut out = Vec::with_capacity(order + 1);
    out.push(dot(z, z));
    if order == 0 {
        return out;
    }
    let mut prev = z.to_vec();
    let mut cur = vec![0.0; n];
    op.matvec_unchecked(z, &mut cur);
    out.push(dot(z, &cur));
    let mut next = vec![0.0; n];
    for _ in 2..=order {
        op.matvec_unchecked(&cur, &mut next);
        for (nx, p) in next.iter_mut().zip(&prev) {
            *nx = 2.0 * *nx - p;
        }
        out.push(dot(z, &next));
        // prev <- cur, cur <- next; the old prev buffer is reused for next.
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    out
}

/// Hutchinson estimate of `mu_1..mu_order` for the snapshot at position
/// `snapshot_index` of its stream.
pub fn estimate_moments(
    g: &GraphSnapshot,
    order: usize,
    probes: &ProbeSet,
    snapshot_index: u64,
) -> Result<MomentVector> {
    if order == 0 {
        return Err(Error::Domain("moment order must be >= 1".into()));
    }
    probes.validate()?;
    let op = ShiftedLaplacian::new(g);
    let n = g.n();
    let per_probe: Vec<Vec<f64>> = (0..probes.count as u64)
        .into_par_iter()
        .map(|r| {
            let z = rademacher(n, probes.probe_seed(snapshot_index, r));
            probe_quadratic_forms(&op, &z, order)
        })
        .collect();
    // Summed in probe order so the result does not depend on scheduling.
    let mut acc = vec![0.0; order];
    for forms in &per_probe {
        for (a, f) in acc.iter_mut().zip(&forms[1..]) {
            *a += f;
        }
    }
    let scale = 1.0 / (n as f64 * probes.count as f64);
    acc.iter_mut().for_each(|a| *a *= scale);
    Ok(MomentVector::new(
        acc,
        MomentSource::Estimated {
            probes: probes.count,
            seed: probes.seed,
        },
    ))
}

/// Estimates every snapshot of a stream; snapshot `i` uses substream `i`.
pub fn estimate_stream(snapshots: &[GraphSnapshot], order: usize, probes: &ProbeSet) -> Result<Vec<MomentVector>> {
    snapshots
        .par_iter()
        .enumerate()
        .map(|(i, g)| estimate_moments(g, order, probes, i as u64))
        .collect()
}

/// `mu_j = (1/n) sum_i T_j(lambda_i)` from the dense spectrum.
///
/// `mu_1` is the normalized trace of `L - I`, whose diagonal is identically
/// zero, so it is returned as exactly 0.
pub fn exact_moments(g: &GraphSnapshot, order: usize, dense_limit: usize) -> Result<MomentVector> {
    if order == 0 {
        return Err(Error::Domain("moment order must be >= 1".into()));
    }
    let spectrum = exact_spectrum(g, dense_limit)?;
    let mut acc = vec![0.0; order];
    for &lambda in &spectrum {
        let x = lambda.clamp(-1.0, 1.0);
        let (mut t_prev, mut t_cur) = (1.0, x);
        acc[0] += t_cur;
        for a in acc.iter_mut().skip(1) {
            let t_next = 2.0 * x * t_cur - t_prev;
            *a += t_next;
            t_prev = t_cur;
            t_cur = t_next;
        }
    }
    let n = spectrum.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    acc[0] = 0.0;
    Ok(MomentVector::new(acc, MomentSource::Exact))
}

pub fn exact_stream(snapshots: &[GraphSnapshot], order: usize, dense_limit: usize) -> Result<Vec<MomentVector>> {
    snapshots
        .par_iter()
        .map(|g| exact_moments(g, order, dense_limit))
        .collect()
}

/// `sum_j |a_j - b_j|` over equal-length slices.
#[inline]
pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// `sqrt(sum_j (a_j - b_j)^2 / j^2)` with `j` starting at 1.
#[inline]
pub fn gamma_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (x, y))| {
            let j = (i + 1) as f64;
            (x - y) * (x - y) / (j * j)
        })
        .sum::<f64>()
        .sqrt()
}

fn prefixes<'a>(a: &'a MomentVector, b: &'a MomentVector, k: usize) -> Result<(&'a [f64], &'a [f64])> {
    if k == 0 {
        return Err(Error::Domain("comparison order must be >= 1".into()));
    }
    Ok((a.prefix(k)?, b.prefix(k)?))
}

/// L1 distance over the first `k` moments.
pub fn moment_distance(a: &MomentVector, b: &MomentVector, k: usize) -> Result<f64> {
    let (a, b) = prefixes(a, b, k)?;
    Ok(l1_distance(a, b))
}

/// `1/j`-weighted L2 discrepancy over the first `k` moments.
pub fn gamma_discrepancy(a: &MomentVector, b: &MomentVector, k: usize) -> Result<f64> {
    let (a, b) = prefixes(a, b, k)?;
    Ok(gamma_distance(a, b))
}
