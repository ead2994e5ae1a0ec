use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::MomentVector;
use crate::{Error, Result};

/// Histogram resolution; `Infinite` skips the histogram and passes the
/// moment vector through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BinCount {
    Finite(usize),
    Infinite,
}

impl fmt::Display for BinCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BinCount::Finite(n) => write!(f, "{n}"),
            BinCount::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for BinCount {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(BinCount::Infinite),
            other => other
                .parse()
                .map(BinCount::Finite)
                .map_err(|_| Error::Config(format!("invalid bin count {other:?}"))),
        }
    }
}

impl TryFrom<String> for BinCount {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<BinCount> for String {
    fn from(b: BinCount) -> String {
        b.to_string()
    }
}

/// Binned density of states over `[-1, 1]`, or the raw moments for
/// [`BinCount::Infinite`].
#[derive(Debug, Clone, PartialEq)]
pub struct DosHistogram {
    pub bins: BinCount,
    pub values: Vec<f64>,
    pub jackson: bool,
}

const NODE_GUARD: f64 = 1.0 - 1e-12;

/// Reconstructs the density from its Chebyshev moments at Chebyshev nodes
/// and accumulates node masses into uniform bins.
pub fn dos_histogram(m: &MomentVector, bins: BinCount) -> Result<DosHistogram> {
    let n_bins = match bins {
        BinCount::Infinite => {
            return Ok(DosHistogram {
                bins,
                values: m.values().to_vec(),
                jackson: m.is_damped(),
            })
        }
        BinCount::Finite(b) if b < 2 => return Err(Error::Domain(format!("histogram needs at least 2 bins, got {b}"))),
        BinCount::Finite(b) => b,
    };
    let grid = 1024.max(8 * n_bins);
    let mut masses = vec![0.0; n_bins];
    for i in 0..grid {
        let theta = PI * (i as f64 + 0.5) / grid as f64;
        let x = theta.cos().clamp(-NODE_GUARD, NODE_GUARD);
        // rho(x) * pi * sqrt(1 - x^2) at a node, i.e. its Chebyshev-measure mass.
        let series: f64 = m
            .values()
            .iter()
            .enumerate()
            .map(|(j, mu)| mu * (theta * (j + 1) as f64).cos())
            .sum();
        let mass = (1.0 + 2.0 * series) / grid as f64;
        let bin = (((x + 1.0) / 2.0) * n_bins as f64).floor() as usize;
        masses[bin.min(n_bins - 1)] += mass;
    }
    let total: f64 = masses.iter().sum();
    if total.abs() > f64::EPSILON {
        masses.iter_mut().for_each(|v| *v /= total);
    }
    Ok(DosHistogram {
        bins,
        values: masses,
        jackson: m.is_damped(),
    })
}
