use super::MomentVector;
use crate::{Error, Result};

/// Moment vectors of a stream, paired with their timesteps.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MomentSeries {
    times: Vec<u64>,
    moments: Vec<MomentVector>,
}

impl MomentSeries {
    pub fn new(times: Vec<u64>, moments: Vec<MomentVector>) -> Result<Self> {
        if times.len() != moments.len() {
            return Err(Error::Dimension {
                expected: times.len(),
                actual: moments.len(),
            });
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("timesteps must be strictly increasing".into()));
        }
        Ok(Self { times, moments })
    }

    /// Series with timesteps `1..=len`.
    pub fn from_moments(moments: Vec<MomentVector>) -> Self {
        let times = (1..=moments.len() as u64).collect();
        Self { times, moments }
    }

    /// Series with timesteps `1..=len` from raw vectors.
    pub fn from_values(values: Vec<Vec<f64>>) -> Self {
        Self::from_moments(values.into_iter().map(MomentVector::from_values).collect())
    }

    pub fn len(&self) -> usize {
        self.moments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moments.is_empty()
    }

    pub fn times(&self) -> &[u64] {
        &self.times
    }

    pub fn moments(&self) -> &[MomentVector] {
        &self.moments
    }

    /// Smallest order across the series (0 when empty).
    pub fn order(&self) -> usize {
        self.moments.iter().map(MomentVector::order).min().unwrap_or(0)
    }

    /// First `len` entries.
    pub fn truncated(&self, len: usize) -> Self {
        let len = len.min(self.len());
        Self {
            times: self.times[..len].to_vec(),
            moments: self.moments[..len].to_vec(),
        }
    }

    pub fn map_moments(&self, f: impl Fn(&MomentVector) -> MomentVector) -> Self {
        Self {
            times: self.times.clone(),
            moments: self.moments.iter().map(f).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &MomentVector)> + '_ {
        self.times.iter().copied().zip(&self.moments)
    }
}
