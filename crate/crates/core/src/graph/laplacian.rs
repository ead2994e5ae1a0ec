use super::GraphSnapshot;
use crate::linalg::SymMatrix;
use crate::{Error, Result};

/// Matrix-free `L - I = -D^{-1/2} A D^{-1/2}` for one snapshot.
///
/// Isolated nodes get a zero row and column, so the diagonal is identically
/// zero and the spectrum stays inside `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct ShiftedLaplacian<'g> {
    graph: &'g GraphSnapshot,
    inv_sqrt_degree: Vec<f64>,
}

impl<'g> ShiftedLaplacian<'g> {
    pub fn new(graph: &'g GraphSnapshot) -> Self {
        let inv_sqrt_degree = (0..graph.n())
            .map(|u| match graph.degree(u) {
                0 => 0.0,
                d => 1.0 / (d as f64).sqrt(),
            })
            .collect();
        Self { graph, inv_sqrt_degree }
    }

    pub fn dim(&self) -> usize {
        self.graph.n()
    }

    pub fn graph(&self) -> &GraphSnapshot {
        self.graph
    }

    /// `out = (L - I) x`.
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: x.len(),
            });
        }
        if out.len() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: out.len(),
            });
        }
        self.matvec_unchecked(x, out);
        Ok(())
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.matvec(x, &mut out)?;
        Ok(out)
    }

    #[inline]
    pub(crate) fn matvec_unchecked(&self, x: &[f64], out: &mut [f64]) {
        let s = &self.inv_sqrt_degree;
        for (u, o) in out.iter_mut().enumerate() {
            let acc: f64 = self
                .graph
                .neighbors(u)
                .iter()
                .map(|&v| s[v as usize] * x[v as usize])
                .sum();
            *o = -s[u] * acc;
        }
    }

    /// Dense copy of the operator, for the small-n oracle paths.
    pub fn to_dense(&self) -> SymMatrix {
        let n = self.dim();
        let s = &self.inv_sqrt_degree;
        let mut m = SymMatrix::zeros(n);
        for &(u, v) in self.graph.edges() {
            let (u, v) = (u as usize, v as usize);
            let w = -s[u] * s[v];
            m.set_sym(u, v, w);
        }
        m
    }
}
