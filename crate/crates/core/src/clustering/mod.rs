//! Codebooks and minimisers of the (deconvolved) clustering risk.

mod init;
mod lloyd;
mod search;

pub use init::{spread_init, weighted_sample_init};
pub use lloyd::{lloyd_on_points, weighted_lloyd, LloydOptions, LloydReport};
pub use search::{
    excess_risk, multi_start_minimize, multi_start_on_points, naive_kmeans, optimal_codebook,
    pollard_hessian_check, variance_and_excess, OptimalCodebook,
};

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// `k` cluster centers in R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    centers: Vec<Vec<f64>>,
}

impl Codebook {
    pub fn new(centers: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = centers.first() else {
            return Err(Error::Parameter("a codebook needs at least one center".into()));
        };
        let dim = first.len();
        if dim == 0 {
            return Err(Error::Parameter("centers must have positive dimension".into()));
        }
        for c in &centers {
            if c.len() != dim {
                return Err(Error::Parameter(format!(
                    "center {c:?} does not have dimension {dim}"
                )));
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err(Error::Parameter(format!("center {c:?} is not finite")));
            }
        }
        Ok(Self { centers })
    }

    /// Centers given as a flat coordinate list.
    pub fn from_flat(dim: usize, coords: &[f64]) -> Result<Self> {
        if dim == 0 || !coords.len().is_multiple_of(dim) {
            return Err(Error::Parameter(format!(
                "{} coordinates do not split into centers of dimension {dim}",
                coords.len()
            )));
        }
        Self::new(coords.chunks(dim).map(<[f64]>::to_vec).collect())
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn dim(&self) -> usize {
        self.centers[0].len()
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn center(&self, j: usize) -> &[f64] {
        &self.centers[j]
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.centers.concat()
    }

    /// Index of the nearest center and its squared distance; ties go to the
    /// lowest index.
    #[inline]
    pub fn nearest(&self, x: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (j, c) in self.centers.iter().enumerate() {
            let d2: f64 = c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 < best.1 {
                best = (j, d2);
            }
        }
        best
    }

    /// Clustering loss `min_j |x - c_j|^2`.
    #[inline]
    pub fn loss(&self, x: &[f64]) -> f64 {
        self.nearest(x).1
    }

    /// Centers sorted lexicographically.
    pub fn canonical(mut self) -> Self {
        self.centers.sort_by(|a, b| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        });
        self
    }

    /// Largest coordinate difference between two codebooks of equal shape,
    /// compared center by center.
    pub fn max_abs_diff(&self, other: &Codebook) -> f64 {
        self.centers
            .iter()
            .flatten()
            .zip(other.centers.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
