use crate::error::{Error, Result};

/// A set of points in R^d stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameter("point dimension must be positive".into()));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::Parameter(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        Ok(Self { dim, coords })
    }

    pub fn zeros(dim: usize, len: usize) -> Self {
        Self {
            dim,
            coords: vec![0.0; dim * len],
        }
    }

    pub fn from_rows(dim: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::Parameter(format!(
                    "point {row:?} does not have dimension {dim}"
                )));
            }
            coords.extend_from_slice(row);
        }
        Self::new(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    /// Subset by row indices, in the given order.
    pub fn select(&self, rows: &[usize]) -> Self {
        let mut coords = Vec::with_capacity(rows.len() * self.dim);
        for &r in rows {
            coords.extend_from_slice(self.point(r));
        }
        Self {
            dim: self.dim,
            coords,
        }
    }

    /// Per-axis (min, max) over the set, or `None` when empty.
    pub fn bounding_box(&self) -> Option<Vec<(f64, f64)>> {
        if self.is_empty() {
            return None;
        }
        let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim];
        for p in self.iter() {
            for (b, &x) in bounds.iter_mut().zip(p) {
                b.0 = b.0.min(x);
                b.1 = b.1.max(x);
            }
        }
        Some(bounds)
    }

    /// Per-axis sample mean and (population) variance.
    pub fn moments(&self) -> Vec<(f64, f64)> {
        let n = self.len() as f64;
        (0..self.dim)
            .map(|j| {
                let mean = self.iter().map(|p| p[j]).sum::<f64>() / n;
                let var = self.iter().map(|p| (p[j] - mean).powi(2)).sum::<f64>() / n;
                (mean, var)
            })
            .collect()
    }
}
