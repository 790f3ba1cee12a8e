use crate::error::{Error, Result};
use crate::points::PointSet;

/// Midpoint-rule grid on an axis-aligned box `K` in R^d, `d` in {1, 2}.
///
/// Nodes are ordered row-major with the first axis varying slowest. Every
/// node carries the same weight, the product of the axis spacings.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    bounds: Vec<(f64, f64)>,
    counts: Vec<usize>,
    axis_coords: Vec<Vec<f64>>,
    spacing: Vec<f64>,
    weight: f64,
    nodes: PointSet,
}

impl QuadratureGrid {
    pub fn new(bounds: &[(f64, f64)], nodes_per_axis: &[usize]) -> Result<Self> {
        let dim = bounds.len();
        if dim == 0 || dim > 2 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if nodes_per_axis.len() != dim {
            return Err(Error::Parameter(format!(
                "{} node counts given for a {dim}-dimensional box",
                nodes_per_axis.len()
            )));
        }
        for (&(lo, hi), &g) in bounds.iter().zip(nodes_per_axis) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Parameter(format!("invalid axis bounds [{lo}, {hi}]")));
            }
            if g < 2 {
                return Err(Error::Parameter(format!(
                    "need at least 2 nodes per axis, got {g}"
                )));
            }
        }

        let spacing: Vec<f64> = bounds
            .iter()
            .zip(nodes_per_axis)
            .map(|(&(lo, hi), &g)| (hi - lo) / g as f64)
            .collect();
        let axis_coords: Vec<Vec<f64>> = bounds
            .iter()
            .zip(nodes_per_axis)
            .zip(&spacing)
            .map(|((&(lo, _), &g), &h)| (0..g).map(|i| lo + (i as f64 + 0.5) * h).collect())
            .collect();
        let weight = spacing.iter().product();

        let total: usize = nodes_per_axis.iter().product();
        let mut coords = Vec::with_capacity(total * dim);
        match dim {
            1 => coords.extend_from_slice(&axis_coords[0]),
            _ => {
                for &x0 in &axis_coords[0] {
                    for &x1 in &axis_coords[1] {
                        coords.push(x0);
                        coords.push(x1);
                    }
                }
            }
        }

        Ok(Self {
            bounds: bounds.to_vec(),
            counts: nodes_per_axis.to_vec(),
            axis_coords,
            spacing,
            weight,
            nodes: PointSet::new(dim, coords)?,
        })
    }

    /// Box `[-(radius + margin), radius + margin]^d`, which encloses the
    /// closed ball `B(0, radius)` with the given margin on every side.
    pub fn enclosing_ball(dim: usize, radius: f64, margin: f64, nodes_per_axis: &[usize]) -> Result<Self> {
        let r = radius + margin;
        Self::new(&vec![(-r, r); dim], nodes_per_axis)
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn nodes_per_axis(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn axis_coords(&self, axis: usize) -> &[f64] {
        &self.axis_coords[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.spacing[axis]
    }

    /// Weight shared by every node.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn nodes(&self) -> &PointSet {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &[f64] {
        self.nodes.point(i)
    }

    pub fn volume(&self) -> f64 {
        self.bounds.iter().map(|(lo, hi)| hi - lo).product()
    }

    /// Same box with each axis refined by an integer factor.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let counts: Vec<usize> = self.counts.iter().map(|g| g * factor).collect();
        Self::new(&self.bounds, &counts)
    }

    /// Evaluate `f` at every node.
    pub fn tabulate(&self, f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
        self.nodes.iter().map(f).collect()
    }
}
