//! The deconvolution density estimate and the deconvolved clustering risk.
//!
//! Both routes to the empirical risk are finite sums over the same grid:
//! averaging the deconvolved loss over the sample, or integrating the
//! clustering loss against the density estimate. They agree up to
//! floating-point reassociation.

mod grid;

pub use grid::QuadratureGrid;

use rayon::prelude::*;

use crate::clustering::Codebook;
use crate::error::{Error, Result};
use crate::kernels::DeconvKernelTable;
use crate::points::PointSet;

/// Values of the deconvolution density estimate at the grid nodes. Values
/// may be negative and are never clipped.
#[derive(Debug, Clone, PartialEq)]
pub struct DeconvDensity {
    grid: QuadratureGrid,
    values: Vec<f64>,
    bandwidths: Vec<f64>,
    sample_size: usize,
}

impl DeconvDensity {
    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidths
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    /// Quadrature of the estimate over `K`.
    pub fn total_mass(&self) -> f64 {
        self.grid.weight() * self.values.iter().sum::<f64>()
    }

    /// Smallest value on the grid (often negative).
    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn check_inputs(sample: &PointSet, table: &DeconvKernelTable, grid: &QuadratureGrid) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::Parameter("sample is empty".into()));
    }
    if sample.dim() != grid.dim() || table.dim() != grid.dim() {
        return Err(Error::Parameter(format!(
            "dimension mismatch: sample {}, table {}, grid {}",
            sample.dim(),
            table.dim(),
            grid.dim()
        )));
    }
    for z in sample.iter() {
        check_point(z, table)?;
    }
    Ok(())
}

fn check_point(z: &[f64], table: &DeconvKernelTable) -> Result<()> {
    if table.covers(z) {
        Ok(())
    } else {
        Err(Error::Coverage { point: z.to_vec() })
    }
}

fn coverage(z: &[f64]) -> Error {
    Error::Coverage { point: z.to_vec() }
}

/// `fhat(x) = (1/n) sum_i prod_j table_j(Z_ij - x_j)` at every grid node.
pub fn deconv_density(sample: &PointSet, table: &DeconvKernelTable, grid: &QuadratureGrid) -> Result<DeconvDensity> {
    check_inputs(sample, table, grid)?;
    let n = sample.len();
    let inv_n = 1.0 / n as f64;

    let values = match grid.dim() {
        1 => {
            let axis = table.axis(0);
            grid.axis_coords(0)
                .par_iter()
                .map(|&x| {
                    let mut acc = 0.0;
                    for z in sample.iter() {
                        acc += axis.eval(z[0] - x).ok_or_else(|| coverage(z))?;
                    }
                    Ok(acc * inv_n)
                })
                .collect::<Result<Vec<f64>>>()?
        }
        _ => {
            let xs0 = grid.axis_coords(0);
            let xs1 = grid.axis_coords(1);
            let g1 = xs1.len();
            let (a0, a1) = (table.axis(0), table.axis(1));
            let mut rows1 = vec![0.0; n * g1];
            for (z, row) in sample.iter().zip(rows1.chunks_exact_mut(g1)) {
                for (r, &x1) in row.iter_mut().zip(xs1) {
                    *r = a1.eval(z[1] - x1).ok_or_else(|| coverage(z))?;
                }
            }
            let blocks = xs0
                .par_iter()
                .map(|&x0| {
                    let mut acc = vec![0.0; g1];
                    for (z, row) in sample.iter().zip(rows1.chunks_exact(g1)) {
                        let k0 = a0.eval(z[0] - x0).ok_or_else(|| coverage(z))?;
                        for (a, &r) in acc.iter_mut().zip(row) {
                            *a += k0 * r;
                        }
                    }
                    acc.iter_mut().for_each(|a| *a *= inv_n);
                    Ok(acc)
                })
                .collect::<Result<Vec<Vec<f64>>>>()?;
            blocks.concat()
        }
    };

    Ok(DeconvDensity {
        grid: grid.clone(),
        values,
        bandwidths: table.bandwidths().to_vec(),
        sample_size: n,
    })
}

/// `min_j |x - c_j|^2`.
pub fn clustering_loss(c: &Codebook, x: &[f64]) -> f64 {
    c.loss(x)
}

/// Deconvolved loss `sum_x w(x) k(z - x) min_j |x - c_j|^2` over the grid.
pub fn deconvolved_loss(c: &Codebook, z: &[f64], table: &DeconvKernelTable, grid: &QuadratureGrid) -> Result<f64> {
    check_point(z, table)?;
    let mut acc = 0.0;
    let mut offset = [0.0; 2];
    for x in grid.nodes().iter() {
        for j in 0..x.len() {
            offset[j] = z[j] - x[j];
        }
        let k = table.eval(&offset[..x.len()]).ok_or_else(|| coverage(z))?;
        acc += k * c.loss(x);
    }
    Ok(grid.weight() * acc)
}

/// Deconvolved empirical risk: the sample mean of [`deconvolved_loss`].
pub fn empirical_risk(c: &Codebook, sample: &PointSet, table: &DeconvKernelTable, grid: &QuadratureGrid) -> Result<f64> {
    check_inputs(sample, table, grid)?;
    let losses = sample
        .iter()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|z| deconvolved_loss(c, z, table, grid))
        .collect::<Result<Vec<f64>>>()?;
    Ok(losses.iter().sum::<f64>() / sample.len() as f64)
}

/// `sum_x w(x) density(x) min_j |x - c_j|^2` for any density tabulated on
/// the grid (estimated or true).
pub fn risk_against_density(c: &Codebook, grid: &QuadratureGrid, density: &[f64]) -> f64 {
    debug_assert_eq!(density.len(), grid.len());
    let acc: f64 = grid
        .nodes()
        .iter()
        .zip(density)
        .map(|(x, &f)| f * c.loss(x))
        .sum();
    grid.weight() * acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{build_kernel_table, BaseKernel, InversionSettings};
    use crate::noise::NoiseModel;
    use std::f64::consts::PI;

    fn sinc_table(grid: &QuadratureGrid, lambda: f64, sample_box: (f64, f64)) -> DeconvKernelTable {
        build_kernel_table(
            &BaseKernel::sinc(),
            &NoiseModel::identity(1),
            &[lambda],
            grid,
            &[sample_box],
            &InversionSettings::default(),
        )
        .unwrap()
    }

    #[test]
    fn single_point_estimate_is_kernel() {
        let grid = QuadratureGrid::new(&[(-4.0, 4.0)], &[64]).unwrap();
        let table = sinc_table(&grid, 1.0, (-1.0, 1.0));
        let sample = PointSet::from_rows(1, &[vec![0.0]]).unwrap();
        let d = deconv_density(&sample, &table, &grid).unwrap();
        for (x, v) in grid.axis_coords(0).iter().zip(d.values()) {
            let exact = x.sin() / (PI * x);
            assert!((v - exact).abs() < 1e-5, "{x}: {v} vs {exact}");
        }
        // a grid node at 0
        let grid = QuadratureGrid::new(&[(-4.0, 4.0)], &[65]).unwrap();
        let table = sinc_table(&grid, 1.0, (-1.0, 1.0));
        let d = deconv_density(&sample, &table, &grid).unwrap();
        assert!((d.values()[32] - 1.0 / PI).abs() < 1e-8);
    }

    #[test]
    fn repeated_observations_do_not_change_estimate() {
        let grid = QuadratureGrid::new(&[(-2.0, 2.0)], &[40]).unwrap();
        let table = sinc_table(&grid, 0.5, (-1.0, 1.0));
        let one = PointSet::from_rows(1, &[vec![0.3]]).unwrap();
        let many = PointSet::from_rows(1, &vec![vec![0.3]; 7]).unwrap();
        let a = deconv_density(&one, &table, &grid).unwrap();
        let b = deconv_density(&many, &table, &grid).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn coverage_error_names_point() {
        let grid = QuadratureGrid::new(&[(-2.0, 2.0)], &[16]).unwrap();
        let table = sinc_table(&grid, 0.5, (-1.0, 1.0));
        let sample = PointSet::from_rows(1, &[vec![0.0], vec![1.5]]).unwrap();
        match deconv_density(&sample, &table, &grid) {
            Err(Error::Coverage { point }) => assert_eq!(point, vec![1.5]),
            other => panic!("expected coverage error, got {other:?}"),
        }
        let c = Codebook::new(vec![vec![0.0]]).unwrap();
        assert!(deconvolved_loss(&c, &[3.0], &table, &grid).is_err());
    }

    #[test]
    fn clustering_loss_cases() {
        let c = Codebook::new(vec![vec![0.0], vec![2.0]]).unwrap();
        assert_eq!(clustering_loss(&c, &[0.5]), 0.25);
        assert_eq!(clustering_loss(&c, &[2.0]), 0.0);
        let c = Codebook::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(clustering_loss(&c, &[1.0, 0.0]), 1.0);
    }

    #[test]
    fn two_node_grid_is_two_term_sum() {
        let grid = QuadratureGrid::new(&[(0.0, 1.0)], &[2]).unwrap();
        let table = sinc_table(&grid, 0.5, (0.0, 1.0));
        let c = Codebook::new(vec![vec![0.1]]).unwrap();
        let z = 0.4;
        let expected = 0.5
            * (table.eval(&[z - 0.25]).unwrap() * (0.25f64 - 0.1).powi(2)
                + table.eval(&[z - 0.75]).unwrap() * (0.75f64 - 0.1).powi(2));
        let got = deconvolved_loss(&c, &[z], &table, &grid).unwrap();
        assert!((got - expected).abs() < 1e-15);
    }

    #[test]
    fn single_observation_risk_is_its_loss() {
        let grid = QuadratureGrid::new(&[(-2.0, 2.0)], &[50]).unwrap();
        let table = sinc_table(&grid, 0.5, (-1.0, 1.0));
        let c = Codebook::new(vec![vec![-0.5], vec![0.7]]).unwrap();
        let sample = PointSet::from_rows(1, &[vec![0.2]]).unwrap();
        let r = empirical_risk(&c, &sample, &table, &grid).unwrap();
        let l = deconvolved_loss(&c, &[0.2], &table, &grid).unwrap();
        assert_eq!(r, l);
    }

    #[test]
    fn risk_against_simple_densities() {
        let grid = QuadratureGrid::new(&[(0.0, 1.0)], &[1000]).unwrap();
        let c = Codebook::new(vec![vec![0.25], vec![0.75]]).unwrap();
        assert_eq!(risk_against_density(&c, &grid, &vec![0.0; 1000]), 0.0);
        let uniform = vec![1.0; 1000];
        assert!((risk_against_density(&c, &grid, &uniform) - 1.0 / 48.0).abs() < 1e-6);
        // point mass at a center
        let grid = QuadratureGrid::new(&[(0.0, 1.0)], &[4]).unwrap();
        let c = Codebook::new(vec![vec![0.375]]).unwrap();
        let spike = vec![0.0, 4.0, 0.0, 0.0];
        assert!(risk_against_density(&c, &grid, &spike).abs() < 1e-15);
    }
}
