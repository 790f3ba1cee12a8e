use rayon::prelude::*;
use serde::Serialize;

use super::source::SourceModel;
use crate::clustering::Codebook;
use crate::deconv_risk::{risk_against_density, QuadratureGrid};
use crate::error::{Error, Result};
use crate::kernels::{build_kernel_table, BaseKernel, DeconvKernelTable, InversionSettings};
use crate::noise::NoiseModel;
use crate::stats::least_squares;

#[derive(Debug, Clone)]
pub struct BiasConfig {
    pub source: SourceModel,
    pub kernel: BaseKernel,
    pub inversion: InversionSettings,
    pub codebook: Codebook,
    pub reference: Codebook,
    pub bandwidths: Vec<f64>,
    pub nodes_per_axis: Vec<usize>,
    /// Grid margin around the support, in units of the largest bandwidth.
    pub margin_factor: f64,
}

impl BiasConfig {
    pub fn new(source: SourceModel, codebook: Codebook, reference: Codebook) -> Self {
        let d = source.dim();
        Self {
            source,
            kernel: BaseKernel::default(),
            inversion: InversionSettings::default(),
            codebook,
            reference,
            bandwidths: vec![0.4, 0.2, 0.1],
            nodes_per_axis: vec![if d == 1 { 1024 } else { 128 }; d],
            margin_factor: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasOutcome {
    pub bandwidths: Vec<f64>,
    /// `|(R - R^lambda)(c) - (R - R^lambda)(c')|` per bandwidth.
    pub bias: Vec<f64>,
    pub slope: f64,
    pub slope_stderr: f64,
}

impl BiasOutcome {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,bias\n");
        for (l, b) in self.bandwidths.iter().zip(&self.bias) {
            out.push_str(&format!("{l:e},{b:e}\n"));
        }
        out
    }
}

/// Smoothing bias of the risk increment between two codebooks.
///
/// The noise channel is switched off, so `R^lambda` is the clustering risk
/// under `K_lambda * f` and only the bias of the kernel remains. Both risks
/// are integrated over the same grid; the slope is fitted on
/// `(ln lambda, ln bias)`.
pub fn run_bias_experiment(cfg: &BiasConfig) -> Result<BiasOutcome> {
    let d = cfg.source.dim();
    if cfg.codebook.dim() != d || cfg.reference.dim() != d || cfg.nodes_per_axis.len() != d {
        return Err(Error::Config("source, codebook and grid dimensions disagree".into()));
    }
    if cfg.bandwidths.len() < 2 || cfg.bandwidths.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::Config("need at least two positive bandwidths".into()));
    }
    let mut bandwidths = cfg.bandwidths.clone();
    bandwidths.sort_by(|a, b| b.total_cmp(a));
    bandwidths.dedup();
    let grid = cfg.source.grid(cfg.margin_factor * bandwidths[0], &cfg.nodes_per_axis)?;
    let truth = cfg.source.density_on(&grid);
    let increment = |f: &[f64]| risk_against_density(&cfg.codebook, &grid, f) - risk_against_density(&cfg.reference, &grid, f);
    let clean = increment(&truth);

    let identity = NoiseModel::identity(d);
    let mut bias = Vec::with_capacity(bandwidths.len());
    for &lambda in &bandwidths {
        let table = build_kernel_table(&cfg.kernel, &identity, &vec![lambda; d], &grid, grid.bounds(), &cfg.inversion)?;
        let smoothed = smooth_on_grid(&grid, &truth, &table)?;
        bias.push((clean - increment(&smoothed)).abs());
    }
    if !(bias[0] >= 1e-12) {
        return Err(Error::Degenerate(format!(
            "bias {:e} at lambda = {} is too small to fit a slope",
            bias[0], bandwidths[0]
        )));
    }
    let points: Vec<(f64, f64)> = bandwidths
        .iter()
        .zip(&bias)
        .map(|(l, b)| (l.ln(), b.max(f64::MIN_POSITIVE).ln()))
        .collect();
    let line = least_squares(&points);
    Ok(BiasOutcome {
        bandwidths,
        bias,
        slope: line.slope,
        slope_stderr: line.slope_stderr,
    })
}

/// `(K_lambda * f)(x_i) = w * sum_j K_lambda(x_i - x_j) f(x_j)` on the grid.
pub fn smooth_on_grid(grid: &QuadratureGrid, density: &[f64], table: &DeconvKernelTable) -> Result<Vec<f64>> {
    let nodes = grid.nodes();
    let w = grid.weight();
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = nodes.point(i);
            let mut acc = 0.0;
            let mut offset = vec![0.0; x.len()];
            for (y, &f) in nodes.iter().zip(density) {
                if f == 0.0 {
                    continue;
                }
                for ((o, a), b) in offset.iter_mut().zip(x).zip(y) {
                    *o = a - b;
                }
                acc += f * table.eval(&offset).ok_or_else(|| Error::Coverage { point: y.to_vec() })?;
            }
            Ok(w * acc)
        })
        .collect()
}
