use rayon::prelude::*;
use serde::Serialize;

use super::bandwidth::{rate_exponent, theoretical_bandwidth};
use super::source::{contaminate, SourceModel};
use crate::clustering::{excess_risk, multi_start_minimize, naive_kmeans, optimal_codebook, pollard_hessian_check, LloydOptions, OptimalCodebook};
use crate::deconv_risk::{deconv_density, QuadratureGrid};
use crate::error::{Error, Result};
use crate::kernels::{build_kernel_table, BaseKernel, DeconvKernelTable, InversionSettings};
use crate::noise::NoiseModel;
use crate::rng::derive_seed;
use crate::stats::{least_squares, mean_and_stderr, sign_test_p_value};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthRule {
    /// `c0 * n^(-1/(gamma + 2 beta_bar))`.
    Theoretical { c0: f64 },
    Fixed(f64),
}

impl BandwidthRule {
    pub fn bandwidth(&self, n: usize, gamma: f64, beta_bar: f64) -> Result<f64> {
        match *self {
            BandwidthRule::Theoretical { c0 } => theoretical_bandwidth(n, gamma, beta_bar, c0),
            BandwidthRule::Fixed(l) if l > 0.0 => Ok(l),
            BandwidthRule::Fixed(l) => Err(Error::Parameter(format!("bandwidth must be positive, got {l}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RateConfig {
    pub source: SourceModel,
    pub noise: NoiseModel,
    pub kernel: BaseKernel,
    pub inversion: InversionSettings,
    pub k: usize,
    pub nodes_per_axis: Vec<usize>,
    /// Grid margin around the support, in units of the largest bandwidth.
    pub margin_factor: f64,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub restarts: usize,
    pub naive_restarts: usize,
    pub bandwidth: BandwidthRule,
    /// Per-axis probability that a noise draw leaves the kernel tables'
    /// sample box.
    pub noise_tail_prob: f64,
    /// Reference optimum: grid refinement factor and restart multiplier.
    pub reference_refinement: usize,
    pub reference_restart_factor: usize,
    pub hessian_step: f64,
    pub lloyd: LloydOptions,
    pub master_seed: u64,
}

impl RateConfig {
    /// Defaults around a source and noise pair.
    pub fn new(source: SourceModel, noise: NoiseModel, k: usize) -> Self {
        let d = source.dim();
        Self {
            source,
            noise,
            kernel: BaseKernel::default(),
            inversion: InversionSettings::default(),
            k,
            nodes_per_axis: vec![if d == 1 { 512 } else { 64 }; d],
            margin_factor: 3.0,
            sample_sizes: vec![250, 500, 1000, 2000, 4000, 8000],
            replications: 100,
            restarts: 4,
            naive_restarts: 4,
            bandwidth: BandwidthRule::Theoretical { c0: 1.0 },
            noise_tail_prob: 1e-12,
            reference_refinement: 2,
            reference_restart_factor: 8,
            hessian_step: 0.01,
            lloyd: LloydOptions::default(),
            master_seed: 0,
        }
    }
}

/// One replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateRow {
    pub n: usize,
    pub rep: usize,
    pub excess_deconv: f64,
    pub excess_naive: f64,
    pub lambda: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub sample_sizes: Vec<usize>,
    pub mean_excess: Vec<f64>,
    pub std_error: Vec<f64>,
    pub slope: f64,
    pub slope_stderr: f64,
    pub theoretical_exponent: f64,
    pub naive_mean_excess: Vec<f64>,
    pub naive_std_error: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedComparison {
    pub n: usize,
    /// Replications where the deconvolved estimator had lower excess risk.
    pub deconv_wins: u64,
    pub naive_wins: u64,
    pub ties: u64,
    /// One-sided sign-test p-value for "deconvolved is better".
    pub p_value: f64,
}

#[derive(Debug, Clone)]
pub struct RateOutcome {
    pub fit: RateFit,
    pub rows: Vec<RateRow>,
    pub reference: OptimalCodebook,
    pub hessian_min_eigenvalue: f64,
    pub comparison_at_largest_n: PairedComparison,
}

impl RateOutcome {
    /// Plot-ready CSV: `n,rep,excess_deconv,excess_naive,lambda,seed`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,rep,excess_deconv,excess_naive,lambda,seed\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:e},{:e},{:e},{}\n",
                r.n, r.rep, r.excess_deconv, r.excess_naive, r.lambda, r.seed
            ));
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "slope": self.fit.slope,
            "slope_stderr": self.fit.slope_stderr,
            "theoretical_exponent": self.fit.theoretical_exponent,
            "sample_sizes": self.fit.sample_sizes,
            "mean_excess": self.fit.mean_excess,
            "std_error": self.fit.std_error,
            "naive_mean_excess": self.fit.naive_mean_excess,
            "naive_std_error": self.fit.naive_std_error,
            "reference": {
                "centers": self.reference.codebook.centers(),
                "risk": self.reference.risk,
                "distinct_optima": self.reference.distinct_optima,
                "hessian_min_eigenvalue": self.hessian_min_eigenvalue,
            },
            "paired_comparison": self.comparison_at_largest_n,
        })
    }
}

/// Monte Carlo excess-risk experiment over a schedule of sample sizes.
///
/// For every `n` and replication: draw `X`, contaminate it, estimate the
/// deconvolution density at `lambda(n)`, minimise the deconvolved risk, and
/// score the codebook against the reference optimum under the clean law.
/// Naive k-means on the contaminated sample is scored alongside.
pub fn run_rate_experiment(cfg: &RateConfig) -> Result<RateOutcome> {
    let d = cfg.source.dim();
    if cfg.noise.dim() != d || cfg.nodes_per_axis.len() != d {
        return Err(Error::Config("source, noise and grid dimensions disagree".into()));
    }
    if cfg.sample_sizes.len() < 2 || cfg.replications == 0 {
        return Err(Error::Config("need at least two sample sizes and one replication".into()));
    }
    if cfg.sample_sizes.iter().any(|&n| n < cfg.k) {
        return Err(Error::Config("every sample size must be at least k".into()));
    }
    let gamma = cfg.source.holder_gamma();
    let beta_bar = cfg.noise.beta_bar();
    let lambdas: Vec<f64> = cfg
        .sample_sizes
        .iter()
        .map(|&n| cfg.bandwidth.bandwidth(n, gamma, beta_bar))
        .collect::<Result<_>>()?;
    let lambda_max = lambdas.iter().copied().fold(0.0, f64::max);

    let grid = cfg.source.grid(cfg.margin_factor * lambda_max, &cfg.nodes_per_axis)?;
    let reference_grid = grid.refined(cfg.reference_refinement)?;
    let truth = cfg.source.density_on(&reference_grid);
    let reference = optimal_codebook(
        &reference_grid,
        &truth,
        cfg.k,
        cfg.restarts.max(1) * cfg.reference_restart_factor,
        derive_seed(cfg.master_seed, &[u64::MAX]),
        &cfg.lloyd,
    )?;
    let hessian_min_eigenvalue = pollard_hessian_check(&reference_grid, &truth, &reference.codebook, cfg.hessian_step)?;
    if !(hessian_min_eigenvalue > 0.0) {
        return Err(Error::Config(format!(
            "risk Hessian at the reference optimum is not positive definite (min eigenvalue {hessian_min_eigenvalue:e})"
        )));
    }

    let sample_box: Vec<(f64, f64)> = cfg
        .source
        .bounding_box()
        .iter()
        .zip(cfg.noise.components())
        .map(|(&(lo, hi), c)| {
            let r = c.tail_radius(cfg.noise_tail_prob);
            (lo - r, hi + r)
        })
        .collect();
    let clamp: Vec<(f64, f64)> = cfg
        .source
        .bounding_box()
        .iter()
        .map(|&(lo, hi)| (lo - cfg.noise.max_std_dev(), hi + cfg.noise.max_std_dev()))
        .collect();
    let lloyd = LloydOptions {
        clamp: Some(clamp),
        ..cfg.lloyd.clone()
    };

    let tables: Vec<DeconvKernelTable> = lambdas
        .iter()
        .map(|&l| build_kernel_table(&cfg.kernel, &cfg.noise, &vec![l; d], &grid, &sample_box, &cfg.inversion))
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize)> = (0..cfg.sample_sizes.len())
        .flat_map(|i| (0..cfg.replications).map(move |r| (i, r)))
        .collect();
    let rows: Vec<RateRow> = jobs
        .par_iter()
        .map(|&(i, rep)| {
            let seed = derive_seed(cfg.master_seed, &[i as u64, rep as u64]);
            replicate(cfg, &grid, &tables[i], &reference_grid, &truth, &reference, &lloyd, cfg.sample_sizes[i], lambdas[i], rep, seed)
                .map_err(|e| Error::Replication { seed, source: Box::new(e) })
        })
        .collect::<Result<_>>()?;

    let mut mean_excess = Vec::new();
    let mut std_error = Vec::new();
    let mut naive_mean_excess = Vec::new();
    let mut naive_std_error = Vec::new();
    for &n in &cfg.sample_sizes {
        let de: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.excess_deconv).collect();
        let na: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.excess_naive).collect();
        let (m, s) = mean_and_stderr(&de);
        mean_excess.push(m);
        std_error.push(s);
        let (m, s) = mean_and_stderr(&na);
        naive_mean_excess.push(m);
        naive_std_error.push(s);
    }
    let points: Vec<(f64, f64)> = cfg
        .sample_sizes
        .iter()
        .zip(&mean_excess)
        .map(|(&n, &m)| ((n as f64).ln(), m.max(f64::MIN_POSITIVE).ln()))
        .collect();
    let line = least_squares(&points);

    let n_last = *cfg.sample_sizes.iter().max().expect("non-empty schedule");
    let comparison_at_largest_n = paired_comparison(&rows, n_last);

    Ok(RateOutcome {
        fit: RateFit {
            sample_sizes: cfg.sample_sizes.clone(),
            mean_excess,
            std_error,
            slope: line.slope,
            slope_stderr: line.slope_stderr,
            theoretical_exponent: rate_exponent(gamma, beta_bar),
            naive_mean_excess,
            naive_std_error,
        },
        rows,
        reference,
        hessian_min_eigenvalue,
        comparison_at_largest_n,
    })
}

#[allow(clippy::too_many_arguments)]
fn replicate(
    cfg: &RateConfig,
    grid: &QuadratureGrid,
    table: &DeconvKernelTable,
    reference_grid: &QuadratureGrid,
    truth: &[f64],
    reference: &OptimalCodebook,
    lloyd: &LloydOptions,
    n: usize,
    lambda: f64,
    rep: usize,
    seed: u64,
) -> Result<RateRow> {
    let x = cfg.source.sample(n, derive_seed(seed, &[1]))?;
    let z = contaminate(&x, &cfg.noise, derive_seed(seed, &[2]))?;
    let density = deconv_density(&z, table, grid)?;
    let report = multi_start_minimize(grid, density.values(), cfg.k, cfg.restarts, derive_seed(seed, &[3]), lloyd)?;
    let excess_deconv = excess_risk(&report.final_codebook, reference.risk, reference_grid, truth)?;
    let naive = naive_kmeans(&z, cfg.k, cfg.naive_restarts, derive_seed(seed, &[4]))?;
    let excess_naive = excess_risk(&naive, reference.risk, reference_grid, truth)?;
    Ok(RateRow {
        n,
        rep,
        excess_deconv,
        excess_naive,
        lambda,
        seed,
    })
}

/// Paired sign test of deconvolved against naive excess risk at one `n`.
pub fn paired_comparison(rows: &[RateRow], n: usize) -> PairedComparison {
    let (mut deconv_wins, mut naive_wins, mut ties) = (0, 0, 0);
    for r in rows.iter().filter(|r| r.n == n) {
        if r.excess_deconv < r.excess_naive {
            deconv_wins += 1;
        } else if r.excess_deconv > r.excess_naive {
            naive_wins += 1;
        } else {
            ties += 1;
        }
    }
    PairedComparison {
        n,
        deconv_wins,
        naive_wins,
        ties,
        p_value: sign_test_p_value(deconv_wins, deconv_wins + naive_wins),
    }
}
