use rand::seq::SliceRandom;

use crate::clustering::{multi_start_minimize, LloydOptions};
use crate::deconv_risk::{deconv_density, risk_against_density, QuadratureGrid};
use crate::error::{Error, Result};
use crate::kernels::{build_kernel_table, BaseKernel, InversionSettings};
use crate::noise::NoiseModel;
use crate::points::PointSet;
use crate::rng::{derive_seed, seeded_rng};

/// `c0 * n^(-1 / (gamma + 2 beta_bar))`, used on every axis.
pub fn theoretical_bandwidth(n: usize, gamma: f64, beta_bar: f64, c0: f64) -> Result<f64> {
    if n == 0 || !(gamma > 0.0) || !(beta_bar >= 0.0) || !(c0 > 0.0) {
        return Err(Error::Parameter(format!(
            "bandwidth rule needs n >= 1, gamma > 0, beta_bar >= 0, c0 > 0 (got n={n}, gamma={gamma}, beta_bar={beta_bar}, c0={c0})"
        )));
    }
    Ok(c0 * (n as f64).powf(-1.0 / (gamma + 2.0 * beta_bar)))
}

/// Excess-risk decay exponent `gamma / (gamma + 2 beta_bar)`.
pub fn rate_exponent(gamma: f64, beta_bar: f64) -> f64 {
    gamma / (gamma + 2.0 * beta_bar)
}

/// Everything besides the sample that cross-validation needs.
#[derive(Debug, Clone)]
pub struct CvSetup<'a> {
    pub kernel: &'a BaseKernel,
    pub noise: &'a NoiseModel,
    pub grid: &'a QuadratureGrid,
    pub sample_box: &'a [(f64, f64)],
    pub settings: &'a InversionSettings,
    pub k: usize,
    pub restarts: usize,
    pub lloyd: &'a LloydOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub lambda: f64,
    /// `(candidate, mean held-out risk)`; `None` when the candidate failed.
    pub scores: Vec<(f64, Option<f64>)>,
}

/// Pick the bandwidth whose fitted codebooks have the smallest mean
/// held-out deconvolved risk. Ties go to the smaller bandwidth; candidates
/// that fail numerically are skipped.
pub fn cv_bandwidth(sample: &PointSet, candidates: &[f64], folds: usize, seed: u64, setup: &CvSetup<'_>) -> Result<CvOutcome> {
    if candidates.len() < 2 {
        return Err(Error::Parameter("cross-validation needs at least two candidates".into()));
    }
    let n = sample.len();
    if folds < 2 || folds > n {
        return Err(Error::Parameter(format!("cannot split {n} points into {folds} folds")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeded_rng(derive_seed(seed, &[0])));
    let fold_of = |f: usize| -> (Vec<usize>, Vec<usize>) {
        let (mut train, mut test) = (Vec::new(), Vec::new());
        for (pos, &i) in order.iter().enumerate() {
            if pos % folds == f {
                test.push(i)
            } else {
                train.push(i)
            }
        }
        (train, test)
    };
    if (0..folds).any(|f| fold_of(f).0.len() < setup.k) {
        return Err(Error::Parameter(format!(
            "a training fold holds fewer than k = {} points",
            setup.k
        )));
    }

    let mut sorted: Vec<f64> = candidates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let d = setup.grid.dim();
    let score = |lambda: f64| -> Result<f64> {
        let table = build_kernel_table(setup.kernel, setup.noise, &vec![lambda; d], setup.grid, setup.sample_box, setup.settings)?;
        let mut total = 0.0;
        for f in 0..folds {
            let (train, test) = fold_of(f);
            let fit = deconv_density(&sample.select(&train), &table, setup.grid)?;
            let report = multi_start_minimize(
                setup.grid,
                fit.values(),
                setup.k,
                setup.restarts,
                derive_seed(seed, &[1, f as u64]),
                setup.lloyd,
            )?;
            let held = deconv_density(&sample.select(&test), &table, setup.grid)?;
            total += risk_against_density(&report.final_codebook, setup.grid, held.values());
        }
        Ok(total / folds as f64)
    };

    let scores: Vec<(f64, Option<f64>)> = sorted.iter().map(|&l| (l, score(l).ok())).collect();
    let best = scores
        .iter()
        .filter_map(|&(l, s)| s.map(|s| (l, s)))
        .fold(None, |acc: Option<(f64, f64)>, (l, s)| match acc {
            Some((_, bs)) if bs <= s => acc,
            _ => Some((l, s)),
        });
    match best {
        Some((lambda, _)) => Ok(CvOutcome { lambda, scores }),
        None => Err(Error::Degenerate("every bandwidth candidate failed".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_values() {
        let l = theoretical_bandwidth(1024, 2.0, 2.0, 1.0).unwrap();
        assert!((l - 1024f64.powf(-1.0 / 6.0)).abs() < 1e-15);
        assert!((l - 0.3150).abs() < 1e-4);
        let l = theoretical_bandwidth(10_000, 2.0, 0.0, 1.0).unwrap();
        assert!((l - 0.01).abs() < 1e-15);
        assert!((rate_exponent(2.0, 2.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!(theoretical_bandwidth(0, 2.0, 2.0, 1.0).is_err());
        assert!(theoretical_bandwidth(10, 0.0, 2.0, 1.0).is_err());
        assert!(theoretical_bandwidth(10, 2.0, -1.0, 1.0).is_err());
        assert!(theoretical_bandwidth(10, 2.0, 2.0, 0.0).is_err());
    }
}
