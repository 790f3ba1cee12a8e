use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use super::init::{spread_init, weighted_sample_init};
use super::lloyd::{lloyd_on_points, LloydOptions, LloydReport};
use super::Codebook;
use crate::deconv_risk::{risk_against_density, QuadratureGrid};
use crate::error::{Error, Result};
use crate::points::PointSet;
use crate::rng::{derive_seed, seeded_rng};

/// Run `restarts` Lloyd iterations from different starts and return every
/// report in restart order. Start 0 is the k-means++ style spread; the
/// others are weighted draws of `k` distinct points.
pub fn multi_start_on_points(
    points: &PointSet,
    weights: &[f64],
    k: usize,
    restarts: usize,
    seed: u64,
    opts: &LloydOptions,
) -> Result<Vec<LloydReport>> {
    if k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    if restarts == 0 {
        return Err(Error::Parameter("restarts must be at least 1".into()));
    }
    if points.len() < k {
        return Err(Error::Parameter(format!(
            "cannot place {k} centers on {} points",
            points.len()
        )));
    }
    (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeded_rng(derive_seed(seed, &[r as u64]));
            let init = if r == 0 {
                spread_init(points, weights, k, &mut rng)
            } else {
                weighted_sample_init(points, weights, k, &mut rng)
            };
            lloyd_on_points(points, weights, &init, opts)
        })
        .collect()
}

fn best_of(reports: Vec<LloydReport>) -> LloydReport {
    let restarts = reports.len();
    let mut best = reports
        .into_iter()
        .reduce(|a, b| if b.final_risk < a.final_risk { b } else { a })
        .expect("at least one restart");
    best.restarts_used = restarts;
    best
}

/// Minimise the clustering risk against a density tabulated on `grid` over
/// several starts; the lowest final risk wins, ties to the earliest start.
pub fn multi_start_minimize(
    grid: &QuadratureGrid,
    density: &[f64],
    k: usize,
    restarts: usize,
    seed: u64,
    opts: &LloydOptions,
) -> Result<LloydReport> {
    if density.len() != grid.len() {
        return Err(Error::Parameter("density does not match grid".into()));
    }
    let weights: Vec<f64> = density.iter().map(|f| f * grid.weight()).collect();
    multi_start_on_points(grid.nodes(), &weights, k, restarts, seed, opts).map(best_of)
}

/// Classical k-means on the raw sample (equal weights), best of `restarts`.
pub fn naive_kmeans(sample: &PointSet, k: usize, restarts: usize, seed: u64) -> Result<Codebook> {
    if sample.len() < k {
        return Err(Error::Parameter(format!(
            "naive k-means needs n >= k, got n = {} and k = {k}",
            sample.len()
        )));
    }
    let weights = vec![1.0 / sample.len() as f64; sample.len()];
    let reports = multi_start_on_points(sample, &weights, k, restarts, seed, &LloydOptions::default())?;
    Ok(best_of(reports).final_codebook)
}

/// Reference optimum against a known non-negative density.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalCodebook {
    pub codebook: Codebook,
    pub risk: f64,
    /// Number of distinct codebooks (coordinates differing by more than
    /// 1e-3) among the restarts that reached the best risk.
    pub distinct_optima: usize,
}

pub fn optimal_codebook(
    grid: &QuadratureGrid,
    density: &[f64],
    k: usize,
    restarts: usize,
    seed: u64,
    opts: &LloydOptions,
) -> Result<OptimalCodebook> {
    if density.len() != grid.len() {
        return Err(Error::Parameter("density does not match grid".into()));
    }
    if let Some(v) = density.iter().find(|v| **v < 0.0) {
        return Err(Error::Parameter(format!(
            "reference density must be non-negative, found {v}"
        )));
    }
    let weights: Vec<f64> = density.iter().map(|f| f * grid.weight()).collect();
    let reports = multi_start_on_points(grid.nodes(), &weights, k, restarts, seed, opts)?;
    let best_risk = reports.iter().map(|r| r.final_risk).fold(f64::INFINITY, f64::min);
    let mut optima: Vec<&Codebook> = Vec::new();
    for r in &reports {
        if r.final_risk <= best_risk + 1e-8 * (1.0 + best_risk.abs())
            && optima.iter().all(|c| c.max_abs_diff(&r.final_codebook) > 1e-3)
        {
            optima.push(&r.final_codebook);
        }
    }
    let distinct_optima = optima.len();
    let best = best_of(reports);
    Ok(OptimalCodebook {
        codebook: best.final_codebook,
        risk: best.final_risk,
        distinct_optima,
    })
}

/// `R(c) - R(c*)` against the true density. Values down to -1e-6 are
/// accepted as quadrature/optimisation slack; anything lower means `c*`
/// was not optimal.
pub fn excess_risk(c: &Codebook, cstar_risk: f64, grid: &QuadratureGrid, true_density: &[f64]) -> Result<f64> {
    let excess = risk_against_density(c, grid, true_density) - cstar_risk;
    if excess < -1e-6 {
        return Err(Error::OracleInconsistency { excess });
    }
    Ok(excess)
}

/// Smallest eigenvalue of the central finite-difference Hessian of
/// `c -> R(c)` at `cstar`. Positive when the optimum is non-degenerate.
pub fn pollard_hessian_check(grid: &QuadratureGrid, true_density: &[f64], cstar: &Codebook, step: f64) -> Result<f64> {
    if !(step > 0.0) {
        return Err(Error::Parameter(format!("finite-difference step must be positive, got {step}")));
    }
    let d = cstar.dim();
    let p0 = cstar.flatten();
    let m = p0.len();
    let risk = |p: &[f64]| -> Result<f64> {
        Ok(risk_against_density(&Codebook::from_flat(d, p)?, grid, true_density))
    };
    let shifted = |moves: &[(usize, f64)]| -> Result<f64> {
        let mut p = p0.clone();
        for &(i, s) in moves {
            p[i] += s;
        }
        risk(&p)
    };
    let h = step;
    let r0 = risk(&p0)?;
    let mut hess = DMatrix::zeros(m, m);
    for a in 0..m {
        let diag = (shifted(&[(a, h)])? - 2.0 * r0 + shifted(&[(a, -h)])?) / (h * h);
        hess[(a, a)] = diag;
        for b in (a + 1)..m {
            let v = (shifted(&[(a, h), (b, h)])? - shifted(&[(a, h), (b, -h)])?
                - shifted(&[(a, -h), (b, h)])?
                + shifted(&[(a, -h), (b, -h)])?)
                / (4.0 * h * h);
            hess[(a, b)] = v;
            hess[(b, a)] = v;
        }
    }
    let eig = SymmetricEigen::new(hess);
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Variance of `gamma(c, X) - gamma(c*, X)` under the density, and the
/// excess risk `R(c) - R(c*)`.
pub fn variance_and_excess(grid: &QuadratureGrid, density: &[f64], c: &Codebook, cstar: &Codebook) -> (f64, f64) {
    let w = grid.weight();
    let mass: f64 = density.iter().sum::<f64>() * w;
    let (mut m1, mut m2) = (0.0, 0.0);
    for (x, &f) in grid.nodes().iter().zip(density) {
        let diff = c.loss(x) - cstar.loss(x);
        m1 += w * f * diff;
        m2 += w * f * diff * diff;
    }
    let mean = m1 / mass;
    (m2 / mass - mean * mean, m1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(g: usize) -> (QuadratureGrid, Vec<f64>) {
        (QuadratureGrid::new(&[(0.0, 1.0)], &[g]).unwrap(), vec![1.0; g])
    }

    #[test]
    fn single_restart_equals_one_lloyd_run() {
        let (grid, density) = uniform(256);
        let opts = LloydOptions::default();
        let r = multi_start_minimize(&grid, &density, 2, 1, 5, &opts).unwrap();
        let weights: Vec<f64> = density.iter().map(|f| f * grid.weight()).collect();
        let init = spread_init(grid.nodes(), &weights, 2, &mut seeded_rng(derive_seed(5, &[0])));
        let single = lloyd_on_points(grid.nodes(), &weights, &init, &opts).unwrap();
        assert_eq!(r, single);
    }

    #[test]
    fn best_is_no_worse_than_each_restart() {
        let grid = QuadratureGrid::new(&[(-3.0, 3.0)], &[300]).unwrap();
        let density: Vec<f64> = grid
            .axis_coords(0)
            .iter()
            .map(|x| (-(x - 2.0f64).powi(2)).exp() + 0.5 * (-(x + 1.0f64).powi(2) * 4.0).exp() + 0.3 * (-x * x * 9.0).exp())
            .collect();
        let opts = LloydOptions::default();
        let weights: Vec<f64> = density.iter().map(|f| f * grid.weight()).collect();
        let all = multi_start_on_points(grid.nodes(), &weights, 3, 8, 3, &opts).unwrap();
        let best = multi_start_minimize(&grid, &density, 3, 8, 3, &opts).unwrap();
        assert_eq!(best.restarts_used, 8);
        for r in &all {
            assert!(best.final_risk <= r.final_risk);
        }
        let again = multi_start_minimize(&grid, &density, 3, 8, 3, &opts).unwrap();
        assert_eq!(best, again);
    }

    #[test]
    fn naive_kmeans_on_distinct_points() {
        let sample = PointSet::new(1, vec![-2.0, 3.0, 7.0]).unwrap();
        let c = naive_kmeans(&sample, 3, 4, 1).unwrap();
        for (a, b) in c.flatten().iter().zip([-2.0, 3.0, 7.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(naive_kmeans(&sample, 4, 4, 1).is_err());
    }

    #[test]
    fn optimal_codebook_uniform() {
        let (grid, density) = uniform(1024);
        let opt = optimal_codebook(&grid, &density, 2, 16, 0, &LloydOptions::default()).unwrap();
        let c = opt.codebook.flatten();
        assert!((c[0] - 0.25).abs() < 0.01 && (c[1] - 0.75).abs() < 0.01);
        assert!((opt.risk - 1.0 / 48.0).abs() < 1e-3);
        assert_eq!(opt.distinct_optima, 1);
    }

    #[test]
    fn optimal_single_center_for_symmetric_density() {
        let grid = QuadratureGrid::new(&[(-2.0, 2.0)], &[400]).unwrap();
        let density: Vec<f64> = grid.axis_coords(0).iter().map(|x| (-x * x).exp()).collect();
        let opt = optimal_codebook(&grid, &density, 1, 4, 0, &LloydOptions::default()).unwrap();
        assert!(opt.codebook.center(0)[0].abs() < 1e-9);
    }

    #[test]
    fn excess_risk_checks() {
        let (grid, density) = uniform(2048);
        let cstar = Codebook::new(vec![vec![0.25], vec![0.75]]).unwrap();
        let rstar = risk_against_density(&cstar, &grid, &density);
        assert!(excess_risk(&cstar, rstar, &grid, &density).unwrap().abs() < 1e-10);

        // R(c) for c = (0.3, 0.7): cells [0, 0.5] and [0.5, 1] by symmetry,
        // 2 * int_0^0.5 (x - 0.3)^2 dx = 2 * (0.2^3 + 0.3^3) / 3.
        let c = Codebook::new(vec![vec![0.3], vec![0.7]]).unwrap();
        let closed = 2.0 * (0.2f64.powi(3) + 0.3f64.powi(3)) / 3.0 - 1.0 / 48.0;
        let got = excess_risk(&c, rstar, &grid, &density).unwrap();
        assert!((got - closed).abs() < 1e-4, "{got} vs {closed}");

        let err = excess_risk(&c, rstar + 1.0, &grid, &density).unwrap_err();
        assert!(matches!(err, Error::OracleInconsistency { .. }));
    }

    #[test]
    fn hessian_of_uniform_single_center() {
        let (grid, density) = uniform(1000);
        let c = Codebook::new(vec![vec![0.5]]).unwrap();
        let ev = pollard_hessian_check(&grid, &density, &c, 0.01).unwrap();
        assert!((ev - 2.0).abs() < 0.01, "{ev}");
    }

    #[test]
    fn hessian_positive_at_uniform_two_means() {
        let (grid, density) = uniform(2000);
        let c = Codebook::new(vec![vec![0.25], vec![0.75]]).unwrap();
        let ev = pollard_hessian_check(&grid, &density, &c, 0.01).unwrap();
        assert!(ev > 0.1, "{ev}");
    }

    #[test]
    fn coincident_centers_are_flagged() {
        let (grid, density) = uniform(2000);
        let c = Codebook::new(vec![vec![0.5], vec![0.5]]).unwrap();
        let ev = pollard_hessian_check(&grid, &density, &c, 0.01).unwrap();
        assert!(ev < 1e-2, "{ev}");
    }
}
