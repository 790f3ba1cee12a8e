//! Independent re-computations of library results.

use noisy_cluster::clustering::{multi_start_minimize, optimal_codebook, variance_and_excess, weighted_lloyd};
use noisy_cluster::deconv_risk::{deconv_density, empirical_risk, risk_against_density};
use noisy_cluster::experiments::{contaminate, cv_bandwidth, CvSetup, SourceModel};
use noisy_cluster::kernels::{build_kernel_table, deconv_kernel_at};
use noisy_cluster::rng::seeded_rng;
use noisy_cluster::{BaseKernel, Codebook, InversionSettings, LloydOptions, NoiseModel, PointSet, QuadratureGrid};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

fn mixture() -> SourceModel {
    SourceModel::truncated_gaussian_mixture(vec![0.5, 0.5], vec![vec![-1.0], vec![1.0]], vec![vec![0.25], vec![0.25]], 2.5, 2.0)
        .unwrap()
}

fn noisy_sample(n: usize, sigma: f64, seed: u64) -> (PointSet, NoiseModel) {
    let noise = NoiseModel::laplace(1, sigma).unwrap();
    let x = mixture().sample(n, seed).unwrap();
    (contaminate(&x, &noise, seed + 1).unwrap(), noise)
}

fn sample_box(z: &PointSet) -> Vec<(f64, f64)> {
    z.bounding_box().unwrap()
}

#[test]
fn density_matches_direct_inversion_at_ten_times_resolution() {
    let sigma = 0.3;
    let lambda = 0.3;
    let (z, noise) = noisy_sample(2000, sigma, 11);
    let grid = mixture().grid(1.0, &[256]).unwrap();
    let kernel = BaseKernel::default();
    let settings = InversionSettings::default();
    let table = build_kernel_table(&kernel, &noise, &[lambda], &grid, &sample_box(&z), &settings).unwrap();
    let fhat = deconv_density(&z, &table, &grid).unwrap();

    let fine = InversionSettings {
        frequency_panels: 10 * settings.frequency_panels,
        ..settings
    };
    let cf = move |t: f64| Complex64::new(1.0 / (1.0 + sigma * sigma * t * t), 0.0);
    let tol = 1e-9 * table.axis(0).sup_norm();
    for node in [0, 37, 100, 128, 201, 255] {
        let x = grid.node(node)[0];
        let direct: f64 = z
            .iter()
            .map(|zi| deconv_kernel_at(&kernel, &cf, lambda, zi[0] - x, &fine).unwrap())
            .sum::<f64>()
            / z.len() as f64;
        let got = fhat.values()[node];
        assert!((got - direct).abs() < tol, "node {node}: {got} vs {direct}");
    }
}

/// Exhaustive search over centers placed on grid nodes, including the
/// coincident pairs.
fn node_pair_oracle(grid: &QuadratureGrid, density: &[f64]) -> f64 {
    let xs = grid.axis_coords(0);
    let mut best = f64::INFINITY;
    for i in 0..xs.len() {
        for j in i..xs.len() {
            let risk: f64 = xs
                .iter()
                .zip(density)
                .map(|(x, f)| f * (x - xs[i]).powi(2).min((x - xs[j]).powi(2)))
                .sum::<f64>()
                * grid.weight();
            best = best.min(risk);
        }
    }
    best
}

#[test]
fn multi_start_is_no_worse_than_node_placement() {
    let noise = NoiseModel::laplace(1, 0.2).unwrap();
    let grid = QuadratureGrid::new(&[(-2.0, 2.0)], &[32]).unwrap();
    let kernel = BaseKernel::default();
    for seed in 0..10 {
        let (z, _) = noisy_sample(200, 0.2, 100 + seed);
        let table = build_kernel_table(&kernel, &noise, &[0.4], &grid, &sample_box(&z), &InversionSettings::default()).unwrap();
        let f = deconv_density(&z, &table, &grid).unwrap();
        let oracle = node_pair_oracle(&grid, f.values());
        let r = multi_start_minimize(&grid, f.values(), 2, 8, seed, &LloydOptions::default()).unwrap();
        assert!(r.final_risk <= oracle + 1e-3 * (1.0 + oracle.abs()), "seed {seed}: {} vs {oracle}", r.final_risk);
    }
}

#[test]
fn doubling_grid_resolution_barely_moves_the_risk() {
    let (z, noise) = noisy_sample(500, 0.3, 3);
    let c = Codebook::new(vec![vec![-0.9], vec![1.1]]).unwrap();
    let coarse = mixture().grid(1.0, &[512]).unwrap();
    let fine = coarse.refined(2).unwrap();
    // the signed integral nearly cancels here, so the error is measured
    // against the integral of |f_hat| * loss
    let risk = |grid: &QuadratureGrid| {
        let table = build_kernel_table(&BaseKernel::default(), &noise, &[0.3], grid, &sample_box(&z), &InversionSettings::default()).unwrap();
        let f = deconv_density(&z, &table, grid).unwrap();
        let abs: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
        (empirical_risk(&c, &z, &table, grid).unwrap(), risk_against_density(&c, grid, &abs))
    };
    let ((a, scale), (b, _)) = (risk(&coarse), risk(&fine));
    assert!((a - b).abs() < 1e-4 * scale, "{a} vs {b} (scale {scale})");
}

#[test]
fn permuting_the_sample_or_the_init_changes_nothing() {
    let (z, noise) = noisy_sample(400, 0.3, 21);
    let grid = mixture().grid(1.0, &[256]).unwrap();
    let table = build_kernel_table(&BaseKernel::default(), &noise, &[0.3], &grid, &sample_box(&z), &InversionSettings::default()).unwrap();
    let f = deconv_density(&z, &table, &grid).unwrap();

    let mut order: Vec<usize> = (0..z.len()).collect();
    order.shuffle(&mut seeded_rng(5));
    let g = deconv_density(&z.select(&order), &table, &grid).unwrap();
    let scale = f.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (a, b) in f.values().iter().zip(g.values()) {
        assert!((a - b).abs() < 1e-12 * scale);
    }

    let opts = LloydOptions::default();
    let a = weighted_lloyd(&grid, f.values(), &Codebook::new(vec![vec![-0.5], vec![0.7]]).unwrap(), &opts).unwrap();
    let b = weighted_lloyd(&grid, f.values(), &Codebook::new(vec![vec![0.7], vec![-0.5]]).unwrap(), &opts).unwrap();
    assert!(a.final_codebook.max_abs_diff(&b.final_codebook) < 1e-12);
}

#[test]
fn variance_is_controlled_by_excess_risk_near_the_optimum() {
    let grid = QuadratureGrid::new(&[(0.0, 1.0)], &[1000]).unwrap();
    let density = vec![1.0; 1000];
    let opt = optimal_codebook(&grid, &density, 2, 8, 0, &LloydOptions::default()).unwrap();
    let cstar = opt.codebook.flatten();
    let mut rng = seeded_rng(17);
    let mut kappa: f64 = 0.0;
    for _ in 0..100 {
        // uniform direction, radius up to 0.2
        let (u, v): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let norm = (u * u + v * v).sqrt().max(1e-12);
        let r = rng.random_range(0.01..0.2);
        let c = Codebook::from_flat(1, &[cstar[0] + r * u / norm, cstar[1] + r * v / norm]).unwrap();
        let (var, excess) = variance_and_excess(&grid, &density, &c, &opt.codebook);
        assert!(excess > 0.0);
        kappa = kappa.max(var / excess);
    }
    println!("fitted variance/excess constant: {kappa:.4}");
    assert!(kappa.is_finite() && kappa > 0.0);
}

#[test]
fn cross_validation_is_deterministic_and_skips_failing_candidates() {
    let (z, noise) = noisy_sample(300, 0.3, 8);
    let grid = mixture().grid(1.2, &[128]).unwrap();
    let kernel = BaseKernel::default();
    let settings = InversionSettings::default();
    let lloyd = LloydOptions::default();
    let sb = sample_box(&z);
    let setup = CvSetup {
        kernel: &kernel,
        noise: &noise,
        grid: &grid,
        sample_box: &sb,
        settings: &settings,
        k: 2,
        restarts: 2,
        lloyd: &lloyd,
    };
    let a = cv_bandwidth(&z, &[0.2, 0.3, 0.4], 3, 1, &setup).unwrap();
    let b = cv_bandwidth(&z, &[0.4, 0.2, 0.3], 3, 1, &setup).unwrap();
    assert_eq!(a, b);
    assert!([0.2, 0.3, 0.4].contains(&a.lambda));

    // 1e-8 is far below the noise scale: the characteristic function drops
    // under the floor and that candidate fails
    let c = cv_bandwidth(&z, &[1e-8, 0.3], 3, 1, &setup).unwrap();
    assert_eq!(c.lambda, 0.3);
    assert!(c.scores[0].1.is_none());
}
