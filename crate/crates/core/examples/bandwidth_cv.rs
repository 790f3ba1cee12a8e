//! Cross-validated bandwidth next to the rate-optimal rule.

use noisy_cluster::experiments::{contaminate, cv_bandwidth, theoretical_bandwidth, CvSetup, SourceModel};
use noisy_cluster::{BaseKernel, InversionSettings, LloydOptions, NoiseModel};

fn main() -> noisy_cluster::Result<()> {
    let source = SourceModel::truncated_gaussian_mixture(
        vec![0.5, 0.5],
        vec![vec![-1.0], vec![1.0]],
        vec![vec![0.25], vec![0.25]],
        2.5,
        2.0,
    )?;
    let noise = NoiseModel::laplace(1, 0.3)?;
    let n = 2000;
    let z = contaminate(&source.sample(n, 3)?, &noise, 4)?;
    let grid = source.grid(1.2, &[256])?;
    let sample_box = z.bounding_box().unwrap();
    let (kernel, settings, lloyd) = (BaseKernel::default(), InversionSettings::default(), LloydOptions::default());
    let setup = CvSetup {
        kernel: &kernel,
        noise: &noise,
        grid: &grid,
        sample_box: &sample_box,
        settings: &settings,
        k: 2,
        restarts: 4,
        lloyd: &lloyd,
    };
    let cv = cv_bandwidth(&z, &[0.15, 0.2, 0.25, 0.3, 0.35, 0.4], 5, 5, &setup)?;
    for (l, s) in &cv.scores {
        println!("lambda {l:.2}: held-out risk {}", s.map_or("failed".into(), |v| format!("{v:.5}")));
    }
    println!(
        "cross-validated {:.2}, rule c0 = 1 gives {:.3}",
        cv.lambda,
        theoretical_bandwidth(n, 2.0, noise.beta_bar(), 1.0)?
    );
    Ok(())
}
