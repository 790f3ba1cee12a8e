//! Smoothing bias of a risk increment as the bandwidth shrinks.

use noisy_cluster::experiments::{run_bias_experiment, BiasConfig, SourceModel};
use noisy_cluster::Codebook;

fn main() -> noisy_cluster::Result<()> {
    let source = SourceModel::truncated_gaussian_mixture(
        vec![0.5, 0.5],
        vec![vec![-1.0], vec![1.0]],
        vec![vec![0.25], vec![0.25]],
        2.5,
        2.0,
    )?;
    let c = Codebook::new(vec![vec![-1.0], vec![1.0]])?;
    let c_prime = Codebook::new(vec![vec![-0.6], vec![1.3]])?;
    let mut cfg = BiasConfig::new(source, c, c_prime);
    cfg.bandwidths = vec![0.4, 0.3, 0.2, 0.15, 0.1];
    let outcome = run_bias_experiment(&cfg)?;
    for (l, b) in outcome.bandwidths.iter().zip(&outcome.bias) {
        println!("lambda {l:.2}: bias {b:.3e}");
    }
    println!("log-log slope {:.3}", outcome.slope);
    Ok(())
}
