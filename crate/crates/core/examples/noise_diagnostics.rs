//! Characteristic-function decay of Laplace noise and sampler moments.

use noisy_cluster::NoiseModel;

fn main() -> noisy_cluster::Result<()> {
    let sigma = 0.3;
    let noise = NoiseModel::laplace(1, sigma)?;
    println!("declared beta = {}, fitted decay exponent = {:.4}", noise.beta(0), noise.beta_decay_check(0)?);
    for t in [0.0, 1.0, 10.0, 100.0] {
        println!("cf({t:>5}) = {:.6}", noise.cf(0, t).re);
    }
    let draws = noise.sample(200_000, 7);
    let (mean, var) = draws.moments()[0];
    println!("sample mean {mean:.4}, variance {var:.4} (expected {:.4})", 2.0 * sigma * sigma);
    Ok(())
}
