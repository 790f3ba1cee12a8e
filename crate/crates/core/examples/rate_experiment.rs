//! A reduced excess-risk rate experiment. Pass the number of replications
//! as the first argument (default 20).

use noisy_cluster::experiments::{run_rate_experiment, RateConfig, SourceModel};
use noisy_cluster::NoiseModel;

fn main() -> noisy_cluster::Result<()> {
    let reps = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20);
    let source = SourceModel::truncated_gaussian_mixture(
        vec![0.5, 0.5],
        vec![vec![-1.0], vec![1.0]],
        vec![vec![0.25], vec![0.25]],
        2.5,
        2.0,
    )?;
    let mut cfg = RateConfig::new(source, NoiseModel::laplace(1, 0.3)?, 2);
    cfg.replications = reps;
    let outcome = run_rate_experiment(&cfg)?;
    let fit = &outcome.fit;
    println!("{:>6} {:>12} {:>12}", "n", "deconvolved", "naive");
    for i in 0..fit.sample_sizes.len() {
        println!("{:>6} {:>12.3e} {:>12.3e}", fit.sample_sizes[i], fit.mean_excess[i], fit.naive_mean_excess[i]);
    }
    println!(
        "fitted slope {:.3} +- {:.3}; theoretical -{:.3}",
        fit.slope, fit.slope_stderr, fit.theoretical_exponent
    );
    let cmp = &outcome.comparison_at_largest_n;
    println!("n = {}: deconvolved wins {} of {}, sign test p = {:.2e}", cmp.n, cmp.deconv_wins, cmp.deconv_wins + cmp.naive_wins, cmp.p_value);
    Ok(())
}
