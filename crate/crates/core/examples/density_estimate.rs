//! Deconvolution density estimate from a contaminated two-bump sample.

use noisy_cluster::deconv_risk::deconv_density;
use noisy_cluster::experiments::{contaminate, theoretical_bandwidth, SourceModel};
use noisy_cluster::kernels::build_kernel_table;
use noisy_cluster::{BaseKernel, InversionSettings, NoiseModel};

fn main() -> noisy_cluster::Result<()> {
    let source = SourceModel::truncated_gaussian_mixture(
        vec![0.5, 0.5],
        vec![vec![-1.0], vec![1.0]],
        vec![vec![0.25], vec![0.25]],
        2.5,
        2.0,
    )?;
    let noise = NoiseModel::laplace(1, 0.3)?;
    let n = 4000;
    let z = contaminate(&source.sample(n, 1)?, &noise, 2)?;

    let lambda = theoretical_bandwidth(n, source.holder_gamma(), noise.beta_bar(), 1.0)?;
    let grid = source.grid(1.0, &[256])?;
    let table = build_kernel_table(&BaseKernel::default(), &noise, &[lambda], &grid, &z.bounding_box().unwrap(), &InversionSettings::default())?;
    let fhat = deconv_density(&z, &table, &grid)?;
    let truth = source.density_on(&grid);

    println!("n = {n}, lambda = {lambda:.3}");
    println!("mass {:.4}, most negative value {:.4}", fhat.total_mass(), fhat.min_value());
    for i in (0..grid.len()).step_by(16) {
        let x = grid.node(i)[0];
        println!("{x:>7.3} {:>9.4} {:>9.4}", fhat.values()[i], truth[i]);
    }
    Ok(())
}
