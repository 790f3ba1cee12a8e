//! Deconvolution k-means against naive k-means on the same noisy sample,
//! both scored under the clean distribution.

use noisy_cluster::clustering::{excess_risk, multi_start_minimize, naive_kmeans, optimal_codebook};
use noisy_cluster::deconv_risk::deconv_density;
use noisy_cluster::experiments::{contaminate, theoretical_bandwidth, SourceModel};
use noisy_cluster::kernels::build_kernel_table;
use noisy_cluster::{BaseKernel, InversionSettings, LloydOptions, NoiseModel};

fn main() -> noisy_cluster::Result<()> {
    let source = SourceModel::truncated_gaussian_mixture(
        vec![0.5, 0.5],
        vec![vec![-1.0], vec![1.0]],
        vec![vec![0.25], vec![0.25]],
        2.5,
        2.0,
    )?;
    let noise = NoiseModel::laplace(1, 0.5)?;
    let n = 8000;
    let z = contaminate(&source.sample(n, 11)?, &noise, 12)?;

    let lambda = theoretical_bandwidth(n, source.holder_gamma(), noise.beta_bar(), 1.0)?;
    let grid = source.grid(1.0, &[512])?;
    let table = build_kernel_table(&BaseKernel::default(), &noise, &[lambda], &grid, &z.bounding_box().unwrap(), &InversionSettings::default())?;
    let fhat = deconv_density(&z, &table, &grid)?;
    let opts = LloydOptions::default();
    let deconv = multi_start_minimize(&grid, fhat.values(), 2, 8, 13, &opts)?;
    let naive = naive_kmeans(&z, 2, 8, 14)?;

    let truth = source.density_on(&grid);
    let best = optimal_codebook(&grid, &truth, 2, 16, 15, &opts)?;
    println!("clean optimum      {:?}", best.codebook.flatten());
    println!(
        "deconvolved        {:?}  excess {:.2e}",
        deconv.final_codebook.flatten(),
        excess_risk(&deconv.final_codebook, best.risk, &grid, &truth)?
    );
    println!(
        "naive on Z         {:?}  excess {:.2e}",
        naive.flatten(),
        excess_risk(&naive, best.risk, &grid, &truth)?
    );
    Ok(())
}
