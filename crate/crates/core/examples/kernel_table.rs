//! Deconvolution kernel for Laplace noise next to the plain base kernel.
//!
//! Run with `cargo run --release --example kernel_table`.

use noisy_cluster::kernels::build_kernel_table;
use noisy_cluster::{BaseKernel, InversionSettings, NoiseModel, QuadratureGrid};

fn main() -> noisy_cluster::Result<()> {
    let kernel = BaseKernel::default();
    let grid = QuadratureGrid::new(&[(-1.0, 1.0)], &[40])?;
    let settings = InversionSettings::default();
    let lambda = 0.2;

    let plain = build_kernel_table(&kernel, &NoiseModel::identity(1), &[lambda], &grid, &[(-1.0, 1.0)], &settings)?;
    let noisy = build_kernel_table(&kernel, &NoiseModel::laplace(1, 0.2)?, &[lambda], &grid, &[(-1.0, 1.0)], &settings)?;

    println!("lambda = {lambda}, table step = {:.5}", noisy.axis(0).step());
    println!("{:>8} {:>12} {:>12}", "offset", "base", "laplace");
    for t in [0.0, 0.05, 0.1, 0.2, 0.4, 0.8] {
        let a = plain.axis(0).eval(t).unwrap();
        let b = noisy.axis(0).eval(t).unwrap();
        println!("{t:>8.3} {a:>12.5} {b:>12.5}");
    }
    println!(
        "sup norm: base {:.4}, laplace {:.4}",
        plain.axis(0).sup_norm(),
        noisy.axis(0).sup_norm()
    );
    Ok(())
}
