//! Configuration files and the subcommands behind the `noisy-cluster`
//! binary. Every command writes the effective configuration into its output
//! directory before doing any work.

mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub use config::{
    BandwidthRuleName, BandwidthSection, ClusteringSection, ExperimentConfig, ExperimentSection, GridSection, KernelKindName,
    KernelSection, NoiseKindName, NoiseSection, SourceKindName, SourceSection,
};

use crate::clustering::multi_start_minimize;
use crate::deconv_risk::{deconv_density, QuadratureGrid};
use crate::error::{Error, Result};
use crate::experiments::{
    contaminate, cv_bandwidth, run_bias_experiment, run_rate_experiment, BiasConfig, CvSetup, RateConfig, SourceModel,
};
use crate::kernels::{build_kernel_table, BaseKernel, DeconvKernelTable};
use crate::noise::NoiseModel;
use crate::points::PointSet;
use crate::rng::derive_seed;

pub const EFFECTIVE_CONFIG: &str = "effective_config.toml";

/// Read whitespace-separated points, one per line. Blank lines and lines
/// starting with `#` are skipped.
pub fn read_sample_file(path: &Path, dim: usize) -> Result<PointSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut coords = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Config(format!("{}:{}: {e}", path.display(), no + 1)))?;
        if row.len() != dim || row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config(format!(
                "{}:{}: expected {dim} finite coordinates",
                path.display(),
                no + 1
            )));
        }
        coords.extend(row);
    }
    if coords.is_empty() {
        return Err(Error::Config(format!("{} holds no points", path.display())));
    }
    PointSet::new(dim, coords)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn echo_config(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_file(&out.join(EFFECTIVE_CONFIG), &cfg.to_toml_string())
}

/// Shared setup of the single-sample commands.
struct Prepared {
    sample: PointSet,
    lambda: f64,
    grid: QuadratureGrid,
    table: DeconvKernelTable,
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let source = cfg.source_model()?;
    let noise = cfg.noise_model()?;
    let kernel = cfg.base_kernel()?;
    let d = source.dim();
    let sample = match &cfg.experiment.sample_file {
        Some(path) => read_sample_file(path, d)?,
        None => {
            let x = source.sample(cfg.experiment.sample_size, derive_seed(cfg.master_seed, &[10, 1]))?;
            contaminate(&x, &noise, derive_seed(cfg.master_seed, &[10, 2]))?
        }
    };
    let sample_box = sample_box(&source, &noise, &sample, cfg.experiment.noise_tail_prob);
    let nodes = cfg.nodes_per_axis()?;
    let settings = cfg.inversion();

    let lambda = match cfg.bandwidth_rule() {
        Some(rule) => rule.bandwidth(sample.len(), source.holder_gamma(), noise.beta_bar())?,
        None => {
            let widest = cfg.bandwidth.candidates.iter().copied().fold(0.0, f64::max);
            let grid = source.grid(cfg.grid.margin_factor * widest, &nodes)?;
            let lloyd = cfg.lloyd();
            let setup = CvSetup {
                kernel: &kernel,
                noise: &noise,
                grid: &grid,
                sample_box: &sample_box,
                settings: &settings,
                k: cfg.clustering.k,
                restarts: cfg.clustering.restarts,
                lloyd: &lloyd,
            };
            cv_bandwidth(
                &sample,
                &cfg.bandwidth.candidates,
                cfg.bandwidth.folds,
                derive_seed(cfg.master_seed, &[30]),
                &setup,
            )?
            .lambda
        }
    };
    let grid = source.grid(cfg.grid.margin_factor * lambda, &nodes)?;
    let table = build_kernel_table(&kernel, &noise, &vec![lambda; d], &grid, &sample_box, &settings)?;
    Ok(Prepared {
        sample,
        lambda,
        grid,
        table,
    })
}

/// Source support widened by the noise tail radius, stretched to cover
/// every observed point.
fn sample_box(source: &SourceModel, noise: &NoiseModel, sample: &PointSet, tail_prob: f64) -> Vec<(f64, f64)> {
    let observed = sample.bounding_box().unwrap_or_default();
    source
        .bounding_box()
        .iter()
        .zip(noise.components())
        .enumerate()
        .map(|(j, (&(lo, hi), c))| {
            let r = c.tail_radius(tail_prob);
            let (mut lo, mut hi) = (lo - r, hi + r);
            if let Some(&(a, b)) = observed.get(j) {
                lo = lo.min(a);
                hi = hi.max(b);
            }
            (lo, hi)
        })
        .collect()
}

/// Kernel table as `offset,value` rows: `kernel.csv` for axis 0 and
/// `kernel_axis1.csv` for axis 1 in two dimensions.
pub fn cmd_kernel_dump(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    echo_config(cfg, out)?;
    let p = prepare(cfg)?;
    for j in 0..p.table.dim() {
        let axis = p.table.axis(j);
        let mut csv = String::from("offset,value\n");
        for (o, v) in axis.offsets().zip(axis.values()) {
            writeln!(csv, "{o:e},{v:e}").unwrap();
        }
        let name = if j == 0 { "kernel.csv".to_string() } else { format!("kernel_axis{j}.csv") };
        write_file(&out.join(name), &csv)?;
    }
    Ok(())
}

/// Deconvolution density on the grid as `x1[,x2],fhat` rows.
pub fn cmd_density(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    echo_config(cfg, out)?;
    let p = prepare(cfg)?;
    let density = deconv_density(&p.sample, &p.table, &p.grid)?;
    let d = p.grid.dim();
    let mut csv = String::from(if d == 1 { "x1,fhat\n" } else { "x1,x2,fhat\n" });
    for (x, f) in p.grid.nodes().iter().zip(density.values()) {
        for xi in x {
            write!(csv, "{xi:e},").unwrap();
        }
        writeln!(csv, "{f:e}").unwrap();
    }
    write_file(&out.join("density.csv"), &csv)
}

/// Minimise the deconvolved risk and write `codebook.json`.
pub fn cmd_cluster(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    echo_config(cfg, out)?;
    let p = prepare(cfg)?;
    let density = deconv_density(&p.sample, &p.table, &p.grid)?;
    let report = multi_start_minimize(
        &p.grid,
        density.values(),
        cfg.clustering.k,
        cfg.clustering.restarts,
        derive_seed(cfg.master_seed, &[20]),
        &cfg.lloyd(),
    )?;
    let json = serde_json::json!({
        "centers": report.final_codebook.centers(),
        "risk": report.final_risk,
        "iterations": report.iterations,
        "converged": report.converged,
        "reseed_events": report.reseed_events,
        "restarts": report.restarts_used,
        "lambda": p.lambda,
        "sample_size": p.sample.len(),
    });
    write_file(&out.join("codebook.json"), &pretty(&json))
}

pub fn rate_config(cfg: &ExperimentConfig) -> Result<RateConfig> {
    let source = cfg.source_model()?;
    let noise = cfg.noise_model()?;
    let mut rc = RateConfig::new(source, noise, cfg.clustering.k);
    rc.kernel = cfg.base_kernel()?;
    rc.inversion = cfg.inversion();
    rc.nodes_per_axis = cfg.nodes_per_axis()?;
    rc.margin_factor = cfg.grid.margin_factor;
    rc.sample_sizes = cfg.experiment.sample_sizes.clone();
    rc.replications = cfg.experiment.replications;
    rc.restarts = cfg.clustering.restarts;
    rc.naive_restarts = cfg.clustering.naive_restarts;
    rc.bandwidth = cfg
        .bandwidth_rule()
        .ok_or_else(|| Error::Config("rate-experiment needs a theoretical or fixed bandwidth rule".into()))?;
    rc.noise_tail_prob = cfg.experiment.noise_tail_prob;
    rc.reference_refinement = cfg.experiment.reference_refinement;
    rc.reference_restart_factor = cfg.experiment.reference_restart_factor;
    rc.hessian_step = cfg.experiment.hessian_step;
    rc.lloyd = cfg.lloyd();
    rc.master_seed = cfg.master_seed;
    Ok(rc)
}

/// Write `rate.csv` (one row per replication) and `rate_summary.json`.
pub fn cmd_rate(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    echo_config(cfg, out)?;
    let outcome = run_rate_experiment(&rate_config(cfg)?)?;
    write_file(&out.join("rate.csv"), &outcome.to_csv())?;
    write_file(&out.join("rate_summary.json"), &pretty(&outcome.summary_json()))
}

pub fn bias_config(cfg: &ExperimentConfig) -> Result<BiasConfig> {
    let (a, b) = cfg.bias_codebooks()?;
    let mut bc = BiasConfig::new(cfg.source_model()?, a, b);
    bc.kernel = cfg.base_kernel()?;
    bc.inversion = cfg.inversion();
    bc.bandwidths = cfg.experiment.bias_bandwidths.clone();
    bc.nodes_per_axis = cfg.nodes_per_axis()?;
    bc.margin_factor = cfg.grid.margin_factor;
    Ok(bc)
}

/// Write `bias.csv` and `bias_summary.json`.
pub fn cmd_bias(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    echo_config(cfg, out)?;
    let outcome = run_bias_experiment(&bias_config(cfg)?)?;
    write_file(&out.join("bias.csv"), &outcome.to_csv())?;
    let json = serde_json::to_value(&outcome).expect("plain numeric outcome");
    write_file(&out.join("bias_summary.json"), &pretty(&json))
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

/// Base kernel sampled as `(1/lambda) K(t/lambda)` at the given offsets;
/// the reference against which identity-noise dumps are compared.
pub fn sampled_base_kernel(kernel: &BaseKernel, lambda: f64, offsets: &[f64]) -> Vec<f64> {
    offsets.iter().map(|t| kernel.spatial(t / lambda) / lambda).collect()
}
