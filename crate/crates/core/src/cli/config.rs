use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::clustering::{Codebook, LloydOptions};
use crate::error::{Error, Result};
use crate::experiments::{BandwidthRule, SourceModel};
use crate::kernels::{BaseKernel, InversionSettings};
use crate::noise::{NoiseComponent, NoiseModel};

/// Complete configuration of one run. Unknown keys are rejected and every
/// omitted key takes its default, so the serialized form is the effective
/// configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub source: SourceSection,
    pub noise: NoiseSection,
    pub kernel: KernelSection,
    pub grid: GridSection,
    pub clustering: ClusteringSection,
    pub bandwidth: BandwidthSection,
    pub experiment: ExperimentSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKindName {
    Uniform,
    Mixture,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceSection {
    pub kind: SourceKindName,
    /// Box sides for the uniform source.
    pub bounds: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub stds: Vec<Vec<f64>>,
    /// Truncation radius of the mixture.
    pub radius: f64,
    pub holder_gamma: f64,
}

impl Default for SourceSection {
    fn default() -> Self {
        Self {
            kind: SourceKindName::Mixture,
            bounds: vec![[0.0, 1.0]],
            weights: vec![0.5, 0.5],
            means: vec![vec![-1.0], vec![1.0]],
            stds: vec![vec![0.25], vec![0.25]],
            radius: 2.5,
            holder_gamma: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKindName {
    Laplace,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    /// One entry per axis.
    pub kinds: Vec<NoiseKindName>,
    /// Laplace scales per axis; ignored on identity axes.
    pub scales: Vec<f64>,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            kinds: vec![NoiseKindName::Laplace],
            scales: vec![0.3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKindName {
    Sinc,
    FlatTop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    pub kind: KernelKindName,
    pub taper_start: f64,
    pub frequency_panels: usize,
    pub cf_floor: f64,
    pub imag_tolerance: f64,
    pub table_resolution: f64,
}

impl Default for KernelSection {
    fn default() -> Self {
        let s = InversionSettings::default();
        Self {
            kind: KernelKindName::FlatTop,
            taper_start: 0.5,
            frequency_panels: s.frequency_panels,
            cf_floor: s.cf_floor,
            imag_tolerance: s.imag_tolerance,
            table_resolution: s.table_resolution,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub nodes_per_axis: Vec<usize>,
    /// Margin around the source support, in units of the largest bandwidth.
    pub margin_factor: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            nodes_per_axis: vec![512],
            margin_factor: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusteringSection {
    pub k: usize,
    pub restarts: usize,
    pub naive_restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub mass_floor: f64,
}

impl Default for ClusteringSection {
    fn default() -> Self {
        let l = LloydOptions::default();
        Self {
            k: 2,
            restarts: 4,
            naive_restarts: 4,
            max_iters: l.max_iters,
            tol: l.tol,
            mass_floor: l.mass_floor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthRuleName {
    Theoretical,
    Fixed,
    Cv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandwidthSection {
    pub rule: BandwidthRuleName,
    pub c0: f64,
    pub value: f64,
    pub candidates: Vec<f64>,
    pub folds: usize,
}

impl Default for BandwidthSection {
    fn default() -> Self {
        Self {
            rule: BandwidthRuleName::Theoretical,
            c0: 1.0,
            value: 0.1,
            candidates: vec![0.1, 0.15, 0.2, 0.3, 0.4],
            folds: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    /// Size of the generated sample for `density` and `cluster`.
    pub sample_size: usize,
    /// Observed sample to use instead of a generated one.
    pub sample_file: Option<PathBuf>,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub reference_refinement: usize,
    pub reference_restart_factor: usize,
    pub hessian_step: f64,
    pub noise_tail_prob: f64,
    pub bias_bandwidths: Vec<f64>,
    pub bias_codebook: Vec<Vec<f64>>,
    pub bias_reference: Vec<Vec<f64>>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            sample_size: 1000,
            sample_file: None,
            sample_sizes: vec![250, 500, 1000, 2000, 4000, 8000],
            replications: 100,
            reference_refinement: 2,
            reference_restart_factor: 8,
            hessian_step: 0.01,
            noise_tail_prob: 1e-12,
            bias_bandwidths: vec![0.4, 0.2, 0.1],
            bias_codebook: vec![vec![-1.0], vec![1.0]],
            bias_reference: vec![vec![-0.6], vec![1.3]],
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let Some(f) = &cfg.experiment.sample_file {
            if f.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.experiment.sample_file = Some(dir.join(f));
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    pub fn dim(&self) -> usize {
        self.noise.kinds.len()
    }

    pub fn source_model(&self) -> Result<SourceModel> {
        let s = &self.source;
        let model = match s.kind {
            SourceKindName::Uniform => SourceModel::uniform_box(s.bounds.iter().map(|b| (b[0], b[1])).collect(), s.holder_gamma),
            SourceKindName::Mixture => {
                SourceModel::truncated_gaussian_mixture(s.weights.clone(), s.means.clone(), s.stds.clone(), s.radius, s.holder_gamma)
            }
        };
        let model = model.map_err(as_config)?;
        if model.dim() != self.dim() {
            return Err(Error::Config(format!(
                "source has dimension {} but noise lists {} axes",
                model.dim(),
                self.dim()
            )));
        }
        Ok(model)
    }

    pub fn noise_model(&self) -> Result<NoiseModel> {
        let n = &self.noise;
        let components = n
            .kinds
            .iter()
            .enumerate()
            .map(|(j, kind)| match kind {
                NoiseKindName::Identity => Ok(NoiseComponent::Identity),
                NoiseKindName::Laplace => {
                    let scale = n
                        .scales
                        .get(j)
                        .copied()
                        .ok_or_else(|| Error::Config(format!("noise axis {j} has no scale")))?;
                    NoiseComponent::laplace(scale).map_err(as_config)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        NoiseModel::new(components).map_err(as_config)
    }

    pub fn base_kernel(&self) -> Result<BaseKernel> {
        match self.kernel.kind {
            KernelKindName::Sinc => Ok(BaseKernel::sinc()),
            KernelKindName::FlatTop => BaseKernel::flat_top(self.kernel.taper_start).map_err(as_config),
        }
    }

    pub fn inversion(&self) -> InversionSettings {
        InversionSettings {
            frequency_panels: self.kernel.frequency_panels,
            cf_floor: self.kernel.cf_floor,
            imag_tolerance: self.kernel.imag_tolerance,
            table_resolution: self.kernel.table_resolution,
        }
    }

    pub fn lloyd(&self) -> LloydOptions {
        LloydOptions {
            max_iters: self.clustering.max_iters,
            tol: self.clustering.tol,
            mass_floor: self.clustering.mass_floor,
            clamp: None,
        }
    }

    /// Deterministic bandwidth rule; `None` for cross-validation.
    pub fn bandwidth_rule(&self) -> Option<BandwidthRule> {
        match self.bandwidth.rule {
            BandwidthRuleName::Theoretical => Some(BandwidthRule::Theoretical { c0: self.bandwidth.c0 }),
            BandwidthRuleName::Fixed => Some(BandwidthRule::Fixed(self.bandwidth.value)),
            BandwidthRuleName::Cv => None,
        }
    }

    pub fn nodes_per_axis(&self) -> Result<Vec<usize>> {
        let g = &self.grid.nodes_per_axis;
        match (g.len(), self.dim()) {
            (a, b) if a == b => Ok(g.clone()),
            (1, d) => Ok(vec![g[0]; d]),
            (a, b) => Err(Error::Config(format!("grid lists {a} axes for a {b}-dimensional problem"))),
        }
    }

    pub fn bias_codebooks(&self) -> Result<(Codebook, Codebook)> {
        let a = Codebook::new(self.experiment.bias_codebook.clone()).map_err(as_config)?;
        let b = Codebook::new(self.experiment.bias_reference.clone()).map_err(as_config)?;
        Ok((a, b))
    }
}

/// Invalid values read from a file are configuration errors.
fn as_config(e: Error) -> Error {
    match e {
        Error::Parameter(m) => Error::Config(m),
        other => other,
    }
}
