use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use statrs::distribution::{ContinuousCDF, Normal as NormalDist};

use crate::deconv_risk::QuadratureGrid;
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::points::PointSet;
use crate::rng::seeded_rng;

#[derive(Debug, Clone, PartialEq)]
pub enum SourceKind {
    /// Uniform law on an axis-aligned box.
    UniformBox { bounds: Vec<(f64, f64)> },
    /// Gaussian mixture with diagonal covariances, conditioned on the
    /// closed ball `B(0, radius)`.
    TruncatedGaussianMixture {
        weights: Vec<f64>,
        means: Vec<Vec<f64>>,
        stds: Vec<Vec<f64>>,
    },
}

/// Law of the clean variable `X`, supported in `B(0, radius)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    kind: SourceKind,
    radius: f64,
    holder_gamma: f64,
    /// Mixture mass inside the ball (1 for the uniform box).
    ball_mass: f64,
}

impl SourceModel {
    pub fn uniform_box(bounds: Vec<(f64, f64)>, holder_gamma: f64) -> Result<Self> {
        check_dim(bounds.len())?;
        check_gamma(holder_gamma)?;
        for &(lo, hi) in &bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Parameter(format!("invalid box side [{lo}, {hi}]")));
            }
        }
        let radius = bounds
            .iter()
            .map(|(lo, hi)| lo.abs().max(hi.abs()).powi(2))
            .sum::<f64>()
            .sqrt();
        Ok(Self {
            kind: SourceKind::UniformBox { bounds },
            radius,
            holder_gamma,
            ball_mass: 1.0,
        })
    }

    pub fn truncated_gaussian_mixture(
        weights: Vec<f64>,
        means: Vec<Vec<f64>>,
        stds: Vec<Vec<f64>>,
        radius: f64,
        holder_gamma: f64,
    ) -> Result<Self> {
        check_gamma(holder_gamma)?;
        if weights.is_empty() || weights.len() != means.len() || weights.len() != stds.len() {
            return Err(Error::Parameter(
                "mixture needs matching non-empty weights, means and stds".into(),
            ));
        }
        if weights.iter().any(|w| !(*w > 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter(format!(
                "mixture weights must be positive and sum to 1, got {weights:?}"
            )));
        }
        let dim = means[0].len();
        check_dim(dim)?;
        for (m, s) in means.iter().zip(&stds) {
            if m.len() != dim || s.len() != dim {
                return Err(Error::Parameter("mixture component dimension mismatch".into()));
            }
            if s.iter().any(|v| !(*v > 0.0)) || m.iter().any(|v| !v.is_finite()) {
                return Err(Error::Parameter("mixture stds must be positive, means finite".into()));
            }
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Parameter(format!("truncation radius must be positive, got {radius}")));
        }
        let kind = SourceKind::TruncatedGaussianMixture { weights, means, stds };
        let mut model = Self {
            kind,
            radius,
            holder_gamma,
            ball_mass: 1.0,
        };
        model.ball_mass = model.mixture_ball_mass();
        if model.ball_mass < 0.01 {
            return Err(Error::Config(format!(
                "only {:.3e} of the mixture mass lies in B(0, {radius})",
                model.ball_mass
            )));
        }
        Ok(model)
    }

    pub fn kind(&self) -> &SourceKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            SourceKind::UniformBox { bounds } => bounds.len(),
            SourceKind::TruncatedGaussianMixture { means, .. } => means[0].len(),
        }
    }

    /// Radius `M` with `P(B(0, M)) = 1`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn holder_gamma(&self) -> f64 {
        self.holder_gamma
    }

    /// Smallest axis-aligned box containing the support.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        match &self.kind {
            SourceKind::UniformBox { bounds } => bounds.clone(),
            SourceKind::TruncatedGaussianMixture { .. } => vec![(-self.radius, self.radius); self.dim()],
        }
    }

    /// Midpoint grid on the bounding box widened by `margin` on every side.
    pub fn grid(&self, margin: f64, nodes_per_axis: &[usize]) -> Result<QuadratureGrid> {
        let b: Vec<(f64, f64)> = self
            .bounding_box()
            .into_iter()
            .map(|(lo, hi)| (lo - margin, hi + margin))
            .collect();
        QuadratureGrid::new(&b, nodes_per_axis)
    }

    fn mixture_ball_mass(&self) -> f64 {
        let SourceKind::TruncatedGaussianMixture { weights, means, stds } = &self.kind else {
            return 1.0;
        };
        let m = self.radius;
        if means[0].len() == 1 {
            weights
                .iter()
                .zip(means.iter().zip(stds))
                .map(|(w, (mu, s))| {
                    let n = NormalDist::new(mu[0], s[0]).expect("valid normal");
                    w * (n.cdf(m) - n.cdf(-m))
                })
                .sum()
        } else {
            // Simpson in r, periodic trapezoid in theta.
            let (nr, nt) = (2000usize, 512usize);
            let hr = m / nr as f64;
            let ht = std::f64::consts::TAU / nt as f64;
            let mut acc = 0.0;
            for i in 0..=nr {
                let r = i as f64 * hr;
                let wr = if i == 0 || i == nr {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                let mut ring = 0.0;
                for t in 0..nt {
                    let th = t as f64 * ht;
                    ring += self.untruncated_density(&[r * th.cos(), r * th.sin()]);
                }
                acc += wr * r * ring * ht;
            }
            acc * hr / 3.0
        }
    }

    fn untruncated_density(&self, x: &[f64]) -> f64 {
        let SourceKind::TruncatedGaussianMixture { weights, means, stds } = &self.kind else {
            return 0.0;
        };
        weights
            .iter()
            .zip(means.iter().zip(stds))
            .map(|(w, (mu, s))| {
                w * x
                    .iter()
                    .zip(mu.iter().zip(s))
                    .map(|(xi, (m, sd))| {
                        (-(xi - m).powi(2) / (2.0 * sd * sd)).exp() / (sd * (std::f64::consts::TAU).sqrt())
                    })
                    .product::<f64>()
            })
            .sum()
    }

    /// Density of `X` with respect to Lebesgue measure.
    pub fn density(&self, x: &[f64]) -> f64 {
        match &self.kind {
            SourceKind::UniformBox { bounds } => {
                if x.iter().zip(bounds).all(|(v, (lo, hi))| v >= lo && v <= hi) {
                    1.0 / bounds.iter().map(|(lo, hi)| hi - lo).product::<f64>()
                } else {
                    0.0
                }
            }
            SourceKind::TruncatedGaussianMixture { .. } => {
                if x.iter().map(|v| v * v).sum::<f64>() <= self.radius * self.radius {
                    self.untruncated_density(x) / self.ball_mass
                } else {
                    0.0
                }
            }
        }
    }

    /// The density tabulated on a grid.
    pub fn density_on(&self, grid: &QuadratureGrid) -> Vec<f64> {
        grid.tabulate(|x| self.density(x))
    }

    /// `n` i.i.d. draws. Mixtures are sampled by rejection against the ball.
    pub fn sample(&self, n: usize, seed: u64) -> Result<PointSet> {
        let mut rng = seeded_rng(seed);
        let d = self.dim();
        let mut coords = Vec::with_capacity(n * d);
        match &self.kind {
            SourceKind::UniformBox { bounds } => {
                let axes: Vec<Uniform<f64>> = bounds
                    .iter()
                    .map(|&(lo, hi)| Uniform::new_inclusive(lo, hi).expect("valid bounds"))
                    .collect();
                for _ in 0..n {
                    for u in &axes {
                        coords.push(u.sample(&mut rng));
                    }
                }
            }
            SourceKind::TruncatedGaussianMixture { weights, means, stds } => {
                let comps: Vec<Vec<Normal<f64>>> = means
                    .iter()
                    .zip(stds)
                    .map(|(mu, s)| {
                        mu.iter()
                            .zip(s)
                            .map(|(&m, &sd)| Normal::new(m, sd).expect("valid normal"))
                            .collect()
                    })
                    .collect();
                let mut point = vec![0.0; d];
                let (mut attempts, mut accepted) = (0usize, 0usize);
                while accepted < n {
                    attempts += 1;
                    let u: f64 = rng.random();
                    let mut j = 0;
                    let mut cum = weights[0];
                    while u >= cum && j + 1 < weights.len() {
                        j += 1;
                        cum += weights[j];
                    }
                    for (p, dist) in point.iter_mut().zip(&comps[j]) {
                        *p = dist.sample(&mut rng);
                    }
                    if point.iter().map(|v| v * v).sum::<f64>() <= self.radius * self.radius {
                        coords.extend_from_slice(&point);
                        accepted += 1;
                    } else if attempts >= 1000 && accepted * 100 < attempts {
                        return Err(Error::Config(format!(
                            "rejection sampler acceptance {accepted}/{attempts} is below 1%; truncation radius too tight"
                        )));
                    }
                }
            }
        }
        PointSet::new(d, coords)
    }
}

/// `Z = X + eps` with an independent noise draw.
pub fn contaminate(x: &PointSet, noise: &NoiseModel, seed: u64) -> Result<PointSet> {
    if x.dim() != noise.dim() {
        return Err(Error::Parameter(format!(
            "sample dimension {} does not match noise dimension {}",
            x.dim(),
            noise.dim()
        )));
    }
    let eps = noise.sample(x.len(), seed);
    let coords = x.coords().iter().zip(eps.coords()).map(|(a, b)| a + b).collect();
    PointSet::new(x.dim(), coords)
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > 2 {
        return Err(Error::UnsupportedDimension(d));
    }
    Ok(())
}

fn check_gamma(g: f64) -> Result<()> {
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::Parameter(format!("Hölder exponent must be positive, got {g}")));
    }
    Ok(())
}
