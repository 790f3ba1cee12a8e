//! Measurement-noise laws with polynomially decaying characteristic
//! functions: `|cf(t)| ~ |t|^-beta` as `t -> infinity`, and `cf` never zero.
//!
//! Only moderately ill-posed laws are provided. Gaussian noise is not, since
//! its characteristic function decays exponentially.

use num_complex::Complex64;
use rand::distr::Open01;
use rand::Rng;

use crate::error::{Error, Result};
use crate::points::PointSet;
use crate::rng::seeded_rng;

/// One axis of a product noise law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseComponent {
    /// Laplace law with density `exp(-|x| / scale) / (2 scale)`.
    Laplace { scale: f64 },
    /// No noise on this axis.
    Identity,
}

impl NoiseComponent {
    pub fn laplace(scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Parameter(format!(
                "Laplace scale must be positive and finite, got {scale}"
            )));
        }
        Ok(NoiseComponent::Laplace { scale })
    }

    /// Polynomial decay exponent of the characteristic function.
    pub fn beta(&self) -> f64 {
        match self {
            NoiseComponent::Laplace { .. } => 2.0,
            NoiseComponent::Identity => 0.0,
        }
    }

    pub fn cf(&self, t: f64) -> Complex64 {
        match *self {
            NoiseComponent::Laplace { scale } => {
                Complex64::new(1.0 / (1.0 + scale * scale * t * t), 0.0)
            }
            NoiseComponent::Identity => Complex64::new(1.0, 0.0),
        }
    }

    /// Standard deviation of the law.
    pub fn std_dev(&self) -> f64 {
        match *self {
            NoiseComponent::Laplace { scale } => std::f64::consts::SQRT_2 * scale,
            NoiseComponent::Identity => 0.0,
        }
    }

    /// Radius `r` such that `P(|eps| > r) = tail_prob`.
    pub fn tail_radius(&self, tail_prob: f64) -> f64 {
        match *self {
            NoiseComponent::Laplace { scale } => scale * (1.0 / tail_prob).ln(),
            NoiseComponent::Identity => 0.0,
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseComponent::Laplace { scale } => {
                let u: f64 = rng.sample(Open01);
                let centered = u - 0.5;
                -scale * centered.signum() * (1.0 - 2.0 * centered.abs()).ln()
            }
            NoiseComponent::Identity => 0.0,
        }
    }
}

/// Product noise law on R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    components: Vec<NoiseComponent>,
}

impl NoiseModel {
    pub fn new(components: Vec<NoiseComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Parameter("noise model needs at least one axis".into()));
        }
        Ok(Self { components })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            components: vec![NoiseComponent::Identity; dim.max(1)],
        }
    }

    /// Same Laplace scale on every axis.
    pub fn laplace(dim: usize, scale: f64) -> Result<Self> {
        let c = NoiseComponent::laplace(scale)?;
        Self::new(vec![c; dim])
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[NoiseComponent] {
        &self.components
    }

    pub fn component(&self, axis: usize) -> &NoiseComponent {
        &self.components[axis]
    }

    pub fn beta(&self, axis: usize) -> f64 {
        self.components[axis].beta()
    }

    /// Sum of the per-axis decay exponents.
    pub fn beta_bar(&self) -> f64 {
        self.components.iter().map(NoiseComponent::beta).sum()
    }

    pub fn cf(&self, axis: usize, t: f64) -> Complex64 {
        self.components[axis].cf(t)
    }

    /// All implemented laws are symmetric about zero.
    pub fn is_symmetric(&self) -> bool {
        true
    }

    /// Largest per-axis standard deviation.
    pub fn max_std_dev(&self) -> f64 {
        self.components
            .iter()
            .map(NoiseComponent::std_dev)
            .fold(0.0, f64::max)
    }

    /// Draw `count` i.i.d. noise vectors, axes independent.
    pub fn sample(&self, count: usize, seed: u64) -> PointSet {
        let mut rng = seeded_rng(seed);
        let mut out = PointSet::zeros(self.dim(), count);
        for p in out.coords_mut().chunks_exact_mut(self.dim()) {
            for (x, c) in p.iter_mut().zip(&self.components) {
                *x = c.draw(&mut rng);
            }
        }
        out
    }

    /// Fit the log-log slope of `|cf(t)|` over 32 log-spaced points in
    /// `[1e2, 1e4]`. For a law with exponent `beta` the slope is close to
    /// `-beta`.
    pub fn beta_decay_check(&self, axis: usize) -> Result<f64> {
        let c = self.components.get(axis).ok_or_else(|| {
            Error::Parameter(format!("axis {axis} out of range for d = {}", self.dim()))
        })?;
        if c.beta() <= 0.0 {
            return Err(Error::NotApplicable(format!(
                "axis {axis} has decay exponent 0; there is no slope to fit"
            )));
        }
        let (lo, hi) = (2.0_f64, 4.0_f64);
        let pts: Vec<(f64, f64)> = (0..32)
            .map(|i| {
                let log10_t = lo + (hi - lo) * i as f64 / 31.0;
                let t = 10f64.powf(log10_t);
                (t.ln(), c.cf(t).norm().ln())
            })
            .collect();
        Ok(crate::stats::least_squares(&pts).slope)
    }
}
