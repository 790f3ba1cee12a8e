//! Deconvolution kernels.
//!
//! For a base kernel `K` whose Fourier transform is supported in
//! `[-R, R]` and a noise law with characteristic function `phi`, the scaled
//! deconvolution kernel on one axis is
//!
//! ```text
//! (1/lambda) K_eta(s/lambda) = 1/(2 pi lambda) * int_{-R}^{R} F[K](u) / phi(u/lambda) * exp(-i u s / lambda) du
//! ```
//!
//! The integral is always taken over the fixed support `[-R, R]` with a
//! composite trapezoid rule, so the node count does not depend on `lambda`.
//! Tables store values and first derivatives on an offset lattice and are
//! evaluated off-lattice by cubic Hermite interpolation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::deconv_risk::QuadratureGrid;
use crate::error::{Error, Result};
use crate::noise::NoiseModel;

/// Moment order of a base kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelOrder {
    Finite(u32),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    /// `F[K] = 1` on `[-1, 1]`; spatially `sin(t) / (pi t)`.
    Sinc,
    /// `F[K] = 1` on `[-a, a]`, cubic smoothstep down to 0 at `|u| = 1`.
    FlatTop { taper_start: f64 },
}

/// One-dimensional base kernel with compactly supported Fourier transform.
/// The d-dimensional kernel is the product of one such kernel per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseKernel {
    kind: KernelKind,
}

impl Default for BaseKernel {
    fn default() -> Self {
        Self {
            kind: KernelKind::FlatTop { taper_start: 0.5 },
        }
    }
}

impl BaseKernel {
    pub fn new(kind: KernelKind) -> Result<Self> {
        if let KernelKind::FlatTop { taper_start } = kind {
            if !(taper_start > 0.0 && taper_start < 1.0) {
                return Err(Error::Parameter(format!(
                    "flat-top taper_start must lie in (0, 1), got {taper_start}"
                )));
            }
        }
        Ok(Self { kind })
    }

    pub fn sinc() -> Self {
        Self {
            kind: KernelKind::Sinc,
        }
    }

    pub fn flat_top(taper_start: f64) -> Result<Self> {
        Self::new(KernelKind::FlatTop { taper_start })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn support_radius(&self) -> f64 {
        1.0
    }

    /// Both kernels have a Fourier transform flat at the origin, so every
    /// moment of positive order vanishes.
    pub fn order(&self) -> KernelOrder {
        KernelOrder::Infinite
    }

    /// Fourier transform `F[K](u)`: real, even, bounded by one.
    pub fn ft_profile(&self, u: f64) -> f64 {
        let a = u.abs();
        match self.kind {
            KernelKind::Sinc => {
                if a <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            KernelKind::FlatTop { taper_start } => {
                if a <= taper_start {
                    1.0
                } else if a >= 1.0 {
                    0.0
                } else {
                    let s = (a - taper_start) / (1.0 - taper_start);
                    1.0 - s * s * (3.0 - 2.0 * s)
                }
            }
        }
    }

    /// Spatial kernel `K(t)` in closed form.
    pub fn spatial(&self, t: f64) -> f64 {
        let t = t.abs();
        match self.kind {
            KernelKind::Sinc => {
                if t < 1e-8 {
                    (1.0 - t * t / 6.0) / PI
                } else {
                    t.sin() / (PI * t)
                }
            }
            KernelKind::FlatTop { taper_start } => flat_top_spatial(taper_start, t),
        }
    }
}

/// `(1/pi) int_0^1 p(u) cos(t u) du` for the flat-top profile `p`, `t >= 0`.
fn flat_top_spatial(a: f64, t: f64) -> f64 {
    let w = 1.0 - a;
    let b = t * w;
    if b <= 4.0 {
        // Split at the taper start; the tapered piece is expanded in
        // moments of q(s) = 1 - 3 s^2 + 2 s^3 on [0, 1].
        let plateau = if t < 1e-12 { a } else { (t * a).sin() / t };
        let moment = |j: i32| {
            let j = j as f64;
            1.0 / (j + 1.0) - 3.0 / (j + 3.0) + 2.0 / (j + 4.0)
        };
        let (mut c, mut s) = (0.0, 0.0);
        let mut term = 1.0; // b^j / j!
        for j in 0..40 {
            let sign = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if j % 2 == 0 {
                c += sign * term * moment(j);
            } else {
                s += sign * term * moment(j);
            }
            term *= b / (j + 1) as f64;
        }
        let taper = w * ((t * a).cos() * c - (t * a).sin() * s);
        (plateau + taper) / PI
    } else {
        // Three integrations by parts; p(1) = p'(a) = p'(1) = 0.
        let w2 = w * w;
        let bracket = 6.0 * (t.sin() + (a * t).sin()) / (w2 * t)
            - 12.0 * ((a * t).cos() - t.cos()) / (w2 * w * t * t);
        -bracket / (PI * t * t)
    }
}

/// Numerical settings for the Fourier inversion and table layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionSettings {
    /// Trapezoid panels over `[-R, R]`; rounded up to an even number.
    pub frequency_panels: usize,
    /// Smallest admissible `|phi|` on the integration range.
    pub cf_floor: f64,
    /// Largest admissible imaginary residual relative to the table sup.
    pub imag_tolerance: f64,
    /// Table step as a fraction of `lambda / R` (the kernel's period scale).
    pub table_resolution: f64,
}

impl Default for InversionSettings {
    fn default() -> Self {
        Self {
            frequency_panels: 4096,
            cf_floor: 1e-12,
            imag_tolerance: 1e-8,
            table_resolution: 0.01,
        }
    }
}

/// Sampled scaled deconvolution kernel on one axis at offsets `m * step`,
/// `m = -half_len..=half_len`, with first derivatives for interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisTable {
    step: f64,
    half_len: usize,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl AxisTable {
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn half_len(&self) -> usize {
        self.half_len
    }

    pub fn truncation_radius(&self) -> f64 {
        self.step * self.half_len as f64
    }

    /// Values at offsets `-half_len * step ..= half_len * step`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn offsets(&self) -> impl Iterator<Item = f64> + '_ {
        let m = self.half_len as f64;
        (0..self.values.len()).map(move |i| (i as f64 - m) * self.step)
    }

    /// Value at lattice index `m` (may be negative).
    pub fn at(&self, m: isize) -> f64 {
        self.values[(m + self.half_len as isize) as usize]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Kernel value at an arbitrary offset, or `None` outside the table.
    #[inline]
    pub fn eval(&self, offset: f64) -> Option<f64> {
        let x = offset / self.step + self.half_len as f64;
        let last = self.values.len() - 1;
        if !(x >= -1e-9 && x <= last as f64 + 1e-9) {
            return None;
        }
        let x = x.clamp(0.0, last as f64);
        let i = (x.floor() as usize).min(last - 1);
        let t = x - i as f64;
        if t == 0.0 {
            return Some(self.values[i]);
        }
        if t == 1.0 {
            return Some(self.values[i + 1]);
        }
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = 3.0 * t2 - 2.0 * t3;
        let h11 = t3 - t2;
        Some(
            h00 * self.values[i]
                + h10 * self.step * self.slopes[i]
                + h01 * self.values[i + 1]
                + h11 * self.step * self.slopes[i + 1],
        )
    }
}

/// Trapezoid nodes `u_i = (i - P/2) h` on `[-R, R]` with integrand
/// `F[K](u) / phi(u / lambda)`.
struct InversionIntegrand {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<Complex64>,
    symmetric: bool,
}

fn inversion_integrand(
    kernel: &BaseKernel,
    noise_cf: &(dyn Fn(f64) -> Complex64 + Sync),
    lambda: f64,
    settings: &InversionSettings,
) -> Result<InversionIntegrand> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Parameter(format!("bandwidth must be positive, got {lambda}")));
    }
    if settings.frequency_panels < 2 {
        return Err(Error::Parameter("need at least 2 frequency panels".into()));
    }
    let panels = settings.frequency_panels + settings.frequency_panels % 2;
    let half = (panels / 2) as isize;
    let r = kernel.support_radius();
    let h = r / half as f64;

    let mut nodes = Vec::with_capacity(panels + 1);
    let mut weights = Vec::with_capacity(panels + 1);
    let mut values = Vec::with_capacity(panels + 1);
    for i in -half..=half {
        let u = i as f64 * h;
        let phi = noise_cf(u / lambda);
        let mag = phi.norm();
        if !(mag >= settings.cf_floor) {
            return Err(Error::IllPosed {
                frequency: u / lambda,
                magnitude: mag,
                floor: settings.cf_floor,
            });
        }
        nodes.push(u);
        weights.push(if i.abs() == half { 0.5 * h } else { h });
        values.push(Complex64::new(kernel.ft_profile(u), 0.0) / phi);
    }
    let n = values.len();
    let symmetric = (0..n).all(|i| values[i].im == 0.0 && values[i].re == values[n - 1 - i].re);
    Ok(InversionIntegrand {
        nodes,
        weights,
        values,
        symmetric,
    })
}

impl InversionIntegrand {
    /// Value and derivative of `(1/lambda) K_eta(s/lambda)` for a real even
    /// integrand, using only the non-negative frequency half.
    fn even_at(&self, s: f64, lambda: f64) -> (f64, f64) {
        let mid = self.nodes.len() / 2;
        let scale = 1.0 / (2.0 * PI * lambda);
        // exp(i u s / lambda) advanced by rotation, re-anchored every 64 nodes
        let theta = self.nodes[mid + 1] * s / lambda;
        let rot = Complex64::new(theta.cos(), theta.sin());
        let mut phase = Complex64::new(1.0, 0.0);
        let (mut val, mut der) = (0.0, 0.0);
        for i in mid..self.nodes.len() {
            if (i - mid).is_multiple_of(64) {
                let th = self.nodes[i] * s / lambda;
                phase = Complex64::new(th.cos(), th.sin());
            }
            let mult = if i == mid { 1.0 } else { 2.0 };
            let wg = mult * self.weights[i] * self.values[i].re;
            val += wg * phase.re;
            der -= wg * self.nodes[i] * phase.im;
            phase *= rot;
        }
        (scale * val, scale * der / lambda)
    }

    /// Complex value and derivative for a general integrand.
    fn general_at(&self, s: f64, lambda: f64) -> (Complex64, Complex64) {
        let scale = 1.0 / (2.0 * PI * lambda);
        let mut val = Complex64::new(0.0, 0.0);
        let mut der = Complex64::new(0.0, 0.0);
        for ((&u, &w), &g) in self.nodes.iter().zip(&self.weights).zip(&self.values) {
            let th = -u * s / lambda;
            let e = Complex64::new(th.cos(), th.sin());
            let term = g * e * w;
            val += term;
            der += term * Complex64::new(0.0, -u / lambda);
        }
        (val * scale, der * scale)
    }
}

fn axis_table(
    kernel: &BaseKernel,
    noise_cf: &(dyn Fn(f64) -> Complex64 + Sync),
    lambda: f64,
    offset_step: f64,
    truncation_radius: f64,
    settings: &InversionSettings,
) -> Result<AxisTable> {
    if !(offset_step.is_finite() && offset_step > 0.0) {
        return Err(Error::Parameter(format!("offset step must be positive, got {offset_step}")));
    }
    if !(truncation_radius.is_finite() && truncation_radius >= 0.0) {
        return Err(Error::Parameter(format!(
            "truncation radius must be non-negative, got {truncation_radius}"
        )));
    }
    let integrand = inversion_integrand(kernel, noise_cf, lambda, settings)?;
    let half_len = (truncation_radius / offset_step - 1e-9).ceil().max(1.0) as usize;
    let len = 2 * half_len + 1;

    let (values, slopes) = if integrand.symmetric {
        let half: Vec<(f64, f64)> = (0..=half_len)
            .into_par_iter()
            .map(|m| integrand.even_at(m as f64 * offset_step, lambda))
            .collect();
        let mut values = vec![0.0; len];
        let mut slopes = vec![0.0; len];
        for (m, &(v, d)) in half.iter().enumerate() {
            values[half_len + m] = v;
            values[half_len - m] = v;
            slopes[half_len + m] = d;
            slopes[half_len - m] = -d;
        }
        slopes[half_len] = 0.0;
        (values, slopes)
    } else {
        let full: Vec<(Complex64, Complex64)> = (0..len)
            .into_par_iter()
            .map(|i| integrand.general_at((i as f64 - half_len as f64) * offset_step, lambda))
            .collect();
        let sup = full.iter().fold(0.0_f64, |acc, (v, _)| acc.max(v.re.abs()));
        for (i, (v, _)) in full.iter().enumerate() {
            if v.im.abs() > settings.imag_tolerance * sup {
                return Err(Error::AsymmetricNoise {
                    offset: (i as f64 - half_len as f64) * offset_step,
                    residual: v.im.abs(),
                });
            }
        }
        full.into_iter().map(|(v, d)| (v.re, d.re)).unzip()
    };

    Ok(AxisTable {
        step: offset_step,
        half_len,
        values,
        slopes,
    })
}

/// Samples of `t -> (1/lambda) K_eta(t/lambda)` at offsets `m * offset_step`
/// with `|m * offset_step| <= truncation_radius` (rounded outward to a whole
/// step), ordered from the most negative offset.
pub fn deconv_kernel_axis(
    kernel: &BaseKernel,
    noise_cf: &(dyn Fn(f64) -> Complex64 + Sync),
    lambda: f64,
    offset_step: f64,
    truncation_radius: f64,
    settings: &InversionSettings,
) -> Result<Vec<f64>> {
    axis_table(kernel, noise_cf, lambda, offset_step, truncation_radius, settings).map(|t| t.values)
}

/// Evaluate `(1/lambda) K_eta(s/lambda)` directly at one offset, without a
/// table. Quadratic in cost; meant for spot checks and oracles.
pub fn deconv_kernel_at(
    kernel: &BaseKernel,
    noise_cf: &(dyn Fn(f64) -> Complex64 + Sync),
    lambda: f64,
    offset: f64,
    settings: &InversionSettings,
) -> Result<f64> {
    let integrand = inversion_integrand(kernel, noise_cf, lambda, settings)?;
    Ok(integrand.general_at(offset, lambda).0.re)
}

/// Per-axis deconvolution kernel tables covering every offset between a
/// point of the sample box and a point of the grid box.
#[derive(Debug, Clone, PartialEq)]
pub struct DeconvKernelTable {
    bandwidths: Vec<f64>,
    axes: Vec<AxisTable>,
    sample_box: Vec<(f64, f64)>,
}

impl DeconvKernelTable {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidths
    }

    pub fn axis(&self, j: usize) -> &AxisTable {
        &self.axes[j]
    }

    pub fn sample_box(&self) -> &[(f64, f64)] {
        &self.sample_box
    }

    /// Whether `z` lies in the configured sample box.
    pub fn covers(&self, z: &[f64]) -> bool {
        z.len() == self.dim()
            && z
                .iter()
                .zip(&self.sample_box)
                .all(|(&x, &(lo, hi))| x >= lo && x <= hi)
    }

    /// Product kernel `prod_j (1/lambda_j) K_eta,j(offset_j / lambda_j)`.
    pub fn eval(&self, offset: &[f64]) -> Option<f64> {
        let mut acc = 1.0;
        for (t, &o) in self.axes.iter().zip(offset) {
            acc *= t.eval(o)?;
        }
        Some(acc)
    }
}

/// Build the tables for `grid` and samples confined to `sample_box`.
///
/// On each axis the offset step is the grid spacing divided by the smallest
/// integer that brings it below `table_resolution * lambda / R`, so node
/// offsets of grid-aligned queries fall on the lattice.
pub fn build_kernel_table(
    kernel: &BaseKernel,
    noise: &NoiseModel,
    bandwidths: &[f64],
    grid: &QuadratureGrid,
    sample_box: &[(f64, f64)],
    settings: &InversionSettings,
) -> Result<DeconvKernelTable> {
    let d = grid.dim();
    if bandwidths.len() != d || noise.dim() != d || sample_box.len() != d {
        return Err(Error::Parameter(format!(
            "dimension mismatch: grid d = {d}, bandwidths {}, noise {}, sample box {}",
            bandwidths.len(),
            noise.dim(),
            sample_box.len()
        )));
    }
    let mut axes = Vec::with_capacity(d);
    for j in 0..d {
        let (slo, shi) = sample_box[j];
        if !(slo.is_finite() && shi.is_finite() && slo <= shi) {
            return Err(Error::Parameter(format!("invalid sample box [{slo}, {shi}]")));
        }
        let (glo, ghi) = grid.bounds()[j];
        let radius = (shi - glo).max(ghi - slo);
        let spacing = grid.spacing(j);
        let target = settings.table_resolution * bandwidths[j] / kernel.support_radius();
        let refine = (spacing / target).ceil().max(1.0);
        let step = spacing / refine;
        let component = *noise.component(j);
        let cf = move |t: f64| component.cf(t);
        axes.push(axis_table(kernel, &cf, bandwidths[j], step, radius, settings)?);
    }
    Ok(DeconvKernelTable {
        bandwidths: bandwidths.to_vec(),
        axes,
        sample_box: sample_box.to_vec(),
    })
}
