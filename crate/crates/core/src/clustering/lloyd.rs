use super::Codebook;
use crate::deconv_risk::QuadratureGrid;
use crate::error::{Error, Result};
use crate::points::PointSet;

#[derive(Debug, Clone, PartialEq)]
pub struct LloydOptions {
    pub max_iters: usize,
    /// Stop once no center moves farther than this.
    pub tol: f64,
    /// A cell whose signed mass is at most `mass_floor * total positive
    /// mass` has no usable centroid and triggers a reseed.
    pub mass_floor: f64,
    /// Optional box that every center is projected onto after each update.
    pub clamp: Option<Vec<(f64, f64)>>,
}

impl Default for LloydOptions {
    fn default() -> Self {
        Self {
            max_iters: 200,
            tol: 1e-9,
            mass_floor: 1e-10,
            clamp: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LloydReport {
    /// Canonically ordered.
    pub final_codebook: Codebook,
    pub final_risk: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restarts_used: usize,
    pub reseed_events: usize,
}

/// Weighted Lloyd iteration against a density tabulated on a grid. Node
/// weights are `grid.weight() * density`, so they may be negative.
pub fn weighted_lloyd(
    grid: &QuadratureGrid,
    density: &[f64],
    init: &Codebook,
    opts: &LloydOptions,
) -> Result<LloydReport> {
    if density.len() != grid.len() {
        return Err(Error::Parameter(format!(
            "density has {} values for a grid of {} nodes",
            density.len(),
            grid.len()
        )));
    }
    let weights: Vec<f64> = density.iter().map(|f| f * grid.weight()).collect();
    lloyd_on_points(grid.nodes(), &weights, init, opts)
}

/// Weighted Lloyd iteration on arbitrary weighted points.
///
/// Each round assigns every point to its nearest center (ties to the lowest
/// index) and moves each center to the signed-weighted mean of its cell.
pub fn lloyd_on_points(
    points: &PointSet,
    weights: &[f64],
    init: &Codebook,
    opts: &LloydOptions,
) -> Result<LloydReport> {
    let d = points.dim();
    let k = init.k();
    if init.dim() != d {
        return Err(Error::Parameter(format!(
            "codebook dimension {} does not match points of dimension {d}",
            init.dim()
        )));
    }
    if weights.len() != points.len() {
        return Err(Error::Parameter("one weight per point is required".into()));
    }
    if let Some(b) = &opts.clamp {
        if b.len() != d {
            return Err(Error::Parameter("clamp box dimension mismatch".into()));
        }
    }
    let total_pos: f64 = weights.iter().filter(|w| **w > 0.0).sum();
    if total_pos <= 0.0 {
        return Err(Error::Degenerate("no point carries positive weight".into()));
    }
    let floor = opts.mass_floor * total_pos;

    let mut centers = init.flatten();
    let mut assign = vec![usize::MAX; points.len()];
    let mut prev_assign = assign.clone();
    let mut reseeded_last = false;
    let mut iterations = 0;
    let mut converged = false;
    let mut reseed_events = 0;

    for round in 0..opts.max_iters {
        let book = Codebook::from_flat(d, &centers)?;
        for (a, x) in assign.iter_mut().zip(points.iter()) {
            *a = book.nearest(x).0;
        }
        if round > 0 && !reseeded_last && assign == prev_assign {
            converged = true;
            break;
        }

        let mut mass = vec![0.0; k];
        let mut sums = vec![0.0; k * d];
        for ((x, &w), &j) in points.iter().zip(weights).zip(&assign) {
            mass[j] += w;
            for (s, &xi) in sums[j * d..(j + 1) * d].iter_mut().zip(x) {
                *s += w * xi;
            }
        }

        let mut next = centers.clone();
        let mut degenerate = Vec::new();
        for j in 0..k {
            if mass[j] > floor {
                for i in 0..d {
                    next[j * d + i] = sums[j * d + i] / mass[j];
                }
                if let Some(b) = &opts.clamp {
                    for i in 0..d {
                        next[j * d + i] = next[j * d + i].clamp(b[i].0, b[i].1);
                    }
                }
            } else {
                degenerate.push(j);
            }
        }
        reseeded_last = !degenerate.is_empty();
        for &j in &degenerate {
            let idx = worst_fit(points, weights, &next, d, &degenerate, j);
            next[j * d..(j + 1) * d].copy_from_slice(points.point(idx));
            reseed_events += 1;
        }

        let shift = centers
            .chunks(d)
            .zip(next.chunks(d))
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        centers = next;
        iterations += 1;
        std::mem::swap(&mut assign, &mut prev_assign);
        if !reseeded_last && shift < opts.tol {
            converged = true;
            break;
        }
    }

    let final_codebook = Codebook::from_flat(d, &centers)?.canonical();
    let final_risk = points
        .iter()
        .zip(weights)
        .map(|(x, w)| w * final_codebook.loss(x))
        .sum();
    Ok(LloydReport {
        final_codebook,
        final_risk,
        iterations,
        converged,
        restarts_used: 1,
        reseed_events,
    })
}

/// Positive-weight point with the largest `w(x) * min |x - c|^2`, measured
/// against every center except degenerate ones not yet reseeded.
fn worst_fit(points: &PointSet, weights: &[f64], centers: &[f64], d: usize, degenerate: &[usize], current: usize) -> usize {
    let active: Vec<&[f64]> = centers
        .chunks(d)
        .enumerate()
        .filter(|(j, _)| !degenerate.contains(j) || *j < current)
        .map(|(_, c)| c)
        .collect();
    let mut best = (usize::MAX, f64::NEG_INFINITY);
    for (i, (x, &w)) in points.iter().zip(weights).enumerate() {
        if w <= 0.0 {
            continue;
        }
        let d2 = active
            .iter()
            .map(|c| c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        let score = w * if d2.is_finite() { d2 } else { 1.0 };
        if score > best.1 {
            best = (i, score);
        }
    }
    best.0
}
