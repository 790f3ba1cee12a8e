use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::Codebook;
use crate::points::PointSet;

/// `k` distinct points drawn without replacement with probability
/// proportional to the positive part of `weights`. When fewer than `k`
/// points carry positive weight the rest are drawn uniformly.
pub fn weighted_sample_init<R: Rng>(points: &PointSet, weights: &[f64], k: usize, rng: &mut R) -> Codebook {
    let mut w: Vec<f64> = weights.iter().map(|&x| x.max(0.0)).collect();
    let mut chosen = Vec::with_capacity(k);
    for _ in 0..k {
        let idx = pick(&w, rng).unwrap_or_else(|| pick_uniform_unchosen(points.len(), &chosen, rng));
        w[idx] = 0.0;
        chosen.push(idx);
    }
    to_codebook(points, &chosen)
}

/// k-means++ style spread: the first center is drawn proportionally to the
/// positive weight, each further one proportionally to weight times squared
/// distance to the centers chosen so far.
pub fn spread_init<R: Rng>(points: &PointSet, weights: &[f64], k: usize, rng: &mut R) -> Codebook {
    let pos: Vec<f64> = weights.iter().map(|&x| x.max(0.0)).collect();
    let mut chosen = Vec::with_capacity(k);
    let first = pick(&pos, rng).unwrap_or_else(|| rng.random_range(0..points.len()));
    chosen.push(first);
    let mut d2: Vec<f64> = points.iter().map(|x| sq_dist(x, points.point(first))).collect();
    while chosen.len() < k {
        let score: Vec<f64> = pos.iter().zip(&d2).map(|(w, d)| w * d).collect();
        let idx = pick(&score, rng).unwrap_or_else(|| {
            let mut rest = pos.clone();
            chosen.iter().for_each(|&c| rest[c] = 0.0);
            pick(&rest, rng).unwrap_or_else(|| pick_uniform_unchosen(points.len(), &chosen, rng))
        });
        chosen.push(idx);
        let c = points.point(idx);
        for (d, x) in d2.iter_mut().zip(points.iter()) {
            *d = d.min(sq_dist(x, c));
        }
    }
    to_codebook(points, &chosen)
}

fn pick<R: Rng>(weights: &[f64], rng: &mut R) -> Option<usize> {
    WeightedIndex::new(weights).ok().map(|d| d.sample(rng))
}

fn pick_uniform_unchosen<R: Rng>(len: usize, chosen: &[usize], rng: &mut R) -> usize {
    let free: Vec<usize> = (0..len).filter(|i| !chosen.contains(i)).collect();
    if free.is_empty() {
        rng.random_range(0..len)
    } else {
        free[rng.random_range(0..free.len())]
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn to_codebook(points: &PointSet, idx: &[usize]) -> Codebook {
    Codebook::new(idx.iter().map(|&i| points.point(i).to_vec()).collect())
        .expect("grid points form a valid codebook")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    fn line(n: usize) -> PointSet {
        PointSet::new(1, (0..n).map(|i| i as f64).collect()).unwrap()
    }

    #[test]
    fn weighted_init_avoids_nonpositive_nodes() {
        let pts = line(10);
        let w = [0.0, -1.0, 1.0, 0.0, 2.0, 0.0, -3.0, 0.0, 0.5, 0.0];
        for s in 0..50 {
            let c = weighted_sample_init(&pts, &w, 3, &mut seeded_rng(s));
            let mut got: Vec<f64> = c.flatten();
            got.sort_by(f64::total_cmp);
            assert_eq!(got, vec![2.0, 4.0, 8.0]);
        }
    }

    #[test]
    fn falls_back_when_positive_mass_is_short() {
        let pts = line(5);
        let w = [0.0, 1.0, 0.0, 0.0, 0.0];
        let c = weighted_sample_init(&pts, &w, 3, &mut seeded_rng(1));
        let mut got = c.flatten();
        got.sort_by(f64::total_cmp);
        got.dedup();
        assert_eq!(got.len(), 3);
        assert!(got.contains(&1.0));
        let c = spread_init(&pts, &w, 2, &mut seeded_rng(1));
        assert_ne!(c.center(0), c.center(1));
    }

    #[test]
    fn spread_init_separates_clusters() {
        let mut coords: Vec<f64> = (0..50).map(|i| i as f64 * 1e-3).collect();
        coords.extend((0..50).map(|i| 10.0 + i as f64 * 1e-3));
        let pts = PointSet::new(1, coords).unwrap();
        let w = vec![1.0; 100];
        for s in 0..20 {
            let c = spread_init(&pts, &w, 2, &mut seeded_rng(s));
            assert!((c.center(0)[0] - c.center(1)[0]).abs() > 9.0);
        }
    }
}
