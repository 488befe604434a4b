use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::CoefficientField;
use crate::scalar::Real;

#[derive(Debug, Clone, Serialize)]
pub struct Clustering {
    pub height: usize,
    pub width: usize,
    /// Row-major cluster index per pixel.
    pub labels: Vec<usize>,
    /// `k × B`, row-major.
    pub centroids: Vec<f64>,
    /// Within-cluster sum of squares after every assignment, then once more
    /// after the final centroid update. Non-increasing.
    pub wcss_history: Vec<f64>,
    pub wcss: f64,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centroids: &[f64], dim: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.chunks(dim).enumerate() {
        let d = dist2(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn plus_plus_init(points: &[f64], n: usize, dim: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut centroids = Vec::with_capacity(k * dim);
    let first = rng.random_range(0..n);
    centroids.extend_from_slice(&points[first * dim..(first + 1) * dim]);
    let mut d2: Vec<f64> = points.par_chunks(dim).map(|p| dist2(p, &centroids[..dim])).collect();
    for _ in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut idx = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if acc > target {
                    idx = i;
                    break;
                }
            }
            idx
        } else {
            // all points coincide with existing centroids
            rng.random_range(0..n)
        };
        let c = points[pick * dim..(pick + 1) * dim].to_vec();
        d2.par_iter_mut()
            .zip(points.par_chunks(dim))
            .for_each(|(d, p)| *d = d.min(dist2(p, &c)));
        centroids.extend(c);
    }
    centroids
}

/// Total squared distance of every point to its labeled centroid.
pub fn wcss_of(points: &[f64], dim: usize, labels: &[usize], centroids: &[f64]) -> f64 {
    points
        .chunks(dim)
        .zip(labels)
        .map(|(p, &l)| dist2(p, &centroids[l * dim..(l + 1) * dim]))
        .sum()
}

/// k-means over per-pixel coefficient vectors: k-means++ seeding from
/// `seed`, then at most `iters` Lloyd rounds. A cluster that empties keeps
/// its previous centroid.
pub fn cluster_coefficients<T: Real>(coeffs: &CoefficientField<T>, k: usize, iters: usize, seed: u64) -> Result<Clustering> {
    let n = coeffs.height() * coeffs.width();
    let dim = coeffs.len();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} must be in 1..={n}")));
    }
    let points: Vec<f64> = coeffs.as_slice().iter().map(|v| v.as_f64()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_init(&points, n, dim, k, &mut rng);
    let mut labels = vec![usize::MAX; n];
    let mut history = Vec::new();

    for _ in 0..iters.max(1) {
        let assigned: Vec<(usize, f64)> = points.par_chunks(dim).map(|p| nearest(p, &centroids, dim)).collect();
        let changed = assigned.iter().zip(&labels).any(|(a, &l)| a.0 != l);
        for (l, a) in labels.iter_mut().zip(&assigned) {
            *l = a.0;
        }
        history.push(assigned.iter().map(|a| a.1).sum());
        if !changed {
            break;
        }
        let mut sums = vec![0.0; k * dim];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.chunks(dim).zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l * dim..(l + 1) * dim].iter_mut().zip(p) {
                *s += v;
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                for (c, s) in centroids[j * dim..(j + 1) * dim].iter_mut().zip(&sums[j * dim..(j + 1) * dim]) {
                    *c = s / counts[j] as f64;
                }
            }
        }
    }
    let wcss = wcss_of(&points, dim, &labels, &centroids);
    history.push(wcss);
    Ok(Clustering {
        height: coeffs.height(),
        width: coeffs.width(),
        labels,
        centroids,
        wcss_history: history,
        wcss,
    })
}
