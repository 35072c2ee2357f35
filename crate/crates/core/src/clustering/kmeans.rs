//! k-means baseline on real-stacked complex vectors.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::stream;

use super::mi::Labeling;

#[derive(Debug, Clone)]
pub struct KmeansOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for KmeansOptions {
    fn default() -> Self {
        Self { restarts: 3, max_iter: 100, seed: 0 }
    }
}

fn stack(data: &[DVector<Complex64>]) -> Vec<Vec<f64>> {
    data.iter()
        .map(|h| {
            let mut v = Vec::with_capacity(2 * h.len());
            for c in h.iter() {
                v.push(c.re);
            }
            for c in h.iter() {
                v.push(c.im);
            }
            v
        })
        .collect()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd iterations with k-means++ seeding; best of `restarts` runs by
/// within-cluster sum of squares. Returns centers (real-stacked) and labels.
pub fn kmeans_fit(
    data: &[DVector<Complex64>],
    k: usize,
    opts: &KmeansOptions,
) -> Result<(Vec<Vec<f64>>, Labeling)> {
    if data.is_empty() {
        return Err(Error::EmptyInput("dataset"));
    }
    if k == 0 || k > data.len() {
        return Err(Error::InvalidConfig(format!(
            "need 1 <= k <= dataset size, got k = {k}, n = {}",
            data.len()
        )));
    }
    let points = stack(data);
    let mut best: Option<(f64, Vec<Vec<f64>>, Vec<usize>)> = None;
    for r in 0..opts.restarts.max(1) {
        let mut rng = stream(opts.seed.wrapping_add(r as u64), "kmeans-init");
        let (wcss, centers, labels) = lloyd(&points, k, opts.max_iter, &mut rng);
        if best.as_ref().map_or(true, |(b, _, _)| wcss < *b) {
            best = Some((wcss, centers, labels));
        }
    }
    let (_, centers, labels) = best.expect("at least one restart");
    Ok((centers, Labeling(labels)))
}

/// Convenience wrapper returning only the labels of the training data.
pub fn kmeans(data: &[DVector<Complex64>], k: usize, opts: &KmeansOptions) -> Result<Labeling> {
    kmeans_fit(data, k, opts).map(|(_, labels)| labels)
}

/// Assigns each sample to its nearest center.
pub fn kmeans_assign(centers: &[Vec<f64>], data: &[DVector<Complex64>]) -> Result<Labeling> {
    if centers.is_empty() {
        return Err(Error::EmptyInput("centers"));
    }
    let points = stack(data);
    let dim = centers[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch("data length does not match centers".into()));
    }
    Ok(Labeling(points.iter().map(|p| nearest(p, centers).0).collect()))
}

fn nearest(p: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (i, c) in centers.iter().enumerate() {
        let d = dist2(p, c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    (best, best_d)
}

fn lloyd<R: Rng>(
    points: &[Vec<f64>],
    k: usize,
    max_iter: usize,
    rng: &mut R,
) -> (f64, Vec<Vec<f64>>, Vec<usize>) {
    let n = points.len();
    let dim = points[0].len();

    // k-means++ seeding.
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    centers.push(points[rng.gen_range(0..n)].clone());
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let mut u = rng.gen_range(0.0..total);
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if u < d {
                    pick = i;
                    break;
                }
                u -= d;
            }
            pick
        } else {
            rng.gen_range(0..n)
        };
        centers.push(points[idx].clone());
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(dist2(p, centers.last().unwrap()));
        }
    }

    let mut labels = vec![0usize; n];
    for _ in 0..max_iter.max(1) {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let (l, _) = nearest(p, &centers);
            if l != labels[i] {
                labels[i] = l;
                changed = true;
            }
        }
        let mut sums = vec![vec![0.0f64; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, &x) in sums[l].iter_mut().zip(p) {
                *s += x;
            }
        }
        for (c, (sum, &count)) in centers.iter_mut().zip(sums.iter().zip(&counts)) {
            if count > 0 {
                for (ci, &s) in c.iter_mut().zip(sum) {
                    *ci = s / count as f64;
                }
            } else {
                // Empty cluster: restart it at the farthest point.
                let far = points
                    .iter()
                    .enumerate()
                    .max_by(|(_, a), (_, b)| {
                        nearest(a, &[c.clone()])
                            .1
                            .partial_cmp(&nearest(b, &[c.clone()]).1)
                            .unwrap()
                    })
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                *c = points[far].clone();
            }
        }
        if !changed {
            break;
        }
    }
    let wcss: f64 = points.iter().zip(&labels).map(|(p, &l)| dist2(p, &centers[l])).sum();
    (wcss, centers, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(vals: &[f64]) -> DVector<Complex64> {
        DVector::from_iterator(vals.len(), vals.iter().map(|&v| Complex64::new(v, 0.0)))
    }

    #[test]
    fn k_one_is_a_single_label() {
        let data = vec![point(&[0.0, 1.0]), point(&[2.0, 3.0]), point(&[4.0, 5.0])];
        let labels = kmeans(&data, 1, &KmeansOptions::default()).unwrap();
        assert!(labels.0.iter().all(|&l| l == 0));
    }

    #[test]
    fn separated_clouds_split_perfectly() {
        let mut rng = stream(21, "test-clouds");
        let mut data = Vec::new();
        let mut truth = Vec::new();
        for i in 0..200 {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let jitter: f64 = rng.gen_range(-0.01..0.01);
            data.push(point(&[sign * 10.0 + jitter, sign * 10.0 - jitter]));
            truth.push(usize::from(i % 2 == 0));
        }
        let labels = kmeans(&data, 2, &KmeansOptions::default()).unwrap();
        let agree = labels.0.iter().zip(&truth).filter(|(a, b)| a == b).count();
        assert!(agree == 0 || agree == data.len());
    }

    #[test]
    fn assign_matches_fit_labels() {
        let data = vec![point(&[0.0, 0.0]), point(&[10.0, 10.0]), point(&[0.1, 0.1])];
        let (centers, labels) = kmeans_fit(&data, 2, &KmeansOptions::default()).unwrap();
        let again = kmeans_assign(&centers, &data).unwrap();
        assert_eq!(labels.0, again.0);
    }

    #[test]
    fn rejects_oversized_k() {
        let data = vec![point(&[0.0]), point(&[1.0])];
        assert!(kmeans(&data, 3, &KmeansOptions::default()).is_err());
    }
}
