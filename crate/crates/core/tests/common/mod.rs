//! Reference implementations used by the integration tests. They are written
//! from the definitions directly and share no code with the library.

#![allow(dead_code)]

use compmotion::group::{ClusteringConfig, Linkage, Metric};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn point_distance(metric: Metric, a: &[f64], b: &[f64]) -> f64 {
    match metric {
        Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        Metric::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
    }
}

/// Cluster-to-cluster distance recomputed from every cross pair.
fn cluster_distance(points: &[Vec<f64>], cfg: ClusteringConfig, a: &[usize], b: &[usize]) -> f64 {
    let pairs = a.iter().flat_map(|&i| b.iter().map(move |&j| (i, j)));
    let ds: Vec<f64> = pairs.map(|(i, j)| point_distance(cfg.metric, &points[i], &points[j])).collect();
    match cfg.linkage {
        Linkage::Single => ds.iter().copied().fold(f64::INFINITY, f64::min),
        Linkage::Complete => ds.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Linkage::Average => ds.iter().sum::<f64>() / ds.len() as f64,
    }
}

/// Naive agglomerative clustering down to `k` clusters. Exact ties go to the
/// pair whose smallest members are lexicographically smallest. Labels start
/// at 1 and follow the smallest member index.
pub fn naive_cluster(points: &[Vec<f64>], cfg: ClusteringConfig, k: usize) -> Vec<u8> {
    let mut clusters: Vec<Vec<usize>> = (0..points.len()).map(|i| vec![i]).collect();
    while clusters.len() > k {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for x in 0..clusters.len() {
            for y in (x + 1)..clusters.len() {
                let d = cluster_distance(points, cfg, &clusters[x], &clusters[y]);
                let (mx, my) = (clusters[x][0], clusters[y][0]);
                let key = (mx.min(my), mx.max(my));
                let better = match best {
                    None => true,
                    Some((bd, _, _, b0, b1)) => d < bd || (d == bd && key < (b0, b1)),
                };
                if better {
                    best = Some((d, x, y, key.0, key.1));
                }
            }
        }
        let (_, x, y, _, _) = best.unwrap();
        let moved = clusters.remove(y);
        clusters[x].extend(moved);
        clusters[x].sort_unstable();
        clusters.sort_by_key(|c| c[0]);
    }
    let mut labels = vec![0u8; points.len()];
    for (ci, c) in clusters.iter().enumerate() {
        for &i in c {
            labels[i] = ci as u8 + 1;
        }
    }
    labels
}

/// Trace form of the two-class Fisher criterion: `tr(S_B) / tr(S_W)` with
/// explicit scatter matrices and the grand mean over all points.
pub fn fisher_ratio(u: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let d = u[0].len();
    let mean = |pts: &[Vec<f64>]| -> Vec<f64> {
        (0..d).map(|k| pts.iter().map(|p| p[k]).sum::<f64>() / pts.len() as f64).collect()
    };
    let all: Vec<Vec<f64>> = u.iter().chain(b).cloned().collect();
    let m = mean(&all);
    let mut sw = vec![vec![0.0; d]; d];
    let mut sb = vec![vec![0.0; d]; d];
    for class in [u, b] {
        let mc = mean(class);
        for p in class {
            for r in 0..d {
                for c in 0..d {
                    sw[r][c] += (p[r] - mc[r]) * (p[c] - mc[c]);
                }
            }
        }
        for r in 0..d {
            for c in 0..d {
                sb[r][c] += class.len() as f64 * (mc[r] - m[r]) * (mc[c] - m[c]);
            }
        }
    }
    let tr = |s: &Vec<Vec<f64>>| (0..d).map(|i| s[i][i]).sum::<f64>();
    tr(&sb) / tr(&sw)
}

/// Best-match accuracy by trying both label-to-class assignments.
pub fn best_match(labels: &[u8], truth_is_u: &[bool]) -> f64 {
    let n = labels.len() as f64;
    let score = |u_label: u8| labels.iter().zip(truth_is_u).filter(|(l, t)| (**l == u_label) == **t).count() as f64 / n;
    score(1).max(score(2))
}

pub fn random_points(rng: &mut impl Rng, n: usize, dim: usize, spread: f64) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| rng.random_range(-spread..spread)).collect()).collect()
}

/// Two 7-point classes with a random offset between them.
pub fn random_two_class(rng: &mut impl Rng, dim: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let u = random_points(rng, 7, dim, 50.0);
    let shift: Vec<f64> = (0..dim).map(|_| rng.random_range(-60.0..60.0)).collect();
    let b = random_points(rng, 7, dim, 50.0)
        .into_iter()
        .map(|p| p.iter().zip(&shift).map(|(x, s)| x + s).collect())
        .collect();
    (u, b)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}
