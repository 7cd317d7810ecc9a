//! Agglomerative hierarchical clustering on a dissimilarity matrix.
//!
//! Cluster distances are maintained with Lance-Williams updates, so each
//! merge costs O(n) and the whole run O(n³) with a plain scan for the
//! closest pair. A cluster is identified by its smallest member index; when
//! several pairs share the minimal distance the pair with the smallest
//! `(min index, min index)` wins.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

use super::GroupError;

/// Relative gap below which two candidate merge distances count as tied
/// when reporting. Selection itself uses exact comparison.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Manhattan,
    Euclidean,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Complete,
    /// Unweighted mean over point pairs (UPGMA).
    Average,
    Single,
}

impl Metric {
    pub fn distance<T: Scalar>(self, a: &[T], b: &[T]) -> T {
        match self {
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (*x - *y).abs()).sum(),
            Metric::Euclidean => a.iter().zip(b).map(|(x, y)| (*x - *y) * (*x - *y)).sum::<T>().sqrt(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClusteringConfig {
    pub metric: Metric,
    pub linkage: Linkage,
}

impl ClusteringConfig {
    /// All six combinations in canonical (tie-break) order.
    pub const ALL: [ClusteringConfig; 6] = [
        ClusteringConfig { metric: Metric::Manhattan, linkage: Linkage::Complete },
        ClusteringConfig { metric: Metric::Manhattan, linkage: Linkage::Average },
        ClusteringConfig { metric: Metric::Manhattan, linkage: Linkage::Single },
        ClusteringConfig { metric: Metric::Euclidean, linkage: Linkage::Complete },
        ClusteringConfig { metric: Metric::Euclidean, linkage: Linkage::Average },
        ClusteringConfig { metric: Metric::Euclidean, linkage: Linkage::Single },
    ];
}

impl fmt::Display for ClusteringConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = match self.metric {
            Metric::Manhattan => "manhattan",
            Metric::Euclidean => "euclidean",
        };
        let l = match self.linkage {
            Linkage::Complete => "complete",
            Linkage::Average => "average",
            Linkage::Single => "single",
        };
        write!(f, "{m}-{l}")
    }
}

impl FromStr for ClusteringConfig {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClusteringConfig::ALL
            .into_iter()
            .find(|c| c.to_string() == s.trim())
            .ok_or_else(|| format!("unknown clustering config {s:?}"))
    }
}

/// Flat clustering result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    /// Cluster ids starting at 1, numbered by smallest member index.
    pub labels: Vec<u8>,
    /// Whether any merge decision faced a (near-)tie.
    pub tied: bool,
}

struct Condensed<T> {
    n: usize,
    d: Vec<T>,
}

impl<T: Scalar> Condensed<T> {
    fn new<P: AsRef<[T]>>(points: &[P], metric: Metric) -> Self {
        let n = points.len();
        let mut d = vec![T::zero(); n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = metric.distance(points[i].as_ref(), points[j].as_ref());
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        Condensed { n, d }
    }

    fn get(&self, i: usize, j: usize) -> T {
        self.d[i * self.n + j]
    }

    fn set(&mut self, i: usize, j: usize, v: T) {
        self.d[i * self.n + j] = v;
        self.d[j * self.n + i] = v;
    }
}

/// Merges clusters bottom-up until `n_clusters` remain.
pub fn agglomerate<T: Scalar, P: AsRef<[T]>>(
    points: &[P],
    config: ClusteringConfig,
    n_clusters: usize,
) -> Result<Partition, GroupError> {
    let n = points.len();
    if n < 2 || n_clusters == 0 || n_clusters > n {
        return Err(GroupError::TooFewPoints(n));
    }
    let dim = points[0].as_ref().len();
    if points.iter().any(|p| p.as_ref().len() != dim) {
        return Err(GroupError::DimensionMismatch);
    }

    let mut dist = Condensed::new(points, config.metric);
    let mut active: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut owner: Vec<usize> = (0..n).collect();
    let mut tied = false;
    let tol = T::lit(TIE_TOLERANCE);

    while active.len() > n_clusters {
        // `active` stays sorted, so the first strict minimum in scan order is
        // the lexicographically smallest pair.
        let mut best: Option<(usize, usize, T)> = None;
        for (x, &a) in active.iter().enumerate() {
            for &b in &active[x + 1..] {
                let v = dist.get(a, b);
                if best.is_none_or(|(_, _, m)| v < m) {
                    best = Some((a, b, v));
                }
            }
        }
        let (a, b, m) = best.expect("at least two active clusters");

        let mut contenders = 0;
        for (x, &p) in active.iter().enumerate() {
            for &q in &active[x + 1..] {
                if dist.get(p, q) - m <= tol * m.abs() {
                    contenders += 1;
                }
            }
        }
        tied |= contenders > 1;

        let (na, nb) = (T::from_count(size[a]), T::from_count(size[b]));
        for &k in &active {
            if k == a || k == b {
                continue;
            }
            let (dak, dbk) = (dist.get(a, k), dist.get(b, k));
            let merged = match config.linkage {
                Linkage::Single => dak.min(dbk),
                Linkage::Complete => dak.max(dbk),
                Linkage::Average => (na * dak + nb * dbk) / (na + nb),
            };
            dist.set(a, k, merged);
        }
        size[a] += size[b];
        active.retain(|&k| k != b);
        owner.iter_mut().filter(|o| **o == b).for_each(|o| *o = a);
    }

    let labels = owner.iter().map(|o| active.iter().position(|a| a == o).expect("owner is active") as u8 + 1).collect();
    Ok(Partition { labels, tied })
}

/// Two-cluster agglomeration; the cluster holding point 0 is labelled 1.
pub fn agglomerative_cluster<T: Scalar, P: AsRef<[T]>>(
    points: &[P],
    config: ClusteringConfig,
) -> Result<Partition, GroupError> {
    agglomerate(points, config, 2)
}
