//! Group-level metrics: feature vectors, separability, clustering and the
//! best-match clustering accuracy.

mod cluster;
mod features;
mod separability;

pub use cluster::{agglomerate, agglomerative_cluster, ClusteringConfig, Linkage, Metric, Partition, TIE_TOLERANCE};
pub use features::{build_feature, standardize, FeatureVector};
pub use separability::{scatter, separability, Scatter, WITHIN_SCATTER_FLOOR};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::average::JointWeights;
use crate::model::{Condition, JointId, SubjectInfo};
use crate::preprocess::RelativePose;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("need at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("feature dimensions differ")]
    DimensionMismatch,
    #[error("{labels} labels for {truth} ground-truth conditions")]
    LengthMismatch { labels: usize, truth: usize },
    #[error("within-class scatter is zero")]
    DegenerateWithinScatter,
    #[error("{poses} poses for {subjects} subjects")]
    SubjectCountMismatch { poses: usize, subjects: usize },
}

/// Fraction of points placed correctly under the better of the two
/// cluster-to-condition assignments. Label 1 is tried as unbraced first.
pub fn clustering_accuracy<T: Scalar>(labels: &[u8], truth: &[Condition]) -> Result<T, GroupError> {
    if labels.len() != truth.len() || labels.is_empty() {
        return Err(GroupError::LengthMismatch { labels: labels.len(), truth: truth.len() });
    }
    let direct = labels.iter().zip(truth).filter(|(l, c)| (**l == 1) == (**c == Condition::Unbraced)).count();
    let best = direct.max(labels.len() - direct);
    Ok(T::from_count(best) / T::from_count(labels.len()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusteringScore<T> {
    pub accuracy: T,
    pub winner: ClusteringConfig,
    /// The winning configuration hit a tie while merging.
    pub tied: bool,
}

/// Clusters the pooled features under all six configurations and keeps the
/// most accurate; earlier configurations win ties.
pub fn clustering_score<T: Scalar>(class_u: &[Vec<T>], class_b: &[Vec<T>]) -> Result<ClusteringScore<T>, GroupError> {
    let points: Vec<&[T]> = class_u.iter().chain(class_b).map(Vec::as_slice).collect();
    let truth: Vec<Condition> = std::iter::repeat_n(Condition::Unbraced, class_u.len())
        .chain(std::iter::repeat_n(Condition::Braced, class_b.len()))
        .collect();
    let mut best: Option<ClusteringScore<T>> = None;
    for cfg in ClusteringConfig::ALL {
        let part = agglomerative_cluster(&points, cfg)?;
        let acc = clustering_accuracy::<T>(&part.labels, &truth)?;
        if best.as_ref().is_none_or(|b| acc > b.accuracy) {
            best = Some(ClusteringScore { accuracy: acc, winner: cfg, tied: part.tied });
        }
    }
    Ok(best.expect("six configurations"))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GroupOptions {
    /// Z-score each feature dimension over the pooled points first.
    pub standardize: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JointGroupScore<T> {
    /// `None` when the within-class scatter is zero.
    pub separability: Option<T>,
    pub accuracy: T,
    pub winner: ClusteringConfig,
    pub tied: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupScores<T> {
    /// Elbow, shoulder, trunk.
    pub per_joint: [JointGroupScore<T>; 3],
    /// `None` if any joint's separability is degenerate.
    pub separability: Option<T>,
    pub accuracy: T,
}

fn joint_features<T: Scalar>(poses: &[RelativePose<T>], subjects: &[SubjectInfo<T>], joint: JointId) -> Vec<Vec<T>> {
    poses.iter().zip(subjects).map(|(p, s)| build_feature(p, joint, s).values).collect()
}

/// Separability and clustering accuracy for one target. `unbraced[i]` and
/// `braced[i]` both belong to `subjects[i]`.
pub fn group_scores<T: Scalar>(
    unbraced: &[RelativePose<T>],
    braced: &[RelativePose<T>],
    subjects: &[SubjectInfo<T>],
    weights: &JointWeights,
    opts: &GroupOptions,
) -> Result<GroupScores<T>, GroupError> {
    for poses in [unbraced, braced] {
        if poses.len() != subjects.len() {
            return Err(GroupError::SubjectCountMismatch { poses: poses.len(), subjects: subjects.len() });
        }
    }
    let mut per_joint = Vec::with_capacity(3);
    for &joint in JointId::ALL {
        let mut u = joint_features(unbraced, subjects, joint);
        let mut b = joint_features(braced, subjects, joint);
        if opts.standardize {
            let mut all: Vec<Vec<T>> = u.iter().chain(&b).cloned().collect();
            standardize(&mut all);
            b = all.split_off(u.len());
            u = all;
        }
        let sep = match separability(&u, &b) {
            Ok(v) => Some(v),
            Err(GroupError::DegenerateWithinScatter) => None,
            Err(e) => return Err(e),
        };
        let cs = clustering_score(&u, &b)?;
        per_joint.push(JointGroupScore { separability: sep, accuracy: cs.accuracy, winner: cs.winner, tied: cs.tied });
    }
    let per_joint: [JointGroupScore<T>; 3] = per_joint.try_into().expect("three joints");
    let seps = [0, 1, 2].map(|j| per_joint[j].separability);
    let separability = match seps {
        [Some(e), Some(s), Some(t)] => Some(weights.combine_joints(&[e, s, t])),
        _ => None,
    };
    let accuracy = weights.combine_joints(&[0, 1, 2].map(|j| per_joint[j].accuracy));
    Ok(GroupScores { per_joint, separability, accuracy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Condition::{Braced as B, Unbraced as U};

    #[test]
    fn perfect_and_flipped_labels() {
        let truth = [[U; 7], [B; 7]].concat();
        let split = [[1u8; 7], [2u8; 7]].concat();
        let flipped = [[2u8; 7], [1u8; 7]].concat();
        assert_eq!(clustering_accuracy::<f64>(&split, &truth).unwrap(), 1.0);
        assert_eq!(clustering_accuracy::<f64>(&flipped, &truth).unwrap(), 1.0);
        let one_off: Vec<u8> = split.iter().enumerate().map(|(i, l)| if i == 3 { 2 } else { *l }).collect();
        assert_eq!(clustering_accuracy::<f64>(&one_off, &truth).unwrap(), 13.0 / 14.0);
        assert!(matches!(clustering_accuracy::<f64>(&split[..13], &truth), Err(GroupError::LengthMismatch { .. })));
    }

    #[test]
    fn well_separated_score() {
        let u: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64, 0.0]).collect();
        let b: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64, 1000.0]).collect();
        let s = clustering_score(&u, &b).unwrap();
        assert_eq!(s.accuracy, 1.0);
        assert_eq!(s.winner, ClusteringConfig::ALL[0]);
    }

    #[test]
    fn identical_classes_trace() {
        // Every unbraced point has an exact braced twin; twins merge first
        // and the final clusters always hold whole twin pairs, so exactly
        // half of the points match either assignment.
        let u: Vec<Vec<f64>> = (0..7).map(|i| vec![(i * i) as f64, 3.0 * i as f64]).collect();
        let s = clustering_score(&u, &u.clone()).unwrap();
        assert_eq!(s.accuracy, 0.5);
        assert_eq!(s.winner, ClusteringConfig::ALL[0]);
        assert!(s.tied);
        assert_eq!(separability(&u, &u.clone()).unwrap(), 0.0);
    }
}
