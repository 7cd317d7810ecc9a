//! Cross-subject mean poses, joint location deviation and joint angle
//! difference between the unbraced and braced conditions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::JointId;
use crate::preprocess::RelativePose;
use crate::scalar::{norm3, sub3, Scalar, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AverageError {
    #[error("expected {expected} subjects, found {found}")]
    SubjectCountMismatch { expected: usize, found: usize },
}

/// Relative weights for combining per-joint (and per-axis) values.
///
/// Weights are normalised by their sum when applied, so the default of all
/// ones is the plain unweighted mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JointWeights {
    /// Elbow, shoulder, trunk.
    pub joints: [f64; 3],
    /// Axis weights inside the shoulder and trunk angle averages.
    pub axes: [f64; 3],
}

impl Default for JointWeights {
    fn default() -> Self {
        JointWeights { joints: [1.0; 3], axes: [1.0; 3] }
    }
}

impl JointWeights {
    pub fn is_valid(&self) -> bool {
        let ok = |w: &[f64; 3]| w.iter().all(|v| v.is_finite() && *v >= 0.0) && w.iter().sum::<f64>() > 0.0;
        ok(&self.joints) && ok(&self.axes)
    }

    pub fn combine_joints<T: Scalar>(&self, values: &[T; 3]) -> T {
        weighted(&self.joints, values)
    }

    fn combine_axes<T: Scalar>(&self, values: &[T; 3]) -> T {
        weighted(&self.axes, values)
    }
}

fn weighted<T: Scalar>(w: &[f64; 3], values: &[T; 3]) -> T {
    let total: f64 = w.iter().sum();
    if w.iter().all(|x| *x == w[0]) {
        return (values[0] + values[1] + values[2]) / T::lit(3.0);
    }
    w.iter().zip(values).fold(T::zero(), |acc, (wi, v)| acc + T::lit(wi / total) * *v)
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct MeanPose<T> {
    pub locations: [Vec3<T>; 3],
    pub angles: [T; 7],
}

/// Component-wise mean over subjects.
pub fn mean_pose<T: Scalar>(poses: &[RelativePose<T>], expected: usize) -> Result<MeanPose<T>, AverageError> {
    if poses.len() != expected || poses.is_empty() {
        return Err(AverageError::SubjectCountMismatch { expected, found: poses.len() });
    }
    let n = T::from_count(poses.len());
    let mut out = MeanPose::<T>::default();
    for p in poses {
        for (acc, loc) in out.locations.iter_mut().zip(&p.rel_locations) {
            for (s, v) in acc.iter_mut().zip(loc) {
                *s = *s + *v;
            }
        }
        for (s, v) in out.angles.iter_mut().zip(&p.norm_angles) {
            *s = *s + *v;
        }
    }
    out.locations = out.locations.map(|l| l.map(|s| s / n));
    out.angles = out.angles.map(|s| s / n);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocationDeviation<T> {
    /// Elbow, shoulder, trunk, in mm.
    pub per_joint: [T; 3],
    pub total: T,
}

/// Euclidean distance between the two conditions' mean locations per joint.
pub fn location_deviation<T: Scalar>(
    mean_u: &MeanPose<T>,
    mean_b: &MeanPose<T>,
    weights: &JointWeights,
) -> LocationDeviation<T> {
    let per_joint = [0, 1, 2].map(|j| norm3(&sub3(&mean_b.locations[j], &mean_u.locations[j])));
    LocationDeviation { per_joint, total: weights.combine_joints(&per_joint) }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AngleDifference<T> {
    /// `|Δθ|` for each of the seven movements.
    pub per_axis: [T; 7],
    /// Elbow, shoulder, trunk.
    pub per_joint: [T; 3],
    pub total: T,
}

/// Absolute difference of mean normalised angles; elbow uses flexion only,
/// shoulder and trunk average their three axes.
pub fn angle_difference<T: Scalar>(
    mean_u: &MeanPose<T>,
    mean_b: &MeanPose<T>,
    weights: &JointWeights,
) -> AngleDifference<T> {
    let mut per_axis = [T::zero(); 7];
    for (i, d) in per_axis.iter_mut().enumerate() {
        *d = (mean_b.angles[i] - mean_u.angles[i]).abs();
    }
    let per_joint = JointId::ALL
        .iter()
        .map(|j| match j.angle_indices() {
            [e] => per_axis[*e],
            [x, y, z] => weights.combine_axes(&[per_axis[*x], per_axis[*y], per_axis[*z]]),
            _ => unreachable!(),
        })
        .collect::<Vec<_>>();
    let per_joint = [per_joint[0], per_joint[1], per_joint[2]];
    AngleDifference { per_axis, per_joint, total: weights.combine_joints(&per_joint) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(locations: [[f64; 3]; 3], angles: [f64; 7]) -> RelativePose<f64> {
        RelativePose { rel_locations: locations, norm_angles: angles }
    }

    #[test]
    fn mean_of_constants() {
        let p = rel([[1.0, -2.0, 3.5], [0.0; 3], [9.0; 3]], [4.0; 7]);
        let m = mean_pose(&vec![p.clone(); 7], 7).unwrap();
        assert_eq!(m.locations, p.rel_locations);
        assert_eq!(m.angles, p.norm_angles);
    }

    #[test]
    fn mean_arithmetic() {
        let poses: Vec<_> = (0..7).map(|s| rel([[7.0 * s as f64, 0.0, 0.0], [0.0; 3], [0.0; 3]], [0.0; 7])).collect();
        assert_eq!(mean_pose(&poses, 7).unwrap().locations[0][0], 21.0);
        assert!(matches!(mean_pose(&poses[..6], 7), Err(AverageError::SubjectCountMismatch { expected: 7, found: 6 })));
    }

    #[test]
    fn deviation_cases() {
        let w = JointWeights::default();
        let u = MeanPose { locations: [[1.0, 1.0, 1.0]; 3], angles: [5.0; 7] };
        let same = location_deviation(&u, &u, &w);
        assert_eq!(same.total, 0.0);
        let b = MeanPose { locations: [[4.0, 5.0, 1.0]; 3], angles: [5.0; 7] };
        let d = location_deviation(&u, &b, &w);
        assert_eq!(d.per_joint, [5.0; 3]);
        assert_eq!(d.total, 5.0);
    }

    #[test]
    fn angle_difference_cases() {
        let w = JointWeights::default();
        let u = MeanPose { locations: [[0.0; 3]; 3], angles: [0.0; 7] };
        assert_eq!(angle_difference(&u, &u, &w).total, 0.0);
        let b = MeanPose { locations: [[0.0; 3]; 3], angles: [2.0, 3.0, -6.0, 9.0, 0.0, 0.0, 0.0] };
        let a = angle_difference(&u, &b, &w);
        assert_eq!(a.per_joint, [2.0, 6.0, 0.0]);
        assert_eq!(a.total, 8.0 / 3.0);
    }

    #[test]
    fn weights_shift_emphasis() {
        let w = JointWeights { joints: [1.0, 0.0, 0.0], axes: [1.0; 3] };
        let u = MeanPose { locations: [[0.0; 3]; 3], angles: [0.0; 7] };
        let b = MeanPose { locations: [[3.0, 4.0, 0.0], [100.0, 0.0, 0.0], [0.0; 3]], angles: [1.0; 7] };
        assert_eq!(location_deviation(&u, &b, &w).total, 5.0);
        assert!(!JointWeights { joints: [0.0; 3], axes: [1.0; 3] }.is_valid());
    }

    fn arb_rel() -> impl Strategy<Value = RelativePose<f64>> {
        (prop::array::uniform3(prop::array::uniform3(-500.0..500.0f64)), prop::array::uniform7(-100.0..100.0f64))
            .prop_map(|(l, a)| rel(l, a))
    }

    proptest! {
        #[test]
        fn mean_matches_naive(poses in prop::collection::vec(arb_rel(), 7)) {
            let m = mean_pose(&poses, 7).unwrap();
            for k in 0..7 {
                let naive: f64 = poses.iter().rev().map(|p| p.norm_angles[k] / 7.0).sum();
                prop_assert!((m.angles[k] - naive).abs() <= 1e-12 * naive.abs().max(1.0));
            }
            for j in 0..3 {
                for a in 0..3 {
                    let naive: f64 = poses.iter().rev().map(|p| p.rel_locations[j][a] / 7.0).sum();
                    prop_assert!((m.locations[j][a] - naive).abs() <= 1e-12 * naive.abs().max(1.0));
                }
            }
        }

        #[test]
        fn swap_symmetry_and_non_negativity(u in prop::collection::vec(arb_rel(), 7), b in prop::collection::vec(arb_rel(), 7)) {
            let w = JointWeights::default();
            let mu = mean_pose(&u, 7).unwrap();
            let mb = mean_pose(&b, 7).unwrap();
            let l1 = location_deviation(&mu, &mb, &w);
            let l2 = location_deviation(&mb, &mu, &w);
            let a1 = angle_difference(&mu, &mb, &w);
            let a2 = angle_difference(&mb, &mu, &w);
            prop_assert_eq!(l1.total, l2.total);
            prop_assert_eq!(a1.total, a2.total);
            prop_assert!(l1.per_joint.iter().chain(&a1.per_joint).all(|v| *v >= 0.0));
        }
    }
}
