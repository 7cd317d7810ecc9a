use crate::model::{JointId, SubjectInfo};
use crate::preprocess::RelativePose;
use crate::scalar::Scalar;

/// Per-joint feature: relative location (3), normalised angles (1 for the
/// elbow, 3 otherwise), height, arm length.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector<T> {
    pub joint: JointId,
    pub values: Vec<T>,
}

impl<T: Scalar> FeatureVector<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn expected_dim(joint: JointId) -> usize {
        3 + joint.angle_indices().len() + 2
    }
}

/// Concatenates the raw quantities in canonical order; no scaling is applied.
pub fn build_feature<T: Scalar>(pose: &RelativePose<T>, joint: JointId, subject: &SubjectInfo<T>) -> FeatureVector<T> {
    let mut values = Vec::with_capacity(FeatureVector::<T>::expected_dim(joint));
    values.extend_from_slice(&pose.rel_locations[joint.index()]);
    values.extend(joint.angle_indices().iter().map(|k| pose.norm_angles[*k]));
    values.push(subject.height_mm);
    values.push(subject.arm_length_mm);
    FeatureVector { joint, values }
}

/// Z-scores every dimension across all points (population std). Dimensions
/// with zero spread become zero.
pub fn standardize<T: Scalar>(points: &mut [Vec<T>]) {
    let Some(dim) = points.first().map(Vec::len) else {
        return;
    };
    let n = T::from_count(points.len());
    for d in 0..dim {
        let m = points.iter().map(|p| p[d]).sum::<T>() / n;
        let sd = (points.iter().map(|p| (p[d] - m) * (p[d] - m)).sum::<T>() / n).sqrt();
        for p in points.iter_mut() {
            p[d] = if sd > T::zero() { (p[d] - m) / sd } else { T::zero() };
        }
    }
}
