//! Per-target spread across subjects within one condition.
//!
//! The spread of a set of 3-vectors is the root-mean-square distance to their
//! centroid, which reduces to the ordinary standard deviation in one
//! dimension.

use serde::{Deserialize, Serialize};

use crate::average::AverageError;
use crate::model::JointId;
use crate::preprocess::RelativePose;
use crate::scalar::{norm_sq3, sub3, Scalar, Vec3};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StdKind {
    /// Divide by n.
    #[default]
    Population,
    /// Divide by n - 1.
    Sample,
}

impl StdKind {
    fn divisor<T: Scalar>(self, n: usize) -> T {
        match self {
            StdKind::Population => T::from_count(n),
            StdKind::Sample => T::from_count(n.saturating_sub(1).max(1)),
        }
    }
}

pub fn scalar_std<T: Scalar>(values: &[T], kind: StdKind) -> T {
    let n = T::from_count(values.len());
    let m = values.iter().copied().sum::<T>() / n;
    let ss: T = values.iter().map(|v| (*v - m) * (*v - m)).sum();
    (ss / kind.divisor(values.len())).sqrt()
}

pub fn vector_std<T: Scalar>(values: &[Vec3<T>], kind: StdKind) -> T {
    let n = T::from_count(values.len());
    let mut c = [T::zero(); 3];
    for v in values {
        for (ci, vi) in c.iter_mut().zip(v) {
            *ci = *ci + *vi;
        }
    }
    let c = c.map(|s| s / n);
    let ss: T = values.iter().map(|v| norm_sq3(&sub3(v, &c))).sum();
    (ss / kind.divisor(values.len())).sqrt()
}

fn check<T>(poses: &[RelativePose<T>], expected: usize) -> Result<(), AverageError> {
    if poses.len() != expected || poses.is_empty() {
        return Err(AverageError::SubjectCountMismatch { expected, found: poses.len() });
    }
    Ok(())
}

/// Mean over joints of the spread of that joint's relative location.
pub fn location_std<T: Scalar>(poses: &[RelativePose<T>], expected: usize, kind: StdKind) -> Result<T, AverageError> {
    check(poses, expected)?;
    let per_joint: T = (0..3)
        .map(|j| {
            let v: Vec<Vec3<T>> = poses.iter().map(|p| p.rel_locations[j]).collect();
            vector_std(&v, kind)
        })
        .sum();
    Ok(per_joint / T::lit(3.0))
}

/// Elbow flexion spread, shoulder and trunk per-axis spreads averaged, then
/// the three joints averaged.
pub fn angle_std<T: Scalar>(poses: &[RelativePose<T>], expected: usize, kind: StdKind) -> Result<T, AverageError> {
    check(poses, expected)?;
    let axis_std = |k: usize| {
        let v: Vec<T> = poses.iter().map(|p| p.norm_angles[k]).collect();
        scalar_std(&v, kind)
    };
    let joint: T = JointId::ALL
        .iter()
        .map(|j| {
            let idx = j.angle_indices();
            idx.iter().map(|k| axis_std(*k)).sum::<T>() / T::from_count(idx.len())
        })
        .sum();
    Ok(joint / T::lit(3.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(l: [[f64; 3]; 3], a: [f64; 7]) -> RelativePose<f64> {
        RelativePose { rel_locations: l, norm_angles: a }
    }

    #[test]
    fn identical_poses_have_no_spread() {
        let p = rel([[3.0, 1.0, -2.0]; 3], [11.0; 7]);
        let ps = vec![p; 7];
        assert_eq!(location_std(&ps, 7, StdKind::Population).unwrap(), 0.0);
        assert_eq!(angle_std(&ps, 7, StdKind::Population).unwrap(), 0.0);
    }

    #[test]
    fn alternating_elbow_location() {
        // Elbow x at +a, -a, +a, ... over seven subjects: centroid a/7,
        // squared distances (6a/7)^2 four times and (8a/7)^2 three times.
        let a = 14.0;
        let ps: Vec<_> = (0..7)
            .map(|s| {
                let x = if s % 2 == 0 { a } else { -a };
                rel([[x, 0.0, 0.0], [1.0; 3], [2.0; 3]], [0.0; 7])
            })
            .collect();
        let c = a / 7.0;
        let brute = ((4.0 * (a - c).powi(2) + 3.0 * (-a - c).powi(2)) / 7.0).sqrt();
        let got = location_std(&ps, 7, StdKind::Population).unwrap();
        assert!((got - brute / 3.0).abs() < 1e-12, "{got} vs {}", brute / 3.0);
    }

    #[test]
    fn elbow_flexion_only() {
        let c = 9.0;
        let vals: Vec<f64> = (0..7).map(|s| if s % 2 == 0 { -c } else { c }).collect();
        let ps: Vec<_> = vals.iter().map(|v| rel([[0.0; 3]; 3], [*v, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0])).collect();
        let m = vals.iter().sum::<f64>() / 7.0;
        let sd = (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / 7.0).sqrt();
        let got = angle_std(&ps, 7, StdKind::Population).unwrap();
        assert!((got - sd / 3.0).abs() < 1e-12);
    }

    #[test]
    fn sample_std_is_larger() {
        let ps: Vec<_> = (0..7).map(|s| rel([[s as f64, 0.0, 0.0]; 3], [s as f64; 7])).collect();
        let pop = angle_std(&ps, 7, StdKind::Population).unwrap();
        let smp = angle_std(&ps, 7, StdKind::Sample).unwrap();
        assert!((smp / pop - (7.0f64 / 6.0).sqrt()).abs() < 1e-12);
        assert!(location_std(&ps[..3], 7, StdKind::Population).is_err());
    }

    fn arb_rel() -> impl Strategy<Value = RelativePose<f64>> {
        (prop::array::uniform3(prop::array::uniform3(-500.0..500.0f64)), prop::array::uniform7(-100.0..100.0f64))
            .prop_map(|(l, a)| rel(l, a))
    }

    proptest! {
        #[test]
        fn matches_naive_two_pass(ps in prop::collection::vec(arb_rel(), 7)) {
            let mut loc = 0.0;
            for j in 0..3 {
                let mut c = [0.0; 3];
                for p in &ps { for a in 0..3 { c[a] += p.rel_locations[j][a] / 7.0; } }
                let mut ss = 0.0;
                for p in &ps { for a in 0..3 { ss += (p.rel_locations[j][a] - c[a]).powi(2); } }
                loc += (ss / 7.0).sqrt();
            }
            let sd = |k: usize| {
                let m: f64 = ps.iter().map(|p| p.norm_angles[k]).sum::<f64>() / 7.0;
                (ps.iter().map(|p| (p.norm_angles[k] - m).powi(2)).sum::<f64>() / 7.0).sqrt()
            };
            let ang = (sd(0) + (sd(1) + sd(2) + sd(3)) / 3.0 + (sd(4) + sd(5) + sd(6)) / 3.0) / 3.0;
            prop_assert!((location_std(&ps, 7, StdKind::Population).unwrap() - loc / 3.0).abs() <= 1e-9);
            prop_assert!((angle_std(&ps, 7, StdKind::Population).unwrap() - ang).abs() <= 1e-9);
        }

        #[test]
        fn permutation_invariant(mut ps in prop::collection::vec(arb_rel(), 7), seed in 0usize..5040) {
            let a = location_std(&ps, 7, StdKind::Population).unwrap();
            let b = angle_std(&ps, 7, StdKind::Population).unwrap();
            let k = seed % 7;
            ps.rotate_left(k);
            ps.swap(0, seed % 5 + 1);
            prop_assert!((location_std(&ps, 7, StdKind::Population).unwrap() - a).abs() <= 1e-9);
            prop_assert!((angle_std(&ps, 7, StdKind::Population).unwrap() - b).abs() <= 1e-9);
            prop_assert!(a >= 0.0 && b >= 0.0);
        }
    }
}
