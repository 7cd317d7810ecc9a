//! Relative joint locations and NROM-normalised joint angles.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{FinalPose, NromTable};
use crate::scalar::{sub3, Scalar, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PreprocessError {
    #[error("expected matching non-empty pose sets, got {finals} final and {initials} initial poses")]
    CountMismatch { finals: usize, initials: usize },
}

/// Which reaches share one initial-location reference.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceScope {
    /// Mean over the 49 reaches of one subject, condition and orientation.
    #[default]
    PerOrientation,
    /// Mean over both orientations (98 reaches) of one subject and condition.
    Pooled,
}

/// A final pose after preprocessing: locations relative to the subject's
/// mean initial location, angles in percent of NROM.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RelativePose<T> {
    pub rel_locations: [Vec3<T>; 3],
    pub norm_angles: [T; 7],
}

/// Component-wise mean of the initial joint locations.
pub fn reference_locations<T: Scalar>(initial: &[FinalPose<T>]) -> Option<[Vec3<T>; 3]> {
    if initial.is_empty() {
        return None;
    }
    let n = T::from_count(initial.len());
    let mut acc = [[T::zero(); 3]; 3];
    for pose in initial {
        for (a, loc) in acc.iter_mut().zip(&pose.locations) {
            for (s, v) in a.iter_mut().zip(loc) {
                *s = *s + *v;
            }
        }
    }
    Some(acc.map(|v| v.map(|s| s / n)))
}

/// Subtracts one shared reference (the mean initial location of each joint)
/// from every final location.
pub fn relativize_locations<T: Scalar>(
    finals: &[FinalPose<T>],
    initials: &[FinalPose<T>],
) -> Result<Vec<[Vec3<T>; 3]>, PreprocessError> {
    if finals.len() != initials.len() || finals.is_empty() {
        return Err(PreprocessError::CountMismatch { finals: finals.len(), initials: initials.len() });
    }
    let reference = reference_locations(initials).expect("non-empty");
    Ok(subtract_reference(finals, &reference))
}

pub fn subtract_reference<T: Scalar>(finals: &[FinalPose<T>], reference: &[Vec3<T>; 3]) -> Vec<[Vec3<T>; 3]> {
    finals.iter().map(|p| [0, 1, 2].map(|j| sub3(&p.locations[j], &reference[j]))).collect()
}

/// `θ / NROM × 100` for each of the seven movements. Signs are kept.
pub fn normalize_angles<T: Scalar>(pose: &FinalPose<T>, nrom: &NromTable<T>) -> [T; 7] {
    let hundred = T::lit(100.0);
    let mut out = pose.angles;
    for (v, r) in out.iter_mut().zip(nrom.values()) {
        *v = *v / *r * hundred;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pose(loc: [[f64; 3]; 3]) -> FinalPose<f64> {
        FinalPose { locations: loc, angles: [0.0; 7] }
    }

    fn nrom() -> NromTable<f64> {
        NromTable::new([150.0, 130.0, 180.0, 70.0, 80.0, 45.0, 35.0]).unwrap()
    }

    #[test]
    fn constant_reference() {
        let v = [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]];
        let w = [[10.0, 10.0, 10.0], [0.0, -1.0, 2.0], [3.0, 3.0, 3.0]];
        let out = relativize_locations(&vec![pose(w); 49], &vec![pose(v); 49]).unwrap();
        for o in out {
            for j in 0..3 {
                for a in 0..3 {
                    assert_eq!(o[j][a], w[j][a] - v[j][a]);
                }
            }
        }
    }

    #[test]
    fn count_mismatch() {
        let p = pose(Default::default());
        assert!(relativize_locations(&vec![p.clone(); 49], &vec![p.clone(); 48]).is_err());
        assert!(relativize_locations::<f64>(&[], &[]).is_err());
    }

    #[test]
    fn angle_normalisation() {
        let n = nrom();
        let at_nrom = FinalPose { angles: *n.values(), ..Default::default() };
        assert!(normalize_angles(&at_nrom, &n).iter().all(|v| (*v - 100.0).abs() < 1e-12));
        let zero = FinalPose::<f64>::default();
        assert!(normalize_angles(&zero, &n).iter().all(|v| *v == 0.0));
        let neg = FinalPose { angles: [-17.5; 7], ..Default::default() };
        assert!(normalize_angles(&neg, &n).iter().all(|v| *v < 0.0));
    }

    fn arb_pose() -> impl Strategy<Value = FinalPose<f64>> {
        (prop::array::uniform3(prop::array::uniform3(-2000.0..2000.0f64)), prop::array::uniform7(-90.0..180.0f64))
            .prop_map(|(locations, angles)| FinalPose { locations, angles })
    }

    proptest! {
        #[test]
        fn matches_two_pass_oracle(finals in prop::collection::vec(arb_pose(), 49), initials in prop::collection::vec(arb_pose(), 49)) {
            let out = relativize_locations(&finals, &initials).unwrap();
            for j in 0..3 {
                for a in 0..3 {
                    // Pass one: mean; pass two: subtract.
                    let mut total = 0.0;
                    for p in initials.iter().rev() {
                        total += p.locations[j][a];
                    }
                    let m = total / 49.0;
                    for (o, f) in out.iter().zip(&finals) {
                        let expect = f.locations[j][a] - m;
                        prop_assert!((o[j][a] - expect).abs() <= 1e-12 * expect.abs().max(1.0));
                    }
                }
            }
        }

        #[test]
        fn translation_cancels(finals in prop::collection::vec(arb_pose(), 49), initials in prop::collection::vec(arb_pose(), 49), t in prop::array::uniform3(-5000.0..5000.0f64)) {
            let shift = |ps: &[FinalPose<f64>]| -> Vec<FinalPose<f64>> {
                ps.iter().map(|p| FinalPose { locations: p.locations.map(|l| [l[0] + t[0], l[1] + t[1], l[2] + t[2]]), angles: p.angles }).collect()
            };
            let a = relativize_locations(&finals, &initials).unwrap();
            let b = relativize_locations(&shift(&finals), &shift(&initials)).unwrap();
            for (x, y) in a.iter().zip(&b) {
                for j in 0..3 {
                    for k in 0..3 {
                        prop_assert!((x[j][k] - y[j][k]).abs() <= 1e-9);
                    }
                }
            }
        }

        #[test]
        fn nrom_scaling_is_inverse(p in arb_pose(), k in 0.1..10.0f64) {
            let n = nrom();
            let scaled = NromTable::new(n.values().map(|v| v * k)).unwrap();
            let a = normalize_angles(&p, &n);
            let b = normalize_angles(&p, &scaled);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x / k - y).abs() <= 1e-9 * x.abs().max(1.0));
            }
        }
    }
}
