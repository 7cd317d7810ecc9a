//! Synthetic reaching datasets with a controllable amount of compensation.
//!
//! Each subject is a torso–shoulder–elbow–hand chain. For every grid target
//! the trunk translates just far enough for the hand to reach, the elbow is
//! placed by closed-form two-link inverse kinematics with the elbow hanging
//! below the shoulder–hand line, and the seven joint angles are read off the
//! resulting geometry. Braced reaches add a fixed compensation pattern scaled
//! by the compensation gain, stronger inside a configurable grid region.
//!
//! Coordinates: x to the subject's right, y forward, z up, millimetres.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    Condition, Dataset, FinalPose, GridSpec, ModelError, NromTable, Orientation, ReachInterval, ReachRecord,
    SubjectInfo, TargetId,
};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("subject {subject} cannot reach target {target} ({orientation}): trunk would move {shift_mm:.0} mm")]
    UnreachableTarget { subject: u32, target: u8, orientation: &'static str, shift_mm: f64 },
    #[error("invalid synth parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Rectangular block of grid cells (1-based, inclusive).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRegion {
    pub rows: (u8, u8),
    pub cols: (u8, u8),
}

impl CellRegion {
    pub fn contains(&self, (r, c): (u8, u8)) -> bool {
        (self.rows.0..=self.rows.1).contains(&r) && (self.cols.0..=self.cols.1).contains(&c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub n_subjects: u32,
    pub height_range_mm: (f64, f64),
    pub arm_length_range_mm: (f64, f64),
    pub spacing_mm: f64,
    /// Scale of the braced-condition distortion; 0 means no compensation.
    pub compensation_gain: f64,
    /// Per-subject, per-target strategy variation (mm; angles get a fifth
    /// of it in degrees). Shared by both conditions.
    pub strategy_noise: f64,
    /// Relative spread of each subject's personal compensation strength.
    pub gain_spread: f64,
    /// Cells where the distortion is applied at full strength.
    pub distorted_region: CellRegion,
    /// Distortion multiplier outside the region.
    pub outside_weight: f64,
    /// Largest trunk translation allowed to reach a target.
    pub max_trunk_shift_mm: f64,
    /// Range of each subject's motion-capture origin offset per axis.
    pub origin_jitter_mm: f64,
    pub nrom_deg: [f64; 7],
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_subjects: 7,
            height_range_mm: (1600.0, 1900.0),
            arm_length_range_mm: (620.0, 760.0),
            spacing_mm: 300.0,
            compensation_gain: 1.0,
            strategy_noise: 15.0,
            gain_spread: 0.15,
            distorted_region: CellRegion { rows: (1, 4), cols: (1, 4) },
            outside_weight: 0.25,
            max_trunk_shift_mm: 2500.0,
            origin_jitter_mm: 400.0,
            // elbow flexion; shoulder plane, elevation, internal rotation;
            // trunk flexion, rotation, lateral flexion.
            nrom_deg: [150.0, 130.0, 180.0, 70.0, 90.0, 45.0, 35.0],
            seed: 0,
        }
    }
}

impl SynthParams {
    fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidParams(m.into()));
        let nonneg =
            [self.compensation_gain, self.strategy_noise, self.gain_spread, self.outside_weight, self.origin_jitter_mm];
        if nonneg.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("gains, noise levels and jitter must be finite and non-negative");
        }
        if self.n_subjects < 2 {
            return bad("need at least two subjects");
        }
        let (h0, h1) = self.height_range_mm;
        let (l0, l1) = self.arm_length_range_mm;
        if !(0.0 < l0 && l0 <= l1 && l1 < h0 && h0 <= h1) {
            return bad("need 0 < arm length range < height range");
        }
        if !(self.spacing_mm > 0.0 && self.max_trunk_shift_mm >= 0.0) {
            return bad("spacing must be positive");
        }
        Ok(())
    }
}

/// Braced-condition offsets per unit gain: locations (mm) for elbow,
/// shoulder, trunk, then the seven angles (degrees). Elbow raised and
/// abducted, shoulder hiked, trunk leaning and rotating.
const LOC_OFFSET: [[f64; 3]; 3] = [[45.0, -15.0, 55.0], [12.0, 8.0, 30.0], [-20.0, 30.0, -12.0]];
const ANGLE_OFFSET: [f64; 7] = [8.0, -6.0, 10.0, -12.0, 5.0, 6.0, 4.0];

type V3 = [f64; 3];

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
fn add(a: V3, b: V3) -> V3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}
fn scale(a: V3, k: f64) -> V3 {
    [a[0] * k, a[1] * k, a[2] * k]
}
fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
fn cross(a: V3, b: V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}
fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}
fn unit(a: V3) -> V3 {
    scale(a, 1.0 / norm(a))
}

/// Component of `v` orthogonal to unit vector `u`, normalised, with a
/// fallback when `v` is (nearly) parallel to `u`.
fn orthogonal(v: V3, u: V3, fallback: V3) -> V3 {
    let p = sub(v, scale(u, dot(v, u)));
    if norm(p) > 1e-9 {
        unit(p)
    } else {
        unit(sub(fallback, scale(u, dot(fallback, u))))
    }
}

struct Body {
    upper_arm: f64,
    forearm: f64,
    reach: f64,
    trunk_rest: V3,
    shoulder_rest: V3,
    trunk_len: f64,
}

impl Body {
    fn new(height: f64, arm: f64) -> Self {
        let trunk_rest = [0.0, 0.0, 0.52 * height];
        let shoulder_rest = [0.12 * height, 0.0, 0.81 * height];
        Body {
            upper_arm: 0.47 * arm,
            forearm: 0.53 * arm,
            reach: 0.9 * arm,
            trunk_len: shoulder_rest[2] - trunk_rest[2],
            trunk_rest,
            shoulder_rest,
        }
    }

    /// Joint locations and angles with the hand at `hand`. Returns the trunk
    /// shift magnitude alongside the pose.
    fn pose(&self, hand: V3) -> ([V3; 3], [f64; 7], f64) {
        let to_hand = sub(hand, self.shoulder_rest);
        let dist = norm(to_hand);
        let shift = if dist > self.reach { scale(unit(to_hand), dist - self.reach) } else { [0.0; 3] };
        let shoulder = add(self.shoulder_rest, shift);
        let trunk = add(self.trunk_rest, shift);

        let sw = sub(hand, shoulder);
        let d = norm(sw).max(1e-6);
        let u = scale(sw, 1.0 / d);
        let (a, f) = (self.upper_arm, self.forearm);
        let cos_alpha = ((a * a + d * d - f * f) / (2.0 * a * d)).clamp(-1.0, 1.0);
        let swivel = orthogonal([0.0, 0.0, -1.0], u, [1.0, 0.0, 0.0]);
        let elbow = add(shoulder, scale(add(scale(u, cos_alpha), scale(swivel, cos_alpha.acos().sin())), a));

        let cos_inner = ((a * a + f * f - d * d) / (2.0 * a * f)).clamp(-1.0, 1.0);
        let elbow_flexion = 180.0 - cos_inner.acos().to_degrees();

        let upper = unit(sub(elbow, shoulder));
        let elevation = dot(upper, [0.0, 0.0, -1.0]).clamp(-1.0, 1.0).acos().to_degrees();
        let plane = upper[1].atan2(upper[0]).to_degrees();
        let fore = sub(hand, elbow);
        let fore_perp = orthogonal(fore, upper, [0.0, 1.0, 0.0]);
        let reference = orthogonal([0.0, 1.0, 0.0], upper, [1.0, 0.0, 0.0]);
        let rotation = dot(cross(reference, fore_perp), upper).atan2(dot(reference, fore_perp)).to_degrees();

        let trunk_flexion = shift[1].atan2(self.trunk_len).to_degrees();
        let trunk_lateral = shift[0].atan2(self.trunk_len).to_degrees();
        let trunk_rotation = 0.25 * hand[0].atan2(hand[1].abs().max(1.0)).to_degrees();

        let angles = [elbow_flexion, plane, elevation, rotation, trunk_flexion, trunk_rotation, trunk_lateral];
        ([elbow, shoulder, trunk], angles, norm(shift))
    }

    fn rest_hand(&self) -> V3 {
        add(self.shoulder_rest, [0.0, 0.1 * self.reach, -0.98 * self.reach])
    }
}

fn target_position(o: Orientation, cell: (u8, u8), spacing: f64, height: f64) -> V3 {
    let (r, c) = (cell.0 as f64, cell.1 as f64);
    let x = (c - 4.0) * spacing;
    match o {
        // Row 1 is the far edge of the table.
        Orientation::Horizontal => [x, 250.0 + (7.0 - r) * spacing, 0.5 * height],
        // Row 1 is the top of the wall, row 4 at shoulder height.
        Orientation::Vertical => [x, 450.0, 0.81 * height + (4.0 - r) * spacing],
    }
}

fn clamp_angles(angles: &mut [f64; 7], nrom: &[f64; 7]) {
    for (a, r) in angles.iter_mut().zip(nrom) {
        *a = a.clamp(-r, *r);
    }
}

struct SubjectDraw {
    info: SubjectInfo<f64>,
    origin: V3,
    gain: f64,
}

/// Generates a full factorial dataset. Every random draw comes from a
/// per-subject ChaCha stream derived from `p.seed`, so the output depends
/// only on the parameters.
pub fn generate_dataset<T: Scalar>(p: &SynthParams) -> Result<Dataset<T>, SynthError> {
    p.validate()?;
    let nrom = NromTable::new(p.nrom_deg.map(T::lit))?;
    let grid = GridSpec { spacing_mm: p.spacing_mm, ..Default::default() };
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");

    let mut subjects = Vec::new();
    let mut records = Vec::new();
    for id in 1..=p.n_subjects {
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        rng.set_stream(id as u64);

        let height = rng.random_range(p.height_range_mm.0..=p.height_range_mm.1);
        let arm = rng.random_range(p.arm_length_range_mm.0..=p.arm_length_range_mm.1);
        let origin = [0, 1, 2].map(|_| rng.random_range(-1.0..=1.0) * p.origin_jitter_mm);
        let gain = (1.0 + p.gain_spread * std_normal.sample(&mut rng)).max(0.2);
        let draw = SubjectDraw { info: SubjectInfo::new(id, height, arm)?, origin, gain };
        let body = Body::new(height, arm);

        let (rest_loc, mut rest_ang, _) = body.pose(body.rest_hand());
        clamp_angles(&mut rest_ang, &p.nrom_deg);
        let rest = to_pose::<T>(&rest_loc, &rest_ang, &draw.origin);

        for &orientation in Orientation::ALL {
            for target in TargetId::all() {
                let cell = grid.cell_of(target);
                let hand = target_position(orientation, cell, p.spacing_mm, height);
                let (mut loc, mut ang, shift) = body.pose(hand);
                if shift > p.max_trunk_shift_mm {
                    return Err(SynthError::UnreachableTarget {
                        subject: id,
                        target: target.get(),
                        orientation: orientation.name(),
                        shift_mm: shift,
                    });
                }

                for l in loc.iter_mut() {
                    for v in l.iter_mut() {
                        *v += p.strategy_noise * std_normal.sample(&mut rng);
                    }
                }
                for a in ang.iter_mut() {
                    *a += 0.2 * p.strategy_noise * std_normal.sample(&mut rng);
                }
                clamp_angles(&mut ang, &p.nrom_deg);

                let weight = if p.distorted_region.contains(cell) { 1.0 } else { p.outside_weight };
                let k = p.compensation_gain * weight * draw.gain;
                let mut loc_b = loc;
                for (l, off) in loc_b.iter_mut().zip(LOC_OFFSET) {
                    *l = add(*l, scale(off, k));
                }
                let mut ang_b = ang;
                for (a, off) in ang_b.iter_mut().zip(ANGLE_OFFSET) {
                    *a += k * off;
                }

                for (condition, l, a) in [(Condition::Unbraced, &loc, &ang), (Condition::Braced, &loc_b, &ang_b)] {
                    records.push(ReachRecord {
                        subject: id,
                        condition,
                        orientation,
                        target,
                        samples: vec![rest.clone(), to_pose::<T>(l, a, &draw.origin)],
                        reach_interval: Some(ReachInterval { start: 0, end: 1 }),
                    });
                }
            }
        }
        subjects.push(SubjectInfo::new(id, T::lit(draw.info.height_mm), T::lit(draw.info.arm_length_mm))?);
    }
    Ok(Dataset::new(subjects, records, nrom))
}

fn to_pose<T: Scalar>(loc: &[V3; 3], ang: &[f64; 7], origin: &V3) -> FinalPose<T> {
    FinalPose {
        locations: [0, 1, 2].map(|j| [0, 1, 2].map(|a| T::lit(loc[j][a] + origin[a]))),
        angles: ang.map(T::lit),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_dataset, ValidationOptions};

    #[test]
    fn full_factorial_and_valid() {
        let d = generate_dataset::<f64>(&SynthParams::default()).unwrap();
        assert_eq!(d.records.len(), 1372);
        assert!(validate_dataset(&d, &ValidationOptions::default()).passed());
    }

    #[test]
    fn seed_determinism() {
        let p = SynthParams { seed: 42, ..Default::default() };
        let a = generate_dataset::<f64>(&p).unwrap();
        let b = generate_dataset::<f64>(&p).unwrap();
        assert_eq!(a, b);
        let c = generate_dataset::<f64>(&SynthParams { seed: 43, ..p }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn unbraced_angles_within_nrom() {
        let p = SynthParams { strategy_noise: 60.0, ..Default::default() };
        let d = generate_dataset::<f64>(&p).unwrap();
        for r in d.records.iter().filter(|r| r.condition == Condition::Unbraced) {
            for pose in &r.samples {
                for (a, lim) in pose.angles.iter().zip(p.nrom_deg) {
                    assert!(a.abs() <= lim, "{a} beyond {lim}");
                }
            }
        }
    }

    #[test]
    fn zero_gain_means_identical_conditions() {
        let p = SynthParams { compensation_gain: 0.0, ..Default::default() };
        let d = generate_dataset::<f64>(&p).unwrap();
        for r in d.records.iter().filter(|r| r.condition == Condition::Unbraced) {
            let mut key = r.key();
            key.condition = Condition::Braced;
            assert_eq!(d.record(key).unwrap().samples, r.samples);
        }
    }

    #[test]
    fn two_link_geometry() {
        let body = Body::new(1750.0, 700.0);
        let hand = add(body.shoulder_rest, [100.0, 400.0, -100.0]);
        let (loc, ang, shift) = body.pose(hand);
        assert_eq!(shift, 0.0);
        assert!((norm(sub(loc[0], loc[1])) - body.upper_arm).abs() < 1e-9);
        assert!((norm(sub(hand, loc[0])) - body.forearm).abs() < 1e-9);
        assert!(ang[0] > 0.0 && ang[0] < 180.0);
        // A far target pulls the trunk along.
        let (_, _, far) = body.pose([0.0, 2000.0, 900.0]);
        assert!(far > 0.0);
    }

    #[test]
    fn unreachable_grid_is_rejected() {
        let p = SynthParams { spacing_mm: 900.0, ..Default::default() };
        assert!(matches!(generate_dataset::<f64>(&p), Err(SynthError::UnreachableTarget { .. })));
        let p = SynthParams { height_range_mm: (500.0, 600.0), ..Default::default() };
        assert!(matches!(generate_dataset::<f64>(&p), Err(SynthError::InvalidParams(_))));
    }
}
