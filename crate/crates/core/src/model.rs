//! Domain types for the reaching study and dataset validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Scalar, Vec3};

/// Number of targets in the reaching grid.
pub const TARGET_COUNT: usize = 49;
/// Rows (and columns) of the square target grid.
pub const GRID_SIDE: u8 = 7;
/// Default number of subjects in a full study.
pub const DEFAULT_SUBJECTS: u32 = 7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("target index {0} outside 1..=49")]
    InvalidTarget(i64),
    #[error("subject {id}: need height_mm > arm_length_mm > 0 (got {height}, {arm})")]
    InvalidAnthropometry { id: u32, height: f64, arm: f64 },
    #[error("NROM for {0} must be finite and strictly positive")]
    NonPositiveNrom(AngleKey),
    #[error("NROM table missing movement {0}")]
    NromIncomplete(AngleKey),
    #[error("unknown {kind} code {code:?}")]
    UnknownCode { kind: &'static str, code: String },
    #[error("grid numbering is not a bijection over the 49 cells: {0}")]
    GridNotBijective(String),
}

macro_rules! coded_enum {
    ($(#[$meta:meta])* $name:ident, $kind:literal, { $($variant:ident => $code:literal | $long:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            /// Short code used in every file format.
            pub fn code(self) -> &'static str {
                match self { $($name::$variant => $code),+ }
            }

            pub fn name(self) -> &'static str {
                match self { $($name::$variant => $long),+ }
            }

            pub fn index(self) -> usize {
                self as usize
            }
        }

        impl FromStr for $name {
            type Err = ModelError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                let t = s.trim();
                $(
                    if t.eq_ignore_ascii_case($code) || t.eq_ignore_ascii_case($long) {
                        return Ok($name::$variant);
                    }
                )+
                Err(ModelError::UnknownCode { kind: $kind, code: s.to_string() })
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.code())
            }
        }

        impl Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.code())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

coded_enum!(
    /// Reaching condition: natural or with the wrist braced.
    Condition, "condition", { Unbraced => "u" | "unbraced", Braced => "b" | "braced" }
);
coded_enum!(
    /// Placement of the target grid.
    Orientation, "orientation", { Horizontal => "h" | "horizontal", Vertical => "v" | "vertical" }
);
coded_enum!(JointId, "joint", { Elbow => "e" | "elbow", Shoulder => "s" | "shoulder", Trunk => "t" | "trunk" });
coded_enum!(AxisId, "axis", { X => "x" | "x-axis", Y => "y" | "y-axis", Z => "z" | "z-axis" });

/// One of the seven measured joint movements.
///
/// The elbow contributes flexion only; shoulder and trunk contribute all
/// three axes. Axis meanings (shoulder: plane of elevation, elevation,
/// internal rotation; trunk: flexion, axial rotation, lateral flexion) are
/// labels only and never affect the arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AngleKey {
    pub joint: JointId,
    pub axis: AxisId,
}

impl AngleKey {
    pub const ALL: [AngleKey; 7] = [
        AngleKey::new(JointId::Elbow, AxisId::X),
        AngleKey::new(JointId::Shoulder, AxisId::X),
        AngleKey::new(JointId::Shoulder, AxisId::Y),
        AngleKey::new(JointId::Shoulder, AxisId::Z),
        AngleKey::new(JointId::Trunk, AxisId::X),
        AngleKey::new(JointId::Trunk, AxisId::Y),
        AngleKey::new(JointId::Trunk, AxisId::Z),
    ];

    pub const fn new(joint: JointId, axis: AxisId) -> Self {
        AngleKey { joint, axis }
    }

    /// Position in [`AngleKey::ALL`], or `None` for elbow y/z.
    pub fn index(self) -> Option<usize> {
        Self::ALL.iter().position(|k| *k == self)
    }

    pub fn movement_name(self) -> &'static str {
        use AxisId::*;
        use JointId::*;
        match (self.joint, self.axis) {
            (Elbow, _) => "elbow flexion",
            (Shoulder, X) => "shoulder plane of elevation",
            (Shoulder, Y) => "shoulder elevation",
            (Shoulder, Z) => "shoulder internal rotation",
            (Trunk, X) => "trunk flexion",
            (Trunk, Y) => "trunk rotation",
            (Trunk, Z) => "trunk lateral flexion",
        }
    }
}

impl fmt::Display for AngleKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.joint.code(), self.axis.code())
    }
}

impl FromStr for AngleKey {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::UnknownCode { kind: "movement", code: s.to_string() };
        let (j, a) = s.trim().split_once(['_', '.']).ok_or_else(bad)?;
        let key = AngleKey::new(j.parse()?, a.parse()?);
        key.index().map(|_| key).ok_or_else(bad)
    }
}

impl JointId {
    /// Indices into a 7-entry angle array belonging to this joint.
    pub fn angle_indices(self) -> &'static [usize] {
        match self {
            JointId::Elbow => &[0],
            JointId::Shoulder => &[1, 2, 3],
            JointId::Trunk => &[4, 5, 6],
        }
    }
}

/// Target number, 1..=49.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct TargetId(u8);

impl TargetId {
    pub fn new(n: i64) -> Result<Self, ModelError> {
        if (1..=TARGET_COUNT as i64).contains(&n) {
            Ok(TargetId(n as u8))
        } else {
            Err(ModelError::InvalidTarget(n))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Zero-based position, handy for indexing 49-element arrays.
    pub fn slot(self) -> usize {
        self.0 as usize - 1
    }

    pub fn all() -> impl Iterator<Item = TargetId> {
        (1..=TARGET_COUNT as u8).map(TargetId)
    }
}

impl TryFrom<i64> for TargetId {
    type Error = ModelError;
    fn try_from(n: i64) -> Result<Self, Self::Error> {
        TargetId::new(n)
    }
}

impl From<TargetId> for u8 {
    fn from(t: TargetId) -> u8 {
        t.0
    }
}

impl fmt::Display for TargetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub type SubjectId = u32;

/// Static anthropometry of one subject, in millimetres.
#[derive(Clone, Debug, PartialEq)]
pub struct SubjectInfo<T> {
    pub id: SubjectId,
    pub height_mm: T,
    pub arm_length_mm: T,
}

impl<T: Scalar> SubjectInfo<T> {
    pub fn new(id: SubjectId, height_mm: T, arm_length_mm: T) -> Result<Self, ModelError> {
        let ok = height_mm.is_finite()
            && arm_length_mm.is_finite()
            && arm_length_mm > T::zero()
            && height_mm > arm_length_mm;
        if !ok {
            return Err(ModelError::InvalidAnthropometry {
                id,
                height: height_mm.as_f64(),
                arm: arm_length_mm.as_f64(),
            });
        }
        Ok(SubjectInfo { id, height_mm, arm_length_mm })
    }
}

/// Joint locations (mm) and the seven joint angles (degrees) at one instant.
///
/// Locations are indexed by [`JointId::index`], angles by position in
/// [`AngleKey::ALL`].
#[derive(Clone, Debug, PartialEq, Default)]
pub struct FinalPose<T> {
    pub locations: [Vec3<T>; 3],
    pub angles: [T; 7],
}

impl<T: Scalar> FinalPose<T> {
    pub fn location(&self, joint: JointId) -> &Vec3<T> {
        &self.locations[joint.index()]
    }

    /// Panics on elbow y/z, which are not measured.
    pub fn angle(&self, key: AngleKey) -> T {
        self.angles[key.index().expect("measured movement")]
    }

    /// Name of the first non-finite field, if any.
    pub fn first_non_finite(&self) -> Option<String> {
        for j in JointId::ALL {
            for (a, v) in AxisId::ALL.iter().zip(self.locations[j.index()]) {
                if !v.is_finite() {
                    return Some(format!("loc_{}_{}", j.code(), a.code()));
                }
            }
        }
        AngleKey::ALL.iter().zip(self.angles).find(|(_, v)| !v.is_finite()).map(|(k, _)| format!("ang_{k}"))
    }
}

/// Inclusive sample range of the reach within a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReachInterval {
    pub start: usize,
    pub end: usize,
}

/// Identity of one reach; the derived ordering is the canonical record order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RecordKey {
    pub subject: SubjectId,
    pub condition: Condition,
    pub orientation: Orientation,
    pub target: TargetId,
}

impl fmt::Display for RecordKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "subject {} / {} / {} / target {}",
            self.subject,
            self.condition.name(),
            self.orientation.name(),
            self.target
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReachRecord<T> {
    pub subject: SubjectId,
    pub condition: Condition,
    pub orientation: Orientation,
    pub target: TargetId,
    pub samples: Vec<FinalPose<T>>,
    /// `None` when no sample was marked as part of the reach.
    pub reach_interval: Option<ReachInterval>,
}

impl<T> ReachRecord<T> {
    pub fn key(&self) -> RecordKey {
        RecordKey {
            subject: self.subject,
            condition: self.condition,
            orientation: self.orientation,
            target: self.target,
        }
    }

    /// The reach interval if it satisfies `start <= end < samples.len()`.
    pub fn valid_interval(&self) -> Option<ReachInterval> {
        self.reach_interval.filter(|iv| iv.start <= iv.end && iv.end < self.samples.len())
    }
}

/// Normal range of motion per movement, in degrees.
#[derive(Clone, Debug, PartialEq)]
pub struct NromTable<T>([T; 7]);

impl<T: Scalar> NromTable<T> {
    pub fn new(values: [T; 7]) -> Result<Self, ModelError> {
        for (k, v) in AngleKey::ALL.iter().zip(values) {
            if !(v.is_finite() && v > T::zero()) {
                return Err(ModelError::NonPositiveNrom(*k));
            }
        }
        Ok(NromTable(values))
    }

    /// Builds the table from keyed entries; every movement must appear.
    pub fn from_entries<I: IntoIterator<Item = (AngleKey, T)>>(entries: I) -> Result<Self, ModelError> {
        let map: BTreeMap<AngleKey, T> = entries.into_iter().collect();
        let mut values = [T::zero(); 7];
        for (slot, key) in values.iter_mut().zip(AngleKey::ALL) {
            *slot = *map.get(&key).ok_or(ModelError::NromIncomplete(key))?;
        }
        Self::new(values)
    }

    pub fn get(&self, key: AngleKey) -> T {
        self.0[key.index().expect("measured movement")]
    }

    pub fn values(&self) -> &[T; 7] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    pub subjects: Vec<SubjectInfo<T>>,
    /// Canonically ordered by [`RecordKey`].
    pub records: Vec<ReachRecord<T>>,
    pub nrom: NromTable<T>,
}

impl<T: Scalar> Dataset<T> {
    /// Sorts subjects by id and records into canonical key order.
    pub fn new(mut subjects: Vec<SubjectInfo<T>>, mut records: Vec<ReachRecord<T>>, nrom: NromTable<T>) -> Self {
        subjects.sort_by_key(|s| s.id);
        records.sort_by_key(|r| r.key());
        Dataset { subjects, records, nrom }
    }

    pub fn record(&self, key: RecordKey) -> Option<&ReachRecord<T>> {
        self.records.binary_search_by_key(&key, |r| r.key()).ok().map(|i| &self.records[i])
    }

    pub fn subject(&self, id: SubjectId) -> Option<&SubjectInfo<T>> {
        self.subjects.iter().find(|s| s.id == id)
    }
}

/// How target numbers are laid out on the 7×7 grid, as seen by the subject.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GridNumbering {
    /// Target 1 top-left, numbering left to right then down.
    #[default]
    RowMajorTopLeft,
    /// Target 1 top-right, numbering right to left then down.
    RowMajorTopRight,
    /// Explicit 1-based `(row, col)` per target, in target order.
    Custom(Vec<(u8, u8)>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub numbering: GridNumbering,
    pub spacing_mm: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { numbering: GridNumbering::RowMajorTopLeft, spacing_mm: 300.0 }
    }
}

impl GridSpec {
    pub fn rows(&self) -> u8 {
        GRID_SIDE
    }

    pub fn cols(&self) -> u8 {
        GRID_SIDE
    }

    /// Checks that a custom numbering covers all 49 cells exactly once.
    pub fn validate(&self) -> Result<(), ModelError> {
        let GridNumbering::Custom(cells) = &self.numbering else {
            return Ok(());
        };
        if cells.len() != TARGET_COUNT {
            return Err(ModelError::GridNotBijective(format!("{} cells listed", cells.len())));
        }
        let mut seen = BTreeSet::new();
        for &(r, c) in cells {
            if !(1..=GRID_SIDE).contains(&r) || !(1..=GRID_SIDE).contains(&c) {
                return Err(ModelError::GridNotBijective(format!("cell ({r}, {c}) off grid")));
            }
            if !seen.insert((r, c)) {
                return Err(ModelError::GridNotBijective(format!("cell ({r}, {c}) repeated")));
            }
        }
        Ok(())
    }

    /// 1-based `(row, col)`; row 1 is the top row.
    pub fn cell_of(&self, target: TargetId) -> (u8, u8) {
        let i = target.slot() as u8;
        let (r, c) = (i / GRID_SIDE + 1, i % GRID_SIDE + 1);
        match &self.numbering {
            GridNumbering::RowMajorTopLeft => (r, c),
            GridNumbering::RowMajorTopRight => (r, GRID_SIDE + 1 - c),
            GridNumbering::Custom(cells) => cells[target.slot()],
        }
    }

    pub fn target_at(&self, row: u8, col: u8) -> Option<TargetId> {
        TargetId::all().find(|t| self.cell_of(*t) == (row, col))
    }
}

#[derive(Clone, Debug)]
pub struct ValidationOptions {
    /// Subjects `1..=expected_subjects` must all be present.
    pub expected_subjects: u32,
    pub allow_partial: bool,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions { expected_subjects: DEFAULT_SUBJECTS, allow_partial: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NonFiniteFrame {
    pub key: RecordKey,
    pub frame: usize,
    pub field: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub record_count: usize,
    pub missing: Vec<RecordKey>,
    pub duplicates: Vec<RecordKey>,
    pub unknown_subjects: Vec<SubjectId>,
    pub non_finite: Vec<NonFiniteFrame>,
    pub empty_intervals: Vec<RecordKey>,
    pub allow_partial: bool,
}

impl ValidationReport {
    pub fn error_count(&self) -> usize {
        let missing = if self.allow_partial { 0 } else { self.missing.len() };
        missing
            + self.duplicates.len()
            + self.unknown_subjects.len()
            + self.non_finite.len()
            + self.empty_intervals.len()
    }

    pub fn warning_count(&self) -> usize {
        if self.allow_partial {
            self.missing.len()
        } else {
            0
        }
    }

    pub fn passed(&self) -> bool {
        self.error_count() == 0
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} records, {} missing cells, {} errors, {} warnings: {}",
            self.record_count,
            self.missing.len(),
            self.error_count(),
            self.warning_count(),
            if self.passed() { "PASS" } else { "FAIL" }
        )?;
        let level = if self.allow_partial { "warning" } else { "error" };
        for k in &self.missing {
            writeln!(f, "  {level}: missing {k}")?;
        }
        for k in &self.duplicates {
            writeln!(f, "  error: duplicate record {k}")?;
        }
        for s in &self.unknown_subjects {
            writeln!(f, "  error: subject {s} has records but no anthropometry")?;
        }
        for nf in &self.non_finite {
            writeln!(f, "  error: non-finite {} at frame {} of {}", nf.field, nf.frame, nf.key)?;
        }
        for k in &self.empty_intervals {
            writeln!(f, "  error: empty or out-of-range reach interval in {k}")?;
        }
        Ok(())
    }
}

/// Checks factorial coverage and frame sanity. Never fails; inspect the report.
pub fn validate_dataset<T: Scalar>(d: &Dataset<T>, opts: &ValidationOptions) -> ValidationReport {
    let mut report =
        ValidationReport { record_count: d.records.len(), allow_partial: opts.allow_partial, ..Default::default() };

    let mut present = BTreeMap::<RecordKey, usize>::new();
    for r in &d.records {
        *present.entry(r.key()).or_default() += 1;
    }
    report.duplicates = present.iter().filter(|(_, n)| **n > 1).map(|(k, _)| *k).collect();

    for subject in 1..=opts.expected_subjects {
        for &condition in Condition::ALL {
            for &orientation in Orientation::ALL {
                for target in TargetId::all() {
                    let key = RecordKey { subject, condition, orientation, target };
                    if !present.contains_key(&key) {
                        report.missing.push(key);
                    }
                }
            }
        }
    }

    let known: BTreeSet<SubjectId> = d.subjects.iter().map(|s| s.id).collect();
    report.unknown_subjects =
        present.keys().map(|k| k.subject).filter(|s| !known.contains(s)).collect::<BTreeSet<_>>().into_iter().collect();

    for r in &d.records {
        if r.valid_interval().is_none() {
            report.empty_intervals.push(r.key());
        }
        for (frame, pose) in r.samples.iter().enumerate() {
            if let Some(field) = pose.first_non_finite() {
                report.non_finite.push(NonFiniteFrame { key: r.key(), frame, field });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_dataset(subjects: u32) -> Dataset<f64> {
        let nrom = NromTable::new([150.0, 130.0, 180.0, 70.0, 80.0, 45.0, 35.0]).unwrap();
        let subj = (1..=subjects).map(|id| SubjectInfo::new(id, 1700.0, 650.0).unwrap()).collect();
        let mut records = Vec::new();
        for subject in 1..=subjects {
            for &condition in Condition::ALL {
                for &orientation in Orientation::ALL {
                    for target in TargetId::all() {
                        records.push(ReachRecord {
                            subject,
                            condition,
                            orientation,
                            target,
                            samples: vec![FinalPose::default(); 2],
                            reach_interval: Some(ReachInterval { start: 0, end: 1 }),
                        });
                    }
                }
            }
        }
        Dataset::new(subj, records, nrom)
    }

    #[test]
    fn full_dataset_passes() {
        let d = tiny_dataset(7);
        assert_eq!(d.records.len(), 1372);
        let rep = validate_dataset(&d, &ValidationOptions::default());
        assert!(rep.passed(), "{rep}");
        assert!(rep.missing.is_empty());
    }

    #[test]
    fn empty_dataset_reports_every_cell() {
        let d = Dataset::<f64>::new(vec![], vec![], tiny_dataset(1).nrom);
        let rep = validate_dataset(&d, &ValidationOptions::default());
        assert!(!rep.passed());
        assert_eq!(rep.missing.len(), 1372);

        let partial = validate_dataset(&d, &ValidationOptions { allow_partial: true, ..Default::default() });
        assert!(partial.passed());
        assert_eq!(partial.warning_count(), 1372);
    }

    #[test]
    fn nan_frame_is_located() {
        let mut d = tiny_dataset(7);
        d.records[100].samples[1].angles[3] = f64::NAN;
        let rep = validate_dataset(&d, &ValidationOptions::default());
        assert!(!rep.passed());
        assert_eq!(rep.non_finite.len(), 1);
        assert_eq!(rep.non_finite[0].key, d.records[100].key());
        assert_eq!(rep.non_finite[0].frame, 1);
        assert_eq!(rep.non_finite[0].field, "ang_s_z");
        assert!(rep.to_string().contains("frame 1"));
    }

    #[test]
    fn bad_intervals_and_duplicates() {
        let mut d = tiny_dataset(7);
        d.records[0].reach_interval = None;
        d.records[1].reach_interval = Some(ReachInterval { start: 0, end: 2 });
        let dup = d.records[5].clone();
        d.records.insert(5, dup);
        let rep = validate_dataset(&d, &ValidationOptions::default());
        assert_eq!(rep.empty_intervals.len(), 2);
        assert_eq!(rep.duplicates.len(), 1);
        assert!(!rep.passed());
    }

    #[test]
    fn codes_round_trip() {
        for &c in Condition::ALL {
            assert_eq!(c.code().parse::<Condition>().unwrap(), c);
        }
        assert_eq!("braced".parse::<Condition>().unwrap(), Condition::Braced);
        for k in AngleKey::ALL {
            assert_eq!(k.to_string().parse::<AngleKey>().unwrap(), k);
        }
        assert!("e_y".parse::<AngleKey>().is_err());
        assert!(TargetId::new(0).is_err());
        assert!(TargetId::new(50).is_err());
    }

    #[test]
    fn anthropometry_and_nrom_invariants() {
        assert!(SubjectInfo::new(1, 600.0, 700.0).is_err());
        assert!(SubjectInfo::new(1, 1700.0, 0.0).is_err());
        assert!(NromTable::new([1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0]).is_err());
        let partial = AngleKey::ALL[..6].iter().map(|k| (*k, 10.0));
        assert_eq!(
            NromTable::<f64>::from_entries(partial),
            Err(ModelError::NromIncomplete(AngleKey::new(JointId::Trunk, AxisId::Z)))
        );
    }

    #[test]
    fn grid_numberings_are_bijective() {
        for numbering in [GridNumbering::RowMajorTopLeft, GridNumbering::RowMajorTopRight] {
            let g = GridSpec { numbering, ..Default::default() };
            let cells: BTreeSet<_> = TargetId::all().map(|t| g.cell_of(t)).collect();
            assert_eq!(cells.len(), 49);
            for t in TargetId::all() {
                let (r, c) = g.cell_of(t);
                assert_eq!(g.target_at(r, c), Some(t));
            }
        }
        let bad = GridSpec { numbering: GridNumbering::Custom(vec![(1, 1); 49]), ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
