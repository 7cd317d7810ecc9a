//! CSV ingestion and the canonical on-disk dataset layout.
//!
//! A dataset directory holds `subjects.csv`, `nrom.csv` and a `reaches/`
//! folder of long-format trajectory files (one row per sample). Column names
//! and units are described by a [`CsvSchemaConfig`]; the canonical schema is
//! what [`write_dataset`] emits, and an adapter for another layout is just a
//! different schema file.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    AngleKey, AxisId, Condition, Dataset, FinalPose, JointId, ModelError, NromTable, Orientation, ReachInterval,
    ReachRecord, RecordKey, SubjectInfo, TargetId,
};
use crate::scalar::Scalar;

pub const SUBJECTS_FILE: &str = "subjects.csv";
pub const NROM_FILE: &str = "nrom.csv";
pub const REACHES_DIR: &str = "reaches";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: missing column {column:?}")]
    MissingColumn { path: PathBuf, column: String },
    #[error("schema does not map logical column {0}")]
    UnmappedColumn(String),
    #[error("schema maps header {0:?} to more than one logical column")]
    DuplicateMapping(String),
    #[error("no unit declared for {0} columns")]
    UnitUndeclared(&'static str),
    #[error("{path}:{line}: {reason}")]
    MalformedRow { path: PathBuf, line: u64, reason: String },
    #[error("NROM table incomplete: {0}")]
    NromIncomplete(String),
    #[error("invalid schema config: {0}")]
    Config(String),
    #[error("no reach files found under {0}")]
    NoReachFiles(PathBuf),
    #[error("reach interval of {0} is empty or out of range")]
    EmptyInterval(RecordKey),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthUnit {
    Mm,
    Cm,
    M,
}

impl LengthUnit {
    pub fn to_mm(self) -> f64 {
        match self {
            LengthUnit::Mm => 1.0,
            LengthUnit::Cm => 10.0,
            LengthUnit::M => 1000.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleUnit {
    Deg,
    Rad,
}

impl AngleUnit {
    pub fn to_deg(self, v: f64) -> f64 {
        match self {
            AngleUnit::Deg => v,
            AngleUnit::Rad => v.to_degrees(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub length: Option<LengthUnit>,
    pub angle: Option<AngleUnit>,
    pub anthropometry: Option<LengthUnit>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReachColumns {
    pub subject: String,
    pub condition: String,
    pub orientation: String,
    pub target: String,
    /// Sample ordering column; file order is used when absent.
    #[serde(default)]
    pub frame: Option<String>,
    /// Boolean column marking samples inside the reach; when absent the
    /// whole trajectory is the reach.
    #[serde(default)]
    pub in_reach: Option<String>,
    /// Keys are `<joint>_<axis>` for all nine coordinates.
    pub locations: BTreeMap<String, String>,
    /// Keys are the seven movement codes (`e_x`, `s_x` ... `t_z`).
    pub angles: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubjectColumns {
    pub id: String,
    pub height: String,
    pub arm_length: String,
}

/// Column-name map plus unit declarations for one dataset layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvSchemaConfig {
    pub columns: ReachColumns,
    pub subject_columns: SubjectColumns,
    pub units: Option<Units>,
    /// Extra spellings for condition values, e.g. `free = "u"`.
    #[serde(default)]
    pub condition_aliases: BTreeMap<String, Condition>,
    #[serde(default)]
    pub orientation_aliases: BTreeMap<String, Orientation>,
}

/// Resolved logical columns, one per quantity.
#[derive(Clone, Debug)]
struct ResolvedSchema {
    locations: [[String; 3]; 3],
    angles: [String; 7],
    length_mm: f64,
    angle: AngleUnit,
    anthropometry_mm: f64,
}

fn location_header(j: JointId, a: AxisId) -> String {
    format!("loc_{}_{}", j.code(), a.code())
}

fn angle_header(k: AngleKey) -> String {
    format!("ang_{k}")
}

impl Default for CsvSchemaConfig {
    fn default() -> Self {
        Self::canonical()
    }
}

impl CsvSchemaConfig {
    /// The layout written by [`write_dataset`].
    pub fn canonical() -> Self {
        let mut locations = BTreeMap::new();
        for j in JointId::ALL {
            for a in AxisId::ALL {
                locations.insert(format!("{}_{}", j.code(), a.code()), location_header(*j, *a));
            }
        }
        let angles = AngleKey::ALL.iter().map(|k| (k.to_string(), angle_header(*k))).collect();
        CsvSchemaConfig {
            columns: ReachColumns {
                subject: "subject".into(),
                condition: "condition".into(),
                orientation: "orientation".into(),
                target: "target".into(),
                frame: Some("frame".into()),
                in_reach: Some("in_reach".into()),
                locations,
                angles,
            },
            subject_columns: SubjectColumns {
                id: "subject".into(),
                height: "height_mm".into(),
                arm_length: "arm_length_mm".into(),
            },
            units: Some(Units {
                length: Some(LengthUnit::Mm),
                angle: Some(AngleUnit::Deg),
                anthropometry: Some(LengthUnit::Mm),
            }),
            condition_aliases: BTreeMap::new(),
            orientation_aliases: BTreeMap::new(),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self, IngestError> {
        toml::from_str(s).map_err(|e| IngestError::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self, IngestError> {
        let text = fs::read_to_string(path).map_err(|source| IngestError::Io { path: path.into(), source })?;
        Self::from_toml_str(&text)
    }

    fn resolve(&self) -> Result<ResolvedSchema, IngestError> {
        let units = self.units.as_ref().ok_or(IngestError::UnitUndeclared("all"))?;
        let length = units.length.ok_or(IngestError::UnitUndeclared("joint location"))?;
        let angle = units.angle.ok_or(IngestError::UnitUndeclared("joint angle"))?;
        let anthropometry = units.anthropometry.ok_or(IngestError::UnitUndeclared("anthropometry"))?;

        let c = &self.columns;
        for key in c.locations.keys() {
            let ok =
                key.split_once('_').is_some_and(|(j, a)| j.parse::<JointId>().is_ok() && a.parse::<AxisId>().is_ok());
            if !ok {
                return Err(IngestError::Config(format!("unknown location key {key:?}")));
            }
        }
        for key in c.angles.keys() {
            key.parse::<AngleKey>().map_err(|_| IngestError::Config(format!("unknown angle key {key:?}")))?;
        }

        let mut locations: [[String; 3]; 3] = Default::default();
        for j in JointId::ALL {
            for a in AxisId::ALL {
                let logical = format!("{}_{}", j.code(), a.code());
                locations[j.index()][a.index()] =
                    c.locations.get(&logical).cloned().ok_or(IngestError::UnmappedColumn(location_header(*j, *a)))?;
            }
        }
        let mut angles: [String; 7] = Default::default();
        for (slot, k) in angles.iter_mut().zip(AngleKey::ALL) {
            *slot = c.angles.get(&k.to_string()).cloned().ok_or(IngestError::UnmappedColumn(angle_header(k)))?;
        }

        let mut seen = BTreeSet::new();
        let keys = [&c.subject, &c.condition, &c.orientation, &c.target]
            .into_iter()
            .chain(c.frame.iter())
            .chain(c.in_reach.iter())
            .chain(locations.iter().flatten())
            .chain(angles.iter());
        for h in keys {
            if !seen.insert(h.as_str()) {
                return Err(IngestError::DuplicateMapping(h.clone()));
            }
        }

        Ok(ResolvedSchema {
            locations,
            angles,
            length_mm: length.to_mm(),
            angle,
            anthropometry_mm: anthropometry.to_mm(),
        })
    }

    fn condition(&self, s: &str) -> Result<Condition, ModelError> {
        match self.condition_aliases.get(s.trim()) {
            Some(c) => Ok(*c),
            None => s.parse(),
        }
    }

    fn orientation(&self, s: &str) -> Result<Orientation, ModelError> {
        match self.orientation_aliases.get(s.trim()) {
            Some(o) => Ok(*o),
            None => s.parse(),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> IngestError + '_ {
    move |source| IngestError::Io { path: path.into(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> IngestError + '_ {
    move |source| IngestError::Csv { path: path.into(), source }
}

fn column_index(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize, IngestError> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| IngestError::MissingColumn { path: path.into(), column: name.into() })
}

struct RowReader<'a> {
    path: &'a Path,
    line: u64,
    record: &'a csv::StringRecord,
}

impl RowReader<'_> {
    fn malformed(&self, reason: impl Into<String>) -> IngestError {
        IngestError::MalformedRow { path: self.path.into(), line: self.line, reason: reason.into() }
    }

    fn text(&self, idx: usize) -> Result<&str, IngestError> {
        self.record.get(idx).map(str::trim).ok_or_else(|| self.malformed("row too short"))
    }

    fn real(&self, idx: usize, name: &str) -> Result<f64, IngestError> {
        let t = self.text(idx)?;
        let v: f64 = t.parse().map_err(|_| self.malformed(format!("{name}: cannot parse {t:?}")))?;
        if !v.is_finite() {
            return Err(self.malformed(format!("{name}: non-finite value {t:?}")));
        }
        Ok(v)
    }

    fn integer(&self, idx: usize, name: &str) -> Result<i64, IngestError> {
        let t = self.text(idx)?;
        if let Ok(v) = t.parse::<i64>() {
            return Ok(v);
        }
        // Some exports write integral ids as floats.
        let v = self.real(idx, name)?;
        if v.fract() != 0.0 {
            return Err(self.malformed(format!("{name}: expected integer, got {t:?}")));
        }
        Ok(v as i64)
    }
}

fn parse_bool(t: &str) -> Option<bool> {
    match t.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "y" => Some(true),
        "0" | "false" | "no" | "n" | "" => Some(false),
        _ => None,
    }
}

struct ParsedRow<T> {
    key: RecordKey,
    frame: Option<f64>,
    in_reach: bool,
    pose: FinalPose<T>,
}

fn parse_reach_file<T: Scalar>(
    path: &Path,
    schema: &CsvSchemaConfig,
    resolved: &ResolvedSchema,
) -> Result<Vec<ParsedRow<T>>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().from_path(path).map_err(csv_err(path))?;
    let headers = rdr.headers().map_err(csv_err(path))?.clone();
    let c = &schema.columns;
    let i_subject = column_index(&headers, &c.subject, path)?;
    let i_condition = column_index(&headers, &c.condition, path)?;
    let i_orientation = column_index(&headers, &c.orientation, path)?;
    let i_target = column_index(&headers, &c.target, path)?;
    let i_frame = c.frame.as_deref().map(|n| column_index(&headers, n, path)).transpose()?;
    let i_reach = c.in_reach.as_deref().map(|n| column_index(&headers, n, path)).transpose()?;
    let mut i_loc = [[0usize; 3]; 3];
    for (j, row) in resolved.locations.iter().enumerate() {
        for (a, name) in row.iter().enumerate() {
            i_loc[j][a] = column_index(&headers, name, path)?;
        }
    }
    let mut i_ang = [0usize; 7];
    for (slot, name) in i_ang.iter_mut().zip(&resolved.angles) {
        *slot = column_index(&headers, name, path)?;
    }

    let mut rows = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        let more = rdr.read_record(&mut record).map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            IngestError::MalformedRow { path: path.into(), line, reason: e.to_string() }
        })?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line());
        let row = RowReader { path, line, record: &record };
        if record.len() != headers.len() {
            return Err(row.malformed(format!("expected {} fields, found {}", headers.len(), record.len())));
        }
        let subject = row.integer(i_subject, "subject")?;
        let subject = u32::try_from(subject).map_err(|_| row.malformed(format!("bad subject id {subject}")))?;
        let condition = schema.condition(row.text(i_condition)?).map_err(|e| row.malformed(e.to_string()))?;
        let orientation = schema.orientation(row.text(i_orientation)?).map_err(|e| row.malformed(e.to_string()))?;
        let target = TargetId::new(row.integer(i_target, "target")?).map_err(|e| row.malformed(e.to_string()))?;
        let frame = i_frame.map(|i| row.real(i, "frame")).transpose()?;
        let in_reach = match i_reach {
            None => true,
            Some(i) => {
                let t = row.text(i)?;
                parse_bool(t).ok_or_else(|| row.malformed(format!("in_reach: cannot parse {t:?}")))?
            }
        };
        let mut pose = FinalPose::<T>::default();
        for ((dst, idx), names) in pose.locations.iter_mut().zip(&i_loc).zip(&resolved.locations) {
            for a in 0..3 {
                dst[a] = T::lit(row.real(idx[a], &names[a])? * resolved.length_mm);
            }
        }
        for (k, idx) in i_ang.iter().enumerate() {
            let v = resolved.angle.to_deg(row.real(*idx, &resolved.angles[k])?);
            pose.angles[k] = T::lit(v);
        }
        rows.push(ParsedRow { key: RecordKey { subject, condition, orientation, target }, frame, in_reach, pose });
    }
    Ok(rows)
}

/// Reads `subjects.csv`-style anthropometry.
pub fn load_subjects<T: Scalar>(path: &Path, schema: &CsvSchemaConfig) -> Result<Vec<SubjectInfo<T>>, IngestError> {
    let resolved = schema.resolve()?;
    let mut rdr = csv::ReaderBuilder::new().from_path(path).map_err(csv_err(path))?;
    let headers = rdr.headers().map_err(csv_err(path))?.clone();
    let sc = &schema.subject_columns;
    let i_id = column_index(&headers, &sc.id, path)?;
    let i_h = column_index(&headers, &sc.height, path)?;
    let i_l = column_index(&headers, &sc.arm_length, path)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err(path))?;
        let line = rec.position().map_or(0, |p| p.line());
        let row = RowReader { path, line, record: &rec };
        let id = u32::try_from(row.integer(i_id, "subject")?).map_err(|_| row.malformed("bad subject id"))?;
        let h = T::lit(row.real(i_h, &sc.height)? * resolved.anthropometry_mm);
        let l = T::lit(row.real(i_l, &sc.arm_length)? * resolved.anthropometry_mm);
        out.push(SubjectInfo::new(id, h, l).map_err(|e| row.malformed(e.to_string()))?);
    }
    Ok(out)
}

/// Reads a `joint,axis,degrees` NROM table.
pub fn load_nrom<T: Scalar>(path: &Path) -> Result<NromTable<T>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().from_path(path).map_err(csv_err(path))?;
    let headers = rdr.headers().map_err(csv_err(path))?.clone();
    let i_j = column_index(&headers, "joint", path)?;
    let i_a = column_index(&headers, "axis", path)?;
    let i_d = column_index(&headers, "degrees", path)?;
    let mut entries = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err(path))?;
        let line = rec.position().map_or(0, |p| p.line());
        let row = RowReader { path, line, record: &rec };
        let key: AngleKey = format!("{}_{}", row.text(i_j)?, row.text(i_a)?)
            .parse()
            .map_err(|e: ModelError| row.malformed(e.to_string()))?;
        entries.insert(key, T::lit(row.real(i_d, "degrees")?));
    }
    if let Some(missing) = AngleKey::ALL.iter().find(|k| !entries.contains_key(k)) {
        return Err(IngestError::NromIncomplete(format!("no entry for {missing}")));
    }
    Ok(NromTable::from_entries(entries)?)
}

fn reach_files(path: &Path) -> Result<Vec<PathBuf>, IngestError> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let nested = path.join(REACHES_DIR);
    let dir = if nested.is_dir() { nested } else { path.to_path_buf() };
    let mut files = Vec::new();
    for entry in fs::read_dir(&dir).map_err(io_err(&dir))? {
        let p = entry.map_err(io_err(&dir))?.path();
        let name = p.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if p.extension().is_some_and(|e| e == "csv") && name != SUBJECTS_FILE && name != NROM_FILE {
            files.push(p);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(IngestError::NoReachFiles(dir));
    }
    Ok(files)
}

/// Loads a dataset directory (or a single reach file with a sibling
/// `subjects.csv`). `nrom_path` defaults to `nrom.csv` next to the subjects.
///
/// Files are parsed in parallel; records come back in canonical key order,
/// with samples sorted by the frame column when one is mapped.
pub fn load_dataset<T: Scalar>(
    path: &Path,
    schema: &CsvSchemaConfig,
    nrom_path: Option<&Path>,
) -> Result<Dataset<T>, IngestError> {
    let resolved = schema.resolve()?;
    let root = if path.is_file() { path.parent().unwrap_or(Path::new(".")) } else { path };
    let nrom = load_nrom(&nrom_path.map_or_else(|| root.join(NROM_FILE), Path::to_path_buf))?;
    let subjects = load_subjects(&root.join(SUBJECTS_FILE), schema)?;

    let files = reach_files(path)?;
    let parsed: Vec<Vec<ParsedRow<T>>> =
        files.par_iter().map(|f| parse_reach_file(f, schema, &resolved)).collect::<Result<_, _>>()?;

    let mut grouped: BTreeMap<RecordKey, Vec<ParsedRow<T>>> = BTreeMap::new();
    for row in parsed.into_iter().flatten() {
        grouped.entry(row.key).or_default().push(row);
    }
    let records = grouped
        .into_iter()
        .map(|(key, mut rows)| {
            if rows.iter().all(|r| r.frame.is_some()) {
                rows.sort_by(|a, b| a.frame.partial_cmp(&b.frame).expect("finite frames"));
            }
            let first = rows.iter().position(|r| r.in_reach);
            let last = rows.iter().rposition(|r| r.in_reach);
            let reach_interval = first.zip(last).map(|(start, end)| ReachInterval { start, end });
            ReachRecord {
                subject: key.subject,
                condition: key.condition,
                orientation: key.orientation,
                target: key.target,
                samples: rows.into_iter().map(|r| r.pose).collect(),
                reach_interval,
            }
        })
        .collect();
    Ok(Dataset::new(subjects, records, nrom))
}

/// The sample at the end of the reach interval.
pub fn extract_final_pose<T: Scalar>(r: &ReachRecord<T>) -> Result<FinalPose<T>, IngestError> {
    let iv = r.valid_interval().ok_or(IngestError::EmptyInterval(r.key()))?;
    Ok(r.samples[iv.end].clone())
}

/// The sample at the start of the reach interval.
pub fn extract_initial_pose<T: Scalar>(r: &ReachRecord<T>) -> Result<FinalPose<T>, IngestError> {
    let iv = r.valid_interval().ok_or(IngestError::EmptyInterval(r.key()))?;
    Ok(r.samples[iv.start].clone())
}

fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        w.write_record(&r).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes `dataset` under `dir` in the canonical layout, one reach file per
/// subject × condition × orientation. Reals use shortest round-trip
/// formatting, so reloading yields identical values.
pub fn write_dataset<T: Scalar>(dir: &Path, dataset: &Dataset<T>) -> Result<(), IngestError> {
    let reaches = dir.join(REACHES_DIR);
    fs::create_dir_all(&reaches).map_err(io_err(&reaches))?;

    write_csv(
        &dir.join(SUBJECTS_FILE),
        &["subject".into(), "height_mm".into(), "arm_length_mm".into()],
        dataset.subjects.iter().map(|s| vec![s.id.to_string(), s.height_mm.to_string(), s.arm_length_mm.to_string()]),
    )?;
    write_csv(
        &dir.join(NROM_FILE),
        &["joint".into(), "axis".into(), "degrees".into()],
        AngleKey::ALL
            .iter()
            .map(|k| vec![k.joint.code().into(), k.axis.code().into(), dataset.nrom.get(*k).to_string()]),
    )?;

    let mut header: Vec<String> =
        ["subject", "condition", "orientation", "target", "frame", "in_reach"].map(String::from).to_vec();
    for j in JointId::ALL {
        for a in AxisId::ALL {
            header.push(location_header(*j, *a));
        }
    }
    header.extend(AngleKey::ALL.iter().map(|k| angle_header(*k)));

    let mut blocks: BTreeMap<(u32, Condition, Orientation), Vec<&ReachRecord<T>>> = BTreeMap::new();
    for r in &dataset.records {
        blocks.entry((r.subject, r.condition, r.orientation)).or_default().push(r);
    }
    for ((s, c, o), recs) in blocks {
        let path = reaches.join(format!("s{s:02}_{}_{}.csv", c.code(), o.code()));
        let rows = recs.into_iter().flat_map(|r| {
            r.samples.iter().enumerate().map(move |(i, pose)| {
                let inside = r.reach_interval.is_some_and(|iv| iv.start <= i && i <= iv.end);
                let mut row = vec![
                    r.subject.to_string(),
                    r.condition.code().into(),
                    r.orientation.code().into(),
                    r.target.to_string(),
                    i.to_string(),
                    u8::from(inside).to_string(),
                ];
                row.extend(pose.locations.iter().flatten().map(|v| v.to_string()));
                row.extend(pose.angles.iter().map(|v| v.to_string()));
                row
            })
        });
        write_csv(&path, &header, rows)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(n: usize, iv: Option<(usize, usize)>) -> ReachRecord<f64> {
        ReachRecord {
            subject: 1,
            condition: Condition::Unbraced,
            orientation: Orientation::Horizontal,
            target: TargetId::new(1).unwrap(),
            samples: (0..n).map(|i| FinalPose { angles: [i as f64; 7], ..Default::default() }).collect(),
            reach_interval: iv.map(|(start, end)| ReachInterval { start, end }),
        }
    }

    #[test]
    fn final_and_initial_frames() {
        let r = record(100, Some((0, 99)));
        assert_eq!(extract_final_pose(&r).unwrap().angles[0], 99.0);
        let r = record(100, Some((5, 99)));
        assert_eq!(extract_initial_pose(&r).unwrap().angles[0], 5.0);
        let r = record(1, Some((0, 0)));
        assert_eq!(extract_final_pose(&r).unwrap().angles[0], 0.0);
        assert_eq!(extract_initial_pose(&r).unwrap().angles[0], 0.0);
    }

    #[test]
    fn empty_interval_errors() {
        assert!(matches!(extract_final_pose(&record(3, None)), Err(IngestError::EmptyInterval(_))));
        assert!(matches!(extract_final_pose(&record(3, Some((0, 3)))), Err(IngestError::EmptyInterval(_))));
        assert!(matches!(extract_initial_pose(&record(3, Some((2, 1)))), Err(IngestError::EmptyInterval(_))));
    }

    #[test]
    fn schema_requires_every_logical_column() {
        let mut s = CsvSchemaConfig::canonical();
        s.columns.angles.remove("t_z");
        assert!(matches!(s.resolve(), Err(IngestError::UnmappedColumn(c)) if c == "ang_t_z"));

        let mut s = CsvSchemaConfig::canonical();
        s.units = None;
        assert!(matches!(s.resolve(), Err(IngestError::UnitUndeclared(_))));

        let mut s = CsvSchemaConfig::canonical();
        s.columns.target = "subject".into();
        assert!(matches!(s.resolve(), Err(IngestError::DuplicateMapping(_))));
    }

    #[test]
    fn canonical_schema_survives_toml() {
        let s = CsvSchemaConfig::canonical();
        let text = toml::to_string(&s).unwrap();
        assert_eq!(CsvSchemaConfig::from_toml_str(&text).unwrap(), s);
    }

    #[test]
    fn unit_factors() {
        assert_eq!(AngleUnit::Rad.to_deg(0.0), 0.0);
        assert!((AngleUnit::Rad.to_deg(std::f64::consts::PI) - 180.0).abs() < 1e-12);
        assert_eq!(LengthUnit::Cm.to_mm(), 10.0);
        assert_eq!(LengthUnit::M.to_mm(), 1000.0);
    }
}
