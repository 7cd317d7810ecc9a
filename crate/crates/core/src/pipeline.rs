//! End-to-end metric computation for one grid orientation, and the metrics
//! CSV files it produces.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::average::{
    angle_difference, location_deviation, mean_pose, AngleDifference, AverageError, JointWeights, LocationDeviation,
};
use crate::dispersion::{angle_std, location_std, StdKind};
use crate::group::{group_scores, GroupError, GroupOptions, GroupScores};
use crate::index::{compensation_index, IndexConfig, IndexError};
use crate::ingest::{extract_final_pose, extract_initial_pose, IngestError};
use crate::model::{
    AngleKey, Condition, Dataset, FinalPose, GridSpec, JointId, Orientation, RecordKey, SubjectInfo, TargetId,
    TARGET_COUNT,
};
use crate::preprocess::{normalize_angles, reference_locations, subtract_reference, ReferenceScope, RelativePose};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("dataset has no subjects")]
    NoSubjects,
    #[error("missing record: {0}")]
    MissingRecord(RecordKey),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Average(#[from] AverageError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("invalid joint weights")]
    InvalidWeights,
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("unknown metric column {0:?}")]
    UnknownMetric(String),
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{0}")]
    MalformedMetrics(String),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub reference_scope: ReferenceScope,
    pub std_kind: StdKind,
    pub weights: JointWeights,
    pub group: GroupOptions,
    pub index: IndexConfig,
    /// Worker threads; 0 lets the pool decide. Results do not depend on it.
    pub jobs: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TargetMetrics<T> {
    pub target: TargetId,
    pub location: LocationDeviation<T>,
    pub angle: AngleDifference<T>,
    pub sigma_c_u: T,
    pub sigma_c_b: T,
    pub sigma_theta_u: T,
    pub sigma_theta_b: T,
    pub group: GroupScores<T>,
    /// `None` when the separability is flagged.
    pub index: Option<T>,
}

impl<T: Scalar> TargetMetrics<T> {
    pub fn l(&self) -> T {
        self.location.total
    }

    pub fn a(&self) -> T {
        self.angle.total
    }

    pub fn j(&self) -> Option<T> {
        self.group.separability
    }

    pub fn h(&self) -> T {
        self.group.accuracy
    }

    pub fn separability_flagged(&self) -> bool {
        self.group.separability.is_none()
    }

    pub fn clustering_tied(&self) -> bool {
        self.group.per_joint.iter().any(|j| j.tied)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrientationMetrics<T> {
    pub orientation: Orientation,
    /// One entry per target, in target order.
    pub targets: Vec<TargetMetrics<T>>,
    pub warnings: Vec<String>,
}

/// Final and initial pose of one reach.
type PosePair<T> = (FinalPose<T>, FinalPose<T>);

/// Relative poses for one subject and condition, indexed by target slot.
fn relative_block<T: Scalar>(
    d: &Dataset<T>,
    subject: u32,
    condition: Condition,
    orientation: Orientation,
    scope: ReferenceScope,
) -> Result<Vec<RelativePose<T>>, PipelineError> {
    let poses = |o: Orientation| -> Result<Vec<PosePair<T>>, PipelineError> {
        TargetId::all()
            .map(|target| {
                let key = RecordKey { subject, condition, orientation: o, target };
                let r = d.record(key).ok_or(PipelineError::MissingRecord(key))?;
                Ok((extract_final_pose(r)?, extract_initial_pose(r)?))
            })
            .collect()
    };
    let here = poses(orientation)?;
    let mut initials: Vec<FinalPose<T>> = here.iter().map(|(_, i)| i.clone()).collect();
    if scope == ReferenceScope::Pooled {
        for o in Orientation::ALL.iter().filter(|o| **o != orientation) {
            initials.extend(poses(*o)?.into_iter().map(|(_, i)| i));
        }
    }
    let finals: Vec<FinalPose<T>> = here.into_iter().map(|(f, _)| f).collect();
    let reference = reference_locations(&initials).expect("49 targets");
    let rel = subtract_reference(&finals, &reference);
    Ok(finals
        .iter()
        .zip(rel)
        .map(|(f, rel_locations)| RelativePose { rel_locations, norm_angles: normalize_angles(f, &d.nrom) })
        .collect())
}

fn target_metrics<T: Scalar>(
    target: TargetId,
    unbraced: &[Vec<RelativePose<T>>],
    braced: &[Vec<RelativePose<T>>],
    subjects: &[SubjectInfo<T>],
    cfg: &PipelineConfig,
) -> Result<TargetMetrics<T>, PipelineError> {
    let n = subjects.len();
    let u: Vec<RelativePose<T>> = unbraced.iter().map(|b| b[target.slot()].clone()).collect();
    let b: Vec<RelativePose<T>> = braced.iter().map(|b| b[target.slot()].clone()).collect();
    let mu = mean_pose(&u, n)?;
    let mb = mean_pose(&b, n)?;
    let location = location_deviation(&mu, &mb, &cfg.weights);
    let angle = angle_difference(&mu, &mb, &cfg.weights);
    let group = group_scores(&u, &b, subjects, &cfg.weights, &cfg.group)?;
    let index = match compensation_index(location.total, angle.total, group.separability, group.accuracy, &cfg.index) {
        Ok(v) => Some(v),
        Err(IndexError::FlaggedComponent) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(TargetMetrics {
        target,
        sigma_c_u: location_std(&u, n, cfg.std_kind)?,
        sigma_c_b: location_std(&b, n, cfg.std_kind)?,
        sigma_theta_u: angle_std(&u, n, cfg.std_kind)?,
        sigma_theta_b: angle_std(&b, n, cfg.std_kind)?,
        location,
        angle,
        group,
        index,
    })
}

/// Runs every metric for all 49 targets of one orientation.
///
/// Work is split per target across a fixed-size pool; results are collected
/// in target order, so the output never depends on `cfg.jobs`.
pub fn compute_orientation<T: Scalar>(
    d: &Dataset<T>,
    orientation: Orientation,
    cfg: &PipelineConfig,
) -> Result<OrientationMetrics<T>, PipelineError> {
    if d.subjects.is_empty() {
        return Err(PipelineError::NoSubjects);
    }
    if !cfg.weights.is_valid() {
        return Err(PipelineError::InvalidWeights);
    }
    cfg.index.validate()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| PipelineError::Pool(e.to_string()))?;

    pool.install(|| {
        let blocks = |c: Condition| -> Result<Vec<Vec<RelativePose<T>>>, PipelineError> {
            d.subjects.par_iter().map(|s| relative_block(d, s.id, c, orientation, cfg.reference_scope)).collect()
        };
        let unbraced = blocks(Condition::Unbraced)?;
        let braced = blocks(Condition::Braced)?;

        let targets: Vec<TargetMetrics<T>> = TargetId::all()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|t| target_metrics(*t, &unbraced, &braced, &d.subjects, cfg))
            .collect::<Result<_, _>>()?;

        let mut warnings = Vec::new();
        for t in &targets {
            if t.separability_flagged() {
                warnings
                    .push(format!("target {}: within-class scatter is zero; J and I excluded from averages", t.target));
            }
        }
        Ok(OrientationMetrics { orientation, targets, warnings })
    })
}

/// Mean of the unflagged entries.
pub fn column_mean(values: &[Option<f64>]) -> Option<f64> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
}

fn cell<T: Scalar>(v: Option<T>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

pub const METRIC_COLUMNS: [&str; 11] =
    ["L", "A", "sigma_C_u", "sigma_C_b", "sigma_theta_u", "sigma_theta_b", "J", "H", "I", "J_flagged", "H_tied"];

impl<T: Scalar> OrientationMetrics<T> {
    /// The main 49-row table: `target,row,col` then [`METRIC_COLUMNS`].
    pub fn metrics_csv(&self, grid: &GridSpec) -> String {
        let mut s = String::from("target,row,col,");
        s.push_str(&METRIC_COLUMNS.join(","));
        s.push('\n');
        for t in &self.targets {
            let (r, c) = grid.cell_of(t.target);
            let _ = writeln!(
                s,
                "{},{r},{c},{},{},{},{},{},{},{},{},{},{},{}",
                t.target,
                t.l(),
                t.a(),
                t.sigma_c_u,
                t.sigma_c_b,
                t.sigma_theta_u,
                t.sigma_theta_b,
                cell(t.j()),
                t.h(),
                cell(t.index),
                u8::from(t.separability_flagged()),
                u8::from(t.clustering_tied()),
            );
        }
        s
    }

    /// Per-joint L, A, J, H plus the winning clustering configuration.
    pub fn joints_csv(&self) -> String {
        let mut s = String::from("target");
        for m in ["L", "A", "J", "H", "config", "tied"] {
            for j in JointId::ALL {
                let _ = write!(s, ",{m}_{}", j.code());
            }
        }
        s.push('\n');
        for t in &self.targets {
            let _ = write!(s, "{}", t.target);
            for v in &t.location.per_joint {
                let _ = write!(s, ",{v}");
            }
            for v in &t.angle.per_joint {
                let _ = write!(s, ",{v}");
            }
            for g in &t.group.per_joint {
                let _ = write!(s, ",{}", cell(g.separability));
            }
            for g in &t.group.per_joint {
                let _ = write!(s, ",{}", g.accuracy);
            }
            for g in &t.group.per_joint {
                let _ = write!(s, ",{}", g.winner);
            }
            for g in &t.group.per_joint {
                let _ = write!(s, ",{}", u8::from(g.tied));
            }
            s.push('\n');
        }
        s
    }

    /// `|Δθ|` per movement, columns `dA_<joint>_<axis>`.
    pub fn angles_csv(&self) -> String {
        let mut s = String::from("target");
        for k in AngleKey::ALL {
            let _ = write!(s, ",dA_{k}");
        }
        s.push('\n');
        for t in &self.targets {
            let _ = write!(s, "{}", t.target);
            for v in &t.angle.per_axis {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }

    /// Writes `metrics_<o>.csv`, `metrics_<o>_joints.csv` and
    /// `metrics_<o>_angles.csv`; returns the paths in that order.
    pub fn write_files(&self, dir: &Path, grid: &GridSpec) -> std::io::Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let o = self.orientation.name();
        let files = [
            (format!("metrics_{o}.csv"), self.metrics_csv(grid)),
            (format!("metrics_{o}_joints.csv"), self.joints_csv()),
            (format!("metrics_{o}_angles.csv"), self.angles_csv()),
        ];
        let mut out = Vec::new();
        for (name, body) in files {
            let p = dir.join(name);
            std::fs::write(&p, body)?;
            out.push(p);
        }
        Ok(out)
    }
}

/// Reads one column of a metrics CSV (any of the files written above) into
/// target order. `NA` and empty cells become `None`.
pub fn read_metric_column(path: &Path, metric: &str) -> Result<Vec<Option<f64>>, PipelineError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PipelineError::MalformedMetrics(format!("{}: {e}", path.display())))?;
    parse_metric_column(&text, metric).map_err(|e| match e {
        PipelineError::Csv { source, .. } => PipelineError::Csv { path: path.display().to_string(), source },
        other => other,
    })
}

pub fn parse_metric_column(text: &str, metric: &str) -> Result<Vec<Option<f64>>, PipelineError> {
    let csv_err = |source| PipelineError::Csv { path: "<metrics>".into(), source };
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let ti = headers
        .iter()
        .position(|h| h == "target")
        .ok_or_else(|| PipelineError::MalformedMetrics("no target column".into()))?;
    let mi = headers.iter().position(|h| h == metric).ok_or_else(|| PipelineError::UnknownMetric(metric.into()))?;
    let mut out = vec![None; TARGET_COUNT];
    let mut seen = [false; TARGET_COUNT];
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let t = rec
            .get(ti)
            .and_then(|v| v.trim().parse::<i64>().ok())
            .and_then(|v| TargetId::new(v).ok())
            .ok_or_else(|| PipelineError::MalformedMetrics(format!("bad target in row {rec:?}")))?;
        let raw = rec.get(mi).unwrap_or("").trim();
        out[t.slot()] = match raw {
            "" | "NA" => None,
            v => Some(v.parse().map_err(|_| PipelineError::MalformedMetrics(format!("{metric}: bad value {v:?}")))?),
        };
        seen[t.slot()] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(PipelineError::MalformedMetrics(format!("target {} missing", missing + 1)));
    }
    Ok(out)
}
