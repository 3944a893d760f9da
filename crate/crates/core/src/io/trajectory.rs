//! Trajectory files: `frame,x,y,w,h,category,confidence,latency_ms` per line,
//! top-left boxes, no header. A JSON sidecar holds the run metadata.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RadiusCategory;
use crate::pipeline::{FrameRecord, PipelineConfig, Trajectory};
use crate::BBox;

pub const TRAJECTORY_EXT: &str = "txt";
pub const META_SUFFIX: &str = ".meta.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub sequence: String,
    /// `srrt` or the fixed category, e.g. `fixed-4SR`.
    pub mode: String,
    pub seed: u64,
    /// Initial box as `[x, y, w, h]`, top-left.
    pub init: [f64; 4],
    pub reference_updates: usize,
    pub config: PipelineConfig,
}

pub fn trajectory_path(dir: &Path, sequence: &str) -> PathBuf {
    dir.join(format!("{sequence}.{TRAJECTORY_EXT}"))
}

pub fn meta_path(dir: &Path, sequence: &str) -> PathBuf {
    dir.join(format!("{sequence}{META_SUFFIX}"))
}

pub fn format_records(records: &[FrameRecord]) -> String {
    let mut s = String::new();
    for r in records {
        let [x, y, w, h] = r.bbox.to_top_left();
        s.push_str(&format!(
            "{},{x},{y},{w},{h},{},{},{}\n",
            r.frame,
            r.category.factor(),
            r.confidence,
            r.latency_ms
        ));
    }
    s
}

pub fn parse_records(text: &str, path: &Path) -> Result<Vec<FrameRecord>> {
    let mut out: Vec<FrameRecord> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 8 {
            return Err(err(format!("expected 8 fields, found {}", fields.len())));
        }
        let frame: usize = fields[0]
            .parse()
            .map_err(|_| err(format!("bad frame index '{}'", fields[0])))?;
        let mut num = [0.0f64; 4];
        for (k, v) in num.iter_mut().enumerate() {
            *v = fields[1 + k]
                .parse()
                .map_err(|_| err(format!("bad number '{}'", fields[1 + k])))?;
        }
        let category: RadiusCategory = fields[5].parse().map_err(|e: Error| err(e.to_string()))?;
        let confidence: f64 = fields[6]
            .parse()
            .map_err(|_| err(format!("bad confidence '{}'", fields[6])))?;
        let latency_ms: f64 = fields[7]
            .parse()
            .map_err(|_| err(format!("bad latency '{}'", fields[7])))?;
        if out.last().is_some_and(|p| p.frame >= frame) {
            return Err(err("frame indices must increase".into()));
        }
        out.push(FrameRecord {
            frame,
            bbox: BBox::from_top_left(num[0], num[1], num[2], num[3]),
            category,
            confidence,
            latency_ms,
        });
    }
    Ok(out)
}

/// Writes `<sequence>.txt` and its metadata sidecar into `dir`.
pub fn write_trajectory(
    dir: &Path,
    traj: &Trajectory,
    mode: &str,
    cfg: &PipelineConfig,
) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = trajectory_path(dir, &traj.sequence);
    fs::write(&path, format_records(&traj.records)).map_err(|e| Error::io(&path, e))?;
    let meta = TrajectoryMeta {
        sequence: traj.sequence.clone(),
        mode: mode.to_string(),
        seed: cfg.seed,
        init: traj.init.to_top_left(),
        reference_updates: traj.reference_updates,
        config: cfg.clone(),
    };
    let mpath = meta_path(dir, &traj.sequence);
    let json = serde_json::to_string_pretty(&meta).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(&mpath, json + "\n").map_err(|e| Error::io(&mpath, e))?;
    Ok(path)
}

pub fn read_records(path: &Path) -> Result<Vec<FrameRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_records(&text, path)
}

pub fn read_meta(path: &Path) -> Result<TrajectoryMeta> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// Predicted boxes aligned with a ground-truth track of `len` frames.
/// Frame 0 is the initialization and is not scored; missing frames are an
/// error.
pub fn align_records(records: &[FrameRecord], len: usize) -> Result<Vec<BBox>> {
    if records.len() + 1 != len || records.iter().enumerate().any(|(i, r)| r.frame != i + 1) {
        return Err(Error::invalid(format!(
            "trajectory covers {} frames, sequence has {} after initialization",
            records.len(),
            len.saturating_sub(1)
        )));
    }
    Ok(records.iter().map(|r| r.bbox).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<FrameRecord> {
        (1..6)
            .map(|i| FrameRecord {
                frame: i,
                bbox: BBox::new(10.3 + i as f64 / 3.0, 20.0, 7.1, 9.0),
                category: RadiusCategory::ALL[i % 4],
                confidence: 0.1 * i as f64,
                latency_ms: 1.5,
            })
            .collect()
    }

    #[test]
    fn records_round_trip_exactly() {
        let recs = sample();
        let back = parse_records(&format_records(&recs), Path::new("t")).unwrap();
        assert_eq!(recs.len(), back.len());
        for (a, b) in recs.iter().zip(&back) {
            assert_eq!(a.frame, b.frame);
            assert_eq!(a.category, b.category);
            assert_eq!(a.confidence, b.confidence);
            assert!((a.bbox.cx - b.bbox.cx).abs() < 1e-12 && (a.bbox.w - b.bbox.w).abs() < 1e-12);
        }
    }

    #[test]
    fn bad_lines_report_line_number() {
        match parse_records("1,0,0,1,1,2,1,0\n2,0,0,1\n", Path::new("t")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse_records("2,0,0,1,1,2,1,0\n1,0,0,1,1,2,1,0\n", Path::new("t")).is_err());
    }

    #[test]
    fn file_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let traj = Trajectory {
            sequence: "seq".into(),
            init: BBox::new(10.0, 10.0, 4.0, 4.0),
            records: sample(),
            reference_updates: 2,
        };
        let cfg = PipelineConfig::default();
        let p = write_trajectory(dir.path(), &traj, "srrt", &cfg).unwrap();
        assert_eq!(read_records(&p).unwrap().len(), 5);
        let meta = read_meta(&meta_path(dir.path(), "seq")).unwrap();
        assert_eq!(meta.config, cfg);
        assert_eq!(meta.reference_updates, 2);
        assert_eq!(align_records(&traj.records, 6).unwrap().len(), 5);
        assert!(align_records(&traj.records, 7).is_err());
    }
}
