//! Frame-directory sequences with OTB/LaSOT-style annotations.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::image::Image;
use crate::BBox;

const IMAGE_EXTENSIONS: [&str; 4] = ["jpg", "jpeg", "png", "bmp"];
pub const GROUNDTRUTH_FILE: &str = "groundtruth.txt";
pub const IMAGE_DIR: &str = "img";

#[derive(Debug, Clone)]
pub enum FrameSource {
    Memory(Arc<Image>),
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct Sequence {
    pub name: String,
    pub frames: Vec<FrameSource>,
    /// Center-form boxes; invalid boxes mark frames without a visible target.
    pub groundtruth: Option<Vec<BBox>>,
    pub width: usize,
    pub height: usize,
}

impl Sequence {
    pub fn in_memory(
        name: impl Into<String>,
        frames: Vec<Image>,
        groundtruth: Option<Vec<BBox>>,
    ) -> Result<Self> {
        let name = name.into();
        let (width, height) = frames
            .first()
            .map(|f| (f.width(), f.height()))
            .unwrap_or((0, 0));
        if let Some(gt) = &groundtruth {
            if gt.len() != frames.len() {
                return Err(Error::Dataset {
                    sequence: name,
                    message: format!(
                        "annotation count mismatch: {} frames, {} boxes",
                        frames.len(),
                        gt.len()
                    ),
                });
            }
        }
        Ok(Self {
            name,
            frames: frames
                .into_iter()
                .map(|f| FrameSource::Memory(Arc::new(f)))
                .collect(),
            groundtruth,
            width,
            height,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame(&self, index: usize) -> Result<Arc<Image>> {
        let err = |reason: String| Error::FrameRead {
            sequence: self.name.clone(),
            index,
            reason,
        };
        match self.frames.get(index) {
            None => Err(err(format!("index out of range (len {})", self.len()))),
            Some(FrameSource::Memory(img)) => Ok(Arc::clone(img)),
            Some(FrameSource::File(path)) => Image::load(path)
                .map(Arc::new)
                .map_err(|e| err(e.to_string())),
        }
    }

    pub fn gt(&self, index: usize) -> Option<&BBox> {
        self.groundtruth.as_ref().and_then(|g| g.get(index))
    }

    /// Writes `img/NNNN.png` frames and `groundtruth.txt` under `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let img_dir = dir.join(IMAGE_DIR);
        std::fs::create_dir_all(&img_dir).map_err(|e| Error::io(&img_dir, e))?;
        for i in 0..self.len() {
            self.frame(i)?
                .save(&img_dir.join(format!("{:04}.png", i + 1)))?;
        }
        if let Some(gt) = &self.groundtruth {
            let path = dir.join(GROUNDTRUTH_FILE);
            std::fs::write(&path, format_groundtruth(gt)).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

/// One `x,y,w,h` line per box, top-left convention.
pub fn format_groundtruth(boxes: &[BBox]) -> String {
    let mut s = String::new();
    for b in boxes {
        let [x, y, w, h] = if b.is_valid() {
            b.to_top_left()
        } else {
            [0.0; 4]
        };
        s.push_str(&format!("{x},{y},{w},{h}\n"));
    }
    s
}

/// Parses `x,y,w,h` lines (comma, tab or space separated) into center-form
/// boxes. Non-positive sizes are kept as absent-target markers.
pub fn parse_groundtruth(text: &str, path: &Path) -> Result<Vec<BBox>> {
    let mut boxes = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split([',', '\t', ' '])
            .filter(|f| !f.is_empty())
            .collect();
        let perr = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        if fields.len() != 4 {
            return Err(perr(format!("expected 4 fields, found {}", fields.len())));
        }
        let mut v = [0.0f64; 4];
        for (k, f) in fields.iter().enumerate() {
            let x: f64 = f.parse().map_err(|_| perr(format!("bad number '{f}'")))?;
            v[k] = if x.is_nan() { 0.0 } else { x };
        }
        boxes.push(BBox::from_top_left(v[0], v[1], v[2], v[3]));
    }
    Ok(boxes)
}

fn numeric_key(path: &Path) -> (u64, String) {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default();
    let digits: String = stem.chars().filter(|c| c.is_ascii_digit()).collect();
    (digits.parse().unwrap_or(u64::MAX), stem.to_string())
}

fn image_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if path.is_file() && is_image {
            files.push(path);
        }
    }
    files.sort_by_key(|p| numeric_key(p));
    Ok(files)
}

fn frame_dir(dir: &Path) -> Result<PathBuf> {
    let img = dir.join(IMAGE_DIR);
    if img.is_dir() {
        return Ok(img);
    }
    let mut subdirs: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    for d in subdirs {
        if !image_files(&d)?.is_empty() {
            return Ok(d);
        }
    }
    Ok(dir.to_path_buf())
}

pub fn load_sequence(dir: &Path) -> Result<Sequence> {
    let name = dir
        .file_name()
        .and_then(|s| s.to_str())
        .unwrap_or("sequence")
        .to_string();
    let files = image_files(&frame_dir(dir)?)?;
    if files.is_empty() {
        return Err(Error::Dataset {
            sequence: name,
            message: "no image frames found".into(),
        });
    }
    let gt_path = dir.join(GROUNDTRUTH_FILE);
    let groundtruth = if gt_path.is_file() {
        let text = std::fs::read_to_string(&gt_path).map_err(|e| Error::io(&gt_path, e))?;
        let gt = parse_groundtruth(&text, &gt_path)?;
        if gt.len() != files.len() {
            return Err(Error::Dataset {
                sequence: name,
                message: format!(
                    "annotation count mismatch: {} frames, {} boxes",
                    files.len(),
                    gt.len()
                ),
            });
        }
        Some(gt)
    } else {
        None
    };
    let (w, h) = image::image_dimensions(&files[0]).map_err(|source| Error::ImageFile {
        path: files[0].clone(),
        source,
    })?;
    Ok(Sequence {
        name,
        frames: files.into_iter().map(FrameSource::File).collect(),
        groundtruth,
        width: w as usize,
        height: h as usize,
    })
}

fn is_sequence_dir(dir: &Path) -> bool {
    dir.join(GROUNDTRUTH_FILE).is_file() || dir.join(IMAGE_DIR).is_dir()
}

/// A dataset directory is either one sequence or a directory of sequences,
/// returned sorted by name.
pub fn load_dataset(dir: &Path) -> Result<Vec<Sequence>> {
    if is_sequence_dir(dir) {
        return Ok(vec![load_sequence(dir)?]);
    }
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && is_sequence_dir(p))
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(Error::Dataset {
            sequence: dir.display().to_string(),
            message: "no sequences found".into(),
        });
    }
    dirs.iter().map(|d| load_sequence(d)).collect()
}
