//! Training samples for learned regulators: jittered candidates, labels,
//! the loss, and a lossless on-disk export.

use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bucketize_factor, min_required_factor, RadiusCategory, RegionRect};
use crate::image::{crop_resize, Image, Interpolation, Patch};
use crate::io::Sequence;
use crate::regulator::{reference_patch, CANDIDATE_GAMMA, CANDIDATE_SIDE};
use crate::scalar::Scalar;
use crate::{BBox, Rect};

pub const INDEX_FILE: &str = "index.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Scale jitter exponent is drawn from `[-delta_s_max, delta_s_max]`.
    pub delta_s_max: f64,
    pub max_frame_spread: usize,
    /// Probability of mirroring the frame triple to the end of the sequence.
    pub reverse_probability: f64,
    pub max_draws: usize,
    /// Upper end of the implied factor drawn for `SR8` samples.
    pub sr8_max_factor: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            delta_s_max: 0.25,
            max_frame_spread: 100,
            reverse_probability: 0.5,
            max_draws: 1000,
            sr8_max_factor: 12.0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_s_max >= 0.0 && self.delta_s_max.is_finite()) {
            return Err(Error::invalid(
                "delta_s_max must be finite and non-negative",
            ));
        }
        if self.max_frame_spread < 2 {
            return Err(Error::invalid("max_frame_spread must be at least 2"));
        }
        if !(0.0..=1.0).contains(&self.reverse_probability) {
            return Err(Error::invalid("reverse_probability must lie in [0, 1]"));
        }
        if self.max_draws == 0 {
            return Err(Error::invalid("max_draws must be positive"));
        }
        if !(self.sr8_max_factor > 6.0 && self.sr8_max_factor.is_finite()) {
            return Err(Error::invalid("sr8_max_factor must exceed 6"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JitterParams {
    pub delta_s: f64,
    /// Location jitter per axis (x, y).
    pub delta_c: [f64; 2],
}

impl JitterParams {
    pub const ZERO: Self = Self {
        delta_s: 0.0,
        delta_c: [0.0, 0.0],
    };
}

/// Candidate region of `6 e^{δS}` times the box size, centered at the box
/// center shifted by `(h + w)/2 · δC` on each axis.
pub fn jittered_candidate<T: Scalar>(
    gt: &crate::BoundingBox<T>,
    j: &JitterParams,
) -> Result<RegionRect<T>> {
    gt.validate()?;
    if !j.delta_s.is_finite() || j.delta_c.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("jitter parameters must be finite"));
    }
    let scale = T::of(CANDIDATE_GAMMA * j.delta_s.exp());
    let half = (gt.h + gt.w) / T::of(2.0);
    RegionRect::new(
        gt.cx + half * T::of(j.delta_c[0]),
        gt.cy + half * T::of(j.delta_c[1]),
        gt.w * scale,
        gt.h * scale,
    )
}

/// Category of the box as seen from the candidate: the candidate center and a
/// sixth of its size stand in for the previous prediction.
pub fn label_category<T: Scalar>(
    candidate: &RegionRect<T>,
    gt: &crate::BoundingBox<T>,
) -> Result<RadiusCategory> {
    let six = T::of(CANDIDATE_GAMMA);
    let unit = crate::BoundingBox::new(
        candidate.cx,
        candidate.cy,
        candidate.w / six,
        candidate.h / six,
    );
    Ok(bucketize_factor(min_required_factor(&unit, gt)?))
}

fn factor_range(cat: RadiusCategory, sr8_max: f64) -> (f64, f64) {
    match cat {
        RadiusCategory::SR2 => (0.0, 2.0),
        RadiusCategory::SR4 => (2.0, 4.0),
        RadiusCategory::SR6 => (4.0, 6.0),
        RadiusCategory::SR8 => (6.0, sr8_max),
    }
}

/// Draws location jitter so the label lands in `target`; one axis is pushed
/// into the category's factor band, the other kept below its upper end.
pub fn draw_jitter<R: Rng + ?Sized>(
    gt: &BBox,
    target: RadiusCategory,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> JitterParams {
    let delta_s = if cfg.delta_s_max > 0.0 {
        rng.random_range(-cfg.delta_s_max..=cfg.delta_s_max)
    } else {
        0.0
    };
    let (lo, hi) = factor_range(target, cfg.sr8_max_factor);
    let e = delta_s.exp();
    let sum = gt.w + gt.h;
    // per-axis factor f = (|δC|(w + h) + size) / (size e^{δS})
    let offset_for = |f: f64, size: f64| ((f * size * e - size) / sum).max(0.0);
    let dominant = rng.random_range(0..2usize);
    let mut delta_c = [0.0; 2];
    for (axis, d) in delta_c.iter_mut().enumerate() {
        let size = if axis == 0 { gt.w } else { gt.h };
        let (a, b) = if axis == dominant {
            (offset_for(lo, size), offset_for(hi, size))
        } else {
            (0.0, offset_for(hi, size))
        };
        let mag = if b > a { rng.random_range(a..b) } else { a };
        *d = if rng.random_bool(0.5) { mag } else { -mag };
    }
    JitterParams { delta_s, delta_c }
}

/// Where a sample came from: frames are `[z0, zd, candidate]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub sequence: String,
    pub frames: [usize; 3],
}

impl Provenance {
    pub fn spread(&self) -> usize {
        let mx = self.frames.iter().max().unwrap_or(&0);
        let mn = self.frames.iter().min().unwrap_or(&0);
        mx - mn
    }

    pub fn reversed(&self) -> bool {
        self.frames[2] < self.frames[0]
    }
}

/// Sample geometry without pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleGeometry {
    pub provenance: Provenance,
    pub jitter: JitterParams,
    pub candidate: Rect,
    /// Target box in the candidate frame.
    pub target: BBox,
    pub label: RadiusCategory,
}

#[derive(Debug, Clone)]
pub struct TrainingSample {
    pub geometry: SampleGeometry,
    pub candidate: Patch,
    pub z0: Patch,
    pub zd: Patch,
}

impl TrainingSample {
    pub fn label(&self) -> RadiusCategory {
        self.geometry.label
    }
}

/// Draws frames and jitter for one sample whose label is `target`, retrying
/// until the labeler agrees.
pub fn sample_geometry<R: Rng + ?Sized>(
    seq: &Sequence,
    target: RadiusCategory,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<SampleGeometry> {
    let n = seq.len();
    if n < 3 {
        return Err(Error::SequenceTooShort { len: n, need: 3 });
    }
    let gt = seq.groundtruth.as_ref().ok_or_else(|| Error::Dataset {
        sequence: seq.name.clone(),
        message: "sampling needs ground truth".into(),
    })?;
    let span = cfg.max_frame_spread.min(n - 1);
    for _ in 0..cfg.max_draws {
        let c = rng.random_range(2..=span);
        let d = rng.random_range(1..c);
        let frames = if rng.random_bool(cfg.reverse_probability) {
            [n - 1, n - 1 - d, n - 1 - c]
        } else {
            [0, d, c]
        };
        if frames.iter().any(|&f| !gt[f].is_valid()) {
            continue;
        }
        let target_box = gt[frames[2]];
        let jitter = draw_jitter(&target_box, target, cfg, rng);
        let candidate = jittered_candidate(&target_box, &jitter)?;
        if label_category(&candidate, &target_box)? == target {
            return Ok(SampleGeometry {
                provenance: Provenance {
                    sequence: seq.name.clone(),
                    frames,
                },
                jitter,
                candidate,
                target: target_box,
                label: target,
            });
        }
    }
    Err(Error::SamplingFailure(cfg.max_draws))
}

/// Crops the three patches of a sample.
pub fn materialize(
    seq: &Sequence,
    geom: &SampleGeometry,
    interp: Interpolation,
) -> Result<TrainingSample> {
    let [f0, fd, fc] = geom.provenance.frames;
    let gt = |i: usize| {
        seq.gt(i).copied().ok_or_else(|| Error::Dataset {
            sequence: seq.name.clone(),
            message: format!("no ground truth for frame {i}"),
        })
    };
    Ok(TrainingSample {
        candidate: crop_resize(
            seq.frame(fc)?.as_ref(),
            &geom.candidate,
            CANDIDATE_SIDE,
            interp,
        )?,
        z0: reference_patch(seq.frame(f0)?.as_ref(), &gt(f0)?, interp)?,
        zd: reference_patch(seq.frame(fd)?.as_ref(), &gt(fd)?, interp)?,
        geometry: geom.clone(),
    })
}

pub fn sample_training_pair<R: Rng + ?Sized>(
    seq: &Sequence,
    target: RadiusCategory,
    cfg: &SamplerConfig,
    interp: Interpolation,
    rng: &mut R,
) -> Result<TrainingSample> {
    let geom = sample_geometry(seq, target, cfg, rng)?;
    materialize(seq, &geom, interp)
}

/// Round-robin targets over the sequences long enough to sample from; the
/// `i`-th sample targets `ALL[i % 4]`, giving an exact 1:1:1:1 ratio when
/// `count` is a multiple of four.
pub fn sample_dataset_geometry<R: Rng + ?Sized>(
    dataset: &[Sequence],
    count: usize,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<Vec<SampleGeometry>> {
    let usable: Vec<&Sequence> = dataset
        .iter()
        .filter(|s| s.len() >= 3 && s.groundtruth.is_some())
        .collect();
    if usable.is_empty() {
        return Err(Error::invalid(
            "no sequence with ground truth and at least 3 frames",
        ));
    }
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let target = RadiusCategory::ALL[i % RadiusCategory::COUNT];
        let seq = usable[rng.random_range(0..usable.len())];
        out.push(sample_geometry(seq, target, cfg, rng)?);
    }
    Ok(out)
}

/// Mean negative log-likelihood of the labels. Probabilities at the true
/// label below `1e-12` are clamped.
pub fn cross_entropy<T: Scalar>(
    probs: &[[T; RadiusCategory::COUNT]],
    labels: &[RadiusCategory],
) -> Result<T> {
    if probs.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    if probs.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} labels",
            probs.len(),
            labels.len()
        )));
    }
    let floor = T::of(1e-12);
    let mut total = T::zero();
    for (i, (p, y)) in probs.iter().zip(labels).enumerate() {
        let sum = p.iter().fold(T::zero(), |a, &b| a + b);
        if p.iter().any(|v| !(*v >= T::zero())) || (sum - T::one()).abs() > T::of(1e-6) {
            return Err(Error::invalid(format!(
                "prediction {i} is not a probability vector"
            )));
        }
        let mut q = p[y.index()];
        if q < floor {
            warn!("prediction {i} gives the true label probability {q}; clamped to 1e-12");
            q = floor;
        }
        total -= q.ln();
    }
    Ok(total / T::of_usize(probs.len()))
}

fn patch_file(dir: &Path, id: usize, part: &str) -> PathBuf {
    dir.join(format!("{id:06}_{part}.png"))
}

fn format_index_line(id: usize, g: &SampleGeometry) -> String {
    let [a, b, c] = g.provenance.frames;
    format!(
        "{id},{},{a};{b};{c},{},{},{};{}\n",
        g.provenance.sequence,
        g.label.factor(),
        g.jitter.delta_s,
        g.jitter.delta_c[0],
        g.jitter.delta_c[1]
    )
}

fn check_name(name: &str) -> Result<()> {
    if name.contains([',', '\n']) {
        return Err(Error::invalid(format!(
            "sequence name '{name}' cannot be stored in the index"
        )));
    }
    Ok(())
}

/// Writes the three 8-bit PNG patches of sample `id`.
pub fn export_sample(dir: &Path, id: usize, sample: &TrainingSample) -> Result<()> {
    check_name(&sample.geometry.provenance.sequence)?;
    sample.candidate.image.save(&patch_file(dir, id, "c"))?;
    sample.z0.image.save(&patch_file(dir, id, "z0"))?;
    sample.zd.image.save(&patch_file(dir, id, "zd"))
}

/// Writes `index.csv`; line `i` describes sample id `i`.
pub fn write_index(dir: &Path, geometries: &[SampleGeometry]) -> Result<()> {
    let mut index = String::new();
    for (id, g) in geometries.iter().enumerate() {
        check_name(&g.provenance.sequence)?;
        index.push_str(&format_index_line(id, g));
    }
    let path = dir.join(INDEX_FILE);
    fs::write(&path, index).map_err(|e| Error::io(&path, e))
}

/// Writes `index.csv` (`id,seq,frames,label,delta_s,delta_c`, frames and
/// per-axis δC joined by `;`) and three 8-bit PNG patches per sample.
pub fn export_dataset(samples: &[TrainingSample], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (id, s) in samples.iter().enumerate() {
        export_sample(dir, id, s)?;
    }
    let geometries: Vec<SampleGeometry> = samples.iter().map(|s| s.geometry.clone()).collect();
    write_index(dir, &geometries)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub id: usize,
    pub provenance: Provenance,
    pub label: RadiusCategory,
    pub jitter: JitterParams,
}

impl IndexEntry {
    /// Rebuilds the sample geometry from the source sequence's ground truth.
    pub fn geometry(&self, seq: &Sequence) -> Result<SampleGeometry> {
        let target = *seq
            .gt(self.provenance.frames[2])
            .ok_or_else(|| Error::Dataset {
                sequence: seq.name.clone(),
                message: format!("no ground truth for frame {}", self.provenance.frames[2]),
            })?;
        Ok(SampleGeometry {
            provenance: self.provenance.clone(),
            jitter: self.jitter,
            candidate: jittered_candidate(&target, &self.jitter)?,
            target,
            label: self.label,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ImportedSample {
    pub entry: IndexEntry,
    pub candidate: Image,
    pub z0: Image,
    pub zd: Image,
}

pub fn read_index(dir: &Path) -> Result<Vec<IndexEntry>> {
    let path = dir.join(INDEX_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut out = Vec::new();
    for (i, line) in text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
    {
        let err = |message: &str| Error::Parse {
            path: path.clone(),
            line: i + 1,
            message: message.to_string(),
        };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(err("expected 6 fields"));
        }
        let id = f[0].parse().map_err(|_| err("bad id"))?;
        let frames: Vec<usize> = f[2]
            .split(';')
            .map(|v| v.parse().map_err(|_| err("bad frame index")))
            .collect::<Result<_>>()?;
        let frames: [usize; 3] = frames
            .try_into()
            .map_err(|_| err("expected three frames"))?;
        let label = f[3]
            .parse::<RadiusCategory>()
            .map_err(|_| err("bad label"))?;
        let delta_s = f[4].parse().map_err(|_| err("bad delta_s"))?;
        let dc: Vec<f64> = f[5]
            .split(';')
            .map(|v| v.parse().map_err(|_| err("bad delta_c")))
            .collect::<Result<_>>()?;
        let delta_c: [f64; 2] = dc
            .try_into()
            .map_err(|_| err("expected two delta_c components"))?;
        out.push(IndexEntry {
            id,
            provenance: Provenance {
                sequence: f[1].to_string(),
                frames,
            },
            label,
            jitter: JitterParams { delta_s, delta_c },
        });
    }
    Ok(out)
}

pub fn import_dataset(dir: &Path) -> Result<Vec<ImportedSample>> {
    read_index(dir)?
        .into_iter()
        .map(|entry| {
            let id = entry.id;
            Ok(ImportedSample {
                candidate: Image::load(&patch_file(dir, id, "c"))?,
                z0: Image::load(&patch_file(dir, id, "z0"))?,
                zd: Image::load(&patch_file(dir, id, "zd"))?,
                entry,
            })
        })
        .collect()
}
