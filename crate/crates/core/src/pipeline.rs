//! The regulated tracking loop and the fixed-region baseline.

use std::path::PathBuf;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{search_region_rect, RadiusCategory};
use crate::image::{crop_resize, Image, Interpolation};
use crate::io::Sequence;
use crate::regulator::{
    make_candidate_region, oracle_regulate, select_category, ClassicalConfig, ClassicalRegulator,
    DecisionTable, RegulatorOutput, RegulatorState, DEFAULT_LOCKING_FRAMES,
};
use crate::trackers::{
    oracle_noisy_track, patch_to_image_coords, window_penalty, TrackerConfig, TrackerKind,
    TrackerSet,
};
use crate::BBox;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegulatorKind {
    Oracle,
    Classical,
    /// Decision table file, or a directory holding `<sequence>.csv` tables.
    External(PathBuf),
}

impl std::str::FromStr for RegulatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oracle" => Ok(Self::Oracle),
            "classical" => Ok(Self::Classical),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(Self::External(PathBuf::from(p))),
                _ => Err(Error::invalid(format!("unknown regulator '{s}'"))),
            },
        }
    }
}

impl std::fmt::Display for RegulatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Oracle => write!(f, "oracle"),
            Self::Classical => write!(f, "classical"),
            Self::External(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub regulator: RegulatorKind,
    /// Consecutive smallest-region frames that count as target-locking.
    pub locking_frames: usize,
    pub classical: ClassicalConfig,
    pub tracker: TrackerConfig,
    /// Categories the loop may use.
    pub restriction: Vec<RadiusCategory>,
    pub seed: u64,
    pub interpolation: Interpolation,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            regulator: RegulatorKind::Classical,
            locking_frames: DEFAULT_LOCKING_FRAMES,
            classical: ClassicalConfig::default(),
            tracker: TrackerConfig::default(),
            restriction: RadiusCategory::ALL.to_vec(),
            seed: 0,
            interpolation: Interpolation::Bilinear,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restriction.is_empty() {
            return Err(Error::invalid("category restriction set is empty"));
        }
        if self.locking_frames == 0 {
            return Err(Error::invalid("locking frame count must be positive"));
        }
        self.classical.validate()?;
        self.tracker.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame: usize,
    pub bbox: BBox,
    pub category: RadiusCategory,
    pub confidence: f64,
    pub latency_ms: f64,
}

impl FrameRecord {
    /// Equality ignoring the wall-clock field.
    pub fn same_result(&self, other: &Self) -> bool {
        self.frame == other.frame
            && self.bbox == other.bbox
            && self.category == other.category
            && self.confidence == other.confidence
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub sequence: String,
    pub init: BBox,
    /// Frames 1.. in order; frame 0 is the initialization.
    pub records: Vec<FrameRecord>,
    pub reference_updates: usize,
}

impl Trajectory {
    pub fn boxes(&self) -> Vec<BBox> {
        self.records.iter().map(|r| r.bbox).collect()
    }

    pub fn latencies_ms(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.latency_ms).collect()
    }

    pub fn same_results(&self, other: &Self) -> bool {
        self.init == other.init
            && self.records.len() == other.records.len()
            && self
                .records
                .iter()
                .zip(&other.records)
                .all(|(a, b)| a.same_result(b))
    }
}

/// The smallest allowed category at least as large as `cat`, else the largest
/// allowed one.
pub fn clamp_category(cat: RadiusCategory, allowed: &[RadiusCategory]) -> RadiusCategory {
    allowed
        .iter()
        .copied()
        .filter(|&a| a >= cat)
        .min()
        .or_else(|| allowed.iter().copied().max())
        .unwrap_or(cat)
}

enum Mode {
    Regulated,
    Fixed(RadiusCategory),
}

enum Decider {
    Oracle,
    Classical(ClassicalRegulator),
    External(DecisionTable),
    None,
}

fn sequence_seed(seed: u64, name: &str) -> u64 {
    // FNV-1a of the name mixed with the run seed
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

pub fn srrt_track_sequence(seq: &Sequence, cfg: &PipelineConfig) -> Result<Trajectory> {
    run(seq, cfg, Mode::Regulated)
}

pub fn fixed_sr_track_sequence(
    seq: &Sequence,
    gamma: RadiusCategory,
    cfg: &PipelineConfig,
) -> Result<Trajectory> {
    run(seq, cfg, Mode::Fixed(gamma))
}

fn run(seq: &Sequence, cfg: &PipelineConfig, mode: Mode) -> Result<Trajectory> {
    cfg.validate()?;
    if seq.len() < 2 {
        return Err(Error::invalid(format!(
            "sequence '{}' has {} frames, need at least 2",
            seq.name,
            seq.len()
        )));
    }
    let init = *seq
        .gt(0)
        .filter(|b| b.is_valid())
        .ok_or_else(|| Error::invalid(format!("sequence '{}' has no initial box", seq.name)))?;
    let interp = cfg.interpolation;

    let decider = match (&mode, &cfg.regulator) {
        (Mode::Fixed(_), _) => Decider::None,
        (Mode::Regulated, RegulatorKind::Oracle) => Decider::Oracle,
        (Mode::Regulated, RegulatorKind::Classical) => {
            Decider::Classical(ClassicalRegulator::new(cfg.classical.clone())?)
        }
        (Mode::Regulated, RegulatorKind::External(p)) => {
            let path = if p.is_dir() {
                p.join(format!("{}.csv", seq.name))
            } else {
                p.clone()
            };
            Decider::External(DecisionTable::load(&path)?)
        }
    };

    let first = seq.frame(0)?.to_gray();
    let mut trackers = TrackerSet::new();
    trackers.initialize(&first, &init, cfg.tracker.kind)?;
    let mut state = match mode {
        Mode::Regulated => Some(RegulatorState::new(
            &first,
            &init,
            cfg.locking_frames,
            interp,
        )?),
        Mode::Fixed(_) => None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(sequence_seed(cfg.seed, &seq.name));

    let mut prev = init;
    let mut records = Vec::with_capacity(seq.len() - 1);
    for t in 1..seq.len() {
        let raw = seq.frame(t)?;
        let started = Instant::now();
        let frame: Image = raw.to_gray();
        let gt = seq.gt(t);

        let proposed = match (&mode, &decider) {
            (Mode::Fixed(c), _) => *c,
            (_, Decider::Oracle) => match gt {
                Some(g) if !g.is_valid() => RadiusCategory::SR8,
                _ => oracle_regulate(&prev, gt)?,
            },
            (_, Decider::Classical(reg)) => {
                let st = state.as_ref().expect("regulated runs keep a state");
                let candidate = make_candidate_region(&frame, &prev, interp)?;
                select_category(&reg.regulate(st, &candidate)?)
            }
            (_, Decider::External(table)) => {
                let out: &RegulatorOutput = table.get(t).ok_or_else(|| Error::FrameRead {
                    sequence: seq.name.clone(),
                    index: t,
                    reason: "no regulator decision for this frame".into(),
                })?;
                select_category(out)
            }
            (_, Decider::None) => unreachable!("fixed mode handled above"),
        };
        let category = clamp_category(proposed, &cfg.restriction);
        let dispatch = trackers.dispatch(category)?;
        let region = search_region_rect(&prev, dispatch.crop_gamma)?;

        let (bbox, confidence) = match cfg.tracker.kind {
            TrackerKind::Oracle => {
                let r = oracle_noisy_track(
                    &region,
                    category,
                    gt,
                    &prev,
                    cfg.tracker.sigma,
                    cfg.tracker.sigma_scale,
                    &mut rng,
                )?;
                (r.bbox, r.confidence)
            }
            TrackerKind::Ncc => {
                let side = dispatch.handle.input_side();
                let search = crop_resize(&frame, &region, side, interp)?;
                let resp =
                    dispatch
                        .handle
                        .ncc_track(&search, dispatch.crop_gamma, &cfg.tracker.scales)?;
                let penalized = window_penalty(&resp.scores, cfg.tracker.lambda)?;
                let (in_patch, conf) = resp.locate(&penalized);
                (patch_to_image_coords(&in_patch, &region, side), conf)
            }
        };
        // lost frames keep the previous box
        let bbox = if confidence > 0.0 && bbox.is_valid() {
            bbox
        } else {
            prev
        };

        if let Some(st) = state.as_mut() {
            st.ldu_step(category, &bbox, &frame, t, interp)?;
        }
        let latency_ms = started.elapsed().as_secs_f64() * 1e3;
        records.push(FrameRecord {
            frame: t,
            bbox,
            category,
            confidence,
            latency_ms,
        });
        prev = bbox;
    }
    Ok(Trajectory {
        sequence: seq.name.clone(),
        init,
        records,
        reference_updates: state.map_or(0, |s| s.update_count()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use RadiusCategory::*;

    #[test]
    fn clamp_rounds_up_then_down() {
        assert_eq!(clamp_category(SR6, &[SR2, SR4]), SR4);
        assert_eq!(clamp_category(SR4, &[SR2, SR6]), SR6);
        assert_eq!(clamp_category(SR2, &[SR4]), SR4);
        assert_eq!(clamp_category(SR8, &[SR2, SR4, SR6, SR8]), SR8);
    }

    #[test]
    fn regulator_kind_parse() {
        assert_eq!(
            "oracle".parse::<RegulatorKind>().unwrap(),
            RegulatorKind::Oracle
        );
        assert_eq!(
            "file:/tmp/x.csv".parse::<RegulatorKind>().unwrap(),
            RegulatorKind::External(PathBuf::from("/tmp/x.csv"))
        );
        assert!("file:".parse::<RegulatorKind>().is_err());
        assert!("neural".parse::<RegulatorKind>().is_err());
    }

    #[test]
    fn short_sequence_rejected() {
        let seq = Sequence::in_memory(
            "s",
            vec![Image::filled(32, 32, 1, 0.0)],
            Some(vec![BBox::new(16.0, 16.0, 8.0, 8.0)]),
        )
        .unwrap();
        assert!(matches!(
            srrt_track_sequence(&seq, &PipelineConfig::default()),
            Err(Error::InvalidArgument(_))
        ));
    }
}
