//! Flat key-value run configuration (TOML).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RadiusCategory;
use crate::image::Interpolation;
use crate::pipeline::{PipelineConfig, RegulatorKind};
use crate::regulator::ClassicalConfig;
use crate::trackers::{TrackerConfig, TrackerKind};
use crate::trainkit::SamplerConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// `oracle`, `classical` or `file:<path>`.
    pub regulator: String,
    /// `ncc` or `oracle`.
    pub tracker: String,
    /// Allowed radius factors.
    pub categories: Vec<u32>,
    /// Locking frames before the dynamic reference is replaced.
    pub k: usize,
    pub lambda: f64,
    pub tracker_scales: Vec<f64>,
    pub sigma: f64,
    pub sigma_scale: f64,
    pub tau_miss: f64,
    pub fusion_initial: f64,
    pub fusion_dynamic: f64,
    pub temperature: f64,
    pub stride: usize,
    pub regulator_scales: Vec<f64>,
    pub interpolation: Interpolation,
    pub delta_s_max: f64,
    pub max_frame_spread: usize,
    pub reverse_probability: f64,
    pub max_draws: usize,
    pub sr8_max_factor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = PipelineConfig::default();
        let s = SamplerConfig::default();
        Self {
            seed: p.seed,
            regulator: p.regulator.to_string(),
            tracker: "ncc".into(),
            categories: p.restriction.iter().map(|c| c.factor()).collect(),
            k: p.locking_frames,
            lambda: p.tracker.lambda,
            tracker_scales: p.tracker.scales.clone(),
            sigma: p.tracker.sigma,
            sigma_scale: p.tracker.sigma_scale,
            tau_miss: p.classical.tau_miss,
            fusion_initial: p.classical.fusion[0],
            fusion_dynamic: p.classical.fusion[1],
            temperature: p.classical.temperature,
            stride: p.classical.stride,
            regulator_scales: p.classical.scales.clone(),
            interpolation: p.interpolation,
            delta_s_max: s.delta_s_max,
            max_frame_spread: s.max_frame_spread,
            reverse_probability: s.reverse_probability,
            max_draws: s.max_draws,
            sr8_max_factor: s.sr8_max_factor,
            dataset: None,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_toml()?).map_err(|e| Error::io(path, e))
    }

    pub fn restriction(&self) -> Result<Vec<RadiusCategory>> {
        let mut cats = Vec::with_capacity(self.categories.len());
        for &f in &self.categories {
            let c = RadiusCategory::from_factor(f)
                .ok_or_else(|| Error::Config(format!("unknown category {f}")))?;
            if !cats.contains(&c) {
                cats.push(c);
            }
        }
        cats.sort();
        Ok(cats)
    }

    pub fn pipeline(&self) -> Result<PipelineConfig> {
        let cfg = PipelineConfig {
            regulator: self.regulator.parse::<RegulatorKind>()?,
            locking_frames: self.k,
            classical: ClassicalConfig {
                stride: self.stride,
                scales: self.regulator_scales.clone(),
                fusion: [self.fusion_initial, self.fusion_dynamic],
                tau_miss: self.tau_miss,
                temperature: self.temperature,
            },
            tracker: TrackerConfig {
                kind: self.tracker.parse::<TrackerKind>()?,
                lambda: self.lambda,
                scales: self.tracker_scales.clone(),
                sigma: self.sigma,
                sigma_scale: self.sigma_scale,
            },
            restriction: self.restriction()?,
            seed: self.seed,
            interpolation: self.interpolation,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn sampler(&self) -> Result<SamplerConfig> {
        let s = SamplerConfig {
            delta_s_max: self.delta_s_max,
            max_frame_spread: self.max_frame_spread,
            reverse_probability: self.reverse_probability,
            max_draws: self.max_draws,
            sr8_max_factor: self.sr8_max_factor,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        };
        if self.seed > i64::MAX as u64 {
            return Err(Error::Config(
                "seed must fit in a signed 64-bit integer".into(),
            ));
        }
        if self.categories.is_empty() {
            return Err(Error::Config("categories must not be empty".into()));
        }
        self.pipeline().map_err(wrap)?;
        self.sampler().map_err(wrap)?;
        Ok(())
    }
}
