//! Training-free regulator.
//!
//! Both references are matched against the candidate with per-channel
//! normalized correlation over a small scale sweep, the two score maps are
//! fused by a weighted sum, and every offset votes for the category of the
//! minimum factor its implied box would need. The best vote per category is
//! the category's evidence; the "target missing" category `SR8` always gets
//! at least `tau_miss`. Evidence goes through a softmax.

use serde::{Deserialize, Serialize};

use super::features::{extract_image_features, normalized_correlation, FeatureMap};
use super::state::{RegulatorState, CANDIDATE_GAMMA};
use super::RegulatorOutput;
use crate::error::{Error, Result};
use crate::geometry::{bucketize_factor, min_required_factor, BoundingBox, RadiusCategory};
use crate::grid::Grid;
use crate::image::{resize, Image, Interpolation, Patch};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalConfig {
    pub stride: usize,
    pub scales: Vec<f64>,
    /// Weights of the initial and dynamic reference evidence.
    pub fusion: [f64; 2],
    pub tau_miss: f64,
    pub temperature: f64,
}

impl Default for ClassicalConfig {
    fn default() -> Self {
        Self {
            stride: 8,
            scales: vec![0.8, 1.0, 1.25],
            fusion: [0.5, 0.5],
            tau_miss: 0.3,
            temperature: 1.0,
        }
    }
}

impl ClassicalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.stride == 0 {
            return Err(Error::invalid("stride must be positive"));
        }
        if self.scales.is_empty() || self.scales.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::invalid("scale sweep must be non-empty and positive"));
        }
        if self.fusion.iter().any(|&w| !(w >= 0.0)) || self.fusion[0] + self.fusion[1] <= 0.0 {
            return Err(Error::invalid(
                "fusion weights must be non-negative with a positive sum",
            ));
        }
        if !(-1.0..=1.0).contains(&self.tau_miss) {
            return Err(Error::invalid("tau_miss must lie in [-1, 1]"));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::invalid("temperature must be positive"));
        }
        Ok(())
    }
}

/// Best fused match found by the regulator, in image coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestMatch {
    pub score: f64,
    pub implied: BoundingBox<f64>,
    pub factor: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ClassicalRegulator {
    cfg: ClassicalConfig,
}

impl ClassicalRegulator {
    pub fn new(cfg: ClassicalConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg })
    }

    pub fn config(&self) -> &ClassicalConfig {
        &self.cfg
    }

    pub fn regulate(&self, state: &RegulatorState, candidate: &Patch) -> Result<RegulatorOutput> {
        Ok(self.regulate_detailed(state, candidate)?.0)
    }

    /// Output plus the best fused match (None when no offset scored).
    pub fn regulate_detailed(
        &self,
        state: &RegulatorState,
        candidate: &Patch,
    ) -> Result<(RegulatorOutput, Option<BestMatch>)> {
        let cfg = &self.cfg;
        let stride = cfg.stride;
        let side = candidate.side();
        let cand_feat = extract_image_features(&candidate.image, stride)?;
        let rect = candidate.rect;
        let prev = BoundingBox::new(
            rect.cx,
            rect.cy,
            rect.w / CANDIDATE_GAMMA,
            rect.h / CANDIDATE_GAMMA,
        );
        let target_px = side as f64 / CANDIDATE_GAMMA;
        let wsum = cfg.fusion[0] + cfg.fusion[1];
        let (w0, wd) = (cfg.fusion[0] / wsum, cfg.fusion[1] / wsum);
        let same_refs = state.zd == state.z0;

        let mut evidence = [-1.0f64; RadiusCategory::COUNT];
        let mut best: Option<BestMatch> = None;
        for &s in &cfg.scales {
            // reference size snapped to whole cells
            let cells = ((target_px * s / stride as f64).round() as usize).max(1);
            let ref_px = cells * stride;
            if cells > cand_feat.height() || cells > cand_feat.width() {
                continue;
            }
            let eff_scale = ref_px as f64 / target_px;
            let n0 = reference_scores(&state.z0.image, ref_px, stride, &cand_feat)?;
            let fused = if same_refs || wd == 0.0 {
                n0
            } else {
                let nd = reference_scores(&state.zd.image, ref_px, stride, &cand_feat)?;
                Grid::from_fn(n0.rows(), n0.cols(), |r, c| {
                    w0 * n0.get(r, c) + wd * nd.get(r, c)
                })
            };
            let half = cells as f64 / 2.0;
            for r in 0..fused.rows() {
                for c in 0..fused.cols() {
                    let score = fused.get(r, c);
                    let px = (c as f64 + half) * stride as f64;
                    let py = (r as f64 + half) * stride as f64;
                    let implied = BoundingBox::new(
                        rect.x0() + px * rect.w / side as f64,
                        rect.y0() + py * rect.h / side as f64,
                        eff_scale * prev.w,
                        eff_scale * prev.h,
                    );
                    let factor = min_required_factor(&prev, &implied)?;
                    let k = bucketize_factor(factor).index();
                    if score > evidence[k] {
                        evidence[k] = score;
                    }
                    if best.is_none_or(|b| score > b.score) {
                        best = Some(BestMatch {
                            score,
                            implied,
                            factor,
                        });
                    }
                }
            }
        }
        let miss = RadiusCategory::SR8.index();
        evidence[miss] = evidence[miss].max(cfg.tau_miss);
        Ok((RegulatorOutput::softmax(evidence, cfg.temperature), best))
    }
}

fn reference_scores(
    reference: &Image,
    ref_px: usize,
    stride: usize,
    cand: &FeatureMap<f32>,
) -> Result<Grid<f64>> {
    let scaled = resize(reference, ref_px, Interpolation::Bilinear)?;
    let feats = extract_image_features(&scaled, stride)?;
    Ok(normalized_correlation(&feats, cand)?.map(|&v| v as f64))
}
