//! Search-region regulation: probability over radius categories from the
//! dual references and a candidate region, plus the reference update.

mod classical;
mod external;
mod features;
mod state;

pub use classical::{ClassicalConfig, ClassicalRegulator};
pub use external::{parse_decision_table, DecisionTable};
pub use features::{
    depthwise_correlate, extract_features, extract_image_features, normalized_correlation,
    FeatureMap, FEATURE_CHANNELS, MIN_PATCH_SIDE, ORIENTATION_BINS,
};
pub use state::{
    make_candidate_region, reference_patch, LockingCounter, RegulatorState, CANDIDATE_GAMMA,
    CANDIDATE_SIDE, DEFAULT_LOCKING_FRAMES, REFERENCE_SIDE,
};

use crate::error::{Error, Result};
use crate::geometry::{bucketize_factor, min_required_factor, BoundingBox, RadiusCategory};

/// Probability per category, indexed by `RadiusCategory::index`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegulatorOutput {
    probs: [f64; RadiusCategory::COUNT],
}

impl RegulatorOutput {
    pub fn new(probs: [f64; RadiusCategory::COUNT]) -> Result<Self> {
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::invalid(format!(
                "probabilities must be finite and non-negative: {probs:?}"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(format!(
                "probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(Self { probs })
    }

    /// Softmax of `evidence / temperature`.
    pub fn softmax(evidence: [f64; RadiusCategory::COUNT], temperature: f64) -> Self {
        let t = if temperature > 0.0 { temperature } else { 1.0 };
        let m = evidence.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut e = evidence.map(|v| ((v - m) / t).exp());
        let s: f64 = e.iter().sum();
        e.iter_mut().for_each(|v| *v /= s);
        Self { probs: e }
    }

    pub fn one_hot(cat: RadiusCategory) -> Self {
        let mut probs = [0.0; RadiusCategory::COUNT];
        probs[cat.index()] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64; RadiusCategory::COUNT] {
        &self.probs
    }

    pub fn prob(&self, cat: RadiusCategory) -> f64 {
        self.probs[cat.index()]
    }
}

/// Argmax; ties go to the smaller category.
pub fn select_category(out: &RegulatorOutput) -> RadiusCategory {
    let mut best = 0;
    for i in 1..RadiusCategory::COUNT {
        if out.probs[i] > out.probs[best] {
            best = i;
        }
    }
    RadiusCategory::ALL[best]
}

/// Ground-truth regulator: the bucket of the minimum factor that contains the
/// current box.
pub fn oracle_regulate(
    prev: &BoundingBox<f64>,
    cur_gt: Option<&BoundingBox<f64>>,
) -> Result<RadiusCategory> {
    let gt = cur_gt
        .ok_or_else(|| Error::UnsupportedMode("oracle regulator needs ground truth".into()))?;
    if !gt.is_valid() {
        return Err(Error::UnsupportedMode(
            "oracle regulator: target absent in this frame".into(),
        ));
    }
    Ok(bucketize_factor(min_required_factor(prev, gt)?))
}
