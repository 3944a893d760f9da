//! Distribution of the minimum search region needed between adjacent frames.

use serde::{Deserialize, Serialize};

use crate::geometry::{bucketize_factor, min_required_factor, RadiusCategory};
use crate::io::Sequence;
use crate::pipeline::Trajectory;
use crate::BBox;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SrDistribution {
    pub counts: [usize; RadiusCategory::COUNT],
    /// Adjacent pairs skipped because a box was absent.
    pub skipped: usize,
}

impl SrDistribution {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn fraction(&self, cat: RadiusCategory) -> f64 {
        let t = self.total();
        if t == 0 {
            0.0
        } else {
            self.counts[cat.index()] as f64 / t as f64
        }
    }

    pub fn fractions(&self) -> [f64; RadiusCategory::COUNT] {
        RadiusCategory::ALL.map(|c| self.fraction(c))
    }

    pub fn merge(&mut self, other: &Self) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.skipped += other.skipped;
    }

    pub fn add(&mut self, cat: RadiusCategory) {
        self.counts[cat.index()] += 1;
    }
}

/// Adjacent-pair statistic over one ground-truth track.
pub fn min_sr_distribution_of(gt: &[BBox]) -> SrDistribution {
    let mut d = SrDistribution::default();
    for w in gt.windows(2) {
        match min_required_factor(&w[0], &w[1]) {
            Ok(f) => d.add(bucketize_factor(f)),
            Err(_) => d.skipped += 1,
        }
    }
    d
}

/// Pairs are formed within each sequence only; sequences without ground
/// truth contribute nothing.
pub fn min_sr_distribution(dataset: &[Sequence]) -> SrDistribution {
    let mut total = SrDistribution::default();
    for seq in dataset {
        if let Some(gt) = &seq.groundtruth {
            total.merge(&min_sr_distribution_of(gt));
        }
    }
    total
}

/// Histogram of the categories a tracking run chose.
pub fn category_log_distribution(trajectories: &[Trajectory]) -> SrDistribution {
    let mut d = SrDistribution::default();
    for r in trajectories.iter().flat_map(|t| &t.records) {
        d.add(r.category);
    }
    d
}
