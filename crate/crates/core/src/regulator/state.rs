//! Reference patches and the locking-state determined update.

use crate::error::Result;
use crate::geometry::{search_region_rect, BoundingBox, RadiusCategory};
use crate::image::{crop_resize, Image, Interpolation, Patch};

/// Side of the reference patches.
pub const REFERENCE_SIDE: usize = 128;
/// Side of the candidate patch.
pub const CANDIDATE_SIDE: usize = 384;
/// Per-axis factor of the candidate region relative to the previous box.
pub const CANDIDATE_GAMMA: f64 = 6.0;
pub const DEFAULT_LOCKING_FRAMES: usize = 5;

/// Counts consecutive smallest-region decisions and fires every `k` of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LockingCounter {
    count: usize,
    k: usize,
}

impl LockingCounter {
    pub fn new(k: usize) -> Self {
        assert!(k > 0, "locking threshold must be positive");
        Self { count: 0, k }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn threshold(&self) -> usize {
        self.k
    }

    /// Returns true when this step completes a run of `k` and the counter resets.
    pub fn step(&mut self, chosen: RadiusCategory) -> bool {
        if chosen != RadiusCategory::SR2 {
            self.count = 0;
            return false;
        }
        self.count += 1;
        if self.count >= self.k {
            self.count = 0;
            true
        } else {
            false
        }
    }
}

/// 128x128 tight crop of a box (no context).
pub fn reference_patch(
    image: &Image,
    target: &BoundingBox<f64>,
    interp: Interpolation,
) -> Result<Patch> {
    let rect = search_region_rect(target, 1.0)?;
    crop_resize(image, &rect, REFERENCE_SIDE, interp)
}

/// Candidate region for the regulator: 6x the previous box per axis, resampled to 384.
pub fn make_candidate_region(
    image: &Image,
    prev: &BoundingBox<f64>,
    interp: Interpolation,
) -> Result<Patch> {
    let rect = search_region_rect(prev, CANDIDATE_GAMMA)?;
    crop_resize(image, &rect, CANDIDATE_SIDE, interp)
}

#[derive(Debug, Clone)]
pub struct RegulatorState {
    pub z0: Patch,
    pub zd: Patch,
    locking: LockingCounter,
    last_update_frame: Option<usize>,
    updates: usize,
}

impl RegulatorState {
    /// Both references start as the crop of the initial box.
    pub fn new(
        first_frame: &Image,
        init: &BoundingBox<f64>,
        k: usize,
        interp: Interpolation,
    ) -> Result<Self> {
        let z0 = reference_patch(first_frame, init, interp)?;
        Ok(Self::from_reference(z0, k))
    }

    pub fn from_reference(z0: Patch, k: usize) -> Self {
        Self {
            zd: z0.clone(),
            z0,
            locking: LockingCounter::new(k),
            last_update_frame: None,
            updates: 0,
        }
    }

    pub fn locking_count(&self) -> usize {
        self.locking.count()
    }
    pub fn locking_threshold(&self) -> usize {
        self.locking.threshold()
    }
    pub fn last_update_frame(&self) -> Option<usize> {
        self.last_update_frame
    }
    pub fn update_count(&self) -> usize {
        self.updates
    }

    /// Records the frame's decision; on target-locking replaces the dynamic
    /// reference with a crop of `predicted` from `image`. Returns whether the
    /// update fired.
    pub fn ldu_step(
        &mut self,
        chosen: RadiusCategory,
        predicted: &BoundingBox<f64>,
        image: &Image,
        frame: usize,
        interp: Interpolation,
    ) -> Result<bool> {
        if !self.locking.step(chosen) {
            return Ok(false);
        }
        self.zd = reference_patch(image, predicted, interp)?;
        self.last_update_frame = Some(frame);
        self.updates += 1;
        Ok(true)
    }
}
