//! One-pass evaluation metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{iou, BoundingBox};
use crate::scalar::Scalar;

pub const SUCCESS_THRESHOLDS: usize = 21;
pub const PRECISION_PIXELS: f64 = 20.0;
pub const NORMALIZED_PRECISION: f64 = 0.2;

/// Overlap thresholds `0.00, 0.05, ..., 1.00`.
pub fn success_thresholds() -> [f64; SUCCESS_THRESHOLDS] {
    std::array::from_fn(|i| i as f64 / 20.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessCurve {
    pub thresholds: Vec<f64>,
    pub rates: Vec<f64>,
    pub auc: f64,
    /// Frames scored (frames with an absent target are excluded).
    pub frames: usize,
}

impl SuccessCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("threshold,success\n");
        for (t, r) in self.thresholds.iter().zip(&self.rates) {
            s.push_str(&format!("{t:.2},{r}\n"));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Precision {
    pub p: f64,
    pub p_norm: f64,
    pub frames: usize,
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::invalid(format!(
            "trajectory has {a} boxes, ground truth {b}"
        )));
    }
    Ok(())
}

/// IoUs of frames with a visible target.
pub fn overlaps<T: Scalar>(pred: &[BoundingBox<T>], gt: &[BoundingBox<T>]) -> Result<Vec<f64>> {
    check_lengths(pred.len(), gt.len())?;
    Ok(pred
        .iter()
        .zip(gt)
        .filter(|(_, g)| g.is_valid())
        .map(|(p, g)| iou(p, g).to_f64_lossy())
        .collect())
}

/// Success rate uses strict `iou > threshold`.
pub fn success_curve<T: Scalar>(
    pred: &[BoundingBox<T>],
    gt: &[BoundingBox<T>],
) -> Result<SuccessCurve> {
    Ok(success_from_overlaps(&overlaps(pred, gt)?))
}

pub fn success_from_overlaps(ious: &[f64]) -> SuccessCurve {
    let thresholds = success_thresholds();
    let n = ious.len();
    let rates: Vec<f64> = thresholds
        .iter()
        .map(|&t| {
            if n == 0 {
                0.0
            } else {
                ious.iter().filter(|&&v| v > t).count() as f64 / n as f64
            }
        })
        .collect();
    let auc = rates.iter().sum::<f64>() / SUCCESS_THRESHOLDS as f64;
    SuccessCurve {
        thresholds: thresholds.to_vec(),
        rates,
        auc,
        frames: n,
    }
}

/// Center-error precision at 20 px, and normalized precision: the center
/// offset divided per axis by the ground-truth size, Euclidean norm at most 0.2.
pub fn precision_curves<T: Scalar>(
    pred: &[BoundingBox<T>],
    gt: &[BoundingBox<T>],
) -> Result<Precision> {
    check_lengths(pred.len(), gt.len())?;
    let (mut n, mut hit, mut hit_norm) = (0usize, 0usize, 0usize);
    for (p, g) in pred.iter().zip(gt).filter(|(_, g)| g.is_valid()) {
        n += 1;
        let dx = (p.cx - g.cx).to_f64_lossy();
        let dy = (p.cy - g.cy).to_f64_lossy();
        if (dx * dx + dy * dy).sqrt() <= PRECISION_PIXELS {
            hit += 1;
        }
        let nx = dx / g.w.to_f64_lossy();
        let ny = dy / g.h.to_f64_lossy();
        if (nx * nx + ny * ny).sqrt() <= NORMALIZED_PRECISION {
            hit_norm += 1;
        }
    }
    let frac = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    Ok(Precision {
        p: frac(hit),
        p_norm: frac(hit_norm),
        frames: n,
    })
}
