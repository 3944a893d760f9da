//! Multi-sequence evaluation report.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::bench::LatencyStats;
use super::metrics::{
    overlaps, precision_curves, success_from_overlaps, success_thresholds, SuccessCurve,
};
use super::stats::SrDistribution;
use crate::error::Result;
use crate::geometry::RadiusCategory;
use crate::pipeline::FrameRecord;
use crate::BBox;

/// One sequence to score: the records of frames 1.. and the full ground
/// truth (frame 0 included).
#[derive(Debug, Clone)]
pub struct EvalInput {
    pub name: String,
    pub records: Vec<FrameRecord>,
    pub groundtruth: Vec<BBox>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub name: String,
    pub frames: usize,
    pub auc: f64,
    pub p: f64,
    pub p_norm: f64,
    pub success: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub sequences: Vec<SequenceReport>,
    /// Means over sequences.
    pub auc: f64,
    pub p: f64,
    pub p_norm: f64,
    pub frames: usize,
    pub categories: BTreeMap<String, f64>,
    /// Wall-clock figures; the only fields that vary between identical runs.
    pub timing: Option<LatencyStats>,
}

impl EvalReport {
    /// Mean success rate per threshold over sequences.
    pub fn curve(&self) -> SuccessCurve {
        let thresholds = success_thresholds().to_vec();
        let n = self.sequences.len().max(1) as f64;
        let rates: Vec<f64> = (0..thresholds.len())
            .map(|i| self.sequences.iter().map(|s| s.success[i]).sum::<f64>() / n)
            .collect();
        SuccessCurve {
            auc: self.auc,
            thresholds,
            rates,
            frames: self.frames,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable") + "\n"
    }
}

/// Scores every input and reduces in name order.
pub fn evaluate(inputs: &[EvalInput]) -> Result<EvalReport> {
    let mut sorted: Vec<&EvalInput> = inputs.iter().collect();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));
    let mut sequences = Vec::with_capacity(sorted.len());
    let mut cats = SrDistribution::default();
    let mut latencies = Vec::new();
    for inp in sorted {
        let pred = crate::io::align_records(&inp.records, inp.groundtruth.len())?;
        let gt = &inp.groundtruth[1..];
        let curve = success_from_overlaps(&overlaps(&pred, gt)?);
        let prec = precision_curves(&pred, gt)?;
        for r in &inp.records {
            cats.add(r.category);
            latencies.push(r.latency_ms);
        }
        sequences.push(SequenceReport {
            name: inp.name.clone(),
            frames: curve.frames,
            auc: curve.auc,
            p: prec.p,
            p_norm: prec.p_norm,
            success: curve.rates,
        });
    }
    let n = sequences.len().max(1) as f64;
    let mean = |f: fn(&SequenceReport) -> f64| sequences.iter().map(f).sum::<f64>() / n;
    Ok(EvalReport {
        auc: mean(|s| s.auc),
        p: mean(|s| s.p),
        p_norm: mean(|s| s.p_norm),
        frames: sequences.iter().map(|s| s.frames).sum(),
        categories: RadiusCategory::ALL
            .iter()
            .map(|c| (c.to_string(), cats.fraction(*c)))
            .collect(),
        timing: LatencyStats::from_samples(&latencies).ok(),
        sequences,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(name: &str, offset: f64) -> EvalInput {
        let gt: Vec<BBox> = (0..6)
            .map(|i| BBox::new(50.0 + i as f64, 40.0, 20.0, 10.0))
            .collect();
        let records = (1..6)
            .map(|i| FrameRecord {
                frame: i,
                bbox: BBox::new(gt[i].cx + offset, gt[i].cy, 20.0, 10.0),
                category: RadiusCategory::SR2,
                confidence: 1.0,
                latency_ms: 2.0,
            })
            .collect();
        EvalInput {
            name: name.into(),
            records,
            groundtruth: gt,
        }
    }

    #[test]
    fn perfect_and_lost_sequences_average() {
        let r = evaluate(&[input("b", 500.0), input("a", 0.0)]).unwrap();
        assert_eq!(r.sequences[0].name, "a");
        assert!((r.sequences[0].auc - 20.0 / 21.0).abs() < 1e-12);
        assert_eq!(r.sequences[1].auc, 0.0);
        assert!((r.auc - 10.0 / 21.0).abs() < 1e-12);
        assert_eq!(r.p, 0.5);
        assert_eq!(r.categories["2SR"], 1.0);
        assert_eq!(r.curve().rates.len(), 21);
        assert!(r.to_json().contains("\"timing\""));
    }
}
