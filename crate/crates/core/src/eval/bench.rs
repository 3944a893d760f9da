//! Per-frame latency measurement.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub frames: usize,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub fps: f64,
}

impl LatencyStats {
    pub fn from_samples(samples_ms: &[f64]) -> Result<Self> {
        if samples_ms.is_empty() {
            return Err(Error::invalid("no latency samples"));
        }
        let mut sorted = samples_ms.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median_ms = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        let mean_ms = sorted.iter().sum::<f64>() / n as f64;
        Ok(Self {
            frames: n,
            mean_ms,
            median_ms,
            fps: if mean_ms > 0.0 {
                1000.0 / mean_ms
            } else {
                f64::INFINITY
            },
        })
    }

    /// Statistics of the samples after the first `warmup`.
    pub fn after_warmup(samples_ms: &[f64], warmup: usize) -> Result<Self> {
        if samples_ms.len() <= warmup {
            return Err(Error::invalid(format!(
                "{} frames do not exceed the {warmup}-frame warmup",
                samples_ms.len()
            )));
        }
        Self::from_samples(&samples_ms[warmup..])
    }
}

/// Times `step(i)` for `i in 0..frames`; the first `warmup` calls are not
/// counted.
pub fn latency_benchmark<F>(frames: usize, warmup: usize, mut step: F) -> Result<LatencyStats>
where
    F: FnMut(usize) -> Result<()>,
{
    if frames <= warmup {
        return Err(Error::invalid(format!(
            "{frames} frames do not exceed the {warmup}-frame warmup"
        )));
    }
    let mut samples = Vec::with_capacity(frames - warmup);
    for i in 0..frames {
        let t = Instant::now();
        step(i)?;
        if i >= warmup {
            samples.push(t.elapsed().as_secs_f64() * 1e3);
        }
    }
    LatencyStats::from_samples(&samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_of_known_samples() {
        let s = LatencyStats::from_samples(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((s.median_ms, s.mean_ms, s.fps), (2.5, 2.5, 400.0));
        let s = LatencyStats::after_warmup(&[100.0, 1.0, 2.0, 3.0], 1).unwrap();
        assert_eq!((s.frames, s.median_ms), (3, 2.0));
        assert!(LatencyStats::after_warmup(&[1.0], 1).is_err());
    }

    #[test]
    fn benchmark_counts_frames() {
        let mut calls = 0;
        let s = latency_benchmark(10, 3, |_| {
            calls += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!((calls, s.frames), (10, 7));
    }
}
