//! Normalized cross-correlation template matching.
//!
//! The correlation numerator is computed in the frequency domain, the window
//! statistics with summed-area tables.

use rustfft::num_complex::Complex;
use rustfft::{FftNum, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{Grid, Integral};
use crate::scalar::Scalar;

/// Real-valued match score map.
pub type ScoreMap<T> = Grid<T>;

fn fft2d<T: Scalar + FftNum>(
    planner: &mut FftPlanner<T>,
    buf: &mut [Complex<T>],
    rows: usize,
    cols: usize,
    inverse: bool,
) {
    let row_fft = if inverse {
        planner.plan_fft_inverse(cols)
    } else {
        planner.plan_fft_forward(cols)
    };
    row_fft.process(buf);
    let mut t = vec![Complex::new(T::zero(), T::zero()); rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            t[c * rows + r] = buf[r * cols + c];
        }
    }
    let col_fft = if inverse {
        planner.plan_fft_inverse(rows)
    } else {
        planner.plan_fft_forward(rows)
    };
    col_fft.process(&mut t);
    for r in 0..rows {
        for c in 0..cols {
            buf[r * cols + c] = t[c * rows + r];
        }
    }
}

/// A search image prepared for repeated matching against templates.
pub struct PreparedSearch<T: Scalar + FftNum> {
    rows: usize,
    cols: usize,
    spectrum: Vec<Complex<T>>,
    sum: Integral,
    sum_sq: Integral,
    planner: FftPlanner<T>,
}

impl<T: Scalar + FftNum> PreparedSearch<T> {
    pub fn new(search: &Grid<T>) -> Self {
        let (rows, cols) = (search.rows(), search.cols());
        let mut planner = FftPlanner::new();
        let mut spectrum: Vec<Complex<T>> = search
            .data()
            .iter()
            .map(|&v| Complex::new(v, T::zero()))
            .collect();
        fft2d(&mut planner, &mut spectrum, rows, cols, false);
        let sum = Integral::new(rows, cols, |r, c| search.get(r, c).to_f64_lossy());
        let sum_sq = Integral::new(rows, cols, |r, c| {
            let v = search.get(r, c).to_f64_lossy();
            v * v
        });
        Self {
            rows,
            cols,
            spectrum,
            sum,
            sum_sq,
            planner,
        }
    }

    /// Valid-mode NCC map of size `(rows - th + 1) x (cols - tw + 1)`.
    /// Windows or templates without variance score 0.
    pub fn ncc(&mut self, template: &Grid<T>) -> Result<ScoreMap<T>> {
        let (th, tw) = (template.rows(), template.cols());
        if th == 0 || tw == 0 || th > self.rows || tw > self.cols {
            return Err(Error::invalid(format!(
                "template {th}x{tw} does not fit search {}x{}",
                self.rows, self.cols
            )));
        }
        let n = (th * tw) as f64;
        let mean = template
            .data()
            .iter()
            .map(|v| v.to_f64_lossy())
            .sum::<f64>()
            / n;
        let mut energy = 0.0;
        let mut padded = vec![Complex::new(T::zero(), T::zero()); self.rows * self.cols];
        for r in 0..th {
            for c in 0..tw {
                let d = template.get(r, c).to_f64_lossy() - mean;
                energy += d * d;
                padded[r * self.cols + c] = Complex::new(T::of(d), T::zero());
            }
        }
        fft2d(&mut self.planner, &mut padded, self.rows, self.cols, false);
        for (p, s) in padded.iter_mut().zip(&self.spectrum) {
            *p = *s * p.conj();
        }
        fft2d(&mut self.planner, &mut padded, self.rows, self.cols, true);
        let scale = 1.0 / (self.rows * self.cols) as f64;
        let (oh, ow) = (self.rows - th + 1, self.cols - tw + 1);
        let tol = 1e-9 * energy.max(1e-300);
        Ok(Grid::from_fn(oh, ow, |r, c| {
            let num = padded[r * self.cols + c].re.to_f64_lossy() * scale;
            let s1 = self.sum.window(r, c, th, tw);
            let s2 = self.sum_sq.window(r, c, th, tw);
            let var = s2 - s1 * s1 / n;
            let den = (energy * var).sqrt();
            if energy <= 1e-12 || var <= tol.max(1e-12) {
                T::zero()
            } else {
                T::of((num / den).clamp(-1.0, 1.0))
            }
        }))
    }
}

/// One-shot valid-mode NCC of `template` over `search`.
pub fn match_template<T: Scalar + FftNum>(
    search: &Grid<T>,
    template: &Grid<T>,
) -> Result<ScoreMap<T>> {
    PreparedSearch::new(search).ncc(template)
}
