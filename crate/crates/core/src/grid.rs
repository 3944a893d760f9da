use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major 2-D grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy> Grid<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::invalid(format!(
                "grid buffer of {} values does not match {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn filled(rows: usize, cols: usize, v: T) -> Self {
        Self {
            rows,
            cols,
            data: vec![v; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn data(&self) -> &[T] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn map<U: Copy>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Scalar> Grid<T> {
    /// Row-major first maximum `(row, col, value)`; NaN cells are skipped.
    pub fn argmax(&self) -> Option<(usize, usize, T)> {
        let mut best: Option<(usize, T)> = None;
        for (i, &v) in self.data.iter().enumerate() {
            if v.is_nan() {
                continue;
            }
            match best {
                Some((_, b)) if v <= b => {}
                _ => best = Some((i, v)),
            }
        }
        best.map(|(i, v)| (i / self.cols, i % self.cols, v))
    }

    pub fn max_value(&self) -> Option<T> {
        self.argmax().map(|(_, _, v)| v)
    }
}

/// Summed-area table with a zero guard row/column, accumulated in `f64`.
pub(crate) struct Integral {
    cols: usize,
    sum: Vec<f64>,
}

impl Integral {
    pub(crate) fn new(rows: usize, cols: usize, values: impl Fn(usize, usize) -> f64) -> Self {
        let stride = cols + 1;
        let mut sum = vec![0.0; (rows + 1) * stride];
        for r in 0..rows {
            let mut row = 0.0;
            for c in 0..cols {
                row += values(r, c);
                sum[(r + 1) * stride + c + 1] = sum[r * stride + c + 1] + row;
            }
        }
        Self { cols, sum }
    }

    /// Sum over rows `r..r+h`, cols `c..c+w`.
    #[inline]
    pub(crate) fn window(&self, r: usize, c: usize, h: usize, w: usize) -> f64 {
        let s = self.cols + 1;
        self.sum[(r + h) * s + c + w] - self.sum[r * s + c + w] - self.sum[(r + h) * s + c]
            + self.sum[r * s + c]
    }
}
