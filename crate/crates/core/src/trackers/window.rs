use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::Scalar;

/// Symmetric Hann window of `n` points; peaks at 1 in the middle.
pub fn hann<T: Scalar>(n: usize) -> Vec<T> {
    if n == 1 {
        return vec![T::one()];
    }
    let half = T::of(0.5);
    let denom = T::of_usize(n - 1);
    (0..n)
        .map(|i| half - half * (T::TAU() * T::of_usize(i) / denom).cos())
        .collect()
}

/// Blends a cosine window into a score map:
/// `(1 - lambda) * scores + lambda * max(scores) * hann_rows x hann_cols`.
pub fn window_penalty<T: Scalar>(scores: &Grid<T>, lambda: T) -> Result<Grid<T>> {
    if !(lambda >= T::zero() && lambda <= T::one()) {
        return Err(Error::invalid(format!(
            "window penalty weight {lambda} outside [0, 1]"
        )));
    }
    if lambda == T::zero() {
        return Ok(scores.clone());
    }
    let peak = scores.max_value().unwrap_or(T::zero());
    let hr = hann::<T>(scores.rows());
    let hc = hann::<T>(scores.cols());
    let keep = T::one() - lambda;
    Ok(Grid::from_fn(scores.rows(), scores.cols(), |r, c| {
        keep * scores.get(r, c) + lambda * peak * hr[r] * hc[c]
    }))
}
