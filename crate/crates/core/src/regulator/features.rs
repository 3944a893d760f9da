//! Feature maps, the classical feature extractor and depth-wise correlation.

use crate::error::{Error, Result};
use crate::grid::{Grid, Integral};
use crate::image::{Image, Patch};
use crate::scalar::Scalar;

/// Number of unsigned gradient-orientation bins.
pub const ORIENTATION_BINS: usize = 8;
/// Grayscale channel plus the orientation bins.
pub const FEATURE_CHANNELS: usize = 1 + ORIENTATION_BINS;
pub const MIN_PATCH_SIDE: usize = 32;

/// Channel-major `C x H x W` feature tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap<T> {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Scalar> FeatureMap<T> {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        if channels * height * width != data.len() {
            return Err(Error::invalid(format!(
                "feature buffer of {} values does not match {channels}x{height}x{width}",
                data.len()
            )));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self {
            channels,
            height,
            width,
            data: vec![T::zero(); channels * height * width],
        }
    }

    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> T,
    ) -> Self {
        let mut data = Vec::with_capacity(channels * height * width);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(c, y, x));
                }
            }
        }
        Self {
            channels,
            height,
            width,
            data,
        }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn width(&self) -> usize {
        self.width
    }
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> T {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub fn plane(&self, c: usize) -> &[T] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    /// Sum over channels.
    pub fn channel_sum(&self) -> Grid<T> {
        let n = self.height * self.width;
        let mut out = vec![T::zero(); n];
        for c in 0..self.channels {
            for (o, &v) in out.iter_mut().zip(self.plane(c)) {
                *o += v;
            }
        }
        Grid::from_vec(self.height, self.width, out).expect("sizes consistent")
    }
}

pub fn extract_features(patch: &Patch, stride: usize) -> Result<FeatureMap<f32>> {
    extract_image_features(&patch.image, stride)
}

/// Cell statistics on a `stride`-pixel grid: mean intensity and an
/// orientation histogram of gradient magnitude (central differences, borders
/// clamped). Values are scaled to roughly unit range.
pub fn extract_image_features(image: &Image, stride: usize) -> Result<FeatureMap<f32>> {
    if stride == 0 {
        return Err(Error::invalid("feature stride must be positive"));
    }
    let side = image.width().min(image.height());
    if side < MIN_PATCH_SIDE {
        return Err(Error::invalid(format!(
            "patch of {}x{} is below the {MIN_PATCH_SIDE}-pixel minimum",
            image.width(),
            image.height()
        )));
    }
    let gray = image.to_gray();
    let (w, h) = (gray.width(), gray.height());
    let px = gray.plane(0);
    let (gw, gh) = (w / stride, h / stride);
    let plane = gw * gh;
    let mut out = vec![0.0f32; FEATURE_CHANNELS * plane];
    let norm = 1.0 / (255.0 * (stride * stride) as f32);

    for y in 0..gh * stride {
        let ym = y.saturating_sub(1);
        let yp = (y + 1).min(h - 1);
        for x in 0..gw * stride {
            let xm = x.saturating_sub(1);
            let xp = (x + 1).min(w - 1);
            let v = px[y * w + x];
            let dx = (px[y * w + xp] - px[y * w + xm]) * 0.5;
            let dy = (px[yp * w + x] - px[ym * w + x]) * 0.5;
            let cell = (y / stride) * gw + x / stride;
            out[cell] += v * norm;
            let mag = (dx * dx + dy * dy).sqrt();
            if mag > 0.0 {
                let mut ang = dy.atan2(dx);
                if ang < 0.0 {
                    ang += std::f32::consts::PI;
                }
                let bin = ((ang / std::f32::consts::PI * ORIENTATION_BINS as f32) as usize)
                    .min(ORIENTATION_BINS - 1);
                out[(1 + bin) * plane + cell] += mag * norm;
            }
        }
    }
    FeatureMap::new(FEATURE_CHANNELS, gh, gw, out)
}

/// Per-channel valid cross-correlation of `cand` with `reference` as kernel.
pub fn depthwise_correlate<T: Scalar>(
    reference: &FeatureMap<T>,
    cand: &FeatureMap<T>,
) -> Result<FeatureMap<T>> {
    if reference.channels != cand.channels {
        return Err(Error::invalid(format!(
            "channel mismatch: reference {} vs candidate {}",
            reference.channels, cand.channels
        )));
    }
    if reference.height > cand.height || reference.width > cand.width {
        return Err(Error::invalid(format!(
            "reference {}x{} larger than candidate {}x{}",
            reference.height, reference.width, cand.height, cand.width
        )));
    }
    let (kh, kw) = (reference.height, reference.width);
    let oh = cand.height - kh + 1;
    let ow = cand.width - kw + 1;
    let mut out = vec![T::zero(); reference.channels * oh * ow];
    for c in 0..reference.channels {
        let k = reference.plane(c);
        let s = cand.plane(c);
        let o = &mut out[c * oh * ow..(c + 1) * oh * ow];
        for ky in 0..kh {
            for kx in 0..kw {
                let kv = k[ky * kw + kx];
                if kv == T::zero() {
                    continue;
                }
                for oy in 0..oh {
                    let srow = &s[(oy + ky) * cand.width + kx..(oy + ky) * cand.width + kx + ow];
                    let orow = &mut o[oy * ow..(oy + 1) * ow];
                    for (ov, &sv) in orow.iter_mut().zip(srow) {
                        *ov += kv * sv;
                    }
                }
            }
        }
    }
    FeatureMap::new(reference.channels, oh, ow, out)
}

/// Channel-balanced normalized correlation: at each offset, the mean over
/// channels of the Pearson correlation between the reference channel and the
/// candidate window of that channel. Channels that are flat in the reference
/// are left out; flat candidate windows contribute 0. An exact copy scores 1.
pub fn normalized_correlation<T: Scalar>(
    reference: &FeatureMap<T>,
    cand: &FeatureMap<T>,
) -> Result<Grid<T>> {
    let (kh, kw) = (reference.height, reference.width);
    let n = (kh * kw) as f64;
    let mut data = Vec::with_capacity(reference.data.len());
    let mut ref_energy = Vec::with_capacity(reference.channels);
    for c in 0..reference.channels {
        let p = reference.plane(c);
        let mean = p.iter().map(|v| v.to_f64_lossy()).sum::<f64>() / n;
        let raw: f64 = p.iter().map(|v| v.to_f64_lossy().powi(2)).sum();
        let mut e = 0.0;
        for &v in p {
            let d = v.to_f64_lossy() - mean;
            e += d * d;
            data.push(T::of(d));
        }
        // variance that is only cancellation residue counts as flat
        ref_energy.push(if e <= 1e-9 * raw || e <= 1e-18 {
            0.0
        } else {
            e
        });
    }
    let live = ref_energy.iter().filter(|&&e| e > 0.0).count();
    let kernel = FeatureMap::new(reference.channels, kh, kw, data)?;
    let numerators = depthwise_correlate(&kernel, cand)?;
    let (oh, ow) = (numerators.height, numerators.width);
    let mut acc = vec![0.0f64; oh * ow];
    if live == 0 {
        return Grid::from_vec(oh, ow, vec![T::zero(); oh * ow]);
    }
    for (c, &energy) in ref_energy.iter().enumerate() {
        if energy == 0.0 {
            continue;
        }
        let p = cand.plane(c);
        let s1 = Integral::new(cand.height, cand.width, |y, x| {
            p[y * cand.width + x].to_f64_lossy()
        });
        let s2 = Integral::new(cand.height, cand.width, |y, x| {
            let v = p[y * cand.width + x].to_f64_lossy();
            v * v
        });
        let num = numerators.plane(c);
        for oy in 0..oh {
            for ox in 0..ow {
                let a = s1.window(oy, ox, kh, kw);
                let b = s2.window(oy, ox, kh, kw);
                let var = b - a * a / n;
                if var <= 1e-9 * b || var <= 1e-18 {
                    continue;
                }
                let r = num[oy * ow + ox].to_f64_lossy() / (energy * var).sqrt();
                acc[oy * ow + ox] += r.clamp(-1.0, 1.0);
            }
        }
    }
    Ok(Grid::from_fn(oh, ow, |r, c| {
        T::of(acc[r * ow + c] / live as f64)
    }))
}
