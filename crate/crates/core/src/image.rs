//! Planar `f32` images, square patches and the crop-and-resample step.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RegionRect;

/// Planar image, channel-major. Pixel values use the 0..=255 range of the
/// source files but are stored as `f32`.
#[derive(Debug, Clone)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
    mean: OnceLock<Vec<f32>>,
}

impl PartialEq for Image {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.channels == other.channels
            && self.data == other.data
    }
}

impl Image {
    pub fn from_planar(
        width: usize,
        height: usize,
        channels: usize,
        data: Vec<f32>,
    ) -> Result<Self> {
        if width * height * channels != data.len() {
            return Err(Error::invalid(format!(
                "buffer of {} values does not match {width}x{height}x{channels}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
            mean: OnceLock::new(),
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f32) -> Self {
        Self::from_planar(
            width,
            height,
            channels,
            vec![value; width * height * channels],
        )
        .expect("sizes consistent")
    }

    /// Single-channel image from `f(x, y)`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::from_planar(width, height, 1, data).expect("sizes consistent")
    }

    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn channels(&self) -> usize {
        self.channels
    }
    pub fn is_empty(&self) -> bool {
        self.width == 0 || self.height == 0 || self.channels == 0
    }
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn plane(&self, c: usize) -> &[f32] {
        let n = self.width * self.height;
        &self.data[c * n..(c + 1) * n]
    }

    #[inline]
    pub fn get(&self, c: usize, x: usize, y: usize) -> f32 {
        self.data[(c * self.height + y) * self.width + x]
    }

    /// Per-channel mean, computed once.
    pub fn channel_means(&self) -> &[f32] {
        self.mean.get_or_init(|| {
            (0..self.channels)
                .map(|c| {
                    let p = self.plane(c);
                    (p.iter().map(|&v| v as f64).sum::<f64>() / p.len().max(1) as f64) as f32
                })
                .collect()
        })
    }

    /// Luma for 3-channel input, the image itself otherwise.
    pub fn to_gray(&self) -> Image {
        if self.channels != 3 {
            let mut g = self.clone();
            if self.channels > 1 {
                g.data.truncate(self.width * self.height);
                g.channels = 1;
                g.mean = OnceLock::new();
            }
            return g;
        }
        let (r, g, b) = (self.plane(0), self.plane(1), self.plane(2));
        let data = r
            .iter()
            .zip(g)
            .zip(b)
            .map(|((&r, &g), &b)| 0.299 * r + 0.587 * g + 0.114 * b)
            .collect();
        Image::from_planar(self.width, self.height, 1, data).expect("sizes consistent")
    }

    pub fn from_dynamic(img: &image::DynamicImage) -> Self {
        use image::DynamicImage as D;
        let (w, h) = (img.width() as usize, img.height() as usize);
        match img {
            D::ImageLuma8(_) | D::ImageLumaA8(_) | D::ImageLuma16(_) | D::ImageLumaA16(_) => {
                let g = img.to_luma8();
                let data = g.into_raw().into_iter().map(f32::from).collect();
                Image::from_planar(w, h, 1, data).expect("sizes consistent")
            }
            _ => {
                let rgb = img.to_rgb8();
                let raw = rgb.into_raw();
                let n = w * h;
                let mut data = vec![0.0; 3 * n];
                for (i, px) in raw.chunks_exact(3).enumerate() {
                    for c in 0..3 {
                        data[c * n + i] = px[c] as f32;
                    }
                }
                Image::from_planar(w, h, 3, data).expect("sizes consistent")
            }
        }
    }

    /// 8-bit export; values are rounded and clamped to 0..=255.
    pub fn to_dynamic(&self) -> image::DynamicImage {
        let q = |v: f32| v.round().clamp(0.0, 255.0) as u8;
        let (w, h) = (self.width as u32, self.height as u32);
        if self.channels == 1 {
            let buf = self.data.iter().map(|&v| q(v)).collect();
            image::DynamicImage::ImageLuma8(
                image::GrayImage::from_raw(w, h, buf).expect("sizes consistent"),
            )
        } else {
            let n = self.width * self.height;
            let mut buf = Vec::with_capacity(3 * n);
            for i in 0..n {
                for c in 0..3 {
                    buf.push(q(self.data[c.min(self.channels - 1) * n + i]));
                }
            }
            image::DynamicImage::ImageRgb8(
                image::RgbImage::from_raw(w, h, buf).expect("sizes consistent"),
            )
        }
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let img = image::open(path).map_err(|source| Error::ImageFile {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::from_dynamic(&img))
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        self.to_dynamic()
            .save(path)
            .map_err(|source| Error::ImageFile {
                path: path.to_path_buf(),
                source,
            })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    #[default]
    Bilinear,
    Nearest,
}

/// Square resampled crop plus the rectangle it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub image: Image,
    pub rect: RegionRect<f64>,
    /// Output pixels whose source position fell outside the image.
    pub padded_pixels: usize,
}

impl Patch {
    pub fn side(&self) -> usize {
        self.image.width()
    }
}

/// Crops `rect` out of `image` and resamples it to `out_side x out_side`.
///
/// Output pixel `j` samples source position `x0 + (j + 0.5) * w / out_side`
/// (pixel-area convention). Samples whose position lies outside the image are
/// filled with the image's per-channel mean.
pub fn crop_resize(
    image: &Image,
    rect: &RegionRect<f64>,
    out_side: usize,
    interp: Interpolation,
) -> Result<Patch> {
    if image.is_empty() {
        return Err(Error::invalid("cannot crop from an empty image"));
    }
    if out_side == 0 {
        return Err(Error::invalid("output side must be positive"));
    }
    let (w, h) = (image.width(), image.height());
    let means = image.channel_means();
    let sx = rect.w / out_side as f64;
    let sy = rect.h / out_side as f64;
    let (x0, y0) = (rect.x0(), rect.y0());

    // per-axis sample tables: (lo index, hi index, weight of hi, inside)
    let table = |origin: f64, step: f64, extent: usize| -> Vec<(usize, usize, f32, bool)> {
        (0..out_side)
            .map(|j| {
                let pos = origin + (j as f64 + 0.5) * step;
                let inside = pos >= 0.0 && pos <= extent as f64;
                let src = pos - 0.5;
                match interp {
                    Interpolation::Nearest => {
                        let i = (pos.floor().max(0.0) as usize).min(extent - 1);
                        (i, i, 0.0, inside)
                    }
                    Interpolation::Bilinear => {
                        let f = src.floor();
                        let t = (src - f) as f32;
                        let lo = (f.max(0.0) as usize).min(extent - 1);
                        let hi = ((f + 1.0).max(0.0) as usize).min(extent - 1);
                        (lo, hi, t, inside)
                    }
                }
            })
            .collect()
    };
    let xs = table(x0, sx, w);
    let ys = table(y0, sy, h);

    let n = out_side * out_side;
    let mut data = vec![0.0f32; n * image.channels()];
    let mut padded = 0usize;
    for (oy, &(ylo, yhi, ty, yin)) in ys.iter().enumerate() {
        for (ox, &(xlo, xhi, tx, xin)) in xs.iter().enumerate() {
            let inside = xin && yin;
            if !inside {
                padded += 1;
            }
            for c in 0..image.channels() {
                let v = if !inside {
                    means[c]
                } else {
                    let p = image.plane(c);
                    let a = p[ylo * w + xlo];
                    let b = p[ylo * w + xhi];
                    let cc = p[yhi * w + xlo];
                    let d = p[yhi * w + xhi];
                    let top = a + (b - a) * tx;
                    let bot = cc + (d - cc) * tx;
                    top + (bot - top) * ty
                };
                data[c * n + oy * out_side + ox] = v;
            }
        }
    }
    Ok(Patch {
        image: Image::from_planar(out_side, out_side, image.channels(), data)?,
        rect: *rect,
        padded_pixels: padded,
    })
}

/// Resamples the whole image to `out_w x out_h`.
pub fn resize(image: &Image, out_side: usize, interp: Interpolation) -> Result<Image> {
    let rect = RegionRect::new(
        image.width() as f64 / 2.0,
        image.height() as f64 / 2.0,
        image.width() as f64,
        image.height() as f64,
    )?;
    Ok(crop_resize(image, &rect, out_side, interp)?.image)
}
