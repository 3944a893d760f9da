//! Box and region arithmetic.
//!
//! Boxes are kept in center form `(cx, cy, w, h)` in pixel units. Files use the
//! top-left convention and convert at the I/O boundary.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Axis-aligned box in center form.
///
/// A box with `w <= 0` or `h <= 0` is kept around as an "absent target"
/// marker (annotation files use `0,0,0,0` for that); every geometric operation
/// rejects it.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundingBox<T> {
    pub cx: T,
    pub cy: T,
    pub w: T,
    pub h: T,
}

impl<T: Scalar> BoundingBox<T> {
    pub fn new(cx: T, cy: T, w: T, h: T) -> Self {
        Self { cx, cy, w, h }
    }

    /// Validating constructor.
    pub fn try_new(cx: T, cy: T, w: T, h: T) -> Result<Self> {
        let b = Self::new(cx, cy, w, h);
        b.validate()?;
        Ok(b)
    }

    pub fn from_top_left(x: T, y: T, w: T, h: T) -> Self {
        let two = T::of(2.0);
        Self::new(x + w / two, y + h / two, w, h)
    }

    /// `(x, y, w, h)` with `(x, y)` the top-left corner.
    pub fn to_top_left(&self) -> [T; 4] {
        let two = T::of(2.0);
        [
            self.cx - self.w / two,
            self.cy - self.h / two,
            self.w,
            self.h,
        ]
    }

    pub fn is_valid(&self) -> bool {
        self.w > T::zero()
            && self.h > T::zero()
            && self.cx.is_finite()
            && self.cy.is_finite()
            && self.w.is_finite()
            && self.h.is_finite()
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid box {self:?}")))
        }
    }

    pub fn area(&self) -> T {
        self.w * self.h
    }

    pub fn x0(&self) -> T {
        self.cx - self.w / T::of(2.0)
    }
    pub fn y0(&self) -> T {
        self.cy - self.h / T::of(2.0)
    }
    pub fn x1(&self) -> T {
        self.cx + self.w / T::of(2.0)
    }
    pub fn y1(&self) -> T {
        self.cy + self.h / T::of(2.0)
    }

    pub fn center_distance(&self, other: &Self) -> T {
        let dx = self.cx - other.cx;
        let dy = self.cy - other.cy;
        (dx * dx + dy * dy).sqrt()
    }

    pub fn cast<U: Scalar>(&self) -> BoundingBox<U> {
        BoundingBox::new(
            U::of(self.cx.to_f64_lossy()),
            U::of(self.cy.to_f64_lossy()),
            U::of(self.w.to_f64_lossy()),
            U::of(self.h.to_f64_lossy()),
        )
    }
}

/// Crop rectangle in image coordinates. May extend past the image borders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionRect<T> {
    pub cx: T,
    pub cy: T,
    pub w: T,
    pub h: T,
}

impl<T: Scalar> RegionRect<T> {
    pub fn new(cx: T, cy: T, w: T, h: T) -> Result<Self> {
        if !(w > T::zero() && h > T::zero()) {
            return Err(Error::invalid(format!(
                "region size must be positive, got {w}x{h}"
            )));
        }
        Ok(Self { cx, cy, w, h })
    }

    pub fn x0(&self) -> T {
        self.cx - self.w / T::of(2.0)
    }
    pub fn y0(&self) -> T {
        self.cy - self.h / T::of(2.0)
    }
    pub fn x1(&self) -> T {
        self.cx + self.w / T::of(2.0)
    }
    pub fn y1(&self) -> T {
        self.cy + self.h / T::of(2.0)
    }

    pub fn area(&self) -> T {
        self.w * self.h
    }

    /// Closed containment test; edges within a few ulps count as inside.
    pub fn contains(&self, b: &BoundingBox<T>) -> bool {
        let scale = T::one()
            .max(self.cx.abs() + self.w)
            .max(self.cy.abs() + self.h);
        let eps = scale * T::of(1e-12);
        b.x0() >= self.x0() - eps
            && b.x1() <= self.x1() + eps
            && b.y0() >= self.y0() - eps
            && b.y1() <= self.y1() + eps
    }

    pub fn contains_point(&self, x: T, y: T) -> bool {
        x >= self.x0() && x <= self.x1() && y >= self.y0() && y <= self.y1()
    }

    pub fn as_box(&self) -> BoundingBox<T> {
        BoundingBox::new(self.cx, self.cy, self.w, self.h)
    }
}

/// Discrete search radius factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RadiusCategory {
    SR2,
    SR4,
    SR6,
    SR8,
}

impl RadiusCategory {
    pub const ALL: [RadiusCategory; 4] = [Self::SR2, Self::SR4, Self::SR6, Self::SR8];
    pub const COUNT: usize = 4;

    pub fn factor(self) -> u32 {
        match self {
            Self::SR2 => 2,
            Self::SR4 => 4,
            Self::SR6 => 6,
            Self::SR8 => 8,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn from_factor(f: u32) -> Option<Self> {
        match f {
            2 => Some(Self::SR2),
            4 => Some(Self::SR4),
            6 => Some(Self::SR6),
            8 => Some(Self::SR8),
            _ => None,
        }
    }
}

impl fmt::Display for RadiusCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}SR", self.factor())
    }
}

impl std::str::FromStr for RadiusCategory {
    type Err = Error;

    /// Accepts `4`, `4SR`, `SR4` (case-insensitive).
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_uppercase();
        let digits = t.trim_start_matches("SR").trim_end_matches("SR");
        digits
            .parse::<u32>()
            .ok()
            .and_then(Self::from_factor)
            .ok_or_else(|| Error::invalid(format!("unknown radius category '{s}'")))
    }
}

/// Region of `gamma` times the box size on each axis, centered on the box.
pub fn search_region_rect<T: Scalar>(prev: &BoundingBox<T>, gamma: T) -> Result<RegionRect<T>> {
    if !(gamma > T::zero()) || !gamma.is_finite() {
        return Err(Error::invalid(format!(
            "search radius factor must be positive, got {gamma}"
        )));
    }
    prev.validate()?;
    RegionRect::new(prev.cx, prev.cy, gamma * prev.w, gamma * prev.h)
}

/// Smallest factor whose region around `prev` fully contains `cur`.
pub fn min_required_factor<T: Scalar>(prev: &BoundingBox<T>, cur: &BoundingBox<T>) -> Result<T> {
    prev.validate()?;
    cur.validate()?;
    let two = T::of(2.0);
    let gx = (two * (cur.cx - prev.cx).abs() + cur.w) / prev.w;
    let gy = (two * (cur.cy - prev.cy).abs() + cur.h) / prev.h;
    Ok(gx.max(gy))
}

/// Buckets are closed on the right: exactly 4 maps to `SR4`.
pub fn bucketize_factor<T: Scalar>(gamma: T) -> RadiusCategory {
    if gamma <= T::of(2.0) {
        RadiusCategory::SR2
    } else if gamma <= T::of(4.0) {
        RadiusCategory::SR4
    } else if gamma <= T::of(6.0) {
        RadiusCategory::SR6
    } else {
        RadiusCategory::SR8
    }
}

pub fn iou<T: Scalar>(a: &BoundingBox<T>, b: &BoundingBox<T>) -> T {
    if !a.is_valid() || !b.is_valid() {
        return T::zero();
    }
    let iw = (a.x1().min(b.x1()) - a.x0().max(b.x0())).max(T::zero());
    let ih = (a.y1().min(b.y1()) - a.y0().max(b.y0())).max(T::zero());
    let inter = iw * ih;
    if inter <= T::zero() {
        return T::zero();
    }
    let union = a.area() + b.area() - inter;
    (inter / union).min(T::one())
}
