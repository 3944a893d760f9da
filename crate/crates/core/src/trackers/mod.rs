//! Region-dedicated trackers behind one dispatch table.

mod ncc;
mod window;

pub use ncc::{match_template, PreparedSearch, ScoreMap};
pub use window::{hann, window_penalty};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{search_region_rect, BoundingBox, RadiusCategory, RegionRect};
use crate::grid::Grid;
use crate::image::{crop_resize, resize, Image, Interpolation, Patch};

/// Resolution the template is stored at; resampled per matching scale.
pub const TEMPLATE_SIDE: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackerKind {
    Ncc,
    Oracle,
}

impl std::str::FromStr for TrackerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ncc" => Ok(Self::Ncc),
            "oracle" | "oracle-noisy" => Ok(Self::Oracle),
            _ => Err(Error::invalid(format!("unknown tracker '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackerConfig {
    pub kind: TrackerKind,
    /// Window-penalty weight.
    pub lambda: f64,
    pub scales: Vec<f64>,
    /// Oracle tracker: center noise, pixels.
    pub sigma: f64,
    /// Oracle tracker: relative size noise.
    pub sigma_scale: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            kind: TrackerKind::Ncc,
            lambda: 0.35,
            scales: vec![0.9, 1.0, 1.1],
            sigma: 0.0,
            sigma_scale: 0.0,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::invalid("lambda must lie in [0, 1]"));
        }
        if self.scales.is_empty() || self.scales.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::invalid(
                "tracker scale sweep must be non-empty and positive",
            ));
        }
        if !(self.sigma >= 0.0) || !(self.sigma_scale >= 0.0) {
            return Err(Error::invalid("noise levels must be non-negative"));
        }
        Ok(())
    }
}

/// One region-dedicated tracker.
#[derive(Debug, Clone)]
pub struct TrackerHandle {
    category: RadiusCategory,
    input_side: usize,
    template: Patch,
    kind: TrackerKind,
}

impl TrackerHandle {
    /// Input resolution of the tracker dedicated to `cat` (SR8 shares SR6's).
    pub fn side_for(cat: RadiusCategory) -> usize {
        match cat {
            RadiusCategory::SR2 => 128,
            RadiusCategory::SR4 => 256,
            RadiusCategory::SR6 | RadiusCategory::SR8 => 384,
        }
    }

    pub fn new(category: RadiusCategory, template: Patch, kind: TrackerKind) -> Result<Self> {
        if category == RadiusCategory::SR8 {
            return Err(Error::invalid(
                "no tracker is dedicated to SR8; it is served by the SR6 tracker",
            ));
        }
        Ok(Self::with_side(
            category,
            Self::side_for(category),
            template,
            kind,
        ))
    }

    /// Handle with a custom input side, for experiments.
    pub fn with_side(
        category: RadiusCategory,
        input_side: usize,
        template: Patch,
        kind: TrackerKind,
    ) -> Self {
        let template = Patch {
            image: template.image.to_gray(),
            ..template
        };
        Self {
            category,
            input_side,
            template,
            kind,
        }
    }

    pub fn category(&self) -> RadiusCategory {
        self.category
    }
    pub fn input_side(&self) -> usize {
        self.input_side
    }
    pub fn template(&self) -> &Patch {
        &self.template
    }
    pub fn kind(&self) -> TrackerKind {
        self.kind
    }

    /// Matches the template over `search` at each scale of `scales`, where
    /// scale 1 means the target spans `input_side / crop_gamma` pixels.
    pub fn ncc_track(
        &self,
        search: &Patch,
        crop_gamma: f64,
        scales: &[f64],
    ) -> Result<NccResponse> {
        let side = self.input_side;
        if search.side() != side || search.image.height() != side {
            return Err(Error::invalid(format!(
                "search patch is {}x{}, tracker expects {side}x{side}",
                search.image.width(),
                search.image.height()
            )));
        }
        if !(crop_gamma > 0.0) {
            return Err(Error::invalid("crop factor must be positive"));
        }
        let base = side as f64 / crop_gamma;
        // even template sides keep every scale's window centers on one grid
        let mut sizes: Vec<usize> = scales
            .iter()
            .map(|s| (2.0 * (base * s / 2.0).round()).max(2.0) as usize)
            .filter(|&m| m <= side)
            .collect();
        sizes.dedup();
        if sizes.is_empty() {
            return Err(Error::invalid(format!(
                "template of side {base} does not fit search side {side}"
            )));
        }
        let gray = search.image.to_gray();
        let grid = Grid::from_vec(
            side,
            side,
            gray.plane(0).iter().map(|&v| v as f64).collect(),
        )?;
        let mut prepared = PreparedSearch::new(&grid);
        let min_size = *sizes.iter().min().expect("non-empty");
        let cells = side - min_size + 1;
        let mut scores = Grid::filled(cells, cells, -1.0f64);
        let mut scale_idx = Grid::filled(cells, cells, 0u8);
        for (k, &m) in sizes.iter().enumerate() {
            let t = resize(&self.template.image, m, Interpolation::Bilinear)?;
            let tg = Grid::from_vec(m, m, t.plane(0).iter().map(|&v| v as f64).collect())?;
            let map = prepared.ncc(&tg)?;
            let shift = (m - min_size) / 2;
            for r in 0..map.rows() {
                for c in 0..map.cols() {
                    let v = map.get(r, c);
                    let (gr, gc) = (r + shift, c + shift);
                    if v > scores.get(gr, gc) {
                        scores.set(gr, gc, v);
                        scale_idx.set(gr, gc, k as u8);
                    }
                }
            }
        }
        let (r, c, v) = scores.argmax().expect("non-empty score map");
        let mut resp = NccResponse {
            scores,
            scale_idx,
            sizes,
            min_size,
            bbox: BoundingBox::default(),
            confidence: 0.0,
        };
        resp.bbox = resp.box_at(r, c);
        resp.confidence = v.clamp(0.0, 1.0);
        Ok(resp)
    }
}

/// Raw matching result in patch coordinates.
#[derive(Debug, Clone)]
pub struct NccResponse {
    /// Best score over scales, indexed by window center: cell `(r, c)` has its
    /// center at `(c + min_size / 2, r + min_size / 2)`.
    pub scores: ScoreMap<f64>,
    pub scale_idx: Grid<u8>,
    pub sizes: Vec<usize>,
    pub min_size: usize,
    pub bbox: BoundingBox<f64>,
    pub confidence: f64,
}

impl NccResponse {
    pub fn box_at(&self, r: usize, c: usize) -> BoundingBox<f64> {
        let m = self.sizes[self.scale_idx.get(r, c) as usize] as f64;
        let half = self.min_size as f64 / 2.0;
        BoundingBox::new(c as f64 + half, r as f64 + half, m, m)
    }

    /// Box and raw confidence at the argmax of `penalized`.
    pub fn locate(&self, penalized: &ScoreMap<f64>) -> (BoundingBox<f64>, f64) {
        let (r, c, _) = penalized.argmax().expect("non-empty score map");
        (self.box_at(r, c), self.scores.get(r, c).clamp(0.0, 1.0))
    }
}

/// Tracker output in image coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerResult {
    pub bbox: BoundingBox<f64>,
    pub confidence: f64,
    pub category_used: RadiusCategory,
}

/// Patch pixel coordinates to image coordinates.
pub fn patch_to_image_coords(
    b: &BoundingBox<f64>,
    rect: &RegionRect<f64>,
    patch_side: usize,
) -> BoundingBox<f64> {
    let sx = rect.w / patch_side as f64;
    let sy = rect.h / patch_side as f64;
    BoundingBox::new(
        rect.x0() + b.cx * sx,
        rect.y0() + b.cy * sy,
        b.w * sx,
        b.h * sy,
    )
}

pub fn image_to_patch_coords(
    b: &BoundingBox<f64>,
    rect: &RegionRect<f64>,
    patch_side: usize,
) -> BoundingBox<f64> {
    let sx = patch_side as f64 / rect.w;
    let sy = patch_side as f64 / rect.h;
    BoundingBox::new(
        (b.cx - rect.x0()) * sx,
        (b.cy - rect.y0()) * sy,
        b.w * sx,
        b.h * sy,
    )
}

/// Ground-truth tracker with Gaussian noise. Loses the target (returns
/// `prev`, confidence 0) when the ground-truth center is outside `region`.
pub fn oracle_noisy_track<R: Rng + ?Sized>(
    region: &RegionRect<f64>,
    category: RadiusCategory,
    gt: Option<&BoundingBox<f64>>,
    prev: &BoundingBox<f64>,
    sigma: f64,
    sigma_scale: f64,
    rng: &mut R,
) -> Result<TrackerResult> {
    let gt =
        gt.ok_or_else(|| Error::UnsupportedMode("oracle tracker needs ground truth".into()))?;
    let lost = TrackerResult {
        bbox: *prev,
        confidence: 0.0,
        category_used: category,
    };
    if !gt.is_valid() || !region.contains_point(gt.cx, gt.cy) {
        return Ok(lost);
    }
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let z: [f64; 4] = std::array::from_fn(|_| unit.sample(rng));
    let min_side = 1.0;
    let bbox = BoundingBox::new(
        gt.cx + sigma * z[0],
        gt.cy + sigma * z[1],
        (gt.w * (1.0 + sigma_scale * z[2])).max(min_side),
        (gt.h * (1.0 + sigma_scale * z[3])).max(min_side),
    );
    Ok(TrackerResult {
        bbox,
        confidence: 1.0,
        category_used: category,
    })
}

/// Which tracker serves a category, and at what crop factor.
#[derive(Debug, Clone, Copy)]
pub struct Dispatch<'a> {
    pub handle: &'a TrackerHandle,
    pub crop_gamma: f64,
}

/// The three region-dedicated trackers of one sequence.
#[derive(Debug, Clone, Default)]
pub struct TrackerSet {
    handles: Option<[TrackerHandle; 3]>,
}

impl TrackerSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// All templates come from the initial box.
    pub fn initialize(
        &mut self,
        first_frame: &Image,
        init: &BoundingBox<f64>,
        kind: TrackerKind,
    ) -> Result<()> {
        let rect = search_region_rect(init, 1.0)?;
        let template = crop_resize(first_frame, &rect, TEMPLATE_SIDE, Interpolation::Bilinear)?;
        let make = |cat| TrackerHandle::new(cat, template.clone(), kind);
        self.handles = Some([
            make(RadiusCategory::SR2)?,
            make(RadiusCategory::SR4)?,
            make(RadiusCategory::SR6)?,
        ]);
        Ok(())
    }

    pub fn is_initialized(&self) -> bool {
        self.handles.is_some()
    }

    /// SR2/SR4/SR6 go to their own tracker; SR8 goes to the SR6 tracker with
    /// an 8x crop.
    pub fn dispatch(&self, chosen: RadiusCategory) -> Result<Dispatch<'_>> {
        let hs = self
            .handles
            .as_ref()
            .ok_or_else(|| Error::InvalidState("tracker set used before initialization".into()))?;
        let handle = match chosen {
            RadiusCategory::SR2 => &hs[0],
            RadiusCategory::SR4 => &hs[1],
            RadiusCategory::SR6 | RadiusCategory::SR8 => &hs[2],
        };
        Ok(Dispatch {
            handle,
            crop_gamma: chosen.factor() as f64,
        })
    }
}
