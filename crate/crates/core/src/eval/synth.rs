//! Synthetic sequences: a value-noise textured rectangle moving over a
//! smooth textured background, with exact ground truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::io::Sequence;
use crate::BBox;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    /// The displacement is applied between frames `frame - 1` and `frame`.
    pub frame: usize,
    pub dx: f64,
    pub dy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum Motion {
    Constant {
        dx: f64,
        dy: f64,
    },
    RandomWalk {
        sigma: f64,
    },
    /// Constant drift plus scripted jumps.
    Jumps {
        #[serde(default)]
        dx: f64,
        #[serde(default)]
        dy: f64,
        jumps: Vec<Jump>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionSpec {
    #[serde(default = "default_name")]
    pub name: String,
    pub length: usize,
    /// Canvas `[width, height]`.
    pub image_size: [usize; 2],
    /// Target `[w, h]`.
    pub target_size: [f64; 2],
    /// Initial target center; the canvas center when absent.
    #[serde(default)]
    pub start: Option<[f64; 2]>,
    pub motion: Motion,
    pub texture_seed: u64,
}

fn default_name() -> String {
    "synthetic".into()
}

impl MotionSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self =
            serde_json::from_str(text).map_err(|e| Error::SpecInvalid(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::SpecInvalid(m.to_string()));
        if self.length < 2 {
            return bad("length must be at least 2");
        }
        if self.image_size[0] == 0 || self.image_size[1] == 0 {
            return bad("image size must be positive");
        }
        let [w, h] = self.target_size;
        if !(w >= 1.0 && h >= 1.0 && w.is_finite() && h.is_finite()) {
            return bad("target size must be at least one pixel");
        }
        if self.name.is_empty() || self.name.contains(['/', '\\', ',']) {
            return bad("name must be a plain file name");
        }
        match &self.motion {
            Motion::Constant { dx, dy } if !(dx.is_finite() && dy.is_finite()) => {
                bad("velocity must be finite")
            }
            Motion::RandomWalk { sigma } if !(*sigma >= 0.0 && sigma.is_finite()) => {
                bad("sigma must be non-negative")
            }
            Motion::Jumps { dx, dy, jumps } => {
                if !(dx.is_finite() && dy.is_finite())
                    || jumps
                        .iter()
                        .any(|j| !(j.dx.is_finite() && j.dy.is_finite()))
                {
                    return bad("displacements must be finite");
                }
                if jumps.iter().any(|j| j.frame == 0 || j.frame >= self.length) {
                    return bad("jump frames must lie in 1..length");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Ground-truth track; every box must lie fully on the canvas.
    pub fn trajectory<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<BBox>> {
        self.validate()?;
        let [iw, ih] = self.image_size.map(|v| v as f64);
        let [w, h] = self.target_size;
        let [mut cx, mut cy] = self.start.unwrap_or([iw / 2.0, ih / 2.0]);
        let normal = match &self.motion {
            Motion::RandomWalk { sigma } if *sigma > 0.0 => {
                Some(Normal::new(0.0, *sigma).map_err(|e| Error::SpecInvalid(e.to_string()))?)
            }
            _ => None,
        };
        let mut out = Vec::with_capacity(self.length);
        for t in 0..self.length {
            if t > 0 {
                let (dx, dy) = match &self.motion {
                    Motion::Constant { dx, dy } => (*dx, *dy),
                    Motion::RandomWalk { .. } => match &normal {
                        Some(n) => (n.sample(rng), n.sample(rng)),
                        None => (0.0, 0.0),
                    },
                    Motion::Jumps { dx, dy, jumps } => jumps
                        .iter()
                        .filter(|j| j.frame == t)
                        .fold((*dx, *dy), |(ax, ay), j| (ax + j.dx, ay + j.dy)),
                };
                cx += dx;
                cy += dy;
            }
            let b = BBox::new(cx, cy, w, h);
            if b.x0() < 0.0 || b.y0() < 0.0 || b.x1() > iw || b.y1() > ih {
                return Err(Error::SpecInvalid(format!(
                    "target leaves the {}x{} canvas at frame {t} (center {cx:.2}, {cy:.2})",
                    self.image_size[0], self.image_size[1]
                )));
            }
            out.push(b);
        }
        Ok(out)
    }
}

/// Bilinear value noise over a lattice of `nx` by `ny` cells.
struct ValueNoise {
    nx: usize,
    values: Vec<f32>,
}

impl ValueNoise {
    fn new(rng: &mut ChaCha8Rng, nx: usize, ny: usize, lo: f32, hi: f32) -> Self {
        let values = (0..(nx + 1) * (ny + 1))
            .map(|_| rng.random_range(lo..hi))
            .collect();
        Self { nx, values }
    }

    /// `u`, `v` in lattice units.
    fn at(&self, u: f64, v: f64) -> f32 {
        let (i, j) = (u.floor() as usize, v.floor() as usize);
        let (tx, ty) = ((u - i as f64) as f32, (v - j as f64) as f32);
        let g = |a: usize, b: usize| self.values[b * (self.nx + 1) + a];
        let top = g(i, j) * (1.0 - tx) + g(i + 1, j) * tx;
        let bot = g(i, j + 1) * (1.0 - tx) + g(i + 1, j + 1) * tx;
        top * (1.0 - ty) + bot * ty
    }
}

const BACKGROUND_CELL: f64 = 24.0;
const TARGET_CELLS: usize = 6;

/// Renders the sequence. Textures depend only on `texture_seed`; `rng`
/// drives random-walk motion.
pub fn generate_synthetic_sequence<R: Rng + ?Sized>(
    spec: &MotionSpec,
    rng: &mut R,
) -> Result<Sequence> {
    let gt = spec.trajectory(rng)?;
    let [iw, ih] = spec.image_size;
    let mut tex_rng = ChaCha8Rng::seed_from_u64(spec.texture_seed);
    let bg_nx = (iw as f64 / BACKGROUND_CELL).ceil() as usize + 1;
    let bg_ny = (ih as f64 / BACKGROUND_CELL).ceil() as usize + 1;
    let background = ValueNoise::new(&mut tex_rng, bg_nx, bg_ny, 70.0, 160.0);
    let target = ValueNoise::new(&mut tex_rng, TARGET_CELLS, TARGET_CELLS, 0.0, 255.0);
    let backdrop = Image::from_fn(iw, ih, |x, y| {
        background.at(
            (x as f64 + 0.5) / BACKGROUND_CELL,
            (y as f64 + 0.5) / BACKGROUND_CELL,
        )
    });
    let frames = gt
        .iter()
        .map(|b| {
            let (x0, y0) = (b.x0(), b.y0());
            Image::from_fn(iw, ih, |x, y| {
                let u = (x as f64 + 0.5 - x0) / b.w;
                let v = (y as f64 + 0.5 - y0) / b.h;
                if (0.0..1.0).contains(&u) && (0.0..1.0).contains(&v) {
                    target.at(u * TARGET_CELLS as f64, v * TARGET_CELLS as f64)
                } else {
                    backdrop.get(0, x, y)
                }
            })
        })
        .collect();
    Sequence::in_memory(spec.name.clone(), frames, Some(gt))
}
