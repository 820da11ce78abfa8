//! Random color erasing: global grayscale, local grayscale patch, or nothing.
//!
//! The dispatch draws `p1`; `p1 >= p_r` keeps the image. Otherwise it draws
//! `p2`; `p2 <= p_g` turns the whole image gray, and anything else pastes a
//! grayscale rectangle into the image. `p_g` is therefore conditional: the
//! marginal probability of the global branch is `p_r * p_g`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grayscale::to_grayscale;
use crate::imaging::{Image, Rect};
use crate::region::{rand_position, RegionParams, RngStream};

pub const DEFAULT_P_R: f64 = 0.40;
pub const DEFAULT_P_G: f64 = 0.15;

/// Which image supplies the rectangle on the local branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Grayscale patch pasted into the color image.
    #[default]
    GrayOnColor,
    /// Color patch pasted into the grayscale image.
    ColorOnGray,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::GrayOnColor => "gray-on-color",
            Direction::ColorOnGray => "color-on-gray",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gray-on-color" => Ok(Direction::GrayOnColor),
            "color-on-gray" => Ok(Direction::ColorOnGray),
            other => Err(Error::Config(format!(
                "unknown direction {other:?} (expected gray-on-color or color-on-gray)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RceConfig {
    /// Probability of touching the image at all.
    pub p_r: f64,
    /// Probability of the global branch, given the image is touched.
    pub p_g: f64,
    pub region: RegionParams,
    pub direction: Direction,
}

impl Default for RceConfig {
    fn default() -> Self {
        Self {
            p_r: DEFAULT_P_R,
            p_g: DEFAULT_P_G,
            region: RegionParams::default(),
            direction: Direction::default(),
        }
    }
}

impl RceConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_r", self.p_r), ("p_g", self.p_g)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must be in [0, 1], got {p}")));
            }
        }
        self.region.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Identity,
    Global,
    Local,
    /// Local branch chosen but no rectangle fit; image returned unchanged.
    LocalNofit,
}

impl Branch {
    pub const ALL: [Branch; 4] = [Branch::Identity, Branch::Global, Branch::Local, Branch::LocalNofit];

    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Identity => "identity",
            Branch::Global => "global",
            Branch::Local => "local",
            Branch::LocalNofit => "local_nofit",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What the dispatch decided for one image, enough to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationRecord {
    pub branch: Branch,
    pub rect: Option<Rect>,
    /// The gate draws: `[p1]` on the identity branch, `[p1, p2]` otherwise.
    pub draws: Vec<f64>,
    #[serde(with = "crate::hex_u64")]
    pub stream_seed: u64,
}

impl AugmentationRecord {
    /// Fraction of pixels that end up taken from the "other" image.
    pub fn gray_fraction(&self, width: u32, height: u32) -> f64 {
        match (self.branch, self.rect) {
            (Branch::Global, _) => 1.0,
            (Branch::Local, Some(r)) => r.area() as f64 / (f64::from(width) * f64::from(height)),
            _ => 0.0,
        }
    }
}

/// Copies `base` and overwrites `rect` with the same pixels from `patch`.
///
/// With `base` the color image and `patch` its grayscale version this is the
/// local transform `x_v - x_v(rect) + x_g(rect)`.
pub fn local_transform(base: &Image, patch: &Image, rect: Rect) -> Result<Image> {
    if (base.width(), base.height()) != (patch.width(), patch.height()) {
        return Err(Error::Shape(format!(
            "image sizes differ: {}x{} vs {}x{}",
            base.width(),
            base.height(),
            patch.width(),
            patch.height()
        )));
    }
    base.check_rect(rect)?;
    let mut data = base.as_raw().to_vec();
    let row_bytes = rect.w as usize * 3;
    for y in rect.y0..rect.y0 + rect.h {
        let start = base.offset(rect.x0, y);
        data[start..start + row_bytes].copy_from_slice(&patch.as_raw()[start..start + row_bytes]);
    }
    Image::from_raw(base.width(), base.height(), data)
}

/// Runs the gate draws and the rectangle sampler without touching pixels.
pub fn decide(width: u32, height: u32, cfg: &RceConfig, rng: &mut RngStream) -> AugmentationRecord {
    let stream_seed = rng.seed();
    let p1 = rng.next_unit_float();
    if p1 >= cfg.p_r {
        return AugmentationRecord {
            branch: Branch::Identity,
            rect: None,
            draws: vec![p1],
            stream_seed,
        };
    }
    let p2 = rng.next_unit_float();
    let draws = vec![p1, p2];
    if p2 <= cfg.p_g {
        return AugmentationRecord {
            branch: Branch::Global,
            rect: None,
            draws,
            stream_seed,
        };
    }
    match rand_position(width, height, &cfg.region, rng) {
        Some(rect) => AugmentationRecord {
            branch: Branch::Local,
            rect: Some(rect),
            draws,
            stream_seed,
        },
        None => AugmentationRecord {
            branch: Branch::LocalNofit,
            rect: None,
            draws,
            stream_seed,
        },
    }
}

/// Produces the output image for a decision made by [`decide`].
pub fn render(img: &Image, cfg: &RceConfig, record: &AugmentationRecord) -> Result<Image> {
    match (record.branch, record.rect) {
        (Branch::Identity | Branch::LocalNofit, _) => Ok(img.clone()),
        (Branch::Global, _) => Ok(to_grayscale(img)),
        (Branch::Local, Some(rect)) => {
            let gray = to_grayscale(img);
            match cfg.direction {
                Direction::GrayOnColor => local_transform(img, &gray, rect),
                Direction::ColorOnGray => local_transform(&gray, img, rect),
            }
        }
        (Branch::Local, None) => Err(Error::Manifest("local record without a rectangle".into())),
    }
}

/// Applies random color erasing to `img`, consuming draws from `rng`.
pub fn apply_rce(img: &Image, cfg: &RceConfig, rng: &mut RngStream) -> (Image, AugmentationRecord) {
    let record = decide(img.width(), img.height(), cfg, rng);
    let out = render(img, cfg, &record).expect("decide only yields in-bounds rectangles");
    (out, record)
}
