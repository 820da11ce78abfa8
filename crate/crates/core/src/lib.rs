//! Random color erasing for image corpora, and a majority-vote analysis of
//! ensembles that mix color-trained and grayscale-trained components.
//!
//! The augmentation is fully deterministic: every random draw comes from a
//! seeded [`region::RngStream`], and corpus runs derive one stream per
//! `(image, pass)` so that results never depend on scheduling.

pub mod digest;
pub mod ensemble;
pub mod error;
pub mod grayscale;
pub mod imaging;
pub mod pipeline;
pub mod rce;
pub mod region;

pub(crate) mod hex_u64;

pub use error::{Error, Result};
pub use imaging::{load_image, save_image, Image, Rect};
pub use rce::{apply_rce, AugmentationRecord, Branch, Direction, RceConfig};
pub use region::{RegionParams, RngStream};

/// Version tag written into manifest headers.
pub const FORMAT_VERSION: &str = "1";
