//! Pixel grid types, rectangular regions, and file codecs.
//!
//! Images are always 8-bit RGB, row-major, origin at the top-left corner.
//! Grayscale images are ordinary [`Image`]s whose three channels are equal.

use std::fmt;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageBuffer, Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense `width x height` grid of RGB pixels.
#[derive(Clone, PartialEq, Eq)]
pub struct Image {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl fmt::Debug for Image {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Image")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl Image {
    /// Wraps a raw interleaved RGB buffer.
    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Shape(format!(
                "image dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        let expected = width as usize * height as usize * 3;
        if data.len() != expected {
            return Err(Error::Shape(format!(
                "buffer of {} bytes does not hold a {width}x{height} RGB image ({expected} bytes)",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Result<Self> {
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::from_raw(width, height, data)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Raw interleaved `r, g, b` bytes in row-major order.
    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    /// Rectangle covering the whole image.
    pub fn full_rect(&self) -> Rect {
        Rect {
            x0: 0,
            y0: 0,
            w: self.width,
            h: self.height,
        }
    }

    /// Pixel at column `x`, row `y`. Panics when out of bounds.
    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        assert!(x < self.width && y < self.height, "pixel ({x}, {y}) out of bounds");
        let i = self.offset(x, y);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub(crate) fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * 3
    }

    /// True when every pixel has `r == g == b`.
    pub fn is_grayscale(&self) -> bool {
        self.data
            .chunks_exact(3)
            .all(|p| p[0] == p[1] && p[1] == p[2])
    }

    /// Checks that `rect` fits inside this image.
    pub fn check_rect(&self, rect: Rect) -> Result<()> {
        let fits = u64::from(rect.x0) + u64::from(rect.w) <= u64::from(self.width)
            && u64::from(rect.y0) + u64::from(rect.h) <= u64::from(self.height);
        if fits {
            Ok(())
        } else {
            Err(Error::RectOutOfBounds {
                rect,
                width: self.width,
                height: self.height,
            })
        }
    }

    /// Copies the sub-image selected by `rect`.
    ///
    /// Pixel `(i, j)` of the result is pixel `(x0 + i, y0 + j)` of `self`.
    pub fn extract(&self, rect: Rect) -> Result<Image> {
        self.check_rect(rect)?;
        let row_bytes = rect.w as usize * 3;
        let mut data = Vec::with_capacity(row_bytes * rect.h as usize);
        for y in rect.y0..rect.y0 + rect.h {
            let start = self.offset(rect.x0, y);
            data.extend_from_slice(&self.data[start..start + row_bytes]);
        }
        Image::from_raw(rect.w, rect.h, data)
    }

    fn to_rgb_image(&self) -> RgbImage {
        ImageBuffer::from_raw(self.width, self.height, self.data.clone())
            .expect("buffer length checked at construction")
    }
}

/// Axis-aligned rectangle: top-left corner `(x0, y0)`, size `w x h`.
///
/// Zero-area rectangles are rejected by [`Rect::new`]; bounds against a
/// particular image are checked where the rectangle is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x0: u32,
    pub y0: u32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub fn new(x0: u32, y0: u32, w: u32, h: u32) -> Result<Self> {
        if w == 0 || h == 0 {
            return Err(Error::Shape(format!("rectangle must have positive size, got {w}x{h}")));
        }
        Ok(Self { x0, y0, w, h })
    }

    pub fn area(&self) -> u64 {
        u64::from(self.w) * u64::from(self.h)
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x0 && x - self.x0 < self.w && y >= self.y0 && y - self.y0 < self.h
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}+{}+{}", self.w, self.h, self.x0, self.y0)
    }
}

/// Decodes a PNG, JPEG or BMP file into RGB.
///
/// Alpha is dropped. 16-bit channels keep their high byte; float images go
/// through the codec's own 8-bit conversion.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let reader = image::ImageReader::open(path)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?
        .with_guessed_format()
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
    let decoded = reader.decode().map_err(|e| decode_error(path, e))?;
    from_dynamic(decoded).map_err(|e| match e {
        Error::Shape(msg) => Error::Decode {
            path: path.to_path_buf(),
            message: msg,
        },
        other => other,
    })
}

fn decode_error(path: &Path, err: image::ImageError) -> Error {
    match err {
        image::ImageError::IoError(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::Decode {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    }
}

fn high_bytes(samples: &[u16]) -> Vec<u8> {
    samples.iter().map(|&s| (s >> 8) as u8).collect()
}

fn from_dynamic(img: DynamicImage) -> Result<Image> {
    let (width, height) = (img.width(), img.height());
    let data = match img {
        DynamicImage::ImageRgb16(buf) => high_bytes(buf.as_raw()),
        DynamicImage::ImageRgba16(buf) => buf
            .as_raw()
            .chunks_exact(4)
            .flat_map(|p| high_bytes(&p[..3]))
            .collect(),
        DynamicImage::ImageLuma16(buf) => buf
            .as_raw()
            .iter()
            .flat_map(|&v| [(v >> 8) as u8; 3])
            .collect(),
        DynamicImage::ImageLumaA16(buf) => buf
            .as_raw()
            .chunks_exact(2)
            .flat_map(|p| [(p[0] >> 8) as u8; 3])
            .collect(),
        other => other.to_rgb8().into_raw(),
    };
    Image::from_raw(width, height, data)
}

/// Writes `img` as an 8-bit RGB PNG.
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    img.to_rgb_image()
        .save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(source) => Error::Io {
                path: path.to_path_buf(),
                source,
            },
            other => Error::Encode {
                path: path.to_path_buf(),
                message: other.to_string(),
            },
        })
}

/// Encodes `img` as PNG into memory.
pub fn encode_png(img: &Image) -> Result<Vec<u8>> {
    let mut out = std::io::Cursor::new(Vec::new());
    img.to_rgb_image()
        .write_to(&mut out, image::ImageFormat::Png)
        .map_err(|e| Error::Encode {
            path: PathBuf::from("<memory>"),
            message: e.to_string(),
        })?;
    Ok(out.into_inner())
}

/// Converts an externally built RGB buffer.
impl TryFrom<RgbImage> for Image {
    type Error = Error;

    fn try_from(buf: ImageBuffer<Rgb<u8>, Vec<u8>>) -> Result<Self> {
        let (w, h) = buf.dimensions();
        Image::from_raw(w, h, buf.into_raw())
    }
}
