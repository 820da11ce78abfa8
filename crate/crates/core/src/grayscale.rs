//! Global grayscale conversion.

use crate::imaging::Image;

/// ITU-R BT.601 luma weights in thousandths for (r, g, b). They sum to 1000.
pub const LUMA_WEIGHTS: [u32; 3] = [299, 587, 114];

/// Luma of one pixel, rounded half-up on the exact weighted sum.
#[inline]
pub fn luma(p: [u8; 3]) -> u8 {
    luma_with(LUMA_WEIGHTS, p)
}

/// Luma with custom weights (thousandths summing to 1000).
#[inline]
pub fn luma_with(weights: [u32; 3], p: [u8; 3]) -> u8 {
    let sum = weights[0] * u32::from(p[0]) + weights[1] * u32::from(p[1]) + weights[2] * u32::from(p[2]);
    ((sum + 500) / 1000).min(255) as u8
}

/// Replaces every pixel with its luma replicated over all three channels.
pub fn to_grayscale(img: &Image) -> Image {
    let data = img
        .as_raw()
        .chunks_exact(3)
        .flat_map(|p| [luma([p[0], p[1], p[2]]); 3])
        .collect();
    Image::from_raw(img.width(), img.height(), data).expect("same shape as a valid image")
}
