//! FNV-1a 64-bit hashing, used for seed derivation and output fingerprints.

use std::hash::Hasher;

use fnv::FnvHasher;

use crate::imaging::Image;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

/// Hash of the raw row-major RGB bytes. Dimensions are not mixed in.
pub fn image_digest(img: &Image) -> u64 {
    fnv1a64(img.as_raw())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_vectors() {
        assert_eq!(fnv1a64(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a64(b"a"), 0xaf63_dc4c_8601_ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x8594_4171_f739_67e8);
    }
}
