use image::{ImageBuffer, Rgb, Rgba};
use proptest::prelude::*;
use rce_core::{load_image, save_image, Error, Image, RngStream};

fn noise(w: u32, h: u32, seed: u64) -> Image {
    let mut rng = RngStream::from_seed(seed);
    Image::from_fn(w, h, |_, _| {
        let b = rng.next_u64().to_le_bytes();
        [b[0], b[1], b[2]]
    })
    .unwrap()
}

#[test]
fn png_two_by_two_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.png");
    let px = [[1u8, 2, 3], [250, 128, 0], [9, 9, 9], [0, 255, 77]];
    let buf = ImageBuffer::from_fn(2, 2, |x, y| Rgb(px[(y * 2 + x) as usize]));
    buf.save(&path).unwrap();

    let img = load_image(&path).unwrap();
    assert_eq!((img.width(), img.height()), (2, 2));
    for y in 0..2 {
        for x in 0..2 {
            assert_eq!(img.pixel(x, y), px[(y * 2 + x) as usize]);
        }
    }
}

#[test]
fn missing_file_names_path() {
    let err = load_image("/definitely/not/here.png").unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.to_string().contains("/definitely/not/here.png"));
}

#[test]
fn corrupt_file_is_decode_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.png");
    std::fs::write(&path, b"\x89PNG\r\n\x1a\nnot really").unwrap();
    let err = load_image(&path).unwrap_err();
    assert!(matches!(err, Error::Decode { .. }), "{err:?}");
    assert!(err.to_string().contains("broken.png"));
}

#[test]
fn sixteen_bit_keeps_high_byte() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("deep.png");
    // Values whose high byte differs from a rounding conversion (x / 257).
    let samples: [[u16; 3]; 4] = [
        [0x00ff, 0x0180, 0xffff],
        [0x7fff, 0x8000, 0x80ff],
        [0x1234, 0xabcd, 0x00fe],
        [0xfe80, 0x0001, 0x4242],
    ];
    let buf: ImageBuffer<Rgb<u16>, Vec<u16>> = ImageBuffer::from_fn(2, 2, |x, y| Rgb(samples[(y * 2 + x) as usize]));
    buf.save(&path).unwrap();

    let img = load_image(&path).unwrap();
    for y in 0..2 {
        for x in 0..2 {
            let s = samples[(y * 2 + x) as usize];
            let want = [(s[0] >> 8) as u8, (s[1] >> 8) as u8, (s[2] >> 8) as u8];
            assert_eq!(img.pixel(x, y), want);
        }
    }
}

#[test]
fn alpha_is_dropped() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("alpha.png");
    let buf = ImageBuffer::from_fn(3, 1, |x, _| Rgba([x as u8 * 10, 20, 30, (x * 100) as u8]));
    buf.save(&path).unwrap();
    let img = load_image(&path).unwrap();
    assert_eq!(img.pixel(0, 0), [0, 20, 30]);
    assert_eq!(img.pixel(2, 0), [20, 20, 30]);
}

#[test]
fn bmp_decodes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.bmp");
    let src = noise(5, 3, 1);
    let buf: ImageBuffer<Rgb<u8>, _> = ImageBuffer::from_raw(5, 3, src.as_raw().to_vec()).unwrap();
    buf.save(&path).unwrap();
    assert_eq!(load_image(&path).unwrap(), src);
}

#[test]
fn round_trip_64() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.png");
    let img = noise(64, 64, 42);
    save_image(&img, &path).unwrap();
    assert_eq!(load_image(&path).unwrap(), img);
}

#[test]
fn one_by_one_png() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.png");
    let img = Image::from_raw(1, 1, vec![7, 8, 9]).unwrap();
    save_image(&img, &path).unwrap();
    assert!(std::fs::read(&path).unwrap().starts_with(b"\x89PNG"));
    assert_eq!(load_image(&path).unwrap(), img);
}

#[test]
fn unwritable_destination_errors() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let err = save_image(&noise(2, 2, 0), blocker.join("out.png")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }), "{err:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn png_round_trip(w in 1u32..40, h in 1u32..40, seed in any::<u64>()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.png");
        let img = noise(w, h, seed);
        save_image(&img, &path).unwrap();
        prop_assert_eq!(load_image(&path).unwrap(), img);
    }
}
