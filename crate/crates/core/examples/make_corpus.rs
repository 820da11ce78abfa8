//! Writes the synthetic 20-image test corpus used by the CLI acceptance suite.
//!
//! ```text
//! cargo run -p rce-core --example make_corpus -- crates/cli/tests/data/corpus
//! ```
//!
//! Images are 64x128 pedestrian-like figures: a vertical background
//! gradient, a torso and legs in random colors, and a round head. Two of the
//! images are written as BMP to exercise the second decoder.

use std::path::PathBuf;

use image::{ImageBuffer, Rgb};
use rce_core::{save_image, Image, RngStream};

fn color(rng: &mut RngStream) -> [u8; 3] {
    let b = rng.next_u64().to_le_bytes();
    [b[0], b[1], b[2]]
}

fn figure(seed: u64) -> Image {
    let mut rng = RngStream::from_seed(seed);
    let (top, bottom) = (color(&mut rng), color(&mut rng));
    let (shirt, pants, skin) = (color(&mut rng), color(&mut rng), color(&mut rng));
    let dx = rng.below(9) as i32 - 4;
    Image::from_fn(64, 128, |x, y| {
        let (xi, yi) = (x as i32 - dx, y as i32);
        let head = (xi - 32).pow(2) + (yi - 22).pow(2) <= 100;
        if head {
            skin
        } else if (20..44).contains(&xi) && (34..74).contains(&yi) {
            shirt
        } else if ((22..31).contains(&xi) || (33..42).contains(&xi)) && (74..120).contains(&yi) {
            pants
        } else {
            let t = y as f32 / 127.0;
            std::array::from_fn(|c| (top[c] as f32 * (1.0 - t) + bottom[c] as f32 * t).round() as u8)
        }
    })
    .unwrap()
}

fn main() {
    let root = PathBuf::from(std::env::args().nth(1).expect("usage: make_corpus <dir>"));
    for i in 0..20u64 {
        let cam = root.join(format!("cam{}", i % 2 + 1));
        std::fs::create_dir_all(&cam).unwrap();
        let img = figure(1000 + i);
        let stem = format!("{:04}_c{}", i / 2, i % 2 + 1);
        if i % 10 == 9 {
            let buf: ImageBuffer<Rgb<u8>, _> = ImageBuffer::from_raw(img.width(), img.height(), img.into_raw()).unwrap();
            buf.save(cam.join(format!("{stem}.bmp"))).unwrap();
        } else {
            save_image(&img, cam.join(format!("{stem}.png"))).unwrap();
        }
    }
}
