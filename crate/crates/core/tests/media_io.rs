use quatfill::completion::SamplingMask;
use quatfill::media::{
    frame_file_name, load_mask, load_mask_for, load_media, save_mask, save_media, ColorImage,
    ColorVideo, Media,
};
use quatfill::Error;
use std::path::Path;

fn card(h: usize, w: usize, seed: usize) -> ColorImage {
    ColorImage::from_fn(h, w, |i, j| {
        [
            ((i * 7 + j * 3 + seed) % 256) as f64,
            ((i * j + seed) % 256) as f64,
            ((i + 2 * j) % 256) as f64,
        ]
    })
    .unwrap()
}

#[test]
fn png_and_bmp_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.png", "a.bmp"] {
        let p = dir.path().join(name);
        let img = Media::Image(card(9, 13, 1));
        save_media(&p, &img).unwrap();
        assert_eq!(load_media(&p).unwrap(), img);
    }
    let p = dir.path().join("a.jpg");
    assert!(matches!(
        save_media(&p, &Media::Image(card(2, 2, 0))),
        Err(Error::UnsupportedFormat(_))
    ));
}

#[test]
fn png_pixels_survive_resave() {
    let dir = tempfile::tempdir().unwrap();
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/astronaut_128.png");
    let m = load_media(&src).unwrap();
    let p = dir.path().join("copy.png");
    save_media(&p, &m).unwrap();
    let a = image::open(&src).unwrap().to_rgb8();
    let b = image::open(&p).unwrap().to_rgb8();
    assert_eq!(a.as_raw(), b.as_raw());
}

#[test]
fn sixteen_bit_png_rejected() {
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/rgb16.png");
    assert!(matches!(load_media(&src), Err(Error::UnsupportedDepth(_))));
}

#[test]
fn frame_directory_round_trip_and_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let frames = dir.path().join("v");
    let v = Media::Video(ColorVideo::new((0..4).map(|t| card(6, 5, t)).collect()).unwrap());
    save_media(&frames, &v).unwrap();
    std::fs::write(frames.join("notes.txt"), "ignored").unwrap();
    assert_eq!(load_media(&frames).unwrap(), v);

    std::fs::remove_file(frames.join(frame_file_name(3))).unwrap();
    assert!(matches!(load_media(&frames), Err(Error::Malformed(_))));

    let odd = dir.path().join("odd");
    save_media(
        &odd,
        &Media::Video(ColorVideo::new(vec![card(6, 5, 0)]).unwrap()),
    )
    .unwrap();
    quatfill::media::save_image(&odd.join(frame_file_name(2)), &card(5, 6, 0)).unwrap();
    assert!(matches!(load_media(&odd), Err(Error::ShapeMismatch(_))));
}

#[test]
fn mask_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.qmsk");
    let m = SamplingMask::generate(&[7, 9, 3], 0.35, 12).unwrap();
    save_mask(&p, &m).unwrap();
    let back = load_mask(&p).unwrap();
    assert_eq!(back, m);
    assert_eq!(back.count(), m.count());
    assert!(load_mask_for(&p, &[7, 9, 4]).is_err());

    save_mask(&p, &SamplingMask::full(&[4, 4]).unwrap()).unwrap();
    assert_eq!(load_mask(&p).unwrap().sr(), 1.0);

    // bit 9 of a 3x3 mask names flat index 9, which is out of bounds
    let mut bytes = std::fs::read(&p).unwrap();
    bytes.truncate(5);
    bytes.push(2);
    bytes.extend_from_slice(&3u64.to_le_bytes());
    bytes.extend_from_slice(&3u64.to_le_bytes());
    bytes.extend_from_slice(&[0, 0b10]);
    std::fs::write(&p, &bytes).unwrap();
    assert!(matches!(load_mask(&p), Err(Error::Malformed(_))));
}
