//! Thresholding of grayscale rasters.
//!
//! Image column `x` runs along grid axis 0 and row `y` along axis 1, so a node
//! `(x, y)` is pixel `(x, y)` and each pixel is a unit square.

use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, GrayImage, ImageEncoder, ImageFormat, Luma};

use super::{MicrostructureError, PhaseGrid};
use crate::tensor_field::GridShape;

/// Reads a portable graymap (binary or ASCII) and labels pixels `≤ threshold`
/// as phase 1 (dark is hard), or `> threshold` when `invert` is set.
pub fn load_image_threshold(path: &Path, threshold: f64, invert: bool) -> Result<PhaseGrid, MicrostructureError> {
    let unreadable = |reason: String| MicrostructureError::UnreadableImage { path: path.display().to_string(), reason };
    let bytes = std::fs::read(path).map_err(|e| unreadable(e.to_string()))?;
    let img = image::load_from_memory_with_format(&bytes, ImageFormat::Pnm).map_err(|e| unreadable(e.to_string()))?;
    if img.width() < 1 || img.height() < 1 {
        return Err(unreadable("empty image".into()));
    }
    let (w, h) = (img.width(), img.height());
    let shape = GridShape::new(&[w as usize, h as usize], &[w as f64, h as f64])?;
    // thresholds are in the file's own gray range (maxval 255 or 65535)
    let value: Box<dyn Fn(u32, u32) -> f64> = match img {
        DynamicImage::ImageLuma8(g) => Box::new(move |x, y| g.get_pixel(x, y).0[0] as f64),
        DynamicImage::ImageLuma16(g) => Box::new(move |x, y| g.get_pixel(x, y).0[0] as f64),
        other => {
            let g = other.into_luma16();
            Box::new(move |x, y| g.get_pixel(x, y).0[0] as f64)
        }
    };
    let labels = (0..shape.nodes())
        .map(|node| {
            let idx = shape.multi_index(node);
            usize::from((value(idx[0] as u32, idx[1] as u32) <= threshold) != invert)
        })
        .collect();
    Ok(PhaseGrid::new(&shape, labels, 2))
}

/// Phase grid as an 8-bit image: phase 1 black, phase 0 white.
pub fn phase_grid_to_gray(pg: &PhaseGrid) -> GrayImage {
    assert_eq!(pg.shape().dim(), 2, "only 2-D phase grids map to images");
    let (w, h) = (pg.shape().points()[0] as u32, pg.shape().points()[1] as u32);
    GrayImage::from_fn(w, h, |x, y| {
        let l = pg.labels()[pg.shape().node_index(&[x as usize, y as usize])];
        Luma([if l == 1 { 0 } else { 255 }])
    })
}

/// Image from gray levels in `[0, 255]` indexed by grid node.
pub fn gray_image(shape: &GridShape, level: impl Fn(usize) -> u8) -> GrayImage {
    let (w, h) = (shape.points()[0] as u32, shape.points()[1] as u32);
    GrayImage::from_fn(w, h, |x, y| Luma([level(shape.node_index(&[x as usize, y as usize]))]))
}

/// Writes a binary (P5) graymap.
pub fn write_pgm(path: &Path, img: &GrayImage) -> std::io::Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    PnmEncoder::new(file)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(img.as_raw(), img.width(), img.height(), ExtendedColorType::L8)
        .map_err(std::io::Error::other)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::microstructure::make_cubic_inclusion;

    #[test]
    fn checkerboard() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.pgm");
        let img = GrayImage::from_fn(2, 2, |x, y| Luma([if (x + y) % 2 == 0 { 20 } else { 230 }]));
        write_pgm(&path, &img).unwrap();
        assert_eq!(&std::fs::read(&path).unwrap()[..2], b"P5");
        let pg = load_image_threshold(&path, 128.0, false).unwrap();
        assert_eq!(pg.labels(), &[1, 0, 0, 1]);
        let inv = load_image_threshold(&path, 128.0, true).unwrap();
        assert_eq!(inv.labels(), &[0, 1, 1, 0]);
    }

    #[test]
    fn white_image_is_single_phase() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.pgm");
        write_pgm(&path, &GrayImage::from_pixel(4, 3, Luma([255]))).unwrap();
        let pg = load_image_threshold(&path, 100.0, false).unwrap();
        assert_eq!(pg.shape().points(), &[4, 3]);
        assert_eq!(pg.counts(), vec![12, 0]);
    }

    #[test]
    fn ascii_and_rectangular_orientation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.pgm");
        // 3 wide, 2 tall; the dark pixel is column 2 of row 0
        std::fs::write(&path, "P2\n# note\n3 2\n15\n15 15 0\n15 15 15\n").unwrap();
        let pg = load_image_threshold(&path, 7.0, false).unwrap();
        assert_eq!(pg.shape().points(), &[3, 2]);
        let dark: Vec<usize> = (0..6).filter(|&n| pg.labels()[n] == 1).collect();
        assert_eq!(dark, vec![pg.shape().node_index(&[2, 0])]);
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.pgm");
        let pg = make_cubic_inclusion(&GridShape::unit(&[7, 5]).unwrap(), 0.3).unwrap();
        write_pgm(&path, &phase_grid_to_gray(&pg)).unwrap();
        let back = load_image_threshold(&path, 127.0, false).unwrap();
        assert_eq!(back.labels(), pg.labels());
    }

    #[test]
    fn garbage_is_unreadable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.pgm");
        std::fs::write(&path, b"not an image").unwrap();
        assert!(matches!(
            load_image_threshold(&path, 1.0, false),
            Err(MicrostructureError::UnreadableImage { .. })
        ));
        assert!(load_image_threshold(&dir.path().join("missing.pgm"), 1.0, false).is_err());
    }
}
