//! Raster primitives shared by the impostor baker and the metrics.
//!
//! Images are 8-bit straight-alpha RGBA, row-major, with the origin at the
//! top-left corner and `y` growing downward.

mod io;
mod rect;
mod resize;

pub use io::{load_png, load_png_sequence, save_png};
pub use rect::{alpha_bbox, union_rects, Rect};
pub use resize::resize_area;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    ZeroDimension { width: u32, height: u32 },
    #[error("pixel buffer holds {actual} bytes, expected {expected} for {width}x{height} RGBA")]
    BufferLength {
        width: u32,
        height: u32,
        expected: usize,
        actual: usize,
    },
    #[error("rect ({x0},{y0})-({x1},{y1}) does not lie inside a {width}x{height} image")]
    RectOutOfBounds {
        x0: u32,
        y0: u32,
        x1: u32,
        y1: u32,
        width: u32,
        height: u32,
    },
    #[error("image codec error: {0}")]
    Codec(#[from] image::ImageError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Rgba = [u8; 4];

/// An 8-bit RGBA raster.
#[derive(Clone, PartialEq, Eq)]
pub struct ImageRgba {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl std::fmt::Debug for ImageRgba {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ImageRgba")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl ImageRgba {
    /// A fully transparent black image.
    pub fn new(width: u32, height: u32) -> Result<Self, ImagingError> {
        Self::filled(width, height, [0, 0, 0, 0])
    }

    pub fn filled(width: u32, height: u32, px: Rgba) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 {
            return Err(ImagingError::ZeroDimension { width, height });
        }
        let n = width as usize * height as usize;
        let mut data = Vec::with_capacity(n * 4);
        for _ in 0..n {
            data.extend_from_slice(&px);
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 {
            return Err(ImagingError::ZeroDimension { width, height });
        }
        let expected = width as usize * height as usize * 4;
        if data.len() != expected {
            return Err(ImagingError::BufferLength {
                width,
                height,
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        (y as usize * self.width as usize + x as usize) * 4
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> Rgba {
        let o = self.offset(x, y);
        [
            self.data[o],
            self.data[o + 1],
            self.data[o + 2],
            self.data[o + 3],
        ]
    }

    #[inline]
    pub fn put(&mut self, x: u32, y: u32, px: Rgba) {
        let o = self.offset(x, y);
        self.data[o..o + 4].copy_from_slice(&px);
    }

    /// One row of pixels as raw RGBA bytes.
    pub fn row(&self, y: u32) -> &[u8] {
        let stride = self.width as usize * 4;
        let start = y as usize * stride;
        &self.data[start..start + stride]
    }

    pub fn bounds(&self) -> Rect {
        Rect {
            x0: 0,
            y0: 0,
            x1: self.width,
            y1: self.height,
        }
    }

    /// Copy out the pixels covered by `rect`.
    pub fn crop(&self, rect: Rect) -> Result<ImageRgba, ImagingError> {
        self.check_rect(rect)?;
        let w = rect.width();
        let h = rect.height();
        let mut data = Vec::with_capacity(w as usize * h as usize * 4);
        for y in rect.y0..rect.y1 {
            let row = self.row(y);
            data.extend_from_slice(&row[rect.x0 as usize * 4..rect.x1 as usize * 4]);
        }
        ImageRgba::from_raw(w, h, data)
    }

    /// Overwrite the pixels starting at `(x, y)` with `src`.
    pub fn blit(&mut self, src: &ImageRgba, x: u32, y: u32) -> Result<(), ImagingError> {
        let rect = Rect {
            x0: x,
            y0: y,
            x1: x + src.width,
            y1: y + src.height,
        };
        self.check_rect(rect)?;
        let stride = self.width as usize * 4;
        let n = src.width as usize * 4;
        for sy in 0..src.height {
            let dst = (y + sy) as usize * stride + x as usize * 4;
            self.data[dst..dst + n].copy_from_slice(src.row(sy));
        }
        Ok(())
    }

    fn check_rect(&self, r: Rect) -> Result<(), ImagingError> {
        if r.x0 >= r.x1 || r.y0 >= r.y1 || r.x1 > self.width || r.y1 > self.height {
            return Err(ImagingError::RectOutOfBounds {
                x0: r.x0,
                y0: r.y0,
                x1: r.x1,
                y1: r.y1,
                width: self.width,
                height: self.height,
            });
        }
        Ok(())
    }
}

/// Source-over composite onto an opaque constant background.
///
/// Each channel is `(c·a + bg·(255 − a)) / 255` rounded half-up; the output
/// alpha is always 255.
pub fn composite_over(img: &ImageRgba, bg: [u8; 3]) -> ImageRgba {
    let mut data = img.data.clone();
    for px in data.chunks_exact_mut(4) {
        let a = px[3] as u32;
        for c in 0..3 {
            let num = px[c] as u32 * a + bg[c] as u32 * (255 - a);
            px[c] = ((2 * num + 255) / 510) as u8;
        }
        px[3] = 255;
    }
    ImageRgba {
        width: img.width,
        height: img.height,
        data,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_dimensions() {
        assert!(matches!(
            ImageRgba::new(0, 3),
            Err(ImagingError::ZeroDimension { .. })
        ));
        assert!(ImageRgba::from_raw(2, 2, vec![0; 15]).is_err());
    }

    #[test]
    fn composite_opaque_passthrough() {
        let img = ImageRgba::filled(1, 1, [100, 0, 0, 255]).unwrap();
        assert_eq!(composite_over(&img, [0, 0, 0]).get(0, 0), [100, 0, 0, 255]);
    }

    #[test]
    fn composite_transparent_is_background() {
        let img = ImageRgba::filled(1, 1, [200, 10, 30, 0]).unwrap();
        assert_eq!(composite_over(&img, [7, 8, 9]).get(0, 0), [7, 8, 9, 255]);
    }

    #[test]
    fn composite_half_alpha() {
        // 200 * 128 / 255 = 100.39
        let img = ImageRgba::filled(1, 1, [200, 0, 0, 128]).unwrap();
        assert_eq!(composite_over(&img, [0, 0, 0]).get(0, 0), [100, 0, 0, 255]);
    }

    #[test]
    fn composite_rounds_half_up() {
        // 1 * 255/2 ... pick a = 255/2 boundary: c=255, a=1, bg=0 -> 1.0 exactly
        let img = ImageRgba::filled(1, 1, [255, 0, 0, 1]).unwrap();
        assert_eq!(composite_over(&img, [0, 0, 0]).get(0, 0)[0], 1);
        // c=0, a=127, bg=255 -> 255*128/255 = 128 exactly
        let img = ImageRgba::filled(1, 1, [0, 0, 0, 127]).unwrap();
        assert_eq!(composite_over(&img, [255, 255, 255]).get(0, 0)[0], 128);
    }

    #[test]
    fn crop_and_blit_round_trip() {
        let mut img = ImageRgba::new(5, 4).unwrap();
        for y in 0..4 {
            for x in 0..5 {
                img.put(x, y, [x as u8, y as u8, 7, 255]);
            }
        }
        let r = Rect::new(1, 1, 4, 3).unwrap();
        let c = img.crop(r).unwrap();
        assert_eq!(c.dimensions(), (3, 2));
        assert_eq!(c.get(0, 0), [1, 1, 7, 255]);
        let mut canvas = ImageRgba::new(5, 4).unwrap();
        canvas.blit(&c, 1, 1).unwrap();
        assert_eq!(canvas.crop(r).unwrap(), c);
        assert!(canvas.blit(&c, 3, 3).is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn image() -> impl Strategy<Value = ImageRgba> {
            (1u32..6, 1u32..6).prop_flat_map(|(w, h)| {
                proptest::collection::vec(any::<u8>(), (w * h * 4) as usize)
                    .prop_map(move |d| ImageRgba::from_raw(w, h, d).unwrap())
            })
        }

        proptest! {
            #[test]
            fn composite_is_idempotent(img in image(), bg in any::<[u8; 3]>()) {
                let once = composite_over(&img, bg);
                prop_assert!(once.as_raw().chunks_exact(4).all(|p| p[3] == 255));
                prop_assert_eq!(composite_over(&once, bg), once);
            }
        }
    }
}
