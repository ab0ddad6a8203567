//! Stabilized impostor sprite atlases.
//!
//! A run cycle is baked into one atlas per LoD. All frames share a single
//! crop window (the union of their alpha bounding boxes) and each LoD applies
//! one global scale to every frame, so the character neither "breathes" nor
//! loses its root motion from frame to frame. Tiles are packed column-major:
//! frame `f` lands in column `f / rows`, row `f % rows`.
//!
//! Texture coordinates put `v = 0` at the top edge of the atlas image.
//! Renderers with a bottom-left origin must flip `v` themselves.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::{
    alpha_bbox, load_png, resize_area, save_png, union_rects, ImageRgba, ImagingError, Rect,
};

pub const DEFAULT_COLS: u32 = 6;
pub const DEFAULT_ROWS: u32 = 10;
pub const DEFAULT_TILE_SIZES: [u32; 4] = [1080, 540, 270, 135];

#[derive(Debug, Error)]
pub enum ImpostorError {
    #[error("no frames supplied")]
    EmptySequence,
    #[error("every frame is fully transparent")]
    FullyTransparent,
    #[error("frame {index} is {actual:?}, expected {expected:?}")]
    MismatchedFrames {
        index: usize,
        expected: (u32, u32),
        actual: (u32, u32),
    },
    #[error("{tiles} tiles do not fit a {cols}x{rows} atlas")]
    TooManyTiles { tiles: usize, cols: u32, rows: u32 },
    #[error("tile {index} is {actual:?}, expected square {size}x{size}")]
    NonUniformTiles {
        index: usize,
        size: u32,
        actual: (u32, u32),
    },
    #[error("frame {index} out of range (atlas holds {count})")]
    FrameOutOfRange { index: usize, count: usize },
    #[error("invalid atlas layout {cols}x{rows}")]
    InvalidLayout { cols: u32, rows: u32 },
    #[error("tile sizes must be non-empty and strictly decreasing: {0:?}")]
    InvalidTileSizes(Vec<u32>),
    #[error("margin {margin} leaves no room in a {tile_size} px tile")]
    MarginTooLarge { margin: u32, tile_size: u32 },
    #[error("atlas metadata mismatch: {0}")]
    Metadata(String),
    #[error(transparent)]
    Imaging(#[from] ImagingError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StabilizeOptions {
    /// Pixels with alpha strictly above this value count as content.
    pub alpha_threshold: u8,
    /// Transparent border kept on every side of the tile.
    pub margin: u32,
}

impl Default for StabilizeOptions {
    fn default() -> Self {
        Self {
            alpha_threshold: 0,
            margin: 0,
        }
    }
}

/// Crop window and scale shared by every frame of one LoD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stabilization {
    pub crop_window: Rect,
    pub global_scale: f64,
}

#[derive(Debug, Clone)]
pub struct StabilizedFrames {
    pub tiles: Vec<ImageRgba>,
    pub stabilization: Stabilization,
}

fn check_frames(frames: &[ImageRgba]) -> Result<(), ImpostorError> {
    let first = frames.first().ok_or(ImpostorError::EmptySequence)?;
    for (index, f) in frames.iter().enumerate() {
        if f.dimensions() != first.dimensions() {
            return Err(ImpostorError::MismatchedFrames {
                index,
                expected: first.dimensions(),
                actual: f.dimensions(),
            });
        }
    }
    Ok(())
}

/// Union of the per-frame alpha bounding boxes.
pub fn union_crop_window(frames: &[ImageRgba], alpha_threshold: u8) -> Result<Rect, ImpostorError> {
    check_frames(frames)?;
    let boxes: Vec<Rect> = frames
        .par_iter()
        .filter_map(|f| alpha_bbox(f, alpha_threshold))
        .collect();
    union_rects(boxes.iter()).ok_or(ImpostorError::FullyTransparent)
}

/// Placement of the scaled crop inside a square tile.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Placement {
    scale: f64,
    width: u32,
    height: u32,
    x: u32,
    y: u32,
}

fn placement(crop: Rect, tile_size: u32, margin: u32) -> Result<Placement, ImpostorError> {
    if 2 * margin >= tile_size {
        return Err(ImpostorError::MarginTooLarge { margin, tile_size });
    }
    let inner = tile_size - 2 * margin;
    let scale = inner as f64 / crop.width().max(crop.height()) as f64;
    let fit = |len: u32| ((len as f64 * scale).round() as u32).clamp(1, inner);
    let (width, height) = (fit(crop.width()), fit(crop.height()));
    Ok(Placement {
        scale,
        width,
        height,
        // odd remainders go to the right/bottom margin
        x: margin + (inner - width) / 2,
        y: margin + (inner - height) / 2,
    })
}

fn place(frame: &ImageRgba, crop: Rect, tile_size: u32, p: Placement) -> Result<ImageRgba, ImpostorError> {
    let content = resize_area(&frame.crop(crop)?, p.width, p.height)?;
    let mut tile = ImageRgba::new(tile_size, tile_size)?;
    tile.blit(&content, p.x, p.y)?;
    Ok(tile)
}

fn stabilize_with_window(
    frames: &[ImageRgba],
    crop: Rect,
    tile_size: u32,
    margin: u32,
) -> Result<StabilizedFrames, ImpostorError> {
    let p = placement(crop, tile_size, margin)?;
    let tiles = frames
        .par_iter()
        .map(|f| place(f, crop, tile_size, p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(StabilizedFrames {
        tiles,
        stabilization: Stabilization {
            crop_window: crop,
            global_scale: p.scale,
        },
    })
}

/// Crop every frame to the shared union window, apply one scale, and center
/// the result on a transparent `tile_size` square.
pub fn stabilize_frames(
    frames: &[ImageRgba],
    tile_size: u32,
    opts: &StabilizeOptions,
) -> Result<StabilizedFrames, ImpostorError> {
    let crop = union_crop_window(frames, opts.alpha_threshold)?;
    stabilize_with_window(frames, crop, tile_size, opts.margin)
}

/// Normalized texture rectangle of one atlas cell, `v` measured from the top.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UvRect {
    pub u0: f64,
    pub v0: f64,
    pub u1: f64,
    pub v1: f64,
}

#[derive(Debug, Clone)]
pub struct SpriteAtlas {
    pub image: ImageRgba,
    pub cols: u32,
    pub rows: u32,
    pub tile_size: u32,
    pub frame_count: usize,
    pub lod_level: u8,
    /// Present for atlases produced by the baker.
    pub stabilization: Option<Stabilization>,
}

/// `(column, row)` of frame `f` under column-major packing.
pub fn cell_of(frame: usize, rows: u32) -> (u32, u32) {
    ((frame / rows as usize) as u32, (frame % rows as usize) as u32)
}

/// Pack square tiles column-major into a `cols × rows` grid.
pub fn pack_atlas(tiles: &[ImageRgba], cols: u32, rows: u32) -> Result<SpriteAtlas, ImpostorError> {
    if cols == 0 || rows == 0 {
        return Err(ImpostorError::InvalidLayout { cols, rows });
    }
    if tiles.len() > cols as usize * rows as usize {
        return Err(ImpostorError::TooManyTiles {
            tiles: tiles.len(),
            cols,
            rows,
        });
    }
    let first = tiles.first().ok_or(ImpostorError::EmptySequence)?;
    let size = first.width();
    for (index, t) in tiles.iter().enumerate() {
        if t.dimensions() != (size, size) {
            return Err(ImpostorError::NonUniformTiles {
                index,
                size,
                actual: t.dimensions(),
            });
        }
    }
    let mut image = ImageRgba::new(cols * size, rows * size)?;
    for (f, t) in tiles.iter().enumerate() {
        let (c, r) = cell_of(f, rows);
        image.blit(t, c * size, r * size)?;
    }
    Ok(SpriteAtlas {
        image,
        cols,
        rows,
        tile_size: size,
        frame_count: tiles.len(),
        lod_level: 0,
        stabilization: None,
    })
}

impl SpriteAtlas {
    fn check_index(&self, frame: usize) -> Result<(), ImpostorError> {
        if frame >= self.frame_count {
            return Err(ImpostorError::FrameOutOfRange {
                index: frame,
                count: self.frame_count,
            });
        }
        Ok(())
    }

    pub fn tile_uv(&self, frame: usize) -> Result<UvRect, ImpostorError> {
        self.check_index(frame)?;
        let (c, r) = cell_of(frame, self.rows);
        let (cols, rows) = (self.cols as f64, self.rows as f64);
        Ok(UvRect {
            u0: c as f64 / cols,
            v0: r as f64 / rows,
            u1: (c + 1) as f64 / cols,
            v1: (r + 1) as f64 / rows,
        })
    }

    pub fn extract_tile(&self, frame: usize) -> Result<ImageRgba, ImpostorError> {
        self.check_index(frame)?;
        let (c, r) = cell_of(frame, self.rows);
        let s = self.tile_size;
        Ok(self
            .image
            .crop(Rect::new(c * s, r * s, (c + 1) * s, (r + 1) * s).expect("non-empty tile"))?)
    }

    pub fn metadata(&self, image_file: &str) -> AtlasMetadata {
        AtlasMetadata {
            image: image_file.to_string(),
            lod_level: self.lod_level,
            width: self.image.width(),
            height: self.image.height(),
            cols: self.cols,
            rows: self.rows,
            tile_size: self.tile_size,
            frame_count: self.frame_count,
            layout: "column-major".into(),
            v_origin: "top".into(),
            crop_window: self.stabilization.map(|s| s.crop_window),
            global_scale: self.stabilization.map(|s| s.global_scale),
        }
    }
}

/// Sidecar document written next to each atlas image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasMetadata {
    pub image: String,
    pub lod_level: u8,
    pub width: u32,
    pub height: u32,
    pub cols: u32,
    pub rows: u32,
    pub tile_size: u32,
    pub frame_count: usize,
    pub layout: String,
    pub v_origin: String,
    pub crop_window: Option<Rect>,
    pub global_scale: Option<f64>,
}

/// Write `<stem>.png` and `<stem>.json` into `dir`; returns both paths.
pub fn save_atlas(atlas: &SpriteAtlas, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf), ImpostorError> {
    fs::create_dir_all(dir)?;
    let png = dir.join(format!("{stem}.png"));
    let json = dir.join(format!("{stem}.json"));
    save_png(&atlas.image, &png)?;
    let meta = atlas.metadata(&format!("{stem}.png"));
    fs::write(&json, serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok((png, json))
}

/// Load an atlas from its sidecar document.
pub fn load_atlas(metadata_path: &Path) -> Result<SpriteAtlas, ImpostorError> {
    let meta: AtlasMetadata = serde_json::from_str(&fs::read_to_string(metadata_path)?)?;
    let dir = metadata_path.parent().unwrap_or(Path::new("."));
    let image = load_png(dir.join(&meta.image))?;
    if image.dimensions() != (meta.cols * meta.tile_size, meta.rows * meta.tile_size)
        || image.dimensions() != (meta.width, meta.height)
    {
        return Err(ImpostorError::Metadata(format!(
            "image is {:?}, layout says {}x{} tiles of {}",
            image.dimensions(),
            meta.cols,
            meta.rows,
            meta.tile_size
        )));
    }
    if meta.frame_count > (meta.cols * meta.rows) as usize {
        return Err(ImpostorError::TooManyTiles {
            tiles: meta.frame_count,
            cols: meta.cols,
            rows: meta.rows,
        });
    }
    let stabilization = match (meta.crop_window, meta.global_scale) {
        (Some(crop_window), Some(global_scale)) => Some(Stabilization {
            crop_window,
            global_scale,
        }),
        _ => None,
    };
    Ok(SpriteAtlas {
        image,
        cols: meta.cols,
        rows: meta.rows,
        tile_size: meta.tile_size,
        frame_count: meta.frame_count,
        lod_level: meta.lod_level,
        stabilization,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BakeOptions {
    pub cols: u32,
    pub rows: u32,
    pub stabilize: StabilizeOptions,
}

impl Default for BakeOptions {
    fn default() -> Self {
        Self {
            cols: DEFAULT_COLS,
            rows: DEFAULT_ROWS,
            stabilize: StabilizeOptions::default(),
        }
    }
}

/// Bake one atlas per tile size. The crop window is computed once at source
/// resolution; the scale is recomputed for each tile size.
pub fn bake_lod_chain(
    frames: &[ImageRgba],
    tile_sizes: &[u32],
    opts: &BakeOptions,
) -> Result<Vec<SpriteAtlas>, ImpostorError> {
    if tile_sizes.is_empty() || tile_sizes.windows(2).any(|w| w[1] >= w[0]) || tile_sizes.contains(&0) {
        return Err(ImpostorError::InvalidTileSizes(tile_sizes.to_vec()));
    }
    if frames.len() > opts.cols as usize * opts.rows as usize {
        return Err(ImpostorError::TooManyTiles {
            tiles: frames.len(),
            cols: opts.cols,
            rows: opts.rows,
        });
    }
    let crop = union_crop_window(frames, opts.stabilize.alpha_threshold)?;
    log::debug!("union crop window {crop:?}");
    tile_sizes
        .iter()
        .enumerate()
        .map(|(lod, &size)| {
            let st = stabilize_with_window(frames, crop, size, opts.stabilize.margin)?;
            let mut atlas = pack_atlas(&st.tiles, opts.cols, opts.rows)?;
            atlas.lod_level = lod as u8;
            atlas.stabilization = Some(st.stabilization);
            log::info!(
                "LoD {lod}: {}x{} atlas, scale {:.4}",
                atlas.image.width(),
                atlas.image.height(),
                st.stabilization.global_scale
            );
            Ok(atlas)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn frame_with_box(w: u32, h: u32, r: Rect, px: [u8; 4]) -> ImageRgba {
        let mut img = ImageRgba::new(w, h).unwrap();
        for y in r.y0..r.y1 {
            for x in r.x0..r.x1 {
                img.put(x, y, px);
            }
        }
        img
    }

    #[test]
    fn full_tile_is_a_no_op() {
        let mut img = ImageRgba::new(16, 16).unwrap();
        for y in 0..16 {
            for x in 0..16 {
                img.put(x, y, [x as u8 * 9, y as u8 * 11, 5, 200 + (x % 3) as u8]);
            }
        }
        let st = stabilize_frames(&[img.clone()], 16, &StabilizeOptions::default()).unwrap();
        assert_eq!(st.stabilization.global_scale, 1.0);
        assert_eq!(st.tiles[0], img);
    }

    #[test]
    fn union_then_ratio() {
        let a = frame_with_box(100, 100, Rect::new(10, 10, 20, 20).unwrap(), [255; 4]);
        let b = frame_with_box(100, 100, Rect::new(5, 15, 25, 30).unwrap(), [255; 4]);
        let st = stabilize_frames(&[a, b], 40, &StabilizeOptions::default()).unwrap();
        assert_eq!(st.stabilization.crop_window, Rect::new(5, 10, 25, 30).unwrap());
        assert_eq!(st.stabilization.global_scale, 2.0);
        // 20x20 crop scaled to fill the 40x40 tile exactly
        assert_eq!(alpha_bbox(&st.tiles[1], 0), Rect::new(0, 10, 40, 40));
        assert_eq!(alpha_bbox(&st.tiles[0], 0), Rect::new(10, 0, 30, 20));
    }

    #[test]
    fn margin_shrinks_scale() {
        let a = frame_with_box(50, 50, Rect::new(0, 0, 10, 10).unwrap(), [255; 4]);
        let st = stabilize_frames(&[a], 24, &StabilizeOptions { alpha_threshold: 0, margin: 2 }).unwrap();
        assert_eq!(st.stabilization.global_scale, 2.0);
        assert_eq!(alpha_bbox(&st.tiles[0], 0), Rect::new(2, 2, 22, 22));
    }

    #[test]
    fn odd_remainder_biases_top_left() {
        // 4 wide, 3 tall crop into 8: scale 2 -> 8x6, offset y = 1
        let a = frame_with_box(10, 10, Rect::new(2, 2, 6, 5).unwrap(), [255; 4]);
        let st = stabilize_frames(&[a], 8, &StabilizeOptions::default()).unwrap();
        assert_eq!(alpha_bbox(&st.tiles[0], 0), Rect::new(0, 1, 8, 7));
        // 4 wide, 2 tall crop into 9: scale 2.25 -> 9x5 (4.5 rounds to 5), offset y = 2
        let b = frame_with_box(10, 10, Rect::new(2, 2, 6, 4).unwrap(), [255; 4]);
        let st = stabilize_frames(&[b], 9, &StabilizeOptions::default()).unwrap();
        assert_eq!(alpha_bbox(&st.tiles[0], 0), Rect::new(0, 2, 9, 7));
    }

    #[test]
    fn stabilize_errors() {
        let o = StabilizeOptions::default();
        assert!(matches!(stabilize_frames(&[], 8, &o), Err(ImpostorError::EmptySequence)));
        let clear = ImageRgba::new(4, 4).unwrap();
        assert!(matches!(
            stabilize_frames(&[clear.clone()], 8, &o),
            Err(ImpostorError::FullyTransparent)
        ));
        let other = ImageRgba::new(5, 4).unwrap();
        assert!(matches!(
            stabilize_frames(&[clear, other], 8, &o),
            Err(ImpostorError::MismatchedFrames { index: 1, .. })
        ));
    }

    #[test]
    fn root_motion_is_preserved() {
        // a dot walking right by 3 px per frame keeps moving in the tiles
        let frames: Vec<ImageRgba> = (0..5)
            .map(|i| frame_with_box(40, 20, Rect::new(2 + 3 * i, 8, 6 + 3 * i, 12).unwrap(), [9; 4]))
            .collect();
        let st = stabilize_frames(&frames, 32, &StabilizeOptions::default()).unwrap();
        // crop is 16 wide -> scale 2
        assert_eq!(st.stabilization.global_scale, 2.0);
        let xs: Vec<u32> = st.tiles.iter().map(|t| alpha_bbox(t, 0).unwrap().x0).collect();
        assert_eq!(xs, vec![0, 6, 12, 18, 24]);
    }

    #[test]
    fn column_major_cells() {
        assert_eq!(cell_of(0, 10), (0, 0));
        assert_eq!(cell_of(12, 10), (1, 2));
        assert_eq!(cell_of(59, 10), (5, 9));
    }

    fn numbered_tiles(n: usize, size: u32) -> Vec<ImageRgba> {
        (0..n)
            .map(|i| ImageRgba::filled(size, size, [i as u8, 255 - i as u8, 3, 255]).unwrap())
            .collect()
    }

    #[test]
    fn pack_sixty_small_tiles() {
        let tiles = numbered_tiles(60, 135);
        let atlas = pack_atlas(&tiles, 6, 10).unwrap();
        assert_eq!(atlas.image.dimensions(), (810, 1350));
        assert_eq!(atlas.image.get(135, 270), [12, 243, 3, 255]);
        for (i, t) in tiles.iter().enumerate() {
            assert_eq!(&atlas.extract_tile(i).unwrap(), t);
        }
    }

    #[test]
    fn uv_rects() {
        let atlas = pack_atlas(&numbered_tiles(60, 2), 6, 10).unwrap();
        let uv = |f| atlas.tile_uv(f).unwrap();
        assert_eq!(uv(0), UvRect { u0: 0.0, v0: 0.0, u1: 1.0 / 6.0, v1: 0.1 });
        assert_eq!(uv(12), UvRect { u0: 1.0 / 6.0, v0: 0.2, u1: 2.0 / 6.0, v1: 0.3 });
        assert_eq!(uv(59), UvRect { u0: 5.0 / 6.0, v0: 0.9, u1: 1.0, v1: 1.0 });
        assert!(atlas.tile_uv(60).is_err());
    }

    #[test]
    fn uv_cells_do_not_overlap() {
        let atlas = pack_atlas(&numbered_tiles(37, 2), 6, 10).unwrap();
        let cells: Vec<UvRect> = (0..37).map(|f| atlas.tile_uv(f).unwrap()).collect();
        let area: f64 = cells.iter().map(|c| (c.u1 - c.u0) * (c.v1 - c.v0)).sum();
        assert!((area - 37.0 / 60.0).abs() < 1e-12);
        for (i, a) in cells.iter().enumerate() {
            for b in &cells[i + 1..] {
                let ox = a.u0.max(b.u0) < a.u1.min(b.u1) - 1e-12;
                let oy = a.v0.max(b.v0) < a.v1.min(b.v1) - 1e-12;
                assert!(!(ox && oy));
            }
        }
    }

    #[test]
    fn unused_cells_are_transparent_and_unreachable() {
        let atlas = pack_atlas(&numbered_tiles(1, 4), 6, 10).unwrap();
        assert_eq!(atlas.extract_tile(0).unwrap(), numbered_tiles(1, 4)[0]);
        assert!(matches!(
            atlas.extract_tile(1),
            Err(ImpostorError::FrameOutOfRange { .. })
        ));
        assert_eq!(atlas.image.get(4, 0), [0; 4]);
        assert_eq!(atlas.image.get(23, 39), [0; 4]);
    }

    #[test]
    fn pack_errors() {
        assert!(matches!(
            pack_atlas(&numbered_tiles(7, 2), 2, 3),
            Err(ImpostorError::TooManyTiles { .. })
        ));
        let mut tiles = numbered_tiles(2, 2);
        tiles.push(ImageRgba::new(3, 3).unwrap());
        assert!(matches!(
            pack_atlas(&tiles, 2, 2),
            Err(ImpostorError::NonUniformTiles { index: 2, .. })
        ));
        assert!(matches!(
            pack_atlas(&[ImageRgba::new(2, 3).unwrap()], 2, 2),
            Err(ImpostorError::NonUniformTiles { index: 0, .. })
        ));
    }

    #[test]
    fn lod_chain_shares_crop_and_halves() {
        // crop 40x60: scales 1.8/0.9/0.45 give integer, evenly offset placements
        let frames = synth::walker_sequence(6, 80, 80, Rect::new(20, 10, 60, 70).unwrap());
        let opts = BakeOptions::default();
        let chain = bake_lod_chain(&frames, &[108, 54, 27], &opts).unwrap();
        assert_eq!(chain.len(), 3);
        let crops: Vec<Rect> = chain.iter().map(|a| a.stabilization.unwrap().crop_window).collect();
        assert!(crops.iter().all(|c| *c == crops[0]));
        let l0 = chain[0].extract_tile(3).unwrap();
        let l1 = chain[1].extract_tile(3).unwrap();
        let down = resize_area(&l0, 54, 54).unwrap();
        let max_diff = down
            .as_raw()
            .iter()
            .zip(l1.as_raw())
            .map(|(a, b)| (*a as i32 - *b as i32).abs())
            .max()
            .unwrap();
        assert!(max_diff <= 1, "max channel difference {max_diff}");
    }

    #[test]
    fn lod_chain_rejects_bad_sizes() {
        let frames = vec![ImageRgba::filled(4, 4, [1; 4]).unwrap()];
        for sizes in [vec![], vec![8, 8], vec![4, 8]] {
            assert!(matches!(
                bake_lod_chain(&frames, &sizes, &BakeOptions::default()),
                Err(ImpostorError::InvalidTileSizes(_))
            ));
        }
    }

    #[test]
    fn atlas_file_round_trip() {
        let frames = synth::walker_sequence(7, 40, 40, Rect::new(5, 2, 35, 38).unwrap());
        let chain = bake_lod_chain(&frames, &[24, 12], &BakeOptions { cols: 3, rows: 3, ..Default::default() }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        for a in &chain {
            let (_, json) = save_atlas(a, dir.path(), &format!("atlas_lod{}", a.lod_level)).unwrap();
            let back = load_atlas(&json).unwrap();
            assert_eq!(back.stabilization, a.stabilization);
            assert_eq!(back.frame_count, 7);
            for f in 0..7 {
                assert_eq!(back.extract_tile(f).unwrap(), a.extract_tile(f).unwrap());
            }
        }
    }
}
