use std::path::Path;

use super::{ImageRgba, ImagingError};

/// Load a PNG, promoting gray/RGB inputs to RGBA with opaque alpha.
pub fn load_png(path: impl AsRef<Path>) -> Result<ImageRgba, ImagingError> {
    let img = image::open(path.as_ref())?.into_rgba8();
    let (w, h) = img.dimensions();
    ImageRgba::from_raw(w, h, img.into_raw())
}

pub fn save_png(img: &ImageRgba, path: impl AsRef<Path>) -> Result<(), ImagingError> {
    image::save_buffer_with_format(
        path.as_ref(),
        img.as_raw(),
        img.width(),
        img.height(),
        image::ExtendedColorType::Rgba8,
        image::ImageFormat::Png,
    )?;
    Ok(())
}

/// Load every `.png` in `dir`, ordered by the last run of digits in the
/// file name (`frame_2.png` before `frame_10.png`), then by name.
pub fn load_png_sequence(dir: impl AsRef<Path>) -> Result<Vec<ImageRgba>, ImagingError> {
    let mut files: Vec<(Option<u64>, String, std::path::PathBuf)> = Vec::new();
    for entry in std::fs::read_dir(dir.as_ref())? {
        let path = entry?.path();
        let is_png = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if !is_png {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("").to_string();
        let digits: String = stem
            .chars()
            .rev()
            .skip_while(|c| !c.is_ascii_digit())
            .take_while(|c| c.is_ascii_digit())
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect();
        files.push((digits.parse().ok(), stem, path));
    }
    files.sort();
    files.into_iter().map(|(_, _, p)| load_png(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.png");
        let data: Vec<u8> = (0..7 * 5 * 4).map(|i| (i * 37 % 256) as u8).collect();
        let img = ImageRgba::from_raw(7, 5, data).unwrap();
        save_png(&img, &path).unwrap();
        assert_eq!(load_png(&path).unwrap(), img);
    }

    #[test]
    fn sequences_sort_numerically() {
        let dir = tempfile::tempdir().unwrap();
        for i in [10u8, 2, 1] {
            let img = ImageRgba::filled(1, 1, [i, 0, 0, 255]).unwrap();
            save_png(&img, dir.path().join(format!("frame_{i}.png"))).unwrap();
        }
        std::fs::write(dir.path().join("notes.txt"), "x").unwrap();
        let seq = load_png_sequence(dir.path()).unwrap();
        assert_eq!(seq.iter().map(|f| f.get(0, 0)[0]).collect::<Vec<_>>(), vec![1, 2, 10]);
    }

    #[test]
    fn rgb_is_promoted_to_opaque() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgb.png");
        image::save_buffer_with_format(
            &path,
            &[10, 20, 30, 40, 50, 60],
            2,
            1,
            image::ExtendedColorType::Rgb8,
            image::ImageFormat::Png,
        )
        .unwrap();
        let img = load_png(&path).unwrap();
        assert_eq!(img.get(0, 0), [10, 20, 30, 255]);
        assert_eq!(img.get(1, 0), [40, 50, 60, 255]);
    }
}
