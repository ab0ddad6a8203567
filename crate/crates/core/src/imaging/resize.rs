use super::{ImageRgba, ImagingError};

/// Overlap weights between output cells and source pixels along one axis.
///
/// Coordinates are scaled by `dst * src` so that every overlap is an integer:
/// source pixel `i` spans `[i·dst, (i+1)·dst)` and output pixel `o` spans
/// `[o·src, (o+1)·src)`. Weights for one output cell sum to `src`.
fn axis_weights(src: u32, dst: u32) -> Vec<Vec<(usize, u64)>> {
    let (src, dst) = (src as u64, dst as u64);
    (0..dst)
        .map(|o| {
            let lo = o * src;
            let hi = lo + src;
            let first = lo / dst;
            let last = (hi - 1) / dst;
            (first..=last)
                .map(|i| {
                    let a = (i * dst).max(lo);
                    let b = ((i + 1) * dst).min(hi);
                    (i as usize, b - a)
                })
                .collect()
        })
        .collect()
}

/// Area-weighted (box filter) resampling.
///
/// Each output sample is the coverage-weighted mean of the source pixels its
/// footprint overlaps, computed in exact integer arithmetic and rounded
/// half-up per channel. For integer downscale factors this is the plain block
/// mean.
pub fn resize_area(img: &ImageRgba, out_w: u32, out_h: u32) -> Result<ImageRgba, ImagingError> {
    if out_w == 0 || out_h == 0 {
        return Err(ImagingError::ZeroDimension {
            width: out_w,
            height: out_h,
        });
    }
    let (w, h) = img.dimensions();
    if (w, h) == (out_w, out_h) {
        return Ok(img.clone());
    }
    let wx = axis_weights(w, out_w);
    let wy = axis_weights(h, out_h);

    // horizontal pass: h rows of out_w weighted sums
    let ow = out_w as usize;
    let mut tmp = vec![0u64; h as usize * ow * 4];
    for y in 0..h {
        let row = img.row(y);
        let dst = &mut tmp[y as usize * ow * 4..(y as usize + 1) * ow * 4];
        for (ox, taps) in wx.iter().enumerate() {
            let mut acc = [0u64; 4];
            for &(sx, wt) in taps {
                let p = &row[sx * 4..sx * 4 + 4];
                for c in 0..4 {
                    acc[c] += wt * p[c] as u64;
                }
            }
            dst[ox * 4..ox * 4 + 4].copy_from_slice(&acc);
        }
    }

    let den = w as u64 * h as u64;
    let mut out = Vec::with_capacity(ow * out_h as usize * 4);
    for taps in &wy {
        let mut acc = vec![0u64; ow * 4];
        for &(sy, wt) in taps {
            let src = &tmp[sy * ow * 4..(sy + 1) * ow * 4];
            for (a, s) in acc.iter_mut().zip(src) {
                *a += wt * s;
            }
        }
        out.extend(acc.iter().map(|&num| ((2 * num + den) / (2 * den)) as u8));
    }
    ImageRgba::from_raw(out_w, out_h, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gray(w: u32, h: u32, vals: &[u8]) -> ImageRgba {
        let data = vals.iter().flat_map(|&v| [v, v, v, v]).collect();
        ImageRgba::from_raw(w, h, data).unwrap()
    }

    #[test]
    fn zero_target_rejected() {
        let img = gray(2, 2, &[0; 4]);
        assert!(resize_area(&img, 0, 1).is_err());
        assert!(resize_area(&img, 1, 0).is_err());
    }

    #[test]
    fn constant_block() {
        let img = gray(2, 2, &[0; 4]);
        assert_eq!(resize_area(&img, 1, 1).unwrap().get(0, 0), [0; 4]);
    }

    #[test]
    fn block_mean() {
        let img = gray(2, 2, &[10, 20, 30, 40]);
        assert_eq!(resize_area(&img, 1, 1).unwrap().get(0, 0), [25; 4]);
    }

    #[test]
    fn mean_rounds_half_up() {
        // (10 + 11) / 2 = 10.5 -> 11
        let img = gray(2, 1, &[10, 11]);
        assert_eq!(resize_area(&img, 1, 1).unwrap().get(0, 0), [11; 4]);
    }

    #[test]
    fn halving_full_tile_keeps_constants() {
        let img = ImageRgba::filled(1080, 1080, [12, 34, 56, 78]).unwrap();
        let out = resize_area(&img, 540, 540).unwrap();
        assert!(out
            .as_raw()
            .chunks_exact(4)
            .all(|p| p == [12, 34, 56, 78]));
    }

    #[test]
    fn fractional_weights() {
        // 3 -> 2: out0 = (2·a + 1·b)/3, out1 = (1·b + 2·c)/3
        let img = gray(3, 1, &[0, 90, 180]);
        let out = resize_area(&img, 2, 1).unwrap();
        assert_eq!(out.get(0, 0)[0], 30);
        assert_eq!(out.get(1, 0)[0], 150);
    }

    #[test]
    fn integer_upscale_replicates() {
        let img = gray(2, 1, &[5, 200]);
        let out = resize_area(&img, 4, 2).unwrap();
        for y in 0..2 {
            assert_eq!(out.get(0, y)[0], 5);
            assert_eq!(out.get(1, y)[0], 5);
            assert_eq!(out.get(2, y)[0], 200);
            assert_eq!(out.get(3, y)[0], 200);
        }
    }

    proptest! {
        #[test]
        fn constant_stays_constant(
            w in 1u32..20, h in 1u32..20, ow in 1u32..20, oh in 1u32..20, px in any::<[u8; 4]>()
        ) {
            let img = ImageRgba::filled(w, h, px).unwrap();
            let out = resize_area(&img, ow, oh).unwrap();
            prop_assert!(out.as_raw().chunks_exact(4).all(|p| p == px));
        }

        #[test]
        fn integer_factor_conserves_sum(
            ow in 1u32..6, oh in 1u32..6, fx in 1u32..4, fy in 1u32..4,
            seed in proptest::collection::vec(any::<u8>(), 4 * 18 * 18)
        ) {
            let (w, h) = (ow * fx, oh * fy);
            let img = ImageRgba::from_raw(w, h, seed[..(w * h * 4) as usize].to_vec()).unwrap();
            let out = resize_area(&img, ow, oh).unwrap();
            let n = (fx * fy) as f64;
            for c in 0..4 {
                let src: f64 = img.as_raw().chunks_exact(4).map(|p| p[c] as f64).sum();
                let dst: f64 = out.as_raw().chunks_exact(4).map(|p| p[c] as f64).sum();
                // each output sample is off by at most half a level
                prop_assert!((src / n - dst).abs() <= 0.5 * (ow * oh) as f64 + 1e-9);
            }
            // and each sample is exactly the rounded block mean
            for oy in 0..oh {
                for ox in 0..ow {
                    for c in 0..4 {
                        let mut s = 0u32;
                        for dy in 0..fy {
                            for dx in 0..fx {
                                s += img.get(ox * fx + dx, oy * fy + dy)[c] as u32;
                            }
                        }
                        let expect = ((2 * s + fx * fy) / (2 * fx * fy)) as u8;
                        prop_assert_eq!(out.get(ox, oy)[c], expect);
                    }
                }
            }
        }
    }
}
