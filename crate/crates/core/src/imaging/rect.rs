use serde::{Deserialize, Serialize};

use super::ImageRgba;

/// Half-open pixel rectangle: `[x0, x1) × [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl Rect {
    /// Returns `None` for empty or inverted rectangles.
    pub fn new(x0: u32, y0: u32, x1: u32, y1: u32) -> Option<Self> {
        (x0 < x1 && y0 < y1).then_some(Self { x0, y0, x1, y1 })
    }

    pub fn width(&self) -> u32 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> u32 {
        self.y1 - self.y0
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect {
            x0: self.x0.min(other.x0),
            y0: self.y0.min(other.y0),
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
        }
    }

    /// Center in continuous pixel coordinates.
    pub fn center(&self) -> (f64, f64) {
        (
            (self.x0 + self.x1) as f64 / 2.0,
            (self.y0 + self.y1) as f64 / 2.0,
        )
    }
}

/// Tightest rectangle holding every pixel whose alpha exceeds `threshold`.
pub fn alpha_bbox(img: &ImageRgba, threshold: u8) -> Option<Rect> {
    let (w, h) = img.dimensions();
    let mut x0 = u32::MAX;
    let mut y0 = u32::MAX;
    let mut x1 = 0;
    let mut y1 = 0;
    for y in 0..h {
        let row = img.row(y);
        let mut first = None;
        let mut last = 0;
        for (x, px) in row.chunks_exact(4).enumerate() {
            if px[3] > threshold {
                first.get_or_insert(x as u32);
                last = x as u32;
            }
        }
        if let Some(first) = first {
            x0 = x0.min(first);
            x1 = x1.max(last + 1);
            y0 = y0.min(y);
            y1 = y + 1;
        }
    }
    debug_assert!(x1 <= w);
    Rect::new(x0, y0, x1, y1)
}

pub fn union_rects<'a, I>(rects: I) -> Option<Rect>
where
    I: IntoIterator<Item = &'a Rect>,
{
    rects.into_iter().fold(None, |acc: Option<Rect>, r| {
        Some(match acc {
            Some(a) => a.union(r),
            None => *r,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn with_opaque(w: u32, h: u32, pts: &[(u32, u32)]) -> ImageRgba {
        let mut img = ImageRgba::new(w, h).unwrap();
        for &(x, y) in pts {
            img.put(x, y, [255, 255, 255, 255]);
        }
        img
    }

    #[test]
    fn single_pixel_bbox() {
        let img = with_opaque(4, 4, &[(2, 1)]);
        assert_eq!(alpha_bbox(&img, 0), Rect::new(2, 1, 3, 2));
    }

    #[test]
    fn transparent_has_no_bbox() {
        let img = ImageRgba::new(4, 4).unwrap();
        assert_eq!(alpha_bbox(&img, 0), None);
    }

    #[test]
    fn two_pixel_bbox() {
        let img = with_opaque(8, 8, &[(1, 1), (6, 5)]);
        assert_eq!(alpha_bbox(&img, 0), Rect::new(1, 1, 7, 6));
    }

    #[test]
    fn threshold_is_strict() {
        let mut img = ImageRgba::new(3, 3).unwrap();
        img.put(0, 0, [0, 0, 0, 10]);
        img.put(2, 2, [0, 0, 0, 11]);
        assert_eq!(alpha_bbox(&img, 10), Rect::new(2, 2, 3, 3));
    }

    #[test]
    fn union_examples() {
        let a = Rect::new(10, 10, 20, 20).unwrap();
        let b = Rect::new(5, 15, 25, 30).unwrap();
        assert_eq!(union_rects([a].iter()), Some(a));
        assert_eq!(union_rects([a, b].iter()), Rect::new(5, 10, 25, 30));
        assert_eq!(union_rects([].iter()), None);
    }

    fn rect() -> impl Strategy<Value = Rect> {
        (0u32..50, 0u32..50, 1u32..50, 1u32..50)
            .prop_map(|(x, y, w, h)| Rect::new(x, y, x + w, y + h).unwrap())
    }

    proptest! {
        #[test]
        fn bbox_matches_exhaustive_scan(
            w in 1u32..12, h in 1u32..12,
            alphas in proptest::collection::vec(prop_oneof![Just(0u8), any::<u8>()], 144),
            threshold in prop_oneof![Just(0u8), any::<u8>()],
        ) {
            let mut img = ImageRgba::new(w, h).unwrap();
            for y in 0..h {
                for x in 0..w {
                    img.put(x, y, [1, 2, 3, alphas[(y * 12 + x) as usize]]);
                }
            }
            let hits: Vec<(u32, u32)> = (0..h)
                .flat_map(|y| (0..w).map(move |x| (x, y)))
                .filter(|&(x, y)| img.get(x, y)[3] > threshold)
                .collect();
            let bbox = alpha_bbox(&img, threshold);
            if hits.is_empty() {
                prop_assert_eq!(bbox, None);
            } else {
                let r = bbox.unwrap();
                prop_assert!(hits.iter().all(|&(x, y)| r.contains(x, y)));
                // every edge row/column carries a hit, so no smaller rect works
                prop_assert!(hits.iter().any(|&(x, _)| x == r.x0));
                prop_assert!(hits.iter().any(|&(x, _)| x == r.x1 - 1));
                prop_assert!(hits.iter().any(|&(_, y)| y == r.y0));
                prop_assert!(hits.iter().any(|&(_, y)| y == r.y1 - 1));
            }
        }

        #[test]
        fn union_is_commutative_and_associative(a in rect(), b in rect(), c in rect()) {
            prop_assert_eq!(a.union(&b), b.union(&a));
            prop_assert_eq!(a.union(&b).union(&c), a.union(&b.union(&c)));
            let u = union_rects([a, b, c].iter()).unwrap();
            prop_assert_eq!(u.x0, a.x0.min(b.x0).min(c.x0));
            prop_assert_eq!(u.y1, a.y1.max(b.y1).max(c.y1));
        }
    }
}
