/// Symmetric 4×4 error quadric, stored as its upper triangle:
///
/// ```text
/// | a b c d |
/// | b e f g |
/// | c f h i |
/// | d g i j |
/// ```
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Quadric([f64; 10]);

impl Quadric {
    /// `weight · (n·p + d)²` for the plane `n·p + d = 0` with unit `n`.
    pub fn from_plane(n: [f64; 3], d: f64, weight: f64) -> Self {
        let [a, b, c] = n;
        let w = weight;
        Self([
            w * a * a,
            w * a * b,
            w * a * c,
            w * a * d,
            w * b * b,
            w * b * c,
            w * b * d,
            w * c * c,
            w * c * d,
            w * d * d,
        ])
    }

    pub fn add(&mut self, o: &Quadric) {
        for (s, v) in self.0.iter_mut().zip(o.0) {
            *s += v;
        }
    }

    pub fn sum(&self, o: &Quadric) -> Quadric {
        let mut q = *self;
        q.add(o);
        q
    }

    /// `vᵀ Q v` for `v = (x, y, z, 1)`, clamped at zero.
    pub fn error(&self, p: [f64; 3]) -> f64 {
        let q = &self.0;
        let [x, y, z] = p;
        let e = q[0] * x * x
            + 2.0 * q[1] * x * y
            + 2.0 * q[2] * x * z
            + 2.0 * q[3] * x
            + q[4] * y * y
            + 2.0 * q[5] * y * z
            + 2.0 * q[6] * y
            + q[7] * z * z
            + 2.0 * q[8] * z
            + q[9];
        e.max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_distance_squared() {
        // z = 2 plane: n = (0,0,1), d = -2
        let q = Quadric::from_plane([0.0, 0.0, 1.0], -2.0, 1.0);
        assert_eq!(q.error([5.0, -3.0, 2.0]), 0.0);
        assert!((q.error([0.0, 0.0, 5.0]) - 9.0).abs() < 1e-12);
        let q3 = Quadric::from_plane([0.0, 0.0, 1.0], -2.0, 3.0);
        assert!((q3.error([0.0, 0.0, 0.0]) - 12.0).abs() < 1e-12);
    }

    #[test]
    fn sums_accumulate_planes() {
        let mut q = Quadric::from_plane([1.0, 0.0, 0.0], 0.0, 1.0);
        q.add(&Quadric::from_plane([0.0, 1.0, 0.0], 0.0, 1.0));
        assert!((q.error([3.0, 4.0, 100.0]) - 25.0).abs() < 1e-12);
    }
}
