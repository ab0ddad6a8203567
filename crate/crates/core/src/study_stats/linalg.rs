//! Column-major dense matrix and Householder QR least squares.

use super::StatsError;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Self {
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            assert_eq!(c.len(), rows, "column length");
            data.extend_from_slice(c);
        }
        Self {
            rows,
            cols: columns.len(),
            data,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(n, p);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), p, "row length");
            for (j, v) in r.iter().enumerate() {
                m.set(i, j, *v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Columns `idx`, in that order.
    pub fn select_cols(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for &j in idx {
            data.extend_from_slice(self.col(j));
        }
        Self {
            rows: self.rows,
            cols: idx.len(),
            data,
        }
    }

    pub fn mul_vec(&self, b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (j, &bj) in b.iter().enumerate() {
            if bj != 0.0 {
                for (o, x) in out.iter_mut().zip(self.col(j)) {
                    *o += x * bj;
                }
            }
        }
        out
    }

    /// Copy with row `i` multiplied by `w[i]`.
    pub fn scale_rows(&self, w: &[f64]) -> Self {
        let mut m = self.clone();
        for j in 0..m.cols {
            for (x, s) in m.col_mut(j).iter_mut().zip(w) {
                *x *= s;
            }
        }
        m
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Least-squares solution of `x β ≈ y` by Householder QR. Fails when a
/// column is (numerically) a combination of earlier ones.
pub fn lstsq(x: &Matrix, y: &[f64]) -> Result<Vec<f64>, StatsError> {
    let (n, p) = (x.rows, x.cols);
    if y.len() != n {
        return Err(StatsError::Dimension(format!("{} responses for {n} rows", y.len())));
    }
    if p > n {
        return Err(StatsError::RankDeficient { rank: n, cols: p });
    }
    let mut a = x.clone();
    let mut qty = y.to_vec();
    let col_norms: Vec<f64> = (0..p).map(|j| dot(x.col(j), x.col(j)).sqrt()).collect();
    let mut rank_ok = true;
    for k in 0..p {
        let col = &mut a.data[k * n..(k + 1) * n];
        let norm = dot(&col[k..], &col[k..]).sqrt();
        if !(norm > 1e-10 * col_norms[k].max(f64::MIN_POSITIVE)) || col_norms[k] == 0.0 {
            rank_ok = false;
            break;
        }
        let alpha = if col[k] > 0.0 { -norm } else { norm };
        // v = col[k..] - alpha e1, stored in place; R_kk = alpha
        col[k] -= alpha;
        let vnorm2 = dot(&col[k..], &col[k..]);
        let v: Vec<f64> = col[k..].to_vec();
        col[k] = alpha;
        for c in col[k + 1..].iter_mut() {
            *c = 0.0;
        }
        for j in k + 1..p {
            let cj = &mut a.data[j * n + k..(j + 1) * n];
            let s = 2.0 * dot(&v, cj) / vnorm2;
            for (c, vi) in cj.iter_mut().zip(&v) {
                *c -= s * vi;
            }
        }
        let s = 2.0 * dot(&v, &qty[k..]) / vnorm2;
        for (q, vi) in qty[k..].iter_mut().zip(&v) {
            *q -= s * vi;
        }
    }
    if !rank_ok {
        let rank = rank_of(x);
        return Err(StatsError::RankDeficient { rank, cols: p });
    }
    let mut beta = vec![0.0; p];
    for k in (0..p).rev() {
        let mut s = qty[k];
        for j in k + 1..p {
            s -= a.get(k, j) * beta[j];
        }
        beta[k] = s / a.get(k, k);
    }
    Ok(beta)
}

/// Numerical rank by Gram-Schmidt with a relative drop tolerance.
pub fn rank_of(x: &Matrix) -> usize {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for j in 0..x.cols {
        let mut v = x.col(j).to_vec();
        let orig = dot(&v, &v).sqrt();
        for _ in 0..2 {
            for b in &basis {
                let s = dot(&v, b);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= s * bi;
                }
            }
        }
        let nv = dot(&v, &v).sqrt();
        if orig > 0.0 && nv > 1e-10 * orig {
            basis.push(v.into_iter().map(|a| a / nv).collect());
        }
    }
    basis.len()
}
