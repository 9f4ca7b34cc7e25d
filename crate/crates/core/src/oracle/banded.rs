//! Symmetric banded matrices with in-place Cholesky factorization.

#[derive(Debug, Clone)]
pub(crate) struct BandMatrix {
    n: usize,
    bw: usize,
    // Row-major lower band: entry (i, j) for i − bw ≤ j ≤ i.
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (j + self.bw - i)
    }

    /// Entry `(i, j)` of the symmetric matrix; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.index(i, j)]
        }
    }

    /// Adds `v` to `(i, j)` of the lower triangle, `j ≤ i`.
    pub fn add_lower(&mut self, i: usize, j: usize, v: f64) {
        let k = self.index(i, j);
        self.data[k] += v;
    }

    pub fn add_diagonal(&mut self, v: f64) {
        for i in 0..self.n {
            let k = self.index(i, i);
            self.data[k] += v;
        }
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i).abs()).fold(0.0, f64::max)
    }

    /// Replaces the matrix by its Cholesky factor `L`. Fails on a
    /// non-positive pivot.
    pub fn cholesky(mut self) -> Option<BandCholesky> {
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..=i {
                let mut sum = self.data[self.index(i, j)];
                for k in lo.max(j.saturating_sub(self.bw))..j {
                    sum -= self.data[self.index(i, k)] * self.data[self.index(j, k)];
                }
                if i == j {
                    if !(sum > 0.0) || !sum.is_finite() {
                        return None;
                    }
                    let k = self.index(i, i);
                    self.data[k] = sum.sqrt();
                } else {
                    let k = self.index(i, j);
                    self.data[k] = sum / self.data[self.index(j, j)];
                }
            }
        }
        Some(BandCholesky { factor: self })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct BandCholesky {
    factor: BandMatrix,
}

impl BandCholesky {
    /// Solves `L·Lᵀ·x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let l = &self.factor;
        let n = l.n;
        for i in 0..n {
            let mut sum = b[i];
            for k in i.saturating_sub(l.bw)..i {
                sum -= l.data[l.index(i, k)] * b[k];
            }
            b[i] = sum / l.data[l.index(i, i)];
        }
        for i in (0..n).rev() {
            let mut sum = b[i];
            for k in (i + 1)..n.min(i + l.bw + 1) {
                sum -= l.data[l.index(k, i)] * b[k];
            }
            b[i] = sum / l.data[l.index(i, i)];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn matches_dense_solve() {
        let n = 23;
        let bw = 4;
        let mut band = BandMatrix::zeros(n, bw);
        let mut dense = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(bw)..=i {
                let v = if i == j {
                    10.0 + i as f64
                } else {
                    1.0 / (1.0 + (i + 2 * j) as f64)
                };
                band.add_lower(i, j, v);
                dense[(i, j)] = v;
                dense[(j, i)] = v;
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = band.cholesky().unwrap().solve(&b);
        let expected = dense.cholesky().unwrap().solve(&DVector::from_vec(b));
        for i in 0..n {
            assert!((x[i] - expected[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_indefinite() {
        let mut band = BandMatrix::zeros(3, 1);
        band.add_lower(0, 0, 1.0);
        band.add_lower(1, 0, 2.0);
        band.add_lower(1, 1, 1.0);
        band.add_lower(2, 2, 1.0);
        assert!(band.cholesky().is_none());
    }
}
