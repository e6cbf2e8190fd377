//! Symmetric banded Cholesky solver for the assembled stiffness.
//!
//! Row-major lower-band storage: row `i` holds entries `A[i][j]` for
//! `j` in `[i - bw, i]`.  Pixel meshes numbered row-major have a small,
//! stable bandwidth, so this beats a dense or general sparse factor for
//! the problem sizes at hand and is fully deterministic.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BandError {
    #[error("matrix is not positive definite (pivot {0} at row {1})")]
    NotPositiveDefinite(f64, usize),
}

#[derive(Debug, Clone)]
pub struct BandedSpd {
    n: usize,
    bw: usize,
    /// data[i * (bw + 1) + (j - i + bw)] = A[i][j], j in [i-bw, i].
    data: Vec<f64>,
}

impl BandedSpd {
    pub fn new(n: usize, bw: usize) -> Self {
        BandedSpd {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn reset(&mut self) {
        self.data.fill(0.0);
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (j + self.bw - i)
    }

    /// Accumulate into the lower triangle; upper-triangle calls are
    /// mirrored, so callers may add both (i, j) and (j, i) halves or
    /// just one, as long as they are consistent about it.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        if j <= i {
            let k = self.idx(i, j);
            self.data[k] += v;
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if j <= i { (i, j) } else { (j, i) };
        if r - c > self.bw {
            0.0
        } else {
            self.data[self.idx(r, c)]
        }
    }

    /// In-place LL^T factorization.
    pub fn cholesky(mut self) -> Result<BandedChol, BandError> {
        let bw = self.bw;
        for j in 0..self.n {
            let k0 = j.saturating_sub(bw);
            let mut d = self.data[self.idx(j, j)];
            for k in k0..j {
                let l = self.data[self.idx(j, k)];
                d -= l * l;
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(BandError::NotPositiveDefinite(d, j));
            }
            let ljj = d.sqrt();
            let pjj = self.idx(j, j);
            self.data[pjj] = ljj;
            let imax = (j + bw).min(self.n - 1);
            for i in (j + 1)..=imax {
                let mut s = self.data[self.idx(i, j)];
                let k0 = i.saturating_sub(bw).max(k0);
                for k in k0..j {
                    s -= self.data[self.idx(i, k)] * self.data[self.idx(j, k)];
                }
                let pij = self.idx(i, j);
                self.data[pij] = s / ljj;
            }
        }
        Ok(BandedChol {
            n: self.n,
            bw: self.bw,
            data: self.data,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BandedChol {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandedChol {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.bw + 1) + (j + self.bw - i)]
    }

    /// Solve `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        // L y = b
        for i in 0..self.n {
            let k0 = i.saturating_sub(self.bw);
            let mut s = b[i];
            for k in k0..i {
                s -= self.at(i, k) * b[k];
            }
            b[i] = s / self.at(i, i);
        }
        // L^T x = y
        for i in (0..self.n).rev() {
            let imax = (i + self.bw).min(self.n - 1);
            let mut s = b[i];
            for k in (i + 1)..=imax {
                s -= self.at(k, i) * b[k];
            }
            b[i] = s / self.at(i, i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_banded_spd(n: usize, bw: usize, seed: u64) -> (BandedSpd, DMatrix<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dense = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(bw)..=i {
                let v: f64 = rng.gen_range(-1.0..1.0);
                dense[(i, j)] = v;
                dense[(j, i)] = v;
            }
            dense[(i, i)] += 2.0 * (bw as f64 + 1.0);
        }
        let mut band = BandedSpd::new(n, bw);
        for i in 0..n {
            for j in i.saturating_sub(bw)..=i {
                band.add(i, j, dense[(i, j)]);
            }
        }
        (band, dense)
    }

    #[test]
    fn matches_dense_cholesky_solve() {
        for (n, bw, seed) in [(1, 0, 1), (12, 3, 2), (60, 7, 3), (150, 25, 4)] {
            let (band, dense) = random_banded_spd(n, bw, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut x = b.clone();
            band.cholesky().unwrap().solve(&mut x);
            let xd = dense
                .clone()
                .cholesky()
                .unwrap()
                .solve(&DMatrix::from_column_slice(n, 1, &b));
            for i in 0..n {
                assert!(
                    (x[i] - xd[(i, 0)]).abs() <= 1e-10 * (1.0 + xd[(i, 0)].abs()),
                    "n={n} i={i}: {} vs {}",
                    x[i],
                    xd[(i, 0)]
                );
            }
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let mut band = BandedSpd::new(2, 1);
        band.add(0, 0, 1.0);
        band.add(1, 0, 3.0);
        band.add(1, 1, 1.0); // 1 - 9 < 0 on the second pivot
        assert!(matches!(
            band.cholesky(),
            Err(BandError::NotPositiveDefinite(_, 1))
        ));
    }

    #[test]
    fn symmetric_accumulation_ignores_upper_calls() {
        let mut band = BandedSpd::new(3, 1);
        band.add(0, 0, 4.0);
        band.add(1, 1, 4.0);
        band.add(2, 2, 4.0);
        band.add(1, 0, 1.0);
        band.add(0, 1, 1.0); // mirrored: no-op by contract
        assert_eq!(band.get(0, 1), 1.0);
        assert_eq!(band.get(1, 0), 1.0);
        assert_eq!(band.get(0, 2), 0.0);
    }
}
